//! Accessible energy: the best outcome reachable with a fixed entangler and
//! local qubit rotations, compared for both readout orders.

use qbatt::noise::NoiseKind;
use qbatt::optimizer::ReadoutOrder;
use qbatt::protocol::Measurement;
use qbatt::scenarios::{Axis, Grid, Series, Sweep, SweepResult};

pub fn run(order: ReadoutOrder, ks: Vec<f64>, restarts: usize) -> qbatt::Result<SweepResult> {
    let mut sweep = Sweep::accessible();
    sweep.readout = order;
    sweep.optimizer.restarts = restarts;
    sweep.axes = vec![Grid { axis: Axis::K, values: ks }];
    sweep.series = NoiseKind::ALL
        .into_iter()
        .flat_map(|n| {
            [
                Series::new(Measurement::AccessiblePovm, Some(n)),
                Series::new(Measurement::AccessibleNpovm1, Some(n)),
            ]
        })
        .collect();
    sweep.run()
}

fn main() -> qbatt::Result<()> {
    for order in [ReadoutOrder::EntanglerFirst, ReadoutOrder::LocalFirst] {
        println!("{order:?}");
        let res = run(order, vec![0.01, 0.2, 0.5, 0.8], 32)?;
        for row in res.rows.iter().filter(|r| r.gap.is_some()) {
            println!(
                "  k={:.2} {:32} S_A={:.6} (S_max {:.6})  NP1 - P = {:+.3e}",
                row.k,
                row.family,
                row.value(),
                row.s_max,
                row.gap.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
