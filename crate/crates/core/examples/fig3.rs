//! Both families against interaction time at k = 0.5.

use qbatt::scenarios::{Axis, Grid, Sweep, SweepResult};

pub fn run(points: usize) -> qbatt::Result<SweepResult> {
    let mut sweep = Sweep::fig3();
    sweep.axes = vec![Grid::linspace(Axis::T, 0.0, 3.0, points)];
    sweep.run()
}

fn main() -> qbatt::Result<()> {
    let res = run(301)?;
    let p = res.values("povm");
    let n = res.values("npovm1");
    let ts = &res.axes[0].values;
    for i in (0..ts.len()).step_by(25) {
        println!("t={:.2}  P={:.6}  NP1={:.6}", ts[i], p[i], n[i]);
    }
    let peak = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("peaks: P {:.5}, NP1 {:.5}", peak(&p), peak(&n));
    Ok(())
}
