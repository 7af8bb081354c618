//! A sweep assembled in code: bit-flip noise, interaction time on the axis,
//! a stronger battery field.

use qbatt::cli::csv;
use qbatt::noise::NoiseKind;
use qbatt::protocol::Measurement;
use qbatt::scenarios::{Axis, Grid, Series, Sweep, SweepResult};

pub fn run(points: usize) -> qbatt::Result<SweepResult> {
    let mut sweep = Sweep::fig3();
    sweep.name = "bit-flip-time".into();
    sweep.noise.kind = NoiseKind::BitFlip;
    sweep.noise.k = 0.25;
    sweep.params.h_b = 1.5;
    sweep.axes = vec![Grid::linspace(Axis::T, 0.0, 1.5, points)];
    sweep.series = vec![
        Series::new(Measurement::Povm, None),
        Series::new(Measurement::Npovm1, None),
    ];
    sweep.run()
}

fn main() -> qbatt::Result<()> {
    let res = run(16)?;
    print!("{}", csv::render(&res)?);
    for (label, lo, hi, mean) in res.summary() {
        println!("{label}: min {lo:.5} max {hi:.5} mean {mean:.5}");
    }
    Ok(())
}
