//! S_max against noise strength for the POVM under three noises and the
//! type-1 NPOVM. Writes `fig1.csv` and `fig1.svg` into the directory given as
//! the first argument (default `results`).

use std::path::Path;

use qbatt::cli::{csv::emit_csv, svg::{emit_svg, PlotKind}};
use qbatt::scenarios::{Sweep, SweepResult};

pub fn run(points: usize) -> qbatt::Result<SweepResult> {
    let mut sweep = Sweep::fig1();
    sweep.axes[0] = qbatt::scenarios::Grid::linspace(qbatt::scenarios::Axis::K, 0.0, 1.0, points);
    sweep.run()
}

fn main() -> qbatt::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "results".into());
    std::fs::create_dir_all(&out).map_err(|source| qbatt::QbattError::Io { path: out.clone().into(), source })?;
    let res = run(101)?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "k", "P[bf]", "P[ad]", "P[dp]", "NP1");
    for chunk in res.rows.chunks(4).step_by(10) {
        println!(
            "{:>5.2} {:>12.8} {:>12.8} {:>12.8} {:>12.8}",
            chunk[0].k, chunk[0].s_max, chunk[1].s_max, chunk[2].s_max, chunk[3].s_max
        );
    }
    emit_csv(&res, &Path::new(&out).join("fig1.csv"))?;
    emit_svg(&res, &Path::new(&out).join("fig1.svg"), PlotKind::Lines)?;
    Ok(())
}
