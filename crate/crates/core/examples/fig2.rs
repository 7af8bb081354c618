//! GHZ-class start under amplitude damping: the type-2 NPOVM never does worse
//! than the POVM. Prints the gap at a few (k, l) points and writes the gap
//! heatmap.

use std::path::Path;

use qbatt::cli::{csv::emit_csv, svg::{emit_svg, PlotKind}};
use qbatt::scenarios::{Axis, Grid, Sweep, SweepResult};

pub fn run(k_points: usize, l_points: usize) -> qbatt::Result<SweepResult> {
    let mut sweep = Sweep::fig2();
    sweep.axes = vec![
        Grid::linspace(Axis::K, 0.0, 1.0, k_points),
        Grid::linspace(Axis::L, -1.0, 1.0, l_points),
    ];
    sweep.run()
}

fn main() -> qbatt::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "results".into());
    std::fs::create_dir_all(&out).map_err(|source| qbatt::QbattError::Io { path: out.clone().into(), source })?;
    let res = run(101, 81)?;
    let min = res.rows_for("povm").filter_map(|r| r.gap).fold(f64::INFINITY, f64::min);
    println!("smallest gap over the grid: {min:.3e}");
    for (k, l) in [(0.0, -1.0), (1.0, 1.0), (0.5, 0.5), (1.0, 0.0)] {
        let r = res
            .rows_for("povm")
            .find(|r| (r.k - k).abs() < 1e-12 && r.l.is_some_and(|x| (x - l).abs() < 1e-12))
            .expect("grid point");
        println!("k={k:.2} l={l:+.2}  S^P={:.6}  gap={:.4e}", r.s_max, r.gap.unwrap_or(f64::NAN));
    }
    emit_csv(&res, &Path::new(&out).join("fig2.csv"))?;
    emit_svg(&res, &Path::new(&out).join("fig2.svg"), PlotKind::Heatmap)?;
    Ok(())
}
