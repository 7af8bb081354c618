//! The state measured by the POVM (A with an uncorrelated X) and the one
//! measured by the type-1 NPOVM (A with E) have different spectra for
//! 0 < k < 1, so no unitary maps one onto the other.

use qbatt::model::ModelParams;
use qbatt::noise::NoiseKind;
use qbatt::scenarios::{linspace, run_appendix_d, AppendixDReport};

pub fn run(points: usize) -> qbatt::Result<AppendixDReport> {
    run_appendix_d(&linspace(0.0, 1.0, points), NoiseKind::AmplitudeDamping, ModelParams::default())
}

fn main() -> qbatt::Result<()> {
    for p in run(11)?.points {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
        println!(
            "k={:.1} AE [{}]  A(x)X [{}]  {}",
            p.k,
            fmt(&p.report.first),
            fmt(&p.report.second),
            if p.report.compatible { "same spectrum" } else { "different" }
        );
    }
    Ok(())
}
