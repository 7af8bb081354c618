//! One scenario through the whole pipeline: evolve, build the B-operators,
//! pick the best outcome for each measurement family.

use qbatt::model::{InitialState, ModelParams};
use qbatt::noise::{NoiseKind, NoiseSpec};
use qbatt::protocol::{evolve, ExtractionResult, Family, Measurement, Scenario};

pub fn run(kind: NoiseKind, k: f64) -> qbatt::Result<Vec<ExtractionResult>> {
    let sys = evolve(&Scenario {
        initial: InitialState::ProductExcited,
        params: ModelParams::default(),
        noise: NoiseSpec::new(kind, k)?,
        measurement: Measurement::Npovm1,
    })?;
    [Family::Povm, Family::Npovm1].into_iter().map(|f| sys.extract(f)).collect()
}

fn main() -> qbatt::Result<()> {
    for r in run(NoiseKind::AmplitudeDamping, 0.4)? {
        let de = r.outcome.delta_e.map(|d| format!("{d:.6}")).unwrap_or_else(|| "-".into());
        println!(
            "{:7} S_max={:.8}  p={:.6}  dE={de}  p*dE={:.8}",
            r.family.to_string(),
            r.s_max,
            r.outcome.p,
            r.outcome.s
        );
    }
    Ok(())
}
