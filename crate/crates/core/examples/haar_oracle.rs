//! The top eigenvalue of a B-operator is the best any measurement direction
//! can do; random directions approach it from below.

use qbatt::model::{InitialState, ModelParams};
use qbatt::noise::{NoiseKind, NoiseSpec};
use qbatt::optimizer::sampled_supremum;
use qbatt::protocol::{evolve, max_extractable, Family, Measurement, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `(family, top eigenvalue, best sampled value)`.
pub fn run(kind: NoiseKind, k: f64, samples: usize, seed: u64) -> qbatt::Result<Vec<(Family, f64, f64)>> {
    let sys = evolve(&Scenario {
        initial: InitialState::ProductExcited,
        params: ModelParams::default(),
        noise: NoiseSpec::new(kind, k)?,
        measurement: Measurement::Povm,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [Family::Povm, Family::Npovm1]
        .into_iter()
        .map(|f| {
            let b = sys.b_operator(f)?;
            let beta = max_extractable(&b)?.value;
            let (best, _) = sampled_supremum(&b, samples, &mut rng)?;
            Ok((f, beta, best))
        })
        .collect()
}

fn main() -> qbatt::Result<()> {
    for n in [10, 1_000, 100_000] {
        for (f, beta, best) in run(NoiseKind::BitFlip, 0.3, n, 7)? {
            println!("{n:>7} samples {:7} beta={beta:.6} sampled={best:.6} short by {:.2e}", f.to_string(), beta - best);
        }
    }
    Ok(())
}
