//! The extraction pipeline.
//!
//! `ρ_S⁰ → (U_BA ⊗ I) → (I_B ⊗ U_AE ⊗ I_X) → ρ_S²`, after which a rank-one
//! projective measurement `|Ψ⟩⟨Ψ|` is applied to the measured subsystems and
//! one outcome is kept. With `E₀ = tr[ρ_B H_B]` the initial battery energy and
//! `Z = E₀ I − H_B ⊗ I`, the stochastically extracted energy of that outcome is
//! `S = p ΔE = tr[Z ρ³]`, and its maximum over `|Ψ⟩` is the largest
//! eigenvalue of `𝓑 = tr_B[ρ Z]`:
//!
//! | family   | measured | `ρ` used in `𝓑`  |
//! |----------|----------|-------------------|
//! | `Povm`   | `AX`     | `tr_E ρ_S²`        |
//! | `Npovm1` | `AE`     | `tr_X ρ_S²`        |
//! | `Npovm2` | `AEX`    | `ρ_S²`             |

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QbattError, Result};
use crate::hilbert::{
    eig_hermitian, kron, partial_trace, real, unitary_from_hamiltonian, ComplexOperator, Subsystem, C64,
};
use crate::model::{default_initial_state, GhzSpec, InitialState, ModelParams};
use crate::noise::{dilation_unitary, NoiseSpec};

use Subsystem::{A, B, E, X};

/// Below this outcome probability `ΔE` is reported as undefined.
pub const MIN_PROBABILITY: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Povm,
    Npovm1,
    Npovm2,
}

impl Family {
    pub fn measured(self) -> &'static [Subsystem] {
        match self {
            Family::Povm => &[A, X],
            Family::Npovm1 => &[A, E],
            Family::Npovm2 => &[A, E, X],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Povm => "povm",
            Family::Npovm1 => "npovm1",
            Family::Npovm2 => "npovm2",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measurement {
    Povm,
    Npovm1,
    Npovm2,
    AccessiblePovm,
    AccessibleNpovm1,
}

impl Measurement {
    pub fn family(self) -> Family {
        match self {
            Measurement::Povm | Measurement::AccessiblePovm => Family::Povm,
            Measurement::Npovm1 | Measurement::AccessibleNpovm1 => Family::Npovm1,
            Measurement::Npovm2 => Family::Npovm2,
        }
    }

    pub fn is_accessible(self) -> bool {
        matches!(self, Measurement::AccessiblePovm | Measurement::AccessibleNpovm1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Measurement::Povm => "povm",
            Measurement::Npovm1 => "npovm1",
            Measurement::Npovm2 => "npovm2",
            Measurement::AccessiblePovm => "accessible-povm",
            Measurement::AccessibleNpovm1 => "accessible-npovm1",
        }
    }
}

impl std::str::FromStr for Measurement {
    type Err = QbattError;

    fn from_str(s: &str) -> Result<Self> {
        [
            Measurement::Povm,
            Measurement::Npovm1,
            Measurement::Npovm2,
            Measurement::AccessiblePovm,
            Measurement::AccessibleNpovm1,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| QbattError::Config(format!("unknown measurement family '{s}'")))
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub initial: InitialState,
    pub params: ModelParams,
    pub noise: NoiseSpec,
    pub measurement: Measurement,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.noise.validate()?;
        if let InitialState::Ghz(spec) = &self.initial {
            spec.validate()?;
        }
        let four_party = matches!(self.initial, InitialState::Ghz(GhzSpec { n: 4, .. }));
        if self.measurement == Measurement::Npovm2 && !four_party {
            return Err(QbattError::Scenario(
                "npovm2 needs X correlated from the start (4-party GHZ initial state)".into(),
            ));
        }
        Ok(())
    }
}

/// `ρ_S²` together with what is needed to score measurements on it.
#[derive(Clone, Debug)]
pub struct EvolvedSystem {
    state: ComplexOperator,
    initial_battery: ComplexOperator,
    battery_hamiltonian: ComplexOperator,
    initial_energy: f64,
}

/// Runs the preparation pipeline. The result always spans `B, A, E, X`:
/// for the product start `X` is a copy of the evolved environment marginal,
/// for the 3-party GHZ start it is `diag((1+l)/2, (1−l)/2)`, and for the
/// 4-party GHZ start it is part of the initial state and left untouched.
pub fn evolve(scenario: &Scenario) -> Result<EvolvedSystem> {
    scenario.validate()?;
    let rho0 = default_initial_state(&scenario.initial)?;
    let u_ba = unitary_from_hamiltonian(&scenario.params.battery_auxiliary_hamiltonian(), scenario.params.t)?;
    let u_ae = dilation_unitary(&scenario.noise)?;
    let id = |l| ComplexOperator::identity(vec![(l, 2)]);

    let has_x = rho0.has(X);
    let (first, second) = if has_x {
        (kron(&[u_ba, id(E)?, id(X)?])?, kron(&[id(B)?, u_ae, id(X)?])?)
    } else {
        (kron(&[u_ba, id(E)?])?, kron(&[id(B)?, u_ae])?)
    };
    let evolved = rho0.conjugate_by(&first)?.conjugate_by(&second)?;
    let state = if has_x {
        evolved
    } else {
        let rho_x = match &scenario.initial {
            InitialState::ProductExcited => partial_trace(&evolved, &[E])?.relabel(&[X])?,
            InitialState::Ghz(spec) => spec.marginal(X),
        };
        kron(&[evolved, rho_x])?
    };
    let initial_battery = partial_trace(&rho0, &[B])?;
    let battery_hamiltonian = scenario.params.battery_hamiltonian();
    let initial_energy = initial_battery.compose(&battery_hamiltonian)?.trace().re;
    Ok(EvolvedSystem {
        state,
        initial_battery,
        battery_hamiltonian,
        initial_energy,
    })
}

impl EvolvedSystem {
    pub fn state(&self) -> &ComplexOperator {
        &self.state
    }

    pub fn initial_battery(&self) -> &ComplexOperator {
        &self.initial_battery
    }

    pub fn battery_hamiltonian(&self) -> &ComplexOperator {
        &self.battery_hamiltonian
    }

    /// `E₀ = tr[ρ_B H_B]` of the initial battery state.
    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    /// Reduced state over `B` and the subsystems measured by `family`.
    pub fn measured_state(&self, family: Family) -> Result<ComplexOperator> {
        let mut keep = vec![B];
        keep.extend_from_slice(family.measured());
        partial_trace(&self.state, &keep)
    }

    pub fn b_operator(&self, family: Family) -> Result<ComplexOperator> {
        b_operator(&self.state, &self.initial_battery, &self.battery_hamiltonian, family)
    }

    pub fn stochastic_energy(&self, family: Family, projector: &DVector<C64>) -> Result<Outcome> {
        stochastic_energy(
            &self.measured_state(family)?,
            projector,
            &self.battery_hamiltonian,
            self.initial_energy,
        )
    }

    /// Optimal projector for `family` and the outcome it produces.
    pub fn extract(&self, family: Family) -> Result<ExtractionResult> {
        let b = self.b_operator(family)?;
        let top = max_extractable(&b)?;
        let outcome = self.stochastic_energy(family, &top.projector)?;
        Ok(ExtractionResult {
            family,
            s_max: top.value,
            optimal_projector: top.projector,
            outcome,
        })
    }

    /// `(ρ_AE², ρ_A² ⊗ ρ_X)`: the states a type-1 and a positive measurement
    /// act on.
    pub fn measured_pair_states(&self) -> Result<(ComplexOperator, ComplexOperator)> {
        let ae = partial_trace(&self.state, &[A, E])?;
        let ax = partial_trace(&self.state, &[A, X])?;
        Ok((ae, ax))
    }
}

/// `E₀ I − H_B ⊗ I` over `B` followed by `ancilla`.
pub fn z_operator(
    rho_b: &ComplexOperator,
    h_b: &ComplexOperator,
    ancilla: &[(Subsystem, usize)],
) -> Result<ComplexOperator> {
    let e0 = rho_b.compose(h_b)?.trace().re;
    if ancilla.is_empty() {
        return ComplexOperator::identity(h_b.layout().to_vec())?.scale(e0).sub(h_b);
    }
    let mut layout = h_b.layout().to_vec();
    layout.extend_from_slice(ancilla);
    let id_anc = ComplexOperator::identity(ancilla.to_vec())?;
    let h_full = kron(&[h_b.clone(), id_anc])?;
    let id = ComplexOperator::identity(layout)?;
    id.scale(e0).sub(&h_full)
}

/// `tr_B[ρ Z]` over the subsystems measured by `family`.
///
/// `rho_s2` must contain `B` and the measured subsystems; anything else is
/// traced out first.
pub fn b_operator(
    rho_s2: &ComplexOperator,
    rho_b0: &ComplexOperator,
    h_b: &ComplexOperator,
    family: Family,
) -> Result<ComplexOperator> {
    if rho_s2.labels().first() != Some(&B) {
        return Err(QbattError::LayoutMismatch("state must start with the battery".into()));
    }
    let mut keep = vec![B];
    keep.extend_from_slice(family.measured());
    let reduced = partial_trace(rho_s2, &keep)?;
    let ancilla: Vec<(Subsystem, usize)> = reduced.layout()[1..].to_vec();
    let z = z_operator(rho_b0, h_b, &ancilla)?;
    let product = reduced.compose(&z)?;
    let b = partial_trace(&product, family.measured())?;
    let dev = b.hermitian_deviation();
    if dev > 1e-10 {
        return Err(QbattError::NotHermitian(dev));
    }
    Ok(b.hermitian_part())
}

/// Largest eigenvalue of a `𝓑` operator and its eigenvector.
#[derive(Clone, Debug)]
pub struct TopEigen {
    pub value: f64,
    pub projector: DVector<C64>,
}

pub fn max_extractable(b_op: &ComplexOperator) -> Result<TopEigen> {
    let (value, projector) = eig_hermitian(b_op)?.top();
    Ok(TopEigen { value, projector })
}

/// One selected measurement outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub p: f64,
    /// Undefined when `p` is below [`MIN_PROBABILITY`].
    pub delta_e: Option<f64>,
    pub s: f64,
}

#[derive(Clone, Debug)]
pub struct ExtractionResult {
    pub family: Family,
    pub s_max: f64,
    pub optimal_projector: DVector<C64>,
    pub outcome: Outcome,
}

/// Probability, energy drop and `S = p ΔE` for the outcome `|Ψ⟩` measured on
/// every subsystem of `rho` after the battery.
pub fn stochastic_energy(
    rho: &ComplexOperator,
    projector: &DVector<C64>,
    h_b: &ComplexOperator,
    initial_energy: f64,
) -> Result<Outcome> {
    if rho.labels().first() != Some(&B) {
        return Err(QbattError::LayoutMismatch("state must start with the battery".into()));
    }
    let db = rho.layout()[0].1;
    let dm = rho.dim() / db;
    if projector.len() != dm {
        return Err(QbattError::InvalidVector(format!(
            "projector has length {}, measured space has dimension {dm}",
            projector.len()
        )));
    }
    if (projector.norm() - 1.0).abs() > 1e-10 {
        return Err(QbattError::InvalidVector(format!("projector norm {}", projector.norm())));
    }
    // Unnormalised post-measurement battery state: w[b,b'] = ⟨b Ψ|ρ|b' Ψ⟩.
    let m = rho.matrix();
    let w = DMatrix::from_fn(db, db, |b1, b2| {
        let mut acc = real(0.0);
        for i in 0..dm {
            let left = projector[i].conj();
            if left.norm() == 0.0 {
                continue;
            }
            for j in 0..dm {
                acc += left * m[(b1 * dm + i, b2 * dm + j)] * projector[j];
            }
        }
        acc
    });
    let p = w.trace().re;
    let final_energy = (&w * h_b.matrix()).trace().re;
    if p <= MIN_PROBABILITY {
        return Ok(Outcome {
            p: p.max(0.0),
            delta_e: None,
            s: 0.0,
        });
    }
    let delta_e = initial_energy - final_energy / p;
    Ok(Outcome {
        p,
        delta_e: Some(delta_e),
        s: p * delta_e,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectraReport {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub max_gap: f64,
    pub compatible: bool,
}

/// Whether two states share a spectrum (within 1e-9), i.e. whether one can be
/// rotated into the other by a unitary.
pub fn spectra_compare(first: &ComplexOperator, second: &ComplexOperator) -> Result<SpectraReport> {
    if first.dim() != second.dim() {
        return Err(QbattError::LayoutMismatch(format!(
            "dimensions {} and {}",
            first.dim(),
            second.dim()
        )));
    }
    let a = eig_hermitian(first)?.values;
    let b = eig_hermitian(second)?.values;
    let max_gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(SpectraReport {
        first: a,
        second: b,
        max_gap,
        compatible: max_gap <= 1e-9,
    })
}
