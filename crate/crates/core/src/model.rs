//! Hamiltonians and initial states of the battery model.
//!
//! Energies are in units of `h_A`, times in units of `1/h_A`, and ħ = 1.
//! Basis convention: `|e⟩ = (1, 0)ᵀ` is the σᶻ = +1 (excited) state and
//! `|g⟩ = (0, 1)ᵀ` the ground state, so `h σᶻ` gives `|e⟩` energy `+h`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QbattError, Result};
use crate::hilbert::{kron, kron_kets, real, sigma_x, sigma_z, ComplexOperator, Subsystem, C64};

pub fn ket_excited() -> DVector<C64> {
    DVector::from_vec(vec![real(1.0), real(0.0)])
}

pub fn ket_ground() -> DVector<C64> {
    DVector::from_vec(vec![real(0.0), real(1.0)])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub h_b: f64,
    pub h_a: f64,
    pub h_e: f64,
    pub h_x: f64,
    pub j_ba: f64,
    pub j_ae: f64,
    pub j_ax: f64,
    /// Battery–auxiliary interaction time.
    pub t: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            h_b: 1.0,
            h_a: 1.0,
            h_e: 1.0,
            h_x: 1.0,
            j_ba: 2.0,
            j_ae: 2.0,
            j_ax: 2.0,
            t: 0.15,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.h_b, self.h_a, self.h_e, self.h_x, self.j_ba, self.j_ae, self.j_ax, self.t];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(QbattError::Scenario(format!("non-finite model parameter in {self:?}")))
        }
    }

    /// `H_BA = h_B σᶻ⊗I + h_A I⊗σᶻ + J_BA σˣ⊗σˣ`.
    pub fn battery_auxiliary_hamiltonian(&self) -> ComplexOperator {
        coupling_hamiltonian(self.h_b, self.h_a, self.j_ba, (Subsystem::B, Subsystem::A))
    }

    pub fn battery_hamiltonian(&self) -> ComplexOperator {
        local_hamiltonian(self.h_b, Subsystem::B)
    }
}

/// `h σᶻ` on one qubit.
pub fn local_hamiltonian(h: f64, label: Subsystem) -> ComplexOperator {
    ComplexOperator::on_qubits(sigma_z() * real(h), &[label]).expect("2x2 on one qubit")
}

/// `h₁ σᶻ⊗I + h₂ I⊗σᶻ + J σˣ⊗σˣ` on an ordered qubit pair.
pub fn coupling_hamiltonian(h1: f64, h2: f64, j: f64, pair: (Subsystem, Subsystem)) -> ComplexOperator {
    let i2 = DMatrix::<C64>::identity(2, 2);
    let m = sigma_z().kronecker(&i2) * real(h1)
        + i2.kronecker(&sigma_z()) * real(h2)
        + sigma_x().kronecker(&sigma_x()) * real(j);
    ComplexOperator::on_qubits(m, &[pair.0, pair.1]).expect("4x4 on two qubits")
}

/// `√((1+l)/2)|e⟩^⊗n + √((1−l)/2)|g⟩^⊗n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzSpec {
    pub n: usize,
    pub l: f64,
}

impl GhzSpec {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        let spec = Self { n, l };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l.abs() <= 1.0) {
            return Err(QbattError::GhzParameter(self.l));
        }
        if !(2..=4).contains(&self.n) {
            return Err(QbattError::Scenario(format!(
                "GHZ party count {} unsupported (2..=4 labelled qubits)",
                self.n
            )));
        }
        Ok(())
    }

    /// Single-party marginal `diag((1+l)/2, (1−l)/2)`.
    pub fn marginal(&self, label: Subsystem) -> ComplexOperator {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            real((1.0 + self.l) / 2.0),
            real((1.0 - self.l) / 2.0),
        ]));
        ComplexOperator::on_qubits(m, &[label]).expect("2x2 on one qubit")
    }
}

/// Density matrix of the GHZ-class state on the first `n` of `B, A, E, X`.
pub fn ghz_state(spec: &GhzSpec) -> Result<ComplexOperator> {
    spec.validate()?;
    let n = spec.n;
    let up = kron_kets(&vec![ket_excited(); n]);
    let down = kron_kets(&vec![ket_ground(); n]);
    let ket = up * real(((1.0 + spec.l) / 2.0).sqrt()) + down * real(((1.0 - spec.l) / 2.0).sqrt());
    let layout = Subsystem::ORDER[..n].iter().map(|&s| (s, 2)).collect();
    ComplexOperator::projector(&ket, layout)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialState {
    /// `|e⟩_B |e⟩_A |g⟩_E`.
    ProductExcited,
    Ghz(GhzSpec),
}

/// Initial state over `BAE` (product or 3-party GHZ) or `BAEX` (4-party GHZ).
pub fn default_initial_state(kind: &InitialState) -> Result<ComplexOperator> {
    match kind {
        InitialState::ProductExcited => {
            let pe = |k: DVector<C64>, l| ComplexOperator::projector(&k, vec![(l, 2)]);
            kron(&[
                pe(ket_excited(), Subsystem::B)?,
                pe(ket_excited(), Subsystem::A)?,
                pe(ket_ground(), Subsystem::E)?,
            ])
        }
        InitialState::Ghz(spec) => {
            if spec.n != 3 && spec.n != 4 {
                return Err(QbattError::Scenario(format!(
                    "GHZ initial state needs n = 3 (BAE) or n = 4 (BAEX), got {}",
                    spec.n
                )));
            }
            ghz_state(spec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{eig_hermitian, partial_trace};
    use Subsystem::*;

    #[test]
    fn local_hamiltonian_cases() {
        let h = local_hamiltonian(1.0, B);
        assert_eq!(h.matrix(), &sigma_z());
        assert!(local_hamiltonian(0.0, B).matrix().iter().all(|z| z.norm() == 0.0));
        let e = ComplexOperator::projector(&ket_excited(), vec![(B, 2)]).unwrap();
        let h = local_hamiltonian(0.8, B);
        assert!((e.compose(&h).unwrap().trace().re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn coupling_hamiltonian_entries() {
        let h = coupling_hamiltonian(1.0, 1.0, 0.0, (B, A));
        let diag: Vec<f64> = (0..4).map(|i| h.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![2.0, 0.0, 0.0, -2.0]);

        let h = coupling_hamiltonian(1.0, 1.0, 2.0, (B, A));
        assert_eq!(h.matrix()[(0, 3)], real(2.0));
        assert_eq!(h.matrix()[(3, 0)], real(2.0));
        assert_eq!(h.matrix()[(1, 2)], real(2.0));
        assert_eq!(h.hermitian_deviation(), 0.0);
    }

    #[test]
    fn coupling_spectrum_closed_form() {
        // Blocks {|ee>,|gg>}: [[2,2],[2,-2]] -> ±2√2; {|eg>,|ge>}: [[0,2],[2,0]] -> ±2.
        let h = coupling_hamiltonian(1.0, 1.0, 2.0, (B, A));
        let e = eig_hermitian(&h).unwrap();
        let s = 2.0 * 2f64.sqrt();
        let want = [-s, -2.0, 2.0, s];
        for (a, b) in e.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn ghz_boundaries_and_amplitudes() {
        let s = ghz_state(&GhzSpec::new(3, 1.0).unwrap()).unwrap();
        assert!((s.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let s = ghz_state(&GhzSpec::new(3, -1.0).unwrap()).unwrap();
        assert!((s.matrix()[(7, 7)].re - 1.0).abs() < 1e-15);
        let s = ghz_state(&GhzSpec::new(4, 0.0).unwrap()).unwrap();
        assert!((s.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((s.matrix()[(15, 15)].re - 0.5).abs() < 1e-15);
        assert!((s.matrix()[(0, 15)].re - 0.5).abs() < 1e-15);
        assert!(GhzSpec::new(3, 1.5).is_err());
        assert!(matches!(ghz_state(&GhzSpec { n: 3, l: -1.01 }), Err(QbattError::GhzParameter(_))));
    }

    #[test]
    fn ghz_marginals_on_grid() {
        for i in 0..21 {
            let l = -1.0 + 0.1 * i as f64;
            let l = l.clamp(-1.0, 1.0);
            for n in [3, 4] {
                let spec = GhzSpec::new(n, l).unwrap();
                let rho = ghz_state(&spec).unwrap();
                for &label in &Subsystem::ORDER[..n] {
                    let red = partial_trace(&rho, &[label]).unwrap();
                    assert!(red.max_abs_diff(&spec.marginal(label)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn default_states() {
        let pe = default_initial_state(&InitialState::ProductExcited).unwrap();
        assert_eq!(pe.labels(), vec![B, A, E]);
        // |e e g> is index 0*4 + 0*2 + 1 = 1
        assert!((pe.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
        pe.check_state().unwrap();

        let g = default_initial_state(&InitialState::Ghz(GhzSpec::new(3, 1.0).unwrap())).unwrap();
        assert!((g.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);

        let spec = GhzSpec::new(4, 0.5).unwrap();
        let g = default_initial_state(&InitialState::Ghz(spec)).unwrap();
        assert_eq!(g.labels(), vec![B, A, E, X]);
        let rx = partial_trace(&g, &[X]).unwrap();
        assert!((rx.matrix()[(0, 0)].re - 0.75).abs() < 1e-12);
        assert!((rx.matrix()[(1, 1)].re - 0.25).abs() < 1e-12);
        g.check_state().unwrap();

        let bad = InitialState::Ghz(GhzSpec { n: 2, l: 0.0 });
        assert!(default_initial_state(&bad).is_err());
    }
}
