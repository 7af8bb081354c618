//! Environment dilations of single-qubit noise on the auxiliary.
//!
//! Each channel is realised by a real 4×4 unitary on `A⊗E` in the basis
//! `{|e e⟩, |e g⟩, |g e⟩, |g g⟩}` with the environment prepared in `|g⟩`.
//! Only the columns with `E = |g⟩` are fixed by the channel; the other two
//! are completed so the matrix is real, continuous in `k` and equal to the
//! identity at `k = 0`.
//!
//! * amplitude damping: `|e g⟩ → √(1−k)|e g⟩ − √k|g e⟩`, `|g g⟩ → |g g⟩`
//! * bit flip: `|ψ g⟩ → √(1−k)|ψ g⟩ + √k (σˣ|ψ⟩)|e⟩`
//! * dephasing: `|e g⟩ → √(1−k)|e g⟩ + √k|e e⟩`, `|g g⟩ → |g g⟩`

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{QbattError, Result};
use crate::hilbert::{kron, partial_trace, real, ComplexOperator, Subsystem, C64};
use crate::model::ket_ground;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    AmplitudeDamping,
    BitFlip,
    Dephasing,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::AmplitudeDamping, NoiseKind::BitFlip, NoiseKind::Dephasing];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::AmplitudeDamping => "amplitude-damping",
            NoiseKind::BitFlip => "bit-flip",
            NoiseKind::Dephasing => "dephasing",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = QbattError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude-damping" | "ad" => Ok(NoiseKind::AmplitudeDamping),
            "bit-flip" | "bf" => Ok(NoiseKind::BitFlip),
            "dephasing" | "dp" => Ok(NoiseKind::Dephasing),
            other => Err(QbattError::Config(format!("unknown noise kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub k: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, k: f64) -> Result<Self> {
        let spec = Self { kind, k };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.k) {
            Ok(())
        } else {
            Err(QbattError::NoiseStrength(self.k))
        }
    }
}

/// The dilation unitary `U_AE(k)` on `A⊗E`.
pub fn dilation_unitary(spec: &NoiseSpec) -> Result<ComplexOperator> {
    spec.validate()?;
    let a = (1.0 - spec.k).sqrt();
    let b = spec.k.sqrt();
    #[rustfmt::skip]
    let rows: [f64; 16] = match spec.kind {
        NoiseKind::AmplitudeDamping => [
            1.0, 0.0, 0.0, 0.0,
            0.0, a,   b,   0.0,
            0.0, -b,  a,   0.0,
            0.0, 0.0, 0.0, 1.0,
        ],
        NoiseKind::BitFlip => [
            a,   0.0, 0.0, b,
            0.0, a,   -b,  0.0,
            0.0, b,   a,   0.0,
            -b,  0.0, 0.0, a,
        ],
        NoiseKind::Dephasing => [
            a,   b,   0.0, 0.0,
            -b,  a,   0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ],
    };
    let m = DMatrix::from_row_slice(4, 4, &rows.map(real));
    ComplexOperator::on_qubits(m, &[Subsystem::A, Subsystem::E])
}

/// `K_i = ⟨i|_E U |g⟩_E`, indexed with `i = g` first.
///
/// The first operator is the no-jump branch (`⟨g|_E`), the second the jump
/// branch (`⟨e|_E`).
pub fn kraus_operators(spec: &NoiseSpec) -> Result<Vec<ComplexOperator>> {
    let u = dilation_unitary(spec)?;
    let m = u.matrix();
    // A⊗E index = 2*a + e; e = 0 is |e>, e = 1 is |g>.
    let branch = |env_out: usize| {
        let k = DMatrix::from_fn(2, 2, |a_out, a_in| m[(2 * a_out + env_out, 2 * a_in + 1)]);
        ComplexOperator::on_qubits(k, &[Subsystem::A]).expect("2x2")
    };
    Ok(vec![branch(1), branch(0)])
}

/// `tr_E[U (ρ_A ⊗ |g⟩⟨g|) U†]`.
pub fn apply_channel(rho_a: &ComplexOperator, spec: &NoiseSpec) -> Result<ComplexOperator> {
    rho_a.check_state()?;
    if rho_a.dim() != 2 {
        return Err(QbattError::InvalidState("channel input must be a single qubit".into()));
    }
    let rho = rho_a.relabel(&[Subsystem::A])?;
    let env = ComplexOperator::projector(&ket_ground(), vec![(Subsystem::E, 2)])?;
    let joint = kron(&[rho, env])?;
    let out = joint.conjugate_by(&dilation_unitary(spec)?)?;
    partial_trace(&out, &[Subsystem::A])?.relabel(&rho_a.labels())
}

/// `Σ K ρ K†` for the Kraus operators above.
pub fn apply_kraus(rho_a: &ComplexOperator, spec: &NoiseSpec) -> Result<ComplexOperator> {
    let mut acc = DMatrix::<C64>::zeros(2, 2);
    for k in kraus_operators(spec)? {
        acc += k.matrix() * rho_a.matrix() * k.matrix().adjoint();
    }
    ComplexOperator::new(acc, rho_a.layout().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{c, eig_hermitian, sigma_x};
    use proptest::prelude::*;

    fn spec(kind: NoiseKind, k: f64) -> NoiseSpec {
        NoiseSpec::new(kind, k).unwrap()
    }

    fn entry(u: &ComplexOperator, r: usize, c: usize) -> f64 {
        u.matrix()[(r, c)].re
    }

    #[test]
    fn amplitude_damping_matches_explicit_matrix() {
        let u = dilation_unitary(&spec(NoiseKind::AmplitudeDamping, 0.0)).unwrap();
        assert_eq!(u.matrix(), &DMatrix::<C64>::identity(4, 4));
        let u = dilation_unitary(&spec(NoiseKind::AmplitudeDamping, 0.5)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((entry(&u, 1, 1) - s).abs() < 1e-15);
        assert!((entry(&u, 2, 2) - s).abs() < 1e-15);
        assert!((entry(&u, 1, 2) - s).abs() < 1e-15);
        assert!((entry(&u, 2, 1) + s).abs() < 1e-15);
        assert_eq!(entry(&u, 0, 0), 1.0);
        assert_eq!(entry(&u, 3, 3), 1.0);
    }

    #[test]
    fn bit_flip_full_strength_swaps_prepared_columns() {
        let u = dilation_unitary(&spec(NoiseKind::BitFlip, 1.0)).unwrap();
        // |e g> (1) -> |g e> (2); |g g> (3) -> |e e> (0)
        assert_eq!(entry(&u, 2, 1), 1.0);
        assert_eq!(entry(&u, 0, 3), 1.0);
    }

    #[test]
    fn out_of_range_strength_is_rejected() {
        assert!(matches!(
            dilation_unitary(&NoiseSpec { kind: NoiseKind::BitFlip, k: 1.2 }),
            Err(QbattError::NoiseStrength(_))
        ));
        assert!(NoiseSpec::new(NoiseKind::Dephasing, -0.1).is_err());
    }

    #[test]
    fn dilations_unitary_on_grid() {
        for kind in NoiseKind::ALL {
            for i in 0..=100 {
                let u = dilation_unitary(&spec(kind, i as f64 / 100.0)).unwrap();
                assert!(u.unitary_deviation() <= 1e-12, "{kind} k={i}");
            }
        }
    }

    #[test]
    fn kraus_forms() {
        let k = 0.37;
        let ks = kraus_operators(&spec(NoiseKind::AmplitudeDamping, k)).unwrap();
        let k0 = ks[0].matrix();
        assert!((k0[(0, 0)].re - (1.0 - k).sqrt()).abs() < 1e-15);
        assert!((k0[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!(k0[(0, 1)].norm() < 1e-15 && k0[(1, 0)].norm() < 1e-15);
        // jump operator ∝ |g><e|, sign fixed by the dilation matrix
        let k1 = ks[1].matrix();
        assert!((k1[(1, 0)].norm() - k.sqrt()).abs() < 1e-15);
        assert!(k1[(0, 0)].norm() + k1[(0, 1)].norm() + k1[(1, 1)].norm() < 1e-15);

        let ks = kraus_operators(&spec(NoiseKind::BitFlip, k)).unwrap();
        let i2 = DMatrix::<C64>::identity(2, 2) * real((1.0 - k).sqrt());
        assert!((ks[0].matrix() - i2).norm() < 1e-15);
        assert!((ks[1].matrix() - sigma_x() * real(k.sqrt())).norm() < 1e-15);

        for kind in NoiseKind::ALL {
            let ks = kraus_operators(&spec(kind, 0.0)).unwrap();
            assert!((ks[0].matrix() - DMatrix::<C64>::identity(2, 2)).norm() < 1e-15);
            assert!(ks[1].matrix().norm() < 1e-15);
        }
    }

    #[test]
    fn kraus_completeness() {
        for kind in NoiseKind::ALL {
            for i in 0..=20 {
                let ks = kraus_operators(&spec(kind, i as f64 / 20.0)).unwrap();
                let sum: DMatrix<C64> = ks.iter().map(|k| k.matrix().adjoint() * k.matrix()).sum();
                assert!((sum - DMatrix::<C64>::identity(2, 2)).norm() < 1e-12);
            }
        }
    }

    fn state(p: f64, re: f64, im: f64) -> ComplexOperator {
        let m = DMatrix::from_row_slice(2, 2, &[real(p), c(re, im), c(re, -im), real(1.0 - p)]);
        ComplexOperator::on_qubits(m, &[Subsystem::A]).unwrap()
    }

    #[test]
    fn channel_examples() {
        let rho = state(0.6, 0.2, -0.1);
        for kind in NoiseKind::ALL {
            let out = apply_channel(&rho, &spec(kind, 0.0)).unwrap();
            assert!(out.max_abs_diff(&rho) < 1e-15);
        }
        let k = 0.3;
        let excited = state(1.0, 0.0, 0.0);
        let out = apply_channel(&excited, &spec(NoiseKind::AmplitudeDamping, k)).unwrap();
        assert!(out.max_abs_diff(&state(1.0 - k, 0.0, 0.0)) < 1e-15);

        let out = apply_channel(&rho, &spec(NoiseKind::Dephasing, k)).unwrap();
        let coh = rho.matrix()[(0, 1)] * real((1.0 - k).sqrt());
        assert!((out.matrix()[(0, 1)] - coh).norm() < 1e-15);
        assert!((out.matrix()[(0, 0)].re - 0.6).abs() < 1e-15);
    }

    #[test]
    fn channel_rejects_invalid_state() {
        let bad = state(1.4, 0.0, 0.0);
        assert!(apply_channel(&bad, &spec(NoiseKind::BitFlip, 0.2)).is_err());
    }

    fn bloch_state(r: f64, theta: f64, phi: f64) -> ComplexOperator {
        let (x, y, z) = (r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
        state((1.0 + z) / 2.0, x / 2.0, -y / 2.0)
    }

    proptest! {
        #[test]
        fn dilation_equals_kraus_sum(
            r in 0.0f64..1.0, theta in 0.0f64..std::f64::consts::PI,
            phi in 0.0f64..std::f64::consts::TAU, k in 0.0f64..=1.0, which in 0usize..3,
        ) {
            let rho = bloch_state(r, theta, phi);
            let s = spec(NoiseKind::ALL[which], k);
            let a = apply_channel(&rho, &s).unwrap();
            let b = apply_kraus(&rho, &s).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
            prop_assert!((a.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(eig_hermitian(&a).unwrap().values[0] >= -1e-10);
        }
    }
}
