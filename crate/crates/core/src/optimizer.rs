//! Restricted measurement search and Haar sampling oracles.
//!
//! The restricted ("accessible") family measures a qubit pair in a basis
//! produced by single-qubit rotations combined with a fixed entangling
//! unitary `W = exp(−i H t)`. Two orderings are supported:
//!
//! * [`ReadoutOrder::EntanglerFirst`]: `W` acts on the measured pair, then
//!   each qubit is measured in a rotated basis. The selected projector is
//!   `W† (U₁ ⊗ U₂)|e e⟩`.
//! * [`ReadoutOrder::LocalFirst`]: the projector is `(U₁ ⊗ U₂) W|e e⟩`.
//!
//! The search is a multi-start Nelder–Mead over the six Euler angles.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QbattError, Result};
use crate::hilbert::{c, kron_kets, real, ComplexOperator, C64};
use crate::model::ket_excited;

/// Euler angles `(θ, φ, λ)` per measured qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalUnitaryParams {
    pub angles: Vec<[f64; 3]>,
}

impl LocalUnitaryParams {
    pub fn identity(qubits: usize) -> Self {
        Self {
            angles: vec![[0.0; 3]; qubits],
        }
    }

    fn from_flat(x: &[f64]) -> Self {
        Self {
            angles: x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 500,
            tolerance: 1e-10,
            seed: 7,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(QbattError::Config("optimizer restarts must be >= 1".into()));
        }
        if self.max_iterations == 0 || !(self.tolerance > 0.0) {
            return Err(QbattError::Config("optimizer needs iterations and a positive tolerance".into()));
        }
        Ok(())
    }
}

/// `[[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.
pub fn single_qubit_unitary(theta: f64, phi: f64, lambda: f64) -> DMatrix<C64> {
    let m = su2(theta, phi, lambda);
    DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

fn su2(theta: f64, phi: f64, lambda: f64) -> [[C64; 2]; 2] {
    let (s, cth) = (theta / 2.0).sin_cos();
    [
        [real(cth), -C64::from_polar(s, lambda)],
        [C64::from_polar(s, phi), C64::from_polar(cth, phi + lambda)],
    ]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadoutOrder {
    #[default]
    EntanglerFirst,
    LocalFirst,
}

/// How a set of local angles is turned into a measured vector on a qubit pair.
#[derive(Clone, Debug)]
pub struct Probe {
    seed: [C64; 4],
    frame: Option<[[C64; 4]; 4]>,
}

impl Probe {
    /// Projector `(U₁ ⊗ U₂)|χ⟩`.
    pub fn seeded(seed: &DVector<C64>) -> Result<Self> {
        if seed.len() != 4 || (seed.norm() - 1.0).abs() > 1e-10 {
            return Err(QbattError::InvalidVector("seed must be a unit vector in C^4".into()));
        }
        Ok(Self {
            seed: [seed[0], seed[1], seed[2], seed[3]],
            frame: None,
        })
    }

    /// Projector `W† (U₁ ⊗ U₂)|e e⟩`.
    pub fn entangled_readout(entangler: &ComplexOperator) -> Result<Self> {
        if entangler.dim() != 4 || !entangler.is_unitary(1e-10) {
            return Err(QbattError::InvalidVector("entangler must be a 4x4 unitary".into()));
        }
        let wd = entangler.matrix().adjoint();
        let frame = std::array::from_fn(|r| std::array::from_fn(|c| wd[(r, c)]));
        let ee = kron_kets(&[ket_excited(), ket_excited()]);
        Ok(Self {
            seed: [ee[0], ee[1], ee[2], ee[3]],
            frame: Some(frame),
        })
    }

    pub fn for_order(order: ReadoutOrder, entangler: &ComplexOperator) -> Result<Self> {
        match order {
            ReadoutOrder::EntanglerFirst => Self::entangled_readout(entangler),
            ReadoutOrder::LocalFirst => {
                let ee = kron_kets(&[ket_excited(), ket_excited()]);
                Self::seeded(&(entangler.matrix() * ee))
            }
        }
    }

    fn vector(&self, x: &[f64]) -> [C64; 4] {
        let u1 = su2(x[0], x[1], x[2]);
        let u2 = su2(x[3], x[4], x[5]);
        let mut v = [real(0.0); 4];
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = real(0.0);
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        acc += u1[a][a2] * u2[b][b2] * self.seed[2 * a2 + b2];
                    }
                }
                v[2 * a + b] = acc;
            }
        }
        match &self.frame {
            None => v,
            Some(f) => std::array::from_fn(|r| (0..4).map(|c| f[r][c] * v[c]).sum()),
        }
    }

    /// Measured vector for the given angles.
    pub fn projector(&self, params: &LocalUnitaryParams) -> DVector<C64> {
        let flat: Vec<f64> = params.angles.iter().flatten().copied().collect();
        DVector::from_row_slice(&self.vector(&flat))
    }
}

#[derive(Clone, Debug)]
pub struct AccessibleResult {
    pub s_acc: f64,
    pub params: LocalUnitaryParams,
    pub projector: DVector<C64>,
    /// Whether the winning restart met the tolerance.
    pub converged: bool,
    pub restarts_converged: usize,
}

/// `⟨v|𝓑|v⟩` for the probe vector at `params`.
pub fn accessible_objective(b_op: &ComplexOperator, probe: &Probe, params: &LocalUnitaryParams) -> f64 {
    b_op.expectation(&probe.projector(params))
}

/// Maximum of `⟨v|𝓑|v⟩` over the six-angle local family.
///
/// Restart 0 starts from the identity rotations; the rest start from angles
/// drawn from independent ChaCha streams of `cfg.seed`. Each restart is a
/// Nelder–Mead run followed by one polishing run from its best vertex.
pub fn accessible_energy(b_op: &ComplexOperator, probe: &Probe, cfg: &OptimizerConfig) -> Result<AccessibleResult> {
    accessible_energy_over(b_op, probe, cfg, 0..cfg.restarts)
}

/// Like [`accessible_energy`] but over an explicit range of restart indices,
/// so two disjoint ranges give independent multi-start runs.
pub fn accessible_energy_over(
    b_op: &ComplexOperator,
    probe: &Probe,
    cfg: &OptimizerConfig,
    restarts: std::ops::Range<usize>,
) -> Result<AccessibleResult> {
    cfg.validate()?;
    if restarts.is_empty() {
        return Err(QbattError::Config("empty restart range".into()));
    }
    if b_op.dim() != 4 {
        return Err(QbattError::LayoutMismatch("accessible energy needs a 4x4 operator".into()));
    }
    let dev = b_op.hermitian_deviation();
    if dev > 1e-10 {
        return Err(QbattError::NotHermitian(dev));
    }
    let m = b_op.matrix();
    let b: [[C64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]));
    let objective = |x: &[f64]| -> f64 {
        let v = probe.vector(x);
        let mut acc = real(0.0);
        for r in 0..4 {
            let mut row = real(0.0);
            for c in 0..4 {
                row += b[r][c] * v[c];
            }
            acc += v[r].conj() * row;
        }
        -acc.re
    };

    let runs: Vec<(f64, Vec<f64>, bool)> = restarts
        .into_par_iter()
        .map(|i| {
            let start: Vec<f64> = if i == 0 {
                vec![0.0; 6]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64);
                (0..6)
                    .map(|j| {
                        let span = if j % 3 == 0 { std::f64::consts::PI } else { std::f64::consts::TAU };
                        rng.random::<f64>() * span
                    })
                    .collect()
            };
            let first = nelder_mead(&objective, &start, 0.5, cfg.max_iterations, cfg.tolerance);
            let polished = nelder_mead(&objective, &first.x, 0.05, cfg.max_iterations, cfg.tolerance);
            let best = if polished.f <= first.f { polished } else { first };
            (-best.f, best.x, best.converged)
        })
        .collect();

    let restarts_converged = runs.iter().filter(|r| r.2).count();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best].0 + 1e-15 {
            best = i;
        }
    }
    let (s_acc, x, converged) = runs[best].clone();
    let params = LocalUnitaryParams::from_flat(&x);
    let projector = probe.projector(&params);
    Ok(AccessibleResult {
        s_acc,
        params,
        projector,
        converged,
        restarts_converged,
    })
}

struct Minimum {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

/// Nelder–Mead minimisation with an axis-aligned initial simplex.
/// Converged when the spread of simplex values drops to `tol`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, max_iter: usize, tol: f64) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut converged = false;

    for _ in 0..max_iter {
        // stable sort keeps the earlier vertex on ties
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[n] - values[0] <= tol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |coef: f64| -> Vec<f64> {
            (0..n).map(|j| centroid[j] + coef * (simplex[n][j] - centroid[j])).collect()
        };

        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=n {
            let p: Vec<f64> = (0..n).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
            values[i] = f(&p);
            simplex[i] = p;
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    if !converged {
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        converged = hi - values[best] <= tol;
    }
    Minimum {
        x: simplex[best].clone(),
        f: values[best],
        converged,
    }
}

/// Haar-random unitary from a complex Gaussian matrix orthonormalised by
/// modified Gram–Schmidt (positive diagonal of `R`, so the phases are fixed).
pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    });
    for j in 0..dim {
        for k in 0..j {
            let proj: C64 = (0..dim).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
            for i in 0..dim {
                let mik = m[(i, k)];
                m[(i, j)] -= mik * proj;
            }
        }
        let norm = (0..dim).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..dim {
            m[(i, j)] /= norm;
        }
    }
    m
}

/// Largest `⟨Ψ|𝓑|Ψ⟩` over `n_samples` Haar-random `|Ψ⟩ = U|0⟩`.
pub fn sampled_supremum<R: Rng + ?Sized>(
    b_op: &ComplexOperator,
    n_samples: usize,
    rng: &mut R,
) -> Result<(f64, DVector<C64>)> {
    if n_samples == 0 {
        return Err(QbattError::Config("need at least one sample".into()));
    }
    let d = b_op.dim();
    let mut best = f64::NEG_INFINITY;
    let mut arg = DVector::zeros(d);
    for _ in 0..n_samples {
        let u = haar_random_unitary(d, rng);
        let psi: DVector<C64> = u.column(0).into_owned();
        let val = b_op.expectation(&psi);
        if val > best {
            best = val;
            arg = psi;
        }
    }
    Ok((best, arg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{sigma_x, Subsystem};
    use Subsystem::{A, E};

    fn op4(m: DMatrix<C64>) -> ComplexOperator {
        ComplexOperator::on_qubits(m, &[A, E]).unwrap()
    }

    fn diag4(v: [f64; 4]) -> ComplexOperator {
        op4(DMatrix::from_diagonal(&DVector::from_vec(v.iter().map(|&x| real(x)).collect())))
    }

    #[test]
    fn euler_identity_and_pauli_x() {
        let u = single_qubit_unitary(0.0, 0.0, 0.0);
        assert!((u - DMatrix::<C64>::identity(2, 2)).norm() < 1e-15);
        let u = single_qubit_unitary(std::f64::consts::PI, 0.0, std::f64::consts::PI);
        // projector equality: U|e><e|U† = σx|e><e|σx
        let e = ket_excited();
        let a = &u * &e;
        let b = sigma_x() * &e;
        assert!((&a * a.adjoint() - &b * b.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn euler_unitarity_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let (t, p, l) = (rng.random::<f64>() * 3.2, rng.random::<f64>() * 6.3, rng.random::<f64>() * 6.3);
            let u = single_qubit_unitary(t, p, l);
            let dev = (u.adjoint() * &u - DMatrix::<C64>::identity(2, 2)).norm();
            assert!(dev < 1e-14);
        }
    }

    #[test]
    fn rank_one_aligned_with_seed_is_maximal_at_identity() {
        let s = 0.5;
        let chi = DVector::from_vec(vec![c(s, 0.0), c(0.0, s), c(-s, 0.0), c(s, 0.0)]);
        let beta = 0.8;
        let b = op4(&chi * chi.adjoint() * real(beta));
        let probe = Probe::seeded(&chi).unwrap();
        let r = accessible_energy(&b, &probe, &OptimizerConfig::default()).unwrap();
        assert!((r.s_acc - beta).abs() < 1e-12);
        assert_eq!(r.params, LocalUnitaryParams::identity(2));
    }

    #[test]
    fn diagonal_operator_with_basis_seed() {
        let b = diag4([0.3, 0.1, 0.2, 0.0]);
        let seed = DVector::from_vec(vec![real(1.0), real(0.0), real(0.0), real(0.0)]);
        let probe = Probe::seeded(&seed).unwrap();
        let r = accessible_energy(&b, &probe, &OptimizerConfig::default()).unwrap();
        assert!((r.s_acc - 0.3).abs() < 1e-9);
        let again = accessible_objective(&b, &probe, &r.params);
        assert!((again - r.s_acc).abs() < 1e-10);
    }

    #[test]
    fn restricted_cannot_beat_top_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_random_unitary(4, &mut rng);
        let b = op4(&u * DMatrix::from_diagonal(&DVector::from_vec(vec![real(0.4), real(-0.2), real(0.1), real(0.0)])) * u.adjoint());
        let w = op4(haar_random_unitary(4, &mut rng));
        for order in [ReadoutOrder::EntanglerFirst, ReadoutOrder::LocalFirst] {
            let probe = Probe::for_order(order, &w).unwrap();
            let r = accessible_energy(&b, &probe, &OptimizerConfig::default()).unwrap();
            assert!(r.s_acc <= 0.4 + 1e-9);
            assert!((accessible_objective(&b, &probe, &r.params) - r.s_acc).abs() < 1e-10);
            assert!((b.expectation(&r.projector) - r.s_acc).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_seeds_reproduce_results() {
        let b = diag4([0.1, 0.5, -0.3, 0.2]).conjugate_by(&op4(haar_random_unitary(4, &mut ChaCha8Rng::seed_from_u64(9)))).unwrap();
        let w = op4(haar_random_unitary(4, &mut ChaCha8Rng::seed_from_u64(10)));
        let probe = Probe::entangled_readout(&w).unwrap();
        let cfg = OptimizerConfig { seed: 42, ..Default::default() };
        let a = accessible_energy(&b, &probe, &cfg).unwrap();
        let b2 = accessible_energy(&b, &probe, &cfg).unwrap();
        assert_eq!(a.s_acc.to_bits(), b2.s_acc.to_bits());
        assert_eq!(a.params, b2.params);
    }

    #[test]
    fn config_and_input_validation() {
        let b = diag4([0.0; 4]);
        let seed = DVector::from_vec(vec![real(1.0), real(0.0), real(0.0), real(0.0)]);
        let probe = Probe::seeded(&seed).unwrap();
        let cfg = OptimizerConfig { restarts: 0, ..Default::default() };
        assert!(accessible_energy(&b, &probe, &cfg).is_err());
        assert!(Probe::seeded(&DVector::from_vec(vec![real(1.0), real(1.0), real(0.0), real(0.0)])).is_err());
    }

    #[test]
    fn haar_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [4, 8] {
            for _ in 0..1000 {
                let u = haar_random_unitary(dim, &mut rng);
                let dev = (u.adjoint() * &u - DMatrix::<C64>::identity(dim, dim))
                    .iter()
                    .fold(0.0f64, |a, z| a.max(z.norm()));
                assert!(dev < 1e-12);
                for j in 0..dim {
                    assert!((u.column(j).norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn haar_first_moment() {
        // E|U00|^2 = 1/d; Var = (d-1)/(d^2 (d+1)).
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for dim in [4usize, 8] {
            let n = 100_000;
            let mean = (0..n).map(|_| haar_random_unitary(dim, &mut rng)[(0, 0)].norm_sqr()).sum::<f64>() / n as f64;
            let d = dim as f64;
            let se = ((d - 1.0) / (d * d * (d + 1.0)) / n as f64).sqrt();
            assert!((mean - 1.0 / d).abs() < 3.0 * se, "dim {dim}: mean {mean}");
        }
    }

    #[test]
    fn sampled_supremum_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let id = ComplexOperator::identity(vec![(A, 2), (E, 2)]).unwrap();
        let (v, _) = sampled_supremum(&id, 100, &mut rng).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        // |ψ₀|² is Beta(1, 3) under Haar, so P(max < 1 − ε) = (1 − ε³)^n.
        let b = diag4([1.0, 0.0, 0.0, 0.0]);
        let (v, psi) = sampled_supremum(&b, 100_000, &mut rng).unwrap();
        assert!(v >= 0.93 && v <= 1.0 + 1e-9, "{v}");
        assert!((b.expectation(&psi) - v).abs() < 1e-15);
        assert!(sampled_supremum(&b, 0, &mut rng).is_err());
    }

    #[test]
    fn sampled_supremum_is_monotone_in_sample_count() {
        let b = diag4([0.3, -0.2, 0.1, 0.05]);
        let mut last = f64::NEG_INFINITY;
        for n in [1, 10, 100, 1000] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let (v, _) = sampled_supremum(&b, n, &mut rng).unwrap();
            assert!(v >= last);
            last = v;
        }
    }
}
