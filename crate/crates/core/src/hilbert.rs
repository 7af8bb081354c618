//! Dense complex operators over small labelled multi-qubit spaces.
//!
//! Every [`ComplexOperator`] carries the ordered list of subsystems it acts
//! on. Tensor products concatenate those lists and partial traces remove
//! entries, so reduced operators always know which factors they describe.
//! Index convention: the first subsystem is the most significant digit, which
//! matches `kron(a, b)[(i_a*d_b + i_b), ...]`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QbattError, Result};

pub type C64 = Complex64;

/// Tolerance used for state and unitary invariants.
pub const INVARIANT_TOL: f64 = 1e-12;
/// Tolerance on Hermiticity accepted by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue tolerated in a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subsystem {
    /// Battery.
    B,
    /// Auxiliary.
    A,
    /// Environment.
    E,
    /// External.
    X,
}

impl Subsystem {
    /// Canonical global order.
    pub const ORDER: [Subsystem; 4] = [Subsystem::B, Subsystem::A, Subsystem::E, Subsystem::X];
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Subsystem::B => "B",
            Subsystem::A => "A",
            Subsystem::E => "E",
            Subsystem::X => "X",
        };
        f.write_str(s)
    }
}

/// Square complex matrix tagged with its subsystem layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    matrix: DMatrix<C64>,
    layout: Vec<(Subsystem, usize)>,
}

impl ComplexOperator {
    pub fn new(matrix: DMatrix<C64>, layout: Vec<(Subsystem, usize)>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(QbattError::NotSquare { rows, cols });
        }
        let dims: Vec<usize> = layout.iter().map(|&(_, d)| d).collect();
        if dims.iter().product::<usize>() != rows || layout.is_empty() {
            return Err(QbattError::DimensionMismatch { dims, dim: rows });
        }
        for (i, (label, _)) in layout.iter().enumerate() {
            if layout[..i].iter().any(|(l, _)| l == label) {
                return Err(QbattError::DuplicateSubsystem(*label));
            }
        }
        Ok(Self { matrix, layout })
    }

    /// Operator on a list of qubits.
    pub fn on_qubits(matrix: DMatrix<C64>, labels: &[Subsystem]) -> Result<Self> {
        Self::new(matrix, labels.iter().map(|&l| (l, 2)).collect())
    }

    pub fn identity(layout: Vec<(Subsystem, usize)>) -> Result<Self> {
        let d = layout.iter().map(|&(_, d)| d).product();
        Self::new(DMatrix::identity(d, d), layout)
    }

    pub fn zeros(layout: Vec<(Subsystem, usize)>) -> Result<Self> {
        let d = layout.iter().map(|&(_, d)| d).product();
        Self::new(DMatrix::zeros(d, d), layout)
    }

    /// `|ψ⟩⟨ψ|` for a ket that is normalised here.
    pub fn projector(ket: &DVector<C64>, layout: Vec<(Subsystem, usize)>) -> Result<Self> {
        let norm = ket.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QbattError::InvalidVector("zero or non-finite ket".into()));
        }
        let v = ket / C64::new(norm, 0.0);
        Self::new(&v * v.adjoint(), layout)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn layout(&self) -> &[(Subsystem, usize)] {
        &self.layout
    }

    pub fn labels(&self) -> Vec<Subsystem> {
        self.layout.iter().map(|&(l, _)| l).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.layout.iter().map(|&(_, d)| d).collect()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn has(&self, label: Subsystem) -> bool {
        self.layout.iter().any(|&(l, _)| l == label)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            layout: self.layout.clone(),
        }
    }

    /// Same matrix, new labels (dimensions are kept).
    pub fn relabel(&self, labels: &[Subsystem]) -> Result<Self> {
        if labels.len() != self.layout.len() {
            return Err(QbattError::LayoutMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.layout.len()
            )));
        }
        let layout = labels.iter().zip(&self.layout).map(|(&l, &(_, d))| (l, d)).collect();
        Self::new(self.matrix.clone(), layout)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(factor, 0.0),
            layout: self.layout.clone(),
        }
    }

    fn same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(QbattError::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.labels(),
                other.labels()
            )));
        }
        Ok(())
    }

    /// Matrix product; both operands must share a layout.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_layout(other)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            layout: self.layout.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_layout(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            layout: self.layout.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_layout(other)?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
            layout: self.layout.clone(),
        })
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &Self) -> Result<Self> {
        self.same_layout(unitary)?;
        Ok(Self {
            matrix: &unitary.matrix * &self.matrix * unitary.matrix.adjoint(),
            layout: self.layout.clone(),
        })
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        Self {
            matrix: m,
            layout: self.layout.clone(),
        }
    }

    /// Largest entry of `|M - M†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitary_deviation(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(n, n)))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation() <= tol
    }

    /// Checks the density-matrix invariants: Hermitian and unit trace within
    /// 1e-12, smallest eigenvalue at least -1e-10.
    pub fn check_state(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > INVARIANT_TOL {
            return Err(QbattError::InvalidState(format!("Hermitian deviation {dev:.3e}")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > INVARIANT_TOL {
            return Err(QbattError::InvalidState(format!("trace {tr}")));
        }
        let min = eig_hermitian(self)?.values[0];
        if min < -POSITIVITY_TOL {
            return Err(QbattError::InvalidState(format!("eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `⟨v|M|v⟩`, real part.
    pub fn expectation(&self, v: &DVector<C64>) -> f64 {
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn sigma_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)])
}

pub fn sigma_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[real(0.0), c(0.0, -1.0), c(0.0, 1.0), real(0.0)])
}

pub fn sigma_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(-1.0)])
}

/// Tensor product in the given order.
pub fn kron(factors: &[ComplexOperator]) -> Result<ComplexOperator> {
    let (first, rest) = factors.split_first().ok_or(QbattError::EmptyFactors)?;
    let mut matrix = first.matrix.clone();
    let mut layout = first.layout.clone();
    for f in rest {
        matrix = matrix.kronecker(&f.matrix);
        layout.extend_from_slice(&f.layout);
    }
    ComplexOperator::new(matrix, layout)
}

/// Ket tensor product, first factor most significant.
pub fn kron_kets(kets: &[DVector<C64>]) -> DVector<C64> {
    let mut out = DVector::from_element(1, real(1.0));
    for k in kets {
        out = out.kronecker(k);
    }
    out
}

/// Traces out everything not in `keep`. The kept subsystems stay in their
/// original order. Keeping every subsystem returns a copy of the input.
pub fn partial_trace(op: &ComplexOperator, keep: &[Subsystem]) -> Result<ComplexOperator> {
    if keep.is_empty() {
        return Err(QbattError::LayoutMismatch("nothing to keep".into()));
    }
    for &k in keep {
        if !op.has(k) {
            return Err(QbattError::MissingSubsystem(k));
        }
    }
    let kept: Vec<usize> = (0..op.layout.len()).filter(|&i| keep.contains(&op.layout[i].0)).collect();
    if kept.len() == op.layout.len() {
        return Ok(op.clone());
    }
    let traced: Vec<usize> = (0..op.layout.len()).filter(|i| !kept.contains(i)).collect();
    let dims = op.dims();
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offsets = |positions: &[usize]| -> Vec<usize> {
        let total: usize = positions.iter().map(|&p| dims[p]).product();
        (0..total)
            .map(|mut idx| {
                let mut off = 0;
                for &p in positions.iter().rev() {
                    off += (idx % dims[p]) * strides[p];
                    idx /= dims[p];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept);
    let traced_off = offsets(&traced);
    let dk = kept_off.len();
    let m = &op.matrix;
    let out = DMatrix::from_fn(dk, dk, |r, c| {
        traced_off
            .iter()
            .map(|&s| m[(kept_off[r] + s, kept_off[c] + s)])
            .sum::<C64>()
    });
    let layout = kept.iter().map(|&i| op.layout[i]).collect();
    ComplexOperator::new(out, layout)
}

/// Eigenpairs of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
}

impl Eigen {
    /// Largest eigenvalue and its eigenvector. Within a degenerate top
    /// eigenspace the vector with the largest first nonzero component wins,
    /// ties broken lexicographically on the components.
    pub fn top(&self) -> (f64, DVector<C64>) {
        let n = self.values.len();
        let best = self.values[n - 1];
        let tol = 1e-10 * best.abs().max(1.0);
        let mut candidates: Vec<usize> = (0..n).filter(|&i| best - self.values[i] <= tol).collect();
        candidates.sort_by(|&a, &b| {
            let ka = sort_key(&self.vectors[a]);
            let kb = sort_key(&self.vectors[b]);
            kb.partial_cmp(&ka).unwrap_or(std::cmp::Ordering::Equal)
        });
        let i = candidates[0];
        (self.values[i], self.vectors[i].clone())
    }
}

fn sort_key(v: &DVector<C64>) -> Vec<f64> {
    let first = v.iter().find(|z| z.norm() > 1e-12).map(|z| z.norm()).unwrap_or(0.0);
    let mut key = vec![first];
    key.extend(v.iter().flat_map(|z| [z.re, z.im]));
    key
}

/// Cyclic complex Jacobi diagonalisation.
///
/// The input is symmetrised first; anything further than `HERMITIAN_TOL`
/// from Hermitian is rejected. Eigenvectors are phase-fixed so their first
/// non-negligible component is real and positive.
pub fn eig_hermitian(op: &ComplexOperator) -> Result<Eigen> {
    let dev = op.hermitian_deviation();
    if dev > HERMITIAN_TOL || !dev.is_finite() {
        return Err(QbattError::NotHermitian(dev));
    }
    Ok(jacobi(op.hermitian_part().matrix))
}

fn jacobi(mut a: DMatrix<C64>) -> Eigen {
    let n = a.nrows();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off <= 1e-300 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let babs = b.norm();
                if babs <= 1e-18 * scale || babs <= 1e-300 {
                    continue;
                }
                let phase = b / babs;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * babs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let g_pp = real(cs);
                let g_pq = real(sn);
                let g_qp = -phase.conj() * sn;
                let g_qq = phase.conj() * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = real(0.0);
                a[(q, p)] = real(0.0);
                a[(p, p)] = real(a[(p, p)].re);
                a[(q, q)] = real(a[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let col: DVector<C64> = v.column(i).into_owned();
            fix_phase(col)
        })
        .collect();
    Eigen { values, vectors }
}

/// Rotates a vector so its first component above 1e-12 in magnitude is real
/// and positive.
pub fn fix_phase(v: DVector<C64>) -> DVector<C64> {
    match v.iter().find(|z| z.norm() > 1e-12) {
        Some(&z) => {
            let ph = z.conj() / z.norm();
            v * ph
        }
        None => v,
    }
}

/// `exp(-i H t)` built from the eigendecomposition of `H` (ħ = 1).
pub fn unitary_from_hamiltonian(h: &ComplexOperator, t: f64) -> Result<ComplexOperator> {
    let eig = eig_hermitian(h)?;
    let n = h.dim();
    let mut u = DMatrix::<C64>::zeros(n, n);
    for (lambda, vec) in eig.values.iter().zip(&eig.vectors) {
        let phase = C64::from_polar(1.0, -lambda * t);
        u += vec * vec.adjoint() * phase;
    }
    ComplexOperator::new(u, h.layout.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Subsystem::*;

    fn op(m: DMatrix<C64>, labels: &[Subsystem]) -> ComplexOperator {
        ComplexOperator::on_qubits(m, labels).unwrap()
    }

    fn id2(l: Subsystem) -> ComplexOperator {
        ComplexOperator::identity(vec![(l, 2)]).unwrap()
    }

    #[test]
    fn kron_identity_and_paulis() {
        let i4 = kron(&[id2(B), id2(A)]).unwrap();
        assert_eq!(i4.matrix(), &DMatrix::<C64>::identity(4, 4));
        assert_eq!(i4.labels(), vec![B, A]);

        let zi = kron(&[op(sigma_z(), &[B]), id2(A)]).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![
            real(1.0),
            real(1.0),
            real(-1.0),
            real(-1.0),
        ]));
        assert_eq!(zi.matrix(), &expected);

        let xx = kron(&[op(sigma_x(), &[B]), op(sigma_x(), &[A])]).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r + c == 3 { 1.0 } else { 0.0 };
                assert_eq!(xx.matrix()[(r, c)], real(want));
            }
        }
    }

    #[test]
    fn kron_errors() {
        assert!(matches!(kron(&[]), Err(QbattError::EmptyFactors)));
        assert!(matches!(
            kron(&[id2(A), id2(A)]),
            Err(QbattError::DuplicateSubsystem(A))
        ));
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let rho_a = op(
            DMatrix::from_row_slice(2, 2, &[real(0.7), c(0.1, 0.2), c(0.1, -0.2), real(0.3)]),
            &[A],
        );
        let rho_e = op(
            DMatrix::from_row_slice(2, 2, &[real(0.4), c(0.0, 0.1), c(0.0, -0.1), real(0.6)]),
            &[E],
        );
        let joint = kron(&[rho_a.clone(), rho_e]).unwrap();
        let red = partial_trace(&joint, &[A]).unwrap();
        assert!(red.max_abs_diff(&rho_a) < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DVector::from_vec(vec![real(s), real(0.0), real(0.0), real(s)]);
        let bell = ComplexOperator::projector(&bell, vec![(A, 2), (E, 2)]).unwrap();
        let red = partial_trace(&bell, &[A]).unwrap();
        let half = id2(A).scale(0.5);
        assert!(red.max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn partial_trace_full_keep_is_noop_and_missing_label_errors() {
        let x = kron(&[id2(B), op(sigma_x(), &[A])]).unwrap();
        assert_eq!(partial_trace(&x, &[A, B]).unwrap(), x);
        assert!(matches!(partial_trace(&x, &[E]), Err(QbattError::MissingSubsystem(E))));
        assert!(partial_trace(&x, &[]).is_err());
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        let a = op(sigma_z(), &[A]);
        let x = op(sigma_x(), &[X]);
        let joint = kron(&[id2(B), a.clone(), id2(E), x.clone()]).unwrap();
        let red = partial_trace(&joint, &[X, A]).unwrap();
        assert_eq!(red.labels(), vec![A, X]);
        let expect = kron(&[a, x]).unwrap().scale(4.0);
        assert!(red.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn eig_diagonal_and_pauli() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![real(3.0), real(1.0), real(2.0)]));
        let o = ComplexOperator::new(d, vec![(A, 3)]).unwrap();
        let e = eig_hermitian(&o).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);

        let e = eig_hermitian(&op(sigma_x(), &[A])).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // phase-fixed: first component real positive
        assert!((e.vectors[0][0] - real(s)).norm() < 1e-15);
        assert!((e.vectors[0][1] - real(-s)).norm() < 1e-15);
        assert!((e.vectors[1][0] - real(s)).norm() < 1e-15);
        assert!((e.vectors[1][1] - real(s)).norm() < 1e-15);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(0.0), real(0.0)]);
        assert!(matches!(eig_hermitian(&op(m, &[A])), Err(QbattError::NotHermitian(_))));
    }

    #[test]
    fn eig_of_complex_hermitian_residuals() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                real(2.0),
                c(1.0, -1.0),
                c(0.0, 0.5),
                c(1.0, 1.0),
                real(-1.0),
                c(0.3, 0.0),
                c(0.0, -0.5),
                c(0.3, 0.0),
                real(0.5),
            ],
        );
        let o = ComplexOperator::new(m.clone(), vec![(A, 3)]).unwrap();
        let e = eig_hermitian(&o).unwrap();
        for (l, v) in e.values.iter().zip(&e.vectors) {
            let r = &m * v - v * real(*l);
            assert!(r.norm() < 1e-13);
            assert!((v.norm() - 1.0).abs() < 1e-13);
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn top_eigenvector_of_degenerate_space_is_deterministic() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(0.0), real(1.0), real(0.0)]));
        let o = op(d, &[A, X]);
        let (val, vec) = eig_hermitian(&o).unwrap().top();
        assert_eq!(val, 1.0);
        assert!((vec[0] - real(1.0)).norm() < 1e-15);
    }

    #[test]
    fn propagator_zero_time_and_diagonal() {
        let h = op(sigma_z() * real(0.7), &[A]);
        let u0 = unitary_from_hamiltonian(&h, 0.0).unwrap();
        assert!(u0.max_abs_diff(&id2(A)) < 1e-15);
        let t = 1.3;
        let u = unitary_from_hamiltonian(&h, t).unwrap();
        assert!((u.matrix()[(0, 0)] - C64::from_polar(1.0, -0.7 * t)).norm() < 1e-14);
        assert!((u.matrix()[(1, 1)] - C64::from_polar(1.0, 0.7 * t)).norm() < 1e-14);
        assert!(u.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn relabel_checks_arity() {
        let z = op(sigma_z(), &[A]);
        assert_eq!(z.relabel(&[X]).unwrap().labels(), vec![X]);
        assert!(z.relabel(&[X, E]).is_err());
    }

    #[test]
    fn check_state_rejects_bad_trace_and_negativity() {
        let bad = op(sigma_z(), &[A]);
        assert!(bad.check_state().is_err());
        let neg = op(
            DMatrix::from_diagonal(&DVector::from_vec(vec![real(1.1), real(-0.1)])),
            &[A],
        );
        assert!(neg.check_state().is_err());
        assert!(id2(A).scale(0.5).check_state().is_ok());
    }
}
