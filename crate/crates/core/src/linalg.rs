//! Dense complex linear algebra for the 2x2 and 4x4 matrices this crate
//! works with: arithmetic, Hermitian eigendecomposition, spectral matrix
//! functions, tensor products and partial transposition.
//!
//! Everything here is exact-size, allocation-light and dependency-free by
//! design: at dimension four a cyclic Jacobi sweep outperforms any general
//! eigensolver binding and is accurate to near machine precision.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate (f64 components).
pub type Complex = Complex64;

/// Default absolute comparison tolerance. Matrices here have norm O(1), so
/// absolute tolerances are meaningful everywhere.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Hermiticity precondition for the eigensolver.
const HERMITIAN_TOL: f64 = 1e-10;

/// Jacobi convergence threshold on the off-diagonal Frobenius norm.
const JACOBI_OFF_TOL: f64 = 1e-14;

/// Cap on Jacobi sweeps; dimension 4 converges in well under ten.
const MAX_SWEEPS: usize = 200;

/// Eigenvalues at or below this are outside the domain of the matrix
/// logarithm; entropy-style consumers clip them to zero themselves.
pub const LOG_DOMAIN_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |M - M^dag| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("scalar function undefined at eigenvalue {0:.6e}")]
    DomainError(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Which tensor factor of a two-qubit operator an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Dense square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Build from row-major data. Panics if `data.len() != dim * dim`.
    pub fn from_data(dim: usize, data: Vec<Complex>) -> Self {
        assert_eq!(data.len(), dim * dim, "row-major data length must be dim^2");
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex::new(1.0, 0.0));
        }
        m
    }

    /// Build from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self {
            dim,
            data: entries.iter().map(|&r| Complex::new(r, 0.0)).collect(),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, Complex::new(v, 0.0));
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex) {
        self.data[row * self.dim + col] = value;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex::new(factor, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude of M - M^dag.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference |A_ij - B_ij|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Complex {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = Complex::new(1.0, 0.0);
        for col in 0..n {
            let mut pivot = col;
            for row in col + 1..n {
                if a[row * n + col].norm() > a[pivot * n + col].norm() {
                    pivot = row;
                }
            }
            if a[pivot * n + col].norm() == 0.0 {
                return Complex::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let f = a[row * n + col] / p;
                for j in col..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= f * v;
                }
            }
        }
        det
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues come back in descending order with matching
    /// orthonormal eigenvector columns.
    pub fn eigh(&self) -> Result<EigenDecomposition, LinalgError> {
        let deviation = self.hermiticity_error();
        if deviation > HERMITIAN_TOL {
            return Err(LinalgError::NotHermitian { deviation });
        }
        let n = self.dim;
        // Work on the exactly-Hermitian part so rounding in the input cannot
        // leak into the iteration.
        let mut a = self.add(&self.adjoint()).scale_re(0.5);
        let mut v = Self::identity(n);

        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += 2.0 * a.get(p, q).norm_sqr();
                }
            }
            if off.sqrt() < JACOBI_OFF_TOL {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            return Err(LinalgError::NoConvergence(MAX_SWEEPS));
        }

        let mut order: Vec<usize> = (0..n).collect();
        let values: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
        order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());

        let mut sorted_vals = Vec::with_capacity(n);
        let mut vectors = Self::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            sorted_vals.push(values[src]);
            for row in 0..n {
                vectors.set(row, dst, v.get(row, src));
            }
        }
        Ok(EigenDecomposition {
            values: sorted_vals,
            vectors,
        })
    }

    /// Apply a real scalar function to a Hermitian matrix through its
    /// spectrum: f(M) = sum_k f(v_k) |e_k><e_k|.
    pub fn matrix_fn(&self, f: impl Fn(f64) -> f64) -> Result<Self, LinalgError> {
        let eig = self.eigh()?;
        let mapped: Vec<f64> = eig.values.iter().map(|&v| f(v)).collect();
        if let Some(idx) = mapped.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::DomainError(eig.values[idx]));
        }
        Ok(eig.reconstruct_with(&mapped))
    }

    pub fn matrix_exp(&self) -> Result<Self, LinalgError> {
        self.matrix_fn(f64::exp)
    }

    /// Principal matrix logarithm. Eigenvalues at or below the domain floor
    /// are rejected; callers needing the 0 ln 0 = 0 limit (entropy) work on
    /// the spectrum directly instead.
    pub fn matrix_log(&self) -> Result<Self, LinalgError> {
        let eig = self.eigh()?;
        if let Some(&bad) = eig.values.iter().find(|&&v| v <= LOG_DOMAIN_FLOOR) {
            return Err(LinalgError::DomainError(bad));
        }
        let mapped: Vec<f64> = eig.values.iter().map(|&v| v.ln()).collect();
        Ok(eig.reconstruct_with(&mapped))
    }

    /// Transpose one tensor factor of a two-qubit (4x4) operator.
    pub fn partial_transpose(&self, subsystem: Subsystem) -> Result<Self, LinalgError> {
        if self.dim != 4 {
            return Err(LinalgError::DimensionMismatch {
                expected: 4,
                got: self.dim,
            });
        }
        let mut out = Self::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let (row, col) = (2 * i + k, 2 * j + l);
                        let src = match subsystem {
                            Subsystem::First => (2 * j + k, 2 * i + l),
                            Subsystem::Second => (2 * i + l, 2 * j + k),
                        };
                        out.set(row, col, self.get(src.0, src.1));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One complex Jacobi rotation zeroing A[p][q] (p < q), accumulating the
/// transform into `v`. Phase-reduces the pivot to a real symmetric 2x2
/// problem, then applies the classical symmetric Schur rotation.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / r; // unit modulus
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;

    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U differs from identity only in rows/cols p,q:
    //   U[p][p] = c          U[p][q] = s
    //   U[q][p] = -conj(phase)*s   U[q][q] = conj(phase)*c
    let n = a.dim();
    let phc = phase.conj();

    // A <- U^dag A U, rows first, then columns.
    for j in 0..n {
        let apj = a.get(p, j);
        let aqj = a.get(q, j);
        a.set(p, j, apj * c - aqj * (phase * s));
        a.set(q, j, apj * s + aqj * (phase * c));
    }
    for i in 0..n {
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        a.set(i, p, aip * c - aiq * (phc * s));
        a.set(i, q, aip * s + aiq * (phc * c));
    }
    // Pivot is zero by construction; place it exactly.
    a.set(p, q, Complex::new(0.0, 0.0));
    a.set(q, p, Complex::new(0.0, 0.0));
    let dpp = a.get(p, p);
    let dqq = a.get(q, q);
    a.set(p, p, Complex::new(dpp.re, 0.0));
    a.set(q, q, Complex::new(dqq.re, 0.0));

    for i in 0..n {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, vip * c - viq * (phc * s));
        v.set(i, q, vip * s + viq * (phc * c));
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::add(self, other)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::sub(self, other)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, other: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(other)
    }
}

/// Result of a Hermitian eigendecomposition: real eigenvalues in descending
/// order, orthonormal eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// k-th eigenvector (column k).
    pub fn eigenvector(&self, k: usize) -> Vec<Complex> {
        (0..self.dim()).map(|i| self.vectors.get(i, k)).collect()
    }

    /// Assemble sum_k w_k |e_k><e_k| for caller-supplied diagonal weights.
    pub fn reconstruct_with(&self, weights: &[f64]) -> ComplexMatrix {
        let n = self.dim();
        assert_eq!(weights.len(), n);
        let mut out = ComplexMatrix::zeros(n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors.get(i, k);
                for j in 0..n {
                    let add = vik * self.vectors.get(j, k).conj() * w;
                    out.set(i, j, out.get(i, j) + add);
                }
            }
        }
        out
    }

    /// Rebuild the original matrix.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(&self.values)
    }
}

/// Tensor (Kronecker) product of two single-qubit operators:
/// entry[(2i+k)(2j+l)] = A[ij] * B[kl].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    for m in [a, b] {
        if m.dim() != 2 {
            return Err(LinalgError::DimensionMismatch {
                expected: 2,
                got: m.dim(),
            });
        }
    }
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            let aij = a.get(i, j);
            for k in 0..2 {
                for l in 0..2 {
                    out.set(2 * i + k, 2 * j + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Rank-1 projector |v><v|.
pub fn outer(v: &[Complex]) -> ComplexMatrix {
    let n = v.len();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, v[i] * v[j].conj());
        }
    }
    out
}

/// Inner product <a|b> (conjugate-linear in the first argument).
pub fn inner(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Expectation value <v|M|v>.
pub fn expectation(m: &ComplexMatrix, v: &[Complex]) -> Complex {
    inner(v, &m.matvec(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                g.set(i, j, c(re, im));
            }
        }
        g.add(&g.adjoint()).scale_re(0.5)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
    }

    #[test]
    fn eigh_identity() {
        let eig = ComplexMatrix::identity(4).eigh().unwrap();
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eigh_sorts_diagonal() {
        let eig = ComplexMatrix::from_diag(&[3.0, 1.0, 2.0, 0.0])
            .eigh()
            .unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn eigh_pauli_x() {
        let eig = pauli_x().eigh().unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
        // Eigenvectors are (|0> +- |1>)/sqrt(2) up to phase.
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        for k in 0..2 {
            let v = eig.eigenvector(k);
            assert!((v[0].norm() - inv_sqrt2).abs() < 1e-12);
            assert!((v[1].norm() - inv_sqrt2).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, c(1.0, 0.0));
        assert!(matches!(m.eigh(), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn eigh_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_hermitian(&mut rng, 4);
            let eig = m.eigh().unwrap();
            assert!(eig.reconstruct().max_abs_diff(&m) < 1e-12);
            let v = &eig.vectors;
            let gram = v.adjoint().matmul(v);
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        }
    }

    #[test]
    fn eigh_trace_and_det_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = random_hermitian(&mut rng, 4);
            let eig = m.eigh().unwrap();
            let tr: f64 = eig.values.iter().sum();
            assert!((tr - m.trace().re).abs() < 1e-12);
            let prod: f64 = eig.values.iter().product();
            assert!((prod - m.det().re).abs() < 1e-10);
            assert!(m.det().im.abs() < 1e-10);
        }
    }

    #[test]
    fn matrix_fn_identity_exp() {
        let got = ComplexMatrix::identity(4).matrix_exp().unwrap();
        let want = ComplexMatrix::identity(4).scale_re(1.0_f64.exp());
        assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn matrix_fn_diagonal_exp() {
        let m = ComplexMatrix::from_diag(&[0.0, 2.0_f64.ln(), 0.0, 0.0]);
        let got = m.matrix_exp().unwrap();
        let want = ComplexMatrix::from_diag(&[1.0, 2.0, 1.0, 1.0]);
        assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn matrix_fn_identity_function_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m = random_hermitian(&mut rng, 4);
            let got = m.matrix_fn(|x| x).unwrap();
            assert!(got.max_abs_diff(&m) < 1e-12);
        }
    }

    #[test]
    fn matrix_log_of_exp_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random_hermitian(&mut rng, 4);
            // Shift to a strictly positive spectrum before taking the log.
            let eig = m.eigh().unwrap();
            let shift = eig.values.last().unwrap().abs() + 1.0;
            let pos = m.add(&ComplexMatrix::identity(4).scale_re(shift));
            let back = pos.matrix_log().unwrap().matrix_exp().unwrap();
            assert!(back.max_abs_diff(&pos) < 1e-10);
        }
    }

    #[test]
    fn matrix_log_near_singular_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_hermitian(&mut rng, 4);
        let g = m.matmul(&m.adjoint()); // PSD
        let eps = 1e-6;
        let shifted = g.add(&ComplexMatrix::identity(4).scale_re(eps));
        let back = shifted.matrix_log().unwrap().matrix_exp().unwrap();
        assert!(back.max_abs_diff(&shifted) < 1e-10);
    }

    #[test]
    fn matrix_log_domain_error() {
        let m = ComplexMatrix::from_diag(&[1.0, 0.5, 0.0, 2.0]);
        assert!(matches!(m.matrix_log(), Err(LinalgError::DomainError(_))));
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert!(
            kron(&i2, &i2)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::identity(4))
                < 1e-15
        );
        let zz = kron(&pauli_z(), &pauli_z()).unwrap();
        let want = ComplexMatrix::from_diag(&[1.0, -1.0, -1.0, 1.0]);
        assert!(zz.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn kron_rejects_wrong_dim() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = ComplexMatrix::identity(4);
        assert!(matches!(
            kron(&i4, &i2),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn chsh_observable_spectrum() {
        // sqrt2 (XX + ZZ) has eigenvalues (2 sqrt2, 0, 0, -2 sqrt2).
        let sqrt2 = 2.0_f64.sqrt();
        let xx = kron(&pauli_x(), &pauli_x()).unwrap();
        let zz = kron(&pauli_z(), &pauli_z()).unwrap();
        let b = xx.add(&zz).scale_re(sqrt2);
        let eig = b.eigh().unwrap();
        let want = [2.0 * sqrt2, 0.0, 0.0, -2.0 * sqrt2];
        for (got, want) in eig.values.iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn kron_mixed_product_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let a = random_hermitian(&mut rng, 2);
            let b = random_hermitian(&mut rng, 2);
            let cm = random_hermitian(&mut rng, 2);
            let d = random_hermitian(&mut rng, 2);
            let lhs = kron(&a, &b).unwrap().matmul(&kron(&cm, &d).unwrap());
            let rhs = kron(&a.matmul(&cm), &b.matmul(&d)).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_fixed_points_and_involution() {
        let max_mixed = ComplexMatrix::identity(4).scale_re(0.25);
        let pt = max_mixed.partial_transpose(Subsystem::Second).unwrap();
        assert!(pt.max_abs_diff(&max_mixed) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let m = random_hermitian(&mut rng, 4);
            for sub in [Subsystem::First, Subsystem::Second] {
                let twice = m
                    .partial_transpose(sub)
                    .unwrap()
                    .partial_transpose(sub)
                    .unwrap();
                assert_eq!(twice, m); // involution is exact, entry moves only
                let pt = m.partial_transpose(sub).unwrap();
                assert_eq!(pt.trace(), m.trace());
                assert!(pt.hermiticity_error() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_transpose_product_state_stays_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let make_state = |rng: &mut ChaCha8Rng| {
            let h = random_hermitian(rng, 2);
            let g = h.matmul(&h.adjoint());
            let tr = g.trace().re;
            g.scale_re(1.0 / tr)
        };
        for _ in 0..20 {
            let ra = make_state(&mut rng);
            let rb = make_state(&mut rng);
            let prod = kron(&ra, &rb).unwrap();
            let ptb = prod.partial_transpose(Subsystem::Second).unwrap();
            // rho_A (x) rho_B^T, still a product state hence PSD.
            let want = kron(&ra, &rb.transpose()).unwrap();
            assert!(ptb.max_abs_diff(&want) < 1e-13);
            let eig = ptb.eigh().unwrap();
            assert!(*eig.values.last().unwrap() > -1e-12);
        }
    }

    #[test]
    fn partial_transpose_singlet_min_eigenvalue() {
        // |psi-><psi-| with psi- = (|01> - |10>)/sqrt(2).
        let s = 1.0 / 2.0_f64.sqrt();
        let v = [c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)];
        let p0 = outer(&v);
        let pt = p0.partial_transpose(Subsystem::Second).unwrap();
        let eig = pt.eigh().unwrap();
        assert!((eig.values.last().unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_rejects_2x2() {
        let i2 = ComplexMatrix::identity(2);
        assert!(matches!(
            i2.partial_transpose(Subsystem::First),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }
}
