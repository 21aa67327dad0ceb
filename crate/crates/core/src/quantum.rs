//! Quantum domain types and constants: Pauli operators, the Bell basis in
//! the index convention used across this crate, density matrices, von
//! Neumann entropy and seeded random sampling of states and unitaries.
//!
//! Bell-basis ordering is fixed once and for all as
//! `(psi0, psi1, psi2, psi3) = (Psi-, Phi-, Phi+, Psi+)` so that index 0 is
//! the singlet; every probability vector and report in the crate uses this
//! order.

use std::f64::consts::LN_2;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{inner, outer, Complex, ComplexMatrix, LinalgError};

/// Hermiticity/trace/positivity tolerance for state validation.
pub const STATE_TOL: f64 = 1e-10;

/// Anything below this eigenvalue is treated as exactly zero inside
/// entropy sums (the 0 ln 0 = 0 convention).
const ENTROPY_EIG_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("matrix is not Hermitian within {STATE_TOL:e}: deviation {0:.3e}")]
    NotHermitian(f64),
    #[error("trace must be 1 within {STATE_TOL:e}: got {0:.12}")]
    TraceNotOne(f64),
    #[error("state has negative eigenvalue {0:.3e} below tolerance")]
    NotPositive(f64),
    #[error("unsupported dimension {0}: expected 2 or 4")]
    BadDimension(usize),
    #[error("probabilities do not form a distribution: {0}")]
    InvalidDistribution(String),
    #[error("argument {0:.6e} outside domain [{1}, {2}]")]
    DomainError(f64, f64, f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Single-qubit Pauli operators.
pub mod pauli {
    use super::{Complex, ComplexMatrix};

    pub fn i() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_data(
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(0.0, -1.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.0, 0.0),
            ],
        )
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// Pauli by letter, identity included.
    pub fn by_label(label: char) -> Option<ComplexMatrix> {
        match label {
            'I' => Some(i()),
            'X' => Some(x()),
            'Y' => Some(y()),
            'Z' => Some(z()),
            _ => None,
        }
    }
}

/// The four Bell states in this crate's fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    /// (|01> - |10>)/sqrt2, the singlet; index 0.
    PsiMinus = 0,
    /// (|00> - |11>)/sqrt2; index 1.
    PhiMinus = 1,
    /// (|00> + |11>)/sqrt2; index 2.
    PhiPlus = 2,
    /// (|01> + |10>)/sqrt2; index 3.
    PsiPlus = 3,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PsiMinus,
        BellState::PhiMinus,
        BellState::PhiPlus,
        BellState::PsiPlus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            BellState::PsiMinus => "PSI-",
            BellState::PhiMinus => "PHI-",
            BellState::PhiPlus => "PHI+",
            BellState::PsiPlus => "PSI+",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        BellState::ALL.into_iter().find(|s| s.label() == label)
    }
}

/// The Bell basis: four state vectors and their rank-1 projectors.
#[derive(Debug)]
pub struct BellBasis {
    states: [Vec<Complex>; 4],
    projectors: [ComplexMatrix; 4],
}

impl BellBasis {
    /// The shared basis instance.
    pub fn get() -> &'static BellBasis {
        static BASIS: OnceLock<BellBasis> = OnceLock::new();
        BASIS.get_or_init(BellBasis::build)
    }

    fn build() -> BellBasis {
        let s = 1.0 / 2.0_f64.sqrt();
        let re = |v: f64| Complex::new(v, 0.0);
        let states = [
            vec![re(0.0), re(s), re(-s), re(0.0)], // Psi-
            vec![re(s), re(0.0), re(0.0), re(-s)], // Phi-
            vec![re(s), re(0.0), re(0.0), re(s)],  // Phi+
            vec![re(0.0), re(s), re(s), re(0.0)],  // Psi+
        ];
        let projectors = [
            outer(&states[0]),
            outer(&states[1]),
            outer(&states[2]),
            outer(&states[3]),
        ];
        BellBasis { states, projectors }
    }

    pub fn state(&self, which: BellState) -> &[Complex] {
        &self.states[which.index()]
    }

    pub fn projector(&self, which: BellState) -> &ComplexMatrix {
        &self.projectors[which.index()]
    }

    /// <psi_i| M |psi_j>.
    pub fn element(&self, m: &ComplexMatrix, i: BellState, j: BellState) -> Complex {
        inner(self.state(i), &m.matvec(self.state(j)))
    }

    /// Diagonal Bell-basis elements <psi_k| M |psi_k> for all k.
    pub fn diagonal(&self, m: &ComplexMatrix) -> [f64; 4] {
        let mut out = [0.0; 4];
        for k in BellState::ALL {
            out[k.index()] = self.element(m, k, k).re;
        }
        out
    }
}

/// A probability distribution over the Bell basis, in basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct BellProbs {
    p: [f64; 4],
}

impl BellProbs {
    /// Validate and normalize: entries within -1e-12 are clipped to zero and
    /// the vector must already sum to 1 within 1e-12.
    pub fn new(p: [f64; 4]) -> Result<Self, QuantumError> {
        if let Some(&bad) = p.iter().find(|&&v| v < -1e-12 || !v.is_finite()) {
            return Err(QuantumError::InvalidDistribution(format!(
                "entry {bad:e} is negative"
            )));
        }
        let mut q = p.map(|v| v.max(0.0));
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(QuantumError::InvalidDistribution(format!(
                "sum {sum:.15} differs from 1"
            )));
        }
        for v in &mut q {
            *v /= sum;
        }
        Ok(Self { p: q })
    }

    pub fn probs(&self) -> [f64; 4] {
        self.p
    }

    pub fn get(&self, which: BellState) -> f64 {
        self.p[which.index()]
    }

    /// Largest weight; for Bell-diagonal states this is the quantity all
    /// entanglement measures used here depend on.
    pub fn max_weight(&self) -> f64 {
        self.p.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Shannon entropy in nats (equals the state's von Neumann entropy).
    pub fn shannon_entropy(&self) -> f64 {
        entropy_of_spectrum(&self.p)
    }
}

/// A Hermitian observable together with a display label.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
    label: String,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self, QuantumError> {
        let dev = matrix.hermiticity_error();
        if dev > STATE_TOL {
            return Err(QuantumError::NotHermitian(dev));
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// (eigenvalues within -1e-10 are clipped to zero and the state renormalized).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QuantumError> {
        let dim = matrix.dim();
        if dim != 2 && dim != 4 {
            return Err(QuantumError::BadDimension(dim));
        }
        let dev = matrix.hermiticity_error();
        if dev > STATE_TOL {
            return Err(QuantumError::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(QuantumError::TraceNotOne(tr.re));
        }
        let eig = matrix.eigh()?;
        let min = *eig.values.last().unwrap();
        if min < -STATE_TOL {
            return Err(QuantumError::NotPositive(min));
        }
        if min < 0.0 {
            // Round-off negativity: clip and renormalize.
            let clipped: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
            let sum: f64 = clipped.iter().sum();
            let renorm: Vec<f64> = clipped.iter().map(|v| v / sum).collect();
            return Ok(Self {
                matrix: eig.reconstruct_with(&renorm),
            });
        }
        Ok(Self { matrix })
    }

    /// Wrap a matrix that is positive by construction, skipping validation.
    pub(crate) fn from_valid(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Maximally mixed state I/dim.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_valid(ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64))
    }

    /// Pure state |v><v| from a normalized vector.
    pub fn pure(v: &[Complex]) -> Result<Self, QuantumError> {
        let norm_sq: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(QuantumError::InvalidDistribution(format!(
                "vector norm^2 {norm_sq} differs from 1"
            )));
        }
        Ok(Self::from_valid(outer(v)))
    }

    /// Bell-diagonal state sum_i p_i |psi_i><psi_i|.
    pub fn from_bell_probs(p: &BellProbs) -> Self {
        let basis = BellBasis::get();
        let mut m = ComplexMatrix::zeros(4);
        for k in BellState::ALL {
            m = m.add(&basis.projector(k).scale_re(p.get(k)));
        }
        Self::from_valid(m)
    }

    /// Tr(rho A).
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim(), observable.dim());
        self.matrix.matmul(observable).trace().re
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy_of_matrix(&self.matrix)
    }

    /// Diagonal Bell-basis weights Tr(rho P_i). Always sums to 1; entries can
    /// carry rounding noise, so this is not necessarily a `BellProbs`.
    pub fn bell_overlaps(&self) -> [f64; 4] {
        assert_eq!(self.dim(), 4, "Bell overlaps need a two-qubit state");
        BellBasis::get().diagonal(&self.matrix)
    }

    /// True when all off-diagonal Bell-basis elements are below `tol` in
    /// magnitude.
    pub fn is_bell_diagonal(&self, tol: f64) -> bool {
        if self.dim() != 4 {
            return false;
        }
        let basis = BellBasis::get();
        for i in BellState::ALL {
            for j in BellState::ALL {
                if i.index() < j.index() && basis.element(&self.matrix, i, j).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Von Neumann entropy of a Hermitian PSD matrix, in nats.
pub(crate) fn entropy_of_matrix(m: &ComplexMatrix) -> f64 {
    let eig = m.eigh().expect("entropy needs a Hermitian matrix");
    entropy_of_spectrum(&eig.values)
}

/// Shannon entropy of a spectrum with the 0 ln 0 = 0 convention.
pub(crate) fn entropy_of_spectrum(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .map(|&v| {
            if v > ENTROPY_EIG_FLOOR {
                -v * v.ln()
            } else {
                0.0
            }
        })
        .sum();
    s.max(0.0)
}

/// Binary entropy H(x) = -x ln x - (1-x) ln(1-x) in nats. Arguments within
/// 1e-12 of [0, 1] are clipped; anything farther out is a domain error.
pub fn binary_entropy(x: f64) -> Result<f64, QuantumError> {
    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(QuantumError::DomainError(x, 0.0, 1.0));
    }
    let x = x.clamp(0.0, 1.0);
    let term = |v: f64| if v > 0.0 { -v * v.ln() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// ln 2, the entanglement scale of one Bell pair in nats.
pub const LN2: f64 = LN_2;

/// Trace distance (1/2)||a - b||_1.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = a.matrix().sub(b.matrix());
    let eig = diff.eigh().expect("difference of states is Hermitian");
    0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Sample a random density matrix from the Hilbert-Schmidt-type ensemble
/// G G^dag / Tr(G G^dag) with G a matrix of independent complex Gaussians.
pub fn random_density(seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_from(&mut rng)
}

/// Same ensemble, drawing from a caller-managed generator.
pub fn random_density_from(rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(rng, 4);
    let gram = g.matmul(&g.adjoint());
    let tr = gram.trace().re;
    DensityMatrix::new(gram.scale_re(1.0 / tr)).expect("G G^dag / tr is a valid state")
}

/// Sample a Haar-distributed unitary of dimension 2 or 4.
pub fn random_unitary(seed: u64, dim: usize) -> Result<ComplexMatrix, QuantumError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary_from(&mut rng, dim)
}

/// Same distribution, drawing from a caller-managed generator. Uses QR of a
/// Ginibre matrix via modified Gram-Schmidt; normalizing against positive
/// column norms fixes the diagonal phases, which is exactly the correction
/// that makes the factor Haar-distributed.
pub fn random_unitary_from(rng: &mut impl Rng, dim: usize) -> Result<ComplexMatrix, QuantumError> {
    if dim != 2 && dim != 4 {
        return Err(QuantumError::BadDimension(dim));
    }
    let g = ginibre(rng, dim);
    let mut cols: Vec<Vec<Complex>> = (0..dim)
        .map(|j| (0..dim).map(|i| g.get(i, j)).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let proj = inner(&cols[k], &cols[j]);
            let prev = cols[k].clone();
            for (c, p) in cols[j].iter_mut().zip(&prev) {
                *c -= proj * p;
            }
        }
        let norm: f64 = cols[j].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut cols[j] {
            *c /= norm;
        }
    }
    let mut u = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            u.set(i, j, v);
        }
    }
    Ok(u)
}

fn ginibre(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g.set(i, j, Complex::new(re, im));
        }
    }
    g
}
