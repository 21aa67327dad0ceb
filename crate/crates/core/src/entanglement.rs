//! Entanglement quantification and separability decisions for two-qubit
//! states: the Bell-diagonal closed forms, general-state concurrence, the
//! partial-transpose test, Bell pinching and twirling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{kron, ComplexMatrix, Subsystem};
use crate::quantum::{
    binary_entropy, pauli, random_unitary_from, BellProbs, BellState, DensityMatrix, QuantumError,
    LN2,
};

/// Positivity tolerance of the partial-transpose test.
const PPT_TOL: f64 = 1e-10;

/// Off-diagonal tolerance below which a state counts as Bell-diagonal for
/// reporting purposes.
const BELL_DIAGONAL_TOL: f64 = 1e-9;

/// Entanglement figures of a two-qubit state.
///
/// `e_r` is only meaningful on Bell-diagonal states, where it has a closed
/// form; for anything else it would require an optimization over the
/// separable set and is reported as absent.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementSummary {
    /// Largest Bell-diagonal weight (singlet-fraction analogue).
    pub fraction: f64,
    /// Concurrence in [0, 1].
    pub concurrence: f64,
    /// Entanglement of formation in nats.
    pub e_f: f64,
    /// Relative entropy of entanglement in nats; Bell-diagonal states only.
    pub e_r: Option<f64>,
    /// Verdict of the partial-transpose test.
    pub separable: bool,
}

/// Non-selective measurement in the Bell basis: rho -> sum_i P_i rho P_i.
/// Keeps every Bell-diagonal weight exactly and kills all coherences.
pub fn pinch_bell(rho: &DensityMatrix) -> DensityMatrix {
    let overlaps = rho.bell_overlaps();
    let probs = BellProbs::new(clip_overlaps(overlaps))
        .expect("pinched overlaps of a valid state form a distribution");
    DensityMatrix::from_bell_probs(&probs)
}

fn clip_overlaps(mut o: [f64; 4]) -> [f64; 4] {
    for v in &mut o {
        *v = v.max(0.0);
    }
    let sum: f64 = o.iter().sum();
    for v in &mut o {
        *v /= sum;
    }
    o
}

/// Pinch at the matrix level, for optimizer internals working on raw
/// (by-construction PSD) matrices.
pub(crate) fn pinch_bell_matrix(m: &ComplexMatrix) -> ComplexMatrix {
    let basis = crate::quantum::BellBasis::get();
    let diag = basis.diagonal(m);
    let mut out = ComplexMatrix::zeros(4);
    for k in BellState::ALL {
        out = out.add(&basis.projector(k).scale_re(diag[k.index()]));
    }
    out
}

/// Exact Werner projection: F P0 + (1-F)/3 (P1 + P2 + P3) with
/// F = Tr(rho P0). This is the average of (U (x) U) rho (U (x) U)^dag over
/// Haar-random single-qubit unitaries, evaluated in closed form.
pub fn twirl(rho: &DensityMatrix) -> DensityMatrix {
    let f = rho.bell_overlaps()[BellState::PsiMinus.index()].clamp(0.0, 1.0);
    let rest = (1.0 - f) / 3.0;
    let probs = BellProbs::new([f, rest, rest, rest]).expect("Werner weights sum to 1");
    DensityMatrix::from_bell_probs(&probs)
}

/// Monte Carlo twirl: average of (U (x) U) rho (U (x) U)^dag over `n_samples`
/// Haar draws. Converges to [`twirl`] as the sample count grows; kept as a
/// statistical cross-check of the closed form.
pub fn twirl_montecarlo(rho: &DensityMatrix, n_samples: usize, seed: u64) -> DensityMatrix {
    assert!(n_samples >= 1, "need at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = ComplexMatrix::zeros(4);
    for _ in 0..n_samples {
        let u = random_unitary_from(&mut rng, 2).expect("dim 2 is supported");
        let uu = kron(&u, &u).expect("2x2 operands");
        let term = uu.matmul(rho.matrix()).matmul(&uu.adjoint());
        acc = acc.add(&term);
    }
    let avg = acc.scale_re(1.0 / n_samples as f64);
    DensityMatrix::new(avg).expect("average of valid states is a valid state")
}

/// Two-qubit concurrence via the spin-flip spectrum: the square roots of the
/// eigenvalues of sqrt(rho) rho_tilde sqrt(rho) with
/// rho_tilde = (Y (x) Y) rho* (Y (x) Y), combined as
/// C = max(0, l1 - l2 - l3 - l4).
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    concurrence_of(rho.matrix())
}

pub(crate) fn concurrence_of(m: &ComplexMatrix) -> f64 {
    let yy = kron(&pauli::y(), &pauli::y()).expect("2x2 operands");
    let flipped = yy.matmul(&m.conj()).matmul(&yy);

    // sqrt(rho) through the spectrum, clipping round-off negativity.
    let eig = m.eigh().expect("state is Hermitian");
    let root_vals: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let sqrt_rho = eig.reconstruct_with(&root_vals);

    let inner = sqrt_rho.matmul(&flipped).matmul(&sqrt_rho);
    let inner_eig = inner.eigh().expect("congruence of Hermitian is Hermitian");
    let mut lambdas: Vec<f64> = inner_eig
        .values
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// Entanglement of formation of a Bell-diagonal state with largest weight
/// `fraction`, in nats: H(1/2 + sqrt(F(1-F))) for F > 1/2, else 0.
pub fn ef_from_fraction(fraction: f64) -> Result<f64, QuantumError> {
    let f = check_unit_interval(fraction)?;
    if f <= 0.5 {
        return Ok(0.0);
    }
    binary_entropy(0.5 + (f * (1.0 - f)).sqrt())
}

/// Relative entropy of entanglement of a Bell-diagonal state with largest
/// weight `fraction`, in nats: ln 2 - H(F) for F > 1/2, else 0.
pub fn er_from_fraction(fraction: f64) -> Result<f64, QuantumError> {
    let f = check_unit_interval(fraction)?;
    if f <= 0.5 {
        return Ok(0.0);
    }
    Ok((LN2 - binary_entropy(f)?).max(0.0))
}

fn check_unit_interval(x: f64) -> Result<f64, QuantumError> {
    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(QuantumError::DomainError(x, 0.0, 1.0));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Entanglement of formation of an arbitrary two-qubit state in nats,
/// H((1 + sqrt(1 - C^2))/2) with C the concurrence. Reduces to
/// [`ef_from_fraction`] of the largest weight on Bell-diagonal states.
pub fn ef_general(rho: &DensityMatrix) -> f64 {
    ef_of_concurrence(concurrence(rho))
}

pub(crate) fn ef_of_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    if c == 0.0 {
        return 0.0;
    }
    let x = 0.5 * (1.0 + (1.0 - c * c).sqrt());
    binary_entropy(x).expect("x in [1/2, 1]")
}

/// Separability via positivity of the partial transpose, which is
/// necessary and sufficient for two qubits.
pub fn is_separable_ppt(rho: &DensityMatrix) -> bool {
    let pt = rho
        .matrix()
        .partial_transpose(Subsystem::Second)
        .expect("two-qubit state");
    let eig = pt.eigh().expect("partial transpose stays Hermitian");
    *eig.values.last().unwrap() >= -PPT_TOL
}

/// Full entanglement report for a two-qubit state.
pub fn summarize(rho: &DensityMatrix) -> EntanglementSummary {
    let overlaps = rho.bell_overlaps();
    let fraction = overlaps.iter().cloned().fold(f64::MIN, f64::max);
    let c = concurrence(rho);
    let e_f = ef_of_concurrence(c);
    let e_r = if rho.is_bell_diagonal(BELL_DIAGONAL_TOL) {
        Some(er_from_fraction(fraction.clamp(0.0, 1.0)).expect("fraction in [0,1]"))
    } else {
        None
    };
    EntanglementSummary {
        fraction,
        concurrence: c,
        e_f,
        e_r,
        separable: is_separable_ppt(rho),
    }
}
