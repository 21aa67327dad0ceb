//! Canned reproductions of the three worked inference scenarios, parameter
//! sweeps, threshold bisection and the Monte Carlo verifier for the
//! pinching inequalities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::entanglement::{ef_general, er_from_fraction, pinch_bell};
use crate::inference::{
    compare_with, jaynes_solve, minent_solve_with, Comparison, ConstraintSet, InferenceError,
    MinentOptions, Verdict,
};
use crate::linalg::kron;
use crate::quantum::{pauli, random_density_from, BellBasis, BellState, Observable};

/// Top of the CHSH mean-value range, 2 sqrt2.
pub fn chsh_max_mean() -> f64 {
    2.0 * 2.0_f64.sqrt()
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parameter {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("predicate does not change over the scanned interval")]
    NoSignChange,
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// The three worked data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Single constraint: the CHSH observable sqrt2 (XX + ZZ) with mean b.
    Chsh,
    /// The same correlation data split into locally measurable pieces:
    /// sqrt2 XX and sqrt2 ZZ with mean b/2 each, all four single-qubit
    /// X/Z marginals zero.
    Local,
    /// Single constraint: the singlet projector with mean F.
    Singlet,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Chsh => "chsh",
            Scenario::Local => "local",
            Scenario::Singlet => "singlet",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "chsh" => Some(Scenario::Chsh),
            "local" => Some(Scenario::Local),
            "singlet" => Some(Scenario::Singlet),
            _ => None,
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            Scenario::Chsh | Scenario::Local => (0.0, chsh_max_mean()),
            Scenario::Singlet => (0.0, 1.0),
        }
    }
}

/// Which solver's separability verdict a threshold search follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdPredicate {
    JaynesInseparable,
    MinentInseparable,
}

impl ThresholdPredicate {
    pub fn label(self) -> &'static str {
        match self {
            ThresholdPredicate::JaynesInseparable => "jaynes-inseparable",
            ThresholdPredicate::MinentInseparable => "minent-inseparable",
        }
    }
}

/// One row of a scenario evaluation: both solvers' entanglement figures at
/// one parameter value.
#[derive(Debug, Clone)]
pub struct ScenarioRow {
    pub parameter: f64,
    pub jaynes_fraction: f64,
    pub jaynes_separable: bool,
    pub minent_fraction: f64,
    pub minent_separable: bool,
    pub e_f_jaynes: f64,
    pub e_f_minent: f64,
    pub e_r_jaynes: Option<f64>,
    pub e_r_minent: Option<f64>,
    pub verdict: Verdict,
}

impl ScenarioRow {
    fn from_comparison(parameter: f64, cmp: &Comparison) -> Self {
        Self {
            parameter,
            jaynes_fraction: cmp.jaynes.summary.fraction,
            jaynes_separable: cmp.jaynes.summary.separable,
            minent_fraction: cmp.minent.summary.fraction,
            minent_separable: cmp.minent.summary.separable,
            e_f_jaynes: cmp.jaynes.summary.e_f,
            e_f_minent: cmp.minent.summary.e_f,
            e_r_jaynes: cmp.jaynes.summary.e_r,
            e_r_minent: cmp.minent.summary.e_r,
            verdict: cmp.verdict,
        }
    }
}

/// Constraint set {(B, b)} for the CHSH observable.
pub fn chsh_constraints(b: f64) -> ConstraintSet {
    let sqrt2 = 2.0_f64.sqrt();
    let bop = kron(&pauli::x(), &pauli::x())
        .expect("2x2 operands")
        .add(&kron(&pauli::z(), &pauli::z()).expect("2x2 operands"))
        .scale_re(sqrt2);
    let obs = Observable::new(bop, "sqrt2*XX + sqrt2*ZZ").expect("Hermitian by construction");
    ConstraintSet::new(vec![(obs, b)]).expect("single observable is independent")
}

/// The six-constraint locally-measurable data set at CHSH mean b.
pub fn local_constraints(b: f64) -> ConstraintSet {
    let sqrt2 = 2.0_f64.sqrt();
    let mk = |m, label: &str| Observable::new(m, label).expect("Hermitian by construction");
    ConstraintSet::new(vec![
        (
            mk(
                kron(&pauli::x(), &pauli::x()).unwrap().scale_re(sqrt2),
                "sqrt2*XX",
            ),
            b / 2.0,
        ),
        (
            mk(
                kron(&pauli::z(), &pauli::z()).unwrap().scale_re(sqrt2),
                "sqrt2*ZZ",
            ),
            b / 2.0,
        ),
        (mk(kron(&pauli::x(), &pauli::i()).unwrap(), "XI"), 0.0),
        (mk(kron(&pauli::z(), &pauli::i()).unwrap(), "ZI"), 0.0),
        (mk(kron(&pauli::i(), &pauli::x()).unwrap(), "IX"), 0.0),
        (mk(kron(&pauli::i(), &pauli::z()).unwrap(), "IZ"), 0.0),
    ])
    .expect("six independent observables")
}

/// Constraint set {(P0, F)} for the singlet projector.
pub fn singlet_constraints(f: f64) -> ConstraintSet {
    let p0 = BellBasis::get().projector(BellState::PsiMinus).clone();
    let obs = Observable::new(p0, "P[PSI-]").expect("projector is Hermitian");
    ConstraintSet::new(vec![(obs, f)]).expect("single observable is independent")
}

fn constraints_for(scenario: Scenario, parameter: f64) -> Result<ConstraintSet, ScenarioError> {
    let (lo, hi) = scenario.domain();
    if !(lo..=hi).contains(&parameter) {
        return Err(ScenarioError::OutOfRange {
            value: parameter,
            lo,
            hi,
        });
    }
    Ok(match scenario {
        Scenario::Chsh => chsh_constraints(parameter),
        Scenario::Local => local_constraints(parameter),
        Scenario::Singlet => singlet_constraints(parameter),
    })
}

/// Run both solvers on a scenario at one parameter value, returning the
/// full comparison (states included).
pub fn run_scenario(
    scenario: Scenario,
    parameter: f64,
    seed: u64,
) -> Result<Comparison, ScenarioError> {
    let c = constraints_for(scenario, parameter)?;
    Ok(compare_with(
        &c,
        MinentOptions {
            seed,
            force_general: false,
        },
    )?)
}

pub fn scenario_chsh(b: f64, seed: u64) -> Result<ScenarioRow, ScenarioError> {
    let cmp = run_scenario(Scenario::Chsh, b, seed)?;
    Ok(ScenarioRow::from_comparison(b, &cmp))
}

pub fn scenario_local(b: f64, seed: u64) -> Result<ScenarioRow, ScenarioError> {
    let cmp = run_scenario(Scenario::Local, b, seed)?;
    Ok(ScenarioRow::from_comparison(b, &cmp))
}

pub fn scenario_singlet(f: f64, seed: u64) -> Result<ScenarioRow, ScenarioError> {
    let cmp = run_scenario(Scenario::Singlet, f, seed)?;
    Ok(ScenarioRow::from_comparison(f, &cmp))
}

/// Evaluate a scenario on the grid from, from+step, ..., up to `to`
/// inclusive (within half a step).
pub fn sweep(
    scenario: Scenario,
    from: f64,
    to: f64,
    step: f64,
    seed: u64,
) -> Result<Vec<ScenarioRow>, ScenarioError> {
    if step <= 1e-6 || to < from {
        return Err(ScenarioError::OutOfRange {
            value: step,
            lo: 1e-6,
            hi: f64::INFINITY,
        });
    }
    let n = ((to - from) / step + 0.5).floor() as usize;
    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let x = from + step * k as f64;
        let cmp = run_scenario(scenario, x, seed)?;
        rows.push(ScenarioRow::from_comparison(x, &cmp));
    }
    Ok(rows)
}

/// Locate the parameter where a solver's verdict flips from separable to
/// inseparable, by bisection on the full solver pipeline. The returned
/// midpoint is accurate to 1e-7 halved.
pub fn find_threshold(
    scenario: Scenario,
    predicate: ThresholdPredicate,
    seed: u64,
) -> Result<f64, ScenarioError> {
    let (dom_lo, dom_hi) = scenario.domain();
    // Stay strictly inside the boundary mean at the top of the range.
    let mut lo = dom_lo;
    let mut hi = match scenario {
        Scenario::Chsh | Scenario::Local => dom_hi - 1e-6,
        Scenario::Singlet => dom_hi,
    };

    let eval = |x: f64| -> Result<bool, ScenarioError> {
        let c = constraints_for(scenario, x)?;
        let inseparable = match predicate {
            ThresholdPredicate::JaynesInseparable => !jaynes_solve(&c)?.summary.separable,
            ThresholdPredicate::MinentInseparable => {
                !minent_solve_with(
                    &c,
                    MinentOptions {
                        seed,
                        force_general: false,
                    },
                )?
                .summary
                .separable
            }
        };
        Ok(inseparable)
    };

    let at_lo = eval(lo)?;
    let at_hi = eval(hi)?;
    if at_lo == at_hi {
        return Err(ScenarioError::NoSignChange);
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monte Carlo tally of the Bell-measurement inequalities
/// E_f(rho_B) <= E_f(rho) and S(rho_B) >= S(rho) over random states.
#[derive(Debug, Clone)]
pub struct LemmaVerdict {
    pub samples: usize,
    /// Count of E_f(rho_B) > E_f(rho) + 1e-9.
    pub ef_violations: usize,
    /// Count of S(rho) > S(rho_B) + 1e-9.
    pub entropy_violations: usize,
    /// Count of E_r violations on the (always Bell-diagonal) pinched states,
    /// measured against the closed form at the pre-pinch largest overlap.
    pub er_violations: usize,
    /// Signed extreme of E_f(rho_B) - E_f(rho) over the sample.
    pub max_ef_gap: f64,
    /// Signed extreme of S(rho) - S(rho_B) over the sample.
    pub max_entropy_gap: f64,
    pub seed: u64,
}

/// Sample `samples` random states, pinch each in the Bell basis, and tally
/// violations of the entanglement and entropy inequalities at 1e-9.
pub fn verify_lemma(samples: usize, seed: u64) -> LemmaVerdict {
    assert!(samples >= 1, "need at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ef_violations = 0;
    let mut entropy_violations = 0;
    let mut er_violations = 0;
    let mut max_ef_gap = f64::NEG_INFINITY;
    let mut max_entropy_gap = f64::NEG_INFINITY;

    for _ in 0..samples {
        let rho = random_density_from(&mut rng);
        let pinched = pinch_bell(&rho);

        let ef_gap = ef_general(&pinched) - ef_general(&rho);
        max_ef_gap = max_ef_gap.max(ef_gap);
        if ef_gap > 1e-9 {
            ef_violations += 1;
        }

        let entropy_gap = rho.entropy() - pinched.entropy();
        max_entropy_gap = max_entropy_gap.max(entropy_gap);
        if entropy_gap > 1e-9 {
            entropy_violations += 1;
        }

        // Restricted E_r check: pinching preserves the Bell diagonal, so the
        // closed form evaluated after the pinch must not exceed the one
        // evaluated before it.
        let f_before = rho.bell_overlaps().iter().cloned().fold(f64::MIN, f64::max);
        let f_after = pinched
            .bell_overlaps()
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max);
        let er_before = er_from_fraction(f_before.clamp(0.0, 1.0)).expect("fraction in range");
        let er_after = er_from_fraction(f_after.clamp(0.0, 1.0)).expect("fraction in range");
        if er_after > er_before + 1e-9 {
            er_violations += 1;
        }
    }

    LemmaVerdict {
        samples,
        ef_violations,
        entropy_violations,
        er_violations,
        max_ef_gap,
        max_entropy_gap,
        seed,
    }
}
