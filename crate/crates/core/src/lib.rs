//! Two-qubit state inference from incomplete measurement data.
//!
//! Given exact mean values of a (generally incomplete) set of observables,
//! this crate estimates the underlying two-qubit density matrix under two
//! competing schemes and quantifies how entangled each estimate is:
//!
//! * **Maximum entropy (Jaynes)** — the Gibbs-form state
//!   `exp(-sum_i lambda_i A_i)/Z` whose multipliers are fitted so every
//!   constraint holds, found by minimizing the convex dual.
//! * **Minimum entanglement** — first minimize entanglement over all states
//!   compatible with the data, then maximize von Neumann entropy among the
//!   minimizers, producing a unique representative state.
//!
//! The two schemes can disagree qualitatively: for the CHSH observable
//! `sqrt2 (XX + ZZ)` there is a window of mean values where the maximum
//! entropy estimate is inseparable even though a separable state matches the
//! data exactly. The [`scenarios`] module reproduces those worked examples,
//! locates the thresholds by bisection, and checks the pinching/twirling
//! inequalities behind them by Monte Carlo sampling.

pub mod entanglement;
pub mod inference;
pub mod linalg;
pub mod quantum;
pub mod scenarios;

pub use entanglement::EntanglementSummary;
pub use inference::{
    compare, jaynes_solve, minent_solve, ConstraintSet, InferenceError, InferenceResult, Verdict,
};
pub use linalg::{Complex, ComplexMatrix};
pub use quantum::{BellProbs, BellState, DensityMatrix, Observable};
pub use scenarios::{Scenario, ScenarioRow, ThresholdPredicate};
