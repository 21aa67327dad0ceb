//! Cross-module invariants: optimality and uniqueness of the solvers plus
//! randomized structural properties of the quantum primitives.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use mininfer::entanglement::{concurrence, ef_general, pinch_bell};
use mininfer::inference::{check_feasible, jaynes_solve, minent_solve, MinentOptions};
use mininfer::linalg::{Complex, ComplexMatrix, Subsystem};
use mininfer::quantum::{binary_entropy, trace_distance, BellProbs, DensityMatrix};
use mininfer::scenarios::{chsh_constraints, singlet_constraints};

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g.set(i, j, Complex::new(re, im));
        }
    }
    g.add(&g.adjoint()).scale_re(0.5)
}

fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.matmul(b).trace().re
}

/// Random traceless Hermitian direction orthogonal (in the HS sense) to all
/// constraint observables, so that rho + eps * delta stays feasible.
fn feasible_direction(rng: &mut ChaCha8Rng, ops: &[ComplexMatrix]) -> ComplexMatrix {
    let dim = ops[0].dim();
    let mut basis: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(dim)];
    basis.extend(ops.iter().cloned());
    loop {
        let mut delta = random_hermitian(rng, dim);
        for q in &basis {
            let coef = hs_inner(q, &delta) / hs_inner(q, q);
            delta = delta.sub(&q.scale_re(coef));
        }
        let norm = delta.max_abs();
        if norm > 1e-6 {
            return delta.scale_re(1.0 / norm);
        }
    }
}

#[test]
fn jaynes_is_entropy_optimal_among_feasible_states() {
    // 100 random feasible perturbations at eps = 1e-3 never raise entropy.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for b in [0.9, 1.3] {
        let c = chsh_constraints(b);
        let rho = jaynes_solve(&c).unwrap().state;
        let s0 = rho.entropy();
        let ops = vec![c.items()[0].0.matrix().clone()];
        let mut tested = 0;
        while tested < 100 {
            let delta = feasible_direction(&mut rng, &ops);
            let perturbed = rho.matrix().add(&delta.scale_re(1e-3));
            let state = match DensityMatrix::new(perturbed) {
                Ok(s) => s,
                Err(_) => continue, // left the state set; draw again
            };
            assert!(c.max_residual(&state) <= 1e-10);
            assert!(state.entropy() <= s0 + 1e-8);
            tested += 1;
        }
    }
}

#[test]
fn minent_output_is_bell_diagonal_for_bell_constraints() {
    for b in [0.2, 0.8, 1.3, 1.7, 2.4] {
        let r = minent_solve(&chsh_constraints(b)).unwrap();
        assert!(r.state.is_bell_diagonal(1e-9), "b = {b}");
        assert!(r.diagnostics.as_minent().unwrap().bell_reduced);
    }
}

#[test]
fn no_feasible_state_undercuts_e_min() {
    // 64 independently seeded witness searches over the feasible set never
    // find entanglement of formation below the solver's E_min.
    for b in [1.3, 2.0] {
        let c = chsh_constraints(b);
        let e_min = minent_solve(&c)
            .unwrap()
            .diagnostics
            .as_minent()
            .unwrap()
            .e_min;
        for seed in 0..64 {
            let feas = check_feasible(&c, seed);
            let witness = feas.witness.expect("constraints are feasible");
            assert!(
                ef_general(&witness) >= e_min - 1e-6,
                "b = {b}, seed = {seed}"
            );
        }
    }
}

#[test]
fn minent_is_unique_across_seeds() {
    for (label, c) in [
        ("chsh", chsh_constraints(1.9)),
        ("singlet", singlet_constraints(0.7)),
    ] {
        let states: Vec<_> = (0..3)
            .map(|seed| minent_solve_with_seed(&c, seed).state)
            .collect();
        for pair in states.windows(2) {
            assert!(
                trace_distance(&pair[0], &pair[1]) <= 1e-8,
                "scenario {label}"
            );
        }
    }
}

fn minent_solve_with_seed(
    c: &mininfer::inference::ConstraintSet,
    seed: u64,
) -> mininfer::inference::InferenceResult {
    mininfer::inference::minent_solve_with(
        c,
        MinentOptions {
            seed,
            force_general: false,
        },
    )
    .unwrap()
}

#[test]
fn jaynes_singlet_mean_is_reproduced_across_grid() {
    for k in 1..20 {
        let f = 0.05 * k as f64;
        let r = jaynes_solve(&singlet_constraints(f)).unwrap();
        let got = r.state.bell_overlaps()[0];
        assert!((got - f).abs() <= 1e-10, "F = {f}: got {got}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bell_probs_round_trip(raw in prop::array::uniform4(1e-3..1.0f64)) {
        let sum: f64 = raw.iter().sum();
        let p = raw.map(|v| v / sum);
        let probs = BellProbs::new(p).unwrap();
        let rho = DensityMatrix::from_bell_probs(&probs);
        let back = rho.bell_overlaps();
        for (a, b) in probs.probs().iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(rho.is_bell_diagonal(1e-12));
    }

    #[test]
    fn pinch_preserves_overlaps_and_entropy_rises(seed in 0u64..10_000) {
        let rho = mininfer::quantum::random_density(seed);
        let pinched = pinch_bell(&rho);
        let before = rho.bell_overlaps();
        let after = pinched.bell_overlaps();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(pinched.entropy() >= rho.entropy() - 1e-10);
        prop_assert!(ef_general(&pinched) <= ef_general(&rho) + 1e-9);
    }

    #[test]
    fn bell_diagonal_concurrence_closed_form(raw in prop::array::uniform4(1e-3..1.0f64)) {
        let sum: f64 = raw.iter().sum();
        let p = raw.map(|v| v / sum);
        let f = p.iter().cloned().fold(f64::MIN, f64::max);
        let rho = DensityMatrix::from_bell_probs(&BellProbs::new(p).unwrap());
        let want = (2.0 * f - 1.0).max(0.0);
        prop_assert!((concurrence(&rho) - want).abs() < 1e-10);
    }

    #[test]
    fn binary_entropy_is_symmetric(x in 0.0..=1.0f64) {
        let a = binary_entropy(x).unwrap();
        let b = binary_entropy(1.0 - x).unwrap();
        prop_assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn partial_transpose_involution_on_random_states(seed in 0u64..10_000) {
        let rho = mininfer::quantum::random_density(seed);
        for sub in [Subsystem::First, Subsystem::Second] {
            let twice = rho
                .matrix()
                .partial_transpose(sub)
                .unwrap()
                .partial_transpose(sub)
                .unwrap();
            prop_assert!(twice.max_abs_diff(rho.matrix()) == 0.0);
        }
    }
}
