//! General path of the minimum-entanglement solver, for constraint sets
//! with no Bell-simplex reduction (and as an independent cross-check of the
//! reduced path).
//!
//! States are parameterized as rho = T^dag T / Tr(T^dag T) over the 32 real
//! parts of T, constraints enter through a quadratic penalty whose weight
//! grows by 10x per stage, and each stage is minimized by derivative-free
//! simplex descent. Stage 1 minimizes concurrence; stage 2 maximizes entropy
//! over the entanglement minimizers (the separable set when the minimum is
//! zero, otherwise the slice C <= C_min + tol).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::entanglement::{self, concurrence_of, ef_of_concurrence};
use crate::linalg::{ComplexMatrix, Subsystem};
use crate::quantum::{entropy_of_matrix, DensityMatrix};

use super::simplex;
use super::{
    normalize_factor, random_factor, ConstraintSet, Diagnostics, InferenceError, InferenceResult,
    Method, MinentDiagnostics, RESTARTS,
};

/// Penalty weight schedule: 1e2 up to 1e8, 10x per stage.
const PENALTY_STAGES: usize = 7;

/// Constraint residual above which stage 1's best point means infeasibility.
const GENERAL_INFEASIBLE: f64 = 1e-6;

/// Concurrence below this counts as "separable reachable".
const SEPARABLE_FLOOR: f64 = 1e-6;

/// Per-stage simplex evaluation budget.
const STAGE_EVALS: usize = 1200;

const DIM: usize = 4;
const NPARAMS: usize = 32;

/// Objective of one penalty stage: (state, stage weight) -> value.
type StageObjective = Box<dyn Fn(&ComplexMatrix, f64) -> f64>;

fn decode(x: &[f64]) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            let k = 2 * (i * DIM + j);
            t.set(i, j, crate::linalg::Complex::new(x[k], x[k + 1]));
        }
    }
    t
}

fn encode(t: &ComplexMatrix) -> Vec<f64> {
    let mut x = vec![0.0; NPARAMS];
    for i in 0..DIM {
        for j in 0..DIM {
            let k = 2 * (i * DIM + j);
            let v = t.get(i, j);
            x[k] = v.re;
            x[k + 1] = v.im;
        }
    }
    x
}

fn residual_sq(ops: &[ComplexMatrix], means: &[f64], state: &ComplexMatrix) -> f64 {
    ops.iter()
        .zip(means)
        .map(|(op, &a)| {
            let r = state.matmul(op).trace().re - a;
            r * r
        })
        .sum()
}

fn max_residual(ops: &[ComplexMatrix], means: &[f64], state: &ComplexMatrix) -> f64 {
    ops.iter()
        .zip(means)
        .map(|(op, &a)| (state.matmul(op).trace().re - a).abs())
        .fold(0.0, f64::max)
}

fn min_pt_eigenvalue(state: &ComplexMatrix) -> f64 {
    let pt = state
        .partial_transpose(Subsystem::Second)
        .expect("two-qubit state");
    *pt.eigh()
        .expect("PT stays Hermitian")
        .values
        .last()
        .unwrap()
}

/// Run the staged penalty schedule from one starting point; the objective
/// receives the stage weight so its own penalty terms can follow the
/// continuation. Returns the best parameters, the penalized value at full
/// weight, and the final spread.
fn staged_descent(
    bare: &dyn Fn(&ComplexMatrix, f64) -> f64,
    ops: &[ComplexMatrix],
    means: &[f64],
    x0: Vec<f64>,
    evals_per_stage: usize,
) -> (Vec<f64>, f64, f64) {
    let full_weight = 1e2 * 10f64.powi((PENALTY_STAGES - 1) as i32);
    let mut x = x0;
    let mut scale = 0.7;
    let mut spread = f64::INFINITY;
    let mut value = f64::INFINITY;
    for stage in 0..PENALTY_STAGES {
        let w = 1e2 * 10f64.powi(stage as i32);
        let mut f = |p: &[f64]| -> f64 {
            let state = normalize_factor(&decode(p));
            bare(&state, w) + w * residual_sq(ops, means, &state)
        };
        let r = simplex::minimize(&mut f, &x, scale, 1e-14, evals_per_stage);
        x = r.x;
        spread = r.spread;
        value = r.value;
        scale *= 0.6;
    }
    // Polish at full weight: fresh simplexes at the incumbent with shrinking
    // (then once re-expanded) scales climb out of the degenerate-simplex
    // stalls NM is prone to in 32 dimensions.
    for scale in [3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 1e-3, 1e-4] {
        let mut f = |p: &[f64]| -> f64 {
            let state = normalize_factor(&decode(p));
            bare(&state, full_weight) + full_weight * residual_sq(ops, means, &state)
        };
        let r = simplex::minimize(&mut f, &x, scale, 1e-16, evals_per_stage * 3);
        x = r.x;
        spread = r.spread;
        value = r.value;
    }
    (x, spread, value)
}

pub(crate) fn minent_general(
    c: &ConstraintSet,
    seed: u64,
) -> Result<InferenceResult, InferenceError> {
    assert_eq!(c.dim(), 4, "general path works on two-qubit states");
    let ops = c.operators();
    let means = c.means();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Stage 1: minimize concurrence subject to the constraints.
    let bare_c = |state: &ComplexMatrix, _w: f64| concurrence_of(state);
    let mut best: Option<(f64, f64, Vec<f64>)> = None; // (c, residual, x)
    for restart in 0..RESTARTS {
        let x0 = if restart == 0 {
            encode(&ComplexMatrix::identity(DIM))
        } else {
            encode(&random_factor(&mut rng, DIM))
        };
        let (x, _, _) = staged_descent(&bare_c, &ops, &means, x0, STAGE_EVALS);
        let state = normalize_factor(&decode(&x));
        let res = max_residual(&ops, &means, &state);
        let cval = concurrence_of(&state);
        let better = match &best {
            None => true,
            Some((bc, bres, _)) => {
                if res <= 1e-7 && *bres <= 1e-7 {
                    cval < *bc
                } else {
                    res < *bres
                }
            }
        };
        if better {
            best = Some((cval, res, x));
        }
    }
    let (c_min, stage1_res, stage1_x) = best.expect("restarts ran");
    if stage1_res > GENERAL_INFEASIBLE {
        return Err(InferenceError::Infeasible);
    }

    // Stage 2: maximize entropy over the minimizers.
    let best_effort_slice = c_min > SEPARABLE_FLOOR;
    let slice_cap = c_min + SEPARABLE_FLOOR;
    let bare_s: StageObjective = if best_effort_slice {
        Box::new(move |state: &ComplexMatrix, w: f64| {
            let over = (concurrence_of(state) - slice_cap).max(0.0);
            -entropy_of_matrix(state) + w * over * over
        })
    } else {
        Box::new(|state: &ComplexMatrix, w: f64| {
            let neg = (-min_pt_eigenvalue(state)).max(0.0);
            -entropy_of_matrix(state) + w * neg * neg
        })
    };

    let mut best2: Option<(f64, Vec<f64>, f64)> = None; // (objective, x, spread)
    let mut starts = vec![stage1_x.clone()];
    for _ in 0..15 {
        starts.push(encode(&random_factor(&mut rng, DIM)));
    }
    for x0 in starts {
        let (x, spread, value) = staged_descent(bare_s.as_ref(), &ops, &means, x0, STAGE_EVALS);
        let state = normalize_factor(&decode(&x));
        if max_residual(&ops, &means, &state) > GENERAL_INFEASIBLE {
            continue;
        }
        if best2.as_ref().is_none_or(|(b, _, _)| value < *b) {
            best2 = Some((value, x, spread));
        }
    }
    let (_, x2, mut spread) = best2.ok_or(InferenceError::NoConvergence {
        what: "general-path entropy maximization",
        residual: f64::NAN,
        iterations: RESTARTS,
    })?;

    // Refine the winner: the active penalty walls make a narrow curved
    // valley that stalls the simplex, so alternate exact re-centering onto
    // the constraint manifold with small fresh simplexes along its floor.
    let full_weight = 1e2 * 10f64.powi((PENALTY_STAGES - 1) as i32);
    let full_objective = |state: &ComplexMatrix| -> f64 {
        bare_s(state, full_weight) + full_weight * residual_sq(&ops, &means, state)
    };
    let mut x2 = x2;
    for scale in [1e-3, 3e-4, 1e-4, 1e-4] {
        let recentered = super::polish_feasibility(&ops, &means, decode(&x2));
        x2 = encode(&recentered);
        let mut f = |p: &[f64]| -> f64 { full_objective(&normalize_factor(&decode(p))) };
        let r = simplex::minimize(&mut f, &x2, scale, 1e-16, STAGE_EVALS * 4);
        x2 = r.x;
        spread = r.spread;

        // Decoherence proposal: Bell coherences move the objective only at
        // second order, leaving a flat valley the simplex crawls through.
        // Killing them outright is accepted whenever the penalized
        // objective does not get worse.
        let state = normalize_factor(&decode(&x2));
        let pinched = crate::entanglement::pinch_bell_matrix(&state);
        if full_objective(&pinched) <= full_objective(&state) {
            let eig = pinched.eigh().expect("pinched state is Hermitian");
            let roots: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
            x2 = encode(&eig.reconstruct_with(&roots));
        }
    }

    // Final exact feasibility polish: pull the constraint residuals down to
    // the match tolerance along the smooth residual landscape. This moves
    // the state by about the residual itself, far below the path's accuracy.
    let t2 = decode(&x2);
    let polished = super::polish_feasibility(&ops, &means, t2);
    let state = DensityMatrix::new(normalize_factor(&polished))?;

    let e_min = ef_of_concurrence(c_min.clamp(0.0, 1.0));
    let summary = entanglement::summarize(&state);
    Ok(InferenceResult {
        state,
        method: Method::Minent,
        diagnostics: Diagnostics::Minent(MinentDiagnostics {
            bell_reduced: false,
            e_min,
            stage2_kkt_residual: spread,
            oracle_gap: None,
            best_effort_slice,
        }),
        summary,
    })
}
