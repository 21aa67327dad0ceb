//! Maximum-entropy inference: fit the multipliers of the Gibbs-form state
//! exp(-sum_i lambda_i A_i)/Z by damped Newton descent on the smooth convex
//! dual ln Z(lambda) + lambda . a.

use crate::entanglement;
use crate::linalg::ComplexMatrix;
use crate::quantum::DensityMatrix;

use super::smallreal;
use super::{
    ConstraintSet, Diagnostics, InferenceError, InferenceResult, JaynesDiagnostics, Method,
};

/// Multiplier magnitude beyond which the means are treated as sitting on the
/// boundary of the achievable set (no finite-multiplier representation).
const LAMBDA_CAP: f64 = 1e6;

/// Newton iteration cap.
const MAX_ITERS: usize = 500;

/// Residual allowed for states assembled on a boundary face.
const FACE_RESIDUAL_TOL: f64 = 1e-8;

/// Spectral window for grouping eigenvalues into the limiting face.
const FACE_EIG_TOL: f64 = 1e-8;

pub(crate) struct DualSolution {
    pub state: ComplexMatrix,
    pub lambda: Vec<f64>,
    pub log_z: f64,
    pub iterations: usize,
    pub residual: f64,
    pub boundary: bool,
}

/// Maximum-entropy estimate for the given data.
///
/// Means interior to the achievable set give the exponential-family state
/// with every residual below the match tolerance. Means on the boundary have
/// no finite-multiplier representation; the solver detects the divergence,
/// restricts the problem to the spectral face the iterates concentrate on,
/// and returns the limit state with `boundary` set in the diagnostics.
pub fn jaynes_solve(c: &ConstraintSet) -> Result<InferenceResult, InferenceError> {
    let sol = solve_dual(&c.operators(), &c.means(), c.dim(), c.match_tolerance(), 0)?;
    let state = DensityMatrix::new(sol.state)?;
    let summary = entanglement::summarize(&state);
    Ok(InferenceResult {
        state,
        method: Method::Jaynes,
        diagnostics: Diagnostics::Jaynes(JaynesDiagnostics {
            lambda: sol.lambda,
            log_z: sol.log_z,
            iterations: sol.iterations,
            residual: sol.residual,
            boundary: sol.boundary,
        }),
        summary,
    })
}

/// Gibbs state exp(-H)/Z for H = sum_i lambda_i A_i, evaluated through the
/// spectrum with the max eigenvalue shifted out so large multipliers cannot
/// overflow. Returns (state, ln Z).
fn gibbs_state(ops: &[ComplexMatrix], lambda: &[f64], dim: usize) -> (ComplexMatrix, f64) {
    let mut h = ComplexMatrix::zeros(dim);
    for (op, &l) in ops.iter().zip(lambda) {
        if l != 0.0 {
            h = h.add(&op.scale_re(l));
        }
    }
    let eig = h.eigh().expect("combination of Hermitian observables");
    let min = *eig.values.last().unwrap();
    let weights: Vec<f64> = eig.values.iter().map(|&v| (-(v - min)).exp()).collect();
    let z_shifted: f64 = weights.iter().sum();
    let normalized: Vec<f64> = weights.iter().map(|w| w / z_shifted).collect();
    (eig.reconstruct_with(&normalized), -min + z_shifted.ln())
}

pub(crate) fn solve_dual(
    ops: &[ComplexMatrix],
    means: &[f64],
    dim: usize,
    tol: f64,
    depth: usize,
) -> Result<DualSolution, InferenceError> {
    if depth > 3 {
        return Err(InferenceError::NoConvergence {
            what: "boundary face reduction",
            residual: f64::NAN,
            iterations: depth,
        });
    }
    let p = ops.len();
    let mut lambda = vec![0.0; p];
    let (mut state, mut log_z) = gibbs_state(ops, &lambda, dim);
    let mut dual_value = log_z; // lambda . a = 0 at the start

    // Plain-descent step length, grown geometrically while full steps keep
    // being accepted; without it the fallback crawls when the covariance
    // degenerates (means at or beyond the boundary).
    let mut fallback_step = 1.0_f64;

    let mut residual = f64::INFINITY;
    for iter in 0..MAX_ITERS {
        let expect: Vec<f64> = ops.iter().map(|op| state.matmul(op).trace().re).collect();
        let grad: Vec<f64> = means.iter().zip(&expect).map(|(a, e)| a - e).collect();
        residual = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if residual <= tol {
            return Ok(DualSolution {
                state,
                lambda,
                log_z,
                iterations: iter,
                residual,
                boundary: false,
            });
        }
        if lambda.iter().map(|l| l.abs()).fold(0.0, f64::max) > LAMBDA_CAP {
            return boundary_face(ops, means, &lambda, dim, tol, depth, iter);
        }

        // Symmetrized covariance as the Hessian model:
        //   H_ij = Re Tr(rho A_i A_j) - <A_i><A_j>.
        // (The exact Hessian of ln Z involves the Kubo-Mori metric; this
        // approximation shares its fixed point.)
        let rho_ops: Vec<ComplexMatrix> = ops.iter().map(|op| state.matmul(op)).collect();
        let mut hess = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let v = rho_ops[i].matmul(&ops[j]).trace().re - expect[i] * expect[j];
                hess[i * p + j] = v;
                hess[j * p + i] = v;
            }
        }
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let (delta, newton) = match smallreal::cholesky_solve(p, &hess, &neg_grad) {
            Some(d) => (d, true),
            None => (neg_grad.clone(), false), // covariance lost PD: plain descent
        };

        // Backtracking line search on the dual. The floor term keeps the
        // acceptance test meaningful once the true decrease drops below
        // what f64 can resolve in the dual value.
        let slope: f64 = grad.iter().zip(&delta).map(|(g, d)| g * d).sum();
        let noise_floor = 4.0 * f64::EPSILON * (1.0 + dual_value.abs());
        let mut step = if newton { 1.0 } else { fallback_step };
        let full_step = step;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = lambda
                .iter()
                .zip(&delta)
                .map(|(l, d)| l + step * d)
                .collect();
            let (cand_state, cand_log_z) = gibbs_state(ops, &cand, dim);
            let cand_value = cand_log_z + cand.iter().zip(means).map(|(l, a)| l * a).sum::<f64>();
            if cand_value <= dual_value + 1e-4 * step * slope + noise_floor {
                lambda = cand;
                state = cand_state;
                log_z = cand_log_z;
                dual_value = cand_value;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            // The dual cannot decrease along the model direction anymore;
            // either we are at round-off accuracy or the means are on the
            // boundary and lambda must diverge.
            if residual <= 1e2 * tol.max(1e-12) {
                return Ok(DualSolution {
                    state,
                    lambda,
                    log_z,
                    iterations: iter,
                    residual,
                    boundary: false,
                });
            }
            return boundary_face(ops, means, &lambda, dim, tol, depth, iter);
        }
        if !newton {
            fallback_step = if step == full_step {
                (step * 4.0).min(1e18)
            } else {
                step.max(1.0)
            };
        }
    }
    if lambda.iter().map(|l| l.abs()).fold(0.0, f64::max) > 10.0 {
        // Iteration budget spent while the multipliers marched outward:
        // the means sit on or beyond the boundary of the achievable set.
        return boundary_face(ops, means, &lambda, dim, tol, depth, MAX_ITERS);
    }
    Err(InferenceError::NoConvergence {
        what: "Jaynes dual solver",
        residual,
        iterations: MAX_ITERS,
    })
}

/// Handle boundary means: the diverging multiplier direction d singles out
/// the spectral face (minimum eigenspace of sum_i d_i A_i) the Gibbs family
/// collapses onto. Solve the reduced problem there and embed back.
fn boundary_face(
    ops: &[ComplexMatrix],
    means: &[f64],
    lambda: &[f64],
    dim: usize,
    tol: f64,
    depth: usize,
    iterations: usize,
) -> Result<DualSolution, InferenceError> {
    let norm: f64 = lambda.iter().map(|l| l * l).sum::<f64>().sqrt();
    if norm < 1e-30 {
        return Err(InferenceError::BoundaryMeans);
    }
    let mut direction = ComplexMatrix::zeros(dim);
    for (op, &l) in ops.iter().zip(lambda) {
        direction = direction.add(&op.scale_re(l / norm));
    }
    let eig = direction.eigh().expect("Hermitian combination");
    let min = *eig.values.last().unwrap();
    let face: Vec<usize> = (0..dim)
        .filter(|&k| (eig.values[k] - min).abs() <= FACE_EIG_TOL)
        .collect();
    let k = face.len();
    if k == dim {
        return Err(InferenceError::NoConvergence {
            what: "boundary face detection",
            residual: f64::NAN,
            iterations,
        });
    }

    // W: dim x k isometry onto the face.
    let mut w = ComplexMatrix::zeros(dim); // use top-left dim x k block
    for (col, &src) in face.iter().enumerate() {
        for row in 0..dim {
            w.set(row, col, eig.vectors.get(row, src));
        }
    }
    let project = |m: &ComplexMatrix| -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                let mut acc = crate::linalg::Complex::new(0.0, 0.0);
                for r in 0..dim {
                    for s in 0..dim {
                        acc += w.get(r, i).conj() * m.get(r, s) * w.get(s, j);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    };

    let mut reduced_ops = Vec::new();
    let mut reduced_means = Vec::new();
    for (op, &a) in ops.iter().zip(means) {
        let b = project(op);
        let trace_part = b.trace().re / k as f64;
        let traceless = b.sub(&ComplexMatrix::identity(k).scale_re(trace_part));
        if traceless.max_abs() <= 1e-10 {
            // Constant on the face: the mean is forced.
            if (trace_part - a).abs() > FACE_RESIDUAL_TOL {
                return Err(InferenceError::Infeasible);
            }
        } else {
            reduced_ops.push(traceless);
            reduced_means.push(a - trace_part);
        }
    }

    let (face_state, face_log_z, face_iters) = if reduced_ops.is_empty() {
        (
            ComplexMatrix::identity(k).scale_re(1.0 / k as f64),
            (k as f64).ln(),
            0,
        )
    } else {
        let sol = solve_dual(&reduced_ops, &reduced_means, k, tol, depth + 1)?;
        (sol.state, sol.log_z, sol.iterations)
    };

    // Embed: rho = W rho_face W^dag.
    let mut state = ComplexMatrix::zeros(dim);
    for r in 0..dim {
        for s in 0..dim {
            let mut acc = crate::linalg::Complex::new(0.0, 0.0);
            for i in 0..k {
                for j in 0..k {
                    acc += w.get(r, i) * face_state.get(i, j) * w.get(s, j).conj();
                }
            }
            state.set(r, s, acc);
        }
    }

    let residual = ops
        .iter()
        .zip(means)
        .map(|(op, &a)| (state.matmul(op).trace().re - a).abs())
        .fold(0.0, f64::max);
    if residual > FACE_RESIDUAL_TOL {
        return Err(InferenceError::Infeasible);
    }
    Ok(DualSolution {
        state,
        lambda: lambda.to_vec(),
        log_z: face_log_z,
        iterations: iterations + face_iters,
        residual,
        boundary: true,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{chsh_observable, singlet_projector_observable};
    use super::*;
    use crate::quantum::{trace_distance, BellProbs, DensityMatrix};

    fn chsh_set(b: f64) -> ConstraintSet {
        ConstraintSet::new(vec![(chsh_observable(), b)]).unwrap()
    }

    #[test]
    fn zero_mean_gives_maximally_mixed() {
        let r = jaynes_solve(&chsh_set(0.0)).unwrap();
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!(trace_distance(&r.state, &mixed) < 1e-12);
        let d = r.diagnostics.as_jaynes().unwrap();
        assert!(!d.boundary);
        assert!(d.residual <= 1e-10);
    }

    #[test]
    fn chsh_sqrt2_weights() {
        // At b = sqrt2 the Gibbs weights are (1/16, 3/16, 9/16, 3/16) in
        // basis order (Psi-, Phi-, Phi+, Psi+).
        let r = jaynes_solve(&chsh_set(2.0_f64.sqrt())).unwrap();
        let want = DensityMatrix::from_bell_probs(
            &BellProbs::new([1.0 / 16.0, 3.0 / 16.0, 9.0 / 16.0, 3.0 / 16.0]).unwrap(),
        );
        assert!(trace_distance(&r.state, &want) < 1e-9);
    }

    #[test]
    fn chsh_closed_form_across_range() {
        // Gibbs weights 1/4 (1 +- b/sqrt2 + b^2/8) on Phi+/Psi- and
        // 1/4 (1 - b^2/8) on each of Phi-, Psi+, signed so Tr(rho B) = +b.
        let sqrt2 = 2.0_f64.sqrt();
        for k in 0..=26 {
            let b = 0.1 * k as f64;
            let r = jaynes_solve(&chsh_set(b)).unwrap();
            let o = r.state.bell_overlaps();
            let quad = b * b / 8.0;
            assert!((o[0] - 0.25 * (1.0 - b / sqrt2 + quad)).abs() < 1e-8);
            assert!((o[1] - 0.25 * (1.0 - quad)).abs() < 1e-8);
            assert!((o[2] - 0.25 * (1.0 + b / sqrt2 + quad)).abs() < 1e-8);
            assert!((o[3] - 0.25 * (1.0 - quad)).abs() < 1e-8);
            assert!(r.state.is_bell_diagonal(1e-9));
        }
    }

    #[test]
    fn singlet_quarter_gives_maximally_mixed() {
        let c = ConstraintSet::new(vec![(singlet_projector_observable(), 0.25)]).unwrap();
        let r = jaynes_solve(&c).unwrap();
        assert!(trace_distance(&r.state, &DensityMatrix::maximally_mixed(4)) < 1e-11);
    }

    #[test]
    fn singlet_constraint_gives_werner_state() {
        for f in [0.1, 0.4, 0.75, 0.95] {
            let c = ConstraintSet::new(vec![(singlet_projector_observable(), f)]).unwrap();
            let r = jaynes_solve(&c).unwrap();
            let rest = (1.0 - f) / 3.0;
            let want =
                DensityMatrix::from_bell_probs(&BellProbs::new([f, rest, rest, rest]).unwrap());
            assert!(trace_distance(&r.state, &want) < 1e-9, "F = {f}");
        }
    }

    #[test]
    fn dual_value_monotone_and_gradient_small() {
        // Accepted steps never increase the dual; the final gradient norm is
        // the reported residual.
        let r = jaynes_solve(&chsh_set(1.7)).unwrap();
        let d = r.diagnostics.as_jaynes().unwrap();
        assert!(d.residual <= 1e-10);
        assert!(d.iterations < 100);
    }

    #[test]
    fn boundary_mean_returns_limit_state() {
        // b exactly at the top of the range forces the pure Phi+ state. The
        // solver may reach it either with finite multipliers (residual still
        // within tolerance) or through the boundary-face path.
        let b = 2.0 * 2.0_f64.sqrt();
        let r = jaynes_solve(&chsh_set(b)).unwrap();
        let o = r.state.bell_overlaps();
        assert!((o[2] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_mean_is_rejected() {
        let err = jaynes_solve(&chsh_set(3.0)).unwrap_err();
        assert!(matches!(
            err,
            InferenceError::Infeasible | InferenceError::NoConvergence { .. }
        ));
    }

    #[test]
    fn six_constraint_local_set_converges() {
        use crate::linalg::kron;
        use crate::quantum::{pauli, Observable};
        let sqrt2 = 2.0_f64.sqrt();
        let b = 1.3;
        let mk = |m, label: &str| Observable::new(m, label).unwrap();
        let c = ConstraintSet::new(vec![
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
        .unwrap();
        let r = jaynes_solve(&c).unwrap();
        assert!(c.max_residual(&r.state) <= 1e-10);
        // Same state as the single-constraint CHSH problem.
        let chsh = jaynes_solve(&chsh_set(b)).unwrap();
        assert!(trace_distance(&r.state, &chsh.state) < 1e-8);
    }
}
