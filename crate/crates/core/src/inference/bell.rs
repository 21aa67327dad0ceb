//! The Bell-simplex path of the minimum-entanglement solver.
//!
//! A constraint set is a *Bell constraint set* when any state satisfying it
//! still satisfies it after a non-selective Bell measurement. For such data
//! the representative minimum-entanglement state is diagonal in the Bell
//! basis, so both optimization stages collapse to four probabilities:
//! stage 1 minimizes the largest weight by an exact vertex-enumeration LP,
//! stage 2 maximizes Shannon entropy under the reduced linear constraints
//! and the resulting box bound by projected gradient ascent.

use crate::entanglement::{self, ef_from_fraction};
use crate::quantum::{BellBasis, BellProbs, BellState, DensityMatrix};

use super::smallreal;
use super::{
    ConstraintSet, Diagnostics, InferenceError, InferenceResult, Method, MinentDiagnostics,
};

/// Residual tolerances of the Bell-invariance test.
const PINCH_FIT_TOL: f64 = 1e-9;

/// Stage-2 KKT fixed-point tolerance.
const KKT_TOL: f64 = 1e-8;

/// Stage-2 iteration cap.
const MAX_PGA_ITERS: usize = 100_000;

/// The reduced linear system over Bell probabilities: one row per
/// constraint, sum(p) = 1 implied.
#[derive(Debug, Clone)]
pub struct BellReducedSystem {
    /// Row i holds <psi_k| A_i |psi_k> for k in Bell order.
    pub rows: Vec<[f64; 4]>,
    pub rhs: Vec<f64>,
}

/// Test whether the constraints are invariant under Bell measurement, via a
/// sufficient spectral condition: every pinched observable must lie in the
/// span of {A_j, I} with coefficients that reproduce the target mean.
pub fn is_bell_constraint_set(c: &ConstraintSet) -> bool {
    if c.dim() != 4 {
        return false;
    }
    let basis = BellBasis::get();
    let ops = c.operators();
    let means = c.means();
    let p = ops.len();

    for (op, &target) in ops.iter().zip(&means) {
        // Pinched observable D = sum_k P_k A P_k = sum_k <psi_k|A|psi_k> P_k.
        let diag = basis.diagonal(op);
        let mut pinched = crate::linalg::ComplexMatrix::zeros(4);
        for k in BellState::ALL {
            pinched = pinched.add(&basis.projector(k).scale_re(diag[k.index()]));
        }

        // Least-squares fit D = sum_j c_j A_j + d I over the HS inner
        // product; unknowns (c_1..c_p, d).
        let mut gram = vec![0.0; (p + 1) * (p + 1)];
        let mut rhs = vec![0.0; p + 1];
        let identity = crate::linalg::ComplexMatrix::identity(4);
        let basis_ops: Vec<&crate::linalg::ComplexMatrix> =
            ops.iter().chain(std::iter::once(&identity)).collect();
        for i in 0..=p {
            rhs[i] = basis_ops[i].matmul(&pinched).trace().re;
            for j in 0..=p {
                gram[i * (p + 1) + j] = basis_ops[i].matmul(basis_ops[j]).trace().re;
            }
        }
        let coef = match smallreal::cholesky_solve(p + 1, &gram, &rhs) {
            Some(c) => c,
            None => return false,
        };

        let mut fit = identity.scale_re(coef[p]);
        for (j, op_j) in ops.iter().enumerate() {
            fit = fit.add(&op_j.scale_re(coef[j]));
        }
        if pinched.max_abs_diff(&fit) > PINCH_FIT_TOL {
            return false;
        }
        let implied: f64 = coef[..p]
            .iter()
            .zip(&means)
            .map(|(c, a)| c * a)
            .sum::<f64>()
            + coef[p];
        if (implied - target).abs() > PINCH_FIT_TOL {
            return false;
        }
    }
    true
}

/// Reduce Bell constraints to the linear system sum_k v_ik p_k = a_i over
/// the four Bell weights.
pub fn bell_reduce(c: &ConstraintSet) -> Result<BellReducedSystem, InferenceError> {
    if !is_bell_constraint_set(c) {
        return Err(InferenceError::NotBellConstraints);
    }
    let basis = BellBasis::get();
    let rows: Vec<[f64; 4]> = c.operators().iter().map(|op| basis.diagonal(op)).collect();
    Ok(BellReducedSystem {
        rows,
        rhs: c.means(),
    })
}

/// Orthonormalized affine description of {p : rows.p = rhs, sum p = 1}.
/// Dependent rows are dropped; inconsistent ones signal infeasibility.
struct AffineSet {
    rows: Vec<[f64; 4]>,
    rhs: Vec<f64>,
}

impl AffineSet {
    fn build(sys: &BellReducedSystem) -> Result<Self, InferenceError> {
        let mut rows: Vec<[f64; 4]> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        let mut candidates: Vec<([f64; 4], f64)> = vec![([1.0; 4], 1.0)];
        candidates.extend(sys.rows.iter().cloned().zip(sys.rhs.iter().cloned()));

        for (mut row, mut r) in candidates {
            for (q, qr) in rows.iter().zip(&rhs) {
                let dot: f64 = row.iter().zip(q).map(|(a, b)| a * b).sum();
                for (v, qv) in row.iter_mut().zip(q) {
                    *v -= dot * qv;
                }
                r -= dot * qr;
            }
            let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-10 {
                if r.abs() > 1e-9 {
                    return Err(InferenceError::Infeasible); // 0 = nonzero
                }
                continue;
            }
            for v in &mut row {
                *v /= norm;
            }
            rows.push(row);
            rhs.push(r / norm);
        }
        Ok(Self { rows, rhs })
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    /// Orthogonal projection onto the affine set.
    fn project(&self, p: &mut [f64; 4]) {
        for (row, &r) in self.rows.iter().zip(&self.rhs) {
            let dot: f64 = p.iter().zip(row).map(|(a, b)| a * b).sum();
            for (v, rv) in p.iter_mut().zip(row) {
                *v -= (dot - r) * rv;
            }
        }
    }

    fn violation(&self, p: &[f64; 4]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &r)| (p.iter().zip(row).map(|(a, b)| a * b).sum::<f64>() - r).abs())
            .fold(0.0, f64::max)
    }
}

/// Stage 1: exact LP min t s.t. p in the affine set, 0 <= p_i <= t, by
/// enumerating vertices of the lifted polytope in (p, t).
///
/// Every vertex activates 5 constraints: the m affine equalities plus
/// (5 - m) of the 8 bounds {p_i >= 0, t - p_i >= 0}.
fn stage1_min_max_weight(affine: &AffineSet) -> Result<(f64, [f64; 4]), InferenceError> {
    let m = affine.len();
    if m > 5 {
        return Err(InferenceError::Infeasible);
    }
    let need = 5 - m;
    let mut best: Option<(f64, [f64; 4])> = None;

    let mut subset: Vec<usize> = (0..need).collect();
    loop {
        // Assemble the 5x5 system: affine rows (z = (p, t)), then the active
        // bounds as equalities.
        let mut a = vec![0.0; 5 * 5];
        let mut b = vec![0.0; 5];
        for (i, (row, &r)) in affine.rows.iter().zip(&affine.rhs).enumerate() {
            a[i * 5..i * 5 + 4].copy_from_slice(row);
            b[i] = r;
        }
        for (extra, &bound) in subset.iter().enumerate() {
            let i = m + extra;
            if bound < 4 {
                a[i * 5 + bound] = 1.0; // p_bound = 0
            } else {
                a[i * 5 + (bound - 4)] = -1.0; // t - p_{bound-4} = 0
                a[i * 5 + 4] = 1.0;
            }
        }
        if let Some(z) = smallreal::solve(5, &a, &b) {
            let p = [z[0], z[1], z[2], z[3]];
            let t = z[4];
            let feasible = p.iter().all(|&v| v >= -1e-9 && t - v >= -1e-9);
            if feasible && best.as_ref().is_none_or(|(bt, _)| t < *bt) {
                best = Some((t, p));
            }
        }

        // Next lexicographic subset of size `need` from 0..8.
        if need == 0 {
            break;
        }
        let mut i = need;
        loop {
            if i == 0 {
                subset.clear();
                break;
            }
            i -= 1;
            if subset[i] < 8 - (need - i) {
                subset[i] += 1;
                for j in i + 1..need {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
        if subset.is_empty() {
            break;
        }
    }

    let (t, p) = best.ok_or(InferenceError::Infeasible)?;
    // Clean round-off: clamp into the box the LP certified.
    let p = p.map(|v| v.max(0.0).min(t.max(0.25)));
    Ok((t, p))
}

/// Exact projection onto {affine} intersect {0 <= p <= cap} by Dykstra's
/// corrected alternating projections (both sets are closed convex and the
/// affine projection is exact, so the iteration converges to the true
/// projection).
fn project_feasible(affine: &AffineSet, cap: f64, start: [f64; 4]) -> [f64; 4] {
    let mut x = start;
    let mut inc_a = [0.0; 4];
    let mut inc_b = [0.0; 4];
    for _ in 0..50_000 {
        let mut y = x;
        for (v, i) in y.iter_mut().zip(&inc_a) {
            *v += i;
        }
        let before = y;
        affine.project(&mut y);
        for k in 0..4 {
            inc_a[k] = before[k] - y[k];
        }

        let mut z = y;
        for (v, i) in z.iter_mut().zip(&inc_b) {
            *v += i;
        }
        let before_box = z;
        for v in &mut z {
            *v = v.clamp(0.0, cap);
        }
        for k in 0..4 {
            inc_b[k] = before_box[k] - z[k];
        }

        let moved = x
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = z;
        if moved < 1e-16 && affine.violation(&x) < 1e-13 {
            break;
        }
    }
    x
}

/// Stage 2: maximize Shannon entropy over the affine set intersected with
/// the box [0, cap]^4, by projected gradient ascent with an Armijo
/// sufficient-increase rule. Returns the optimum, the KKT fixed-point
/// residual and the iteration count.
fn stage2_max_entropy(
    affine: &AffineSet,
    cap: f64,
) -> Result<([f64; 4], f64, usize), InferenceError> {
    let entropy = |p: &[f64; 4]| -> f64 {
        p.iter()
            .map(|&v| if v > 1e-16 { -v * v.ln() } else { 0.0 })
            .sum()
    };
    // Entries pinned at zero by the constraints would have unbounded
    // gradient; the clip leaves every fixed point in place.
    let grad = |p: &[f64; 4]| -> [f64; 4] {
        let mut g = [0.0; 4];
        for (gi, &v) in g.iter_mut().zip(p.iter()) {
            *gi = (-v.max(1e-16).ln() - 1.0).clamp(-30.0, 30.0);
        }
        g
    };
    // Fixed-point residual at probe scale s: ||p - P(p + s grad)|| / s is
    // zero exactly at the constrained optimum and approximates the projected
    // gradient norm elsewhere. A small probe keeps the projection local.
    let probe_scale = 1e-2;
    let kkt_of = |p: &[f64; 4], g: &[f64; 4]| -> f64 {
        let mut probe = *p;
        for (v, gi) in probe.iter_mut().zip(g) {
            *v += probe_scale * gi;
        }
        let fixed = project_feasible(affine, cap, probe);
        p.iter()
            .zip(&fixed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / probe_scale
    };

    let mut p = project_feasible(affine, cap, [0.25; 4]);
    let mut kkt = f64::INFINITY;
    for iter in 0..MAX_PGA_ITERS {
        let g = grad(&p);
        kkt = kkt_of(&p, &g);
        if kkt <= KKT_TOL {
            return Ok((p, kkt, iter));
        }

        let h0 = entropy(&p);
        let mut step = 0.25;
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand = p;
            for (v, gi) in cand.iter_mut().zip(&g) {
                *v += step * gi;
            }
            let cand = project_feasible(affine, cap, cand);
            let gain = entropy(&cand) - h0;
            let along: f64 = g
                .iter()
                .zip(cand.iter().zip(&p))
                .map(|(gi, (c, pi))| gi * (c - pi))
                .sum();
            if gain >= 1e-4 * along && along > 0.0 {
                p = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No feasible ascent left at any step size; re-test optimality.
            let g = grad(&p);
            kkt = kkt_of(&p, &g);
            break;
        }
    }
    if kkt <= KKT_TOL {
        return Ok((p, kkt, MAX_PGA_ITERS));
    }
    Err(InferenceError::NoConvergence {
        what: "Bell-simplex entropy maximization",
        residual: kkt,
        iterations: MAX_PGA_ITERS,
    })
}

/// Minimum-entanglement inference along the Bell-reduced path.
pub(crate) fn minent_bell(c: &ConstraintSet) -> Result<InferenceResult, InferenceError> {
    let sys = bell_reduce(c)?;
    let affine = AffineSet::build(&sys)?;
    let (t_star, _vertex) = stage1_min_max_weight(&affine)?;

    // Below largest weight 1/2 every Bell-diagonal state is separable, so
    // the minimizer set widens to the whole box at 1/2.
    let u = t_star.max(0.5);
    // Tiny inflation keeps the box-affine intersection nonempty under the
    // LP's round-off.
    let (p, kkt, _iterations) = stage2_max_entropy(&affine, u + 1e-12)?;

    let mut probs = p;
    let sum: f64 = probs.iter().sum();
    for v in &mut probs {
        *v /= sum;
    }
    let state = DensityMatrix::from_bell_probs(&BellProbs::new(probs.map(|v| v.max(0.0)))?);
    let e_min = ef_from_fraction(t_star.max(0.5).clamp(0.0, 1.0))?;
    let summary = entanglement::summarize(&state);
    Ok(InferenceResult {
        state,
        method: Method::Minent,
        diagnostics: Diagnostics::Minent(MinentDiagnostics {
            bell_reduced: true,
            e_min,
            stage2_kkt_residual: kkt,
            oracle_gap: None,
            best_effort_slice: false,
        }),
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::super::minent_solve;
    use super::super::tests::{chsh_observable, singlet_projector_observable};
    use super::*;
    use crate::linalg::kron;
    use crate::quantum::{pauli, trace_distance, Observable};

    fn chsh_set(b: f64) -> ConstraintSet {
        ConstraintSet::new(vec![(chsh_observable(), b)]).unwrap()
    }

    pub(crate) fn local_set(b: f64) -> ConstraintSet {
        let sqrt2 = 2.0_f64.sqrt();
        let mk = |m, label: &str| Observable::new(m, label).unwrap();
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
        .unwrap()
    }

    #[test]
    fn chsh_is_bell_invariant() {
        assert!(is_bell_constraint_set(&chsh_set(1.3)));
    }

    #[test]
    fn local_six_observable_set_is_bell_invariant() {
        assert!(is_bell_constraint_set(&local_set(1.3)));
    }

    #[test]
    fn lone_marginal_is_not_bell_invariant() {
        let xi = Observable::new(kron(&pauli::x(), &pauli::i()).unwrap(), "XI").unwrap();
        let c = ConstraintSet::new(vec![(xi, 0.5)]).unwrap();
        assert!(!is_bell_constraint_set(&c));
        assert!(matches!(
            bell_reduce(&c),
            Err(InferenceError::NotBellConstraints)
        ));
        // Zero mean is preserved by pinching, so that one is Bell-invariant.
        let xi = Observable::new(kron(&pauli::x(), &pauli::i()).unwrap(), "XI").unwrap();
        let c0 = ConstraintSet::new(vec![(xi, 0.0)]).unwrap();
        assert!(is_bell_constraint_set(&c0));
    }

    #[test]
    fn bell_reduce_chsh_row() {
        let sys = bell_reduce(&chsh_set(1.3)).unwrap();
        let s = 2.0 * 2.0_f64.sqrt();
        let want = [-s, 0.0, s, 0.0];
        for (got, want) in sys.rows[0].iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(sys.rhs, vec![1.3]);
    }

    #[test]
    fn bell_reduce_singlet_row() {
        let c = ConstraintSet::new(vec![(singlet_projector_observable(), 0.6)]).unwrap();
        let sys = bell_reduce(&c).unwrap();
        let want = [1.0, 0.0, 0.0, 0.0];
        for (got, want) in sys.rows[0].iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_reduce_local_rows() {
        let sys = bell_reduce(&local_set(1.2)).unwrap();
        let s = 2.0_f64.sqrt();
        // sqrt2 XX is diagonal (-s, -s, s, s); sqrt2 ZZ is (-s, s, s, -s);
        // marginals vanish on every Bell state.
        let want0 = [-s, -s, s, s];
        let want1 = [-s, s, s, -s];
        for (got, want) in sys.rows[0].iter().zip(want0) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in sys.rows[1].iter().zip(want1) {
            assert!((got - want).abs() < 1e-12);
        }
        for row in &sys.rows[2..] {
            for v in row {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stage1_known_optima() {
        // For the CHSH row the minimal largest weight is
        // max((1 + beta)/4, beta) with beta = b/(2 sqrt2).
        for b in [0.4, 0.9, 1.3, 1.7, 2.3, 2.7] {
            let affine = AffineSet::build(&bell_reduce(&chsh_set(b)).unwrap()).unwrap();
            let (t, p) = stage1_min_max_weight(&affine).unwrap();
            let beta = b / (2.0 * 2.0_f64.sqrt());
            let want = ((1.0 + beta) / 4.0).max(beta);
            assert!((t - want).abs() < 1e-10, "b = {b}: t = {t}, want {want}");
            assert!(affine.violation(&p) < 1e-9);
        }
    }

    #[test]
    fn stage1_detects_infeasible_mean() {
        let affine = AffineSet::build(&bell_reduce(&chsh_set(3.0)).unwrap()).unwrap();
        assert!(matches!(
            stage1_min_max_weight(&affine),
            Err(InferenceError::Infeasible)
        ));
    }

    #[test]
    fn minent_chsh_above_threshold() {
        // At b = 2: weights (0, q, beta, q) with beta = b/(2 sqrt2) on Phi+
        // and q = (1 - beta)/2 on each of Phi-, Psi+.
        let r = minent_solve(&chsh_set(2.0)).unwrap();
        let o = r.state.bell_overlaps();
        let beta = 2.0 / (2.0 * 2.0_f64.sqrt());
        let q = (1.0 - beta) / 2.0;
        assert!(o[0].abs() < 1e-8);
        assert!((o[1] - q).abs() < 1e-8);
        assert!((o[2] - beta).abs() < 1e-8);
        assert!((o[3] - q).abs() < 1e-8);
        assert!(!r.summary.separable);
    }

    #[test]
    fn minent_chsh_in_disagreement_window() {
        // At b = 1.3 the box at 1/2 is active: weights
        // (1/2 - beta, rem, 1/2, rem).
        let r = minent_solve(&chsh_set(1.3)).unwrap();
        let o = r.state.bell_overlaps();
        let beta = 1.3 / (2.0 * 2.0_f64.sqrt());
        let rem = (0.5 - (0.5 - beta)) / 2.0;
        assert!((o[0] - (0.5 - beta)).abs() < 1e-8);
        assert!((o[1] - rem).abs() < 1e-8);
        assert!((o[2] - 0.5).abs() < 1e-8);
        assert!((o[3] - rem).abs() < 1e-8);
        assert!(r.summary.separable);
        let d = r.diagnostics.as_minent().unwrap();
        assert!(d.bell_reduced);
        assert!(d.e_min.abs() < 1e-12);
        assert!(d.stage2_kkt_residual <= 1e-8);
    }

    #[test]
    fn minent_chsh_at_boundary_mean() {
        let b = 2.0 * 2.0_f64.sqrt();
        let r = minent_solve(&chsh_set(b)).unwrap();
        let o = r.state.bell_overlaps();
        assert!((o[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn minent_matches_jaynes_below_window() {
        // For b below the disagreement window the box never binds and both
        // schemes give the same exponential-family state.
        let b = 1.0;
        let minent = minent_solve(&chsh_set(b)).unwrap();
        let jaynes = super::super::jaynes_solve(&chsh_set(b)).unwrap();
        assert!(trace_distance(&minent.state, &jaynes.state) < 1e-7);
    }

    #[test]
    fn minent_singlet_is_werner() {
        for f in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let c = ConstraintSet::new(vec![(singlet_projector_observable(), f)]).unwrap();
            let r = minent_solve(&c).unwrap();
            let rest = (1.0 - f) / 3.0;
            let want =
                DensityMatrix::from_bell_probs(&BellProbs::new([f, rest, rest, rest]).unwrap());
            assert!(trace_distance(&r.state, &want) < 1e-8, "F = {f}");
        }
    }

    #[test]
    fn minent_output_is_bell_diagonal_and_deterministic() {
        let a = minent_solve(&chsh_set(1.9)).unwrap();
        let b = minent_solve(&chsh_set(1.9)).unwrap();
        assert!(a.state.is_bell_diagonal(1e-9));
        assert!(trace_distance(&a.state, &b.state) < 1e-12);
    }

    #[test]
    fn pinching_preserves_bell_constraints() {
        // Defining property: any feasible state stays feasible under the
        // Bell measurement channel.
        use crate::entanglement::pinch_bell;
        for (c, seeds) in [(local_set(1.1), [3, 17, 40]), (chsh_set(1.9), [5, 23, 51])] {
            for seed in seeds {
                let feasible = super::super::check_feasible(&c, seed).witness.unwrap();
                let pinched = pinch_bell(&feasible);
                assert!(c.max_residual(&pinched) <= 1e-8 + c.max_residual(&feasible));
            }
        }
    }
}
