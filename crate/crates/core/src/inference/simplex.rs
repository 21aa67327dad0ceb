//! Derivative-free Nelder-Mead simplex descent, used by the general
//! (non-Bell-reduced) inference path where the objective involves a
//! concurrence term that is only piecewise smooth.

/// Outcome of a simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Spread max f - min f over the final simplex; the convergence residual.
    pub spread: f64,
}

/// Minimize `f` starting from `x0`, with an initial simplex of the given
/// edge scale. Stops when the simplex value spread drops below `ftol` or the
/// evaluation budget runs out.
pub fn minimize(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    ftol: f64,
    max_evals: usize,
) -> SimplexResult {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    // Vertices plus values, kept sorted ascending by value.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    while evals < max_evals {
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < ftol {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (x, _) in simplex.iter().take(n) {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }

        let worst = simplex[n].clone();
        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let fr = eval(&reflected, &mut evals);

        if fr < simplex[0].1 {
            // Try to expand further along the same direction.
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + gamma * (r - c))
                .collect();
            let fe = eval(&expanded, &mut evals);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + rho * (w - c))
                .collect();
            let fc = eval(&contracted, &mut evals);
            if fc < worst.1 {
                simplex[n] = (contracted, fc);
            } else {
                // Shrink everything toward the best vertex.
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&vertex.0)
                        .map(|(b, v)| b + sigma * (v - b))
                        .collect();
                    let fv = eval(&x, &mut evals);
                    *vertex = (x, fv);
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    }

    let spread = simplex[simplex.len() - 1].1 - simplex[0].1;
    let best = simplex.into_iter().next().unwrap();
    SimplexResult {
        x: best.0,
        value: best.1,
        spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let mut f = |x: &[f64]| x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>();
        let r = minimize(&mut f, &[0.0; 6], 0.5, 1e-14, 20_000);
        for v in &r.x {
            assert!((v - 1.0).abs() < 1e-5);
        }
        assert!(r.value < 1e-10);
    }

    #[test]
    fn minimizes_rosenbrock_2d() {
        let mut f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let r = minimize(&mut f, &[-1.2, 1.0], 0.5, 1e-16, 50_000);
        assert!((r.x[0] - 1.0).abs() < 1e-4);
        assert!((r.x[1] - 1.0).abs() < 1e-4);
    }
}
