//! Small derivative-free and gradient-based optimizers for the few-
//! parameter problems in this crate (unitary manifolds, MLE ascent,
//! coordinate calibration). Dimensions are tiny, so simplicity and
//! determinism win over sophistication.

/// Nelder–Mead simplex minimization.
///
/// Deterministic given the start point. Stops when the value spread over
/// the simplex falls below `tol` or after `max_iter` reflections.
pub fn nelder_mead<F>(f: F, x0: &[f64], scale: f64, tol: f64, max_iter: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    for _ in 0..max_iter {
        // Order simplex by value, best first.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = values[order[0]];
        let worst = values[order[n]];
        if (worst - best).abs() < tol {
            break;
        }
        let worst_idx = order[n];
        let second_worst = values[order[n - 1]];

        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for (c, xi) in centroid.iter_mut().zip(simplex[i].iter()) {
                *c += xi / n as f64;
            }
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(simplex[worst_idx].iter())
            .map(|(c, w)| c + (c - w))
            .collect();
        let fr = f(&reflect);

        if fr < best {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(simplex[worst_idx].iter())
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst_idx] = expand;
                values[worst_idx] = fe;
            } else {
                simplex[worst_idx] = reflect;
                values[worst_idx] = fr;
            }
        } else if fr < second_worst {
            simplex[worst_idx] = reflect;
            values[worst_idx] = fr;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(simplex[worst_idx].iter())
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect();
            let fc = f(&contract);
            if fc < values[worst_idx] {
                simplex[worst_idx] = contract;
                values[worst_idx] = fc;
            } else {
                // Shrink toward the best vertex.
                let best_point = simplex[order[0]].clone();
                for &i in order.iter().skip(1) {
                    for (xi, bi) in simplex[i].iter_mut().zip(best_point.iter()) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best_i = 0;
    for i in 1..=n {
        if values[i] < values[best_i] {
            best_i = i;
        }
    }
    (simplex[best_i].clone(), values[best_i])
}

/// Result of a gradient ascent run.
pub struct AscentResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes `f` by BFGS ascent with a backtracking Armijo line search.
/// `grad` writes the gradient of `f` into its output slice and returns
/// the value. Converges when the gradient norm drops below `grad_tol`.
///
/// The inverse-Hessian approximation is what makes the PSD-boundary
/// optima of the tomography likelihoods (rank-deficient states, where
/// plain gradient steps crawl) converge in a few hundred iterations.
pub fn bfgs_ascent<G>(mut grad: G, x0: Vec<f64>, grad_tol: f64, max_iter: usize) -> AscentResult
where
    G: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut value = grad(&x, &mut g);

    // Row-major inverse Hessian of -f, kept symmetric positive definite.
    let mut h: Vec<f64> = vec![0.0; n * n];
    let reset_h = |h: &mut Vec<f64>| {
        h.fill(0.0);
        for i in 0..n {
            h[i * n + i] = 1.0;
        }
    };
    reset_h(&mut h);

    let mut d = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut iters_done = 0usize;

    for iter in 0..max_iter {
        iters_done = iter;
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < grad_tol {
            return AscentResult {
                x,
                value,
                gradient_norm: gnorm,
                iterations: iter,
                converged: true,
            };
        }

        // Ascent direction d = H g; fall back to steepest ascent if the
        // approximation has lost positive definiteness.
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += h[i * n + j] * g[j];
            }
            d[i] = acc;
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(di, gi)| di * gi).sum();
        if !slope.is_finite() || slope <= 0.0 {
            reset_h(&mut h);
            d.copy_from_slice(&g);
            slope = gnorm * gnorm;
        }

        // Backtracking Armijo line search from the natural step.
        let mut alpha = 1.0f64;
        let mut accepted = false;
        let mut trial_value = value;
        for _ in 0..60 {
            let trial: Vec<f64> = x
                .iter()
                .zip(&d)
                .map(|(xi, di)| xi + alpha * di)
                .collect();
            trial_value = grad(&trial, &mut g_new);
            if trial_value.is_finite() && trial_value >= value + 1e-4 * alpha * slope {
                x = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-20 {
                break;
            }
        }
        if !accepted {
            break;
        }

        // Inverse BFGS update on φ = -f: s = α d, y = g_old - g_new.
        let mut sy = 0.0;
        for i in 0..n {
            sy += alpha * d[i] * (g[i] - g_new[i]);
        }
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            // H+ = (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
            let s: Vec<f64> = d.iter().map(|di| alpha * di).collect();
            let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
            let mut hy = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += h[i * n + j] * y[j];
                }
                hy[i] = acc;
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                        + rho * rho * yhy * s[i] * s[j]
                        + rho * s[i] * s[j];
                }
            }
        } else {
            reset_h(&mut h);
        }

        value = trial_value;
        g.copy_from_slice(&g_new);
    }

    let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    AscentResult {
        x,
        value,
        gradient_norm: gnorm,
        iterations: iters_done + 1,
        converged: gnorm < grad_tol,
    }
}

/// Golden-section minimization of a 1-d function on `[lo, hi]`.
pub fn golden_section<F>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() < tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
