//! Maximum-likelihood process tomography in the fixed operator basis
//! `{I, X, -iσy, Z}`.
//!
//! χ is parametrized as `A†A` (Hermitian PSD by construction) and fitted
//! against the output-state tomography counts of each input state, with
//! one profiled flux per input. Postselection makes the physical channel
//! trace-nonincreasing; the per-input fluxes absorb the lost trace, so χ
//! is identified up to scale and reported normalized to `Tr χ = 1`, with
//! the trace-preservation residual attached as a diagnostic.

use nalgebra::DMatrix;

use crate::noise::derive_rng;
use crate::optim::bfgs_ascent;
use crate::qstate::{process_basis, DensityMatrix, Operator, ProcessMatrix, PureState};
use crate::{C64, Error, Result};

use super::qst::TriangularParams;
use super::types::{Estimate, MleOptions, Observation, TomographyResult};

const P_FLOOR: f64 = 1e-12;

/// Per-(input, setting) coefficient matrix `D` with
/// `Tr(χ D) = Σ_mn χ_mn Tr(E_m ρ_in E_n† M)`.
fn coefficient_matrix(input: &DensityMatrix, povm: Option<&Operator>) -> DMatrix<C64> {
    let basis = process_basis();
    let mut d = DMatrix::<C64>::zeros(4, 4);
    for m in 0..4 {
        for n in 0..4 {
            let op = basis[m].matrix() * input.matrix() * basis[n].matrix().adjoint();
            let val = match povm {
                Some(p) => (p.matrix() * op).trace(),
                None => op.trace(),
            };
            // q = Σ_mn χ_mn C_mn = Tr(χ D) with D = Cᵀ.
            d[(n, m)] = val;
        }
    }
    d
}

struct QptWorkspace {
    /// For each input: (D0, per-setting (D, count)).
    inputs: Vec<(DMatrix<C64>, Vec<(DMatrix<C64>, f64)>)>,
    tri: TriangularParams,
    total_counts: f64,
}

impl QptWorkspace {
    fn eval(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        use super::qst::{axpy_matrix, trace_product_re};
        let a = self.tri.to_matrix(params);
        let g = a.adjoint() * &a;

        let mut log_l = 0.0;
        let mut g_wirt = DMatrix::<C64>::zeros(4, 4);
        let mut probs = Vec::new();
        for (d0, settings) in &self.inputs {
            let t_i = trace_product_re(&g, d0).max(1e-300);
            probs.clear();
            let mut sum_p = 0.0;
            let mut sum_n = 0.0;
            for (d, n) in settings {
                let q = trace_product_re(&g, d);
                let p = (q / t_i).max(P_FLOOR);
                probs.push(p);
                sum_p += p;
                sum_n += n;
            }
            let s_i = sum_n / sum_p;
            let mut weighted = DMatrix::<C64>::zeros(4, 4);
            let mut weighted_p = 0.0;
            for ((d, n), &p) in settings.iter().zip(&probs) {
                let lambda = s_i * p;
                log_l += n * lambda.ln() - lambda;
                let w = n / p - s_i;
                axpy_matrix(&mut weighted, w, d);
                weighted_p += w * p;
            }
            axpy_matrix(&mut weighted, -weighted_p, d0);
            let contribution = &a * weighted;
            axpy_matrix(&mut g_wirt, 1.0 / t_i, &contribution);
        }
        g_wirt *= C64::new(1.0 / self.total_counts, 0.0);
        self.tri.gradient_from_wirtinger(&g_wirt, grad);
        log_l / self.total_counts
    }
}

/// Maximum-likelihood χ reconstruction from per-input output tomography.
///
/// Each pair holds an input state and its output-state tomography result,
/// whose observations supply the Poisson counts. Requires at least four
/// linearly independent inputs (the six canonical states more than
/// satisfy this).
pub fn qpt_mle(
    io_pairs: &[(PureState, TomographyResult)],
    opts: &MleOptions,
) -> Result<TomographyResult> {
    if io_pairs.is_empty() {
        return Err(Error::invalid("no input/output pairs"));
    }
    for (input, _) in io_pairs {
        if input.dim() != 2 {
            return Err(Error::invalid("process tomography expects qubit inputs"));
        }
    }
    let rank = input_span_rank(io_pairs);
    if rank < 4 {
        return Err(Error::invalid(format!(
            "process tomography needs 4 linearly independent inputs, got rank {rank}"
        )));
    }

    let mut inputs = Vec::with_capacity(io_pairs.len());
    let mut total = 0.0;
    let mut all_obs = Vec::new();
    for (input, result) in io_pairs {
        if result.observations.is_empty() {
            return Err(Error::invalid(
                "output tomography result carries no observations to refit",
            ));
        }
        let rho_in = DensityMatrix::from_pure(input);
        let d0 = coefficient_matrix(&rho_in, None);
        let mut settings = Vec::with_capacity(result.observations.len());
        for obs in &result.observations {
            if obs.setting.povm_element.dim() != 2 {
                return Err(Error::invalid("output observations must be single-qubit"));
            }
            let d = coefficient_matrix(&rho_in, Some(&obs.setting.povm_element));
            settings.push((d, obs.value));
            total += obs.value;
            all_obs.push(obs.clone());
        }
        inputs.push((d0, settings));
    }
    if total <= 0.0 {
        return Err(Error::invalid("all output counts are zero"));
    }

    let ws = QptWorkspace {
        inputs,
        tri: TriangularParams::new(4),
        total_counts: total,
    };

    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    let mut rng = derive_rng(opts.seed, "qpt/restarts");
    for restart in 0..opts.restarts.max(1) {
        let x0 = if restart == 0 {
            // Start near the identity process: A ∝ diag(1, ε, ε, ε).
            let mut p = vec![0.0; ws.tri.len()];
            p[0] = 1.0;
            for i in 1..4 {
                p[i] = 0.05;
            }
            p
        } else {
            ws.tri.random_start(&mut rng)
        };
        let res = bfgs_ascent(|x, g| ws.eval(x, g), x0, opts.grad_tol, opts.max_iter);
        let replace = match &best {
            None => true,
            Some((_, v, _, _)) => res.value > *v,
        };
        if replace {
            best = Some((res.x, res.value, res.iterations, res.converged));
        }
    }
    let (x, mean_ll, iterations, converged) = best.expect("at least one restart");

    let a = ws.tri.to_matrix(&x);
    let g = a.adjoint() * &a;
    let chi = ProcessMatrix::from_physical(&g / C64::new(g.trace().re, 0.0));

    Ok(TomographyResult {
        estimate: Estimate::Process(chi),
        log_likelihood: mean_ll * total,
        iterations,
        converged,
        error_bars: Default::default(),
        observations: all_obs,
    })
}

fn input_span_rank(io_pairs: &[(PureState, TomographyResult)]) -> usize {
    let mut gram = DMatrix::<f64>::zeros(io_pairs.len(), io_pairs.len());
    for (i, (a, _)) in io_pairs.iter().enumerate() {
        for (j, (b, _)) in io_pairs.iter().enumerate() {
            let pa = DensityMatrix::from_pure(a);
            let pb = DensityMatrix::from_pure(b);
            gram[(i, j)] = (pa.matrix() * pb.matrix()).trace().re;
        }
    }
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|v| **v > 1e-9)
        .count()
}
