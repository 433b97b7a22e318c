//! Maximum-likelihood state tomography.
//!
//! The state is parametrized as `ρ = T†T / Tr(T†T)` with `T` lower
//! triangular (real diagonal), which keeps every iterate Hermitian,
//! positive semidefinite, and unit trace. The objective is the exact
//! Poisson log-likelihood with the per-run flux profiled out analytically:
//! for rates `λ_k = s·p_k(ρ)` the optimal `s` is `Σn_k / Σp_k`, leaving
//!
//! ```text
//! ∂ logL / ∂θ = Σ_k (n_k/p_k - s) ∂p_k/∂θ .
//! ```
//!
//! Ascent is Barzilai–Borwein gradient climbing with a backtracking
//! safeguard and random restarts; small parameter counts (d² reals) make
//! this cheap and deterministic under the seed.

use nalgebra::DMatrix;
use rand::Rng;

use crate::noise::derive_rng;
use crate::optim::bfgs_ascent;
use crate::qstate::{DensityMatrix, Operator};
use crate::{C64, Error, Result};

use super::types::{Estimate, MleOptions, Observation, TomographyResult};

const P_FLOOR: f64 = 1e-12;

/// `Re Tr(A·B)` without forming the product.
pub(crate) fn trace_product_re(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// `self += alpha · other`, elementwise, no allocation.
pub(crate) fn axpy_matrix(acc: &mut DMatrix<C64>, alpha: f64, other: &DMatrix<C64>) {
    for (a, o) in acc.iter_mut().zip(other.iter()) {
        a.re += alpha * o.re;
        a.im += alpha * o.im;
    }
}

/// Lower-triangular parametrization bookkeeping for a `dim`×`dim` complex
/// matrix with real diagonal: `dim` diagonal reals followed by (re, im)
/// pairs for each below-diagonal entry.
pub(crate) struct TriangularParams {
    dim: usize,
}

impl TriangularParams {
    pub(crate) fn new(dim: usize) -> Self {
        TriangularParams { dim }
    }

    pub(crate) fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub(crate) fn to_matrix(&self, params: &[f64]) -> DMatrix<C64> {
        let d = self.dim;
        let mut t = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            t[(i, i)] = C64::new(params[i], 0.0);
        }
        let mut idx = d;
        for i in 0..d {
            for j in 0..i {
                t[(i, j)] = C64::new(params[idx], params[idx + 1]);
                idx += 2;
            }
        }
        t
    }

    /// Writes `2·Re/Im` of the Wirtinger matrix gradient into the real
    /// parameter gradient layout.
    pub(crate) fn gradient_from_wirtinger(&self, g: &DMatrix<C64>, out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            out[i] = 2.0 * g[(i, i)].re;
        }
        let mut idx = d;
        for i in 0..d {
            for j in 0..i {
                out[idx] = 2.0 * g[(i, j)].re;
                out[idx + 1] = 2.0 * g[(i, j)].im;
                idx += 2;
            }
        }
    }

    pub(crate) fn identity_start(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.len()];
        let scale = 1.0 / (self.dim as f64).sqrt();
        for i in 0..self.dim {
            p[i] = scale;
        }
        p
    }

    pub(crate) fn random_start(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.len())
            .map(|_| {
                let u: f64 = rng.random();
                2.0 * u - 1.0
            })
            .collect()
    }
}

/// Checks that the POVM elements span the full Hermitian operator space;
/// returns the missing directions (as Pauli strings) otherwise.
fn completeness_report(povms: &[&Operator], dim: usize) -> Result<()> {
    let basis = hermitian_basis(dim);
    let n_dir = basis.len();
    // Gram matrix of the measured span inside the Hermitian space.
    let mut coeffs = DMatrix::<f64>::zeros(povms.len(), n_dir);
    for (k, m) in povms.iter().enumerate() {
        for (a, b) in basis.iter().enumerate() {
            coeffs[(k, a)] = (m.matrix() * b.1.matrix()).trace().re;
        }
    }
    let gram = coeffs.transpose() * &coeffs;
    let eig = gram.symmetric_eigen();
    let mut missing: Vec<String> = Vec::new();
    for (i, val) in eig.eigenvalues.iter().enumerate() {
        if *val < 1e-9 {
            // Name the unmeasured direction by its dominant basis labels.
            let col = eig.eigenvectors.column(i);
            let mut best = (0usize, 0.0f64);
            for (a, c) in col.iter().enumerate() {
                if c.abs() > best.1 {
                    best = (a, c.abs());
                }
            }
            missing.push(basis[best.0].0.clone());
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        missing.sort();
        missing.dedup();
        Err(Error::invalid(format!(
            "measurement settings are informationally incomplete; unmeasured directions: {}",
            missing.join(", ")
        )))
    }
}

/// Orthogonal Hermitian basis labelled by Pauli strings.
fn hermitian_basis(dim: usize) -> Vec<(String, Operator)> {
    let singles = [
        ("I", Operator::identity(2)),
        ("X", Operator::pauli_x()),
        ("Y", Operator::pauli_y()),
        ("Z", Operator::pauli_z()),
    ];
    match dim {
        2 => singles.iter().map(|(n, o)| (n.to_string(), o.clone())).collect(),
        4 => {
            let mut out = Vec::with_capacity(16);
            for (na, a) in &singles {
                for (nb, b) in &singles {
                    out.push((format!("{na}{nb}"), a.tensor(b)));
                }
            }
            out
        }
        _ => panic!("hermitian basis only provided for 1-2 qubits"),
    }
}

struct LikelihoodWorkspace {
    povms: Vec<DMatrix<C64>>,
    counts: Vec<f64>,
    tri: TriangularParams,
    total_counts: f64,
}

impl LikelihoodWorkspace {
    /// Mean log-likelihood and its gradient at the given parameters.
    fn eval(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let t = self.tri.to_matrix(params);
        let g = t.adjoint() * &t;
        let norm = g.trace().re.max(1e-300);

        let mut probs = Vec::with_capacity(self.povms.len());
        let mut sum_p = 0.0;
        for m in &self.povms {
            let q = trace_product_re(&g, m);
            let p = (q / norm).max(P_FLOOR);
            probs.push(p);
            sum_p += p;
        }
        let s = self.total_counts / sum_p;

        let mut log_l = 0.0;
        // Weighted POVM sum drives the gradient: W = Σ w_k M_k.
        let dim = t.nrows();
        let mut weighted = DMatrix::<C64>::zeros(dim, dim);
        let mut weighted_p = 0.0;
        for ((m, &p), &n) in self.povms.iter().zip(&probs).zip(&self.counts) {
            let lambda = s * p;
            log_l += n * lambda.ln() - lambda;
            let w = n / p - s;
            axpy_matrix(&mut weighted, w, m);
            weighted_p += w * p;
        }

        // Wirtinger gradient of the mean log-likelihood wrt T̄:
        // (T·W - (Σ w_k p_k)·T) / (N · total).
        let scale = 1.0 / (norm * self.total_counts);
        let mut g_wirt = &t * weighted;
        axpy_matrix(&mut g_wirt, -weighted_p, &t);
        g_wirt *= C64::new(scale, 0.0);
        self.tri.gradient_from_wirtinger(&g_wirt, grad);

        log_l / self.total_counts
    }
}

/// Maximum-likelihood density-matrix reconstruction from counted
/// projective measurements.
///
/// `dim` is 2 or 4. The observations must form an informationally
/// complete set and contain at least one nonzero count.
pub fn qst_mle(observations: &[Observation], dim: usize, opts: &MleOptions) -> Result<TomographyResult> {
    if !(dim == 2 || dim == 4) {
        return Err(Error::invalid("qst_mle supports one- and two-qubit states"));
    }
    if observations.is_empty() {
        return Err(Error::invalid("no observations"));
    }
    for obs in observations {
        if obs.setting.povm_element.dim() != dim {
            return Err(Error::DimMismatch(obs.setting.povm_element.dim(), dim));
        }
        if !obs.value.is_finite() || obs.value < 0.0 {
            return Err(Error::invalid(format!(
                "observation '{}' has invalid count {}",
                obs.setting.setting_id, obs.value
            )));
        }
    }
    let total: f64 = observations.iter().map(|o| o.value).sum();
    if total <= 0.0 {
        return Err(Error::invalid("all counts are zero; nothing to reconstruct"));
    }
    let povm_refs: Vec<&Operator> = observations.iter().map(|o| &o.setting.povm_element).collect();
    completeness_report(&povm_refs, dim)?;

    let ws = LikelihoodWorkspace {
        povms: observations
            .iter()
            .map(|o| o.setting.povm_element.matrix().clone())
            .collect(),
        counts: observations.iter().map(|o| o.value).collect(),
        tri: TriangularParams::new(dim),
        total_counts: total,
    };

    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    let mut rng = derive_rng(opts.seed, "qst/restarts");
    for restart in 0..opts.restarts.max(1) {
        let x0 = if restart == 0 {
            ws.tri.identity_start()
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

    let t = ws.tri.to_matrix(&x);
    let g = t.adjoint() * &t;
    let rho = DensityMatrix::from_physical(&g / C64::new(g.trace().re, 0.0));

    Ok(TomographyResult {
        estimate: Estimate::State(rho),
        log_likelihood: mean_ll * total,
        iterations,
        converged,
        error_bars: Default::default(),
        observations: observations.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::settings::{single_qubit_settings, two_qubit_grid, GridMode};
    use super::*;
    use crate::qstate::{kets, state_fidelity};

    /// Expected counts for a state under a setting list.
    fn expected_observations(
        rho: &DensityMatrix,
        settings: &[super::super::types::MeasurementSetting],
        scale: f64,
    ) -> Vec<Observation> {
        settings
            .iter()
            .map(|s| Observation {
                setting: s.clone(),
                value: (rho.expectation(&s.povm_element).unwrap().re * scale).round(),
            })
            .collect()
    }

    #[test]
    fn reconstructs_single_qubit_pure_state() {
        let rho = DensityMatrix::from_pure(&kets::left());
        let obs = expected_observations(&rho, &single_qubit_settings(""), 1e6);
        let result = qst_mle(&obs, 2, &MleOptions::default()).unwrap();
        assert!(result.converged);
        let est = result.state().unwrap();
        assert!(est.trace_distance(&rho).unwrap() < 1e-4);
    }

    #[test]
    fn reconstructs_bell_state_from_noise_free_grid() {
        let rho = DensityMatrix::from_pure(&kets::phi_plus());
        let obs = expected_observations(&rho, &two_qubit_grid(GridMode::Full36), 1e6);
        let result = qst_mle(&obs, 4, &MleOptions::default()).unwrap();
        let est = result.state().unwrap();
        let (fef, _) = crate::qstate::fully_entangled_fraction(est).unwrap();
        assert!(fef >= 0.999, "fef = {fef}");
    }

    #[test]
    fn sampled_counts_recover_the_state_to_two_percent() {
        // Sampling oracle with known ground truth at 10⁴ counts/setting.
        use rand_distr::{Distribution, Poisson};
        let rho = DensityMatrix::from_pure(&kets::h());
        let mut rng = derive_rng(5, "test/qst-sampling");
        let obs: Vec<Observation> = single_qubit_settings("")
            .iter()
            .map(|s| {
                let mean = rho.expectation(&s.povm_element).unwrap().re * 1e4;
                let value = if mean > 0.0 {
                    Poisson::new(mean).unwrap().sample(&mut rng)
                } else {
                    0.0
                };
                Observation {
                    setting: s.clone(),
                    value: value.round(),
                }
            })
            .collect();
        let result = qst_mle(&obs, 2, &MleOptions::default()).unwrap();
        let est = result.state().unwrap();
        assert!(est.trace_distance(&rho).unwrap() <= 0.02);
        assert!(state_fidelity(&kets::h(), est).unwrap() > 0.98);
    }

    #[test]
    fn minimal_grid_is_complete_and_partial_grid_rejected() {
        let rho = DensityMatrix::werner(0.7).unwrap();
        let obs = expected_observations(&rho, &two_qubit_grid(GridMode::Minimal16), 1e6);
        let result = qst_mle(&obs, 4, &MleOptions::default()).unwrap();
        assert!(result.state().unwrap().trace_distance(&rho).unwrap() < 1e-3);

        // Dropping every circular setting on the first qubit removes the
        // Y⊗· directions: the fit must refuse and name a missing one.
        let partial: Vec<Observation> = expected_observations(&rho, &two_qubit_grid(GridMode::Full36), 1e6)
            .into_iter()
            .filter(|o| !o.setting.setting_id.starts_with("s:L") && !o.setting.setting_id.starts_with("s:R"))
            .collect();
        let err = qst_mle(&partial, 4, &MleOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("incomplete"), "{msg}");
        assert!(msg.contains('Y'), "{msg}");
    }

    #[test]
    fn all_zero_counts_rejected() {
        let obs: Vec<Observation> = single_qubit_settings("")
            .iter()
            .map(|s| Observation {
                setting: s.clone(),
                value: 0.0,
            })
            .collect();
        assert!(qst_mle(&obs, 2, &MleOptions::default()).is_err());
    }

    #[test]
    fn estimate_is_invariant_under_setting_order_and_count_scale() {
        let rho = DensityMatrix::werner(0.62).unwrap();
        let mut obs = expected_observations(&rho, &two_qubit_grid(GridMode::Full36), 4e5);
        let a = qst_mle(&obs, 4, &MleOptions::default()).unwrap();
        obs.reverse();
        let b = qst_mle(&obs, 4, &MleOptions::default()).unwrap();
        assert!(a
            .state()
            .unwrap()
            .trace_distance(b.state().unwrap())
            .unwrap()
            < 1e-6);
        // Uniform ×3 count scaling leaves the argmax unchanged.
        for o in obs.iter_mut() {
            o.value *= 3.0;
        }
        let c = qst_mle(&obs, 4, &MleOptions::default()).unwrap();
        assert!(a
            .state()
            .unwrap()
            .trace_distance(c.state().unwrap())
            .unwrap()
            < 1e-6);
    }
}
