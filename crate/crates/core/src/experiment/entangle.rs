//! Entanglement-verification scenario: the two-qubit coincidence grid,
//! the polarizer scan, raw and background-subtracted reconstructions,
//! and the entanglement-criterion verdict.

use std::collections::BTreeMap;

use crate::noise::{
    coincidence_probabilities, phonon_decoherence, sample_counts, CountRecord, dual_path_source,
};
use crate::qstate::fully_entangled_fraction;
use crate::tomo::{
    bootstrap_errors, fit_visibility, observations_from_counts, qst_mle, subtract_background,
    two_qubit_grid, MleOptions, TomographyResult,
};
use crate::{Error, Result};

use super::apparatus::Apparatus;
use super::config::{ExperimentConfig, ScenarioKind};
use super::report::{density_to_json, ConvergenceEntry, ExperimentReport, TimelineEvent};

/// Angles of the Fig.-3a-style polarizer scan: 0°..180° in 10° steps.
pub fn scan_angles() -> Vec<f64> {
    (0..=18).map(|i| 10.0 * f64::from(i)).collect()
}

fn is_scan(record: &CountRecord) -> bool {
    record.setting_id.starts_with("scan:")
}

/// Derived scalars of an entanglement run: the bootstrap pipeline.
fn reconstruct(
    counts: &[CountRecord],
    grid: &[crate::tomo::MeasurementSetting],
    opts: &MleOptions,
    scan_only: bool,
) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();

    let scan: Vec<(f64, f64)> = counts
        .iter()
        .filter(|r| is_scan(r))
        .map(|r| (r.p2, r.raw as f64))
        .collect();
    let fit = fit_visibility(&scan)?;
    out.insert("V".to_string(), fit.v);

    if scan_only {
        return Ok(out);
    }

    let grid_counts: Vec<CountRecord> = counts.iter().filter(|r| !is_scan(r)).cloned().collect();
    let raw = qst_mle(&observations_from_counts(&grid_counts, grid, false)?, 4, opts)?;
    let sub = qst_mle(&observations_from_counts(&grid_counts, grid, true)?, 4, opts)?;
    let (fe_raw, _) = fully_entangled_fraction(raw.state()?)?;
    let (fe_sub, _) = fully_entangled_fraction(sub.state()?)?;
    out.insert("F_e_raw".to_string(), fe_raw);
    out.insert("F_e_sub".to_string(), fe_sub);
    Ok(out)
}

/// Runs the entanglement-verification experiment (or just its polarizer
/// scan for the visibility scenario).
pub fn run_entanglement(config: &ExperimentConfig, config_hash: &str) -> Result<ExperimentReport> {
    let scan_only = match config.scenario.kind {
        ScenarioKind::Entanglement => false,
        ScenarioKind::VisibilityScan => true,
        other => {
            return Err(Error::config(format!(
                "run_entanglement invoked with scenario '{}'",
                other.name()
            )))
        }
    };
    let params = &config.noise;
    let apparatus = Apparatus::load(&config.scenario.circuit_file)?;
    let state = phonon_decoherence(&dual_path_source(params)?, params)?;

    let grid = two_qubit_grid(config.analysis.grid);
    let mut counts: Vec<CountRecord> = Vec::new();
    if !scan_only {
        for setting in &grid {
            let labels = &setting.basis_labels;
            let analyzer = apparatus.verification_analyzer(&labels[0], &labels[1])?;
            debug_assert_eq!(analyzer.setting_id, setting.setting_id);
            let probs = coincidence_probabilities(&state, &apparatus.compiled, &analyzer, params)?;
            counts.push(sample_counts(
                &probs,
                &analyzer,
                config.analysis.integration_time_per_setting,
                params,
                config.analysis.sampling,
            )?);
        }
    }
    for angle in scan_angles() {
        let analyzer = apparatus.scan_analyzer(angle)?;
        let probs = coincidence_probabilities(&state, &apparatus.compiled, &analyzer, params)?;
        counts.push(sample_counts(
            &probs,
            &analyzer,
            config.analysis.integration_time_per_setting,
            params,
            config.analysis.sampling,
        )?);
    }

    let opts = MleOptions {
        seed: params.seed,
        ..MleOptions::default()
    };
    let point = reconstruct(&counts, &grid, &opts, scan_only)?;
    let boot = bootstrap_errors(
        |resampled| reconstruct(resampled, &grid, &opts, scan_only),
        &counts,
        config.analysis.bootstrap_n,
        params.seed,
    )?;

    let mut report = ExperimentReport::new(config.scenario.kind.name(), params.seed, config_hash.into());
    report.counts = counts.clone();
    report.timeline = vec![
        TimelineEvent {
            event: "write_pulse".into(),
            t_ps: 0.0,
        },
        TimelineEvent {
            event: "read_pulse".into(),
            t_ps: params.read_delay,
        },
        TimelineEvent {
            event: "coincidence_detection".into(),
            t_ps: params.read_delay + 1.0,
        },
    ];
    for (key, value) in &point {
        let sigma = boot.std_devs.get(key).copied().unwrap_or(0.0);
        report.scalar(key, *value, sigma);
    }

    if !scan_only {
        // Detailed fits for matrices and convergence diagnostics.
        let grid_counts: Vec<CountRecord> = counts.iter().filter(|r| !is_scan(r)).cloned().collect();
        let raw_fit = qst_mle(&observations_from_counts(&grid_counts, &grid, false)?, 4, &opts)?;
        let sub_fit = qst_mle(&observations_from_counts(&grid_counts, &grid, true)?, 4, &opts)?;
        record_state_fit(&mut report, "rho_raw", &raw_fit)?;
        record_state_fit(&mut report, "rho_sub", &sub_fit)?;
        report.clamped_settings = grid_counts
            .iter()
            .filter(|r| subtract_background(r).clamped)
            .map(|r| r.setting_id.clone())
            .collect();

        // Entanglement criterion F_e > 1/2, significance in bootstrap sigmas.
        for key in ["F_e_raw", "F_e_sub"] {
            let entry = report.get(key).expect("computed above");
            let sigmas = if entry.sigma > 0.0 {
                (entry.value - 0.5) / entry.sigma
            } else {
                f64::INFINITY
            };
            report.scalar(&format!("{key}_sigmas_above_half"), sigmas, 0.0);
        }
        let headline = if config.analysis.subtract_background {
            "F_e_sub"
        } else {
            "F_e_raw"
        };
        let verdict = report.get(headline).expect("present").value > 0.5;
        report
            .notes
            .push(format!("entanglement criterion (F_e > 0.5) met: {verdict}"));
    }
    Ok(report)
}

fn record_state_fit(report: &mut ExperimentReport, key: &str, fit: &TomographyResult) -> Result<()> {
    report.matrices.insert(key.to_string(), density_to_json(fit.state()?));
    report.convergence.insert(
        key.to_string(),
        ConvergenceEntry {
            iterations: fit.iterations,
            converged: fit.converged,
            log_likelihood: fit.log_likelihood,
            tp_residual: None,
        },
    );
    Ok(())
}
