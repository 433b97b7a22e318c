//! End-to-end runner tests on small configurations.

mod common;

use common::{calibrated_noise, entanglement_config, teleport_config};
use ptsim::experiment::{bell_outcome_statistics, run, ScenarioKind};
use ptsim::noise::{NoiseParams, SamplingMode};

fn noise_free(seed: u64) -> NoiseParams {
    NoiseParams::noise_free(seed)
}

#[test]
fn noise_free_entanglement_is_exact() {
    let mut config = entanglement_config(noise_free(1), 1.0, 100);
    config.analysis.sampling = SamplingMode::Expected;
    let report = run(&config, "test").unwrap();
    let fe_raw = report.get("F_e_raw").unwrap().value;
    let fe_sub = report.get("F_e_sub").unwrap().value;
    let v = report.get("V").unwrap().value;
    assert!((fe_raw - 1.0).abs() < 1e-6, "F_e_raw = {fe_raw}");
    assert!((fe_sub - 1.0).abs() < 1e-6, "F_e_sub = {fe_sub}");
    assert!((v - 1.0).abs() < 1e-6, "V = {v}");
}

#[test]
fn noise_free_teleport_is_exact() {
    let mut config = teleport_config(noise_free(1), 1.0, 100);
    config.analysis.sampling = SamplingMode::Expected;
    let report = run(&config, "test").unwrap();
    for label in ptsim::tomo::SIX_LABELS {
        let f = report.get(&format!("F_{label}_sub")).unwrap().value;
        assert!((f - 1.0).abs() < 1e-6, "F_{label} = {f}");
    }
    let fp = report.get("F_p_sub").unwrap().value;
    assert!((fp - 1.0).abs() < 1e-6, "F_p = {fp}");
    let fbar = report.get("F_bar_sub").unwrap().value;
    assert!((fbar - 1.0).abs() < 1e-6, "F_bar = {fbar}");
}

#[test]
fn bell_outcomes_are_uniform_in_the_ideal_case() {
    let config = teleport_config(noise_free(2), 1.0, 100);
    let stats = bell_outcome_statistics(&config).unwrap();
    let total: u64 = stats.values().sum();
    assert_eq!(total, 100_000);
    // 3σ multinomial band around 1/4.
    let sigma = (0.25 * 0.75 / total as f64).sqrt();
    for (name, count) in &stats {
        let freq = *count as f64 / total as f64;
        assert!(
            (freq - 0.25).abs() < 3.0 * sigma,
            "outcome {name}: freq {freq}"
        );
    }
    // Determinism.
    let again = bell_outcome_statistics(&config).unwrap();
    assert_eq!(stats, again);
}

#[test]
fn calibrated_entanglement_small_run_behaves() {
    // Reduced statistics for speed: checks plumbing, not the bands.
    let mut config = entanglement_config(calibrated_noise(7), 10.0, 100);
    config.analysis.grid = ptsim::tomo::GridMode::Full36;
    let report = run(&config, "test").unwrap();
    let fe_raw = report.get("F_e_raw").unwrap();
    let fe_sub = report.get("F_e_sub").unwrap();
    assert!(fe_sub.value > fe_raw.value, "subtraction should improve F_e");
    assert!(fe_raw.sigma > 0.0);
    assert!(report.get("F_e_sub_sigmas_above_half").unwrap().value > 5.0);
    assert!(!report.counts.is_empty());
    assert_eq!(report.scenario, "entanglement");
}

#[test]
fn visibility_scan_scenario_reports_v_only() {
    let mut config = entanglement_config(calibrated_noise(7), 10.0, 100);
    config.scenario.kind = ScenarioKind::VisibilityScan;
    let report = run(&config, "test").unwrap();
    assert!(report.get("V").is_some());
    assert!(report.get("F_e_raw").is_none());
    let v = report.get("V").unwrap().value;
    assert!(v > 0.5 && v < 0.9, "V = {v}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let mut config = teleport_config(calibrated_noise(3), 5.0, 100);
    config.scenario.input_states = vec!["H".into(), "+".into(), "V".into(), "-".into(), "L".into(), "R".into()];
    let a = run(&config, "hash").unwrap().to_json().unwrap();
    let b = run(&config, "hash").unwrap().to_json().unwrap();
    assert_eq!(a, b);
}
