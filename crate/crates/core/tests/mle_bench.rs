mod common;
use ptsim::qstate::{kets, DensityMatrix};
use ptsim::tomo::{qst_mle, two_qubit_grid, GridMode, MleOptions, Observation};
use std::time::Instant;

#[test]
#[ignore]
fn time_single_fits() {
    let grid = two_qubit_grid(GridMode::Full36);
    for (name, rho) in [
        ("bell", DensityMatrix::from_pure(&kets::phi_plus())),
        ("werner0.75", DensityMatrix::werner(0.75).unwrap()),
    ] {
        let obs: Vec<Observation> = grid
            .iter()
            .map(|s| Observation {
                setting: s.clone(),
                value: (rho.expectation(&s.povm_element).unwrap().re * 1e6).round(),
            })
            .collect();
        let start = Instant::now();
        let result = qst_mle(&obs, 4, &MleOptions::default()).unwrap();
        println!(
            "{name}: {:?} iters={} converged={} td={:.2e}",
            start.elapsed(),
            result.iterations,
            result.converged,
            result.state().unwrap().trace_distance(&rho).unwrap()
        );
    }
}
