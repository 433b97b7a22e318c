//! Poissonian bootstrap error propagation.
//!
//! Every raw and delayed count is independently resampled from a Poisson
//! distribution at its observed value, the full reconstruction pipeline
//! is re-run, and standard deviations of each derived scalar are
//! reported. Resamples derive independent RNG streams from
//! `(seed, resample index)`, so parallel execution is bit-identical to
//! sequential.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::noise::{derive_rng, CountRecord};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub std_devs: BTreeMap<String, f64>,
    pub means: BTreeMap<String, f64>,
    pub n_resamples: usize,
}

fn poisson_at(rng: &mut impl Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(rng).round().max(0.0) as u64
    }
}

/// Resamples one record: raw and delayed channels independently, so the
/// subtraction is re-applied inside each resample.
fn resample_record(record: &CountRecord, rng: &mut impl Rng) -> CountRecord {
    let mut out = record.clone();
    out.raw = poisson_at(rng, record.raw as f64);
    out.delayed = poisson_at(rng, record.delayed as f64);
    out.singles_s = poisson_at(rng, record.singles_s as f64);
    out.singles_as = poisson_at(rng, record.singles_as as f64);
    out
}

/// Propagates Poissonian counting errors through an arbitrary
/// reconstruction pipeline.
///
/// The pipeline must be deterministic: it is run twice on the original
/// counts and rejected if the outputs differ.
pub fn bootstrap_errors<F>(
    pipeline: F,
    counts: &[CountRecord],
    n_resamples: usize,
    seed: u64,
) -> Result<BootstrapResult>
where
    F: Fn(&[CountRecord]) -> Result<BTreeMap<String, f64>> + Sync,
{
    if n_resamples < 100 {
        return Err(Error::invalid(format!(
            "bootstrap needs at least 100 resamples, got {n_resamples}"
        )));
    }
    let first = pipeline(counts)?;
    let second = pipeline(counts)?;
    if first.len() != second.len()
        || first
            .iter()
            .zip(second.iter())
            .any(|((ka, va), (kb, vb))| ka != kb || va.to_bits() != vb.to_bits())
    {
        return Err(Error::invalid(
            "pipeline is not reproducible (unseeded randomness?); bootstrap contract violated",
        ));
    }

    let samples: Vec<BTreeMap<String, f64>> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(seed, &format!("bootstrap/{i}"));
            let resampled: Vec<CountRecord> =
                counts.iter().map(|r| resample_record(r, &mut rng)).collect();
            pipeline(&resampled)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut std_devs = BTreeMap::new();
    let mut means = BTreeMap::new();
    for key in first.keys() {
        let values: Vec<f64> = samples
            .iter()
            .map(|s| {
                s.get(key).copied().ok_or_else(|| {
                    Error::invalid(format!("pipeline dropped key '{key}' in a resample"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        means.insert(key.clone(), mean);
        std_devs.insert(key.clone(), var.sqrt());
    }

    Ok(BootstrapResult {
        std_devs,
        means,
        n_resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, raw: u64, delayed: u64) -> CountRecord {
        CountRecord {
            setting_id: id.into(),
            hwp3: 0.0,
            p2: 0.0,
            hwp5: 0.0,
            qwp2: 0.0,
            raw,
            delayed,
            singles_s: 0,
            singles_as: 0,
            t_sec: 1.0,
        }
    }

    #[test]
    fn zero_counts_stay_zero() {
        let counts = vec![record("a", 0, 0)];
        let res = bootstrap_errors(
            |c| {
                let mut m = BTreeMap::new();
                m.insert("raw".to_string(), c[0].raw as f64);
                Ok(m)
            },
            &counts,
            200,
            9,
        )
        .unwrap();
        assert_eq!(res.std_devs["raw"], 0.0);
        assert_eq!(res.means["raw"], 0.0);
    }

    #[test]
    fn sigma_scales_as_inverse_sqrt_counts() {
        // Quadrupling counts must halve the relative std dev within 30%.
        let run = |scale: u64| -> f64 {
            let counts = vec![record("a", 400 * scale, 0)];
            let res = bootstrap_errors(
                |c| {
                    let mut m = BTreeMap::new();
                    m.insert("mean_rate".to_string(), c[0].raw as f64 / scale as f64);
                    Ok(m)
                },
                &counts,
                400,
                11,
            )
            .unwrap();
            res.std_devs["mean_rate"]
        };
        let sigma1 = run(1);
        let sigma4 = run(4);
        let ratio = sigma1 / sigma4;
        assert!(
            (ratio - 2.0).abs() < 0.6,
            "sigma ratio {ratio} should be ≈ 2"
        );
    }

    #[test]
    fn non_reproducible_pipeline_rejected() {
        use std::sync::atomic::{AtomicU64, Ordering};
        let counter = AtomicU64::new(0);
        let counts = vec![record("a", 10, 0)];
        let err = bootstrap_errors(
            |_| {
                let mut m = BTreeMap::new();
                m.insert("x".to_string(), counter.fetch_add(1, Ordering::SeqCst) as f64);
                Ok(m)
            },
            &counts,
            100,
            1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("not reproducible"));
    }

    #[test]
    fn deterministic_under_seed() {
        let counts = vec![record("a", 123, 17), record("b", 55, 3)];
        let pipeline = |c: &[CountRecord]| {
            let mut m = BTreeMap::new();
            let total: u64 = c.iter().map(|r| r.raw - r.raw.min(r.delayed)).sum();
            m.insert("net".to_string(), total as f64);
            Ok(m)
        };
        let a = bootstrap_errors(pipeline, &counts, 150, 77).unwrap();
        let b = bootstrap_errors(pipeline, &counts, 150, 77).unwrap();
        assert_eq!(a.std_devs["net"].to_bits(), b.std_devs["net"].to_bits());
        let c = bootstrap_errors(pipeline, &counts, 150, 78).unwrap();
        assert_ne!(a.std_devs["net"].to_bits(), c.std_devs["net"].to_bits());
    }

    #[test]
    fn too_few_resamples_rejected() {
        let counts = vec![record("a", 5, 0)];
        assert!(bootstrap_errors(|_| Ok(BTreeMap::new()), &counts, 99, 0).is_err());
    }
}
