//! Count sampling and the CSV exchange format for measurement records.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::coincidence::{AnalyzerAngles, AnalyzerConfig, ProbabilityTable};
use super::params::NoiseParams;
use super::seed::derive_rng;

/// How counts are produced from per-pulse probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Poissonian counting statistics (the physical mode).
    #[default]
    Poisson,
    /// Deterministic expected counts, rounded; the infinite-statistics
    /// reference used by exactness tests and calibration.
    Expected,
}

/// One measurement setting with its raw and delayed-window counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_id: String,
    pub hwp3: f64,
    pub p2: f64,
    pub hwp5: f64,
    pub qwp2: f64,
    pub raw: u64,
    pub delayed: u64,
    pub singles_s: u64,
    pub singles_as: u64,
    pub t_sec: f64,
}

impl CountRecord {
    pub fn angles(&self) -> AnalyzerAngles {
        AnalyzerAngles {
            hwp3: self.hwp3,
            p2: self.p2,
            hwp5: self.hwp5,
            qwp2: self.qwp2,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_sec <= 0.0 {
            return Err(Error::invalid(format!(
                "integration time must be positive in record '{}'",
                self.setting_id
            )));
        }
        Ok(())
    }
}

fn poisson_draw(rng: &mut impl Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng).round().max(0.0) as u64
}

/// Samples one [`CountRecord`] from a probability table.
///
/// Raw counts draw from Poisson(true + doubles + accidental), the
/// delayed window independently from Poisson(accidental), matching the
/// repetition-period-shifted coincidence measurement. Deterministic given
/// `(params.seed, analyzer.setting_id)`.
pub fn sample_counts(
    probs: &ProbabilityTable,
    analyzer: &AnalyzerConfig,
    integration_time: f64,
    params: &NoiseParams,
    mode: SamplingMode,
) -> Result<CountRecord> {
    if integration_time <= 0.0 {
        return Err(Error::invalid("integration time must be positive"));
    }
    let pulses = params.pulses(integration_time);
    if pulses < 1.0 {
        return Err(Error::invalid(
            "integration window shorter than one pulse period",
        ));
    }
    for (name, p) in [
        ("raw", probs.raw()),
        ("accidental", probs.accidental),
        ("singles_s", probs.singles_s),
        ("singles_as", probs.singles_as),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "per-pulse probability {name} = {p} outside [0,1]"
            )));
        }
    }

    let means = [
        probs.raw() * pulses,
        probs.accidental * pulses,
        probs.singles_s * pulses,
        probs.singles_as * pulses,
    ];
    let drawn: [u64; 4] = match mode {
        SamplingMode::Expected => [
            means[0].round() as u64,
            means[1].round() as u64,
            means[2].round() as u64,
            means[3].round() as u64,
        ],
        SamplingMode::Poisson => {
            let mut rng = derive_rng(params.seed, &format!("counts/{}", analyzer.setting_id));
            [
                poisson_draw(&mut rng, means[0]),
                poisson_draw(&mut rng, means[1]),
                poisson_draw(&mut rng, means[2]),
                poisson_draw(&mut rng, means[3]),
            ]
        }
    };

    let record = CountRecord {
        setting_id: analyzer.setting_id.clone(),
        hwp3: analyzer.angles.hwp3,
        p2: analyzer.angles.p2,
        hwp5: analyzer.angles.hwp5,
        qwp2: analyzer.angles.qwp2,
        raw: drawn[0],
        delayed: drawn[1],
        singles_s: drawn[2],
        singles_as: drawn[3],
        t_sec: integration_time,
    };
    record.validate()?;
    Ok(record)
}

const CSV_HEADER: [&str; 10] = [
    "setting_id",
    "hwp3",
    "p2",
    "hwp5",
    "qwp2",
    "raw",
    "delayed",
    "singles_s",
    "singles_as",
    "t_sec",
];

/// Writes count records as CSV with the fixed header.
pub fn write_count_records<W: std::io::Write>(writer: W, records: &[CountRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(&[
            r.setting_id.clone(),
            format!("{}", r.hwp3),
            format!("{}", r.p2),
            format!("{}", r.hwp5),
            format!("{}", r.qwp2),
            format!("{}", r.raw),
            format!("{}", r.delayed),
            format!("{}", r.singles_s),
            format!("{}", r.singles_as),
            format!("{}", r.t_sec),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_count_records_file(path: &Path, records: &[CountRecord]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_count_records(file, records)
}

/// Reads count records from CSV produced by [`write_count_records`].
pub fn read_count_records<R: std::io::Read>(reader: R) -> Result<Vec<CountRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    {
        let headers = r.headers()?;
        let expected: Vec<&str> = CSV_HEADER.to_vec();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::invalid(format!(
                "unexpected CSV header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let field = |i: usize| -> Result<&str> {
            row.get(i)
                .ok_or_else(|| Error::invalid(format!("missing CSV field {i}")))
        };
        let parse_f = |i: usize| -> Result<f64> {
            field(i)?
                .parse()
                .map_err(|_| Error::invalid(format!("bad float in CSV field {i}: '{}'", row.get(i).unwrap_or(""))))
        };
        let parse_u = |i: usize| -> Result<u64> {
            field(i)?
                .parse()
                .map_err(|_| Error::invalid(format!("bad count in CSV field {i}: '{}'", row.get(i).unwrap_or(""))))
        };
        let record = CountRecord {
            setting_id: field(0)?.to_string(),
            hwp3: parse_f(1)?,
            p2: parse_f(2)?,
            hwp5: parse_f(3)?,
            qwp2: parse_f(4)?,
            raw: parse_u(5)?,
            delayed: parse_u(6)?,
            singles_s: parse_u(7)?,
            singles_as: parse_u(8)?,
            t_sec: parse_f(9)?,
        };
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_count_records_file(path: &Path) -> Result<Vec<CountRecord>> {
    let file = std::fs::File::open(path)?;
    read_count_records(file)
}
