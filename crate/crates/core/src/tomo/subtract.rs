use crate::noise::CountRecord;

/// A background-corrected count. Subtraction can go negative on noisy
/// low-count settings; those are clamped to zero and flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubtractedCount {
    pub value: f64,
    pub clamped: bool,
}

/// Removes the accidental-coincidence background measured in the
/// delayed window: `corrected = raw - delayed`, clamped at zero.
pub fn subtract_background(record: &CountRecord) -> SubtractedCount {
    let diff = record.raw as f64 - record.delayed as f64;
    if diff < 0.0 {
        SubtractedCount {
            value: 0.0,
            clamped: true,
        }
    } else {
        SubtractedCount {
            value: diff,
            clamped: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(raw: u64, delayed: u64) -> CountRecord {
        CountRecord {
            setting_id: "t".into(),
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
    fn plain_subtraction() {
        let s = subtract_background(&record(100, 20));
        assert_eq!(s.value, 80.0);
        assert!(!s.clamped);
    }

    #[test]
    fn negative_results_clamp_to_zero() {
        let s = subtract_background(&record(5, 9));
        assert_eq!(s.value, 0.0);
        assert!(s.clamped);
    }
}
