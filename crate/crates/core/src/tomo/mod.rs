//! Statistical reconstruction: background subtraction, maximum-likelihood
//! state and process tomography, visibility fitting, and bootstrap error
//! propagation.

pub mod bootstrap;
pub mod qpt;
pub mod qst;
pub mod settings;
pub mod subtract;
pub mod types;
pub mod visibility;

pub use bootstrap::{bootstrap_errors, BootstrapResult};
pub use qpt::qpt_mle;
pub use qst::qst_mle;
pub use settings::{
    anti_stokes_angles, single_qubit_settings, stokes_p2_angle, two_qubit_grid, GridMode,
    SIX_LABELS,
};
pub use subtract::{subtract_background, SubtractedCount};
pub use types::{Estimate, MeasurementSetting, MleOptions, Observation, TomographyResult};
pub use visibility::{fit_visibility, VisibilityFit};

use crate::noise::CountRecord;
use crate::Result;

/// Pairs count records with their settings by `setting_id`, optionally
/// applying background subtraction first.
pub fn observations_from_counts(
    counts: &[CountRecord],
    settings: &[MeasurementSetting],
    subtract: bool,
) -> Result<Vec<Observation>> {
    let mut out = Vec::with_capacity(settings.len());
    for setting in settings {
        let record = counts
            .iter()
            .find(|r| r.setting_id == setting.setting_id)
            .ok_or_else(|| {
                crate::Error::invalid(format!(
                    "no count record for setting '{}'",
                    setting.setting_id
                ))
            })?;
        let value = if subtract {
            subtract_background(record).value
        } else {
            record.raw as f64
        };
        out.push(Observation {
            setting: setting.clone(),
            value,
        });
    }
    Ok(out)
}
