//! The blow-up families for the named weight presets, bundled.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::blowup::{monotone_blowup, power_blowup, norlund_log_blowup, PowerBlowupPart};
use super::report::{bundle, ExperimentReport};
use crate::error::Result;
use crate::scalar::NumericMode;
use crate::weights::WeightSequence;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Logarithmic weights `log:1:1` at `p = 2/5`, power weights `power:1/2`
/// at `p = 1/2` (part b), and the Nörlund logarithmic mean at `p = 9/10`,
/// all in float mode.
pub fn preset_blowup_suite() -> Result<ExperimentReport> {
    let grid: Vec<u32> = (2..=12).collect();
    let log = WeightSequence::preset("log:1:1")?;
    let mut parts = vec![monotone_blowup(&log, &ratio(2, 5), &grid, NumericMode::Float)?];
    let power = WeightSequence::preset("power:1/2")?;
    parts.push(power_blowup(
        &power,
        &ratio(1, 2),
        Some(&ratio(1, 2)),
        &grid,
        PowerBlowupPart::BelowCritical,
        NumericMode::Float,
    )?);
    let long: Vec<u32> = (2..=40).collect();
    parts.push(norlund_log_blowup(&ratio(9, 10), &long)?);
    Ok(bundle("corollaries", &parts))
}
