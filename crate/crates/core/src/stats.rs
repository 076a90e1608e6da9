//! Aggregation statistics for benchmark reports.

use core::fmt;

use alloc::string::String;

use crate::fx;

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    EmptyInput,
    NegativeValue(f64),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::EmptyInput => write!(f, "shifted geometric mean of an empty list"),
            StatsError::NegativeValue(v) => {
                write!(f, "shifted geometric mean needs nonnegative values, got {v}")
            }
        }
    }
}

impl core::error::Error for StatsError {}

/// Geometric mean shifted by `shift`: `exp(mean(ln(v_i + shift))) - shift`.
pub fn shifted_geomean(values: &[f64], shift: f64) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut acc = 0.0;
    for &v in values {
        if v < 0.0 {
            return Err(StatsError::NegativeValue(v));
        }
        acc += fx::ln(v + shift);
    }
    Ok(fx::exp(acc / values.len() as f64) - shift)
}

/// Plain arithmetic mean; `None` on empty input.
pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Format a float for CSV output with enough digits to be stable.
pub fn fmt_f64(v: f64) -> String {
    use alloc::string::ToString;
    v.to_string()
}
