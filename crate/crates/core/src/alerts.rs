//! Threshold-crossing early warnings over a normalized power scale slice,
//! and comparison of warnings against officially declared event dates.
//!
//! A warning fires at an upward crossing of the threshold; crossings within
//! the debounce window after the last emitted warning are suppressed, as are
//! crossings at cells whose kernel support was too truncated to trust.

use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::Serialize;
use thiserror::Error;

use crate::transform::ScaleSlice;

#[derive(Debug, Error)]
pub enum AlertError {
    #[error("slice value {value} exceeds 1; detect_warnings expects a globally normalized power slice")]
    NotNormalized { value: f64 },
    #[error("slice has {values} values but {support} support fractions")]
    LengthMismatch { values: usize, support: usize },
    #[error("invalid alert config: {0}")]
    InvalidConfig(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: bad date {text:?}")]
    BadDate { line: usize, text: String },
}

/// Detector settings. Defaults follow the headline configuration: the 40-day
/// slice, a 0.5 threshold on globally normalized power, one warning per
/// 30-day window, and at least 90% kernel support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlertConfig {
    pub scale_days: f64,
    pub threshold: f64,
    pub min_separation_days: usize,
    pub min_support_fraction: f64,
}

impl Default for AlertConfig {
    fn default() -> Self {
        AlertConfig {
            scale_days: 40.0,
            threshold: 0.5,
            min_separation_days: 30,
            min_support_fraction: 0.9,
        }
    }
}

impl AlertConfig {
    pub fn validate(&self) -> Result<(), AlertError> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(AlertError::InvalidConfig(format!(
                "threshold must lie in (0, 1], got {}",
                self.threshold
            )));
        }
        if !(self.scale_days > 0.0) {
            return Err(AlertError::InvalidConfig(format!(
                "scale_days must be positive, got {}",
                self.scale_days
            )));
        }
        if !(0.0..=1.0).contains(&self.min_support_fraction) {
            return Err(AlertError::InvalidConfig(format!(
                "min_support_fraction must lie in [0, 1], got {}",
                self.min_support_fraction
            )));
        }
        Ok(())
    }
}

/// One emitted warning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarningEvent {
    #[serde(rename = "index")]
    pub time_index: usize,
    pub date: NaiveDate,
    #[serde(rename = "power")]
    pub power_at_crossing: f64,
    pub scale_days: f64,
}

/// Upward-crossing detector with debounce.
///
/// An event is emitted at each `i` with `value[i-1] < threshold <= value[i]`
/// and `support_fraction[i] >= min_support_fraction`, unless it falls within
/// `min_separation_days` of the last emitted event. A slice that starts at or
/// above the threshold produces no event until the value drops below and
/// crosses upward again.
pub fn detect_warnings(
    slice: &ScaleSlice,
    config: &AlertConfig,
) -> Result<Vec<WarningEvent>, AlertError> {
    config.validate()?;
    if slice.values.len() != slice.support_fraction.len() {
        return Err(AlertError::LengthMismatch {
            values: slice.values.len(),
            support: slice.support_fraction.len(),
        });
    }
    if let Some(&bad) = slice.values.iter().find(|&&v| v > 1.0 + 1e-9) {
        return Err(AlertError::NotNormalized { value: bad });
    }
    let mut events = Vec::new();
    let mut last_emitted: Option<usize> = None;
    for i in 1..slice.values.len() {
        let crossing = slice.values[i - 1] < config.threshold && config.threshold <= slice.values[i];
        if !crossing || slice.support_fraction[i] < config.min_support_fraction {
            continue;
        }
        if let Some(last) = last_emitted {
            if i - last < config.min_separation_days {
                continue;
            }
        }
        events.push(WarningEvent {
            time_index: i,
            date: slice.start_date + Days::new(i as u64),
            power_at_crossing: slice.values[i],
            scale_days: slice.scale,
        });
        last_emitted = Some(i);
    }
    Ok(events)
}

/// One matched warning/contingency pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventMatch {
    pub warning_date: NaiveDate,
    pub official_date: NaiveDate,
    /// Warning date minus contingency date, in days (negative = early).
    pub lead_days: i64,
}

/// Outcome of matching warnings against official event dates.
#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub matches: Vec<EventMatch>,
    /// Warnings with no official event within the window.
    pub false_alarms: Vec<NaiveDate>,
    /// Official events no warning covered.
    pub misses: Vec<NaiveDate>,
    pub mean_lead_days: Option<f64>,
}

impl MatchReport {
    pub fn n_matches(&self) -> usize {
        self.matches.len()
    }
}

/// Greedy one-to-one matching of warnings to official dates within
/// `±window_days`. Warnings are walked in time order and take the earliest
/// unused official date in range.
pub fn compare_events(
    warnings: &[WarningEvent],
    official: &[NaiveDate],
    window_days: u32,
) -> MatchReport {
    let mut official: Vec<NaiveDate> = official.to_vec();
    official.sort();
    let mut used = vec![false; official.len()];
    let mut matches = Vec::new();
    let mut false_alarms = Vec::new();
    for w in warnings {
        let mut found = None;
        for (i, &o) in official.iter().enumerate() {
            if used[i] {
                continue;
            }
            let lead = (w.date - o).num_days();
            if lead.unsigned_abs() <= window_days as u64 {
                found = Some((i, lead));
                break;
            }
            if o > w.date {
                break; // official dates are sorted; nothing later can be closer
            }
        }
        match found {
            Some((i, lead)) => {
                used[i] = true;
                matches.push(EventMatch {
                    warning_date: w.date,
                    official_date: official[i],
                    lead_days: lead,
                });
            }
            None => false_alarms.push(w.date),
        }
    }
    let misses: Vec<NaiveDate> = official
        .iter()
        .zip(&used)
        .filter(|(_, &u)| !u)
        .map(|(&o, _)| o)
        .collect();
    let mean_lead_days = if matches.is_empty() {
        None
    } else {
        Some(matches.iter().map(|m| m.lead_days as f64).sum::<f64>() / matches.len() as f64)
    };
    MatchReport {
        matches,
        false_alarms,
        misses,
        mean_lead_days,
    }
}

/// Official-events file: one ISO date per line, `#` comments and blank lines
/// allowed. The result is sorted.
pub fn read_event_dates(path: &Path) -> Result<Vec<NaiveDate>, AlertError> {
    let text = std::fs::read_to_string(path).map_err(|source| AlertError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut dates = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let date = NaiveDate::parse_from_str(trimmed, "%Y-%m-%d").map_err(|_| {
            AlertError::BadDate {
                line: i + 1,
                text: trimmed.to_string(),
            }
        })?;
        dates.push(date);
    }
    dates.sort();
    Ok(dates)
}
