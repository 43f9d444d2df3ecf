//! Daily time-series ingestion, gap filling, and summary statistics.
//!
//! A [`TimeSeries`] is a uniformly sampled daily record with an explicit
//! missing-value mask and a calendar anchor. CSV loading densifies absent
//! calendar days into masked gaps; [`fill_gaps`] interpolates them under
//! configurable run-length and fraction guards.

use std::fmt;
use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {reason}")]
    Parse { row: usize, reason: String },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("row {row}: date {date} is not after the previous date {prev}")]
    NonMonotoneDates {
        row: usize,
        date: NaiveDate,
        prev: NaiveDate,
    },
    #[error("no data rows")]
    EmptyFile,
    #[error("series needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("values and mask lengths differ ({values} vs {mask})")]
    LengthMismatch { values: usize, mask: usize },
    #[error("observed value at index {0} is not finite")]
    NonFiniteValue(usize),
    #[error("gap run of {run} samples at index {start} exceeds the maximum of {max_run}")]
    GapRunTooLong {
        start: usize,
        run: usize,
        max_run: usize,
    },
    #[error("gap fraction {fraction:.4} exceeds the maximum of {max_fraction:.4}")]
    GapFractionExceeded { fraction: f64, max_fraction: f64 },
    #[error("series has no observed values")]
    AllMissing,
    #[error("series still contains gaps; fill gaps first")]
    NotGapFree,
}

/// Uniformly sampled daily values with a missing-value mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    mask: Vec<bool>, // true = observed
    start_date: NaiveDate,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, mask: Vec<bool>, start_date: NaiveDate) -> Result<Self, SeriesError> {
        if values.len() != mask.len() {
            return Err(SeriesError::LengthMismatch {
                values: values.len(),
                mask: mask.len(),
            });
        }
        if values.len() < 2 {
            return Err(SeriesError::TooShort(values.len()));
        }
        for (i, (&v, &observed)) in values.iter().zip(&mask).enumerate() {
            if observed && !v.is_finite() {
                return Err(SeriesError::NonFiniteValue(i));
            }
        }
        Ok(TimeSeries {
            values,
            mask,
            start_date,
        })
    }

    /// A fully observed series.
    pub fn gap_free(values: Vec<f64>, start_date: NaiveDate) -> Result<Self, SeriesError> {
        let mask = vec![true; values.len()];
        TimeSeries::new(values, mask, start_date)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn is_gap_free(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    pub fn gap_fraction(&self) -> f64 {
        let gaps = self.mask.iter().filter(|&&m| !m).count();
        gaps as f64 / self.len() as f64
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + Days::new(index as u64)
    }
}

/// CSV column selection and missing-value policy.
#[derive(Debug, Clone)]
pub struct CsvConfig {
    pub delimiter: u8,
    pub date_column: String,
    pub value_column: String,
    /// `chrono` format string for the date column.
    pub date_format: String,
    /// Values compared bit-exactly against these markers become gaps.
    pub sentinels: Vec<f64>,
    /// Treat negative values as missing (concentrations cannot be negative).
    pub negative_as_missing: bool,
}

impl Default for CsvConfig {
    fn default() -> Self {
        CsvConfig {
            delimiter: b',',
            date_column: "date".to_string(),
            value_column: "value".to_string(),
            date_format: "%Y-%m-%d".to_string(),
            sentinels: Vec::new(),
            negative_as_missing: true,
        }
    }
}

/// Parse a daily CSV into a series, densifying absent calendar days as gaps.
pub fn load_csv(path: &Path, cfg: &CsvConfig) -> Result<TimeSeries, SeriesError> {
    let file = std::fs::File::open(path).map_err(|source| SeriesError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| SeriesError::Parse {
            row: 1,
            reason: e.to_string(),
        })?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h == cfg.date_column)
        .ok_or_else(|| SeriesError::MissingColumn(cfg.date_column.clone()))?;
    let value_idx = headers
        .iter()
        .position(|h| h == cfg.value_column)
        .ok_or_else(|| SeriesError::MissingColumn(cfg.value_column.clone()))?;

    let mut values: Vec<f64> = Vec::new();
    let mut mask: Vec<bool> = Vec::new();
    let mut start: Option<NaiveDate> = None;
    let mut prev: Option<NaiveDate> = None;

    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header
        let record = record.map_err(|e| SeriesError::Parse {
            row,
            reason: e.to_string(),
        })?;
        let date_str = record.get(date_idx).ok_or_else(|| SeriesError::Parse {
            row,
            reason: "missing date field".to_string(),
        })?;
        let date = NaiveDate::parse_from_str(date_str, &cfg.date_format).map_err(|e| {
            SeriesError::Parse {
                row,
                reason: format!("bad date {date_str:?}: {e}"),
            }
        })?;
        if let Some(p) = prev {
            if date <= p {
                return Err(SeriesError::NonMonotoneDates {
                    row,
                    date,
                    prev: p,
                });
            }
            let missing_days = (date - p).num_days() - 1;
            for _ in 0..missing_days {
                values.push(f64::NAN);
                mask.push(false);
            }
        } else {
            start = Some(date);
        }
        prev = Some(date);

        let raw = record.get(value_idx).unwrap_or("");
        let parsed = parse_value(raw, cfg).map_err(|reason| SeriesError::Parse { row, reason })?;
        match parsed {
            Some(v) => {
                values.push(v);
                mask.push(true);
            }
            None => {
                values.push(f64::NAN);
                mask.push(false);
            }
        }
    }

    let start = start.ok_or(SeriesError::EmptyFile)?;
    TimeSeries::new(values, mask, start)
}

fn parse_value(raw: &str, cfg: &CsvConfig) -> Result<Option<f64>, String> {
    if raw.is_empty() || raw.eq_ignore_ascii_case("nan") || raw.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    let v: f64 = raw
        .parse()
        .map_err(|e| format!("bad value {raw:?}: {e}"))?;
    if !v.is_finite() {
        return Ok(None);
    }
    if cfg.sentinels.contains(&v) {
        return Ok(None);
    }
    if cfg.negative_as_missing && v < 0.0 {
        return Ok(None);
    }
    Ok(Some(v))
}

/// Guards for [`fill_gaps`].
#[derive(Debug, Clone, Copy)]
pub struct GapPolicy {
    /// Longest admissible run of consecutive gaps.
    pub max_run: usize,
    /// Largest admissible fraction of missing samples.
    pub max_fraction: f64,
}

impl Default for GapPolicy {
    fn default() -> Self {
        GapPolicy {
            max_run: 12,
            max_fraction: 0.005,
        }
    }
}

/// Fill gaps by linear interpolation between the nearest observed neighbors;
/// leading and trailing gaps extend the nearest observation. Observed values
/// pass through bit-unchanged, so the operation is idempotent.
pub fn fill_gaps(series: &TimeSeries, policy: &GapPolicy) -> Result<TimeSeries, SeriesError> {
    let n = series.len();
    let fraction = series.gap_fraction();
    if fraction > policy.max_fraction {
        return Err(SeriesError::GapFractionExceeded {
            fraction,
            max_fraction: policy.max_fraction,
        });
    }
    let mask = series.mask();
    let mut i = 0;
    while i < n {
        if !mask[i] {
            let start = i;
            while i < n && !mask[i] {
                i += 1;
            }
            let run = i - start;
            if run > policy.max_run {
                return Err(SeriesError::GapRunTooLong {
                    start,
                    run,
                    max_run: policy.max_run,
                });
            }
        } else {
            i += 1;
        }
    }
    if series.is_gap_free() {
        return Ok(series.clone());
    }
    if !mask.iter().any(|&m| m) {
        return Err(SeriesError::AllMissing);
    }

    let src = series.values();
    let mut out = src.to_vec();
    let mut i = 0;
    while i < n {
        if mask[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !mask[i] {
            i += 1;
        }
        let end = i; // first observed index after the run, or n
        let left = start.checked_sub(1).filter(|&l| mask[l]);
        let right = if end < n { Some(end) } else { None };
        match (left, right) {
            (Some(l), Some(r)) => {
                let span = (r - l) as f64;
                for j in start..end {
                    let w = (j - l) as f64 / span;
                    out[j] = src[l] + w * (src[r] - src[l]);
                }
            }
            (None, Some(r)) => {
                for j in start..end {
                    out[j] = src[r];
                }
            }
            (Some(l), None) => {
                for j in start..end {
                    out[j] = src[l];
                }
            }
            (None, None) => unreachable!("all-missing handled above"),
        }
    }
    TimeSeries::gap_free(out, series.start_date())
}

/// Population moments of a gap-free series.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Standardized third moment; `None` for a constant series.
    pub skewness: Option<f64>,
    /// Fourth moment over variance squared, minus 3; `None` for a constant series.
    pub excess_kurtosis: Option<f64>,
}

impl fmt::Display for SummaryStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn opt(v: Option<f64>) -> String {
            v.map_or("undefined".to_string(), |x| format!("{x:.6}"))
        }
        writeln!(f, "n: {}", self.n)?;
        writeln!(f, "mean: {:.6}", self.mean)?;
        writeln!(f, "std: {:.6}", self.std)?;
        writeln!(f, "skewness: {}", opt(self.skewness))?;
        write!(f, "excess_kurtosis: {}", opt(self.excess_kurtosis))
    }
}

/// Population mean, standard deviation, skewness, and excess kurtosis.
pub fn summary_stats(series: &TimeSeries) -> Result<SummaryStats, SeriesError> {
    if !series.is_gap_free() {
        return Err(SeriesError::NotGapFree);
    }
    let n = series.len();
    let values = series.values();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n as f64;
    m3 /= n as f64;
    m4 /= n as f64;
    let std = m2.sqrt();
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    Ok(SummaryStats {
        n,
        mean,
        std,
        skewness,
        excess_kurtosis,
    })
}
