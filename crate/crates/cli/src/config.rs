//! Flat-key TOML configuration: every key mirrors a long flag, and explicit
//! flags always win over file values.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    // csv ingestion
    #[serde(rename = "date-column")]
    pub date_column: Option<String>,
    #[serde(rename = "value-column")]
    pub value_column: Option<String>,
    pub delimiter: Option<String>,
    #[serde(rename = "date-format")]
    pub date_format: Option<String>,
    #[serde(rename = "sentinel")]
    pub sentinels: Option<Vec<f64>>,
    #[serde(rename = "keep-negative")]
    pub keep_negative: Option<bool>,
    #[serde(rename = "max-gap-run")]
    pub max_gap_run: Option<usize>,
    #[serde(rename = "max-gap-fraction")]
    pub max_gap_fraction: Option<f64>,
    // wavelet
    pub alpha: Option<f64>,
    pub causal: Option<bool>,
    #[serde(rename = "mlf-mode")]
    pub mlf_mode: Option<String>,
    #[serde(rename = "support-eps")]
    pub support_eps: Option<f64>,
    pub detrend: Option<bool>,
    #[serde(rename = "scales-min")]
    pub scales_min: Option<f64>,
    #[serde(rename = "scales-max")]
    pub scales_max: Option<f64>,
    #[serde(rename = "scales-count")]
    pub scales_count: Option<usize>,
    // derived grids and alerts
    pub normalize: Option<String>,
    #[serde(rename = "slice-scale")]
    pub slice_scale: Option<f64>,
    pub threshold: Option<f64>,
    #[serde(rename = "min-separation")]
    pub min_separation: Option<usize>,
    #[serde(rename = "min-support")]
    pub min_support: Option<f64>,
    #[serde(rename = "window-days")]
    pub window_days: Option<u32>,
    // stats
    pub format: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}
