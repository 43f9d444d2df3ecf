//! Discretized continuous wavelet transform over a scale grid, plus the
//! derived power and phase grids and scale slices.
//!
//! Coefficients are computed by direct summation of the sampled kernel
//! against the series (rectangle rule at the daily cadence), truncated at the
//! kernel's effective support. No padding is ever applied: cells near the
//! series boundaries are computed from the available samples only, and
//! `support_fraction` records how much kernel mass was in bounds so that
//! analyses can threshold on it. Scales are processed independently and in
//! parallel; results do not depend on thread scheduling.

use chrono::NaiveDate;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{effective_support, KernelError, WaveletParams};
use crate::mlf::modulation;
use crate::series::TimeSeries;

/// Longest admissible kernel window in samples; wider windows indicate a
/// runaway support radius rather than a meaningful analysis.
const MAX_KERNEL_WINDOW: usize = 50_000_000;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("series still contains gaps; fill gaps before transforming")]
    GappySeries,
    #[error("scale grid is empty")]
    EmptyGrid,
    #[error("invalid scale grid: {0}")]
    InvalidGrid(String),
    #[error("requested scale {requested} lies outside the grid range [{min}, {max}]")]
    ScaleOutOfRange { requested: f64, min: f64, max: f64 },
    #[error("kernel window of {window} samples at scale {scale} exceeds {max} (support radius too large)")]
    WindowTooLarge { scale: f64, window: u64, max: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Ordered set of positive scales, in days.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    scales: Vec<f64>,
}

impl ScaleGrid {
    /// Smallest admissible scale: two samples at the daily cadence.
    pub const MIN_SCALE: f64 = 2.0;

    pub fn new(scales: Vec<f64>) -> Result<Self, TransformError> {
        if scales.is_empty() {
            return Err(TransformError::EmptyGrid);
        }
        if scales[0] < Self::MIN_SCALE {
            return Err(TransformError::InvalidGrid(format!(
                "smallest scale {} is below the floor of {} samples",
                scales[0],
                Self::MIN_SCALE
            )));
        }
        for pair in scales.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(TransformError::InvalidGrid(format!(
                    "scales must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if scales.iter().any(|s| !s.is_finite()) {
            return Err(TransformError::InvalidGrid("non-finite scale".to_string()));
        }
        Ok(ScaleGrid { scales })
    }

    /// `count` logarithmically spaced scales from `min` to `max` inclusive.
    pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Self, TransformError> {
        if count == 0 {
            return Err(TransformError::EmptyGrid);
        }
        if count == 1 {
            return ScaleGrid::new(vec![min]);
        }
        if !(max > min) {
            return Err(TransformError::InvalidGrid(format!(
                "need max > min, got [{min}, {max}]"
            )));
        }
        let log_min = min.ln();
        let step = (max.ln() - log_min) / (count - 1) as f64;
        let mut scales: Vec<f64> = (0..count)
            .map(|i| (log_min + step * i as f64).exp())
            .collect();
        scales[0] = min;
        scales[count - 1] = max;
        ScaleGrid::new(scales)
    }

    /// 64 log-spaced scales from 2 to 1024 days.
    pub fn default_grid() -> Self {
        ScaleGrid::log_spaced(2.0, 1024.0, 64).expect("default grid is valid")
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Index of the grid scale nearest to `scale`, ties toward the smaller
    /// scale. Requests outside `[first, last]` are errors.
    pub fn nearest_index(&self, scale: f64) -> Result<usize, TransformError> {
        let min = self.scales[0];
        let max = self.scales[self.len() - 1];
        if !(scale >= min && scale <= max) {
            return Err(TransformError::ScaleOutOfRange {
                requested: scale,
                min,
                max,
            });
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &s) in self.scales.iter().enumerate() {
            let d = (s - scale).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(best)
    }
}

/// Complex coefficient grid over (time, scale) with truncation metadata.
///
/// Storage is scale-major: each scale's time row is contiguous.
#[derive(Debug, Clone)]
pub struct Scalogram {
    coeffs: Vec<Complex64>,
    support_fraction: Vec<f64>,
    grid: ScaleGrid,
    params: WaveletParams,
    time_anchor: NaiveDate,
    n_times: usize,
}

impl Scalogram {
    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn n_scales(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn params(&self) -> &WaveletParams {
        &self.params
    }

    pub fn time_anchor(&self) -> NaiveDate {
        self.time_anchor
    }

    pub fn coeff(&self, time: usize, scale_idx: usize) -> Complex64 {
        self.coeffs[scale_idx * self.n_times + time]
    }

    pub fn support(&self, time: usize, scale_idx: usize) -> f64 {
        self.support_fraction[scale_idx * self.n_times + time]
    }

    /// Contiguous coefficient row for one scale.
    pub fn coeff_row(&self, scale_idx: usize) -> &[Complex64] {
        &self.coeffs[scale_idx * self.n_times..(scale_idx + 1) * self.n_times]
    }

    pub fn support_row(&self, scale_idx: usize) -> &[f64] {
        &self.support_fraction[scale_idx * self.n_times..(scale_idx + 1) * self.n_times]
    }

    /// Signed phase `atan2(Re, Im)` per cell, scale-major. The folded index
    /// in [`phase`] is what the analyses use; the signed value is kept for
    /// export.
    pub fn signed_phase(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.re.atan2(c.im)).collect()
    }

    pub(crate) fn from_raw(
        coeffs: Vec<Complex64>,
        support_fraction: Vec<f64>,
        grid: ScaleGrid,
        params: WaveletParams,
        time_anchor: NaiveDate,
        n_times: usize,
    ) -> Self {
        debug_assert_eq!(coeffs.len(), n_times * grid.len());
        debug_assert_eq!(support_fraction.len(), n_times * grid.len());
        Scalogram {
            coeffs,
            support_fraction,
            grid,
            params,
            time_anchor,
            n_times,
        }
    }
}

/// Continuous wavelet transform of a gap-free daily series.
///
/// For each time index `u` and scale `s`,
/// `W(u, s) = s^{-1/2} * sum_t conj(psi)((u - t) / s) * x(t)` with the sum
/// truncated to `|u - t| <= s * sigma_max` and, for causal kernels, to
/// `t <= u`.
pub fn cwt(
    series: &TimeSeries,
    grid: &ScaleGrid,
    params: &WaveletParams,
) -> Result<Scalogram, TransformError> {
    params.validate()?;
    if !series.is_gap_free() {
        return Err(TransformError::GappySeries);
    }
    if grid.is_empty() {
        return Err(TransformError::EmptyGrid);
    }
    let sigma_max = effective_support(params)?;
    let n = series.len();
    let mut values = series.values().to_vec();
    if params.remove_mean {
        let mean = values.iter().sum::<f64>() / n as f64;
        for v in &mut values {
            *v -= mean;
        }
    }

    let columns: Result<Vec<(Vec<Complex64>, Vec<f64>)>, TransformError> = grid
        .scales()
        .par_iter()
        .map(|&s| scale_column(&values, s, params, sigma_max))
        .collect();
    let columns = columns?;

    let mut coeffs = Vec::with_capacity(n * grid.len());
    let mut support = Vec::with_capacity(n * grid.len());
    for (c, f) in columns {
        coeffs.extend_from_slice(&c);
        support.extend_from_slice(&f);
    }
    Ok(Scalogram::from_raw(
        coeffs,
        support,
        grid.clone(),
        params.clone(),
        series.start_date(),
        n,
    ))
}

/// One scale's coefficient and support rows.
fn scale_column(
    x: &[f64],
    scale: f64,
    params: &WaveletParams,
    sigma_max: f64,
) -> Result<(Vec<Complex64>, Vec<f64>), TransformError> {
    let n = x.len();
    let window = (scale * sigma_max).floor();
    if !(window >= 0.0) || window > MAX_KERNEL_WINDOW as f64 {
        return Err(TransformError::WindowTooLarge {
            scale,
            window: window as u64,
            max: MAX_KERNEL_WINDOW,
        });
    }
    let k_full = window as usize; // lags 0..=k_full carry kernel mass
    let k_eff = k_full.min(n - 1); // lags that can touch the series
    let inv_s = 1.0 / scale;
    let norm = 1.0 / scale.sqrt();

    // Sampled kernel conj(psi)(k/s) for k = 0..=k_eff and absolute-mass
    // prefix sums over the full truncation window 0..=k_full.
    let mut ker: Vec<Complex64> = Vec::with_capacity(k_eff + 1);
    let mut mass_prefix: Vec<f64> = Vec::with_capacity(k_full + 2);
    mass_prefix.push(0.0);
    let mut acc = 0.0;
    for k in 0..=k_full {
        let sigma = k as f64 * inv_s;
        let m = modulation(&params.mlf, sigma).map_err(KernelError::from)?;
        acc += m.abs();
        mass_prefix.push(acc);
        if k <= k_eff {
            let (sin, cos) = sigma.sin_cos();
            ker.push(Complex64::new(m * cos, -m * sin));
        }
    }
    let causal_mass = mass_prefix[k_full + 1];

    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let mut support = vec![0.0_f64; n];

    if params.causal {
        for u in 0..n {
            let k_hi = k_eff.min(u);
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..=k_hi {
                let xv = x[u - k];
                let kv = ker[k];
                re += kv.re * xv;
                im += kv.im * xv;
            }
            coeffs[u] = Complex64::new(norm * re, norm * im);
            support[u] = mass_prefix[k_full.min(u) + 1] / causal_mass;
        }
    } else {
        let total_mass = 2.0 * causal_mass - mass_prefix[1];
        for u in 0..n {
            let k_past = k_eff.min(u);
            let k_future = k_eff.min(n - 1 - u);
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..=k_past {
                let xv = x[u - k];
                let kv = ker[k];
                re += kv.re * xv;
                im += kv.im * xv;
            }
            // conj(psi) at negative sigma is the conjugate of the positive lag
            for k in 1..=k_future {
                let xv = x[u + k];
                let kv = ker[k];
                re += kv.re * xv;
                im -= kv.im * xv;
            }
            coeffs[u] = Complex64::new(norm * re, norm * im);
            let in_mass = mass_prefix[k_full.min(u) + 1]
                + (mass_prefix[k_full.min(n - 1 - u) + 1] - mass_prefix[1]);
            support[u] = in_mass / total_mass;
        }
    }
    Ok((coeffs, support))
}

/// Power normalization policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Divide by the maximum over the whole grid (relative 0..1 scale).
    GlobalMax,
    /// Divide each scale row by its own maximum.
    PerScaleMax,
    /// Raw magnitudes.
    None,
}

/// Coefficient magnitudes, optionally normalized. Scale-major like
/// [`Scalogram`].
#[derive(Debug, Clone)]
pub struct PowerGrid {
    values: Vec<f64>,
    support_fraction: Vec<f64>,
    grid: ScaleGrid,
    normalization: Normalization,
    /// Set when a requested normalization found a zero maximum; the affected
    /// values are left raw (zero) instead of divided.
    degenerate: bool,
    time_anchor: NaiveDate,
    n_times: usize,
}

impl PowerGrid {
    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn n_scales(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn time_anchor(&self) -> NaiveDate {
        self.time_anchor
    }

    pub fn value(&self, time: usize, scale_idx: usize) -> f64 {
        self.values[scale_idx * self.n_times + time]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale_row(&self, scale_idx: usize) -> &[f64] {
        &self.values[scale_idx * self.n_times..(scale_idx + 1) * self.n_times]
    }

    pub fn support_row(&self, scale_idx: usize) -> &[f64] {
        &self.support_fraction[scale_idx * self.n_times..(scale_idx + 1) * self.n_times]
    }

    /// Time row at the grid scale nearest to `scale`.
    pub fn scale_slice(&self, scale: f64) -> Result<ScaleSlice, TransformError> {
        let idx = self.grid.nearest_index(scale)?;
        Ok(ScaleSlice {
            requested: scale,
            scale: self.grid.scales()[idx],
            scale_index: idx,
            values: self.scale_row(idx).to_vec(),
            support_fraction: self.support_row(idx).to_vec(),
            start_date: self.time_anchor,
        })
    }
}

/// Folded phase index `atan(|Re| / |Im|)` in `[0, pi/2]`. Scale-major.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    values: Vec<f64>,
    /// Cells where both parts were zero; reported as 0 and flagged.
    undefined: Vec<bool>,
    support_fraction: Vec<f64>,
    grid: ScaleGrid,
    time_anchor: NaiveDate,
    n_times: usize,
}

impl PhaseGrid {
    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn n_scales(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn time_anchor(&self) -> NaiveDate {
        self.time_anchor
    }

    pub fn value(&self, time: usize, scale_idx: usize) -> f64 {
        self.values[scale_idx * self.n_times + time]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_undefined(&self, time: usize, scale_idx: usize) -> bool {
        self.undefined[scale_idx * self.n_times + time]
    }

    pub fn scale_row(&self, scale_idx: usize) -> &[f64] {
        &self.values[scale_idx * self.n_times..(scale_idx + 1) * self.n_times]
    }

    pub fn support_row(&self, scale_idx: usize) -> &[f64] {
        &self.support_fraction[scale_idx * self.n_times..(scale_idx + 1) * self.n_times]
    }

    /// Time row at the grid scale nearest to `scale`.
    pub fn scale_slice(&self, scale: f64) -> Result<ScaleSlice, TransformError> {
        let idx = self.grid.nearest_index(scale)?;
        Ok(ScaleSlice {
            requested: scale,
            scale: self.grid.scales()[idx],
            scale_index: idx,
            values: self.scale_row(idx).to_vec(),
            support_fraction: self.support_row(idx).to_vec(),
            start_date: self.time_anchor,
        })
    }
}

/// One grid row over time at a chosen scale.
#[derive(Debug, Clone)]
pub struct ScaleSlice {
    /// Scale that was asked for.
    pub requested: f64,
    /// Grid scale actually returned.
    pub scale: f64,
    pub scale_index: usize,
    pub values: Vec<f64>,
    pub support_fraction: Vec<f64>,
    pub start_date: NaiveDate,
}

/// Coefficient magnitudes under the chosen normalization.
///
/// A zero maximum (all-zero input) leaves the values raw and sets the
/// degenerate flag rather than dividing.
pub fn power(scalogram: &Scalogram, normalization: Normalization) -> PowerGrid {
    let n_times = scalogram.n_times();
    let n_scales = scalogram.n_scales();
    let mut values: Vec<f64> = scalogram.coeffs.iter().map(|c| c.norm()).collect();
    let mut degenerate = false;
    match normalization {
        Normalization::GlobalMax => {
            let max = values.iter().cloned().fold(0.0_f64, f64::max);
            if max > 0.0 {
                for v in &mut values {
                    *v /= max;
                }
            } else {
                degenerate = true;
            }
        }
        Normalization::PerScaleMax => {
            for si in 0..n_scales {
                let row = &mut values[si * n_times..(si + 1) * n_times];
                let max = row.iter().cloned().fold(0.0_f64, f64::max);
                if max > 0.0 {
                    for v in row {
                        *v /= max;
                    }
                } else {
                    degenerate = true;
                }
            }
        }
        Normalization::None => {}
    }
    PowerGrid {
        values,
        support_fraction: scalogram.support_fraction.clone(),
        grid: scalogram.grid.clone(),
        normalization,
        degenerate,
        time_anchor: scalogram.time_anchor,
        n_times,
    }
}

/// Folded phase `atan(|Re| / |Im|)`: `pi/2` for a purely even response,
/// 0 for a purely odd one. Zero coefficients report 0 and are flagged.
pub fn phase(scalogram: &Scalogram) -> PhaseGrid {
    let mut values = Vec::with_capacity(scalogram.coeffs.len());
    let mut undefined = Vec::with_capacity(scalogram.coeffs.len());
    for c in &scalogram.coeffs {
        let re = c.re.abs();
        let im = c.im.abs();
        if im == 0.0 {
            if re == 0.0 {
                values.push(0.0);
                undefined.push(true);
            } else {
                values.push(std::f64::consts::FRAC_PI_2);
                undefined.push(false);
            }
        } else {
            values.push((re / im).atan());
            undefined.push(false);
        }
    }
    PhaseGrid {
        values,
        undefined,
        support_fraction: scalogram.support_fraction.clone(),
        grid: scalogram.grid.clone(),
        time_anchor: scalogram.time_anchor,
        n_times: scalogram.n_times,
    }
}
