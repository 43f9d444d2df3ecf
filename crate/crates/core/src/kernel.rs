//! The complex generalized Morlet wavelet `psi(sigma) = M(sigma) e^{i sigma}`
//! with optional causal truncation (zero for `sigma < 0`), and the effective
//! support radius used to bound convolution windows.

use num_complex::Complex64;
use thiserror::Error;

use crate::mlf::{modulation, MlfError, MlfParams};

/// Scan limit for the support search; modulations that stay above the cutoff
/// out to here are treated as unbounded.
const SUPPORT_SEARCH_LIMIT: f64 = 1e9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum KernelError {
    #[error(transparent)]
    Mlf(#[from] MlfError),
    #[error("invalid wavelet parameter: {0}")]
    InvalidParam(String),
    #[error("modulation stays at or above {eps} out to sigma = {limit:e}; no finite support radius")]
    SupportUnbounded { eps: f64, limit: f64 },
}

/// Wavelet shape parameters shared by the kernel and the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletParams {
    /// Exponent of the modulation; larger values decay faster in the tails.
    pub alpha: f64,
    /// Zero the kernel for `sigma < 0` so coefficients use past samples only.
    pub causal: bool,
    pub mlf: MlfParams,
    /// Modulation cutoff defining the truncation radius `sigma_max`.
    pub support_eps: f64,
    /// Subtract the series mean before transforming. The kernel is not
    /// zero-mean, so an unremoved offset dominates global normalization.
    /// Note that the mean is a whole-series quantity: strict sample-level
    /// causality tests should switch this off.
    pub remove_mean: bool,
}

impl WaveletParams {
    pub fn new(alpha: f64, causal: bool) -> Self {
        WaveletParams {
            alpha,
            causal,
            mlf: MlfParams::auto(alpha),
            support_eps: 1e-6,
            remove_mean: true,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        self.mlf.validate()?;
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(KernelError::InvalidParam(format!(
                "alpha must be a positive finite real, got {}",
                self.alpha
            )));
        }
        if self.alpha != self.mlf.alpha {
            return Err(KernelError::InvalidParam(format!(
                "wavelet alpha {} disagrees with modulation alpha {}",
                self.alpha, self.mlf.alpha
            )));
        }
        if !(self.support_eps > 0.0 && self.support_eps < 1.0) {
            return Err(KernelError::InvalidParam(format!(
                "support_eps must lie in (0, 1), got {}",
                self.support_eps
            )));
        }
        Ok(())
    }
}

impl Default for WaveletParams {
    /// The headline configuration: `alpha = 2`, causal, stretched modulation.
    fn default() -> Self {
        WaveletParams::new(2.0, true)
    }
}

/// Kernel value at dimensionless time `sigma`.
///
/// Non-causal: `M(sigma) (cos sigma + i sin sigma)`. Causal: the same for
/// `sigma >= 0` (the present instant included), zero for `sigma < 0`.
pub fn psi(params: &WaveletParams, sigma: f64) -> Result<Complex64, KernelError> {
    params.validate()?;
    if params.causal && sigma < 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = modulation(&params.mlf, sigma)?;
    let (sin, cos) = sigma.sin_cos();
    Ok(Complex64::new(m * cos, m * sin))
}

/// Truncation radius: the smallest `sigma` on the search path where the
/// modulation drops below `support_eps`.
///
/// A coarse doubling scan brackets the crossing, then bisection refines it.
/// Exactness is not required for a truncation radius, only a reproducible
/// value slightly on the far side of the crossing.
pub fn effective_support(params: &WaveletParams) -> Result<f64, KernelError> {
    params.validate()?;
    let eps = params.support_eps;
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    loop {
        if modulation(&params.mlf, hi)? < eps {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > SUPPORT_SEARCH_LIMIT {
            return Err(KernelError::SupportUnbounded {
                eps,
                limit: SUPPORT_SEARCH_LIMIT,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if modulation(&params.mlf, mid)? < eps {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-9 * hi.max(1.0) {
            break;
        }
    }
    Ok(hi)
}
