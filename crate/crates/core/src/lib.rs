//! Causal generalized Morlet wavelet analysis for daily time series.
//!
//! The mother wavelet is a complex oscillation `e^{i sigma}` shaped by a
//! Mittag-Leffler modulation `E_alpha(-|sigma|^alpha)` or its
//! stretched-exponential approximation, optionally truncated to past times
//! only so that every coefficient depends on history alone. On top of the
//! transform the crate derives power and phase scalograms, scale slices, and
//! a threshold early-warning detector for daily series such as air-quality
//! records.
//!
//! - [`mlf`]: numerically robust Mittag-Leffler modulation function
//! - [`kernel`]: the complex wavelet and its effective support
//! - [`series`]: CSV ingestion, gap filling, summary statistics
//! - [`transform`]: the continuous wavelet transform and derived grids
//! - [`alerts`]: threshold-crossing warnings and comparison to labeled events
//! - [`grid_io`]: deterministic CSV and binary grid formats

pub mod alerts;
pub mod grid_io;
pub mod kernel;
pub mod mlf;
pub mod series;
pub mod transform;

pub use alerts::{
    compare_events, detect_warnings, read_event_dates, AlertConfig, AlertError, EventMatch,
    MatchReport, WarningEvent,
};
pub use kernel::{effective_support, psi, KernelError, WaveletParams};
pub use mlf::{mittag_leffler_neg, modulation, MlfError, MlfMode, MlfParams};
pub use series::{
    fill_gaps, load_csv, summary_stats, CsvConfig, GapPolicy, SeriesError, SummaryStats,
    TimeSeries,
};
pub use transform::{
    cwt, phase, power, Normalization, PhaseGrid, PowerGrid, ScaleGrid, ScaleSlice, Scalogram,
    TransformError,
};
