//! Signal decomposition by iterative filtering.
//!
//! The library splits a uniformly sampled signal into oscillatory components
//! by repeatedly applying a circulant low-pass filter and subtracting the
//! smoothed part, peeling off one component per outer step. Filters are
//! symmetric, non-negative masks whose spectra can be reshaped to place an
//! exact zero at a chosen frequency bin, which is what makes clean two-tone
//! separation possible.

pub mod benchmark;
pub mod engine;
pub mod error;
mod fft;
pub mod filters;
pub mod io;
pub mod mask;
pub mod signal;

pub use benchmark::{
    c1_metric, critical_curves, sweep_grid, C1Grid, CellDiagnostics, CriticalCurve, FrequencyMode,
    GridMetadata, SweepConfig, SweepReport,
};
pub use engine::{
    compute_n0_bound, decompose, inner_loop_direct_powered, inner_loop_direct_projection,
    inner_loop_iterative, moving_average_step, spectral_sup_norm, Boundary, DecompositionConfig,
    DecompositionResult, ImfDiagnostics, Mode, PadLength, StopReason,
};
pub use error::{Error, Result};
pub use filters::{
    build_base_filter, double_convolve, enforce_spectral_zero, filter_spectrum, scale_filter,
    Filter, FilterShape, FilterSpectrum,
};
pub use mask::{
    dominant_bin, ideal_base, ideal_mask, mask_from_derivative, mask_from_extrema, MaskStrategy,
    DEFAULT_NU,
};
pub use signal::{
    count_extrema, extend_signal, finite_difference, generate_two_tone, ExtensionMode, Signal,
    TwoToneParams,
};
