use thiserror::Error;

/// Errors produced by signal construction, filter design, and decomposition.
#[derive(Debug, Error)]
pub enum Error {
    /// A two-tone frequency outside the open interval (0, 1).
    #[error("invalid frequency {0}: the low-frequency tone must lie strictly between 0 and 1")]
    InvalidFrequency(f64),

    /// Fewer samples than the operation can work with.
    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// Sample content failed validation (non-finite values, rate/count mismatch).
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    /// Differentiation order too high for the signal length.
    #[error("derivative order {order} too large for {len} samples (need len > 2*order)")]
    OrderTooLarge { order: usize, len: usize },

    /// Extension pad longer than the signal itself.
    #[error("pad length {pad} exceeds signal length {len}")]
    PadTooLarge { pad: usize, len: usize },

    /// Filter half-length outside the accepted range.
    #[error("invalid filter length: {0}")]
    InvalidLength(String),

    /// Filter taps violate symmetry, nonnegativity, or unit mass.
    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    /// Filter support does not fit inside the working period.
    #[error("filter too long: support {support} exceeds period {period}")]
    FilterTooLong { support: usize, period: usize },

    /// The spectrum of a transfer row was not numerically real.
    #[error("filter spectrum has imaginary residue {0:e} above tolerance; transfer row is not symmetric")]
    SpectrumNotReal(f64),

    /// Spectrum is monotone over positive bins, so no zero can be placed.
    #[error("no spectral minimum: spectrum is monotone over positive bins up to Nyquist")]
    NoSpectralMinimum,

    /// Subtracting the spectral-minimum value would drive a tap negative.
    #[error(
        "negativity violation: spectral minimum {eps:e} is not below the central tap {center:e}"
    )]
    NegativityViolation { eps: f64, center: f64 },

    /// Inner-loop contraction hypothesis violated by the filter spectrum.
    #[error("non-convergent filter: eigenvalue {value} at bin {bin} leaves the stability range")]
    NonConvergent { bin: usize, value: f64 },

    /// Too few interior extrema to infer a mask length.
    #[error("too few extrema: found {found}, need at least 2")]
    TooFewExtrema { found: usize },

    /// No scaling of the base filter places its first spectral minimum on the target bin.
    #[error("unattainable zero: no mask length puts the first spectral minimum at bin {target}")]
    UnattainableZero { target: usize },

    /// The target frequency maps to a bin outside [1, period/2].
    #[error("target bin {bin} outside the usable range 1..={max} for this period")]
    TargetOutOfRange { bin: usize, max: usize },

    /// The mask strategy produced an unusable length for the working period.
    #[error("mask selection failed: {0}")]
    MaskSelectionFailed(String),

    /// c1 is undefined when the low-frequency tone has zero amplitude.
    #[error("zero denominator: c1 is undefined for a two-tone with amplitude 0")]
    ZeroDenominator,

    /// Malformed CSV or manifest content.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
