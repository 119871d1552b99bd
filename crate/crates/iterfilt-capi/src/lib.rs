//! C bindings for the decomposition library.
//!
//! Conventions: every object is an opaque handle created and destroyed by
//! this interface; every fallible call returns an [`IterfiltStatus`] and the
//! failure message is retrievable with [`iterfilt_last_error_message`]
//! (thread-local, valid until the next failing call on the same thread).
//! All entry points catch panics, so nothing unwinds across the boundary.
//!
//! Safety contract, uniform across the surface (so the functions don't each
//! repeat it): handle arguments must be pointers previously returned by this
//! interface and not yet destroyed; out-parameters must point to writable
//! storage; buffer pointers must cover the stated length. Null handles are
//! detected and reported, dangling ones cannot be.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use iterfilt::benchmark::c1_metric;
use iterfilt::engine::{decompose, DecompositionConfig, DecompositionResult, Mode, StopReason};
use iterfilt::error::Error;
use iterfilt::filters::FilterShape;
use iterfilt::mask::{MaskStrategy, DEFAULT_NU};
use iterfilt::signal::{generate_two_tone, Signal, TwoToneParams};

/// Result of a call. Anything but `Ok` leaves a message for
/// [`iterfilt_last_error_message`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IterfiltStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments failed validation (sizes, ranges, non-finite values).
    InvalidArgument = 2,
    /// The computation itself failed (no admissible mask, unstable filter…).
    ComputeFailed = 3,
    IoFailed = 4,
    /// An index argument was out of range for the object.
    IndexOutOfRange = 5,
    /// An internal invariant broke; the library state is still consistent.
    Panicked = 6,
}

/// How the smoothing loop is executed.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub enum IterfiltMode {
    /// Step until the increment norm falls below delta.
    Iterative = 0,
    /// Jump to the fixed point: keep only the filter's spectral kernel.
    Projection = 1,
    /// Apply a fixed number of steps in closed form.
    Powered = 2,
}

/// Base window for the smoothing filter.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub enum IterfiltShape {
    Triangular = 0,
    BSpline3 = 1,
}

/// Why a decomposition stopped extracting components.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IterfiltStop {
    /// The residual has fewer than two interior extrema.
    ExtremaGuard = 0,
    /// The residual norm hit the floor and was folded into the last component.
    NormFloor = 1,
    /// Mask selection failed after at least one component was extracted.
    MaskFailed = 2,
    /// The component cap was reached.
    ComponentCap = 3,
}

pub struct IterfiltSignal(Signal);
pub struct IterfiltConfig(DecompositionConfig);
pub struct IterfiltDecomposition(DecompositionResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', "?")).unwrap_or_else(|_| CString::default());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(status: IterfiltStatus, message: &str) -> IterfiltStatus {
    set_error(message);
    status
}

fn fail_with(err: &Error) -> IterfiltStatus {
    let status = match err {
        Error::InvalidFrequency(_)
        | Error::InvalidSize(_)
        | Error::InvalidSignal(_)
        | Error::OrderTooLarge { .. }
        | Error::PadTooLarge { .. }
        | Error::InvalidLength(_)
        | Error::InvalidFilter(_)
        | Error::ZeroDenominator
        | Error::Parse(_) => IterfiltStatus::InvalidArgument,
        Error::Io(_) => IterfiltStatus::IoFailed,
        _ => IterfiltStatus::ComputeFailed,
    };
    fail(status, &err.to_string())
}

/// Runs the body with a panic guard so errors never unwind into C.
fn guarded(body: impl FnOnce() -> IterfiltStatus) -> IterfiltStatus {
    catch_unwind(AssertUnwindSafe(body))
        .unwrap_or_else(|_| fail(IterfiltStatus::Panicked, "internal panic"))
}

macro_rules! require {
    ($ptr:expr) => {
        if $ptr.is_null() {
            return fail(
                IterfiltStatus::NullPointer,
                concat!(stringify!($ptr), " must not be null"),
            );
        }
    };
}

fn boxed<T>(out: *mut *mut T, value: T) {
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message describing the most recent failure on this thread (empty string
/// if none). The pointer stays valid until the next failing call here.
#[no_mangle]
pub extern "C" fn iterfilt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn iterfilt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// --- signals ---------------------------------------------------------------

/// Wraps `len` samples (copied) at the given sample rate into a new handle.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_signal_create(
    samples: *const f64,
    len: usize,
    sample_rate: f64,
    out: *mut *mut IterfiltSignal,
) -> IterfiltStatus {
    guarded(|| {
        require!(samples);
        require!(out);
        let data = unsafe { slice::from_raw_parts(samples, len) }.to_vec();
        match Signal::new(data, sample_rate) {
            Ok(signal) => {
                boxed(out, IterfiltSignal(signal));
                IterfiltStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Samples a unit fast tone plus `amplitude * cos(2π * frequency * t + phase)`
/// over `duration` seconds at `sample_rate` Hz.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_signal_two_tone(
    amplitude: f64,
    frequency: f64,
    phase: f64,
    duration: f64,
    sample_rate: f64,
    out: *mut *mut IterfiltSignal,
) -> IterfiltStatus {
    guarded(|| {
        require!(out);
        let built = TwoToneParams::new(amplitude, frequency, phase)
            .and_then(|params| generate_two_tone(&params, duration, sample_rate));
        match built {
            Ok(signal) => {
                boxed(out, IterfiltSignal(signal));
                IterfiltStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_signal_len(
    signal: *const IterfiltSignal,
    out: *mut usize,
) -> IterfiltStatus {
    guarded(|| {
        require!(signal);
        require!(out);
        unsafe { *out = (*signal).0.samples().len() };
        IterfiltStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_signal_sample_rate(
    signal: *const IterfiltSignal,
    out: *mut f64,
) -> IterfiltStatus {
    guarded(|| {
        require!(signal);
        require!(out);
        unsafe { *out = (*signal).0.sample_rate() };
        IterfiltStatus::Ok
    })
}

/// Borrows the sample buffer. The pointer is valid while the handle lives
/// and must not be freed by the caller.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_signal_data(
    signal: *const IterfiltSignal,
    out_samples: *mut *const f64,
    out_len: *mut usize,
) -> IterfiltStatus {
    guarded(|| {
        require!(signal);
        require!(out_samples);
        require!(out_len);
        let samples = unsafe { (*signal).0.samples() };
        unsafe {
            *out_samples = samples.as_ptr();
            *out_len = samples.len();
        }
        IterfiltStatus::Ok
    })
}

/// Frees a signal handle. Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_signal_destroy(signal: *mut IterfiltSignal) {
    if !signal.is_null() {
        drop(unsafe { Box::from_raw(signal) });
    }
}

// --- configuration ----------------------------------------------------------

/// Benchmark-calibrated defaults with the adaptive extrema mask.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_standard(out: *mut *mut IterfiltConfig) -> IterfiltStatus {
    guarded(|| {
        require!(out);
        boxed(
            out,
            IterfiltConfig(DecompositionConfig::standard(MaskStrategy::extrema())),
        );
        IterfiltStatus::Ok
    })
}

/// Extreme-iteration preset (delta 1e-20, ten million closed-form steps).
#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_stress(out: *mut *mut IterfiltConfig) -> IterfiltStatus {
    guarded(|| {
        require!(out);
        boxed(
            out,
            IterfiltConfig(DecompositionConfig::stress(MaskStrategy::extrema())),
        );
        IterfiltStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_set_delta(
    config: *mut IterfiltConfig,
    delta: f64,
) -> IterfiltStatus {
    guarded(|| {
        require!(config);
        unsafe { (*config).0.delta = delta };
        IterfiltStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_set_max_iterations(
    config: *mut IterfiltConfig,
    max_iterations: u64,
) -> IterfiltStatus {
    guarded(|| {
        require!(config);
        unsafe { (*config).0.max_iterations = max_iterations };
        IterfiltStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_set_max_components(
    config: *mut IterfiltConfig,
    max_components: usize,
) -> IterfiltStatus {
    guarded(|| {
        require!(config);
        unsafe { (*config).0.max_imfs = max_components };
        IterfiltStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_set_mode(
    config: *mut IterfiltConfig,
    mode: IterfiltMode,
) -> IterfiltStatus {
    guarded(|| {
        require!(config);
        let mode = match mode {
            IterfiltMode::Iterative => Mode::Iterative,
            IterfiltMode::Projection => Mode::DirectProjection,
            IterfiltMode::Powered => Mode::DirectPowered,
        };
        unsafe { (*config).0.mode = mode };
        IterfiltStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_set_filter_shape(
    config: *mut IterfiltConfig,
    shape: IterfiltShape,
) -> IterfiltStatus {
    guarded(|| {
        require!(config);
        let shape = match shape {
            IterfiltShape::Triangular => FilterShape::Triangular,
            IterfiltShape::BSpline3 => FilterShape::BSpline3,
        };
        unsafe { (*config).0.filter_shape = shape };
        IterfiltStatus::Ok
    })
}

/// Adaptive mask sized from the residual's extrema count. Pass a
/// non-positive `nu` to keep the calibrated default.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_set_mask_extrema(
    config: *mut IterfiltConfig,
    nu: f64,
) -> IterfiltStatus {
    guarded(|| {
        require!(config);
        let nu = if nu > 0.0 { nu } else { DEFAULT_NU };
        unsafe { (*config).0.mask_strategy = MaskStrategy::Extrema { nu } };
        IterfiltStatus::Ok
    })
}

/// Mask with a spectral zero pinned at `target_frequency` (Hz).
#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_set_mask_ideal(
    config: *mut IterfiltConfig,
    target_frequency: f64,
) -> IterfiltStatus {
    guarded(|| {
        require!(config);
        let strategy = MaskStrategy::Ideal { target_frequency };
        if let Err(e) = strategy.validate() {
            return fail_with(&e);
        }
        unsafe { (*config).0.mask_strategy = strategy };
        IterfiltStatus::Ok
    })
}

/// Extrema mask measured on the `order`-th finite difference of the
/// residual. Pass a non-positive `nu` to keep the calibrated default.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_set_mask_derivative(
    config: *mut IterfiltConfig,
    order: usize,
    nu: f64,
) -> IterfiltStatus {
    guarded(|| {
        require!(config);
        let nu = if nu > 0.0 { nu } else { DEFAULT_NU };
        unsafe { (*config).0.mask_strategy = MaskStrategy::Derivative { order, nu } };
        IterfiltStatus::Ok
    })
}

/// Frees a config handle. Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_config_destroy(config: *mut IterfiltConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

// --- decomposition ----------------------------------------------------------

/// Runs the full outer loop and returns a result handle.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_decompose(
    signal: *const IterfiltSignal,
    config: *const IterfiltConfig,
    out: *mut *mut IterfiltDecomposition,
) -> IterfiltStatus {
    guarded(|| {
        require!(signal);
        require!(config);
        require!(out);
        match decompose(unsafe { &(*signal).0 }, unsafe { &(*config).0 }) {
            Ok(result) => {
                boxed(out, IterfiltDecomposition(result));
                IterfiltStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_decomposition_component_count(
    decomposition: *const IterfiltDecomposition,
    out: *mut usize,
) -> IterfiltStatus {
    guarded(|| {
        require!(decomposition);
        require!(out);
        unsafe { *out = (*decomposition).0.imfs.len() };
        IterfiltStatus::Ok
    })
}

/// Copies component `index` (0-based, ordered fast to slow) into a new
/// signal handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_decomposition_component(
    decomposition: *const IterfiltDecomposition,
    index: usize,
    out: *mut *mut IterfiltSignal,
) -> IterfiltStatus {
    guarded(|| {
        require!(decomposition);
        require!(out);
        let result = unsafe { &(*decomposition).0 };
        match result.imfs.get(index) {
            Some(imf) => {
                boxed(out, IterfiltSignal(imf.clone()));
                IterfiltStatus::Ok
            }
            None => fail(
                IterfiltStatus::IndexOutOfRange,
                &format!(
                    "component {index} out of range ({} extracted)",
                    result.imfs.len()
                ),
            ),
        }
    })
}

/// Copies the non-oscillatory remainder into a new signal handle.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_decomposition_remainder(
    decomposition: *const IterfiltDecomposition,
    out: *mut *mut IterfiltSignal,
) -> IterfiltStatus {
    guarded(|| {
        require!(decomposition);
        require!(out);
        let remainder = unsafe { (*decomposition).0.remainder.clone() };
        boxed(out, IterfiltSignal(remainder));
        IterfiltStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn iterfilt_decomposition_stop(
    decomposition: *const IterfiltDecomposition,
    out: *mut IterfiltStop,
) -> IterfiltStatus {
    guarded(|| {
        require!(decomposition);
        require!(out);
        let stop = match unsafe { &(*decomposition).0.stop_reason } {
            StopReason::ExtremaGuard => IterfiltStop::ExtremaGuard,
            StopReason::NormFloor => IterfiltStop::NormFloor,
            StopReason::MaskSelectionFailed { .. } => IterfiltStop::MaskFailed,
            StopReason::ImfCapReached => IterfiltStop::ComponentCap,
        };
        unsafe { *out = stop };
        IterfiltStatus::Ok
    })
}

/// Inner steps spent on component `index` (0 marks the projection limit).
#[no_mangle]
pub unsafe extern "C" fn iterfilt_decomposition_component_iterations(
    decomposition: *const IterfiltDecomposition,
    index: usize,
    out: *mut u64,
) -> IterfiltStatus {
    guarded(|| {
        require!(decomposition);
        require!(out);
        let result = unsafe { &(*decomposition).0 };
        match result.diagnostics.get(index) {
            Some(diag) => {
                unsafe { *out = diag.iterations };
                IterfiltStatus::Ok
            }
            None => fail(
                IterfiltStatus::IndexOutOfRange,
                &format!(
                    "component {index} out of range ({} extracted)",
                    result.diagnostics.len()
                ),
            ),
        }
    })
}

/// Half-length of the filter that extracted component `index`.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_decomposition_component_mask_half_length(
    decomposition: *const IterfiltDecomposition,
    index: usize,
    out: *mut usize,
) -> IterfiltStatus {
    guarded(|| {
        require!(decomposition);
        require!(out);
        let result = unsafe { &(*decomposition).0 };
        match result.diagnostics.get(index) {
            Some(diag) => {
                unsafe { *out = diag.mask_half_length };
                IterfiltStatus::Ok
            }
            None => fail(
                IterfiltStatus::IndexOutOfRange,
                &format!(
                    "component {index} out of range ({} extracted)",
                    result.diagnostics.len()
                ),
            ),
        }
    })
}

/// Frees a decomposition handle. Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_decomposition_destroy(decomposition: *mut IterfiltDecomposition) {
    if !decomposition.is_null() {
        drop(unsafe { Box::from_raw(decomposition) });
    }
}

// --- metrics ----------------------------------------------------------------

/// Two-tone separation error of a candidate first component: the norm of its
/// deviation from the unit fast tone, relative to the norm of the slow tone.
/// `duration` and `sample_rate` must match the signal the component came from.
#[no_mangle]
pub unsafe extern "C" fn iterfilt_c1_metric(
    component: *const IterfiltSignal,
    amplitude: f64,
    frequency: f64,
    phase: f64,
    duration: f64,
    sample_rate: f64,
    out: *mut f64,
) -> IterfiltStatus {
    guarded(|| {
        require!(component);
        require!(out);
        let computed = TwoToneParams::new(amplitude, frequency, phase).and_then(|params| {
            c1_metric(unsafe { &(*component).0 }, &params, duration, sample_rate)
        });
        match computed {
            Ok(c1) => {
                unsafe { *out = c1 };
                IterfiltStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}
