//! Thin wrappers over rustfft with a per-thread plan cache.
//!
//! Every hot path in the crate transforms real vectors of a handful of
//! distinct lengths, so plans are cached per thread keyed by size. The
//! unnormalized convention is used throughout: `inverse(forward(x)) == p * x`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward DFT of a real vector (unnormalized).
pub fn forward_real(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(&mut buf));
    buf
}

/// Inverse DFT returning real parts, scaled by 1/p so that it inverts
/// [`forward_real`] exactly.
pub fn inverse_real(spectrum: &[Complex64]) -> Vec<f64> {
    let p = spectrum.len();
    let mut buf = spectrum.to_vec();
    PLANNER.with(|pl| pl.borrow_mut().plan_fft_inverse(p).process(&mut buf));
    let scale = 1.0 / p as f64;
    buf.iter().map(|c| c.re * scale).collect()
}
