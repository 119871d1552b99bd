//! Mask (low-pass filter) selection for the outer decomposition loop.
//!
//! Two families of strategies are provided. The extrema-counting family sizes
//! the mask from the signal itself: the half-length is proportional to the
//! average spacing between interior extrema, optionally measured on a finite
//! difference of the signal so that faster oscillations dominate the count.
//! The ideal family instead targets a known frequency and searches for the
//! half-length whose enforced spectral zero lands exactly on that frequency's
//! DFT bin.

use crate::error::{Error, Result};
use crate::fft;
use crate::filters::{
    build_base_filter, enforce_spectral_zero, filter_spectrum, scale_filter, Filter, FilterShape,
};
use crate::signal::{count_extrema, finite_difference, Signal};
use std::str::FromStr;

/// Default proportionality constant between extrema spacing and mask
/// half-length.
///
/// The value is calibrated on the two-tone benchmark at 2000 samples: in the
/// regime where the fast tone shapes the extrema count (about 199 interior
/// extrema), the resulting half-length of 19 gives a scaled triangular filter
/// whose spectrum vanishes exactly on the fast tone's bin, so the fluctuation
/// operator preserves that tone to machine precision. Smaller constants (for
/// example 1.6) shorten the mask enough that the fast tone is attenuated a
/// few percent per iteration, which destroys low-amplitude separation.
pub const DEFAULT_NU: f64 = 1.94;

/// How the mask half-length is chosen for each extracted component.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskStrategy {
    /// Half-length proportional to signal length over interior extrema count.
    Extrema { nu: f64 },
    /// Search for a filter whose enforced spectral zero lands on the bin of
    /// the given frequency (in the signal's frequency unit, e.g. Hz).
    Ideal { target_frequency: f64 },
    /// Extrema counting applied to the order-th finite difference of the
    /// signal. Order 0 is identical to `Extrema`.
    Derivative { order: usize, nu: f64 },
}

impl MaskStrategy {
    /// Extrema strategy with the default proportionality constant.
    pub fn extrema() -> Self {
        MaskStrategy::Extrema { nu: DEFAULT_NU }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MaskStrategy::Extrema { nu } | MaskStrategy::Derivative { nu, .. } => {
                if !(nu.is_finite() && nu > 0.0) {
                    return Err(Error::InvalidFilter(format!(
                        "extrema proportionality constant must be positive, got {nu}"
                    )));
                }
            }
            MaskStrategy::Ideal { target_frequency } => {
                if !(target_frequency.is_finite() && target_frequency > 0.0) {
                    return Err(Error::InvalidFrequency(target_frequency));
                }
            }
        }
        Ok(())
    }
}

impl FromStr for MaskStrategy {
    type Err = Error;

    /// Accepts `extrema`, `ideal:<frequency>`, or `derivative:<order>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "extrema" {
            return Ok(MaskStrategy::extrema());
        }
        if let Some(freq) = s.strip_prefix("ideal:") {
            let target_frequency: f64 = freq
                .parse()
                .map_err(|_| Error::Parse(format!("invalid ideal mask frequency: {freq:?}")))?;
            let strategy = MaskStrategy::Ideal { target_frequency };
            strategy.validate()?;
            return Ok(strategy);
        }
        if let Some(order) = s.strip_prefix("derivative:") {
            let order: usize = order
                .parse()
                .map_err(|_| Error::Parse(format!("invalid derivative order: {order:?}")))?;
            return Ok(MaskStrategy::Derivative {
                order,
                nu: DEFAULT_NU,
            });
        }
        Err(Error::Parse(format!(
            "unknown mask strategy {s:?} (expected extrema, ideal:<freq>, or derivative:<order>)"
        )))
    }
}

impl std::fmt::Display for MaskStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaskStrategy::Extrema { nu } => write!(f, "extrema(nu={nu})"),
            MaskStrategy::Ideal { target_frequency } => write!(f, "ideal:{target_frequency}"),
            MaskStrategy::Derivative { order, nu } => write!(f, "derivative:{order}(nu={nu})"),
        }
    }
}

/// Upper bound on half-lengths considered by [`ideal_mask`], chosen so the
/// doubled filter produced by zero enforcement still fits in the period.
fn max_search_half_length(period: usize) -> usize {
    ((period - 1) / 4).max(1)
}

/// Mask half-length from the interior extrema count: `round(nu * p / count)`,
/// clamped to valid half-lengths for the signal's period.
pub fn mask_from_extrema(signal: &Signal, nu: f64) -> Result<usize> {
    let found = count_extrema(signal);
    if found < 2 {
        return Err(Error::TooFewExtrema { found });
    }
    let p = signal.len();
    let raw = (nu * p as f64 / found as f64).round() as usize;
    Ok(raw.clamp(1, (p - 1) / 2))
}

/// Extrema-based half-length measured on the order-th finite difference.
/// Order 0 reduces to [`mask_from_extrema`] on the signal itself.
pub fn mask_from_derivative(signal: &Signal, order: usize, nu: f64) -> Result<usize> {
    if order == 0 {
        return mask_from_extrema(signal, nu);
    }
    let derivative = finite_difference(signal, order)?;
    mask_from_extrema(&derivative, nu)
}

/// First local minimum bin of the shape's spectrum at half-length `l`, or
/// `None` when the spectrum has no interior minimum.
fn first_minimum_bin(base: &Filter, l: usize, period: usize) -> Result<Option<usize>> {
    let scaled = scale_filter(base, l)?;
    let spectrum = filter_spectrum(&scaled, period)?;
    Ok(spectrum.first_local_minimum().map(|(bin, _)| bin))
}

/// Design a filter whose spectrum vanishes exactly on the DFT bin of
/// `target_frequency`.
///
/// The search scans half-lengths of the scaled shape for the one whose first
/// spectral minimum sits on the target bin, then pins that minimum to an
/// exact zero with [`enforce_spectral_zero`]. Because the minimum bin moves
/// in steps larger than one bin once the half-length is small, not every bin
/// is reachable; unreachable targets return [`Error::UnattainableZero`].
///
/// Returns the enforced filter together with the half-length of the scaled
/// shape it was built from (the enforced filter itself is twice as long).
pub fn ideal_mask(
    base: &Filter,
    period: usize,
    sample_rate: f64,
    target_frequency: f64,
) -> Result<(Filter, usize)> {
    if !(target_frequency.is_finite() && target_frequency > 0.0) {
        return Err(Error::InvalidFrequency(target_frequency));
    }
    let bin = (target_frequency * period as f64 / sample_rate).round();
    let max_bin = period / 2;
    if !(bin >= 1.0 && bin <= max_bin as f64) {
        return Err(Error::TargetOutOfRange {
            bin: bin.max(0.0) as usize,
            max: max_bin,
        });
    }
    let target_bin = bin as usize;
    let l_max = max_search_half_length(period);

    // The first-minimum bin decreases (roughly like period / half-length) as
    // the half-length grows, so a bracketing search followed by a local scan
    // finds the closest attainable bin quickly.
    let bin_at = |l: usize| -> Result<usize> {
        // Treat "no interior minimum" (very short masks) as a minimum beyond
        // Nyquist so the search keeps moving toward longer masks.
        Ok(first_minimum_bin(base, l, period)?.unwrap_or(period))
    };

    let mut lo = 1usize;
    let mut hi;
    if bin_at(lo)? > target_bin {
        // Exponentially grow a bracket [lo, hi] with bin(lo) > target >= bin(hi).
        let mut step = 1usize;
        let mut probe = lo;
        loop {
            let next = (probe + step).min(l_max);
            if bin_at(next)? <= target_bin || next == l_max {
                lo = probe;
                hi = next;
                break;
            }
            probe = next;
            step *= 2;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if bin_at(mid)? <= target_bin {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    } else {
        hi = lo;
    }

    // Scan a small window around the crossing and keep the half-length whose
    // minimum lands nearest the target, preferring shorter masks on ties.
    let window_lo = hi.saturating_sub(3).max(1);
    let window_hi = (hi + 3).min(l_max);
    let mut best: Option<(usize, usize)> = None; // (distance, half_length)
    for l in window_lo..=window_hi {
        let b = bin_at(l)?;
        if b > period / 2 {
            continue;
        }
        let distance = b.abs_diff(target_bin);
        let candidate = (distance, l);
        if best.is_none_or(|cur| candidate < cur) {
            best = Some(candidate);
        }
    }
    let (distance, half_length) = best.ok_or(Error::UnattainableZero { target: target_bin })?;
    if distance != 0 {
        return Err(Error::UnattainableZero { target: target_bin });
    }

    let scaled = scale_filter(base, half_length)?;
    let (enforced, zero_bin) = enforce_spectral_zero(&scaled, period)?;
    if zero_bin != target_bin {
        return Err(Error::UnattainableZero { target: target_bin });
    }
    Ok((enforced, half_length))
}

/// Canonical base shape handed to [`ideal_mask`]: any half-length works as a
/// scaling source, so a moderate one keeps interpolation cheap.
pub fn ideal_base(shape: FilterShape) -> Filter {
    build_base_filter(shape, 8).expect("base half-length is valid")
}

/// Index of the largest-magnitude DFT coefficient among bins `1..=p/2`.
///
/// Used by the decomposition loop to retarget the ideal strategy at the
/// dominant remaining oscillation after the first component is removed.
pub fn dominant_bin(signal: &Signal) -> usize {
    let spectrum = fft::forward_real(signal.samples());
    let p = signal.len();
    let mut best_bin = 1;
    let mut best_mag = 0.0f64;
    for (j, c) in spectrum.iter().enumerate().take(p / 2 + 1).skip(1) {
        let mag = c.norm_sqr();
        if mag > best_mag {
            best_mag = mag;
            best_bin = j;
        }
    }
    best_bin
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{generate_two_tone, TwoToneParams};

    fn tone(frequency: f64, duration: f64, sample_rate: f64) -> Signal {
        let p = (duration * sample_rate).round() as usize;
        let samples = (0..p)
            .map(|k| (std::f64::consts::TAU * frequency * k as f64 / sample_rate).cos())
            .collect();
        Signal::new(samples, sample_rate).unwrap()
    }

    #[test]
    fn extrema_mask_matches_count_formula() {
        // 100 s of a 1 Hz cosine at 20 Hz sampling: 199 interior extrema.
        let s = tone(1.0, 100.0, 20.0);
        assert_eq!(count_extrema(&s), 199);
        let l = mask_from_extrema(&s, 1.6).unwrap();
        assert_eq!(l, (1.6f64 * 2000.0 / 199.0).round() as usize);
        assert_eq!(l, 16);
        // The calibrated default lands on the half-length whose filter zeroes
        // the tone's own bin (bin 100 of 2000 needs half-length 19).
        assert_eq!(mask_from_extrema(&s, DEFAULT_NU).unwrap(), 19);
    }

    #[test]
    fn extrema_mask_is_scale_and_offset_invariant() {
        let s = tone(1.0, 100.0, 20.0);
        let scaled =
            Signal::new(s.samples().iter().map(|v| 7.5 * v + 3.0).collect(), 20.0).unwrap();
        assert_eq!(
            mask_from_extrema(&s, DEFAULT_NU).unwrap(),
            mask_from_extrema(&scaled, DEFAULT_NU).unwrap()
        );
    }

    #[test]
    fn extrema_mask_rejects_monotone_signals() {
        let ramp = Signal::new((0..64).map(|k| k as f64).collect(), 1.0).unwrap();
        match mask_from_extrema(&ramp, 1.6) {
            Err(Error::TooFewExtrema { found: 0 }) => {}
            other => panic!("expected TooFewExtrema, got {other:?}"),
        }
    }

    #[test]
    fn extrema_mask_clamps_to_valid_half_lengths() {
        // Two extrema in a long signal push the raw formula past the largest
        // legal half-length.
        let mut samples = vec![0.0; 400];
        samples[100] = 1.0;
        samples[300] = -1.0;
        let s = Signal::new(samples, 1.0).unwrap();
        assert_eq!(count_extrema(&s), 2);
        let l = mask_from_extrema(&s, 1.6).unwrap();
        assert_eq!(l, (400 - 1) / 2);
    }

    #[test]
    fn derivative_order_zero_is_plain_extrema() {
        let s =
            generate_two_tone(&TwoToneParams::new(2.0, 0.31, 3.0).unwrap(), 100.0, 20.0).unwrap();
        assert_eq!(
            mask_from_derivative(&s, 0, DEFAULT_NU).unwrap(),
            mask_from_extrema(&s, DEFAULT_NU).unwrap()
        );
    }

    #[test]
    fn differencing_shortens_the_mask_when_a_fast_tone_hides_under_a_slow_one() {
        // Strong slow tone: plain extrema see mostly the slow oscillation,
        // the second difference is dominated by the fast tone instead.
        let s =
            generate_two_tone(&TwoToneParams::new(20.0, 0.2, 3.0).unwrap(), 100.0, 20.0).unwrap();
        let plain = mask_from_derivative(&s, 0, DEFAULT_NU).unwrap();
        let second = mask_from_derivative(&s, 2, DEFAULT_NU).unwrap();
        assert!(
            second < plain,
            "expected differencing to shorten the mask: {second} vs {plain}"
        );
        // With af^2 = 0.8 < 1 the second difference is fast-tone dominated,
        // so its extrema count is near 2 per fast period.
        assert_eq!(second, 19);
    }

    #[test]
    fn ideal_mask_pins_a_machine_precision_zero_on_the_target_bin() {
        let base = ideal_base(FilterShape::Triangular);
        let (filter, half_length) = ideal_mask(&base, 2000, 20.0, 1.0).unwrap();
        assert_eq!(half_length, 19);
        let spectrum = filter_spectrum(&filter, 2000).unwrap();
        let eigenvalues = spectrum.eigenvalues();
        assert!(
            eigenvalues[100].abs() < 1e-12,
            "bin 100 eigenvalue {}",
            eigenvalues[100]
        );
        // No earlier zero: the target bin is the smallest positive one.
        for (j, lambda) in eigenvalues.iter().enumerate().take(100).skip(1) {
            assert!(lambda.abs() > 1e-12, "unexpected zero at bin {j}: {lambda}");
        }
    }

    #[test]
    fn ideal_mask_half_length_does_not_grow_with_frequency() {
        let base = ideal_base(FilterShape::Triangular);
        let mut previous = usize::MAX;
        for bin in [40usize, 50, 80, 100, 125, 200, 250] {
            let f = bin as f64 * 20.0 / 2000.0;
            let (_, l) = ideal_mask(&base, 2000, 20.0, f).unwrap();
            assert!(
                l <= previous,
                "half-length grew from {previous} to {l} at bin {bin}"
            );
            previous = l;
        }
    }

    #[test]
    fn ideal_mask_rejects_unreachable_and_out_of_range_bins() {
        let base = ideal_base(FilterShape::Triangular);
        // High bins are sparse: 82 falls between the minima reachable by
        // consecutive half-lengths at this period.
        match ideal_mask(&base, 2000, 20.0, 0.82) {
            Err(Error::UnattainableZero { target: 82 }) => {}
            other => panic!("expected UnattainableZero, got {other:?}"),
        }
        match ideal_mask(&base, 2000, 20.0, 10.5) {
            Err(Error::TargetOutOfRange {
                bin: 1050,
                max: 1000,
            }) => {}
            other => panic!("expected TargetOutOfRange, got {other:?}"),
        }
        match ideal_mask(&base, 2000, 20.0, 0.0) {
            Err(Error::InvalidFrequency(_)) => {}
            other => panic!("expected InvalidFrequency, got {other:?}"),
        }
    }

    #[test]
    fn ideal_mask_reaches_bins_attainable_at_this_period() {
        let base = ideal_base(FilterShape::Triangular);
        for bin in [56usize, 69, 95, 100] {
            let f = bin as f64 * 20.0 / 2000.0;
            let (filter, _) = ideal_mask(&base, 2000, 20.0, f)
                .unwrap_or_else(|e| panic!("bin {bin} should be attainable: {e}"));
            let spectrum = filter_spectrum(&filter, 2000).unwrap();
            assert!(spectrum.eigenvalues()[bin].abs() < 1e-12);
        }
    }

    #[test]
    fn dominant_bin_finds_the_strongest_oscillation() {
        let s =
            generate_two_tone(&TwoToneParams::new(3.0, 0.4, 1.0).unwrap(), 100.0, 20.0).unwrap();
        // Slow tone has amplitude 3 at 0.4 Hz -> bin 40.
        assert_eq!(dominant_bin(&s), 40);
        let t = tone(1.0, 100.0, 20.0);
        assert_eq!(dominant_bin(&t), 100);
    }

    #[test]
    fn strategy_strings_round_trip() {
        let parsed: MaskStrategy = "extrema".parse().unwrap();
        assert_eq!(parsed, MaskStrategy::extrema());
        let parsed: MaskStrategy = "ideal:1.25".parse().unwrap();
        assert_eq!(
            parsed,
            MaskStrategy::Ideal {
                target_frequency: 1.25
            }
        );
        let parsed: MaskStrategy = "derivative:2".parse().unwrap();
        assert_eq!(
            parsed,
            MaskStrategy::Derivative {
                order: 2,
                nu: DEFAULT_NU
            }
        );
        assert!("ideal:".parse::<MaskStrategy>().is_err());
        assert!("ideal:-1".parse::<MaskStrategy>().is_err());
        assert!("sift".parse::<MaskStrategy>().is_err());
    }
}
