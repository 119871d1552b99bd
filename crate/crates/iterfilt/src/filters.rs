//! Low-pass filter construction and spectral analysis.
//!
//! Filters here are symmetric, non-negative tap vectors of odd length 2L+1
//! with unit mass. The decomposition engine applies them as circulant
//! convolutions, so the quantity that matters is the filter's *spectrum*: the
//! DFT of its centered row, which lists the eigenvalues of the convolution
//! operator. Everything in this module exists to control where that spectrum
//! is small — and, via [`enforce_spectral_zero`], to pin an exact zero on a
//! chosen frequency bin.

use crate::error::{Error, Result};
use crate::fft;

/// A symmetric non-negative low-pass window with unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    taps: Vec<f64>,
    doubly_convolved: bool,
}

/// Tap construction used by [`build_base_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterShape {
    /// Rectangle convolved with itself: taps `[1, 2, …, L+1, …, 2, 1]`
    /// normalized. Spectrum is a Fejér kernel, hence non-negative.
    Triangular,
    /// Triangle convolved with itself (a rectangle convolved four-fold),
    /// i.e. a sampled cubic B-spline. Smoother rolloff than the triangle.
    BSpline3,
}

impl std::str::FromStr for FilterShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" => Ok(FilterShape::Triangular),
            "bspline3" => Ok(FilterShape::BSpline3),
            other => Err(Error::Parse(format!(
                "unknown filter shape {other:?} (expected triangular or bspline3)"
            ))),
        }
    }
}

impl std::fmt::Display for FilterShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FilterShape::Triangular => "triangular",
            FilterShape::BSpline3 => "bspline3",
        })
    }
}

impl Filter {
    /// Validates and wraps a tap vector. Requirements: odd length, even
    /// symmetry, taps ≥ −1e−14, total mass within 1e−12 of one.
    pub fn new(taps: Vec<f64>, doubly_convolved: bool) -> Result<Self> {
        if taps.len().is_multiple_of(2) || taps.is_empty() {
            return Err(Error::InvalidFilter(format!(
                "tap count must be odd, got {}",
                taps.len()
            )));
        }
        let n = taps.len();
        for j in 0..n / 2 {
            if (taps[j] - taps[n - 1 - j]).abs() > 1e-12 {
                return Err(Error::InvalidFilter(format!(
                    "taps not symmetric at index {j}: {} vs {}",
                    taps[j],
                    taps[n - 1 - j]
                )));
            }
        }
        if let Some(j) = taps.iter().position(|&t| t < -1e-14 || !t.is_finite()) {
            return Err(Error::InvalidFilter(format!(
                "tap {j} is negative or non-finite: {}",
                taps[j]
            )));
        }
        let mass: f64 = taps.iter().sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidFilter(format!(
                "taps must have unit mass, got {mass}"
            )));
        }
        Ok(Self {
            taps,
            doubly_convolved,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Half the support: the filter has `2*half_length + 1` taps.
    pub fn half_length(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Total tap count, always odd.
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    /// Always false — construction rejects empty tap vectors.
    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Whether the taps are known to be a self-convolution `h∗h`, which
    /// guarantees a non-negative spectrum.
    pub fn is_doubly_convolved(&self) -> bool {
        self.doubly_convolved
    }

    pub fn center_tap(&self) -> f64 {
        self.taps[self.half_length()]
    }
}

/// Eigenvalues of the circulant convolution by a filter over a given period.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpectrum {
    eigenvalues: Vec<f64>,
    period: usize,
}

impl FilterSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Number of eigenvalues with magnitude at or below `tolerance`.
    pub fn zero_count(&self, tolerance: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|l| l.abs() <= tolerance)
            .count()
    }

    /// First local minimum over positive bins `1..=p/2`, ties broken toward
    /// the lower bin; a descent into the Nyquist bin counts. Returns the bin
    /// and the eigenvalue there, or `None` for spectra with no descent at all
    /// (e.g. the delta filter's flat spectrum).
    pub fn first_local_minimum(&self) -> Option<(usize, f64)> {
        let e = &self.eigenvalues;
        let p = self.period;
        let jmax = p / 2;
        for j in 1..=jmax {
            let left = e[j - 1];
            let right = e[(j + 1) % p];
            let v = e[j];
            if v <= left && v <= right && (v < left || v < right) {
                return Some((j, v));
            }
        }
        None
    }
}

fn normalized(mut taps: Vec<f64>) -> Vec<f64> {
    let mass: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= mass;
    }
    taps
}

/// Plain linear convolution; output length `a.len() + b.len() − 1`.
fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Convolution of a symmetric vector with itself.
///
/// Plain convolution would sum each mirrored pair of output bins in opposite
/// orders, which can leave the halves a few ulps apart; computing the left
/// half and copying it keeps the result symmetric to the last bit.
fn self_convolve(g: &[f64]) -> Vec<f64> {
    let m = 2 * g.len() - 1;
    let mut out = vec![0.0; m];
    for k in 0..=(m - 1) / 2 {
        let lo = (k + 1).saturating_sub(g.len());
        let mut acc = 0.0;
        for i in lo..=k.min(g.len() - 1) {
            acc += g[i] * g[k - i];
        }
        out[k] = acc;
        out[m - 1 - k] = acc;
    }
    out
}

fn rect(len: usize) -> Vec<f64> {
    vec![1.0 / len as f64; len]
}

/// Builds one of the closed-form window families at half-length `L`.
///
/// Both shapes are self-convolutions, so their circulant spectra are
/// non-negative for every period — the property the decomposition's
/// convergence theory rests on.
pub fn build_base_filter(shape: FilterShape, half_length: usize) -> Result<Filter> {
    if half_length < 1 {
        return Err(Error::InvalidLength(
            "filter half-length must be at least 1".into(),
        ));
    }
    let l = half_length;
    let taps = match shape {
        FilterShape::Triangular => convolve(&rect(l + 1), &rect(l + 1)),
        FilterShape::BSpline3 => {
            // Split L+2 into two rectangle widths as evenly as possible; their
            // convolution is the half-filter h (length L+1), and h∗h has the
            // required 2L+1 taps. Even L reduces to a four-fold rectangle
            // convolution; L=1 degenerates to the [1/4, 1/2, 1/4] pair filter.
            let a = l / 2 + 1;
            let b = l + 2 - a;
            let h = convolve(&rect(a), &rect(b));
            convolve(&h, &h)
        }
    };
    Filter::new(normalized(taps), true)
}

/// Self-convolution of a filter, renormalized to unit mass. The spectrum of
/// the result is the square of the input's, hence non-negative.
pub fn double_convolve(h: &Filter) -> Filter {
    let taps = normalized(self_convolve(h.taps()));
    Filter {
        taps,
        doubly_convolved: true,
    }
}

/// Resamples a filter to a new half-length by piecewise-linear interpolation
/// of its shape.
///
/// Tap `i` of a length-2L+1 filter is pinned at abscissa `(i−L)/(L+1)`, with
/// the shape falling linearly to zero at ±1 just beyond the outermost taps;
/// the target taps read this profile at `(j−L')/(L'+1)` and are renormalized.
/// Placing the virtual zeros one *tap spacing* beyond the support (rather
/// than at the outermost taps themselves) is what makes the discrete triangle
/// scale to the discrete triangle exactly, at every target length.
///
/// Only the left half is interpolated; the right half is mirrored, so
/// symmetry is exact by construction.
pub fn scale_filter(base: &Filter, target_half_length: usize) -> Result<Filter> {
    if target_half_length < 1 {
        return Err(Error::InvalidLength(
            "target half-length must be at least 1".into(),
        ));
    }
    let l = base.half_length();
    let lt = target_half_length;
    // Profile samples with the virtual zero endpoints at abscissa ±1; node m
    // sits at −1 + m/(L+1).
    let mut profile = Vec::with_capacity(base.len() + 2);
    profile.push(0.0);
    profile.extend_from_slice(base.taps());
    profile.push(0.0);
    let spacing_inv = (l + 1) as f64;

    let mut taps = vec![0.0; 2 * lt + 1];
    for j in 0..=lt {
        let u = (j as f64 - lt as f64) / (lt as f64 + 1.0);
        let pos = (u + 1.0) * spacing_inv; // fractional node index
        let m = (pos.floor() as usize).min(profile.len() - 2);
        let frac = pos - m as f64;
        let v = profile[m] * (1.0 - frac) + profile[m + 1] * frac;
        taps[j] = v.max(0.0);
        taps[2 * lt - j] = taps[j];
    }
    Filter::new(normalized(taps), base.doubly_convolved)
}

/// Computes the eigenvalues of the circulant convolution by `w` over a period
/// of `p` samples: the DFT of the filter row centered at index 0 with
/// wraparound. The eigenvalues of a real even row are real; their imaginary
/// parts are checked against 1e−12 and discarded.
pub fn filter_spectrum(w: &Filter, period: usize) -> Result<FilterSpectrum> {
    if w.len() > period {
        return Err(Error::FilterTooLong {
            support: w.len(),
            period,
        });
    }
    let l = w.half_length();
    let taps = w.taps();
    let mut row = vec![0.0; period];
    row[0] = taps[l];
    for m in 1..=l {
        row[m] = taps[l + m];
        row[period - m] = taps[l - m];
    }
    let bins = fft::forward_real(&row);
    let mut eigenvalues = Vec::with_capacity(period);
    for c in &bins {
        if c.im.abs() > 1e-12 {
            return Err(Error::SpectrumNotReal(c.im));
        }
        eigenvalues.push(c.re);
    }
    Ok(FilterSpectrum {
        eigenvalues,
        period,
    })
}

/// Rebuilds a filter so that its spectrum over period `p` is exactly zero at
/// the bin where it previously had its first positive-frequency local
/// minimum.
///
/// With ε the spectrum value at that minimum, the output taps are the
/// self-convolution of `h − ε·δ` scaled by `1/(1−ε)²`, so the new spectrum is
/// `((λ_j − ε)/(1−ε))²`: non-negative everywhere, exactly zero at the minimum
/// bin and its mirror, and still unit mass at DC. Support grows from 2L+1 to
/// 4L+1 taps, which must still fit inside the period.
///
/// Returns the filter and the bin carrying the zero.
pub fn enforce_spectral_zero(h: &Filter, period: usize) -> Result<(Filter, usize)> {
    let spectrum = filter_spectrum(h, period)?;
    let (zero_bin, eps) = spectrum
        .first_local_minimum()
        .ok_or(Error::NoSpectralMinimum)?;
    let center = h.center_tap();
    if eps >= center {
        return Err(Error::NegativityViolation { eps, center });
    }
    let support = 4 * h.half_length() + 1;
    if support > period {
        return Err(Error::FilterTooLong { support, period });
    }
    let mut g = h.taps().to_vec();
    g[h.half_length()] -= eps;
    let scale = (1.0 - eps) * (1.0 - eps);
    let taps: Vec<f64> = self_convolve(&g).into_iter().map(|t| t / scale).collect();
    let filter = Filter::new(taps, true)?;
    Ok((filter, zero_bin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// O(p²) reference DFT of the centered circulant row — the oracle the
    /// FFT-based spectrum is checked against.
    fn spectrum_oracle(w: &Filter, p: usize) -> Vec<f64> {
        let l = w.half_length();
        let taps = w.taps();
        (0..p)
            .map(|j| {
                let mut acc = taps[l];
                for m in 1..=l {
                    let angle = std::f64::consts::TAU * j as f64 * m as f64 / p as f64;
                    acc += (taps[l + m] + taps[l - m]) * angle.cos();
                }
                acc
            })
            .collect()
    }

    fn assert_filter_invariants(f: &Filter) {
        let taps = f.taps();
        let n = taps.len();
        assert_eq!(n, 2 * f.half_length() + 1);
        for j in 0..n {
            assert!(taps[j] >= -1e-14, "tap {j} negative: {}", taps[j]);
            assert!(
                (taps[j] - taps[n - 1 - j]).abs() <= 1e-12,
                "asymmetry at {j}"
            );
        }
        let mass: f64 = taps.iter().sum();
        assert!((mass - 1.0).abs() <= 1e-12, "mass {mass}");
    }

    #[test]
    fn triangular_l2_is_one_two_three_over_nine() {
        let f = build_base_filter(FilterShape::Triangular, 2).unwrap();
        let want = [1.0, 2.0, 3.0, 2.0, 1.0].map(|x| x / 9.0);
        for (got, want) in f.taps().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn bspline3_l1_is_quarter_half_quarter() {
        let f = build_base_filter(FilterShape::BSpline3, 1).unwrap();
        let want = [0.25, 0.5, 0.25];
        for (got, want) in f.taps().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn bspline3_even_length_matches_fourfold_rectangle_convolution() {
        for l in [2usize, 4, 6, 10] {
            let f = build_base_filter(FilterShape::BSpline3, l).unwrap();
            let r = rect(l / 2 + 1);
            let brute = normalized(convolve(&convolve(&r, &r), &convolve(&r, &r)));
            assert_eq!(f.len(), brute.len());
            for (got, want) in f.taps().iter().zip(&brute) {
                assert!((got - want).abs() < 1e-14, "L={l}");
            }
        }
    }

    #[test]
    fn base_filters_satisfy_invariants() {
        for l in 1..=40 {
            for shape in [FilterShape::Triangular, FilterShape::BSpline3] {
                let f = build_base_filter(shape, l).unwrap();
                assert_eq!(f.half_length(), l, "{shape} L={l}");
                assert!(f.is_doubly_convolved());
                assert_filter_invariants(&f);
            }
        }
    }

    #[test]
    fn base_filter_rejects_zero_length() {
        assert!(matches!(
            build_base_filter(FilterShape::Triangular, 0),
            Err(Error::InvalidLength(_))
        ));
    }

    #[test]
    fn double_convolve_of_delta_is_delta() {
        let delta = Filter::new(vec![1.0], false).unwrap();
        let out = double_convolve(&delta);
        assert_eq!(out.taps(), &[1.0]);
        assert!(out.is_doubly_convolved());
    }

    #[test]
    fn double_convolve_of_sparse_pair() {
        let h = Filter::new(vec![0.5, 0.0, 0.5], false).unwrap();
        let out = double_convolve(&h);
        assert_eq!(out.taps(), &[0.25, 0.0, 0.5, 0.0, 0.25]);
        assert_eq!(out.half_length(), 2);
    }

    #[test]
    fn double_convolve_squares_the_spectrum() {
        let h = build_base_filter(FilterShape::Triangular, 2).unwrap();
        let hh = double_convolve(&h);
        let p = 64;
        let base = filter_spectrum(&h, p).unwrap();
        let squared = filter_spectrum(&hh, p).unwrap();
        for j in 0..p {
            let want = base.eigenvalues()[j] * base.eigenvalues()[j];
            assert!((squared.eigenvalues()[j] - want).abs() < 1e-12, "bin {j}");
        }
    }

    #[test]
    fn scaling_to_same_length_is_identity() {
        for shape in [FilterShape::Triangular, FilterShape::BSpline3] {
            let base = build_base_filter(shape, 7).unwrap();
            let same = scale_filter(&base, 7).unwrap();
            for (got, want) in same.taps().iter().zip(base.taps()) {
                assert!((got - want).abs() < 1e-12, "{shape}");
            }
        }
    }

    #[test]
    fn scaled_triangle_is_the_exact_discrete_triangle() {
        let base = build_base_filter(FilterShape::Triangular, 8).unwrap();
        for lt in 1..=50usize {
            let scaled = scale_filter(&base, lt).unwrap();
            let denom = ((lt + 1) * (lt + 1)) as f64;
            for j in 0..=2 * lt {
                let want = (lt + 1 - j.abs_diff(lt)) as f64 / denom;
                assert!(
                    (scaled.taps()[j] - want).abs() < 1e-13,
                    "L'={lt} tap {j}: {} vs {want}",
                    scaled.taps()[j]
                );
            }
        }
    }

    #[test]
    fn scaling_preserves_invariants_up_and_down() {
        for shape in [FilterShape::Triangular, FilterShape::BSpline3] {
            let base = build_base_filter(shape, 5).unwrap();
            for lt in 1..=50 {
                let f = scale_filter(&base, lt).unwrap();
                assert_eq!(f.half_length(), lt);
                assert_filter_invariants(&f);
            }
        }
    }

    #[test]
    fn spectrum_of_delta_is_flat_one() {
        let delta = Filter::new(vec![1.0], false).unwrap();
        let s = filter_spectrum(&delta, 32).unwrap();
        assert!(s.eigenvalues().iter().all(|l| (l - 1.0).abs() < 1e-13));
        assert!(s.first_local_minimum().is_none());
    }

    #[test]
    fn spectrum_of_full_uniform_filter_is_delta() {
        let p = 17;
        let taps = vec![1.0 / p as f64; p];
        let uniform = Filter::new(taps, false).unwrap();
        let s = filter_spectrum(&uniform, p).unwrap();
        assert!((s.eigenvalues()[0] - 1.0).abs() < 1e-12);
        for j in 1..p {
            assert!(s.eigenvalues()[j].abs() < 1e-12, "bin {j}");
        }
    }

    #[test]
    fn spectrum_matches_direct_dft_oracle() {
        let f = build_base_filter(FilterShape::Triangular, 8).unwrap();
        let p = 64;
        let s = filter_spectrum(&f, p).unwrap();
        let oracle = spectrum_oracle(&f, p);
        for (j, (&got, &want)) in s.eigenvalues().iter().zip(&oracle).enumerate() {
            let rel = (got - want).abs() / want.abs().max(1.0);
            assert!(rel < 1e-12, "bin {j}: {got} vs {want}");
        }
        // Fejér spectrum: non-negative everywhere, exact zeros where the
        // period divides evenly (64/9 doesn't, so strictly positive minima).
        assert!(s.eigenvalues().iter().all(|&l| l >= -1e-12));
    }

    #[test]
    fn spectrum_dc_is_unit_and_symmetric() {
        let f = build_base_filter(FilterShape::BSpline3, 5).unwrap();
        let p = 48;
        let s = filter_spectrum(&f, p).unwrap();
        assert!((s.eigenvalues()[0] - 1.0).abs() < 1e-12);
        for j in 1..p {
            assert!(
                (s.eigenvalues()[j] - s.eigenvalues()[p - j]).abs() < 1e-12,
                "bin {j}"
            );
        }
    }

    #[test]
    fn spectrum_rejects_filters_longer_than_the_period() {
        let f = build_base_filter(FilterShape::Triangular, 8).unwrap();
        assert!(matches!(
            filter_spectrum(&f, 16),
            Err(Error::FilterTooLong { .. })
        ));
    }

    #[test]
    fn triangle_dividing_the_period_has_an_exact_spectral_zero() {
        // L+1 = 8 divides p = 64, so the Fejér spectrum has a true zero at
        // bin p/(L+1) = 8 and the local-minimum scan must find it.
        let f = build_base_filter(FilterShape::Triangular, 7).unwrap();
        let s = filter_spectrum(&f, 64).unwrap();
        let (bin, value) = s.first_local_minimum().unwrap();
        assert_eq!(bin, 8);
        assert!(value.abs() < 1e-14);
    }

    #[test]
    fn short_triangle_descends_into_nyquist() {
        // [1,2,1]/4 has spectrum cos²(πj/p): strictly decreasing with its
        // minimum (an exact zero) at the Nyquist bin.
        let f = build_base_filter(FilterShape::Triangular, 1).unwrap();
        let s = filter_spectrum(&f, 16).unwrap();
        let (bin, value) = s.first_local_minimum().unwrap();
        assert_eq!(bin, 8);
        assert!(value.abs() < 1e-14);
    }

    #[test]
    fn enforced_zero_lands_exactly_and_keeps_invariants() {
        for l in [4usize, 8, 16] {
            let base = build_base_filter(FilterShape::Triangular, l).unwrap();
            let (filter, zero_bin) = enforce_spectral_zero(&base, 256).unwrap();
            assert_filter_invariants(&filter);
            assert_eq!(filter.half_length(), 2 * l);
            let s = filter_spectrum(&filter, 256).unwrap();
            assert!(
                s.eigenvalues()[zero_bin].abs() < 1e-12,
                "L={l}: |λ({zero_bin})| = {}",
                s.eigenvalues()[zero_bin]
            );
            assert!(
                s.eigenvalues()[256 - zero_bin].abs() < 1e-12,
                "mirror bin, L={l}"
            );
            // No earlier zero: the enforced bin is the smallest positive one.
            for j in 1..zero_bin {
                assert!(s.eigenvalues()[j] > 1e-12, "L={l} bin {j} vanished early");
            }
        }
    }

    #[test]
    fn enforced_spectrum_matches_the_construction_identity() {
        let base = build_base_filter(FilterShape::Triangular, 8).unwrap();
        let p = 256;
        let before = filter_spectrum(&base, p).unwrap();
        let (_, eps) = before.first_local_minimum().unwrap();
        let (filter, _) = enforce_spectral_zero(&base, p).unwrap();
        let after = filter_spectrum(&filter, p).unwrap();
        for j in 0..p {
            let want = ((before.eigenvalues()[j] - eps) / (1.0 - eps)).powi(2);
            assert!(
                (after.eigenvalues()[j] - want).abs() < 1e-12,
                "bin {j}: {} vs {want}",
                after.eigenvalues()[j]
            );
        }
    }

    #[test]
    fn enforcement_with_zero_eps_reduces_to_double_convolution() {
        // L+1 = 8 divides 64: the minimum is already an exact zero.
        let base = build_base_filter(FilterShape::Triangular, 7).unwrap();
        let (filter, zero_bin) = enforce_spectral_zero(&base, 64).unwrap();
        assert_eq!(zero_bin, 8);
        let want = double_convolve(&base);
        for (got, want) in filter.taps().iter().zip(want.taps()) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn enforcement_rejects_flat_spectra_and_tight_periods() {
        let delta = Filter::new(vec![1.0], false).unwrap();
        assert!(matches!(
            enforce_spectral_zero(&delta, 32),
            Err(Error::NoSpectralMinimum)
        ));
        let wide = build_base_filter(FilterShape::Triangular, 10).unwrap();
        // 2L+1 = 21 fits in p = 32 but the doubled support 4L+1 = 41 does not.
        assert!(matches!(
            enforce_spectral_zero(&wide, 32),
            Err(Error::FilterTooLong { .. })
        ));
    }

    fn admissible_filter() -> impl Strategy<Value = Filter> {
        (
            prop::sample::select(vec![FilterShape::Triangular, FilterShape::BSpline3]),
            1usize..=16,
        )
            .prop_map(|(shape, l)| build_base_filter(shape, l).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_doubly_convolved_spectra_are_nonnegative(
            f in admissible_filter(),
            p in 64usize..=512,
        ) {
            let s = filter_spectrum(&f, p).unwrap();
            prop_assert!((s.eigenvalues()[0] - 1.0).abs() < 1e-12);
            for (j, &l) in s.eigenvalues().iter().enumerate() {
                prop_assert!(l >= -1e-12, "bin {} = {}", j, l);
                prop_assert!(l <= 1.0 + 1e-12, "bin {} = {}", j, l);
            }
        }

        #[test]
        fn prop_double_convolve_spectrum_squares(
            f in admissible_filter(),
            p in 64usize..=512,
        ) {
            let hh = double_convolve(&f);
            prop_assume!(hh.len() <= p);
            let base = filter_spectrum(&f, p).unwrap();
            let sq = filter_spectrum(&hh, p).unwrap();
            for j in 0..p {
                let want = base.eigenvalues()[j] * base.eigenvalues()[j];
                prop_assert!((sq.eigenvalues()[j] - want).abs() < 1e-10);
            }
        }

        #[test]
        fn prop_scaling_preserves_invariants(
            f in admissible_filter(),
            lt in 1usize..=64,
        ) {
            let scaled = scale_filter(&f, lt).unwrap();
            prop_assert_eq!(scaled.half_length(), lt);
            let taps = scaled.taps();
            let mass: f64 = taps.iter().sum();
            prop_assert!((mass - 1.0).abs() <= 1e-12);
            for j in 0..taps.len() {
                prop_assert!(taps[j] >= -1e-14);
                prop_assert!((taps[j] - taps[taps.len() - 1 - j]).abs() <= 1e-12);
            }
        }

        #[test]
        fn prop_enforced_zero_is_reproducible(f in admissible_filter()) {
            let p = 256;
            let (filter, zero_bin) = enforce_spectral_zero(&f, p).unwrap();
            let s = filter_spectrum(&filter, p).unwrap();
            prop_assert!(s.eigenvalues()[zero_bin].abs() < 1e-12);
            prop_assert!(s.eigenvalues().iter().all(|&l| l >= -1e-12));
        }
    }
}
