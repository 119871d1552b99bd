//! Uniformly sampled real signals and the handful of pointwise operations the
//! decomposition engine needs: two-tone synthesis, interior extrema counting,
//! repeated finite differencing, and boundary extension.

use crate::error::{Error, Result};

/// A finite, uniformly sampled real signal.
///
/// The sample count always matches `duration * sample_rate` to within half a
/// sample; constructors reject anything else, as well as non-finite content.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
    duration: f64,
}

impl Signal {
    /// Builds a signal from raw samples, deriving the duration from the rate.
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        let duration = samples.len() as f64 / sample_rate;
        Self::with_duration(samples, sample_rate, duration)
    }

    /// Builds a signal with an explicit duration, validating consistency.
    pub fn with_duration(samples: Vec<f64>, sample_rate: f64, duration: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidSize(format!(
                "a signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if sample_rate <= 0.0 || !sample_rate.is_finite() {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        let p = samples.len() as f64;
        if (p - duration * sample_rate).abs() >= 0.5 {
            return Err(Error::InvalidSignal(format!(
                "{} samples at {} Hz is inconsistent with duration {} s",
                samples.len(),
                sample_rate,
                duration
            )));
        }
        if let Some(bad) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "non-finite sample at index {bad}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            duration,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// l2 norm of the sample vector.
    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Pointwise sum `self + other`; lengths must match.
    pub fn add(&self, other: &Signal) -> Result<Signal> {
        if self.len() != other.len() {
            return Err(Error::InvalidSize(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Signal::with_duration(samples, self.sample_rate, self.duration)
    }

    /// Pointwise difference `self - other`; lengths must match.
    pub fn subtract(&self, other: &Signal) -> Result<Signal> {
        if self.len() != other.len() {
            return Err(Error::InvalidSize(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        Signal::with_duration(samples, self.sample_rate, self.duration)
    }
}

/// Parameters of the two-tone test signal
/// `cos(2*pi*x) + a*cos(2*pi*f*x + phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoToneParams {
    /// Amplitude of the low-frequency tone, a >= 0.
    pub amplitude: f64,
    /// Frequency of the low tone in Hz, strictly inside (0, 1).
    pub frequency: f64,
    /// Phase offset of the low tone in radians.
    pub phase: f64,
}

impl TwoToneParams {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if frequency.is_nan() || frequency <= 0.0 || frequency >= 1.0 {
            return Err(Error::InvalidFrequency(frequency));
        }
        if amplitude < 0.0 || !amplitude.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidSignal(format!(
                "two-tone amplitude/phase must be finite with amplitude >= 0, got a={amplitude}, phi={phase}"
            )));
        }
        Ok(Self {
            amplitude,
            frequency,
            phase,
        })
    }
}

/// Samples `cos(2*pi*x) + a*cos(2*pi*f*x + phi)` at `x_k = k / sample_rate`
/// for `k = 0..round(duration * sample_rate)`.
pub fn generate_two_tone(
    params: &TwoToneParams,
    duration: f64,
    sample_rate: f64,
) -> Result<Signal> {
    if sample_rate.is_nan() || duration.is_nan() || sample_rate <= 0.0 || duration <= 0.0 {
        return Err(Error::InvalidSize(format!(
            "duration and sample rate must be positive, got n={duration}, fs={sample_rate}"
        )));
    }
    let p = (duration * sample_rate).round() as usize;
    if p < 4 {
        return Err(Error::InvalidSize(format!(
            "two-tone needs at least 4 samples, duration*rate gives {p}"
        )));
    }
    let t = 1.0 / sample_rate;
    let two_pi = std::f64::consts::TAU;
    let samples = (0..p)
        .map(|k| {
            let x = k as f64 * t;
            (two_pi * x).cos()
                + params.amplitude * (two_pi * params.frequency * x + params.phase).cos()
        })
        .collect();
    Signal::with_duration(samples, sample_rate, duration)
}

/// Counts strict interior extrema.
///
/// Boundary samples never count. A plateau — a maximal run of equal samples —
/// counts as a single extremum when it is flanked by a rise on one side and a
/// fall on the other (in either order). A constant signal therefore has zero
/// extrema. Implemented by counting sign changes between consecutive nonzero
/// first differences, which realizes exactly that rule.
pub fn count_extrema(signal: &Signal) -> usize {
    let s = signal.samples();
    let mut count = 0usize;
    let mut last_sign = 0i8;
    for w in s.windows(2) {
        let d = w[1] - w[0];
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            continue;
        };
        if last_sign != 0 && sign != last_sign {
            count += 1;
        }
        last_sign = sign;
    }
    count
}

/// `order`-fold application of the first-difference stencil, scaled by the
/// sample rate at each application: central differences in the interior and
/// one-sided differences at the two boundary samples. Output length equals
/// input length.
pub fn finite_difference(signal: &Signal, order: usize) -> Result<Signal> {
    let p = signal.len();
    if order > 0 && p <= 2 * order {
        return Err(Error::OrderTooLarge { order, len: p });
    }
    let fs = signal.sample_rate();
    let mut cur = signal.samples().to_vec();
    for _ in 0..order {
        let mut next = vec![0.0; p];
        next[0] = (cur[1] - cur[0]) * fs;
        for k in 1..p - 1 {
            next[k] = (cur[k + 1] - cur[k - 1]) * 0.5 * fs;
        }
        next[p - 1] = (cur[p - 1] - cur[p - 2]) * fs;
        cur = next;
    }
    Signal::with_duration(cur, fs, signal.duration())
}

/// How [`extend_signal`] continues a signal past its ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionMode {
    /// Wrap around: the left pad repeats the tail, the right pad the head.
    Periodic,
    /// Mirror about each endpoint without repeating the endpoint sample.
    ReflectEven,
    /// Mirror anti-symmetrically about the endpoint value.
    ReflectOdd,
}

/// Prepends and appends `pad` samples continuing the signal in the given mode.
/// The result has `len + 2*pad` samples at the same rate.
pub fn extend_signal(signal: &Signal, pad: usize, mode: ExtensionMode) -> Result<Signal> {
    let p = signal.len();
    if pad > p {
        return Err(Error::PadTooLarge { pad, len: p });
    }
    let s = signal.samples();
    let mut out = Vec::with_capacity(p + 2 * pad);
    match mode {
        ExtensionMode::Periodic => {
            out.extend_from_slice(&s[p - pad..]);
            out.extend_from_slice(s);
            out.extend_from_slice(&s[..pad]);
        }
        ExtensionMode::ReflectEven | ExtensionMode::ReflectOdd => {
            // Reflections chain when the pad outruns the source: each pass
            // mirrors what has been built so far, like fan-folding a strip.
            let left = reflect(s, pad, mode, true);
            let right = reflect(s, pad, mode, false);
            out.extend(left.into_iter().rev());
            out.extend_from_slice(s);
            out.extend(right);
        }
    }
    let fs = signal.sample_rate();
    Signal::with_duration(out, fs, (p + 2 * pad) as f64 / fs)
}

/// Samples walking outward from one end: index 0 of the result is the sample
/// adjacent to the boundary. `left` selects which end is extended.
fn reflect(s: &[f64], pad: usize, mode: ExtensionMode, left: bool) -> Vec<f64> {
    // `history` holds every known sample ordered from the current outer edge
    // inward; history[0] is the pivot of the next reflection.
    let mut history: Vec<f64> = if left {
        s.to_vec()
    } else {
        s.iter().rev().copied().collect()
    };
    let mut out = Vec::with_capacity(pad);
    while out.len() < pad {
        let pivot = history[0];
        let take = (pad - out.len()).min(history.len() - 1);
        for &h in &history[1..=take] {
            let v = match mode {
                ExtensionMode::ReflectEven => h,
                ExtensionMode::ReflectOdd => 2.0 * pivot - h,
                ExtensionMode::Periodic => unreachable!(),
            };
            out.push(v);
        }
        if out.len() < pad {
            // The pad outran the source: fold again about the newly exposed
            // edge, which now sees everything emitted so far plus the old
            // history on its inward side.
            let mut folded: Vec<f64> = out.iter().rev().copied().collect();
            folded.extend_from_slice(&history);
            history = folded;
        }
    }
    out
}
