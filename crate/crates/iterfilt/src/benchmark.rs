//! Two-tone separation benchmark.
//!
//! The experiment: build `cos(2πx) + a·cos(2πfx + φ)`, run the decomposition,
//! and score how cleanly the first extracted component matches the fast tone.
//! Sweeping (a, f) over a grid and averaging over φ produces the familiar
//! amplitude/frequency heat map whose success region is bounded by the
//! critical curves `a·f^e = 1`.

use std::f64::consts::{SQRT_2, TAU};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{decompose, DecompositionConfig, Mode};
use crate::error::{Error, Result};
use crate::filters::FilterShape;
use crate::mask::MaskStrategy;
use crate::signal::{generate_two_tone, Signal, TwoToneParams};

/// Default signal length in seconds. With [`DEFAULT_SAMPLE_RATE`] this gives
/// 2000 samples and a DFT resolution of 0.01 Hz, so the rational-mode
/// frequency grid is the set of multiples of 0.01 inside (0, 1).
pub const DEFAULT_DURATION: f64 = 100.0;
/// Default sampling rate in samples per second.
pub const DEFAULT_SAMPLE_RATE: f64 = 20.0;
/// Default number of points per grid axis.
pub const DEFAULT_GRID_POINTS: usize = 48;
/// Default number of uniformly spaced phases averaged per cell.
pub const DEFAULT_PHASE_COUNT: usize = 16;
/// Phase used when a sweep runs at a single φ instead of averaging.
pub const DEFAULT_SINGLE_PHASE: f64 = 3.0;
/// Default slow-tone amplitude range (log-spaced axis).
pub const AMPLITUDE_RANGE: (f64, f64) = (1e-2, 1e2);
/// Default slow-tone frequency range (linear axis).
pub const FREQUENCY_RANGE: (f64, f64) = (0.05, 0.95);

/// Sentinel stored in the grid for a cell whose evaluation failed.
pub const FAILED_CELL: f64 = -1.0;

/// How the nominal frequency axis maps onto actual test frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyMode {
    /// Snap each f to the nearest DFT bin, i.e. the nearest multiple of
    /// 1/duration inside (0, 1). Both tones then sit exactly on bins.
    Rational,
    /// Nudge each f off the DFT grid: `f · (1 + (√2 − 1)/100)`.
    Irrational,
}

impl FromStr for FrequencyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(FrequencyMode::Rational),
            "irrational" => Ok(FrequencyMode::Irrational),
            other => Err(Error::Parse(format!(
                "unknown frequency mode {other:?}, expected rational or irrational"
            ))),
        }
    }
}

impl std::fmt::Display for FrequencyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrequencyMode::Rational => write!(f, "rational"),
            FrequencyMode::Irrational => write!(f, "irrational"),
        }
    }
}

/// Everything a sweep needs: the axes, the signal dimensions, and the
/// decomposition settings applied to every cell.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    /// Slow-tone amplitudes, one grid row each.
    pub a_values: Vec<f64>,
    /// Nominal slow-tone frequencies, one grid column each. The actual test
    /// frequency per cell comes from [`SweepConfig::effective_frequency`].
    pub f_values: Vec<f64>,
    /// Phases evaluated per cell; the cell value is their arithmetic mean.
    pub phi_values: Vec<f64>,
    /// Signal length in seconds.
    pub duration: f64,
    /// Samples per second.
    pub sample_rate: f64,
    pub frequency_mode: FrequencyMode,
    /// Per-cell decomposition settings, including the mask strategy.
    pub decomposition: DecompositionConfig,
}

impl SweepConfig {
    /// The default experiment: 48×48 grid, a ∈ [1e−2, 1e2] log-spaced,
    /// f ∈ [0.05, 0.95], 16-phase averaging, rational frequencies, and the
    /// standard decomposition preset.
    pub fn standard(mask_strategy: MaskStrategy) -> Self {
        SweepConfig {
            a_values: log_spaced(AMPLITUDE_RANGE.0, AMPLITUDE_RANGE.1, DEFAULT_GRID_POINTS),
            f_values: lin_spaced(FREQUENCY_RANGE.0, FREQUENCY_RANGE.1, DEFAULT_GRID_POINTS),
            phi_values: uniform_phases(DEFAULT_PHASE_COUNT),
            duration: DEFAULT_DURATION,
            sample_rate: DEFAULT_SAMPLE_RATE,
            frequency_mode: FrequencyMode::Rational,
            decomposition: DecompositionConfig::standard(mask_strategy),
        }
    }

    /// Resize both axes, keeping the default ranges.
    pub fn with_grid(mut self, a_count: usize, f_count: usize) -> Self {
        self.a_values = log_spaced(AMPLITUDE_RANGE.0, AMPLITUDE_RANGE.1, a_count);
        self.f_values = lin_spaced(FREQUENCY_RANGE.0, FREQUENCY_RANGE.1, f_count);
        self
    }

    /// Evaluate every cell at one fixed phase instead of averaging.
    pub fn with_single_phase(mut self, phi: f64) -> Self {
        self.phi_values = vec![phi];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_values.is_empty() || self.f_values.is_empty() || self.phi_values.is_empty() {
            return Err(Error::InvalidSize(
                "sweep axes and phase set must be nonempty".into(),
            ));
        }
        if !self.a_values.iter().all(|&a| a.is_finite() && a > 0.0) {
            return Err(Error::InvalidSize(
                "amplitude axis must be finite and positive".into(),
            ));
        }
        if !self.f_values.iter().all(|&f| f > 0.0 && f < 1.0) {
            return Err(Error::InvalidSize(
                "frequency axis must lie strictly inside (0, 1)".into(),
            ));
        }
        if !self.phi_values.iter().all(|phi| phi.is_finite()) {
            return Err(Error::InvalidSize("phases must be finite".into()));
        }
        if !(self.duration > 0.0 && self.sample_rate > 0.0) {
            return Err(Error::InvalidSize(format!(
                "duration and sample rate must be positive, got n={}, fs={}",
                self.duration, self.sample_rate
            )));
        }
        self.decomposition.validate()
    }

    /// The frequency actually synthesized for a nominal axis value: snapped
    /// to the nearest multiple of 1/duration in rational mode, nudged
    /// off-grid in irrational mode.
    pub fn effective_frequency(&self, f: f64) -> f64 {
        match self.frequency_mode {
            FrequencyMode::Rational => snap_frequency(f, self.duration),
            FrequencyMode::Irrational => offset_frequency(f),
        }
    }
}

/// Nearest on-grid frequency: round(f·n)/n clamped to {1/n, …, (n−1)/n}.
pub fn snap_frequency(f: f64, duration: f64) -> f64 {
    let n = duration;
    let hi = (n - 1.0).max(1.0);
    let k = (f * n).round().clamp(1.0, hi);
    k / n
}

/// Push a frequency off the DFT grid by a fixed relative irrational amount.
pub fn offset_frequency(f: f64) -> f64 {
    f * (1.0 + (SQRT_2 - 1.0) / 100.0)
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0, "log spacing needs positive endpoints");
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![lo];
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (count - 1) as f64;
    let mut values: Vec<f64> = (0..count)
        .map(|k| (ln_lo + k as f64 * step).exp())
        .collect();
    values[0] = lo;
    values[count - 1] = hi;
    values
}

/// `count` linearly spaced points from `lo` to `hi` inclusive.
pub fn lin_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    let mut values: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
    values[0] = lo;
    values[count - 1] = hi;
    values
}

/// `count` phases uniformly covering [0, 2π): k·2π/count.
pub fn uniform_phases(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * TAU / count as f64).collect()
}

/// Settings recorded alongside a finished grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridMetadata {
    /// Mask strategy, in its flag spelling (e.g. `extrema(nu=1.94)`).
    pub strategy: String,
    pub filter_shape: FilterShape,
    /// Signal length in seconds.
    pub duration: f64,
    pub sample_rate: f64,
    pub mode: Mode,
    /// Inner-loop iteration cap (the power used by the closed form).
    pub iterations: u64,
    pub frequency_mode: FrequencyMode,
    pub delta: f64,
}

/// A finished sweep: the c1 score per (amplitude, frequency) cell.
#[derive(Debug, Clone, Serialize)]
pub struct C1Grid {
    pub a_values: Vec<f64>,
    pub f_values: Vec<f64>,
    pub phi_values: Vec<f64>,
    /// Row-per-amplitude matrix: `c1[i][j]` scores `(a_values[i], f_values[j])`,
    /// averaged over `phi_values`. Failed cells hold [`FAILED_CELL`].
    pub c1: Vec<Vec<f64>>,
    pub metadata: GridMetadata,
}

impl C1Grid {
    pub fn total_cells(&self) -> usize {
        self.a_values.len() * self.f_values.len()
    }

    pub fn failed_cells(&self) -> usize {
        self.c1
            .iter()
            .flat_map(|row| row.iter())
            .filter(|&&v| v == FAILED_CELL)
            .count()
    }
}

/// Per-evaluation record: which cell, which phase, what the mask and the
/// inner loop did, and the resulting score.
#[derive(Debug, Clone, Serialize)]
pub struct CellDiagnostics {
    pub a_index: usize,
    pub f_index: usize,
    pub amplitude: f64,
    /// Effective (snapped or offset) frequency, not the nominal axis value.
    pub frequency: f64,
    pub phase: f64,
    pub mask_half_length: usize,
    pub iterations: u64,
    pub c1: f64,
}

/// Grid plus the evaluation trail: one diagnostics row per successful
/// (cell, phase) run and one log line per failed cell.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub grid: C1Grid,
    pub cell_diagnostics: Vec<CellDiagnostics>,
    pub error_log: Vec<String>,
}

struct CellOutcome {
    a_index: usize,
    f_index: usize,
    c1: f64,
    diagnostics: Vec<CellDiagnostics>,
    errors: Vec<String>,
}

/// Separation quality of a candidate fast component.
///
/// Computes `‖imf1 − cos(2πx)‖₂ / ‖a·cos(2πfx + φ)‖₂` with both references
/// sampled exactly like [`generate_two_tone`]. Perfect extraction of the
/// fast tone scores 0; an untouched input scores 1 (the numerator is then
/// exactly the slow component); an all-zero component scores ‖HF‖/‖a·LF‖,
/// about 1/a when both tones sit on DFT bins.
///
/// The component must already be trimmed to the reference length — the
/// decomposition returns components with any boundary padding removed, so
/// its output can be passed straight in.
pub fn c1_metric(
    imf1: &Signal,
    params: &TwoToneParams,
    duration: f64,
    sample_rate: f64,
) -> Result<f64> {
    if params.amplitude == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    if !(duration > 0.0 && sample_rate > 0.0) {
        return Err(Error::InvalidSize(format!(
            "duration and sample rate must be positive, got n={duration}, fs={sample_rate}"
        )));
    }
    let p = (duration * sample_rate).round() as usize;
    if imf1.len() != p {
        return Err(Error::InvalidSize(format!(
            "component has {} samples but the reference tones have {p}",
            imf1.len()
        )));
    }
    let dt = 1.0 / sample_rate;
    let mut residual_sq = 0.0;
    let mut slow_sq = 0.0;
    for (k, &y) in imf1.samples().iter().enumerate() {
        let x = k as f64 * dt;
        let fast = (TAU * x).cos();
        let slow = params.amplitude * (TAU * params.frequency * x + params.phase).cos();
        residual_sq += (y - fast) * (y - fast);
        slow_sq += slow * slow;
    }
    if slow_sq == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((residual_sq / slow_sq).sqrt())
}

/// Runs the full (a, f) sweep, φ-averaging each cell.
///
/// Cells are independent and evaluated in parallel; the result depends only
/// on the configuration, never on scheduling. A cell whose evaluation fails
/// keeps the sweep alive: its grid entry becomes [`FAILED_CELL`] and the
/// failure is recorded in the report's error log.
pub fn sweep_grid(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    // Only the first component is scored, so stop the outer loop after it.
    let mut cell_config = config.decomposition.clone();
    cell_config.max_imfs = 1;

    let nf = config.f_values.len();
    let cells: Vec<(usize, usize)> = (0..config.a_values.len())
        .flat_map(|ai| (0..nf).map(move |fi| (ai, fi)))
        .collect();

    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|&(ai, fi)| evaluate_cell(config, &cell_config, ai, fi))
        .collect();

    let mut c1 = vec![vec![0.0; nf]; config.a_values.len()];
    let mut cell_diagnostics = Vec::new();
    let mut error_log = Vec::new();
    for outcome in outcomes {
        c1[outcome.a_index][outcome.f_index] = outcome.c1;
        cell_diagnostics.extend(outcome.diagnostics);
        error_log.extend(outcome.errors);
    }

    let grid = C1Grid {
        a_values: config.a_values.clone(),
        f_values: config.f_values.clone(),
        phi_values: config.phi_values.clone(),
        c1,
        metadata: GridMetadata {
            strategy: config.decomposition.mask_strategy.to_string(),
            filter_shape: config.decomposition.filter_shape,
            duration: config.duration,
            sample_rate: config.sample_rate,
            mode: config.decomposition.mode,
            iterations: config.decomposition.max_iterations,
            frequency_mode: config.frequency_mode,
            delta: config.decomposition.delta,
        },
    };
    Ok(SweepReport {
        grid,
        cell_diagnostics,
        error_log,
    })
}

fn evaluate_cell(
    config: &SweepConfig,
    cell_config: &DecompositionConfig,
    a_index: usize,
    f_index: usize,
) -> CellOutcome {
    let amplitude = config.a_values[a_index];
    let frequency = config.effective_frequency(config.f_values[f_index]);
    let mut sum = 0.0;
    let mut diagnostics = Vec::with_capacity(config.phi_values.len());
    for &phase in &config.phi_values {
        match evaluate_once(config, cell_config, amplitude, frequency, phase) {
            Ok((c1, mask_half_length, iterations)) => {
                sum += c1;
                diagnostics.push(CellDiagnostics {
                    a_index,
                    f_index,
                    amplitude,
                    frequency,
                    phase,
                    mask_half_length,
                    iterations,
                    c1,
                });
            }
            Err(e) => {
                return CellOutcome {
                    a_index,
                    f_index,
                    c1: FAILED_CELL,
                    diagnostics,
                    errors: vec![format!(
                        "cell a={amplitude:.6e} f={frequency:.6e} phi={phase:.6e}: {e}"
                    )],
                };
            }
        }
    }
    CellOutcome {
        a_index,
        f_index,
        c1: sum / config.phi_values.len() as f64,
        diagnostics,
        errors: Vec::new(),
    }
}

fn evaluate_once(
    config: &SweepConfig,
    cell_config: &DecompositionConfig,
    amplitude: f64,
    frequency: f64,
    phase: f64,
) -> Result<(f64, usize, u64)> {
    let params = TwoToneParams::new(amplitude, frequency, phase)?;
    let signal = generate_two_tone(&params, config.duration, config.sample_rate)?;
    let result = decompose(&signal, cell_config)?;
    let imf1 = result
        .imfs
        .first()
        .ok_or_else(|| Error::MaskSelectionFailed("no component extracted".into()))?;
    let c1 = c1_metric(imf1, &params, config.duration, config.sample_rate)?;
    let diag = &result.diagnostics[0];
    Ok((c1, diag.mask_half_length, diag.iterations))
}

/// One locus `a = f^(−e)`, sampled on the frequency axis and restricted to
/// the amplitude range.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalCurve {
    pub exponent: u32,
    /// (f, a) pairs with a inside the grid's amplitude range.
    pub points: Vec<(f64, f64)>,
}

/// Boundaries of the separation regimes: for each exponent e, the curve
/// `a·f^e = 1` over the given frequency axis, keeping only points whose
/// amplitude falls inside [min(a_values), max(a_values)].
pub fn critical_curves(
    a_values: &[f64],
    f_values: &[f64],
    exponents: &[u32],
) -> Vec<CriticalCurve> {
    let a_lo = a_values.iter().copied().fold(f64::INFINITY, f64::min);
    let a_hi = a_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    exponents
        .iter()
        .map(|&e| CriticalCurve {
            exponent: e,
            points: f_values
                .iter()
                .map(|&f| (f, f.powi(-(e as i32))))
                .filter(|&(_, a)| a >= a_lo && a <= a_hi)
                .collect(),
        })
        .collect()
}
