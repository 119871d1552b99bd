//! Command-line front end: decompose signals, design filters, and run the
//! two-tone separation sweep.
//!
//! Exit codes: 0 on success, 2 for argument or input parse problems, 3 for
//! computation failures (and for a sweep where most cells failed).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use iterfilt::benchmark::{
    critical_curves, sweep_grid, uniform_phases, FrequencyMode, SweepConfig, DEFAULT_PHASE_COUNT,
};
use iterfilt::engine::{decompose, Boundary, DecompositionConfig, Mode, StopReason};
use iterfilt::filters::{build_base_filter, enforce_spectral_zero, filter_spectrum, FilterShape};
use iterfilt::io::{
    library_version, read_signal_csv, write_curve_csv, write_filter_csv, write_grid_csv,
    write_manifest, write_signal_csv, write_spectrum_csv, RunManifest,
};
use iterfilt::mask::MaskStrategy;

const EXIT_PARSE: u8 = 2;
const EXIT_COMPUTE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "iterfilt",
    version,
    about = "Signal decomposition by iterative filtering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a signal CSV into oscillatory components plus a remainder.
    Decompose(DecomposeArgs),
    /// Sweep the two-tone (amplitude, frequency) grid and score separation.
    Benchmark(BenchmarkArgs),
    /// Build a low-pass filter and write its taps and spectrum.
    FilterDesign(FilterDesignArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input signal CSV (`# fs=<rate> n=<duration>` header, one sample per line).
    input: PathBuf,
    /// Directory for component CSVs and the manifest.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Inner-loop stopping threshold.
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    /// Iteration cap (also the power used by the powered mode).
    #[arg(long = "max-iter", default_value_t = 1000)]
    max_iter: u64,
    /// Inner-loop realization: iterative, projection, or powered.
    #[arg(long, default_value = "powered", value_parser = Mode::from_str)]
    mode: Mode,
    /// Mask strategy: extrema, ideal:<freqHz>, or derivative:<d>.
    #[arg(long, default_value = "extrema", value_parser = MaskStrategy::from_str)]
    mask: MaskStrategy,
    /// Base window shape: triangular or bspline3.
    #[arg(long, default_value = "triangular", value_parser = FilterShape::from_str)]
    filter: FilterShape,
    /// Mask-length scale for the extrema and derivative strategies.
    #[arg(long)]
    nu: Option<f64>,
    /// Boundary handling: none, periodic, or reflect-even[:<pad>].
    #[arg(long, default_value = "none", value_parser = Boundary::from_str)]
    boundary: Boundary,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Directory for the grid CSV, curve CSVs, and the manifest.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Mask strategy: extrema, ideal (fast tone), ideal:<freqHz>, or derivative:<d>.
    #[arg(long, default_value = "extrema")]
    strategy: String,
    /// Snap slow-tone frequencies onto the DFT grid (the default).
    #[arg(long, conflicts_with = "irrational")]
    rational: bool,
    /// Nudge slow-tone frequencies off the DFT grid.
    #[arg(long)]
    irrational: bool,
    /// Average each cell over this many uniform phases.
    #[arg(long = "phi-avg", conflicts_with = "phi")]
    phi_avg: Option<usize>,
    /// Evaluate each cell at this single phase.
    #[arg(long)]
    phi: Option<f64>,
    /// Grid size as <na>x<nf>, e.g. 48x48.
    #[arg(long)]
    grid: Option<String>,
    /// Decomposition preset: standard or stress.
    #[arg(long, default_value = "standard")]
    preset: String,
}

#[derive(Args)]
struct FilterDesignArgs {
    /// Directory for the filter CSV, spectrum CSV, and the manifest.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Base window shape: triangular or bspline3.
    #[arg(long, default_value = "triangular", value_parser = FilterShape::from_str)]
    shape: FilterShape,
    /// Filter half-length (must be at least 1).
    #[arg(long = "L")]
    l: usize,
    /// Period for the spectrum (and for zero enforcement).
    #[arg(long, default_value_t = 256)]
    period: usize,
    /// Reshape the filter so its spectrum has an exact zero.
    #[arg(long = "enforce-zero")]
    enforce_zero: bool,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Decompose(args) => run_decompose(&args),
        Command::Benchmark(args) => run_benchmark(&args),
        Command::FilterDesign(args) => run_filter_design(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn parse_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_PARSE,
        message: message.into(),
    }
}

fn compute_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_COMPUTE,
        message: message.into(),
    }
}

/// Honors ITERFILT_THREADS; 0 or unset leaves the pool at its automatic size.
fn init_thread_pool() {
    if let Ok(raw) = std::env::var("ITERFILT_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            Err(_) => eprintln!("warning: ignoring unparsable ITERFILT_THREADS={raw:?}"),
        }
    }
}

fn create_out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| compute_failure(format!("cannot create {}: {e}", dir.display())))
}

fn write_file<F>(path: &Path, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut BufWriter<File>) -> iterfilt::Result<()>,
{
    let file = File::create(path)
        .map_err(|e| compute_failure(format!("cannot create {}: {e}", path.display())))?;
    let mut writer = BufWriter::new(file);
    write(&mut writer).map_err(|e| compute_failure(format!("{}: {e}", path.display())))?;
    writer
        .flush()
        .map_err(|e| compute_failure(format!("{}: {e}", path.display())))
}

fn finish_manifest(
    dir: &Path,
    command: &str,
    config: serde_json::Value,
    inputs: Vec<String>,
    outputs: Vec<String>,
    started: Instant,
) -> Result<(), Failure> {
    let manifest = RunManifest {
        command: command.to_string(),
        config,
        inputs,
        outputs,
        duration_seconds: started.elapsed().as_secs_f64(),
        version: library_version().to_string(),
    };
    write_file(&dir.join("manifest.json"), |w| write_manifest(w, &manifest))
}

fn describe_stop(reason: &StopReason) -> String {
    match reason {
        StopReason::ExtremaGuard => "remainder has fewer than two interior extrema".into(),
        StopReason::NormFloor => "remainder norm reached the floor".into(),
        StopReason::MaskSelectionFailed { message } => {
            format!("mask selection stopped the loop: {message}")
        }
        StopReason::ImfCapReached => "component cap reached".into(),
    }
}

fn run_decompose(args: &DecomposeArgs) -> Result<ExitCode, Failure> {
    let started = Instant::now();

    let mask_strategy = apply_nu(args.mask.clone(), args.nu)?;
    let mut config = DecompositionConfig::standard(mask_strategy);
    config.delta = args.delta;
    config.max_iterations = args.max_iter;
    config.mode = args.mode;
    config.filter_shape = args.filter;
    config.boundary = args.boundary;
    config
        .validate()
        .map_err(|e| parse_failure(e.to_string()))?;

    // Parse the input fully before touching the output directory, so a
    // malformed file leaves nothing behind.
    let file = File::open(&args.input)
        .map_err(|e| parse_failure(format!("cannot open {}: {e}", args.input.display())))?;
    let signal = read_signal_csv(BufReader::new(file))
        .map_err(|e| parse_failure(format!("{}: {e}", args.input.display())))?;

    let result = decompose(&signal, &config).map_err(|e| compute_failure(e.to_string()))?;

    create_out_dir(&args.out)?;
    let mut outputs = Vec::new();
    for (index, imf) in result.imfs.iter().enumerate() {
        let name = format!("imf_{:02}.csv", index + 1);
        write_file(&args.out.join(&name), |w| write_signal_csv(w, imf))?;
        outputs.push(name);
    }
    write_file(&args.out.join("remainder.csv"), |w| {
        write_signal_csv(w, &result.remainder)
    })?;
    outputs.push("remainder.csv".into());

    let config_json = serde_json::json!({
        "decomposition": config,
        "stop_reason": result.stop_reason,
        "diagnostics": result.diagnostics,
    });
    outputs.push("manifest.json".into());
    finish_manifest(
        &args.out,
        "decompose",
        config_json,
        vec![args.input.display().to_string()],
        outputs,
        started,
    )?;

    println!(
        "wrote {} component(s) + remainder to {} ({})",
        result.imfs.len(),
        args.out.display(),
        describe_stop(&result.stop_reason)
    );
    Ok(ExitCode::SUCCESS)
}

fn apply_nu(strategy: MaskStrategy, nu: Option<f64>) -> Result<MaskStrategy, Failure> {
    let Some(nu) = nu else {
        return Ok(strategy);
    };
    match strategy {
        MaskStrategy::Extrema { .. } => Ok(MaskStrategy::Extrema { nu }),
        MaskStrategy::Derivative { order, .. } => Ok(MaskStrategy::Derivative { order, nu }),
        MaskStrategy::Ideal { .. } => Err(parse_failure(
            "--nu only applies to the extrema and derivative strategies",
        )),
    }
}

/// The benchmark always synthesizes the fast tone at 1 Hz, so a bare
/// `ideal` targets that.
fn parse_benchmark_strategy(raw: &str) -> Result<MaskStrategy, Failure> {
    if raw == "ideal" {
        return Ok(MaskStrategy::Ideal {
            target_frequency: 1.0,
        });
    }
    MaskStrategy::from_str(raw).map_err(|e| parse_failure(e.to_string()))
}

fn parse_grid_size(raw: &str) -> Result<(usize, usize), Failure> {
    let bad = || parse_failure(format!("--grid expects <na>x<nf>, got {raw:?}"));
    let (a, f) = raw.split_once('x').ok_or_else(bad)?;
    let na = a.parse::<usize>().map_err(|_| bad())?;
    let nf = f.parse::<usize>().map_err(|_| bad())?;
    if na == 0 || nf == 0 {
        return Err(bad());
    }
    Ok((na, nf))
}

fn run_benchmark(args: &BenchmarkArgs) -> Result<ExitCode, Failure> {
    let started = Instant::now();

    let strategy = parse_benchmark_strategy(&args.strategy)?;
    let mut config = SweepConfig::standard(strategy.clone());
    match args.preset.as_str() {
        "standard" => {
            // An ideal mask owes its machine-precision separation to the
            // exact spectral zero, which only the projection limit exploits
            // fully; the powered default is calibrated for adaptive masks.
            if matches!(strategy, MaskStrategy::Ideal { .. }) {
                config.decomposition.mode = Mode::DirectProjection;
            }
        }
        "stress" => config.decomposition = DecompositionConfig::stress(strategy),
        other => {
            return Err(parse_failure(format!(
                "unknown preset {other:?}, expected standard or stress"
            )))
        }
    }
    if args.irrational {
        config.frequency_mode = FrequencyMode::Irrational;
    }
    if let Some(raw) = &args.grid {
        let (na, nf) = parse_grid_size(raw)?;
        config = config.with_grid(na, nf);
    }
    config.phi_values = match (args.phi_avg, args.phi) {
        (Some(0), _) => return Err(parse_failure("--phi-avg must be at least 1")),
        (Some(count), _) => uniform_phases(count),
        (None, Some(phi)) => vec![phi],
        (None, None) => uniform_phases(DEFAULT_PHASE_COUNT),
    };
    config
        .validate()
        .map_err(|e| parse_failure(e.to_string()))?;

    let report = sweep_grid(&config).map_err(|e| compute_failure(e.to_string()))?;
    for line in &report.error_log {
        eprintln!("cell failed: {line}");
    }

    create_out_dir(&args.out)?;
    let mut outputs = vec!["grid.csv".to_string()];
    write_file(&args.out.join("grid.csv"), |w| {
        write_grid_csv(w, &report.grid)
    })?;
    let curves = critical_curves(&config.a_values, &config.f_values, &[1, 2, 3, 4]);
    for curve in &curves {
        let name = format!("curve_e{}.csv", curve.exponent);
        write_file(&args.out.join(&name), |w| write_curve_csv(w, curve))?;
        outputs.push(name);
    }
    outputs.push("manifest.json".into());
    finish_manifest(
        &args.out,
        "benchmark",
        serde_json::json!({ "sweep": config }),
        Vec::new(),
        outputs,
        started,
    )?;

    let failed = report.grid.failed_cells();
    let total = report.grid.total_cells();
    println!(
        "swept {total} cells ({failed} failed) into {}",
        args.out.display()
    );
    if 2 * failed > total {
        return Err(compute_failure(format!("{failed} of {total} cells failed")));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_filter_design(args: &FilterDesignArgs) -> Result<ExitCode, Failure> {
    let started = Instant::now();
    if args.l == 0 {
        return Err(parse_failure(
            "--L must be at least 1 (a half-length of 0 is not a filter)",
        ));
    }

    let base = build_base_filter(args.shape, args.l).map_err(|e| compute_failure(e.to_string()))?;
    let (filter, zero_bin) = if args.enforce_zero {
        let (enforced, bin) = enforce_spectral_zero(&base, args.period)
            .map_err(|e| compute_failure(e.to_string()))?;
        (enforced, Some(bin))
    } else {
        (base, None)
    };
    let spectrum =
        filter_spectrum(&filter, args.period).map_err(|e| compute_failure(e.to_string()))?;

    create_out_dir(&args.out)?;
    write_file(&args.out.join("filter.csv"), |w| {
        write_filter_csv(w, &filter)
    })?;
    write_file(&args.out.join("spectrum.csv"), |w| {
        write_spectrum_csv(w, &spectrum, zero_bin)
    })?;

    let config_json = serde_json::json!({
        "shape": args.shape,
        "half_length": args.l,
        "period": args.period,
        "enforce_zero": args.enforce_zero,
        "zero_bin": zero_bin,
    });
    finish_manifest(
        &args.out,
        "filter-design",
        config_json,
        Vec::new(),
        vec![
            "filter.csv".into(),
            "spectrum.csv".into(),
            "manifest.json".into(),
        ],
        started,
    )?;

    match zero_bin {
        Some(bin) => println!(
            "wrote half-length {} filter with spectral zero at bin {bin} to {}",
            filter.half_length(),
            args.out.display()
        ),
        None => println!(
            "wrote half-length {} filter to {}",
            filter.half_length(),
            args.out.display()
        ),
    }
    Ok(ExitCode::SUCCESS)
}
