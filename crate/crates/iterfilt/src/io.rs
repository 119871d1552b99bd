//! CSV and JSON serialization for signals, filters, grids, and run manifests.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), enough for
//! a bit-exact round trip, and all writers emit in a fixed order so identical
//! inputs produce identical bytes.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::benchmark::{C1Grid, CriticalCurve};
use crate::error::{Error, Result};
use crate::filters::{Filter, FilterSpectrum};
use crate::signal::Signal;

/// Formats one value the way every writer in this module does.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

fn parse_float(token: &str, line: usize) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: expected a number, got {token:?}")))
}

/// Writes `# fs=<rate> n=<duration>` then one sample per line.
pub fn write_signal_csv<W: Write>(writer: &mut W, signal: &Signal) -> Result<()> {
    writeln!(
        writer,
        "# fs={} n={}",
        format_float(signal.sample_rate()),
        format_float(signal.duration())
    )?;
    for &sample in signal.samples() {
        writeln!(writer, "{}", format_float(sample))?;
    }
    Ok(())
}

/// Parses the format written by [`write_signal_csv`]. Blank lines are
/// skipped; any malformed header or sample line is a parse error.
pub fn read_signal_csv<R: BufRead>(reader: R) -> Result<Signal> {
    let mut sample_rate = None;
    let mut duration = None;
    let mut samples = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            for token in rest.split_whitespace() {
                if let Some(value) = token.strip_prefix("fs=") {
                    sample_rate = Some(parse_float(value, index + 1)?);
                } else if let Some(value) = token.strip_prefix("n=") {
                    duration = Some(parse_float(value, index + 1)?);
                }
            }
            continue;
        }
        samples.push(parse_float(text, index + 1)?);
    }
    let sample_rate =
        sample_rate.ok_or_else(|| Error::Parse("missing fs= in signal header".into()))?;
    let duration = duration.ok_or_else(|| Error::Parse("missing n= in signal header".into()))?;
    Signal::with_duration(samples, sample_rate, duration)
}

/// Writes `# L=<half-length> doubly_convolved=<bool>` then one tap per line.
pub fn write_filter_csv<W: Write>(writer: &mut W, filter: &Filter) -> Result<()> {
    writeln!(
        writer,
        "# L={} doubly_convolved={}",
        filter.half_length(),
        filter.is_doubly_convolved()
    )?;
    for &tap in filter.taps() {
        writeln!(writer, "{}", format_float(tap))?;
    }
    Ok(())
}

/// Parses the format written by [`write_filter_csv`], re-validating symmetry
/// and non-negativity through the usual constructor.
pub fn read_filter_csv<R: BufRead>(reader: R) -> Result<Filter> {
    let mut half_length = None;
    let mut doubly_convolved = None;
    let mut taps = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            for token in rest.split_whitespace() {
                if let Some(value) = token.strip_prefix("L=") {
                    half_length = Some(value.parse::<usize>().map_err(|_| {
                        Error::Parse(format!("line {}: bad L value {value:?}", index + 1))
                    })?);
                } else if let Some(value) = token.strip_prefix("doubly_convolved=") {
                    doubly_convolved = Some(value.parse::<bool>().map_err(|_| {
                        Error::Parse(format!(
                            "line {}: bad doubly_convolved value {value:?}",
                            index + 1
                        ))
                    })?);
                }
            }
            continue;
        }
        taps.push(parse_float(text, index + 1)?);
    }
    let half_length =
        half_length.ok_or_else(|| Error::Parse("missing L= in filter header".into()))?;
    let doubly_convolved = doubly_convolved
        .ok_or_else(|| Error::Parse("missing doubly_convolved= in filter header".into()))?;
    let filter = Filter::new(taps, doubly_convolved)?;
    if filter.half_length() != half_length {
        return Err(Error::Parse(format!(
            "header says L={half_length} but {} taps imply L={}",
            filter.len(),
            filter.half_length()
        )));
    }
    Ok(filter)
}

/// Writes `# p=<period>` (plus ` zero_bin=<bin>` when one was enforced) then
/// one eigenvalue per line.
pub fn write_spectrum_csv<W: Write>(
    writer: &mut W,
    spectrum: &FilterSpectrum,
    zero_bin: Option<usize>,
) -> Result<()> {
    match zero_bin {
        Some(bin) => writeln!(writer, "# p={} zero_bin={bin}", spectrum.period())?,
        None => writeln!(writer, "# p={}", spectrum.period())?,
    }
    for &lambda in spectrum.eigenvalues() {
        writeln!(writer, "{}", format_float(lambda))?;
    }
    Ok(())
}

/// Writes a c1 grid: amplitude axis, frequency axis, a metadata line, then
/// one comma-separated row per amplitude.
pub fn write_grid_csv<W: Write>(writer: &mut W, grid: &C1Grid) -> Result<()> {
    let join = |values: &[f64]| {
        values
            .iter()
            .map(|&v| format_float(v))
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(writer, "# axis=a {}", join(&grid.a_values))?;
    writeln!(writer, "# axis=f {}", join(&grid.f_values))?;
    let meta = &grid.metadata;
    writeln!(
        writer,
        "# meta strategy={} filter={} n={} fs={} mode={} iterations={} frequencies={} delta={} phases={}",
        meta.strategy,
        meta.filter_shape,
        format_float(meta.duration),
        format_float(meta.sample_rate),
        meta.mode,
        meta.iterations,
        meta.frequency_mode,
        format_float(meta.delta),
        grid.phi_values.len()
    )?;
    for row in &grid.c1 {
        let line = row
            .iter()
            .map(|&v| format_float(v))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

/// Everything a reader can recover from a grid CSV without the original
/// configuration: both axes, the matrix, and the metadata as written.
#[derive(Debug, Clone)]
pub struct ParsedGrid {
    pub a_values: Vec<f64>,
    pub f_values: Vec<f64>,
    pub c1: Vec<Vec<f64>>,
    pub meta: BTreeMap<String, String>,
}

/// Parses the format written by [`write_grid_csv`].
pub fn read_grid_csv<R: BufRead>(reader: R) -> Result<ParsedGrid> {
    let mut a_values = Vec::new();
    let mut f_values = Vec::new();
    let mut meta = BTreeMap::new();
    let mut c1 = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            let mut tokens = rest.split_whitespace();
            match tokens.next() {
                Some("axis=a") => {
                    a_values = tokens
                        .map(|t| parse_float(t, index + 1))
                        .collect::<Result<_>>()?;
                }
                Some("axis=f") => {
                    f_values = tokens
                        .map(|t| parse_float(t, index + 1))
                        .collect::<Result<_>>()?;
                }
                Some("meta") => {
                    for token in tokens {
                        if let Some((key, value)) = token.split_once('=') {
                            meta.insert(key.to_string(), value.to_string());
                        }
                    }
                }
                _ => {}
            }
            continue;
        }
        let row = text
            .split(',')
            .map(|t| parse_float(t, index + 1))
            .collect::<Result<Vec<f64>>>()?;
        c1.push(row);
    }
    if a_values.is_empty() || f_values.is_empty() {
        return Err(Error::Parse("grid CSV is missing an axis header".into()));
    }
    if c1.len() != a_values.len() || c1.iter().any(|row| row.len() != f_values.len()) {
        return Err(Error::Parse(format!(
            "grid CSV is {}x{} but axes say {}x{}",
            c1.len(),
            c1.first().map_or(0, Vec::len),
            a_values.len(),
            f_values.len()
        )));
    }
    Ok(ParsedGrid {
        a_values,
        f_values,
        c1,
        meta,
    })
}

/// Writes one critical curve: `e,<exponent>` then one `f,a` pair per line.
pub fn write_curve_csv<W: Write>(writer: &mut W, curve: &CriticalCurve) -> Result<()> {
    writeln!(writer, "e,{}", curve.exponent)?;
    for &(f, a) in &curve.points {
        writeln!(writer, "{},{}", format_float(f), format_float(a))?;
    }
    Ok(())
}

/// Record of one CLI run, written next to the artifacts it describes.
///
/// Rerunning the same command on the same inputs reproduces every sibling
/// file byte for byte; only `duration_seconds` varies between runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// The subcommand that ran.
    pub command: String,
    /// Fully resolved settings after defaulting, as a JSON tree.
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Wall-clock time of the run in seconds.
    pub duration_seconds: f64,
    /// Library version that produced the artifacts.
    pub version: String,
}

/// Serializes a manifest as pretty-printed JSON with a trailing newline.
pub fn write_manifest<W: Write>(writer: &mut W, manifest: &RunManifest) -> Result<()> {
    serde_json::to_writer_pretty(&mut *writer, manifest)
        .map_err(|e| Error::Parse(format!("manifest serialization failed: {e}")))?;
    writeln!(writer)?;
    Ok(())
}

/// The crate version, recorded in every manifest.
pub fn library_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{FrequencyMode, GridMetadata};
    use crate::engine::Mode;
    use crate::filters::{build_base_filter, filter_spectrum, FilterShape};

    fn roundtrip_signal(signal: &Signal) -> Signal {
        let mut buf = Vec::new();
        write_signal_csv(&mut buf, signal).unwrap();
        read_signal_csv(buf.as_slice()).unwrap()
    }

    #[test]
    fn signal_roundtrip_is_bit_exact() {
        let samples = vec![0.1, -2.75, 1e-300, std::f64::consts::PI, -0.0, 7.5e102];
        let signal = Signal::with_duration(samples.clone(), 3.0, 2.0).unwrap();
        let back = roundtrip_signal(&signal);
        assert_eq!(back.sample_rate(), 3.0);
        assert_eq!(back.duration(), 2.0);
        for (a, b) in samples.iter().zip(back.samples()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn signal_csv_missing_header_is_parse_error() {
        let text = "1.0\n2.0\n3.0\n4.0\n";
        assert!(matches!(
            read_signal_csv(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn signal_csv_bad_sample_is_parse_error() {
        let text = "# fs=2.0 n=2.0\n1.0\nnot-a-number\n3.0\n4.0\n";
        let err = read_signal_csv(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn filter_roundtrip_preserves_taps_and_flags() {
        let filter = build_base_filter(FilterShape::Triangular, 2).unwrap();
        let mut buf = Vec::new();
        write_filter_csv(&mut buf, &filter).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        // A triangular window is already a self-convolved rectangle.
        assert!(text.starts_with("# L=2 doubly_convolved=true\n"), "{text}");
        let back = read_filter_csv(buf.as_slice()).unwrap();
        assert_eq!(back.taps(), filter.taps());
        assert_eq!(back.half_length(), 2);
        assert!(back.is_doubly_convolved());
    }

    #[test]
    fn filter_csv_header_tap_mismatch_is_parse_error() {
        let text = "# L=3 doubly_convolved=false\n0.25\n0.5\n0.25\n";
        assert!(matches!(
            read_filter_csv(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn spectrum_csv_has_period_and_zero_bin() {
        let filter = build_base_filter(FilterShape::Triangular, 2).unwrap();
        let spectrum = filter_spectrum(&filter, 16).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &spectrum, Some(5)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# p=16 zero_bin=5\n"), "{text}");
        assert_eq!(text.lines().count(), 17);
    }

    fn sample_grid() -> C1Grid {
        C1Grid {
            a_values: vec![0.5, 2.0],
            f_values: vec![0.25, 0.5, 0.75],
            phi_values: vec![0.0, 3.0],
            c1: vec![vec![0.0, 0.125, -1.0], vec![1.0, 0.5, 0.25]],
            metadata: GridMetadata {
                strategy: "extrema(nu=1.94)".into(),
                filter_shape: FilterShape::Triangular,
                duration: 100.0,
                sample_rate: 20.0,
                mode: Mode::DirectPowered,
                iterations: 1000,
                frequency_mode: FrequencyMode::Rational,
                delta: 1e-3,
            },
        }
    }

    #[test]
    fn grid_roundtrip_recovers_axes_matrix_and_meta() {
        let grid = sample_grid();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &grid).unwrap();
        let parsed = read_grid_csv(buf.as_slice()).unwrap();
        assert_eq!(parsed.a_values, grid.a_values);
        assert_eq!(parsed.f_values, grid.f_values);
        assert_eq!(parsed.c1, grid.c1);
        assert_eq!(parsed.meta["strategy"], "extrema(nu=1.94)");
        assert_eq!(parsed.meta["mode"], "powered");
        assert_eq!(parsed.meta["iterations"], "1000");
        assert_eq!(parsed.meta["phases"], "2");
    }

    #[test]
    fn grid_csv_layout_matches_contract() {
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &sample_grid()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# axis=a "));
        assert!(lines[1].starts_with("# axis=f "));
        assert!(lines[2].starts_with("# meta "));
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[3].split(',').count(), 3);
    }

    #[test]
    fn grid_csv_shape_mismatch_is_parse_error() {
        let text = "# axis=a 1.0 2.0\n# axis=f 0.5\n0.1\n";
        assert!(matches!(
            read_grid_csv(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn curve_csv_matches_contract() {
        let curve = CriticalCurve {
            exponent: 2,
            points: vec![(0.5, 4.0), (0.8, 1.5625)],
        };
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "e,2");
        assert_eq!(lines.len(), 3);
        let (f, a) = lines[1].split_once(',').unwrap();
        assert_eq!(f.parse::<f64>().unwrap(), 0.5);
        assert_eq!(a.parse::<f64>().unwrap(), 4.0);
    }

    #[test]
    fn manifest_serialization_is_deterministic() {
        let manifest = RunManifest {
            command: "benchmark".into(),
            config: serde_json::json!({"grid": [8, 8], "strategy": "extrema"}),
            inputs: vec![],
            outputs: vec!["grid.csv".into()],
            duration_seconds: 1.25,
            version: library_version().into(),
        };
        let mut first = Vec::new();
        let mut second = Vec::new();
        write_manifest(&mut first, &manifest).unwrap();
        write_manifest(&mut second, &manifest).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.contains("\"command\": \"benchmark\""));
        assert!(text.contains("\"duration_seconds\""));
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn floats_write_seventeen_significant_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        let tricky = 0.1_f64;
        let parsed: f64 = format_float(tricky).parse().unwrap();
        assert_eq!(parsed.to_bits(), tricky.to_bits());
    }
}
