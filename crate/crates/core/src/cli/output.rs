use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat};
use super::CliError;
use crate::witness::WitnessKind;

/// One optimized (or transition) witness evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub m: usize,
    pub n: u32,
    pub p: f64,
    pub delta_sq: f64,
    #[serde(rename = "Delta_sq")]
    pub ref_spread_sq: f64,
    pub witness_kind: WitnessKind,
    pub witness_value: f64,
    pub bound: f64,
    pub violated: bool,
    pub angles: Vec<f64>,
    pub seed: u64,
}

/// One correlator value from `correlate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub regime: &'static str,
    pub n: u32,
    pub p: f64,
    pub delta_sq: f64,
    #[serde(rename = "Delta_sq")]
    pub ref_spread_sq: f64,
    pub theta_i: f64,
    pub theta_j: f64,
    pub value: f64,
    pub seed: u64,
}

pub trait CsvRow: Serialize {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRow for ResultRow {
    const HEADER: &'static [&'static str] = &[
        "m",
        "n",
        "p",
        "delta_sq",
        "Delta_sq",
        "witness_kind",
        "witness_value",
        "bound",
        "violated",
        "angles",
        "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            self.n.to_string(),
            sig12(self.p),
            sig12(self.delta_sq),
            sig12(self.ref_spread_sq),
            self.witness_kind.to_string(),
            sig12(self.witness_value),
            sig12(self.bound),
            self.violated.to_string(),
            self.angles
                .iter()
                .map(|a| sig12(*a))
                .collect::<Vec<_>>()
                .join(";"),
            self.seed.to_string(),
        ]
    }
}

impl CsvRow for CorrelationRow {
    const HEADER: &'static [&'static str] = &[
        "regime", "n", "p", "delta_sq", "Delta_sq", "theta_i", "theta_j", "value", "seed",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.regime.to_string(),
            self.n.to_string(),
            sig12(self.p),
            sig12(self.delta_sq),
            sig12(self.ref_spread_sq),
            sig12(self.theta_i),
            sig12(self.theta_j),
            sig12(self.value),
            self.seed.to_string(),
        ]
    }
}

/// Formats with 12 significant digits, shortest representation.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float");
    if rounded != 0.0 && (rounded.abs() < 1e-6 || rounded.abs() >= 1e15) {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

fn header_lines(command: &str, config: &ExperimentConfig) -> Vec<String> {
    let json = serde_json::to_string(config).expect("config serializes");
    vec![
        format!("# fuzzy-witness {} {command}", env!("CARGO_PKG_VERSION")),
        format!("# seed: {}", config.optimizer.seed),
        format!("# config: {json}"),
    ]
}

fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes rows to `config.out` (or stdout) in the configured format.
///
/// CSV output starts with `#` comment lines holding the resolved config. JSON
/// output is a bare array of row objects, so the config goes to a sidecar
/// `<out>.config.json` instead.
pub fn write_rows<R: CsvRow>(
    command: &str,
    config: &ExperimentConfig,
    rows: &[R],
) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    let mut w = open(config.out.as_deref())?;
    match config.format {
        OutputFormat::Csv => {
            for line in header_lines(command, config) {
                writeln!(w, "{line}").map_err(io_err)?;
            }
            writeln!(w, "{}", R::HEADER.join(",")).map_err(io_err)?;
            for row in rows {
                writeln!(w, "{}", row.fields().join(",")).map_err(io_err)?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, rows).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(w).map_err(io_err)?;
            if let Some(out) = &config.out {
                let sidecar = sidecar_path(out, "config.json");
                let meta = serde_json::json!({
                    "command": command,
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": config.optimizer.seed,
                    "config": config,
                });
                std::fs::write(&sidecar, serde_json::to_string_pretty(&meta).expect("json"))
                    .map_err(|e| CliError::Io(format!("{}: {e}", sidecar.display())))?;
            }
        }
    }
    w.flush().map_err(io_err)
}

/// Writes a whitespace-separated plot-data file with the config header.
pub fn write_plot_data(
    path: &Path,
    command: &str,
    config: &ExperimentConfig,
    columns: &[&str],
    data: &[Vec<f64>],
    extra_comments: &[String],
) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    for line in header_lines(command, config).iter().chain(extra_comments) {
        writeln!(w, "{line}").map_err(io_err)?;
    }
    writeln!(w, "# {}", columns.join(" ")).map_err(io_err)?;
    for row in data {
        let line: Vec<String> = row.iter().map(|v| sig12(*v)).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// `<out>.<suffix>`, or `<command>.<suffix>` in the working directory when
/// writing rows to stdout.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}
