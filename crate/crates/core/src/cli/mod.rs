//! `fuzzy-witness` command-line front end.
//!
//! Subcommands: `correlate`, `profile`, `boundary`, `table1`. Each reads an
//! optional JSON config (`--config`), applies flag overrides, and writes
//! CSV or JSON rows. Exit status is 0 on success, 2 for configuration
//! errors, 3 when a transition search fails numerically.

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::correlation::{CoarseningParams, Correlator, FuzzyCorrelator, Regime, StateSpec};
use crate::error::Error;
use crate::optimizer::{maximize_with_starts, OptResult};
use crate::transition::{TransitionPoint, TransitionSolver};
use crate::witness::{AngleAssignment, WitnessKind, WitnessSpec};

pub use config::{ExperimentConfig, OutputFormat};
pub use output::{CorrelationRow, ResultRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fuzzy-witness",
    version,
    about = "Coarse-grained Bell and steering witnesses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlator values for angle pairs under every coarsening regime.
    Correlate(CommonArgs),
    /// Optimized witness along a δ² or Δ² grid.
    Profile(CommonArgs),
    /// Transition boundary δ²_c(Δ²) in the coarsening plane.
    Boundary(CommonArgs),
    /// Transition variances for m settings at several visibilities.
    Table1(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    /// bell or steering
    #[arg(long)]
    pub witness: Option<WitnessKind>,
    /// δ² grid as `a:b:step`, a comma list, or one value.
    #[arg(long = "delta-sq-grid")]
    pub delta_sq_grid: Option<String>,
    /// Δ² grid as `a:b:step`, a comma list, or one value.
    #[arg(long = "Delta-sq-grid")]
    pub ref_spread_sq_grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Angle pairs for `correlate`: `θi,θj;θi,θj`.
    #[arg(long)]
    pub angles: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Bisection tolerance on the squared parameter.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl CommonArgs {
    /// Loads the config file (if any), applies overrides and validates.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(w) = self.witness {
            cfg.witness = w;
        }
        if let Some(g) = &self.delta_sq_grid {
            cfg.delta_sq_grid = config::parse_grid("delta-sq-grid", g)?;
        }
        if let Some(g) = &self.ref_spread_sq_grid {
            cfg.ref_spread_sq_grid = config::parse_grid("Delta-sq-grid", g)?;
        }
        if let Some(seed) = self.seed {
            cfg.optimizer.seed = seed;
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(a) = &self.angles {
            cfg.angle_pairs = config::parse_angle_pairs(a)?;
        }
        if let Some(r) = self.restarts {
            cfg.optimizer.restarts = r;
        }
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reference transition variances for `m = 2`, `n = 5`:
/// `(p, [Bell δ², Bell Δ², steering δ², steering Δ²])`.
pub const REFERENCE_TABLE: [(f64, [f64; 4]); 3] = [
    (0.85, [8.29, 0.046, 8.94, 0.046]),
    (0.80, [6.72, 0.0308, 7.615, 0.0308]),
    (0.75, [4.81042, 0.0147, 6.137, 0.0147]),
];

/// Tolerance on Δ² used by `table1` and boundary intercepts; Δ² transitions
/// are two orders of magnitude smaller than δ² ones.
const REFERENCE_TOLERANCE: f64 = 1e-6;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let (name, args) = match &cli.command {
        Command::Correlate(a) => ("correlate", a),
        Command::Profile(a) => ("profile", a),
        Command::Boundary(a) => ("boundary", a),
        Command::Table1(a) => ("table1", a),
    };
    let cfg = args.resolve()?;
    if let Some(t) = cfg.threads {
        // a second call in the same process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match cli.command {
        Command::Correlate(_) => output::write_rows(name, &cfg, &cmd_correlate(&cfg)?),
        Command::Profile(_) => {
            let (rows, failures) = cmd_profile(&cfg)?;
            for (x, e) in &failures {
                eprintln!("warning: grid point {x}: {e}");
            }
            output::write_rows(name, &cfg, &rows)?;
            if let Some(out) = &cfg.out {
                write_profile_plot(
                    &cfg,
                    &rows,
                    &failures,
                    &output::sidecar_path(out, "plot.dat"),
                )?;
            }
            Ok(())
        }
        Command::Boundary(_) => {
            let (rows, curve) = cmd_boundary(&cfg)?;
            output::write_rows(name, &cfg, &rows)?;
            if let Some(out) = &cfg.out {
                write_region_plot(&cfg, &curve, &output::sidecar_path(out, "region.dat"))?;
            }
            Ok(())
        }
        Command::Table1(_) => {
            let table = cmd_table1(&cfg)?;
            eprint!("{}", table.render());
            output::write_rows(name, &cfg, &table.rows)
        }
    }
}

fn params(
    cfg: &ExperimentConfig,
    delta_sq: f64,
    ref_spread_sq: f64,
) -> Result<CoarseningParams, CliError> {
    Ok(CoarseningParams::with_policy(
        delta_sq.sqrt(),
        ref_spread_sq.sqrt(),
        cfg.sigmas,
        cfg.quadrature_order,
    )?)
}

fn row(
    cfg: &ExperimentConfig,
    spec: &WitnessSpec,
    p: f64,
    d2: f64,
    r2: f64,
    value: f64,
    angles: &AngleAssignment,
) -> ResultRow {
    ResultRow {
        m: spec.m(),
        n: cfg.n,
        p,
        delta_sq: d2,
        ref_spread_sq: r2,
        witness_kind: spec.kind(),
        witness_value: value,
        bound: spec.bound(),
        violated: value > spec.bound(),
        angles: angles.flatten(),
        seed: cfg.optimizer.seed,
    }
}

fn transition_row(cfg: &ExperimentConfig, spec: &WitnessSpec, t: &TransitionPoint) -> ResultRow {
    row(
        cfg,
        spec,
        t.p,
        t.delta_sq,
        t.ref_spread_sq,
        t.achieved_value,
        &t.angles,
    )
}

/// Correlator values for every configured angle pair, grid point and regime.
pub fn cmd_correlate(cfg: &ExperimentConfig) -> Result<Vec<CorrelationRow>, CliError> {
    let state = StateSpec::new(cfg.n, cfg.p)?;
    let mut rows = Vec::new();
    for &d2 in &cfg.delta_sq_grid {
        for &r2 in &cfg.ref_spread_sq_grid {
            let base = params(cfg, d2, r2)?;
            for regime in Regime::ALL {
                let corr = FuzzyCorrelator::for_regime(regime, state, base)?;
                let (s, pr) = (corr.state(), corr.params());
                for &(a, b) in &cfg.angle_pairs {
                    rows.push(CorrelationRow {
                        regime: regime.name(),
                        n: s.n(),
                        p: s.p(),
                        delta_sq: pr.delta() * pr.delta(),
                        ref_spread_sq: pr.ref_spread() * pr.ref_spread(),
                        theta_i: a,
                        theta_j: b,
                        value: corr.correlation(a, b),
                        seed: cfg.optimizer.seed,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Rows of a profile sweep plus the grid points that failed, with reasons.
pub type ProfileOutput = (Vec<ResultRow>, Vec<(f64, String)>);

/// Optimized witness along the one non-trivial grid, warm-started point to
/// point. Failed points are returned separately and do not stop the sweep.
pub fn cmd_profile(cfg: &ExperimentConfig) -> Result<ProfileOutput, CliError> {
    let spec = WitnessSpec::new(cfg.witness, cfg.m)?;
    let state = StateSpec::new(cfg.n, cfg.p)?;
    let (along_delta, grid, fixed) = match (cfg.delta_sq_grid.len(), cfg.ref_spread_sq_grid.len()) {
        (_, 1) => (true, &cfg.delta_sq_grid, cfg.ref_spread_sq_grid[0]),
        (1, _) => (false, &cfg.ref_spread_sq_grid, cfg.delta_sq_grid[0]),
        _ => return Err(CliError::Config(
            "profile: exactly one of delta_sq_grid and Delta_sq_grid may have more than one point"
                .into(),
        )),
    };

    let mut rows = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    let mut previous: Option<AngleAssignment> = None;
    for &x in grid {
        let (d2, r2) = if along_delta { (x, fixed) } else { (fixed, x) };
        let attempt = params(cfg, d2, r2).and_then(|pr| {
            let corr = FuzzyCorrelator::new(state, pr);
            let warm: Vec<_> = previous.iter().cloned().collect();
            maximize_with_starts(&spec, &corr, &cfg.optimizer, &warm).map_err(CliError::from)
        });
        match attempt {
            Ok(OptResult { value, angles, .. }) => {
                rows.push(row(cfg, &spec, cfg.p, d2, r2, value, &angles));
                previous = Some(angles);
            }
            Err(e) => failures.push((x, e.to_string())),
        }
    }
    Ok((rows, failures))
}

fn write_profile_plot(
    cfg: &ExperimentConfig,
    rows: &[ResultRow],
    failures: &[(f64, String)],
    path: &std::path::Path,
) -> Result<(), CliError> {
    let along_delta = cfg.ref_spread_sq_grid.len() == 1;
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let x = if along_delta {
                r.delta_sq
            } else {
                r.ref_spread_sq
            };
            vec![x, r.witness_value, r.bound]
        })
        .collect();
    let comments: Vec<String> = failures
        .iter()
        .map(|(x, e)| format!("# failed: {x}: {e}"))
        .collect();
    let x = if along_delta { "delta_sq" } else { "Delta_sq" };
    output::write_plot_data(
        path,
        "profile",
        cfg,
        &[x, "witness_value", "bound"],
        &data,
        &comments,
    )
}

fn solver(cfg: &ExperimentConfig, kind: WitnessKind) -> Result<TransitionSolver, CliError> {
    Ok(
        TransitionSolver::new(WitnessSpec::new(kind, cfg.m)?, cfg.optimizer)
            .with_tolerance(cfg.tolerance)
            .with_kernel_policy(cfg.sigmas, cfg.quadrature_order),
    )
}

/// Transition boundary over the Δ² grid.
pub fn cmd_boundary(
    cfg: &ExperimentConfig,
) -> Result<(Vec<ResultRow>, crate::transition::BoundaryCurve), CliError> {
    let solver = solver(cfg, cfg.witness)?;
    let state = StateSpec::new(cfg.n, cfg.p)?;
    let mut curve = solver.trace_boundary(state, &cfg.ref_spread_sq_grid, cfg.delta_bracket())?;
    // refine the δ² = 0 intercept to the Δ² tolerance
    let fine = solver
        .clone()
        .with_tolerance(REFERENCE_TOLERANCE.min(cfg.tolerance));
    match fine.find_critical_reference(state, 0.0, cfg.ref_spread_sq_bracket) {
        Ok(t) => curve.axis_intercept = Some(t),
        Err(e) if e.is_numeric() => curve.axis_intercept = None,
        Err(e) => return Err(e.into()),
    }
    let rows = curve
        .points
        .iter()
        .chain(curve.axis_intercept.iter())
        .map(|t| transition_row(cfg, solver.spec(), t))
        .collect();
    Ok((rows, curve))
}

fn write_region_plot(
    cfg: &ExperimentConfig,
    curve: &crate::transition::BoundaryCurve,
    path: &std::path::Path,
) -> Result<(), CliError> {
    let data: Vec<Vec<f64>> = curve
        .polyline()
        .into_iter()
        .map(|(x, y)| vec![x, y])
        .collect();
    let mut comments = Vec::new();
    if let Some(first) = curve.points.first() {
        comments.push(format!(
            "# delta_sq intercept (Delta_sq = {}): {}",
            first.ref_spread_sq, first.delta_sq
        ));
    }
    if let Some(ax) = &curve.axis_intercept {
        comments.push(format!(
            "# Delta_sq intercept (delta_sq = 0): {}",
            ax.ref_spread_sq
        ));
    }
    if let Some(t) = curve.truncated_at {
        comments.push(format!("# truncated at Delta_sq = {t}"));
    }
    for (x, e) in &curve.absent {
        comments.push(format!("# absent: {x}: {e}"));
    }
    comments.push(format!("# area: {}", curve.area()));
    output::write_plot_data(
        path,
        "boundary",
        cfg,
        &["Delta_sq", "delta_sq"],
        &data,
        &comments,
    )
}

/// Transition variances per visibility for Bell and steering.
#[derive(Debug, Clone)]
pub struct Table1 {
    pub m: usize,
    pub n: u32,
    /// `(p, [Bell δ², Bell Δ², steering δ², steering Δ²])`
    pub entries: Vec<(f64, [f64; 4])>,
    pub rows: Vec<ResultRow>,
}

impl Table1 {
    /// Reference values for a visibility, when tabulated for this `(m, n)`.
    pub fn reference(&self, p: f64) -> Option<[f64; 4]> {
        if self.m != 2 || self.n != 5 {
            return None;
        }
        REFERENCE_TABLE
            .iter()
            .find(|(rp, _)| (rp - p).abs() < 1e-12)
            .map(|(_, v)| *v)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "m = {}, n = {}\n{:>6} | {:>12} {:>12} | {:>12} {:>12}",
            self.m, self.n, "p", "Bell d2", "Bell D2", "Steer d2", "Steer D2"
        );
        for (p, v) in &self.entries {
            let _ = writeln!(
                s,
                "{:>6.3} | {:>12.6} {:>12.6} | {:>12.6} {:>12.6}",
                p, v[0], v[1], v[2], v[3]
            );
            if let Some(r) = self.reference(*p) {
                let _ = writeln!(
                    s,
                    "{:>6} | {:>12} {:>12} | {:>12} {:>12}",
                    "ref", r[0], r[1], r[2], r[3]
                );
                let dev: Vec<String> = v
                    .iter()
                    .zip(r)
                    .map(|(a, b)| format!("{:>+11.2}%", 100.0 * (a - b) / b))
                    .collect();
                let _ = writeln!(
                    s,
                    "{:>6} | {} {} | {} {}",
                    "dev", dev[0], dev[1], dev[2], dev[3]
                );
            }
        }
        s
    }
}

pub fn cmd_table1(cfg: &ExperimentConfig) -> Result<Table1, CliError> {
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for &p in &cfg.p_values {
        let state = StateSpec::new(cfg.n, p)?;
        let mut values = [0.0; 4];
        for (slot, kind) in [WitnessKind::Bell, WitnessKind::Steering]
            .into_iter()
            .enumerate()
        {
            let s = solver(cfg, kind)?;
            let by_delta = s.find_critical_delta(state, 0.0, cfg.delta_bracket())?;
            let by_ref = s
                .clone()
                .with_tolerance(REFERENCE_TOLERANCE.min(cfg.tolerance))
                .find_critical_reference(state, 0.0, cfg.ref_spread_sq_bracket)?;
            values[2 * slot] = by_delta.delta_sq;
            values[2 * slot + 1] = by_ref.ref_spread_sq;
            rows.push(transition_row(cfg, s.spec(), &by_delta));
            rows.push(transition_row(cfg, s.spec(), &by_ref));
        }
        entries.push((p, values));
    }
    Ok(Table1 {
        m: cfg.m,
        n: cfg.n,
        entries,
        rows,
    })
}
