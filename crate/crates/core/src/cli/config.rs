use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::kernel::{DEFAULT_QUADRATURE_ORDER, DEFAULT_SIGMAS};
use crate::optimizer::OptimizerConfig;
use crate::transition::DEFAULT_TOLERANCE;
use crate::witness::WitnessKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved experiment configuration. Every output file records it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub witness: WitnessKind,
    pub m: usize,
    pub n: u32,
    pub p: f64,
    pub delta_sq_grid: Vec<f64>,
    #[serde(rename = "Delta_sq_grid")]
    pub ref_spread_sq_grid: Vec<f64>,
    /// Bracket for δ² searches; `None` means `[0, 4n²]`.
    pub delta_sq_bracket: Option<(f64, f64)>,
    #[serde(rename = "Delta_sq_bracket")]
    pub ref_spread_sq_bracket: (f64, f64),
    /// Bisection tolerance on the squared parameter.
    pub tolerance: f64,
    pub optimizer: OptimizerConfig,
    pub sigmas: f64,
    pub quadrature_order: usize,
    /// Visibilities swept by `table1`.
    pub p_values: Vec<f64>,
    /// `(θ_i, θ_j)` pairs evaluated by `correlate`.
    pub angle_pairs: Vec<(f64, f64)>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            witness: WitnessKind::Bell,
            m: 2,
            n: 5,
            p: 1.0,
            delta_sq_grid: vec![0.0],
            ref_spread_sq_grid: vec![0.0],
            delta_sq_bracket: None,
            ref_spread_sq_bracket: (0.0, 1.0),
            tolerance: DEFAULT_TOLERANCE,
            optimizer: OptimizerConfig::default(),
            sigmas: DEFAULT_SIGMAS,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
            p_values: vec![0.85, 0.80, 0.75],
            angle_pairs: vec![(0.0, 0.0)],
            format: OutputFormat::Csv,
            out: None,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        // serde_json reports line and column along with the offending field
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn delta_bracket(&self) -> (f64, f64) {
        self.delta_sq_bracket.unwrap_or_else(|| {
            let n = f64::from(self.n);
            (0.0, 4.0 * n * n)
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.m < 2 {
            return fail("m", format!("need at least 2 settings, got {}", self.m));
        }
        if self.n == 0 {
            return fail("n", "must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.p) {
            return fail("p", format!("must lie in [0, 1], got {}", self.p));
        }
        check_grid("delta_sq_grid", &self.delta_sq_grid)?;
        check_grid("Delta_sq_grid", &self.ref_spread_sq_grid)?;
        for (field, (lo, hi)) in [
            ("delta_sq_bracket", self.delta_bracket()),
            ("Delta_sq_bracket", self.ref_spread_sq_bracket),
        ] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return fail(field, format!("need 0 <= lo < hi, got [{lo}, {hi}]"));
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return fail(
                "tolerance",
                format!("must be positive, got {}", self.tolerance),
            );
        }
        self.optimizer
            .validate()
            .map_err(|e| CliError::Config(format!("optimizer: {e}")))?;
        if !(self.sigmas.is_finite() && self.sigmas >= 1.0) {
            return fail("sigmas", format!("must be >= 1, got {}", self.sigmas));
        }
        if self.quadrature_order < 2 {
            return fail(
                "quadrature_order",
                format!("must be >= 2, got {}", self.quadrature_order),
            );
        }
        if let Some(bad) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return fail("p_values", format!("visibility {bad} outside [0, 1]"));
        }
        if self
            .angle_pairs
            .iter()
            .any(|(a, b)| !(a.is_finite() && b.is_finite()))
        {
            return fail("angle_pairs", "angles must be finite".into());
        }
        if self.threads == Some(0) {
            return fail("threads", "must be at least 1".into());
        }
        Ok(())
    }
}

fn check_grid(field: &str, grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config(format!("{field}: grid is empty")));
    }
    if let Some(bad) = grid.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(CliError::Config(format!(
            "{field}: values must be finite and non-negative, got {bad}"
        )));
    }
    if let Some(w) = grid.windows(2).find(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!(
            "{field}: grid must be strictly ascending ({} is followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Parses `a:b:step`, a comma-separated list, or a single value.
pub fn parse_grid(field: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| CliError::Config(format!("{field}: cannot parse `{s}`: {e}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if b < a {
                return Err(CliError::Config(format!(
                    "{field}: descending range {a}:{b} (start must not exceed end)"
                )));
            }
            if !(step.is_finite() && step > 0.0) {
                return Err(CliError::Config(format!(
                    "{field}: step must be positive, got {step}"
                )));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| a + i as f64 * step).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => {
            return Err(CliError::Config(format!(
                "{field}: expected `a:b:step` or a comma-separated list, got `{text}`"
            )))
        }
    };
    check_grid(field, &grid)?;
    Ok(grid)
}

/// Parses `θi,θj;θi,θj;...`.
pub fn parse_angle_pairs(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let v: Vec<f64> = pair
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Config(format!("angles: cannot parse `{pair}`: {e}")))?;
            match v.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(CliError::Config(format!("angles: `{pair}` is not a pair"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_grid() {
        assert_eq!(
            parse_grid("g", "0:1:0.25").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(
            parse_grid("g", "0:12:4").unwrap(),
            vec![0.0, 4.0, 8.0, 12.0]
        );
        assert_eq!(parse_grid("g", "2").unwrap(), vec![2.0]);
        assert_eq!(parse_grid("g", "0,0.5,3").unwrap(), vec![0.0, 0.5, 3.0]);
    }

    #[test]
    fn descending_grid_names_field() {
        let e = parse_grid("delta-sq-grid", "5:1:1").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("delta-sq-grid"));
        let e = parse_grid("Delta-sq-grid", "0.3,0.1").unwrap_err();
        assert!(e.to_string().contains("Delta-sq-grid"));
        assert!(parse_grid("g", "0:1:0").is_err());
        assert!(parse_grid("g", "0:1").is_err());
    }

    #[test]
    fn config_json_roundtrip_and_errors() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);

        let e = ExperimentConfig::from_json("{\n  \"m\": 3,\n  \"bogus\": 1\n}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");

        let cfg = ExperimentConfig::from_json(r#"{"Delta_sq_grid": [0.2, 0.1]}"#).unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.starts_with("config error: Delta_sq_grid"), "{msg}");
    }

    #[test]
    fn angle_pairs() {
        assert_eq!(
            parse_angle_pairs("0,0;0.5,-0.5").unwrap(),
            vec![(0.0, 0.0), (0.5, -0.5)]
        );
        assert!(parse_angle_pairs("1,2,3").is_err());
    }
}
