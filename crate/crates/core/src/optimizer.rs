//! Multi-start Nelder-Mead maximization of a witness over measurement angles.
//!
//! Restart 0 is the chained start, restarts `1..restarts` are drawn uniformly
//! from `[0, π)^{2m}` using a ChaCha stream keyed by `(seed, restart index)`,
//! and any caller-supplied warm starts follow. Restarts run in parallel; the
//! winner is the highest value, ties going to the lowest index, so the result
//! does not depend on scheduling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::Correlator;
use crate::error::{Error, Result};
use crate::witness::{AngleAssignment, WitnessSpec};

const INITIAL_STEP: f64 = 0.25;
const POLISH_STEP: f64 = 0.02;
const MAX_POLISH_ROUNDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 24,
            max_iterations: 2000,
            tolerance: 1e-8,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter {
                name: "restarts",
                reason: "need at least one restart".into(),
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                reason: "need at least one iteration".into(),
            });
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: format!("must be positive, got {}", self.tolerance),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub angles: AngleAssignment,
    pub restart_index: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximize `spec` over all `2m` angles.
pub fn maximize<C: Correlator + ?Sized>(
    spec: &WitnessSpec,
    corr: &C,
    config: &OptimizerConfig,
) -> Result<OptResult> {
    maximize_with_starts(spec, corr, config, &[])
}

/// [`maximize`] with additional starting points appended after the seeded
/// restarts.
pub fn maximize_with_starts<C: Correlator + ?Sized>(
    spec: &WitnessSpec,
    corr: &C,
    config: &OptimizerConfig,
    warm_starts: &[AngleAssignment],
) -> Result<OptResult> {
    config.validate()?;
    let m = spec.m();
    for w in warm_starts {
        if w.alice.len() != m || w.bob.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                alice: w.alice.len(),
                bob: w.bob.len(),
            });
        }
    }

    let total = config.restarts + warm_starts.len();
    let objective = |x: &[f64]| -spec.evaluate_unchecked(&x[..m], &x[m..], corr);

    let outcomes: Vec<OptResult> = (0..total)
        .into_par_iter()
        .map(|index| {
            let start = starting_point(index, m, config, warm_starts);
            let run = climb(&objective, start, config);
            OptResult {
                value: -run.fx,
                angles: AngleAssignment::from_flat(&run.x),
                restart_index: index,
                iterations: run.iterations,
                converged: run.converged,
            }
        })
        .collect();

    let best = outcomes
        .into_iter()
        .reduce(|best, next| if next.value > best.value { next } else { best })
        .expect("at least one restart");
    // report the value at the wrapped angles actually returned
    let value = spec.evaluate(&best.angles, corr)?;
    Ok(OptResult { value, ..best })
}

/// Solve a sequence of problems along a strictly monotone parameter grid,
/// injecting each optimum as a warm start for the next point.
pub fn maximize_profile<C, F>(
    spec: &WitnessSpec,
    family: F,
    grid: &[f64],
    config: &OptimizerConfig,
) -> Result<Vec<OptResult>>
where
    C: Correlator,
    F: Fn(f64) -> Result<C>,
{
    check_monotone("grid", grid)?;
    let mut out: Vec<OptResult> = Vec::with_capacity(grid.len());
    for &x in grid {
        let corr = family(x)?;
        let warm: Vec<AngleAssignment> = out.last().map(|r| r.angles.clone()).into_iter().collect();
        out.push(maximize_with_starts(spec, &corr, config, &warm)?);
    }
    Ok(out)
}

pub(crate) fn check_monotone(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter {
            name,
            reason: "grid values must be finite".into(),
        });
    }
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = grid.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidParameter {
            name,
            reason: "grid must be strictly monotone".into(),
        });
    }
    Ok(())
}

fn starting_point(
    index: usize,
    m: usize,
    config: &OptimizerConfig,
    warm_starts: &[AngleAssignment],
) -> Vec<f64> {
    if index == 0 {
        return AngleAssignment::chained(m).flatten();
    }
    if index >= config.restarts {
        return warm_starts[index - config.restarts].flatten();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    (0..2 * m).map(|_| rng.random::<f64>() * PI).collect()
}

struct Minimum {
    x: Vec<f64>,
    fx: f64,
    iterations: usize,
    converged: bool,
}

/// Nelder-Mead followed by polishing restarts around the incumbent until a
/// fresh simplex no longer improves by more than the tolerance.
fn climb<F: Fn(&[f64]) -> f64>(f: &F, x0: Vec<f64>, config: &OptimizerConfig) -> Minimum {
    // the simplex is contracted well past the reported tolerance so the
    // returned point is a local optimum, not just a plateau in value
    let ftol = config.tolerance * 1e-3;
    let mut budget = config.max_iterations;
    let mut best = nelder_mead(f, x0, INITIAL_STEP, ftol, budget);
    budget -= best.iterations.min(budget);
    let mut iterations = best.iterations;

    for _ in 0..MAX_POLISH_ROUNDS {
        if !best.converged || budget == 0 {
            break;
        }
        let next = nelder_mead(f, best.x.clone(), POLISH_STEP, ftol, budget);
        budget -= next.iterations.min(budget);
        iterations += next.iterations;
        let improvement = best.fx - next.fx;
        if next.fx < best.fx {
            best = next;
        } else {
            best.converged = next.converged;
        }
        if improvement <= config.tolerance {
            break;
        }
    }
    best.iterations = iterations;
    best
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: Vec<f64>,
    step: f64,
    ftol: f64,
    max_iterations: usize,
) -> Minimum {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = f(&x0);
    simplex.push((x0.clone(), f0));
    for i in 0..dim {
        let mut x = x0.clone();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; dim];
    let point = |c: &[f64], worst: &[f64], t: f64| -> Vec<f64> {
        c.iter()
            .zip(worst)
            .map(|(ci, wi)| ci + t * (ci - wi))
            .collect()
    };

    while iterations < max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread <= ftol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        let (best_f, second_worst_f, worst_f) = (simplex[0].1, simplex[dim - 1].1, simplex[dim].1);
        let reflected = point(&centroid, &simplex[dim].0, REFLECT);
        let fr = f(&reflected);

        if fr < best_f {
            let expanded = point(&centroid, &simplex[dim].0, EXPAND);
            let fe = f(&expanded);
            simplex[dim] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < second_worst_f {
            simplex[dim] = (reflected, fr);
            continue;
        }
        // contraction: outside if the reflection helped, inside otherwise
        let (candidate, fc) = if fr < worst_f {
            let x = point(&centroid, &simplex[dim].0, CONTRACT);
            let fx = f(&x);
            (x, fx)
        } else {
            let x = point(&centroid, &simplex[dim].0, -CONTRACT);
            let fx = f(&x);
            (x, fx)
        };
        if fc < fr.min(worst_f) {
            simplex[dim] = (candidate, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            for (xi, ai) in x.iter_mut().zip(&anchor) {
                *xi = ai + SHRINK * (*xi - ai);
            }
            *fx = f(x);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if !converged {
        converged = simplex[dim].1 - simplex[0].1 <= ftol;
    }
    let (x, fx) = simplex.swap_remove(0);
    Minimum {
        x,
        fx,
        iterations,
        converged,
    }
}
