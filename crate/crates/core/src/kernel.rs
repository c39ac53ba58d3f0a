//! Gaussian coarse-graining kernels.
//!
//! Two kinds of smearing act on a measurement:
//!
//! * resolution coarsening: the sharp dichotomization boundary of the outcome
//!   labels is replaced by a discrete Gaussian over integer offsets `k`
//!   ([`DiscreteKernel`]);
//! * reference coarsening: the rotation angle that sets the measurement
//!   direction is jittered by a continuous Gaussian ([`ReferenceKernel`]),
//!   integrated with Gauss-Hermite quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default truncation multiplier for the discrete kernel support.
pub const DEFAULT_SIGMAS: f64 = 8.0;

/// Default Gauss-Hermite order for reference averages.
pub const DEFAULT_QUADRATURE_ORDER: usize = 32;

/// Sign step used to dichotomize outcome labels: `+1` for `x > 0`, `-1` otherwise.
#[inline]
pub fn zeta(x: i64) -> f64 {
    if x > 0 {
        1.0
    } else {
        -1.0
    }
}

/// Normalized discrete Gaussian over the offsets `-K..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    delta: f64,
    halfwidth: i64,
    // weights[i] is the weight of offset k = i - halfwidth
    weights: Vec<f64>,
}

impl DiscreteKernel {
    /// Builds the kernel with standard deviation `delta`, truncated at
    /// `ceil(sigmas * max(delta, 1))`.
    ///
    /// `delta = 0` gives the point mass at `k = 0`. The weights are divided by
    /// their truncated sum, so the kernel is an exact probability distribution
    /// for every `delta >= 0`.
    pub fn new(delta: f64, sigmas: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("must be finite and non-negative, got {delta}"),
            });
        }
        if !sigmas.is_finite() || sigmas < 1.0 {
            return Err(Error::InvalidParameter {
                name: "sigmas",
                reason: format!("truncation multiplier must be >= 1, got {sigmas}"),
            });
        }
        if delta == 0.0 {
            return Ok(Self {
                delta,
                halfwidth: 0,
                weights: vec![1.0],
            });
        }

        let halfwidth = (sigmas * delta.max(1.0)).ceil() as i64;
        let two_var = 2.0 * delta * delta;
        // one-sided weights, mirrored below so the kernel is exactly symmetric
        let half: Vec<f64> = (0..=halfwidth)
            .map(|k| (-((k * k) as f64) / two_var).exp())
            .collect();
        let total = half[0] + 2.0 * half[1..].iter().rev().sum::<f64>();

        let mut weights = Vec::with_capacity(2 * halfwidth as usize + 1);
        weights.extend(half[1..].iter().rev().map(|w| w / total));
        weights.extend(half.iter().map(|w| w / total));

        Ok(Self {
            delta,
            halfwidth,
            weights,
        })
    }

    /// The kernel with default truncation.
    pub fn with_delta(delta: f64) -> Result<Self> {
        Self::new(delta, DEFAULT_SIGMAS)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Support half-width `K`.
    pub fn halfwidth(&self) -> i64 {
        self.halfwidth
    }

    /// Weight at offset `k`; zero outside the support.
    pub fn weight(&self, k: i64) -> f64 {
        if k.abs() > self.halfwidth {
            0.0
        } else {
            self.weights[(k + self.halfwidth) as usize]
        }
    }

    /// Iterator over `(k, weight)` pairs, ascending in `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (i as i64 - self.halfwidth, w))
    }

    /// `Σ_k w(k)·ζ(shift − k)`: the kernel-averaged sign of a level at `shift`.
    pub fn smeared_sign(&self, shift: i64) -> f64 {
        self.iter().map(|(k, w)| w * zeta(shift - k)).sum()
    }
}

/// Probability that the levels `±n` are told apart by the fuzzy measurement:
/// `|Σ_k w(k)·ζ(n − k)|²`.
pub fn distinguishability(n: u32, kernel: &DiscreteKernel) -> f64 {
    let s = kernel.smeared_sign(i64::from(n));
    s * s
}

/// Gaussian jitter of a measurement reference angle, discretized by
/// Gauss-Hermite quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceKernel {
    spread: f64,
    // standard-normal nodes and probability weights
    nodes: Vec<(f64, f64)>,
}

impl ReferenceKernel {
    pub fn new(spread: f64, quadrature_order: usize) -> Result<Self> {
        if !spread.is_finite() || spread < 0.0 {
            return Err(Error::InvalidParameter {
                name: "Delta",
                reason: format!("must be finite and non-negative, got {spread}"),
            });
        }
        if quadrature_order < 2 {
            return Err(Error::InvalidParameter {
                name: "quadrature_order",
                reason: format!("must be at least 2, got {quadrature_order}"),
            });
        }
        let nodes = if spread == 0.0 {
            vec![(0.0, 1.0)]
        } else {
            standard_normal_rule(quadrature_order)
        };
        Ok(Self { spread, nodes })
    }

    pub fn with_spread(spread: f64) -> Result<Self> {
        Self::new(spread, DEFAULT_QUADRATURE_ORDER)
    }

    /// Standard deviation Δ of the angle jitter, in radians.
    pub fn spread(&self) -> f64 {
        self.spread
    }

    /// Number of nodes per reference average (1 when Δ = 0).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Angles and weights such that `Σ w_i f(φ_i)` approximates the Gaussian
    /// average of `f` around `center`.
    pub fn nodes(&self, center: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .map(move |&(z, w)| (center + self.spread * z, w))
    }

    /// Gaussian average of `f` around `center`.
    pub fn expectation<F: FnMut(f64) -> f64>(&self, center: f64, mut f: F) -> f64 {
        self.nodes(center).map(|(phi, w)| w * f(phi)).sum()
    }
}

/// Gauss-Hermite rule rescaled to the standard normal density: nodes
/// `√2·t_i`, weights `w_i/√π`.
pub fn standard_normal_rule(order: usize) -> Vec<(f64, f64)> {
    let rule = gauss_hermite(order);
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    rule.into_iter()
        .map(|(t, w)| (std::f64::consts::SQRT_2 * t, w * inv_sqrt_pi))
        .collect()
}

/// Physicists' Gauss-Hermite nodes and weights for the weight `e^{-t²}`,
/// ascending in `t`.
///
/// Newton iteration on the orthonormal Hermite recurrence, seeded with the
/// usual asymptotic root estimates.
pub fn gauss_hermite(order: usize) -> Vec<(f64, f64)> {
    const MAX_NEWTON: usize = 100;
    const EPS: f64 = 1e-15;
    let n = order;
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut roots = vec![(0.0, 0.0); n];
    let mut z = 0.0_f64;

    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * roots[0].0,
            3 => 1.91 * z - 0.91 * roots[1].0,
            _ => 2.0 * z - roots[i - 2].0,
        };
        let mut pp = 0.0;
        for _ in 0..MAX_NEWTON {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= EPS * z.abs().max(1.0) {
                break;
            }
        }
        let w = 2.0 / (pp * pp);
        roots[i] = (z, w);
        roots[n - 1 - i] = (-z, w);
    }
    if n % 2 == 1 {
        roots[n / 2].0 = 0.0;
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots
}
