//! Bell and steering witnesses with `m` settings per party.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::correlation::Correlator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Bell,
    Steering,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::Bell => "bell",
            WitnessKind::Steering => "steering",
        })
    }
}

impl std::str::FromStr for WitnessKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bell" => Ok(WitnessKind::Bell),
            "steering" => Ok(WitnessKind::Steering),
            other => Err(format!(
                "unknown witness kind `{other}` (expected bell or steering)"
            )),
        }
    }
}

/// A linear witness and its classical bound.
///
/// Bell: `Σ_{ij} c_ij ⟨A_i B_j⟩ ≤ ⌊(m²+1)/2⌋` with `c_ij = +1` iff
/// `i + j ≤ m + 1` (1-based). For `m = 2` this is CHSH.
///
/// Steering: `(1/√m)·|Σ_i ⟨A_i B_i⟩| ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSpec {
    kind: WitnessKind,
    m: usize,
    // row-major m×m; unused for steering
    coefficients: Vec<f64>,
    bound: f64,
}

impl WitnessSpec {
    pub fn new(kind: WitnessKind, m: usize) -> Result<Self> {
        match kind {
            WitnessKind::Bell => Self::bell(m),
            WitnessKind::Steering => Self::steering(m),
        }
    }

    pub fn bell(m: usize) -> Result<Self> {
        check_settings(m)?;
        let coefficients = (1..=m)
            .flat_map(|i| (1..=m).map(move |j| if i + j <= m + 1 { 1.0 } else { -1.0 }))
            .collect();
        Ok(Self {
            kind: WitnessKind::Bell,
            m,
            coefficients,
            bound: (m * m).div_ceil(2) as f64,
        })
    }

    pub fn steering(m: usize) -> Result<Self> {
        check_settings(m)?;
        let coefficients = (0..m)
            .flat_map(|i| (0..m).map(move |j| if i == j { 1.0 } else { 0.0 }))
            .collect();
        Ok(Self {
            kind: WitnessKind::Steering,
            m,
            coefficients,
            bound: 1.0,
        })
    }

    pub fn kind(&self) -> WitnessKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Coefficient `c_ij` (0-based indices).
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.coefficients[i * self.m + j]
    }

    /// Prefactor applied to the correlation sum (`1/√m` for steering).
    pub fn normalization(&self) -> f64 {
        match self.kind {
            WitnessKind::Bell => 1.0,
            WitnessKind::Steering => 1.0 / (self.m as f64).sqrt(),
        }
    }

    /// Witness value from a row-major matrix of correlations.
    pub fn evaluate_matrix(&self, correlations: &[f64]) -> f64 {
        debug_assert_eq!(correlations.len(), self.m * self.m);
        match self.kind {
            WitnessKind::Bell => self
                .coefficients
                .iter()
                .zip(correlations)
                .map(|(c, e)| c * e)
                .sum(),
            WitnessKind::Steering => {
                let trace: f64 = (0..self.m).map(|i| correlations[i * self.m + i]).sum();
                self.normalization() * trace.abs()
            }
        }
    }

    /// Witness value for the given settings.
    pub fn evaluate<C: Correlator + ?Sized>(
        &self,
        angles: &AngleAssignment,
        corr: &C,
    ) -> Result<f64> {
        self.check_dims(angles)?;
        Ok(self.evaluate_unchecked(&angles.alice, &angles.bob, corr))
    }

    pub(crate) fn evaluate_unchecked<C: Correlator + ?Sized>(
        &self,
        alice: &[f64],
        bob: &[f64],
        corr: &C,
    ) -> f64 {
        match self.kind {
            WitnessKind::Bell => self.evaluate_matrix(&corr.correlation_matrix(alice, bob)),
            WitnessKind::Steering => {
                let trace: f64 = alice
                    .iter()
                    .zip(bob)
                    .map(|(&a, &b)| corr.correlation(a, b))
                    .sum();
                self.normalization() * trace.abs()
            }
        }
    }

    /// `evaluate − bound`; positive means the correlations are nonclassical.
    pub fn violation_margin<C: Correlator + ?Sized>(
        &self,
        angles: &AngleAssignment,
        corr: &C,
    ) -> Result<f64> {
        Ok(self.evaluate(angles, corr)? - self.bound)
    }

    /// Maximum of the Bell form over all deterministic ±1 strategies, by
    /// exhaustive enumeration of the `2^{2m}` assignments.
    ///
    /// For steering this returns the declared bound.
    pub fn deterministic_maximum(&self) -> f64 {
        if self.kind == WitnessKind::Steering {
            return self.bound;
        }
        let m = self.m;
        let sign = |mask: u32, i: usize| if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
        let mut best = f64::NEG_INFINITY;
        for a in 0..(1u32 << m) {
            for b in 0..(1u32 << m) {
                let mut s = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        s += self.coefficient(i, j) * sign(a, i) * sign(b, j);
                    }
                }
                best = best.max(s);
            }
        }
        best
    }

    fn check_dims(&self, angles: &AngleAssignment) -> Result<()> {
        if angles.alice.len() != self.m || angles.bob.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                alice: angles.alice.len(),
                bob: angles.bob.len(),
            });
        }
        Ok(())
    }
}

fn check_settings(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("a witness needs at least 2 settings per party, got {m}"),
        });
    }
    Ok(())
}

/// Reduce an angle to `[0, π)`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly π
    if w >= PI {
        0.0
    } else {
        w
    }
}

/// Measurement directions for both parties, reduced to `[0, π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleAssignment {
    pub alice: Vec<f64>,
    pub bob: Vec<f64>,
}

impl AngleAssignment {
    pub fn new(alice: Vec<f64>, bob: Vec<f64>) -> Self {
        Self {
            alice: alice.into_iter().map(wrap_angle).collect(),
            bob: bob.into_iter().map(wrap_angle).collect(),
        }
    }

    /// Splits a flat `[alice.., bob..]` vector.
    pub fn from_flat(x: &[f64]) -> Self {
        let m = x.len() / 2;
        Self::new(x[..m].to_vec(), x[m..].to_vec())
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.alice.iter().chain(&self.bob).copied().collect()
    }

    pub fn m(&self) -> usize {
        self.alice.len()
    }

    /// Evenly interleaved settings, `alice_i = (i−1)·π/(2m)` and
    /// `bob_j = π/4 + (j−½)·π/(2m)` (1-based). For the sharp correlator this
    /// attains the planar maximum of the Bell witness.
    pub fn chained(m: usize) -> Self {
        let step = PI / (2.0 * m as f64);
        let alice = (0..m).map(|i| i as f64 * step).collect();
        let bob = (0..m).map(|j| PI / 4.0 + (j as f64 + 0.5) * step).collect();
        Self::new(alice, bob)
    }
}
