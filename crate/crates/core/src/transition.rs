//! Quantum-to-classical transition points.
//!
//! A transition point is the coarsening (δ² or Δ²) or visibility `p` at which
//! the angle-optimized witness falls to its classical bound. Every probe of the
//! bisection re-optimizes the angles, warm-started from the optima found at the
//! current bracket ends.

use serde::{Deserialize, Serialize};

use crate::correlation::{checked_sqrt, CoarseningParams, Correlator, FuzzyCorrelator, StateSpec};
use crate::error::{Error, Result};
use crate::kernel::{DEFAULT_QUADRATURE_ORDER, DEFAULT_SIGMAS};
use crate::optimizer::{maximize_with_starts, OptResult, OptimizerConfig};
use crate::witness::{AngleAssignment, WitnessKind, WitnessSpec};

/// Default bisection tolerance on the squared parameter.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// The quantity being bisected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchParameter {
    DeltaSq,
    #[serde(rename = "Delta_sq")]
    RefSpreadSq,
    Visibility,
}

impl SearchParameter {
    fn name(self) -> &'static str {
        match self {
            SearchParameter::DeltaSq => "delta_sq",
            SearchParameter::RefSpreadSq => "Delta_sq",
            SearchParameter::Visibility => "p",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub delta_sq: f64,
    #[serde(rename = "Delta_sq")]
    pub ref_spread_sq: f64,
    pub p: f64,
    pub witness: WitnessKind,
    pub m: usize,
    pub n: u32,
    pub parameter: SearchParameter,
    /// Optimized witness value at the returned point.
    pub achieved_value: f64,
    pub bound: f64,
    /// Final bracket `(violating end, classical end)`.
    pub bracket: (f64, f64),
    /// Finite-difference slope of the optimized value across the final bracket.
    pub slope: f64,
    pub angles: AngleAssignment,
}

impl TransitionPoint {
    /// Value of the bisected parameter.
    pub fn parameter_value(&self) -> f64 {
        match self.parameter {
            SearchParameter::DeltaSq => self.delta_sq,
            SearchParameter::RefSpreadSq => self.ref_spread_sq,
            SearchParameter::Visibility => self.p,
        }
    }
}

/// Transition points along a Δ² grid, plus the δ² = 0 intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub witness: WitnessKind,
    pub m: usize,
    pub n: u32,
    pub p: f64,
    pub points: Vec<TransitionPoint>,
    /// Grid entries whose search failed for a reason other than truncation.
    pub absent: Vec<(f64, String)>,
    /// First Δ² at which the state is already classical at δ = 0.
    pub truncated_at: Option<f64>,
    /// Critical Δ² at δ = 0.
    pub axis_intercept: Option<TransitionPoint>,
}

impl BoundaryCurve {
    /// Polyline `(Δ², δ²_c)` including the axis intercept when known.
    pub fn polyline(&self) -> Vec<(f64, f64)> {
        let mut line: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|t| (t.ref_spread_sq, t.delta_sq))
            .collect();
        if let Some(ax) = &self.axis_intercept {
            if line.last().is_none_or(|&(x, _)| x < ax.ref_spread_sq) {
                line.push((ax.ref_spread_sq, 0.0));
            }
        }
        line
    }

    /// Trapezoidal area of the nonclassical region under the polyline.
    pub fn area(&self) -> f64 {
        self.polyline()
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }
}

/// Bisection driver for one witness.
#[derive(Debug, Clone)]
pub struct TransitionSolver {
    spec: WitnessSpec,
    optimizer: OptimizerConfig,
    tolerance: f64,
    sigmas: f64,
    quadrature_order: usize,
}

impl TransitionSolver {
    pub fn new(spec: WitnessSpec, optimizer: OptimizerConfig) -> Self {
        Self {
            spec,
            optimizer,
            tolerance: DEFAULT_TOLERANCE,
            sigmas: DEFAULT_SIGMAS,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_kernel_policy(mut self, sigmas: f64, quadrature_order: usize) -> Self {
        self.sigmas = sigmas;
        self.quadrature_order = quadrature_order;
        self
    }

    pub fn spec(&self) -> &WitnessSpec {
        &self.spec
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Default δ² bracket `[0, 4n²]`.
    pub fn default_delta_bracket(n: u32) -> (f64, f64) {
        (0.0, 4.0 * f64::from(n) * f64::from(n))
    }

    /// Default Δ² bracket `[0, 1]`.
    pub fn default_reference_bracket() -> (f64, f64) {
        (0.0, 1.0)
    }

    fn params(&self, delta_sq: f64, ref_spread_sq: f64) -> Result<CoarseningParams> {
        CoarseningParams::with_policy(
            checked_sqrt("delta_sq", delta_sq)?,
            checked_sqrt("Delta_sq", ref_spread_sq)?,
            self.sigmas,
            self.quadrature_order,
        )
    }

    /// Optimized witness at the given state and variances.
    pub fn optimize_at(
        &self,
        state: StateSpec,
        delta_sq: f64,
        ref_spread_sq: f64,
        warm: &[AngleAssignment],
    ) -> Result<OptResult> {
        let corr = FuzzyCorrelator::new(state, self.params(delta_sq, ref_spread_sq)?);
        maximize_with_starts(&self.spec, &corr, &self.optimizer, warm)
    }

    /// Optimized `evaluate − bound`.
    pub fn margin_at(&self, state: StateSpec, delta_sq: f64, ref_spread_sq: f64) -> Result<f64> {
        Ok(self.optimize_at(state, delta_sq, ref_spread_sq, &[])?.value - self.spec.bound())
    }

    /// Critical δ² at fixed Δ, bisected inside `bracket`.
    pub fn find_critical_delta(
        &self,
        state: StateSpec,
        ref_spread: f64,
        bracket: (f64, f64),
    ) -> Result<TransitionPoint> {
        self.critical_delta_warm(state, ref_spread * ref_spread, bracket, &[])
    }

    fn critical_delta_warm(
        &self,
        state: StateSpec,
        ref_spread_sq: f64,
        bracket: (f64, f64),
        warm: &[AngleAssignment],
    ) -> Result<TransitionPoint> {
        let probe = |x: f64, w: &[AngleAssignment]| self.optimize_at(state, x, ref_spread_sq, w);
        let found = self.bisect(SearchParameter::DeltaSq, bracket, warm, probe)?;
        Ok(self.point(found, state, SearchParameter::DeltaSq, |x| {
            (x, ref_spread_sq, state.p())
        }))
    }

    /// Critical Δ² at fixed δ, bisected inside `bracket`.
    pub fn find_critical_reference(
        &self,
        state: StateSpec,
        delta: f64,
        bracket: (f64, f64),
    ) -> Result<TransitionPoint> {
        let delta_sq = delta * delta;
        let probe = |x: f64, w: &[AngleAssignment]| self.optimize_at(state, delta_sq, x, w);
        let found = self.bisect(SearchParameter::RefSpreadSq, bracket, &[], probe)?;
        Ok(self.point(found, state, SearchParameter::RefSpreadSq, |x| {
            (delta_sq, x, state.p())
        }))
    }

    /// Critical Werner visibility for fixed coarsening, bisected on `[0, 1]`.
    pub fn find_critical_visibility(
        &self,
        n: u32,
        params: CoarseningParams,
    ) -> Result<TransitionPoint> {
        let state = StateSpec::pure(n)?;
        let params = CoarseningParams::with_policy(
            params.delta(),
            params.ref_spread(),
            self.sigmas,
            self.quadrature_order,
        )?;
        let d2 = params.delta() * params.delta();
        let r2 = params.ref_spread() * params.ref_spread();
        self.find_critical_visibility_of(state, (d2, r2), |p| {
            Ok(FuzzyCorrelator::new(state.with_p(p)?, params))
        })
    }

    /// Critical visibility for an arbitrary family of correlators indexed by
    /// `p`. `state` and `variances` only label the returned point.
    pub fn find_critical_visibility_of<C, F>(
        &self,
        state: StateSpec,
        variances: (f64, f64),
        family: F,
    ) -> Result<TransitionPoint>
    where
        C: Correlator,
        F: Fn(f64) -> Result<C>,
    {
        // bisect on q = 1 − p so that the margin decreases along the bracket
        let probe = |q: f64, w: &[AngleAssignment]| {
            let corr = family(1.0 - q)?;
            maximize_with_starts(&self.spec, &corr, &self.optimizer, w)
        };
        let found = match self.bisect(SearchParameter::Visibility, (0.0, 1.0), &[], probe) {
            Err(Error::NoViolationAtLo { margin, .. }) => {
                return Err(Error::NoViolationAtPureState { margin })
            }
            Err(Error::NoTransitionAtHi { margin, .. }) => {
                return Err(Error::NoTransitionAtHi {
                    parameter: "p",
                    at: 0.0,
                    margin,
                })
            }
            other => other?,
        };
        let found = Bisection {
            x: 1.0 - found.x,
            lo: 1.0 - found.lo,
            hi: 1.0 - found.hi,
            slope: -found.slope,
            ..found
        };
        let (d2, r2) = variances;
        Ok(self.point(found, state, SearchParameter::Visibility, |p| (d2, r2, p)))
    }

    /// Critical δ² at each Δ² of an ascending grid, warm-started from the
    /// previous grid point. Stops once the state is classical at δ = 0.
    pub fn trace_boundary(
        &self,
        state: StateSpec,
        ref_spread_sq_grid: &[f64],
        bracket: (f64, f64),
    ) -> Result<BoundaryCurve> {
        if ref_spread_sq_grid
            .iter()
            .any(|x| !x.is_finite() || *x < 0.0)
            || ref_spread_sq_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidParameter {
                name: "Delta_sq_grid",
                reason: "must be non-negative and strictly ascending".into(),
            });
        }
        let mut curve = BoundaryCurve {
            witness: self.spec.kind(),
            m: self.spec.m(),
            n: state.n(),
            p: state.p(),
            points: Vec::new(),
            absent: Vec::new(),
            truncated_at: None,
            axis_intercept: None,
        };

        for &r2 in ref_spread_sq_grid {
            let warm: Vec<AngleAssignment> = curve
                .points
                .last()
                .map(|t| t.angles.clone())
                .into_iter()
                .collect();
            match self.critical_delta_warm(state, r2, bracket, &warm) {
                Ok(t) => curve.points.push(t),
                Err(Error::NoViolationAtLo { .. }) => {
                    curve.truncated_at = Some(r2);
                    break;
                }
                Err(e) if e.is_numeric() => curve.absent.push((r2, e.to_string())),
                Err(e) => return Err(e),
            }
        }

        match self.find_critical_reference(state, 0.0, Self::default_reference_bracket()) {
            Ok(t) => curve.axis_intercept = Some(t),
            Err(e) if e.is_numeric() => {}
            Err(e) => return Err(e),
        }
        Ok(curve)
    }

    fn point(
        &self,
        found: Bisection,
        state: StateSpec,
        parameter: SearchParameter,
        coords: impl Fn(f64) -> (f64, f64, f64),
    ) -> TransitionPoint {
        let (delta_sq, ref_spread_sq, p) = coords(found.x);
        TransitionPoint {
            delta_sq,
            ref_spread_sq,
            p,
            witness: self.spec.kind(),
            m: self.spec.m(),
            n: state.n(),
            parameter,
            achieved_value: found.opt.value,
            bound: self.spec.bound(),
            bracket: (found.lo, found.hi),
            slope: found.slope,
            angles: found.opt.angles,
        }
    }

    /// Bisection on a parameter along which the optimized margin decreases.
    fn bisect<P>(
        &self,
        parameter: SearchParameter,
        bracket: (f64, f64),
        warm: &[AngleAssignment],
        probe: P,
    ) -> Result<Bisection>
    where
        P: Fn(f64, &[AngleAssignment]) -> Result<OptResult>,
    {
        let (mut lo, mut hi) = bracket;
        if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "bracket",
                reason: format!("need 0 <= lo < hi, got ({lo}, {hi})"),
            });
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: format!("must be positive, got {}", self.tolerance),
            });
        }
        let bound = self.spec.bound();

        let mut at_lo = probe(lo, warm)?;
        if at_lo.value - bound <= 0.0 {
            return Err(Error::NoViolationAtLo {
                parameter: parameter.name(),
                at: lo,
                margin: at_lo.value - bound,
            });
        }
        let mut at_hi = probe(hi, std::slice::from_ref(&at_lo.angles))?;
        if at_hi.value - bound > 0.0 {
            return Err(Error::NoTransitionAtHi {
                parameter: parameter.name(),
                at: hi,
                margin: at_hi.value - bound,
            });
        }

        while hi - lo > self.tolerance {
            let mid = 0.5 * (lo + hi);
            let starts = [at_lo.angles.clone(), at_hi.angles.clone()];
            let at_mid = probe(mid, &starts)?;
            if at_mid.value - bound > 0.0 {
                lo = mid;
                at_lo = at_mid;
            } else {
                hi = mid;
                at_hi = at_mid;
            }
        }

        let x = 0.5 * (lo + hi);
        let opt = probe(x, &[at_lo.angles.clone(), at_hi.angles.clone()])?;
        Ok(Bisection {
            x,
            lo,
            hi,
            slope: (at_hi.value - at_lo.value) / (hi - lo),
            opt,
        })
    }
}

struct Bisection {
    x: f64,
    lo: f64,
    hi: f64,
    slope: f64,
    opt: OptResult,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 6,
            ..Default::default()
        }
    }

    #[test]
    fn closed_form_reference_transition() {
        // −p·e^{−4Δ²}·cos 2(θ_i+θ_j) at δ = 0 gives Δ²_c = ln(√2·p)/4 for m = 2
        let solver =
            TransitionSolver::new(WitnessSpec::bell(2).unwrap(), fast()).with_tolerance(1e-7);
        let state = StateSpec::new(5, 0.8).unwrap();
        let t = solver
            .find_critical_reference(state, 0.0, TransitionSolver::default_reference_bracket())
            .unwrap();
        let expected = (std::f64::consts::SQRT_2 * 0.8).ln() / 4.0;
        assert!(
            (t.ref_spread_sq - expected).abs() < 1e-6,
            "{}",
            t.ref_spread_sq
        );
        assert!((t.ref_spread_sq - 0.0309).abs() < 1e-4);
        assert_eq!(t.parameter, SearchParameter::RefSpreadSq);
        assert!(t.bracket.0 <= t.ref_spread_sq && t.ref_spread_sq <= t.bracket.1);
    }

    #[test]
    fn sharp_visibility_threshold() {
        for spec in [
            WitnessSpec::bell(2).unwrap(),
            WitnessSpec::steering(2).unwrap(),
        ] {
            let solver = TransitionSolver::new(spec, fast()).with_tolerance(1e-7);
            let t = solver
                .find_critical_visibility(5, CoarseningParams::sharp())
                .unwrap();
            assert!(
                (t.p - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6,
                "{}",
                t.p
            );
            assert!(t.bracket.0 >= t.bracket.1);
        }
    }

    #[test]
    fn bracket_errors() {
        let solver = TransitionSolver::new(WitnessSpec::bell(2).unwrap(), fast());
        let state = StateSpec::pure(5).unwrap();
        // too short: still violated at the upper end
        let e = solver
            .find_critical_delta(state, 0.0, (0.0, 1.0))
            .unwrap_err();
        assert!(matches!(e, Error::NoTransitionAtHi { .. }));
        // classical already at the lower end
        let e = solver
            .find_critical_delta(state, 0.0, (50.0, 100.0))
            .unwrap_err();
        assert!(matches!(e, Error::NoViolationAtLo { .. }));
        let e = solver
            .find_critical_delta(state, 0.0, (3.0, 1.0))
            .unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { .. }));
    }

    #[test]
    fn boundary_rejects_unsorted_grid() {
        let solver = TransitionSolver::new(WitnessSpec::bell(2).unwrap(), fast());
        let state = StateSpec::pure(5).unwrap();
        assert!(solver
            .trace_boundary(state, &[0.1, 0.0], (0.0, 100.0))
            .is_err());
    }

    #[test]
    fn polyline_and_area() {
        let mk = |r2: f64, d2: f64| TransitionPoint {
            delta_sq: d2,
            ref_spread_sq: r2,
            p: 1.0,
            witness: WitnessKind::Bell,
            m: 2,
            n: 5,
            parameter: SearchParameter::DeltaSq,
            achieved_value: 2.0,
            bound: 2.0,
            bracket: (0.0, 0.0),
            slope: 0.0,
            angles: AngleAssignment::chained(2),
        };
        let curve = BoundaryCurve {
            witness: WitnessKind::Bell,
            m: 2,
            n: 5,
            p: 1.0,
            points: vec![mk(0.0, 2.0), mk(1.0, 1.0)],
            absent: vec![],
            truncated_at: Some(3.0),
            axis_intercept: Some(TransitionPoint {
                parameter: SearchParameter::RefSpreadSq,
                ..mk(2.0, 0.0)
            }),
        };
        assert_eq!(curve.polyline(), vec![(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)]);
        assert!((curve.area() - 2.0).abs() < 1e-15);
    }
}
