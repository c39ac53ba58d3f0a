//! Fuzzy bipartite correlation functions of the macroscopic entangled state
//! `(|l_n⟩|l_{-n}⟩ + |l_{-n}⟩|l_n⟩)/√2` and its white-noise (Werner) mixture.
//!
//! Every correlator here is a sum of products of single-party functions of the
//! measurement angle. [`FuzzyCorrelator`] exploits that: the reference average
//! for one party is computed once per angle and combined bilinearly, so a
//! witness with `m` settings costs `O(m·order)` quadrature work instead of
//! `O(m²·order²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{DiscreteKernel, ReferenceKernel, DEFAULT_QUADRATURE_ORDER, DEFAULT_SIGMAS};

/// Macroscopicity index and Werner visibility of the shared state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    n: u32,
    p: f64,
}

impl StateSpec {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "macroscopicity index must be at least 1".into(),
            });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("visibility must lie in [0, 1], got {p}"),
            });
        }
        Ok(Self { n, p })
    }

    /// The pure state, `p = 1`.
    pub fn pure(n: u32) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn with_p(self, p: f64) -> Result<Self> {
        Self::new(self.n, p)
    }
}

/// Resolution coarsening δ and reference coarsening Δ, with the numerical
/// policy used to evaluate them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoarseningParams {
    delta: f64,
    ref_spread: f64,
    sigmas: f64,
    quadrature_order: usize,
}

impl CoarseningParams {
    pub fn new(delta: f64, ref_spread: f64) -> Result<Self> {
        Self::with_policy(delta, ref_spread, DEFAULT_SIGMAS, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn with_policy(
        delta: f64,
        ref_spread: f64,
        sigmas: f64,
        quadrature_order: usize,
    ) -> Result<Self> {
        // validate by construction
        DiscreteKernel::new(delta, sigmas)?;
        ReferenceKernel::new(ref_spread, quadrature_order)?;
        Ok(Self {
            delta,
            ref_spread,
            sigmas,
            quadrature_order,
        })
    }

    /// Parameters given as variances `(δ², Δ²)`.
    pub fn from_variances(delta_sq: f64, ref_spread_sq: f64) -> Result<Self> {
        Self::new(
            checked_sqrt("delta_sq", delta_sq)?,
            checked_sqrt("Delta_sq", ref_spread_sq)?,
        )
    }

    /// Sharp measurement, δ = Δ = 0.
    pub fn sharp() -> Self {
        Self::new(0.0, 0.0).expect("zero coarsening is valid")
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Reference spread Δ (radians).
    pub fn ref_spread(&self) -> f64 {
        self.ref_spread
    }

    pub fn sigmas(&self) -> f64 {
        self.sigmas
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::with_policy(delta, self.ref_spread, self.sigmas, self.quadrature_order)
    }

    pub fn with_ref_spread(self, ref_spread: f64) -> Result<Self> {
        Self::with_policy(self.delta, ref_spread, self.sigmas, self.quadrature_order)
    }

    pub fn discrete_kernel(&self) -> DiscreteKernel {
        DiscreteKernel::new(self.delta, self.sigmas).expect("validated at construction")
    }

    pub fn reference_kernel(&self) -> ReferenceKernel {
        ReferenceKernel::new(self.ref_spread, self.quadrature_order)
            .expect("validated at construction")
    }
}

pub(crate) fn checked_sqrt(name: &'static str, variance: f64) -> Result<f64> {
    if !variance.is_finite() || variance < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("variance must be finite and non-negative, got {variance}"),
        });
    }
    Ok(variance.sqrt())
}

/// A two-party correlation function `(θ_i, θ_j) → ⟨A_i B_j⟩`.
pub trait Correlator: Sync {
    fn correlation(&self, theta_i: f64, theta_j: f64) -> f64;

    /// All pairwise correlations, row-major: entry `i*bob.len() + j` is
    /// `correlation(alice[i], bob[j])`.
    fn correlation_matrix(&self, alice: &[f64], bob: &[f64]) -> Vec<f64> {
        alice
            .iter()
            .flat_map(|&a| bob.iter().map(move |&b| self.correlation(a, b)))
            .collect()
    }
}

impl<F> Correlator for F
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn correlation(&self, theta_i: f64, theta_j: f64) -> f64 {
        self(theta_i, theta_j)
    }
}

/// A correlator multiplied by a constant factor.
#[derive(Debug, Clone)]
pub struct Scaled<C> {
    pub inner: C,
    pub factor: f64,
}

impl<C: Correlator> Correlator for Scaled<C> {
    fn correlation(&self, theta_i: f64, theta_j: f64) -> f64 {
        self.factor * self.inner.correlation(theta_i, theta_j)
    }

    fn correlation_matrix(&self, alice: &[f64], bob: &[f64]) -> Vec<f64> {
        let mut m = self.inner.correlation_matrix(alice, bob);
        m.iter_mut().for_each(|v| *v *= self.factor);
        m
    }
}

/// The kernel-averaged signs of the two occupied levels:
/// `plus = Σ_k w(k)ζ(n−k)` and `minus = Σ_k w(k)ζ(−n−k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSigns {
    pub plus: f64,
    pub minus: f64,
}

impl LevelSigns {
    pub fn new(n: i64, kernel: &DiscreteKernel) -> Self {
        Self {
            plus: kernel.smeared_sign(n),
            minus: kernel.smeared_sign(-n),
        }
    }

    /// `Q_δ(n, φ)`.
    #[inline]
    pub fn q_plus(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        c * c * self.plus + s * s * self.minus
    }

    /// `Q_δ(−n, φ)`.
    #[inline]
    pub fn q_minus(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        c * c * self.minus + s * s * self.plus
    }

    /// `R_δ(n, φ)`.
    #[inline]
    pub fn r(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        s * c * (self.plus - self.minus)
    }

    fn response(&self, phi: f64) -> PartyResponse {
        let (s, c) = phi.sin_cos();
        let (c2, s2) = (c * c, s * s);
        PartyResponse {
            q_plus: c2 * self.plus + s2 * self.minus,
            q_minus: c2 * self.minus + s2 * self.plus,
            r: s * c * (self.plus - self.minus),
        }
    }
}

/// Single-party factors `(Q(n,·), Q(−n,·), R(n,·))`, possibly reference-averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PartyResponse {
    pub q_plus: f64,
    pub q_minus: f64,
    pub r: f64,
}

impl PartyResponse {
    /// `p·M/2 + (1−p)/4·T` for the two parties' factors.
    #[inline]
    pub fn joint(&self, other: &PartyResponse, p: f64) -> f64 {
        let pure = 0.5
            * (self.q_plus * other.q_minus + self.q_minus * other.q_plus + 2.0 * self.r * other.r);
        if p == 1.0 {
            return pure;
        }
        let identity = (self.q_plus + self.q_minus) * (other.q_plus + other.q_minus);
        p * pure + 0.25 * (1.0 - p) * identity
    }
}

/// Which coarsening mechanisms a correlator includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// δ only, pure state.
    Resolution,
    /// Δ only (n-independent).
    Reference,
    /// δ and Δ, pure state.
    Full,
    /// δ only, Werner mixture.
    WernerResolution,
    /// δ and Δ, Werner mixture.
    WernerFull,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::Resolution,
        Regime::Reference,
        Regime::Full,
        Regime::WernerResolution,
        Regime::WernerFull,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Resolution => "resolution",
            Regime::Reference => "reference",
            Regime::Full => "full",
            Regime::WernerResolution => "werner_resolution",
            Regime::WernerFull => "werner_full",
        }
    }

    /// The (state, params) actually seen by this regime: components outside the
    /// regime are switched off.
    pub fn restrict(
        &self,
        state: StateSpec,
        params: CoarseningParams,
    ) -> Result<(StateSpec, CoarseningParams)> {
        Ok(match self {
            Regime::Resolution => (state.with_p(1.0)?, params.with_ref_spread(0.0)?),
            Regime::Reference => (state.with_p(1.0)?, params.with_delta(0.0)?),
            Regime::Full => (state.with_p(1.0)?, params),
            Regime::WernerResolution => (state, params.with_ref_spread(0.0)?),
            Regime::WernerFull => (state, params),
        })
    }
}

/// The general fuzzy correlator: Werner visibility `p`, resolution kernel δ and
/// reference kernel Δ. All other regimes are special cases.
#[derive(Debug, Clone)]
pub struct FuzzyCorrelator {
    state: StateSpec,
    params: CoarseningParams,
    signs: LevelSigns,
    reference: ReferenceKernel,
    /// Quadrature averages of `(cos 2x, sin 2x)` over the reference offsets.
    harmonic: (f64, f64),
}

impl FuzzyCorrelator {
    pub fn new(state: StateSpec, params: CoarseningParams) -> Self {
        let n = i64::from(state.n());
        let reference = params.reference_kernel();
        let harmonic = reference.nodes(0.0).fold((0.0, 0.0), |(c, s), (x, w)| {
            let (sx, cx) = (2.0 * x).sin_cos();
            (c + w * cx, s + w * sx)
        });
        Self {
            state,
            params,
            signs: LevelSigns::new(n, &params.discrete_kernel()),
            reference,
            harmonic,
        }
    }

    pub fn for_regime(regime: Regime, state: StateSpec, params: CoarseningParams) -> Result<Self> {
        let (s, p) = regime.restrict(state, params)?;
        Ok(Self::new(s, p))
    }

    pub fn state(&self) -> StateSpec {
        self.state
    }

    pub fn params(&self) -> CoarseningParams {
        self.params
    }

    pub fn signs(&self) -> LevelSigns {
        self.signs
    }

    fn is_sharp_resolution(&self) -> bool {
        self.params.delta() == 0.0
    }

    /// Reference-averaged single-party factors at angle `theta`.
    ///
    /// The factors depend on the measurement angle only through `cos 2φ` and
    /// `sin 2φ`, so the quadrature over `φ = θ + x` reduces by angle addition
    /// to the precomputed averages of `cos 2x` and `sin 2x`.
    pub fn response(&self, theta: f64) -> PartyResponse {
        if self.reference.len() == 1 {
            return self.signs.response(theta);
        }
        let (s2, c2) = (2.0 * theta).sin_cos();
        let (hc, hs) = self.harmonic;
        let cos2 = c2 * hc - s2 * hs;
        let sin2 = s2 * hc + c2 * hs;
        let (plus, minus) = (self.signs.plus, self.signs.minus);
        PartyResponse {
            q_plus: 0.5 * ((1.0 + cos2) * plus + (1.0 - cos2) * minus),
            q_minus: 0.5 * ((1.0 + cos2) * minus + (1.0 - cos2) * plus),
            r: 0.5 * sin2 * (plus - minus),
        }
    }

    /// [`response`](Self::response) by direct quadrature over the nodes.
    pub fn response_by_quadrature(&self, theta: f64) -> PartyResponse {
        self.reference
            .nodes(theta)
            .fold(PartyResponse::default(), |acc, (phi, w)| {
                let r = self.signs.response(phi);
                PartyResponse {
                    q_plus: acc.q_plus + w * r.q_plus,
                    q_minus: acc.q_minus + w * r.q_minus,
                    r: acc.r + w * r.r,
                }
            })
    }
}

impl Correlator for FuzzyCorrelator {
    fn correlation(&self, theta_i: f64, theta_j: f64) -> f64 {
        if self.is_sharp_resolution() {
            // the identity term vanishes at δ = 0 for every n ≥ 1
            return self.state.p() * corr_reference(theta_i, theta_j, self.params.ref_spread());
        }
        let p = self.state.p();
        self.response(theta_i).joint(&self.response(theta_j), p)
    }

    fn correlation_matrix(&self, alice: &[f64], bob: &[f64]) -> Vec<f64> {
        if self.is_sharp_resolution() {
            return alice
                .iter()
                .flat_map(|&a| bob.iter().map(move |&b| self.correlation(a, b)))
                .collect();
        }
        let p = self.state.p();
        let ra: Vec<_> = alice.iter().map(|&a| self.response(a)).collect();
        let rb: Vec<_> = bob.iter().map(|&b| self.response(b)).collect();
        ra.iter()
            .flat_map(|x| rb.iter().map(move |y| x.joint(y, p)))
            .collect()
    }
}

/// `Q_δ(n, φ) = Σ_k w(k)·[cos²φ·ζ(n−k) + sin²φ·ζ(−n−k)]`.
pub fn q_func(n: i64, phi: f64, kernel: &DiscreteKernel) -> f64 {
    let (s, c) = phi.sin_cos();
    let (c2, s2) = (c * c, s * s);
    kernel
        .iter()
        .map(|(k, w)| w * (c2 * crate::kernel::zeta(n - k) + s2 * crate::kernel::zeta(-n - k)))
        .sum()
}

/// `R_δ(n, φ) = sinφ·cosφ·Σ_k w(k)·[ζ(n−k) − ζ(−n−k)]`.
pub fn r_func(n: i64, phi: f64, kernel: &DiscreteKernel) -> f64 {
    let sum: f64 = kernel
        .iter()
        .map(|(k, w)| w * (crate::kernel::zeta(n - k) - crate::kernel::zeta(-n - k)))
        .sum();
    phi.sin() * phi.cos() * sum
}

/// Pure-state correlator under resolution coarsening only.
pub fn corr_resolution(theta_i: f64, theta_j: f64, n: u32, kernel: &DiscreteKernel) -> f64 {
    let n = i64::from(n);
    0.5 * (q_func(n, theta_i, kernel) * q_func(-n, theta_j, kernel)
        + q_func(-n, theta_i, kernel) * q_func(n, theta_j, kernel)
        + 2.0 * r_func(n, theta_i, kernel) * r_func(n, theta_j, kernel))
}

/// Correlator under reference coarsening only: `−e^{−4Δ²}·cos 2(θ_i+θ_j)`.
pub fn corr_reference(theta_i: f64, theta_j: f64, ref_spread: f64) -> f64 {
    -(-4.0 * ref_spread * ref_spread).exp() * (2.0 * (theta_i + theta_j)).cos()
}

/// [`corr_reference`] evaluated by double quadrature of `−cos 2(φ_i+φ_j)`.
pub fn corr_reference_quadrature(theta_i: f64, theta_j: f64, kernel: &ReferenceKernel) -> f64 {
    kernel.expectation(theta_i, |phi_i| {
        kernel.expectation(theta_j, |phi_j| -(2.0 * (phi_i + phi_j)).cos())
    })
}

/// Pure-state correlator under both coarsenings.
pub fn corr_full(theta_i: f64, theta_j: f64, n: u32, params: CoarseningParams) -> Result<f64> {
    corr_werner_full(theta_i, theta_j, StateSpec::pure(n)?, params)
}

/// Werner-state correlator under resolution coarsening only.
pub fn corr_werner_resolution(
    theta_i: f64,
    theta_j: f64,
    state: StateSpec,
    kernel: &DiscreteKernel,
) -> f64 {
    let n = i64::from(state.n());
    let p = state.p();
    let (qa, qa_m) = (q_func(n, theta_i, kernel), q_func(-n, theta_i, kernel));
    let (qb, qb_m) = (q_func(n, theta_j, kernel), q_func(-n, theta_j, kernel));
    let pure = corr_resolution(theta_i, theta_j, state.n(), kernel);
    if p == 1.0 {
        return pure;
    }
    let identity = qa * qb + qa * qb_m + qa_m * qb + qa_m * qb_m;
    p * pure + 0.25 * (1.0 - p) * identity
}

/// Werner-state correlator under both coarsenings.
pub fn corr_werner_full(
    theta_i: f64,
    theta_j: f64,
    state: StateSpec,
    params: CoarseningParams,
) -> Result<f64> {
    Ok(FuzzyCorrelator::new(state, params).correlation(theta_i, theta_j))
}
