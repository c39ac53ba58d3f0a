//! C ABI for `fuzzy-witness`.
//!
//! Correlators and witnesses are opaque heap handles created by `*_new` and
//! released by `*_free`. Every fallible function returns an [`FwStatus`];
//! on failure, [`fw_last_error_message`] describes the most recent error on
//! the calling thread. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fuzzy_witness::{
    maximize, AngleAssignment, CoarseningParams, Correlator, Error, FuzzyCorrelator,
    OptimizerConfig, StateSpec, TransitionPoint, TransitionSolver, WitnessKind, WitnessSpec,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DimensionMismatch = 3,
    NoViolationAtLo = 4,
    NoTransitionAtHi = 5,
    NoViolationAtPureState = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwWitnessKind {
    Bell = 0,
    Steering = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwOptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

/// A located transition point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FwTransition {
    pub delta_sq: f64,
    pub ref_spread_sq: f64,
    pub p: f64,
    pub achieved_value: f64,
    pub bound: f64,
    /// Margin change per unit of the searched parameter near the crossing.
    pub slope: f64,
}

/// Opaque correlator handle.
pub struct FwCorrelator(FuzzyCorrelator);

/// Opaque witness handle.
pub struct FwWitness(WitnessSpec);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg =
        CString::new(msg).unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> FwStatus {
    match e {
        Error::InvalidParameter { .. } => FwStatus::InvalidParameter,
        Error::DimensionMismatch { .. } => FwStatus::DimensionMismatch,
        Error::NoViolationAtLo { .. } => FwStatus::NoViolationAtLo,
        Error::NoTransitionAtHi { .. } => FwStatus::NoTransitionAtHi,
        Error::NoViolationAtPureState { .. } => FwStatus::NoViolationAtPureState,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> FwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FwStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer: {name}"));
            FwStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            FwStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn as_mut<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

impl From<FwOptimizerConfig> for OptimizerConfig {
    fn from(c: FwOptimizerConfig) -> Self {
        OptimizerConfig {
            restarts: c.restarts,
            max_iterations: c.max_iterations,
            tolerance: c.tolerance,
            seed: c.seed,
        }
    }
}

impl From<&TransitionPoint> for FwTransition {
    fn from(t: &TransitionPoint) -> Self {
        FwTransition {
            delta_sq: t.delta_sq,
            ref_spread_sq: t.ref_spread_sq,
            p: t.p,
            achieved_value: t.achieved_value,
            bound: t.bound,
            slope: t.slope,
        }
    }
}

/// Message for the last failed call on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn fw_status_description(status: FwStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        FwStatus::Ok => b"ok\0",
        FwStatus::NullPointer => b"null pointer argument\0",
        FwStatus::InvalidParameter => b"invalid parameter\0",
        FwStatus::DimensionMismatch => b"angle count does not match the witness\0",
        FwStatus::NoViolationAtLo => b"no violation at the lower bracket end\0",
        FwStatus::NoTransitionAtHi => b"still violated at the upper bracket end\0",
        FwStatus::NoViolationAtPureState => b"no violation even at p = 1\0",
        FwStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn fw_optimizer_config_default() -> FwOptimizerConfig {
    let c = OptimizerConfig::default();
    FwOptimizerConfig {
        restarts: c.restarts,
        max_iterations: c.max_iterations,
        tolerance: c.tolerance,
        seed: c.seed,
    }
}

/// Creates a correlator for macroscopicity `n`, visibility `p`, resolution
/// spread `delta` and reference spread `ref_spread`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fw_correlator_new(
    n: u32,
    p: f64,
    delta: f64,
    ref_spread: f64,
    out: *mut *mut FwCorrelator,
) -> FwStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let corr = FuzzyCorrelator::new(
            StateSpec::new(n, p)?,
            CoarseningParams::new(delta, ref_spread)?,
        );
        *out = Box::into_raw(Box::new(FwCorrelator(corr)));
        Ok(())
    })
}

/// # Safety
/// `corr` must come from [`fw_correlator_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fw_correlator_free(corr: *mut FwCorrelator) {
    if !corr.is_null() {
        drop(Box::from_raw(corr));
    }
}

/// Correlation at one pair of measurement angles.
///
/// # Safety
/// `corr` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fw_correlator_value(
    corr: *const FwCorrelator,
    theta_i: f64,
    theta_j: f64,
    out: *mut f64,
) -> FwStatus {
    guard(|| {
        let corr = as_ref(corr, "corr")?;
        *as_mut(out, "out")? = corr.0.correlation(theta_i, theta_j);
        Ok(())
    })
}

/// Creates an `m`-setting Bell or steering witness.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fw_witness_new(
    kind: FwWitnessKind,
    m: usize,
    out: *mut *mut FwWitness,
) -> FwStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let kind = match kind {
            FwWitnessKind::Bell => WitnessKind::Bell,
            FwWitnessKind::Steering => WitnessKind::Steering,
        };
        *out = Box::into_raw(Box::new(FwWitness(WitnessSpec::new(kind, m)?)));
        Ok(())
    })
}

/// # Safety
/// `witness` must come from [`fw_witness_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fw_witness_free(witness: *mut FwWitness) {
    if !witness.is_null() {
        drop(Box::from_raw(witness));
    }
}

/// Classical bound of the witness.
///
/// # Safety
/// `witness` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fw_witness_bound(witness: *const FwWitness, out: *mut f64) -> FwStatus {
    guard(|| {
        *as_mut(out, "out")? = as_ref(witness, "witness")?.0.bound();
        Ok(())
    })
}

/// Witness value at the given angles; `alice` and `bob` each hold `m` values.
///
/// # Safety
/// Handles must be live, `alice` and `bob` readable for `m` doubles, `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fw_witness_evaluate(
    witness: *const FwWitness,
    corr: *const FwCorrelator,
    alice: *const f64,
    bob: *const f64,
    m: usize,
    out: *mut f64,
) -> FwStatus {
    guard(|| {
        let witness = as_ref(witness, "witness")?;
        let corr = as_ref(corr, "corr")?;
        let angles = AngleAssignment::new(
            slice(alice, m, "alice")?.to_vec(),
            slice(bob, m, "bob")?.to_vec(),
        );
        *as_mut(out, "out")? = witness.0.evaluate(&angles, &corr.0)?;
        Ok(())
    })
}

/// Maximizes the witness over all angles. When `angles` is non-NULL it must
/// hold `2m` doubles and receives Alice's then Bob's optimal angles.
///
/// # Safety
/// Handles must be live; `config` readable; `value` valid for writes;
/// `angles`, if non-NULL, writable for `angles_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fw_maximize(
    witness: *const FwWitness,
    corr: *const FwCorrelator,
    config: *const FwOptimizerConfig,
    value: *mut f64,
    angles: *mut f64,
    angles_len: usize,
) -> FwStatus {
    guard(|| {
        let witness = as_ref(witness, "witness")?;
        let corr = as_ref(corr, "corr")?;
        let config = OptimizerConfig::from(*as_ref(config, "config")?);
        let value = as_mut(value, "value")?;
        let m = witness.0.m();
        if !angles.is_null() && angles_len != 2 * m {
            return Err(Error::DimensionMismatch {
                expected: m,
                alice: angles_len / 2,
                bob: angles_len - angles_len / 2,
            }
            .into());
        }
        let best = maximize(&witness.0, &corr.0, &config)?;
        *value = best.value;
        if !angles.is_null() {
            std::slice::from_raw_parts_mut(angles, angles_len)
                .copy_from_slice(&best.angles.flatten());
        }
        Ok(())
    })
}

fn solver(
    witness: &FwWitness,
    config: FwOptimizerConfig,
    tolerance: f64,
) -> Result<TransitionSolver, Failure> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            reason: format!("must be positive, got {tolerance}"),
        }
        .into());
    }
    Ok(TransitionSolver::new(witness.0.clone(), config.into()).with_tolerance(tolerance))
}

/// Critical δ² at fixed reference spread, bisected on `[lo, hi]`.
///
/// # Safety
/// `witness` must be live, `config` readable and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fw_find_critical_delta(
    witness: *const FwWitness,
    config: *const FwOptimizerConfig,
    n: u32,
    p: f64,
    ref_spread: f64,
    lo: f64,
    hi: f64,
    tolerance: f64,
    out: *mut FwTransition,
) -> FwStatus {
    guard(|| {
        let s = solver(
            as_ref(witness, "witness")?,
            *as_ref(config, "config")?,
            tolerance,
        )?;
        let out = as_mut(out, "out")?;
        let t = s.find_critical_delta(StateSpec::new(n, p)?, ref_spread, (lo, hi))?;
        *out = FwTransition::from(&t);
        Ok(())
    })
}

/// Critical Δ² at fixed resolution spread, bisected on `[lo, hi]`.
///
/// # Safety
/// `witness` must be live, `config` readable and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fw_find_critical_reference(
    witness: *const FwWitness,
    config: *const FwOptimizerConfig,
    n: u32,
    p: f64,
    delta: f64,
    lo: f64,
    hi: f64,
    tolerance: f64,
    out: *mut FwTransition,
) -> FwStatus {
    guard(|| {
        let s = solver(
            as_ref(witness, "witness")?,
            *as_ref(config, "config")?,
            tolerance,
        )?;
        let out = as_mut(out, "out")?;
        let t = s.find_critical_reference(StateSpec::new(n, p)?, delta, (lo, hi))?;
        *out = FwTransition::from(&t);
        Ok(())
    })
}

/// Critical Werner visibility for fixed coarsening.
///
/// # Safety
/// `witness` must be live, `config` readable and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fw_find_critical_visibility(
    witness: *const FwWitness,
    config: *const FwOptimizerConfig,
    n: u32,
    delta: f64,
    ref_spread: f64,
    tolerance: f64,
    out: *mut FwTransition,
) -> FwStatus {
    guard(|| {
        let s = solver(
            as_ref(witness, "witness")?,
            *as_ref(config, "config")?,
            tolerance,
        )?;
        let out = as_mut(out, "out")?;
        let t = s.find_critical_visibility(n, CoarseningParams::new(delta, ref_spread)?)?;
        *out = FwTransition::from(&t);
        Ok(())
    })
}
