//! C bindings.
//!
//! Every function returns a [`KdvStatus`] and writes its result through an
//! out pointer. Solutions are opaque handles released with
//! [`kdv_solution_free`]. Panics never cross the boundary; they surface as
//! `KDV_STATUS_PANIC`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use kdv_elliptic::verify::static_kdv_residual;
use kdv_elliptic::{
    build, roots_from_invariants, sn, time_lift, Branch, Error, GridSpec, Invariants, Modulus, SolitonSolution,
    SolitonSpec, Weierstrass,
};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateDeltas = 3,
    PoleProximity = 4,
    NonPositiveDiscriminant = 5,
    ConvergenceFailure = 6,
    PrecisionLoss = 7,
    Numeric = 8,
    Panic = 9,
}

impl From<&Error> for KdvStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonFiniteInvariants { .. } | Error::InvalidGrid(_) | Error::ArgumentOutOfRange { .. } => {
                KdvStatus::InvalidArgument
            }
            Error::DegenerateDeltas { .. } => KdvStatus::DegenerateDeltas,
            Error::PoleProximity { .. } => KdvStatus::PoleProximity,
            Error::NonPositiveDiscriminant { .. } | Error::DegenerateRoots => KdvStatus::NonPositiveDiscriminant,
            Error::ConvergenceFailure { .. } => KdvStatus::ConvergenceFailure,
            Error::PrecisionLoss { .. } => KdvStatus::PrecisionLoss,
            _ => KdvStatus::Numeric,
        }
    }
}

/// Opaque N-soliton solution.
pub struct KdvSolution {
    inner: SolitonSolution,
}

fn guard<F: FnOnce() -> Result<(), KdvStatus>>(f: F) -> KdvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KdvStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => KdvStatus::Panic,
    }
}

fn lift<T>(r: Result<T, Error>) -> Result<T, KdvStatus> {
    r.map_err(|e| KdvStatus::from(&e))
}

/// # Safety
/// `p` must be null or valid for a write of `T`.
unsafe fn put<T>(p: *mut T, v: T) -> Result<(), KdvStatus> {
    if p.is_null() {
        return Err(KdvStatus::NullPointer);
    }
    p.write(v);
    Ok(())
}

fn kernel(g2: f64, g3: f64) -> Result<Weierstrass, KdvStatus> {
    Ok(Weierstrass::new(lift(Invariants::new(g2, g3))?))
}

/// Static text for a status code.
#[no_mangle]
pub extern "C" fn kdv_status_message(status: KdvStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        KdvStatus::Ok => b"ok\0",
        KdvStatus::NullPointer => b"null pointer argument\0",
        KdvStatus::InvalidArgument => b"invalid argument\0",
        KdvStatus::DegenerateDeltas => b"two shifts give the same lambda^2\0",
        KdvStatus::PoleProximity => b"point lies at or near a pole\0",
        KdvStatus::NonPositiveDiscriminant => b"cubic has no three distinct real roots\0",
        KdvStatus::ConvergenceFailure => b"iteration did not converge\0",
        KdvStatus::PrecisionLoss => b"local expansion lost too many terms to cancellation\0",
        KdvStatus::Numeric => b"numerical failure\0",
        KdvStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// ℘(x; g2, g3).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kdv_wp(g2: f64, g3: f64, x: f64, out: *mut f64) -> KdvStatus {
    guard(|| put(out, lift(kernel(g2, g3)?.wp(x))?))
}

/// ζ(x; g2, g3).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kdv_zeta(g2: f64, g3: f64, x: f64, out: *mut f64) -> KdvStatus {
    guard(|| put(out, lift(kernel(g2, g3)?.zeta(x))?))
}

/// sn(x | k²) for k² in [0, 1].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kdv_sn(k2: f64, x: f64, out: *mut f64) -> KdvStatus {
    guard(|| {
        let m = Modulus::new(k2).ok_or(KdvStatus::InvalidArgument)?;
        put(out, lift(sn(x, m))?)
    })
}

/// Roots of 4t³ − g2·t − g3; real and imaginary parts in three-element
/// arrays, ordered e1, e2, e3.
///
/// # Safety
/// `re` and `im` must each be valid for three writes.
#[no_mangle]
pub unsafe extern "C" fn kdv_roots(g2: f64, g3: f64, re: *mut f64, im: *mut f64) -> KdvStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(KdvStatus::NullPointer);
        }
        let roots = roots_from_invariants(&lift(Invariants::new(g2, g3))?);
        for (i, e) in roots.as_array().iter().enumerate() {
            re.add(i).write(e.re);
            im.add(i).write(e.im);
        }
        Ok(())
    })
}

/// Builds the N-soliton for `n` shifts. `deltas` may be null when `n` is 0.
/// On success `*out` owns a handle for [`kdv_solution_free`].
///
/// # Safety
/// `deltas` must be valid for `n` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn kdv_solution_new(
    g2: f64,
    g3: f64,
    deltas: *const f64,
    n: usize,
    out: *mut *mut KdvSolution,
) -> KdvStatus {
    guard(|| {
        if out.is_null() || (deltas.is_null() && n > 0) {
            return Err(KdvStatus::NullPointer);
        }
        let deltas = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(deltas, n)
        };
        let spec = lift(SolitonSpec::new(lift(Invariants::new(g2, g3))?, deltas))?;
        let inner = lift(build(&spec))?;
        out.write(Box::into_raw(Box::new(KdvSolution { inner })));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sol` must come from [`kdv_solution_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kdv_solution_free(sol: *mut KdvSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Number of shifts in the solution; 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kdv_solution_len(sol: *const KdvSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.inner.len())
}

/// z and u = z_x at x. Either out pointer may be null.
///
/// # Safety
/// `sol` must be a live handle; non-null outs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kdv_solution_eval(sol: *const KdvSolution, x: f64, z: *mut f64, u: *mut f64) -> KdvStatus {
    guard(|| {
        let sol = sol.as_ref().ok_or(KdvStatus::NullPointer)?;
        let j = lift(sol.inner.jet(x))?;
        if !z.is_null() {
            z.write(j.z());
        }
        if !u.is_null() {
            u.write(j.u());
        }
        Ok(())
    })
}

/// The travelling solution u(x + bt) − b/6 of the full equation at (x, t).
///
/// # Safety
/// `sol` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kdv_solution_eval_time(
    sol: *const KdvSolution,
    b: f64,
    x: f64,
    t: f64,
    out: *mut f64,
) -> KdvStatus {
    guard(|| {
        let sol = sol.as_ref().ok_or(KdvStatus::NullPointer)?;
        if !b.is_finite() {
            return Err(KdvStatus::InvalidArgument);
        }
        put(out, lift(time_lift(&sol.inner, b).eval(x, t))?)
    })
}

/// Largest scaled static residual on `n_points` samples of [x_min, x_max],
/// skipping points within `mask_radius` of a pole.
///
/// # Safety
/// `sol` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kdv_solution_static_residual(
    sol: *const KdvSolution,
    x_min: f64,
    x_max: f64,
    n_points: usize,
    mask_radius: f64,
    out: *mut f64,
) -> KdvStatus {
    guard(|| {
        let sol = sol.as_ref().ok_or(KdvStatus::NullPointer)?;
        let grid = lift(GridSpec::new(x_min, x_max, n_points, mask_radius))?;
        let r = lift(static_kdv_residual(&sol.inner, &grid, f64::INFINITY))?;
        put(out, r.max_residual)
    })
}
