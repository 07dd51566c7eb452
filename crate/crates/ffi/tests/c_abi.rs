#![allow(clippy::excessive_precision)]

use std::ffi::CStr;
use std::ptr;

use kdv_elliptic_ffi::*;

fn solution(deltas: &[f64]) -> *mut KdvSolution {
    let mut h = ptr::null_mut();
    let s = unsafe { kdv_solution_new(0.3, 0.7, deltas.as_ptr(), deltas.len(), &mut h) };
    assert_eq!(s, KdvStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn special_functions() {
    let mut v = 0.0;
    assert_eq!(unsafe { kdv_wp(4.0, 0.0, 1.0, &mut v) }, KdvStatus::Ok);
    assert!((v - 1.2137559863387746413).abs() < 1e-13);
    assert_eq!(unsafe { kdv_zeta(0.3, 0.7, 0.8, &mut v) }, KdvStatus::Ok);
    assert!((v - 1.2457974489930803103).abs() < 1e-13);
    assert_eq!(unsafe { kdv_sn(1.0, 0.4, &mut v) }, KdvStatus::Ok);
    assert!((v - 0.4f64.tanh()).abs() < 1e-14);

    assert_eq!(unsafe { kdv_wp(0.3, 0.7, 0.0, &mut v) }, KdvStatus::PoleProximity);
    assert_eq!(
        unsafe { kdv_wp(f64::NAN, 0.7, 0.5, &mut v) },
        KdvStatus::InvalidArgument
    );
    assert_eq!(unsafe { kdv_sn(1.5, 0.4, &mut v) }, KdvStatus::InvalidArgument);
    assert_eq!(
        unsafe { kdv_wp(0.3, 0.7, 0.5, ptr::null_mut()) },
        KdvStatus::NullPointer
    );
}

#[test]
fn roots() {
    let (mut re, mut im) = ([0.0; 3], [0.0; 3]);
    assert_eq!(
        unsafe { kdv_roots(0.3, 0.7, re.as_mut_ptr(), im.as_mut_ptr()) },
        KdvStatus::Ok
    );
    assert!((re[0] - 0.60395206409390567849).abs() < 1e-15);
    assert_eq!(im[0], 0.0);
    assert!((im[1] - 0.44561033627202462740).abs() < 1e-14);
    assert_eq!(im[1], -im[2]);
    assert_eq!(
        unsafe { kdv_roots(0.3, 0.7, ptr::null_mut(), im.as_mut_ptr()) },
        KdvStatus::NullPointer
    );
}

#[test]
fn solution_handle_lifecycle() {
    let h = solution(&[-0.02, 0.04]);
    assert_eq!(unsafe { kdv_solution_len(h) }, 2);
    let (mut z, mut u) = (0.0, 0.0);
    assert_eq!(unsafe { kdv_solution_eval(h, 0.7, &mut z, &mut u) }, KdvStatus::Ok);
    assert!((z + 52.772107372468061304).abs() < 1e-11);
    assert!((u - 3.8870529202671702767).abs() < 1e-11);
    // z alone, u alone
    assert_eq!(
        unsafe { kdv_solution_eval(h, 0.0, &mut z, ptr::null_mut()) },
        KdvStatus::Ok
    );
    assert!((z + 150.00000048096000034).abs() < 1e-9);

    let mut lifted = 0.0;
    assert_eq!(
        unsafe { kdv_solution_eval_time(h, 0.5, 0.6, 0.2, &mut lifted) },
        KdvStatus::Ok
    );
    assert_eq!(
        unsafe { kdv_solution_eval(h, 0.7, ptr::null_mut(), &mut u) },
        KdvStatus::Ok
    );
    assert!((lifted - (u - 0.5 / 6.0)).abs() < 1e-12);

    let mut r = 1.0;
    assert_eq!(
        unsafe { kdv_solution_static_residual(h, -2.0, 2.0, 801, 5e-3, &mut r) },
        KdvStatus::Ok
    );
    assert!(r < 1e-7, "{r}");
    assert_eq!(
        unsafe { kdv_solution_static_residual(h, 2.0, -2.0, 801, 5e-3, &mut r) },
        KdvStatus::InvalidArgument
    );
    unsafe { kdv_solution_free(h) };
    unsafe { kdv_solution_free(ptr::null_mut()) };
}

#[test]
fn construction_errors() {
    let mut h = ptr::null_mut();
    let d = [0.03, -0.03];
    assert_eq!(
        unsafe { kdv_solution_new(0.3, 0.7, d.as_ptr(), 2, &mut h) },
        KdvStatus::DegenerateDeltas
    );
    assert!(h.is_null());
    assert_eq!(
        unsafe { kdv_solution_new(0.3, 0.7, ptr::null(), 2, &mut h) },
        KdvStatus::NullPointer
    );
    assert_eq!(
        unsafe { kdv_solution_new(0.3, 0.7, ptr::null(), 0, &mut h) },
        KdvStatus::Ok
    );
    assert_eq!(unsafe { kdv_solution_len(h) }, 0);
    let mut z = 0.0;
    assert_eq!(
        unsafe { kdv_solution_eval(h, 0.0, &mut z, ptr::null_mut()) },
        KdvStatus::PoleProximity
    );
    unsafe { kdv_solution_free(h) };
    assert_eq!(
        unsafe { kdv_solution_eval(ptr::null(), 0.5, &mut z, ptr::null_mut()) },
        KdvStatus::NullPointer
    );
    assert_eq!(unsafe { kdv_solution_len(ptr::null()) }, 0);
}

#[test]
fn every_status_has_a_message() {
    for s in [
        KdvStatus::Ok,
        KdvStatus::NullPointer,
        KdvStatus::InvalidArgument,
        KdvStatus::DegenerateDeltas,
        KdvStatus::PoleProximity,
        KdvStatus::NonPositiveDiscriminant,
        KdvStatus::ConvergenceFailure,
        KdvStatus::PrecisionLoss,
        KdvStatus::Numeric,
        KdvStatus::Panic,
    ] {
        let msg = unsafe { CStr::from_ptr(kdv_status_message(s)) };
        assert!(!msg.to_str().unwrap().is_empty());
    }
}
