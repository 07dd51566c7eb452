use kdv_elliptic::lattice::{Constant, Linear, Seed};
use kdv_elliptic::verify::{
    backlund_residual, commutativity_check, identity_suite, kdv_time_residual, pole_mask, static_kdv_residual,
    static_kdv_residual_of, GridSpec, Tolerances, Verdict,
};
use kdv_elliptic::{build, time_lift, Branch, Error, Invariants, SolitonSolution, SolitonSpec};
use proptest::prelude::*;

fn inv() -> Invariants {
    Invariants::new(0.3, 0.7).unwrap()
}

fn solution(deltas: &[f64]) -> SolitonSolution {
    build(&SolitonSpec::new(inv(), deltas).unwrap()).unwrap()
}

#[test]
fn reports_are_reproducible() {
    let sol = solution(&[-0.02, 0.03, 0.05]);
    let g = GridSpec::default();
    let a = static_kdv_residual(&sol, &g, 1e-7).unwrap();
    let b = static_kdv_residual(&sol, &g, 1e-7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.n_points(), 801);
}

#[test]
fn full_suite_passes_with_three_real_roots() {
    let inv = Invariants::new(4.0, 0.0).unwrap();
    let grid = GridSpec::new(0.05, 3.0, 300, 5e-3).unwrap();
    for r in identity_suite(&inv, &grid, &Tolerances::default()) {
        assert_eq!(
            r.verdict,
            Verdict::Pass,
            "{}: {} ({:?})",
            r.name,
            r.max_residual,
            r.note
        );
    }
}

#[test]
fn bridge_checks_are_skipped_for_complex_roots() {
    let reports = identity_suite(&inv(), &GridSpec::default(), &Tolerances::default());
    let skipped: Vec<_> = reports.iter().filter(|r| r.verdict == Verdict::Skipped).collect();
    assert!(!skipped.is_empty());
    assert!(skipped
        .iter()
        .all(|r| r.note.as_deref().unwrap_or("").contains("complex roots")));
    assert!(reports.iter().all(|r| r.verdict != Verdict::Fail));
}

#[test]
fn zero_tolerance_fails_everything_evaluated() {
    let mut tol = Tolerances::default();
    assert!(tol.set("all", 0.0));
    let inv = Invariants::new(4.0, 0.0).unwrap();
    for r in identity_suite(&inv, &GridSpec::default(), &tol) {
        assert_eq!(r.verdict, Verdict::Fail, "{}", r.name);
    }
}

#[test]
fn negative_controls_fail() {
    let g = GridSpec::default();
    // a straight line is not a solution
    let line = Linear {
        slope: 1.0,
        intercept: 0.2,
    };
    assert!(!static_kdv_residual_of(&line, &inv(), &g, 1e-7).unwrap().passed());
    // wrong eigenvalue in the seed relation
    let spec = SolitonSpec::new(inv(), &[0.03]).unwrap();
    let base = Seed::base(spec.kernel());
    let seed = Seed::shifted(spec.kernel(), spec.params()[0]);
    let lam = spec.params()[0].lambda_sq();
    assert!(backlund_residual(&base, &seed, lam, &g, 1e-9).unwrap().passed());
    assert!(!backlund_residual(&base, &seed, lam * 1.001, &g, 1e-9).unwrap().passed());
    // the lift needs its constant
    let sol = solution(&[-0.02, 0.04]);
    let lift = time_lift(&sol, 0.5);
    assert!(kdv_time_residual(&lift, &g, &[0.0, 0.1], 1e-6).unwrap().passed());
    let r = kdv_time_residual(&lift.with_offset(0.0), &g, &[0.0, 0.1], 1e-6).unwrap();
    assert!(!r.passed() && r.max_residual > 1e-3);
}

#[test]
fn constant_solves_nothing_but_masks_nothing() {
    let g = GridSpec::new(-1.0, 1.0, 11, 0.05).unwrap();
    let c = Constant(2.0);
    assert!(pole_mask(&[&c as &dyn Branch], &g.points(), 0.05).iter().all(|m| !m));
}

#[test]
fn commutativity_needs_two_parameters() {
    let g = GridSpec::default();
    assert!(matches!(
        commutativity_check(&solution(&[0.03]), &g, 1e-8),
        Err(Error::InvalidGrid(_))
    ));
    let r = commutativity_check(&solution(&[-0.02, 0.03, 0.05]), &g, 1e-8).unwrap();
    assert!(r.passed(), "{}", r.max_residual);
    assert_eq!(r.note.as_deref(), Some("4 squares, 4 legs each"));
}

#[test]
fn fully_masked_grid_is_an_error() {
    // every point of this tiny window lies within the mask around the z₀ pole
    let g = GridSpec::new(-1e-3, 1e-3, 5, 5e-3).unwrap();
    assert_eq!(static_kdv_residual(&solution(&[]), &g, 1e-7), Err(Error::EmptyGrid));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn larger_mask_never_raises_the_maximum(r1 in 1e-3f64..2e-2, extra in 0.0f64..3e-2) {
        let sol = solution(&[-0.02, 0.03, 0.05, 0.04]);
        let small = GridSpec::new(-2.0, 2.0, 401, r1).unwrap();
        let large = small.with_mask_radius(r1 + extra).unwrap();
        let a = static_kdv_residual(&sol, &small, 1e-7).unwrap();
        let b = static_kdv_residual(&sol, &large, 1e-7).unwrap();
        prop_assert!(b.max_residual <= a.max_residual);
        prop_assert!(b.points_masked >= a.points_masked);
    }
}
