//! Grid-sampled residual checks.
//!
//! Derivatives of soliton branches come from their local expansions; finite
//! differences appear only in identities that involve a function given by
//! values alone (℘″ against ℘′, ℘‴ and the sn-based one-solitons).
//!
//! Points near genuine poles of the branches under test are masked. A pole
//! is recognised either by a failed evaluation or by z jumping from positive
//! to negative between neighbouring samples while z_x stays positive, which
//! is how the simple poles z ≈ −2/(x − p) of these solutions cross a grid.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{self, SnBranch};
use crate::lattice::{Branch, SolitonSolution, Subset, TimeLift};
use crate::weierstrass::{roots_from_invariants, Invariants, Weierstrass};

/// Sampling window and pole-mask radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    pole_mask_radius: f64,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, pole_mask_radius: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "x_min ({x_min}) must be below x_max ({x_max})"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be at least 2, got {n_points}"
            )));
        }
        if pole_mask_radius.is_nan() || pole_mask_radius <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "pole_mask_radius must be positive, got {pole_mask_radius}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            pole_mask_radius,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn pole_mask_radius(&self) -> f64 {
        self.pole_mask_radius
    }

    pub fn with_mask_radius(self, r: f64) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n_points, r)
    }

    /// Equally spaced samples; the endpoints are hit exactly.
    pub fn points(&self) -> Vec<f64> {
        let span = self.x_max - self.x_min;
        let last = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|k| self.x_min + span * k as f64 / last)
            .collect()
    }
}

impl Default for GridSpec {
    /// x ∈ [−2, 2], 801 points, mask radius 5e−3.
    fn default() -> Self {
        Self {
            x_min: -2.0,
            x_max: 2.0,
            n_points: 801,
            pole_mask_radius: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of one identity over one grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub tolerance: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub points_evaluated: usize,
    pub points_masked: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn n_points(&self) -> usize {
        self.points_evaluated + self.points_masked
    }

    fn skipped(name: &str, tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            tolerance,
            max_residual: 0.0,
            mean_residual: 0.0,
            points_evaluated: 0,
            points_masked: 0,
            verdict: Verdict::Skipped,
            note: Some(reason.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Running max/mean of residuals for one report.
#[derive(Debug, Default)]
struct Accumulator {
    max: f64,
    sum: f64,
    evaluated: usize,
    masked: usize,
}

impl Accumulator {
    fn push(&mut self, r: f64) {
        // NaN must fail the verdict, so it is recorded as infinite
        let r = if r.is_nan() { f64::INFINITY } else { r.abs() };
        self.max = self.max.max(r);
        self.sum += r;
        self.evaluated += 1;
    }

    fn mask(&mut self) {
        self.masked += 1;
    }

    fn finish(self, name: &str, tolerance: f64) -> Result<ResidualReport> {
        if self.evaluated == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(ResidualReport {
            name: name.to_string(),
            tolerance,
            max_residual: self.max,
            mean_residual: self.sum / self.evaluated as f64,
            points_evaluated: self.evaluated,
            points_masked: self.masked,
            verdict: if self.max < tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            note: None,
        })
    }
}

/// Identity names and their default tolerances.
pub mod names {
    pub const WP_ODE: &str = "wp_ode";
    pub const WP_SECOND: &str = "wp_second_derivative";
    pub const WP_THIRD: &str = "wp_third_derivative";
    pub const ADDITION: &str = "addition_formula";
    pub const SN_ODE: &str = "sn_ode";
    pub const INVERSE_SN_ODE: &str = "inverse_sn_ode";
    pub const H_ODE: &str = "h_wp_ode";
    pub const H1_ODE: &str = "h1_wp_ode";
    pub const MOBIUS: &str = "mobius_identity";
    pub const SN_BRIDGE: &str = "wp_sn_bridge";
    pub const BACKLUND: &str = "backlund_seed";
    pub const STATIC_KDV: &str = "static_kdv";
    pub const COMMUTATIVITY: &str = "commutativity";
    pub const KDV_TIME: &str = "kdv_time";
}

/// Per-identity tolerances with overrides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        use names::*;
        let defaults = [
            (WP_ODE, 1e-10),
            (WP_SECOND, 1e-6),
            (WP_THIRD, 1e-6),
            (ADDITION, 1e-9),
            (SN_ODE, 1e-8),
            (INVERSE_SN_ODE, 1e-8),
            (H_ODE, 1e-7),
            (H1_ODE, 1e-7),
            (MOBIUS, 1e-8),
            (SN_BRIDGE, 1e-8),
            (BACKLUND, 1e-9),
            (STATIC_KDV, 1e-7),
            (COMMUTATIVITY, 1e-8),
            (KDV_TIME, 1e-6),
        ];
        Self(defaults.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(1e-8)
    }

    /// Sets one tolerance; the name `all` sets every known identity.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        if name == "all" {
            self.0.values_mut().for_each(|v| *v = value);
            return true;
        }
        match self.0.get_mut(name) {
            Some(v) => {
                *v = value;
                true
            }
            None => false,
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// Locations of poles of `branch` among (or between) the sorted samples.
pub fn detect_poles<B: Branch + ?Sized>(branch: &B, xs: &[f64]) -> Vec<f64> {
    let jets: Vec<_> = xs.iter().map(|&x| branch.jet(x).ok()).collect();
    let mut poles = Vec::new();
    for (k, jet) in jets.iter().enumerate() {
        if jet.is_none() {
            poles.push(xs[k]);
        }
    }
    for k in 0..xs.len().saturating_sub(1) {
        if let (Some(a), Some(b)) = (&jets[k], &jets[k + 1]) {
            if a.z() > 0.0 && b.z() < 0.0 && a.u() > 0.0 && b.u() > 0.0 {
                // 1/z is close to linear across a simple pole
                let (ia, ib) = (1.0 / a.z(), 1.0 / b.z());
                let t = ia / (ia - ib);
                poles.push(xs[k] + t * (xs[k + 1] - xs[k]));
            }
        }
    }
    poles.sort_by(f64::total_cmp);
    poles
}

/// `true` where a sample lies within `radius` of a detected pole of any branch.
pub fn pole_mask(branches: &[&dyn Branch], xs: &[f64], radius: f64) -> Vec<bool> {
    let poles: Vec<f64> = branches.iter().flat_map(|b| detect_poles(*b, xs)).collect();
    xs.iter()
        .map(|&x| poles.iter().any(|&p| (x - p).abs() < radius))
        .collect()
}

/// Bäcklund relation z′ₓ + zₓ = −λ²/2 + (z′ − z)²/2, normalised by the sum of
/// the term magnitudes.
pub fn backlund_residual(
    z: &dyn Branch,
    z_new: &dyn Branch,
    lam_sq: f64,
    grid: &GridSpec,
    tolerance: f64,
) -> Result<ResidualReport> {
    let xs = grid.points();
    let mask = pole_mask(&[z, z_new], &xs, grid.pole_mask_radius);
    let mut acc = Accumulator::default();
    for (&x, &masked) in xs.iter().zip(&mask) {
        if masked {
            acc.mask();
            continue;
        }
        match backlund_point(z, z_new, lam_sq, x) {
            Ok(r) => acc.push(r),
            Err(_) => acc.mask(),
        }
    }
    acc.finish(names::BACKLUND, tolerance)
}

fn backlund_point(z: &dyn Branch, z_new: &dyn Branch, lam_sq: f64, x: f64) -> Result<f64> {
    let a = z.jet(x)?;
    let b = z_new.jet(x)?;
    let diff = b.z() - a.z();
    let quad = 0.5 * diff * diff;
    let r = b.u() + a.u() + 0.5 * lam_sq - quad;
    let scale = 1.0 + b.u().abs() + a.u().abs() + 0.5 * lam_sq.abs() + quad;
    Ok(r / scale)
}

/// z_xx² = 2z_x³ − 2g₂z_x − 4g₃ for an arbitrary branch.
pub fn static_kdv_residual_of(
    branch: &dyn Branch,
    inv: &Invariants,
    grid: &GridSpec,
    tolerance: f64,
) -> Result<ResidualReport> {
    let xs = grid.points();
    let mask = pole_mask(&[branch], &xs, grid.pole_mask_radius);
    let mut acc = Accumulator::default();
    for (&x, &masked) in xs.iter().zip(&mask) {
        if masked {
            acc.mask();
            continue;
        }
        match branch.jet(x) {
            Ok(j) => acc.push(static_point(j.u(), j.z_xx(), inv)),
            Err(_) => acc.mask(),
        }
    }
    acc.finish(names::STATIC_KDV, tolerance)
}

fn static_point(zx: f64, zxx: f64, inv: &Invariants) -> f64 {
    let rhs = 2.0 * zx * zx * zx - 2.0 * inv.g2() * zx - 4.0 * inv.g3();
    (zxx * zxx - rhs) / (1.0 + zx.abs().powi(3))
}

/// Static residual of a built solution.
pub fn static_kdv_residual(sol: &SolitonSolution, grid: &GridSpec, tolerance: f64) -> Result<ResidualReport> {
    static_kdv_residual_of(sol, sol.spec().invariants(), grid, tolerance)
}

/// Every commuting square (base → a → full, base → b → full) used by the
/// build, with the λ² of parameter i taken from `labels[i]`.
pub fn commutativity_check_with_labels(
    sol: &SolitonSolution,
    grid: &GridSpec,
    tolerance: f64,
    labels: &[f64],
) -> Result<ResidualReport> {
    if sol.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "commutativity needs at least two spectral parameters, got {}",
            sol.len()
        )));
    }
    let xs = grid.points();
    let squares: Vec<(Subset, Subset, Subset, Subset, usize, usize)> = (0..=sol.full_set())
        .filter_map(|m| sol.square(m).map(|(base, a, b, i, j)| (m, base, a, b, i, j)))
        .collect();
    let branches: Vec<_> = (0..=sol.full_set()).map(|m| sol.subset(m)).collect();
    let dyn_branches: Vec<&dyn Branch> = branches.iter().map(|b| b as &dyn Branch).collect();
    let mask = pole_mask(&dyn_branches, &xs, grid.pole_mask_radius);

    let mut acc = Accumulator::default();
    for (&x, &masked) in xs.iter().zip(&mask) {
        if masked {
            acc.mask();
            continue;
        }
        let mut worst: Option<f64> = Some(0.0);
        for &(full, base, a, b, i, j) in &squares {
            let legs = [
                (base, a, labels[i]),
                (base, b, labels[j]),
                (a, full, labels[j]),
                (b, full, labels[i]),
            ];
            for (from, to, lam) in legs {
                match backlund_point(&branches[from], &branches[to], lam, x) {
                    Ok(r) => worst = worst.map(|w| w.max(r.abs())),
                    Err(_) => worst = None,
                }
            }
        }
        match worst {
            Some(w) => acc.push(w),
            None => acc.mask(),
        }
    }
    Ok(acc
        .finish(names::COMMUTATIVITY, tolerance)?
        .with_note(format!("{} squares, 4 legs each", squares.len())))
}

pub fn commutativity_check(sol: &SolitonSolution, grid: &GridSpec, tolerance: f64) -> Result<ResidualReport> {
    let labels: Vec<f64> = (0..sol.len()).map(|i| sol.lambda_sq(i)).collect();
    commutativity_check_with_labels(sol, grid, tolerance, &labels)
}

/// û_t − û_xxx + 6ûû_x over grid × t_samples, normalised by the sum of the
/// term magnitudes.
pub fn kdv_time_residual(
    lift: &TimeLift<'_>,
    grid: &GridSpec,
    t_samples: &[f64],
    tolerance: f64,
) -> Result<ResidualReport> {
    let xs = grid.points();
    let mut acc = Accumulator::default();
    for &t in t_samples {
        let shifted: Vec<f64> = xs.iter().map(|x| x + lift.velocity() * t).collect();
        let mask = pole_mask(&[lift.solution()], &shifted, grid.pole_mask_radius);
        for (&x, &masked) in xs.iter().zip(&mask) {
            if masked {
                acc.mask();
                continue;
            }
            match time_point(lift, x, t) {
                Ok(r) => acc.push(r),
                Err(_) => acc.mask(),
            }
        }
    }
    acc.finish(names::KDV_TIME, tolerance)
}

fn time_point(lift: &TimeLift<'_>, x: f64, t: f64) -> Result<f64> {
    let [u, ux, _, uxxx] = lift.spatial_jet(x, t)?;
    let ut = lift.time_derivative(x, t)?;
    let r = ut - uxxx + 6.0 * u * ux;
    Ok(r / (1.0 + ut.abs() + uxxx.abs() + 6.0 * (u * ux).abs()))
}

/// Five-point central difference.
pub fn five_point<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    Ok((-f(x + 2.0 * h)? + 8.0 * f(x + h)? - 8.0 * f(x - h)? + f(x - 2.0 * h)?) / (12.0 * h))
}

/// Pairs used by the addition-formula check; fixed seed for reproducibility.
pub fn addition_pairs(n: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0fad);
    (0..n)
        .map(|_| (rng.gen_range(0.1..1.5), rng.gen_range(0.1..1.5)))
        .collect()
}

/// ℘(u+v) + ℘(u) + ℘(v) = (ζ(u+v) − ζ(u) − ζ(v))².
pub fn addition_residual(kernel: &Weierstrass, pairs: &[(f64, f64)], tolerance: f64) -> Result<ResidualReport> {
    let mut acc = Accumulator::default();
    for &(u, v) in pairs {
        let point = || -> Result<f64> {
            let (puv, pu, pv) = (kernel.wp(u + v)?, kernel.wp(u)?, kernel.wp(v)?);
            let d = kernel.zeta(u + v)? - kernel.zeta(u)? - kernel.zeta(v)?;
            Ok((puv + pu + pv - d * d) / (1.0 + puv.abs()))
        };
        match point() {
            Ok(r) => acc.push(r),
            Err(_) => acc.mask(),
        }
    }
    acc.finish(names::ADDITION, tolerance)
}

/// Samples of a scalar function with a pole-distance estimate.
fn scalar_report<F>(xs: &[f64], radius: f64, name: &str, tolerance: f64, point: F) -> Result<ResidualReport>
where
    F: Fn(f64) -> Result<Option<f64>>,
{
    let mut acc = Accumulator::default();
    for &x in xs {
        match point(x) {
            Ok(Some(r)) => acc.push(r),
            _ => acc.mask(),
        }
    }
    let _ = radius;
    acc.finish(name, tolerance)
}

/// ℘ ODEs, the addition formula and (with three real roots) the sn bridge.
pub fn identity_suite(inv: &Invariants, grid: &GridSpec, tol: &Tolerances) -> Vec<ResidualReport> {
    let kernel = Weierstrass::new(*inv);
    let xs = grid.points();
    let radius = grid.pole_mask_radius;
    let (g2, g3) = (inv.g2(), inv.g3());
    let mut out = Vec::new();

    // ℘ with its distance to the nearest pole; None inside the mask
    let wp_at = |x: f64| -> Result<Option<crate::weierstrass::EvalResult>> {
        if x.abs() < radius {
            return Ok(None);
        }
        let p = kernel.wp_family(x)?;
        Ok((p.pole_proximity >= radius).then_some(p))
    };
    let step = |d: f64| 1e-3 * d.min(1.0);

    let report = |name: &str, r: Result<ResidualReport>| {
        r.unwrap_or_else(|e| ResidualReport::skipped(name, tol.get(name), e.to_string()))
    };

    out.push(report(
        names::WP_ODE,
        scalar_report(&xs, radius, names::WP_ODE, tol.get(names::WP_ODE), |x| {
            Ok(wp_at(x)?.map(|p| {
                let rhs = 4.0 * p.value.powi(3) - g2 * p.value - g3;
                (p.derivative * p.derivative - rhs) / (1.0 + p.value.abs().powi(3))
            }))
        }),
    ));
    out.push(report(
        names::WP_SECOND,
        scalar_report(&xs, radius, names::WP_SECOND, tol.get(names::WP_SECOND), |x| {
            let Some(p) = wp_at(x)? else { return Ok(None) };
            let h = step(p.pole_proximity);
            let fd = five_point(|y| Ok(kernel.wp_family(y)?.derivative), x, h)?;
            Ok(Some((fd - p.second) / (1.0 + p.second.abs())))
        }),
    ));
    out.push(report(
        names::WP_THIRD,
        scalar_report(&xs, radius, names::WP_THIRD, tol.get(names::WP_THIRD), |x| {
            let Some(p) = wp_at(x)? else { return Ok(None) };
            let h = step(p.pole_proximity);
            let fd = five_point(|y| Ok(kernel.wp_family(y)?.second), x, h)?;
            let exact = 12.0 * p.value * p.derivative;
            Ok(Some((fd - exact) / (1.0 + exact.abs())))
        }),
    ));
    out.push(report(
        names::ADDITION,
        addition_residual(&kernel, &addition_pairs(100), tol.get(names::ADDITION)),
    ));

    let roots = roots_from_invariants(inv);
    let modulus = jacobi::modulus_from_roots(&roots);
    let bridge_names = [
        names::SN_ODE,
        names::INVERSE_SN_ODE,
        names::H_ODE,
        names::H1_ODE,
        names::MOBIUS,
        names::SN_BRIDGE,
    ];
    let (m, [e1, _, e3]) = match (modulus, roots.real()) {
        (Ok(m), Some(r)) => (m, r),
        (Err(e), _) => {
            for name in bridge_names {
                out.push(ResidualReport::skipped(name, tol.get(name), e.to_string()));
            }
            return out;
        }
        (Ok(_), None) => unreachable!("a modulus implies real roots"),
    };
    let k2 = m.k_sq();
    let scale = (e1 - e3).sqrt();

    out.push(report(
        names::SN_ODE,
        scalar_report(&xs, radius, names::SN_ODE, tol.get(names::SN_ODE), |x| {
            let s = jacobi::sn(x, m)?;
            let sx = five_point(|y| jacobi::sn(y, m), x, 1e-3)?;
            Ok(Some(sx * sx - (1.0 - s * s) * (1.0 - k2 * s * s)))
        }),
    ));
    out.push(if k2 == 0.0 {
        ResidualReport::skipped(
            names::INVERSE_SN_ODE,
            tol.get(names::INVERSE_SN_ODE),
            "k² = 0: 1/(k·sn) undefined",
        )
    } else {
        let k = k2.sqrt();
        report(
            names::INVERSE_SN_ODE,
            scalar_report(
                &xs,
                radius,
                names::INVERSE_SN_ODE,
                tol.get(names::INVERSE_SN_ODE),
                |x| {
                    let f = |y: f64| -> Result<f64> { Ok(1.0 / (k * jacobi::sn(y, m)?)) };
                    let s = jacobi::sn(x, m)?;
                    // distance to the zero of sn, where f has a pole
                    let d = s.abs() / jacobi::sn_derivative(x, m)?.abs().max(1.0);
                    if d < radius {
                        return Ok(None);
                    }
                    let fx = five_point(f, x, step(d))?;
                    let fv = f(x)?;
                    let rhs = (1.0 - fv * fv) * (1.0 - k2 * fv * fv);
                    Ok(Some((fx * fx - rhs) / (1.0 + k2 * fv.powi(4))))
                },
            ),
        )
    });
    for (name, branch) in [(names::H_ODE, SnBranch::Sn), (names::H1_ODE, SnBranch::InverseKSn)] {
        out.push(report(
            name,
            scalar_report(&xs, radius, name, tol.get(name), |w| {
                let h = |y: f64| jacobi::h_from_branch(y, &roots, branch, 0.0);
                let s = jacobi::sn(w * scale, m)?;
                let d = s.abs() / scale;
                if branch == SnBranch::Sn && d < radius {
                    return Ok(None);
                }
                let hw = five_point(h, w, step(d.max(radius)))?;
                let hv = h(w)?;
                let rhs = 4.0 * hv.powi(3) - g2 * hv - g3;
                Ok(Some((hw * hw - rhs) / (1.0 + hv.abs().powi(3))))
            }),
        ));
    }
    out.push(report(
        names::MOBIUS,
        jacobi::mobius_coefficients(&roots).and_then(|c| {
            scalar_report(&xs, radius, names::MOBIUS, tol.get(names::MOBIUS), |w| {
                let Some(p) = wp_at(w)? else { return Ok(None) };
                let h1 = jacobi::h1(w, &roots)?;
                let via = jacobi::mobius_apply(&c, p.value)?;
                Ok(Some((h1 - via) / (1.0 + h1.abs())))
            })
        }),
    ));
    out.push(report(
        names::SN_BRIDGE,
        scalar_report(&xs, radius, names::SN_BRIDGE, tol.get(names::SN_BRIDGE), |w| {
            let Some(p) = wp_at(w)? else { return Ok(None) };
            let via = jacobi::wp_via_sn(w, &roots)?;
            Ok(Some((p.value - via) / p.value.abs().max(1.0)))
        }),
    ));
    out
}
