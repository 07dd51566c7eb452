//! Jacobi sn and its bridge to ℘ when the cubic has three real roots.
//!
//! With e₁ ≥ e₂ ≥ e₃, k² = (e₂ − e₃)/(e₁ − e₃) and x = w·√(e₁ − e₃):
//!
//! ```text
//! ℘(w)  = e₃ + (e₁ − e₃) / sn²(x)
//! h₁(w) = e₃ + (e₁ − e₃) k² sn²(x)
//! ```
//!
//! and h₁ is a Möbius image of ℘.

use crate::error::{Error, Result};
use crate::weierstrass::CubicRoots;

/// Squared elliptic modulus, `0 ≤ k² ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus(f64);

impl Modulus {
    /// Accepts values within 1e−14 outside the unit interval and clamps them.
    pub fn new(k_sq: f64) -> Option<Self> {
        if !(-1e-14..=1.0 + 1e-14).contains(&k_sq) {
            return None;
        }
        Some(Self(k_sq.clamp(0.0, 1.0)))
    }

    pub fn k_sq(&self) -> f64 {
        self.0
    }
}

/// Coefficients of `t ↦ (αt + β)/(γt + δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusCoeffs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl MobiusCoeffs {
    pub fn determinant(&self) -> f64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    pub fn apply(&self, t: f64) -> Option<f64> {
        let den = self.gamma * t + self.delta;
        if den == 0.0 {
            return None;
        }
        Some((self.alpha * t + self.beta) / den)
    }
}

/// Real roots ordered e₁ ≥ e₂ ≥ e₃, with e₁ > e₃.
fn ordered_real(roots: &CubicRoots) -> Result<[f64; 3]> {
    let Some(mut r) = roots.real() else {
        let [e1, e2, e3] = roots.as_array();
        // 16·Π(eᵢ − eⱼ)² = g₂³ − 27g₃²
        let prod = (e1 - e2) * (e2 - e3) * (e3 - e1);
        return Err(Error::NonPositiveDiscriminant {
            discriminant: 16.0 * (prod * prod).re,
        });
    };
    r.sort_by(|a, b| b.total_cmp(a));
    if r[0] <= r[2] {
        return Err(Error::DegenerateRoots);
    }
    Ok(r)
}

/// k² = (e₂ − e₃)/(e₁ − e₃).
pub fn modulus_from_roots(roots: &CubicRoots) -> Result<Modulus> {
    let [e1, e2, e3] = ordered_real(roots)?;
    let k_sq = (e2 - e3) / (e1 - e3);
    Ok(Modulus::new(k_sq).expect("ordered roots give k² in [0, 1]"))
}

/// Amplitude-based evaluation shared by sn and the internal cn·dn.
struct Amplitude {
    /// sin φ₀ = sn
    sn: f64,
    cn: f64,
    dn: f64,
}

/// Descending Landen (AGM) iteration with back-substitution of the amplitude.
fn amplitude(x: f64, m: f64) -> Result<Amplitude> {
    if m == 0.0 {
        return Ok(Amplitude {
            sn: x.sin(),
            cn: x.cos(),
            dn: 1.0,
        });
    }
    if m == 1.0 {
        let sech = 1.0 / x.cosh();
        return Ok(Amplitude {
            sn: x.tanh(),
            cn: sech,
            dn: sech,
        });
    }
    const MAX_STEPS: usize = 40;
    let mut a = vec![1.0];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    loop {
        let last = *a.last().unwrap();
        let step = c.last().unwrap().abs();
        if step < 1e-15 {
            break;
        }
        if a.len() > MAX_STEPS {
            return Err(Error::ConvergenceFailure {
                what: format!("AGM for sn with k² = {m}"),
            });
        }
        let next_a = 0.5 * (last + b);
        c.push(0.5 * (last - b));
        b = (last * b).sqrt();
        a.push(next_a);
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * x;
    for i in (1..=n).rev() {
        let s = (c[i] / a[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - m * sn * sn).max(0.0).sqrt();
    Ok(Amplitude { sn, cn, dn })
}

/// Jacobi elliptic sine sn(x | k²).
pub fn sn(x: f64, m: Modulus) -> Result<f64> {
    Ok(amplitude(x, m.k_sq())?.sn)
}

/// d/dx sn = cn·dn, used by the verifier as an analytic reference.
pub(crate) fn sn_derivative(x: f64, m: Modulus) -> Result<f64> {
    let a = amplitude(x, m.k_sq())?;
    Ok(a.cn * a.dn)
}

/// Which solution f of f′² = (1 − f²)(1 − k²f²) feeds `h = e₃ + (e₁−e₃)/f²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnBranch {
    /// f = sn, giving ℘ itself.
    Sn,
    /// f = 1/(k·sn), giving h₁.
    InverseKSn,
}

/// h(w) = e₃ + (e₁ − e₃)/f²(w·√(e₁ − e₃)).
pub fn h_from_branch(w: f64, roots: &CubicRoots, branch: SnBranch, pole_radius: f64) -> Result<f64> {
    let [e1, e2, e3] = ordered_real(roots)?;
    let m = Modulus::new((e2 - e3) / (e1 - e3)).expect("ordered roots give k² in [0, 1]");
    let s = sn(w * (e1 - e3).sqrt(), m)?;
    match branch {
        SnBranch::Sn => {
            if s.abs() < pole_radius {
                return Err(Error::PoleProximity { x: w });
            }
            Ok(e3 + (e1 - e3) / (s * s))
        }
        SnBranch::InverseKSn => Ok(e3 + (e1 - e3) * m.k_sq() * s * s),
    }
}

/// The second elliptic one-soliton h₁(w) = e₃ + (e₁ − e₃)k² sn²(w√(e₁−e₃)).
pub fn h1(w: f64, roots: &CubicRoots) -> Result<f64> {
    h_from_branch(w, roots, SnBranch::InverseKSn, 0.0)
}

/// ℘(w) through sn; an independent route to the ℘ kernel.
pub fn wp_via_sn(w: f64, roots: &CubicRoots) -> Result<f64> {
    h_from_branch(w, roots, SnBranch::Sn, 1e-8)
}

/// (α, β, γ, δ) = (−e₁−e₂, e₁²+e₂²+3e₁e₂, 1, e₁+e₂).
pub fn mobius_coefficients(roots: &CubicRoots) -> Result<MobiusCoeffs> {
    let [e1, e2, e3] = ordered_real(roots)?;
    let c = MobiusCoeffs {
        alpha: -e1 - e2,
        beta: e1 * e1 + e2 * e2 + 3.0 * e1 * e2,
        gamma: 1.0,
        delta: e1 + e2,
    };
    let det = c.determinant();
    let scale = e1.abs().max(e2.abs()).max(e3.abs()).max(1.0);
    if det.abs() <= 1e-12 * scale * scale {
        return Err(Error::SingularMobius { det });
    }
    Ok(c)
}

/// Applies the Möbius map; `PoleProximity` at t = −δ/γ.
pub fn mobius_apply(c: &MobiusCoeffs, t: f64) -> Result<f64> {
    c.apply(t).ok_or(Error::PoleProximity { x: t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(k: f64) -> Modulus {
        Modulus::new(k).unwrap()
    }

    #[test]
    fn modulus_examples() {
        let r = CubicRoots::from_real([1.0, 0.0, -1.0]);
        assert_eq!(modulus_from_roots(&r).unwrap().k_sq(), 0.5);
        let r = CubicRoots::from_real([1.0, -0.5, -0.5]);
        assert_eq!(modulus_from_roots(&r).unwrap().k_sq(), 0.0);
        let r = CubicRoots::from_real([0.0; 3]);
        assert_eq!(modulus_from_roots(&r), Err(Error::DegenerateRoots));
    }

    #[test]
    fn complex_roots_are_rejected() {
        let inv = crate::weierstrass::Invariants::new(0.3, 0.7).unwrap();
        let r = crate::weierstrass::roots_from_invariants(&inv);
        match modulus_from_roots(&r) {
            Err(Error::NonPositiveDiscriminant { discriminant }) => {
                assert_relative_eq!(discriminant, inv.discriminant(), max_relative = 1e-10)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn modulus_clamps_rounding() {
        assert_eq!(Modulus::new(1.0 + 1e-15).unwrap().k_sq(), 1.0);
        assert_eq!(Modulus::new(-1e-15).unwrap().k_sq(), 0.0);
        assert!(Modulus::new(1.1).is_none());
    }

    #[test]
    fn trigonometric_and_hyperbolic_limits() {
        assert_eq!(sn(0.0, m(0.3)).unwrap(), 0.0);
        assert!((sn(0.9, m(0.0)).unwrap() - 0.9f64.sin()).abs() < 1e-12);
        assert!((sn(0.9, m(1.0)).unwrap() - 0.9f64.tanh()).abs() < 1e-12);
        // just inside the limits the AGM path must agree too
        assert!((sn(0.9, m(1e-13)).unwrap() - 0.9f64.sin()).abs() < 1e-12);
        assert!((sn(0.9, m(1.0 - 1e-13)).unwrap() - 0.9f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn sn_is_odd_and_bounded() {
        for &x in &[0.1, 0.7, 2.3, 5.0, 11.0] {
            let a = sn(x, m(0.7)).unwrap();
            assert_eq!(a, -sn(-x, m(0.7)).unwrap());
            assert!(a.abs() <= 1.0);
        }
    }

    #[test]
    fn h1_examples() {
        let r = CubicRoots::from_real([1.0, 0.0, -1.0]);
        assert_eq!(h1(0.0, &r).unwrap(), -1.0);
        let r = CubicRoots::from_real([1.0, -0.5, -0.5]);
        for w in [0.1, 0.6, 1.7] {
            assert_eq!(h1(w, &r).unwrap(), -0.5);
        }
    }

    #[test]
    fn mobius_examples() {
        let r = CubicRoots::from_real([1.0, 0.0, -1.0]);
        let c = mobius_coefficients(&r).unwrap();
        assert_eq!((c.alpha, c.beta, c.gamma, c.delta), (-1.0, 1.0, 1.0, 1.0));
        assert_eq!(c.determinant(), -2.0);
        assert!(mobius_apply(&c, -1.0).is_err());
    }

    #[test]
    fn wp_via_sn_is_even_and_singular_at_origin() {
        let r = CubicRoots::from_real([1.0, 0.0, -1.0]);
        assert_eq!(wp_via_sn(0.5, &r).unwrap(), wp_via_sn(-0.5, &r).unwrap());
        let w = 1e-4;
        assert_relative_eq!(wp_via_sn(w, &r).unwrap() * w * w, 1.0, max_relative = 1e-6);
        assert!(wp_via_sn(0.0, &r).is_err());
    }
}
