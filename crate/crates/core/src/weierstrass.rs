//! Real-line evaluation of the Weierstrass functions ℘, ℘′, ℘″ and ζ.
//!
//! The kernel never computes periods. It sums the Laurent series about the
//! origin at a reduced argument `x / 2ⁿ` and climbs back with the duplication
//! formulas
//!
//! ```text
//! ℘(2u) = ¼ (℘″(u)/℘′(u))² − 2℘(u)
//! ζ(2u) = 2ζ(u) + ½ ℘″(u)/℘′(u)
//! ```
//!
//! which works for either sign of the discriminant. Poles on the real axis
//! other than the origin are detected from the magnitude of ℘.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of Laurent coefficients `c₂ … c₂₅` kept by the series.
pub const LAURENT_TERMS: usize = 24;

/// The pair (g₂, g₃) of a Weierstrass cubic `4t³ − g₂t − g₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    g2: f64,
    g3: f64,
    discriminant: f64,
}

impl Invariants {
    pub fn new(g2: f64, g3: f64) -> Result<Self> {
        if !g2.is_finite() || !g3.is_finite() {
            return Err(Error::NonFiniteInvariants { g2, g3 });
        }
        Ok(Self {
            g2,
            g3,
            discriminant: g2 * g2 * g2 - 27.0 * g3 * g3,
        })
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    pub fn g3(&self) -> f64 {
        self.g3
    }

    /// `g₂³ − 27 g₃²`.
    pub fn discriminant(&self) -> f64 {
        self.discriminant
    }

    pub fn root_kind(&self) -> RootKind {
        RootKind::from_discriminant(self.discriminant)
    }

    /// Length scale of the lattice, from the homogeneity weights of g₂ and g₃.
    pub(crate) fn scale(&self) -> f64 {
        self.g2.abs().powf(0.25).max(self.g3.abs().powf(1.0 / 6.0))
    }
}

/// Root configuration of the cubic, read off the sign of the discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    /// Positive discriminant.
    ThreeDistinctReal,
    /// Zero discriminant: all roots real, at least two equal.
    Repeated,
    /// Negative discriminant.
    OneRealTwoComplex,
}

impl RootKind {
    fn from_discriminant(d: f64) -> Self {
        if d > 0.0 {
            RootKind::ThreeDistinctReal
        } else if d == 0.0 {
            RootKind::Repeated
        } else {
            RootKind::OneRealTwoComplex
        }
    }

    pub fn all_real(self) -> bool {
        !matches!(self, RootKind::OneRealTwoComplex)
    }
}

/// Roots e₁, e₂, e₃ of `4t³ − g₂t − g₃`.
///
/// Real roots come first in descending order; a conjugate pair is stored
/// with the positive imaginary part first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub e1: Complex64,
    pub e2: Complex64,
    pub e3: Complex64,
}

impl CubicRoots {
    pub fn from_real(roots: [f64; 3]) -> Self {
        Self::from_complex(roots.map(|r| Complex64::new(r, 0.0)))
    }

    pub fn from_complex(roots: [Complex64; 3]) -> Self {
        let mut r = roots;
        r.sort_by(|a, b| {
            let a_real = a.im == 0.0;
            let b_real = b.im == 0.0;
            b_real
                .cmp(&a_real)
                .then(b.re.total_cmp(&a.re))
                .then(b.im.total_cmp(&a.im))
        });
        Self {
            e1: r[0],
            e2: r[1],
            e3: r[2],
        }
    }

    pub fn as_array(&self) -> [Complex64; 3] {
        [self.e1, self.e2, self.e3]
    }

    /// The roots as reals, if all imaginary parts vanish.
    pub fn real(&self) -> Option<[f64; 3]> {
        let all = self.as_array();
        if all.iter().all(|e| e.im == 0.0) {
            Some(all.map(|e| e.re))
        } else {
            None
        }
    }
}

/// Solves `4t³ − g₂t − g₃ = 0`.
pub fn roots_from_invariants(inv: &Invariants) -> CubicRoots {
    let (g2, g3) = (inv.g2, inv.g3);
    let cubic = |t: f64| 4.0 * t * t * t - g2 * t - g3;
    let slope = |t: f64| 12.0 * t * t - g2;
    let polish = |mut t: f64| {
        for _ in 0..3 {
            let d = slope(t);
            if d == 0.0 {
                break;
            }
            let step = cubic(t) / d;
            if !step.is_finite() {
                break;
            }
            t -= step;
        }
        t
    };

    match inv.root_kind() {
        RootKind::ThreeDistinctReal => {
            // depressed form t³ + pt + q with p = −g₂/4 < 0
            let p = -g2 / 4.0;
            let q = -g3 / 4.0;
            let radius = 2.0 * (-p / 3.0).sqrt();
            let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            let mut t: Vec<f64> = (0..3)
                .map(|k| polish(radius * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos()))
                .collect();
            t.sort_by(|a, b| b.total_cmp(a));
            // the middle root absorbs the rounding of the sum
            let mid = -(t[0] + t[2]);
            CubicRoots::from_real([t[0], mid, t[2]])
        }
        RootKind::Repeated => {
            if g2 == 0.0 {
                CubicRoots::from_real([0.0; 3])
            } else {
                let simple = 3.0 * g3 / g2;
                let double = -simple / 2.0;
                CubicRoots::from_real([simple, double, double])
            }
        }
        RootKind::OneRealTwoComplex => {
            let p = -g2 / 4.0;
            let q = -g3 / 4.0;
            let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
            let a = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
            let b = if a == 0.0 { 0.0 } else { -p / (3.0 * a) };
            let e1 = polish(a + b);
            // 4t³ − g₂t − g₃ = 4(t − e₁)(t² + e₁t + e₁² − g₂/4), pair −e₁/2 ± i√(3e₁²/4 − g₂/4)
            let im = (0.75 * e1 * e1 - g2 / 4.0).max(0.0).sqrt();
            CubicRoots {
                e1: Complex64::new(e1, 0.0),
                e2: Complex64::new(-e1 / 2.0, im),
                e3: Complex64::new(-e1 / 2.0, -im),
            }
        }
    }
}

/// Rebuilds (g₂, g₃) from a zero-sum root triple.
pub fn invariants_from_roots(roots: &CubicRoots) -> Result<Invariants> {
    let [e1, e2, e3] = roots.as_array();
    let scale = roots.as_array().iter().map(|e| e.norm()).fold(1.0_f64, f64::max);
    let sum = e1 + e2 + e3;
    if sum.norm() > 1e-10 * scale {
        return Err(Error::RootSumNonzero { sum: sum.norm() });
    }
    let g2 = -4.0 * (e1 * e2 + e2 * e3 + e3 * e1);
    let g3 = 4.0 * e1 * e2 * e3;
    let imag = g2.im.abs().max(g3.im.abs());
    if imag > 1e-10 * scale.powi(3) {
        return Err(Error::NonRealCubic { imag });
    }
    Invariants::new(g2.re, g3.re)
}

/// Tunables of the ℘/ζ kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Arguments closer than this to the origin are rejected.
    pub pole_radius: f64,
    /// Largest |x| accepted; there is no reduction by periods.
    pub max_abs_x: f64,
    /// |℘| above this flags a real lattice translate of the origin.
    pub lattice_pole_threshold: f64,
    /// Cap on the number of halvings of the argument.
    pub max_duplications: u32,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            pole_radius: 1e-4,
            max_abs_x: 50.0,
            lattice_pole_threshold: 1e10,
            max_duplications: 64,
        }
    }
}

/// ℘ together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub derivative: f64,
    pub second: f64,
    /// Estimated distance to the nearest pole: min(|x|, |℘|^(-1/2)).
    pub pole_proximity: f64,
}

/// ℘, ℘′ and ζ at one point, before any pole screening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RawValues {
    pub wp: f64,
    pub dwp: f64,
    pub zeta: f64,
}

/// Evaluator for one set of invariants; holds the Laurent coefficients.
#[derive(Debug, Clone)]
pub struct Weierstrass {
    inv: Invariants,
    config: KernelConfig,
    /// `coeffs[i]` is c_{i+2}
    coeffs: [f64; LAURENT_TERMS],
    series_radius: f64,
}

impl Weierstrass {
    pub fn new(inv: Invariants) -> Self {
        Self::with_config(inv, KernelConfig::default())
    }

    pub fn with_config(inv: Invariants, config: KernelConfig) -> Self {
        Self {
            inv,
            config,
            coeffs: laurent_coefficients(&inv),
            series_radius: 0.5 / inv.scale().max(1.0),
        }
    }

    pub fn invariants(&self) -> &Invariants {
        &self.inv
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    /// Laurent coefficients c₂, c₃, … of ℘(x) = x⁻² + Σ c_k x^(2k−2).
    pub fn laurent(&self) -> &[f64; LAURENT_TERMS] {
        &self.coeffs
    }

    /// ℘(x), ℘′(x) and ℘″(x) = 6℘² − g₂/2.
    pub fn wp_family(&self, x: f64) -> Result<EvalResult> {
        let raw = self.screened(x)?;
        Ok(EvalResult {
            value: raw.wp,
            derivative: raw.dwp,
            second: self.second_from(raw.wp),
            pole_proximity: proximity(x, raw.wp),
        })
    }

    pub fn wp(&self, x: f64) -> Result<f64> {
        Ok(self.screened(x)?.wp)
    }

    pub fn zeta(&self, x: f64) -> Result<f64> {
        Ok(self.screened(x)?.zeta)
    }

    /// ℘″ expressed through ℘.
    pub fn second_from(&self, wp: f64) -> f64 {
        6.0 * wp * wp - self.inv.g2 / 2.0
    }

    fn screened(&self, x: f64) -> Result<RawValues> {
        if x.abs() < self.config.pole_radius {
            return Err(Error::PoleProximity { x });
        }
        let raw = self.raw(x)?;
        if raw.wp.abs() > self.config.lattice_pole_threshold || proximity(x, raw.wp) < self.config.pole_radius {
            return Err(Error::PoleProximity { x });
        }
        Ok(raw)
    }

    /// Values at any nonzero x within range. Near the origin there is no
    /// exclusion; lattice translates are still reported as poles.
    pub(crate) fn raw(&self, x: f64) -> Result<RawValues> {
        if !x.is_finite() || x.abs() > self.config.max_abs_x {
            return Err(Error::ArgumentOutOfRange {
                x,
                max: self.config.max_abs_x,
            });
        }
        if x == 0.0 {
            return Err(Error::PoleProximity { x });
        }
        let ax = x.abs();
        let raw = self.eval_positive(ax)?;
        if ax > self.series_radius && raw.wp.abs() > self.config.lattice_pole_threshold {
            return Err(Error::PoleProximity { x });
        }
        let sign = x.signum();
        Ok(RawValues {
            wp: raw.wp,
            dwp: sign * raw.dwp,
            zeta: sign * raw.zeta,
        })
    }

    fn eval_positive(&self, ax: f64) -> Result<RawValues> {
        let mut halvings = 0_u32;
        while ax / 2f64.powi(halvings as i32) > self.series_radius {
            halvings += 1;
        }
        loop {
            if halvings > self.config.max_duplications {
                return Err(Error::ConvergenceFailure {
                    what: format!("duplication count for x = {ax} exceeds cap"),
                });
            }
            let u = ax / 2f64.powi(halvings as i32);
            match self.series(u) {
                Some(start) => return self.duplicate(start, halvings, ax),
                None => halvings += 1,
            }
        }
    }

    /// Direct Laurent sums at a small argument; `None` when the guard term
    /// is not negligible.
    fn series(&self, u: f64) -> Option<RawValues> {
        let u2 = u * u;
        let mut wp = 0.0;
        let mut dwp = 0.0;
        let mut zeta = 0.0;
        // powers: u^(2k-2) for k = 2..
        let mut pw = u2;
        let mut guard = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = (i + 2) as f64;
            let term = c * pw;
            wp += term;
            dwp += (2.0 * k - 2.0) * term / u;
            zeta += term * u / (2.0 * k - 1.0);
            guard = term;
            pw *= u2;
        }
        let wp = 1.0 / u2 + wp;
        if guard.abs() > 1e-18 * wp.abs() {
            return None;
        }
        Some(RawValues {
            wp,
            dwp: -2.0 / (u2 * u) + dwp,
            zeta: 1.0 / u - zeta,
        })
    }

    fn duplicate(&self, start: RawValues, steps: u32, ax: f64) -> Result<RawValues> {
        let mut v = start;
        for _ in 0..steps {
            let second = self.second_from(v.wp);
            // ℘′ vanishes at a half period, whose double is a lattice pole
            if v.dwp.abs() < 1e-12 * (1.0 + v.wp.abs().powf(1.5)) {
                return Err(Error::PoleProximity { x: ax });
            }
            let ratio = second / v.dwp;
            let wp = 0.25 * ratio * ratio - 2.0 * v.wp;
            let dwp = 0.25 * ratio * (12.0 * v.wp * v.dwp * v.dwp - second * second) / (v.dwp * v.dwp) - v.dwp;
            // The ℘′ step amplifies rounding much more than the ℘ step does.
            // Away from the zeros of the cubic, √(4℘³ − g₂℘ − g₃) is better
            // conditioned and keeps ℘′ consistent with ℘.
            let dwp = self.reanchor(wp, dwp);
            let zeta = 2.0 * v.zeta + 0.5 * ratio;
            v = RawValues { wp, dwp, zeta };
        }
        if !v.wp.is_finite() || !v.dwp.is_finite() || !v.zeta.is_finite() {
            return Err(Error::PoleProximity { x: ax });
        }
        Ok(v)
    }
}

impl Weierstrass {
    fn reanchor(&self, wp: f64, dwp: f64) -> f64 {
        let (g2, g3) = (self.inv.g2, self.inv.g3);
        let cubic = 4.0 * wp * wp * wp - g2 * wp - g3;
        let magnitude = 4.0 * (wp * wp * wp).abs() + (g2 * wp).abs() + g3.abs();
        if cubic > 1e-2 * magnitude {
            cubic.sqrt().copysign(dwp)
        } else {
            dwp
        }
    }
}

fn proximity(x: f64, wp: f64) -> f64 {
    let from_value = if wp == 0.0 {
        f64::INFINITY
    } else {
        wp.abs().sqrt().recip()
    };
    x.abs().min(from_value)
}

/// c₂ = g₂/20, c₃ = g₃/28, c_k = 3/((2k+1)(k−3)) Σ_{m=2}^{k−2} c_m c_{k−m}.
fn laurent_coefficients(inv: &Invariants) -> [f64; LAURENT_TERMS] {
    let mut c = [0.0; LAURENT_TERMS + 2];
    c[2] = inv.g2 / 20.0;
    c[3] = inv.g3 / 28.0;
    for k in 4..LAURENT_TERMS + 2 {
        let s: f64 = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
        c[k] = 3.0 / (((2 * k + 1) * (k - 3)) as f64) * s;
    }
    let mut out = [0.0; LAURENT_TERMS];
    out.copy_from_slice(&c[2..]);
    out
}

/// ℘ and its derivatives at `x` for the given invariants.
pub fn wp_family(x: f64, inv: &Invariants) -> Result<EvalResult> {
    Weierstrass::new(*inv).wp_family(x)
}

/// Weierstrass ζ at `x` for the given invariants.
pub fn zeta(x: f64, inv: &Invariants) -> Result<f64> {
    Weierstrass::new(*inv).zeta(x)
}
