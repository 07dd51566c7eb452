//! Truncated Laurent expansions about a sample point.
//!
//! Every branch of the soliton lattice is expanded locally as
//! `Σ c_j ξ^(lead + j)` with ξ = x − x₀. Arithmetic on these expansions gives
//! exact derivatives up to the truncation order and resolves removable
//! singularities: when the pole terms of two operands cancel, the leading
//! coefficients are dropped instead of being evaluated.

use std::ops::{Add, Mul, Neg, Sub};

use twofloat::TwoFloat;

/// Capacity of an expansion.
pub const SERIES_LEN: usize = 16;

/// Relative size below which a cancelled leading coefficient counts as zero.
const CANCEL_TOL: f64 = 1e-12;

const ZERO: TwoFloat = TwoFloat::from_f64(0.0);

/// Coefficients are kept in double-double precision. Deep lattice nodes
/// subtract nearly equal expansions many times over, and plain f64 loses
/// the higher coefficients to rounding long before truncation matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Laurent {
    lead: i32,
    /// Number of trustworthy coefficients in `c`.
    len: usize,
    c: [TwoFloat; SERIES_LEN],
}

impl Laurent {
    pub fn constant(v: f64) -> Self {
        let mut c = [ZERO; SERIES_LEN];
        c[0] = TwoFloat::from(v);
        Self {
            lead: 0,
            len: SERIES_LEN,
            c,
        }
    }

    /// The coordinate ξ itself plus an offset: `x₀ + ξ`.
    pub fn identity(x0: f64) -> Self {
        Self::from_coeffs(0, &[x0, 1.0], SERIES_LEN)
    }

    /// Expansion with the given leading power; `len` counts how many
    /// coefficients are exact (missing ones are zero).
    pub fn from_coeffs(lead: i32, coeffs: &[f64], len: usize) -> Self {
        let mut c = [ZERO; SERIES_LEN];
        for (slot, &v) in c.iter_mut().zip(coeffs) {
            *slot = TwoFloat::from(v);
        }
        Self::from_parts(lead, c, len)
    }

    fn from_parts(lead: i32, c: [TwoFloat; SERIES_LEN], len: usize) -> Self {
        Self {
            lead,
            len: len.min(SERIES_LEN),
            c,
        }
        .trimmed(&[0.0; SERIES_LEN])
    }

    pub fn lead(&self) -> i32 {
        self.lead
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// First power beyond the known coefficients.
    fn horizon(&self) -> i32 {
        self.lead + self.len as i32
    }

    fn coeff_dd(&self, power: i32) -> Option<TwoFloat> {
        if power >= self.horizon() {
            None
        } else if power < self.lead {
            Some(ZERO)
        } else {
            Some(self.c[(power - self.lead) as usize])
        }
    }

    /// Coefficient of ξ^power, or `None` if that power is beyond the
    /// truncation.
    pub fn coeff(&self, power: i32) -> Option<f64> {
        self.coeff_dd(power).map(f64::from)
    }

    /// True when the expansion has a pole at ξ = 0.
    pub fn is_singular(&self) -> bool {
        self.len > 0 && self.lead < 0
    }

    /// k-th derivative at ξ = 0.
    pub fn derivative(&self, k: u32) -> Option<f64> {
        if self.is_singular() {
            return None;
        }
        let factorial: f64 = (1..=k).map(f64::from).product();
        self.coeff_dd(k as i32).map(|c| f64::from(c * factorial))
    }

    pub fn value(&self) -> Option<f64> {
        self.derivative(0)
    }

    /// Re-expands a regular expansion about ξ = e. The result keeps as many
    /// coefficients as were known from power 0 on; `None` if singular.
    pub fn shifted(&self, e: f64) -> Option<Self> {
        if self.is_singular() {
            return None;
        }
        let horizon = self.horizon().max(0) as usize;
        let len = horizon.min(SERIES_LEN);
        let mut c = [ZERO; SERIES_LEN];
        for (k, slot) in c.iter_mut().enumerate().take(len) {
            // Σ_j c_j C(j, k) e^(j−k)
            let mut binom = 1.0;
            let mut pw = TwoFloat::from(1.0);
            let mut sum = ZERO;
            for j in k..horizon {
                sum += self.coeff_dd(j as i32).unwrap_or(ZERO) * binom * pw;
                binom = binom * (j + 1) as f64 / (j + 1 - k) as f64;
                pw *= e;
            }
            *slot = sum;
        }
        Some(Self::from_parts(0, c, len))
    }

    /// Like [`Laurent::shifted`], but `None` unless the last known term
    /// contributes less than `tol` (relative) to each of the first
    /// `derivatives + 1` derivatives, so that truncation is negligible.
    pub fn shifted_checked(&self, e: f64, derivatives: usize, tol: f64) -> Option<Self> {
        let shifted = self.shifted(e)?;
        let horizon = self.horizon();
        if self.len <= derivatives + 1 || horizon <= derivatives as i32 + 1 {
            return None;
        }
        let last = (horizon - 1) as usize;
        for k in 0..=derivatives.min(last) {
            let mut binom = 1.0;
            let mut pw = 1.0;
            let mut scale = 0.0;
            let mut tail = 0.0;
            for j in k..=last {
                let term = (self.coeff(j as i32).unwrap_or(0.0) * binom * pw).abs();
                scale += term;
                tail = term;
                binom = binom * (j + 1) as f64 / (j + 1 - k) as f64;
                pw *= e;
            }
            if tail > tol * scale {
                return None;
            }
        }
        Some(shifted)
    }

    pub fn scale(mut self, s: f64) -> Self {
        if s == 0.0 {
            return Self::constant(0.0);
        }
        for v in &mut self.c {
            *v *= s;
        }
        self
    }

    /// Reciprocal; `None` when nothing trustworthy is left to divide by.
    pub fn recip(&self) -> Option<Self> {
        if self.len == 0 || self.c[0].hi() == 0.0 {
            return None;
        }
        let mut r = [ZERO; SERIES_LEN];
        let inv = self.c[0].recip();
        r[0] = inv;
        for n in 1..self.len {
            let mut s = ZERO;
            for i in 1..=n {
                s += self.c[i] * r[n - i];
            }
            r[n] = -s * inv;
        }
        Some(Self {
            lead: -self.lead,
            len: self.len,
            c: r,
        })
    }

    /// Drops leading coefficients that are cancellation noise relative to
    /// the operand magnitudes in `reference` (aligned with `self.c`).
    fn trimmed(mut self, reference: &[f64; SERIES_LEN]) -> Self {
        let mut drop = 0;
        while drop < self.len {
            let v = self.c[drop].hi().abs();
            let r = reference[drop];
            if v == 0.0 || v <= CANCEL_TOL * r {
                drop += 1;
            } else {
                break;
            }
        }
        if drop == self.len {
            // everything cancelled: identically zero up to the horizon
            return Self {
                lead: self.horizon(),
                len: 0,
                c: [ZERO; SERIES_LEN],
            };
        }
        if drop > 0 {
            self.c.copy_within(drop..SERIES_LEN, 0);
            for v in &mut self.c[SERIES_LEN - drop..] {
                *v = ZERO;
            }
            self.lead += drop as i32;
            self.len -= drop;
        }
        self
    }

    fn combine(self, rhs: Self, sign: f64) -> Self {
        if self.len == 0 && rhs.len == 0 {
            let horizon = self.horizon().min(rhs.horizon());
            return Self {
                lead: horizon,
                len: 0,
                c: [ZERO; SERIES_LEN],
            };
        }
        let lead = self.lead.min(rhs.lead);
        let horizon = self.horizon().min(rhs.horizon());
        let len = ((horizon - lead).max(0) as usize).min(SERIES_LEN);
        let mut c = [ZERO; SERIES_LEN];
        let mut reference = [0.0; SERIES_LEN];
        for (j, (slot, r)) in c.iter_mut().zip(reference.iter_mut()).enumerate().take(len) {
            let p = lead + j as i32;
            let a = self.coeff_dd(p).unwrap_or(ZERO);
            let b = rhs.coeff_dd(p).unwrap_or(ZERO);
            *slot = a + b * sign;
            *r = a.hi().abs().max(b.hi().abs());
        }
        Self { lead, len, c }.trimmed(&reference)
    }
}

impl Add for Laurent {
    type Output = Laurent;
    fn add(self, rhs: Self) -> Self {
        self.combine(rhs, 1.0)
    }
}

impl Sub for Laurent {
    type Output = Laurent;
    fn sub(self, rhs: Self) -> Self {
        self.combine(rhs, -1.0)
    }
}

impl Neg for Laurent {
    type Output = Laurent;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Self) -> Self {
        let len = self.len.min(rhs.len);
        let mut c = [ZERO; SERIES_LEN];
        for (n, slot) in c.iter_mut().enumerate().take(len) {
            let mut s = ZERO;
            for i in 0..=n {
                s += self.c[i] * rhs.c[n - i];
            }
            *slot = s;
        }
        Self {
            lead: self.lead + rhs.lead,
            len,
            c,
        }
    }
}
