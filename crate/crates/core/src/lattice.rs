//! One-soliton seeds and their commutative Bäcklund superposition.
//!
//! The seeds are
//!
//! ```text
//! z₀(x) = −2ζ(x)
//! zᵢ(x) = −2(ζ(x + δᵢ) − ζ(δᵢ)),    λᵢ² = 4℘(δᵢ)
//! ```
//!
//! and for a parameter subset S whose last two members are i < j,
//!
//! ```text
//! z_S = z_{S∖{i,j}} + (λᵢ² − λⱼ²) / (z_{S∖{j}} − z_{S∖{i}})
//! ```
//!
//! Branches are kept as a composition tree over the subset lattice and
//! expanded locally on demand (see [`crate::laurent`]), so `u = z_x` and
//! higher derivatives are exact and removable singularities at seed poles
//! stay finite.

use crate::error::{Error, Result};
use crate::laurent::{Laurent, SERIES_LEN};
use crate::weierstrass::{Invariants, RawValues, Weierstrass};

/// Offsets below this (relative to max(1, |x|)) are treated as sitting
/// exactly on a seed pole.
const SNAP_TOL: f64 = 1e-10;

/// z and its first four x-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; 5]);

impl Jet {
    pub fn z(&self) -> f64 {
        self.0[0]
    }
    /// u = z_x
    pub fn u(&self) -> f64 {
        self.0[1]
    }
    pub fn z_xx(&self) -> f64 {
        self.0[2]
    }
    pub fn z_xxx(&self) -> f64 {
        self.0[3]
    }
    pub fn z_xxxx(&self) -> f64 {
        self.0[4]
    }
}

/// Something that can be expanded about any sample point.
pub trait Branch {
    fn expand(&self, x: f64) -> Result<Laurent>;

    fn jet(&self, x: f64) -> Result<Jet> {
        jet_from(&self.expand(x)?, x)
    }

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.jet(x)?.z())
    }
}

impl<B: Branch + ?Sized> Branch for &B {
    fn expand(&self, x: f64) -> Result<Laurent> {
        (**self).expand(x)
    }
}

pub(crate) fn jet_from(series: &Laurent, x: f64) -> Result<Jet> {
    if series.is_singular() {
        return Err(Error::PoleProximity { x });
    }
    let mut d = [0.0; 5];
    for (k, slot) in d.iter_mut().enumerate() {
        *slot = series.derivative(k as u32).ok_or(Error::PrecisionLoss { x })?;
    }
    Ok(Jet(d))
}

/// A shift δᵢ with its Bäcklund eigenvalue λᵢ² = 4℘(δᵢ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam {
    delta: f64,
    lambda_sq: f64,
    zeta_delta: f64,
}

impl SpectralParam {
    pub fn new(delta: f64, kernel: &Weierstrass) -> Result<Self> {
        let wp = kernel.wp(delta)?;
        let zeta_delta = kernel.zeta(delta)?;
        Ok(Self {
            delta,
            lambda_sq: 4.0 * wp,
            zeta_delta,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lambda_sq(&self) -> f64 {
        self.lambda_sq
    }

    /// ζ(δ); the integration constant of the seed is η = 2ζ(δ).
    pub fn zeta_delta(&self) -> f64 {
        self.zeta_delta
    }
}

/// Seed poles closer than this to a sample point are treated by expanding
/// at the pole and re-expanding at the sample.
const RECENTER_REACH: f64 = 1e-3;

/// A real pole L of ζ near an argument s.
#[derive(Debug, Clone, Copy)]
struct PoleSite {
    /// s − L
    offset: f64,
    /// ζ(L + ξ) − ζ(ξ), zero for the pole at the origin
    quasi: f64,
}

/// ζ(e) from the series about the origin; only used for |e| ≤ RECENTER_REACH.
fn zeta_near_origin(kernel: &Weierstrass, e: f64) -> f64 {
    let e2 = e * e;
    let mut pw = e2 * e;
    let mut sum = 0.0;
    for (i, &c) in kernel.laurent().iter().enumerate() {
        let k = (i + 2) as f64;
        sum += c * pw / (2.0 * k - 1.0);
        pw *= e2;
    }
    1.0 / e - sum
}

/// Locates a pole of ζ within `RECENTER_REACH` of `s`; also returns the raw
/// values at `s` when they are available.
fn locate_pole(kernel: &Weierstrass, s: f64) -> Result<(Option<PoleSite>, Option<RawValues>)> {
    if s.abs() <= RECENTER_REACH {
        let raw = kernel.raw(s).ok();
        return Ok((Some(PoleSite { offset: s, quasi: 0.0 }), raw));
    }
    let raw = match kernel.raw(s) {
        Ok(r) => Some(r),
        Err(Error::PoleProximity { .. }) => None,
        Err(e) => return Err(e),
    };
    let estimate = match raw {
        Some(r) if r.wp < RECENTER_REACH.powi(-2) => return Ok((None, raw)),
        // ℘ ≈ e⁻², ℘′ ≈ −2e⁻³ at distance e from a pole
        Some(r) => s + 2.0 * r.wp / r.dwp,
        None => s,
    };
    // probe at a moderate distance, where ζ and ℘ are still well resolved
    let t = estimate + 0.5 * RECENTER_REACH;
    let probe = kernel.raw(t)?;
    let e = -2.0 * probe.wp / probe.dwp;
    let pole = t - e;
    Ok((
        Some(PoleSite {
            offset: s - pole,
            quasi: probe.zeta - zeta_near_origin(kernel, e),
        }),
        raw,
    ))
}

/// Local expansion of ζ(s + ξ).
fn zeta_expansion(kernel: &Weierstrass, s: f64, x: f64) -> Result<Laurent> {
    let (site, raw) = locate_pole(kernel, s)?;
    if let Some(site) = site {
        if site.offset.abs() <= SNAP_TOL * x.abs().max(1.0) {
            // ζ(ξ) = ξ⁻¹ − Σ c_k ξ^(2k−1)/(2k−1), stored from power −1
            let mut c = [0.0; SERIES_LEN];
            c[0] = 1.0;
            c[1] = site.quasi;
            for (i, &ck) in kernel.laurent().iter().enumerate() {
                let k = i + 2;
                let idx = 2 * k;
                if idx >= SERIES_LEN {
                    break;
                }
                c[idx] = -ck / (2 * k - 1) as f64;
            }
            return Ok(Laurent::from_coeffs(-1, &c, SERIES_LEN));
        }
    }
    let raw = raw.ok_or(Error::PoleProximity { x })?;
    // Taylor coefficients of ℘ about s from ℘″ = 6℘² − g₂/2
    let g2 = kernel.invariants().g2();
    let mut a = [0.0; SERIES_LEN];
    a[0] = raw.wp;
    a[1] = raw.dwp;
    for n in 0..SERIES_LEN - 2 {
        let conv: f64 = (0..=n).map(|i| a[i] * a[n - i]).sum();
        let forcing = if n == 0 { g2 / 2.0 } else { 0.0 };
        a[n + 2] = (6.0 * conv - forcing) / (((n + 2) * (n + 1)) as f64);
    }
    let mut c = [0.0; SERIES_LEN];
    c[0] = raw.zeta;
    for n in 0..SERIES_LEN - 1 {
        c[n + 1] = -a[n] / (n + 1) as f64;
    }
    Ok(Laurent::from_coeffs(0, &c, SERIES_LEN))
}

/// A point p near the sample x where some node of the lattice is singular,
/// stored as the offset x − p.
#[derive(Debug, Clone, Copy)]
enum Hint {
    /// A seed pole, located to rounding.
    Seed(f64),
    /// A zero of z_a − z_b in the given superposition node, from one
    /// Newton step; needs refinement.
    Denominator(f64, Subset),
}

impl Hint {
    fn offset(&self) -> f64 {
        match *self {
            Hint::Seed(e) | Hint::Denominator(e, _) => e,
        }
    }
}

/// Seed poles within reach of `x` that are not hit exactly.
fn seed_hints(kernel: &Weierstrass, params: &[SpectralParam], x: f64) -> Result<Vec<Hint>> {
    let args = std::iter::once(x).chain(params.iter().map(|p| x + p.delta));
    let mut hints = Vec::new();
    for s in args {
        if let (Some(site), _) = locate_pole(kernel, s)? {
            // even a snapped offset counts: the zeros of the shifted seeds at
            // x = 0 are only exact when evaluated at the pole itself
            if site.offset != 0.0 {
                hints.push(Hint::Seed(site.offset));
            }
        }
    }
    Ok(hints)
}

/// Expansion of z₀ (no parameter) or zᵢ about x.
pub(crate) fn seed_expansion(kernel: &Weierstrass, x: f64, param: Option<&SpectralParam>) -> Result<Laurent> {
    match param {
        None => Ok(zeta_expansion(kernel, x, x)?.scale(-2.0)),
        Some(p) => {
            let z = zeta_expansion(kernel, x + p.delta, x)?;
            // subtract ζ(δ) from the constant term only
            let shifted = match z.coeff(0) {
                Some(c0) if z.lead() == 0 => {
                    let mut coeffs = [0.0; SERIES_LEN];
                    for (j, slot) in coeffs.iter_mut().enumerate().take(z.len()) {
                        *slot = z.coeff(j as i32).unwrap_or(0.0);
                    }
                    coeffs[0] = c0 - p.zeta_delta;
                    Laurent::from_coeffs(0, &coeffs, z.len())
                }
                _ => z - Laurent::constant(p.zeta_delta),
            };
            Ok(shifted.scale(-2.0))
        }
    }
}

/// z₀(x) = −2ζ(x), or zᵢ(x) = −2(ζ(x+δᵢ) − ζ(δᵢ)) when a parameter is given.
pub fn one_soliton(x: f64, inv: &Invariants, p: Option<&SpectralParam>) -> Result<f64> {
    let kernel = Weierstrass::new(*inv);
    match p {
        None => Ok(-2.0 * kernel.zeta(x)?),
        Some(p) => Ok(-2.0 * (kernel.zeta(x + p.delta)? - p.zeta_delta)),
    }
}

/// A seed branch: z₀ (plus an optional constant) or zᵢ.
#[derive(Debug, Clone)]
pub struct Seed {
    kernel: Weierstrass,
    param: Option<SpectralParam>,
    offset: f64,
}

impl Seed {
    pub fn base(kernel: &Weierstrass) -> Self {
        Self {
            kernel: kernel.clone(),
            param: None,
            offset: 0.0,
        }
    }

    pub fn shifted(kernel: &Weierstrass, param: SpectralParam) -> Self {
        Self {
            kernel: kernel.clone(),
            param: Some(param),
            offset: 0.0,
        }
    }

    /// Adds a constant to the seed.
    pub fn with_offset(mut self, c: f64) -> Self {
        self.offset = c;
        self
    }
}

impl Branch for Seed {
    fn expand(&self, x: f64) -> Result<Laurent> {
        let s = seed_expansion(&self.kernel, x, self.param.as_ref())?;
        if self.offset == 0.0 {
            Ok(s)
        } else {
            Ok(s + Laurent::constant(self.offset))
        }
    }
}

fn superpose_expansions(
    base: Laurent,
    a: Laurent,
    b: Laurent,
    lam_a_sq: f64,
    lam_b_sq: f64,
    x: f64,
) -> Result<Laurent> {
    let inv = (a - b).recip().ok_or(Error::PoleProximity { x })?;
    Ok(base + inv.scale(lam_a_sq - lam_b_sq))
}

/// `z_base + (λ_a² − λ_b²)/(z_a − z_b)`, evaluated pointwise.
pub struct Superposition<'a> {
    base: &'a dyn Branch,
    a: &'a dyn Branch,
    b: &'a dyn Branch,
    lam_a_sq: f64,
    lam_b_sq: f64,
}

pub fn superpose<'a>(
    base: &'a dyn Branch,
    a: &'a dyn Branch,
    b: &'a dyn Branch,
    lam_a_sq: f64,
    lam_b_sq: f64,
) -> Superposition<'a> {
    Superposition {
        base,
        a,
        b,
        lam_a_sq,
        lam_b_sq,
    }
}

impl Branch for Superposition<'_> {
    fn expand(&self, x: f64) -> Result<Laurent> {
        superpose_expansions(
            self.base.expand(x)?,
            self.a.expand(x)?,
            self.b.expand(x)?,
            self.lam_a_sq,
            self.lam_b_sq,
            x,
        )
    }
}

/// Ordered spectral parameters over one set of invariants.
#[derive(Debug, Clone)]
pub struct SolitonSpec {
    kernel: Weierstrass,
    params: Vec<SpectralParam>,
}

impl SolitonSpec {
    /// Validates that the λᵢ² are pairwise distinct.
    pub fn new(inv: Invariants, deltas: &[f64]) -> Result<Self> {
        Self::with_kernel(Weierstrass::new(inv), deltas)
    }

    pub fn with_kernel(kernel: Weierstrass, deltas: &[f64]) -> Result<Self> {
        let params = deltas
            .iter()
            .map(|&d| SpectralParam::new(d, &kernel))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..params.len() {
            for j in i + 1..params.len() {
                let (pi, pj) = (params[i].lambda_sq / 4.0, params[j].lambda_sq / 4.0);
                let scale = pi.abs().max(pj.abs()).max(1.0);
                if (pi - pj).abs() <= 1e-10 * scale {
                    return Err(Error::DegenerateDeltas {
                        i,
                        j,
                        delta_i: deltas[i],
                        delta_j: deltas[j],
                    });
                }
            }
        }
        Ok(Self { kernel, params })
    }

    pub fn kernel(&self) -> &Weierstrass {
        &self.kernel
    }

    pub fn invariants(&self) -> &Invariants {
        self.kernel.invariants()
    }

    pub fn params(&self) -> &[SpectralParam] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// The same invariants with the parameters reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            kernel: self.kernel.clone(),
            params: order.iter().map(|&i| self.params[i]).collect(),
        }
    }
}

/// Whether z₀ survives in the full-set solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// Even N: the (1 + N) class, z₀ present.
    Even,
    /// Odd N: z₀ cancels.
    Odd,
}

/// Bitmask over parameter indices.
pub type Subset = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Base,
    Seed(usize),
    Superpose {
        base: Subset,
        a: Subset,
        b: Subset,
        lam_a_sq: f64,
        lam_b_sq: f64,
    },
}

/// Largest supported parameter count; the lattice has 2^N nodes.
pub const MAX_PARAMS: usize = 16;

/// An N-soliton built over the subset lattice of its parameters.
#[derive(Debug, Clone)]
pub struct SolitonSolution {
    spec: SolitonSpec,
    nodes: Vec<Node>,
    base_offset: f64,
}

/// The two members of `mask` that are combined last: its two highest indices.
fn last_pair(mask: Subset) -> (usize, usize) {
    let j = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
    let rest = mask & !(1 << j);
    let i = usize::BITS as usize - 1 - rest.leading_zeros() as usize;
    (i, j)
}

/// Populates the subset lattice bottom-up.
pub fn build(spec: &SolitonSpec) -> Result<SolitonSolution> {
    let n = spec.len();
    if n > MAX_PARAMS {
        return Err(Error::InvalidGrid(format!(
            "at most {MAX_PARAMS} spectral parameters are supported, got {n}"
        )));
    }
    let params = spec.params();
    let nodes = (0..1usize << n)
        .map(|mask| match mask.count_ones() {
            0 => Node::Base,
            1 => Node::Seed(mask.trailing_zeros() as usize),
            _ => {
                let (i, j) = last_pair(mask);
                Node::Superpose {
                    base: mask & !(1 << i) & !(1 << j),
                    a: mask & !(1 << j),
                    b: mask & !(1 << i),
                    lam_a_sq: params[i].lambda_sq,
                    lam_b_sq: params[j].lambda_sq,
                }
            }
        })
        .collect();
    Ok(SolitonSolution {
        spec: spec.clone(),
        nodes,
        base_offset: 0.0,
    })
}

impl SolitonSolution {
    pub fn spec(&self) -> &SolitonSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    pub fn full_set(&self) -> Subset {
        (1 << self.len()) - 1
    }

    pub fn parity(&self) -> Parity {
        if self.len().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// The same lattice with z₀ replaced by z₀ + c.
    pub fn with_base_offset(&self, c: f64) -> Self {
        Self {
            base_offset: c,
            ..self.clone()
        }
    }

    /// λ² of parameter `i`.
    pub fn lambda_sq(&self, i: usize) -> f64 {
        self.spec.params[i].lambda_sq
    }

    /// For a node built by superposition: (base, a, b, i, j) with i, j the
    /// parameters of the a- and b-legs.
    pub fn square(&self, mask: Subset) -> Option<(Subset, Subset, Subset, usize, usize)> {
        match self.nodes.get(mask)? {
            Node::Superpose { base, a, b, .. } => {
                let (i, j) = last_pair(mask);
                Some((*base, *a, *b, i, j))
            }
            _ => None,
        }
    }

    fn expand_node(&self, mask: Subset, x: f64, memo: &mut [Option<Laurent>]) -> Result<Laurent> {
        if let Some(s) = memo[mask] {
            return Ok(s);
        }
        let kernel = &self.spec.kernel;
        let s = match self.nodes[mask] {
            Node::Base => {
                let z0 = seed_expansion(kernel, x, None)?;
                if self.base_offset == 0.0 {
                    z0
                } else {
                    z0 + Laurent::constant(self.base_offset)
                }
            }
            Node::Seed(i) => seed_expansion(kernel, x, Some(&self.spec.params[i]))?,
            Node::Superpose {
                base,
                a,
                b,
                lam_a_sq,
                lam_b_sq,
            } => {
                let base = self.expand_node(base, x, memo)?;
                let a = self.expand_node(a, x, memo)?;
                let b = self.expand_node(b, x, memo)?;
                superpose_expansions(base, a, b, lam_a_sq, lam_b_sq, x)?
            }
        };
        memo[mask] = Some(s);
        Ok(s)
    }

    /// z_a − z_b of a superposition node.
    fn denominator(&self, mask: Subset, x: f64, memo: &mut [Option<Laurent>]) -> Result<Option<Laurent>> {
        match self.nodes[mask] {
            Node::Superpose { a, b, .. } => Ok(Some(self.expand_node(a, x, memo)? - self.expand_node(b, x, memo)?)),
            _ => Ok(None),
        }
    }

    /// Nearby zeros of the denominators among the nodes already in `memo`.
    fn denominator_hints(&self, memo: &[Option<Laurent>]) -> Vec<Hint> {
        let mut hints = Vec::new();
        for (mask, node) in self.nodes.iter().enumerate() {
            let Node::Superpose { a, b, .. } = *node else { continue };
            let (Some(za), Some(zb)) = (memo[a], memo[b]) else {
                continue;
            };
            let d = za - zb;
            if d.lead() != 0 {
                continue;
            }
            if let (Some(d0), Some(d1)) = (d.coeff(0), d.coeff(1)) {
                let step = d0 / d1;
                if step.is_finite() && step != 0.0 && step.abs() < RECENTER_REACH {
                    hints.push(Hint::Denominator(step, mask));
                }
            }
        }
        hints
    }

    /// Newton iteration for the zero of a node denominator, stopping once
    /// the expansion sees the zero as exact.
    fn refine_zero(&self, mask: Subset, start: f64, leash: f64) -> Option<f64> {
        let mut p = start;
        for _ in 0..8 {
            if (p - start).abs() > leash {
                return None;
            }
            let mut memo = vec![None; self.nodes.len()];
            let d = self.denominator(mask, p, &mut memo).ok()??;
            if d.lead() >= 1 || d.is_empty() {
                return Some(p);
            }
            if d.lead() < 0 {
                return None;
            }
            let step = d.coeff(0)? / d.coeff(1)?;
            if !step.is_finite() {
                return None;
            }
            p -= step;
            if step.abs() <= 4.0 * f64::EPSILON * p.abs() {
                return Some(p);
            }
        }
        Some(p)
    }

    /// Expands with `f` about x. When a seed pole or a pole of an
    /// intermediate node sits just off x, its singular terms would cancel
    /// only approximately there; the expansion is then taken at that pole,
    /// where they cancel exactly, and re-expanded at x.
    fn expand_with<F>(&self, x: f64, f: F) -> Result<Laurent>
    where
        F: Fn(f64, &mut [Option<Laurent>]) -> Result<Laurent>,
    {
        let mut memo = vec![None; self.nodes.len()];
        let direct = f(x, &mut memo);
        let mut hints = seed_hints(&self.spec.kernel, &self.spec.params, x)?;
        let seed_poles: Vec<f64> = hints.iter().map(|h| x - h.offset()).collect();
        // denominators vanish at seed poles too; those zeros are the seed's
        hints.extend(self.denominator_hints(&memo).into_iter().filter(|h| {
            let p = x - h.offset();
            !seed_poles.iter().any(|s| (s - p).abs() <= 0.1 * h.offset().abs())
        }));
        // seed poles first: a snapped seed makes the direct expansion
        // inconsistent, and the denominator estimates with it
        let seeds = seed_poles.len();
        hints[seeds..].sort_by(|a, b| a.offset().abs().total_cmp(&b.offset().abs()));
        hints[..seeds].sort_by(|a, b| a.offset().abs().total_cmp(&b.offset().abs()));
        hints.truncate(seeds + 4);
        for hint in &hints {
            let p = match *hint {
                Hint::Seed(e) => x - e,
                Hint::Denominator(e, mask) => match self.refine_zero(mask, x - e, e.abs()) {
                    Some(p) => seed_poles
                        .iter()
                        .copied()
                        .find(|s| (s - p).abs() <= SNAP_TOL * p.abs().max(1.0))
                        .unwrap_or(p),
                    None => continue,
                },
            };
            let e = x - p;
            if e == 0.0 || e.abs() >= RECENTER_REACH {
                continue;
            }
            let mut memo = vec![None; self.nodes.len()];
            if let Ok(at) = f(p, &mut memo) {
                if let Some(shifted) = at.shifted_checked(e, 4, 1e-12) {
                    return Ok(shifted);
                }
            }
        }
        direct
    }

    /// Expansion of the branch for any parameter subset.
    pub fn expand_subset(&self, mask: Subset, x: f64) -> Result<Laurent> {
        self.expand_with(x, |y, memo| self.expand_node(mask, y, memo))
    }

    /// Builds z_{S∪{i,j}} from the square with base S and the pair (i, j),
    /// whatever pair the lattice itself used for that node.
    pub fn expand_via_pair(&self, base: Subset, i: usize, j: usize, x: f64) -> Result<Laurent> {
        self.expand_with(x, |y, memo| {
            let zb = self.expand_node(base, y, memo)?;
            let za = self.expand_node(base | 1 << i, y, memo)?;
            let zc = self.expand_node(base | 1 << j, y, memo)?;
            superpose_expansions(zb, za, zc, self.lambda_sq(i), self.lambda_sq(j), y)
        })
    }

    pub fn subset(&self, mask: Subset) -> SubsetBranch<'_> {
        SubsetBranch { sol: self, mask }
    }

    /// u = z_x.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(self.jet(x)?.u())
    }
}

impl Branch for SolitonSolution {
    fn expand(&self, x: f64) -> Result<Laurent> {
        self.expand_subset(self.full_set(), x)
    }
}

/// One node of a built lattice viewed as a branch.
#[derive(Clone, Copy)]
pub struct SubsetBranch<'a> {
    sol: &'a SolitonSolution,
    mask: Subset,
}

impl Branch for SubsetBranch<'_> {
    fn expand(&self, x: f64) -> Result<Laurent> {
        self.sol.expand_subset(self.mask, x)
    }
}

/// u(x) = z_x(x) of a built solution.
pub fn derivative(sol: &SolitonSolution, x: f64) -> Result<f64> {
    sol.derivative(x)
}

/// −λ·tanh((λx + shift)/2), the solution generated from z = 0.
pub fn hyperbolic_one_soliton(x: f64, lam: f64, shift: f64) -> f64 {
    -lam * ((lam * x + shift) / 2.0).tanh()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperbolic {
    pub lam: f64,
    pub shift: f64,
}

impl Branch for Hyperbolic {
    fn expand(&self, x: f64) -> Result<Laurent> {
        // t(ξ) = tanh(a + ξ): (n+1) t_{n+1} = [n = 0] − Σ t_i t_{n−i}
        let mut t = [0.0; SERIES_LEN];
        t[0] = ((self.lam * x + self.shift) / 2.0).tanh();
        for n in 0..SERIES_LEN - 1 {
            let conv: f64 = (0..=n).map(|i| t[i] * t[n - i]).sum();
            let forcing = if n == 0 { 1.0 } else { 0.0 };
            t[n + 1] = (forcing - conv) / (n + 1) as f64;
        }
        let rate = self.lam / 2.0;
        let mut pw = 1.0;
        for v in &mut t {
            *v *= -self.lam * pw;
            pw *= rate;
        }
        Ok(Laurent::from_coeffs(0, &t, SERIES_LEN))
    }
}

/// A constant branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Branch for Constant {
    fn expand(&self, _x: f64) -> Result<Laurent> {
        Ok(Laurent::constant(self.0))
    }
}

/// `slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub slope: f64,
    pub intercept: f64,
}

impl Branch for Linear {
    fn expand(&self, x: f64) -> Result<Laurent> {
        Ok(Laurent::identity(x).scale(self.slope) + Laurent::constant(self.intercept))
    }
}

/// A branch shifted by a constant.
pub struct Offset<B> {
    pub inner: B,
    pub shift: f64,
}

impl<B: Branch> Branch for Offset<B> {
    fn expand(&self, x: f64) -> Result<Laurent> {
        Ok(self.inner.expand(x)? + Laurent::constant(self.shift))
    }
}

/// Traveling-wave lift û(x, t) = u(x + bt) + offset, with offset = −b/6
/// for a solution of the full equation.
#[derive(Clone, Copy)]
pub struct TimeLift<'a> {
    sol: &'a SolitonSolution,
    b: f64,
    offset: f64,
}

pub fn time_lift(sol: &SolitonSolution, b: f64) -> TimeLift<'_> {
    TimeLift {
        sol,
        b,
        offset: -b / 6.0,
    }
}

impl<'a> TimeLift<'a> {
    /// Replaces the −b/6 constant; only useful as a negative control.
    pub fn with_offset(self, offset: f64) -> Self {
        Self { offset, ..self }
    }

    pub fn velocity(&self) -> f64 {
        self.b
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn solution(&self) -> &'a SolitonSolution {
        self.sol
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.sol.derivative(x + self.b * t)? + self.offset)
    }

    /// (û, û_x, û_xx, û_xxx) at (x, t).
    pub fn spatial_jet(&self, x: f64, t: f64) -> Result<[f64; 4]> {
        let j = self.sol.jet(x + self.b * t)?;
        Ok([j.u() + self.offset, j.z_xx(), j.z_xxx(), j.z_xxxx()])
    }

    /// û_t = b·u_x(x + bt).
    pub fn time_derivative(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.b * self.sol.jet(x + self.b * t)?.z_xx())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(deltas: &[f64]) -> SolitonSpec {
        SolitonSpec::new(Invariants::new(0.3, 0.7).unwrap(), deltas).unwrap()
    }

    #[test]
    fn seeds_vanish_at_origin() {
        let s = spec(&[-0.02, 0.04, 0.3]);
        for p in s.params() {
            let z = one_soliton(0.0, s.invariants(), Some(p)).unwrap();
            assert_eq!(z, 0.0);
            let e = seed_expansion(s.kernel(), 0.0, Some(p)).unwrap();
            assert_eq!(e.lead(), 1);
        }
    }

    #[test]
    fn base_seed_is_odd() {
        let inv = Invariants::new(0.3, 0.7).unwrap();
        for x in [0.2, 0.9, 1.7] {
            assert_eq!(
                one_soliton(x, &inv, None).unwrap(),
                -one_soliton(-x, &inv, None).unwrap()
            );
        }
    }

    #[test]
    fn seed_expansion_matches_values() {
        let s = spec(&[-0.02]);
        let p = &s.params()[0];
        let seed = Seed::shifted(s.kernel(), *p);
        let j = seed.jet(0.5).unwrap();
        assert_eq!(j.z(), one_soliton(0.5, s.invariants(), Some(p)).unwrap());
        let wp = s.kernel().wp_family(0.48).unwrap();
        assert_relative_eq!(j.u(), 2.0 * wp.value, max_relative = 1e-14);
        assert_relative_eq!(j.z_xx(), 2.0 * wp.derivative, max_relative = 1e-13);
        assert_relative_eq!(j.z_xxx(), 2.0 * wp.second, max_relative = 1e-13);
        assert_relative_eq!(j.z_xxxx(), 24.0 * wp.value * wp.derivative, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_deltas_are_rejected() {
        let inv = Invariants::new(0.3, 0.7).unwrap();
        let err = SolitonSpec::new(inv, &[0.1, 0.2, -0.1]).unwrap_err();
        assert!(matches!(err, Error::DegenerateDeltas { i: 0, j: 2, .. }));
        assert!(matches!(
            SolitonSpec::new(inv, &[0.0]),
            Err(Error::PoleProximity { .. })
        ));
    }

    #[test]
    fn single_parameter_build_is_the_seed() {
        let s = spec(&[0.1]);
        let sol = build(&s).unwrap();
        let seed = Seed::shifted(s.kernel(), s.params()[0]);
        for x in [-1.3, 0.4, 1.9] {
            assert_eq!(sol.value(x).unwrap(), seed.value(x).unwrap());
        }
    }

    #[test]
    fn empty_build_is_the_base_seed() {
        let s = spec(&[]);
        let sol = build(&s).unwrap();
        assert_eq!(sol.value(0.7).unwrap(), one_soliton(0.7, s.invariants(), None).unwrap());
    }

    #[test]
    fn superpose_is_symmetric_under_joint_swap() {
        let s = spec(&[-0.02, 0.04]);
        let (p1, p2) = (s.params()[0], s.params()[1]);
        let z0 = Seed::base(s.kernel());
        let z1 = Seed::shifted(s.kernel(), p1);
        let z2 = Seed::shifted(s.kernel(), p2);
        let a = superpose(&z0, &z1, &z2, p1.lambda_sq(), p2.lambda_sq());
        let b = superpose(&z0, &z2, &z1, p2.lambda_sq(), p1.lambda_sq());
        for x in [-1.1, 0.3, 0.7, 1.6] {
            assert_relative_eq!(a.value(x).unwrap(), b.value(x).unwrap(), max_relative = 1e-15);
        }
    }

    #[test]
    fn pole_of_base_cancels_in_pair() {
        let s = spec(&[-0.02, 0.04]);
        let sol = build(&s).unwrap();
        let at = sol.jet(0.0).unwrap();
        assert!(at.z().is_finite());
        // limits from both sides agree with the value and slope at 0
        let h = 1e-5;
        let left = sol.value(-h).unwrap();
        let right = sol.value(h).unwrap();
        assert_relative_eq!(0.5 * (left + right), at.z(), max_relative = 1e-6);
        assert_relative_eq!((right - left) / (2.0 * h), at.u(), max_relative = 1e-6);
    }

    #[test]
    fn removable_points_at_seed_poles() {
        // x = −δ₁ is a pole of z₁ only
        let s = spec(&[-0.02, 0.04, 0.05]);
        let sol = build(&s).unwrap();
        let at = sol.jet(0.02).unwrap();
        let near = sol.jet(0.02 + 1e-5).unwrap();
        assert!((at.z() - near.z()).abs() < 1e-5 * (1.0 + at.u().abs()) * 10.0);
    }

    #[test]
    fn last_pair_picks_two_highest() {
        assert_eq!(last_pair(0b11), (0, 1));
        assert_eq!(last_pair(0b10110), (2, 4));
    }

    #[test]
    fn hyperbolic_limits_and_zero() {
        assert_relative_eq!(hyperbolic_one_soliton(1e3, 1.5, 0.2), -1.5);
        assert_eq!(hyperbolic_one_soliton(-0.2 / 1.5, 1.5, 0.2), 0.0);
        let h = Hyperbolic { lam: 1.5, shift: 0.2 };
        let j = h.jet(0.3).unwrap();
        let ode = j.u() - 0.5 * (j.z() * j.z() - 1.5 * 1.5);
        assert!(ode.abs() < 1e-12);
    }

    #[test]
    fn time_lift_with_zero_velocity_is_static() {
        let s = spec(&[-0.02, 0.04]);
        let sol = build(&s).unwrap();
        let lift = time_lift(&sol, 0.0);
        for t in [0.0, 0.3, 5.0] {
            assert_eq!(lift.eval(0.8, t).unwrap(), sol.derivative(0.8).unwrap());
        }
    }

    #[test]
    fn time_lift_is_a_traveling_wave() {
        let s = spec(&[-0.02, 0.04]);
        let sol = build(&s).unwrap();
        let lift = time_lift(&sol, 0.5);
        let (x, t, dt) = (0.8, 0.2, 0.1);
        assert_relative_eq!(
            lift.eval(x, t).unwrap(),
            lift.eval(x + 0.5 * dt, t - dt).unwrap(),
            max_relative = 1e-12
        );
    }
}
