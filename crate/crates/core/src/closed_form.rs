//! Explicit formulas for the lattice through N = 5, evaluated from seed
//! values only. They share no code with the recursive build and serve as
//! its oracle.

use crate::error::{Error, Result};
use crate::lattice::{one_soliton, SpectralParam};
use crate::weierstrass::Weierstrass;

/// All permutations of `0..n` with their signs.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if left.is_empty() {
            let mut inversions = 0;
            for a in 0..prefix.len() {
                for b in a + 1..prefix.len() {
                    if prefix[a] > prefix[b] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            out.push((prefix.clone(), sign));
            return;
        }
        for k in 0..left.len() {
            let v = left.remove(k);
            prefix.push(v);
            rec(prefix, left, out);
            prefix.pop();
            left.insert(k, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

fn checked_ratio(num: f64, den: f64, x: f64) -> Result<f64> {
    if den == 0.0 || !(num / den).is_finite() {
        return Err(Error::PoleProximity { x });
    }
    Ok(num / den)
}

/// z₁₂ = z₀ + (λ₁² − λ₂²)/(z₁ − z₂) from seed values.
pub fn z12_from_values(z0: f64, z: [f64; 2], lam: [f64; 2], x: f64) -> Result<f64> {
    Ok(z0 + checked_ratio(lam[0] - lam[1], z[0] - z[1], x)?)
}

/// The (2+1)-soliton written through ζ and ℘ with +δ arguments:
/// −2ζ(x) − 2(℘(δ₁) − ℘(δ₂)) / (ζ(x+δ₁) − ζ(x+δ₂) − ζ(δ₁) + ζ(δ₂)).
pub fn z12_closed(x: f64, kernel: &Weierstrass, p: [&SpectralParam; 2]) -> Result<f64> {
    let den = kernel.zeta(x + p[0].delta())? - kernel.zeta(x + p[1].delta())? - p[0].zeta_delta() + p[1].zeta_delta();
    let num = 2.0 * (kernel.wp(p[0].delta())? - kernel.wp(p[1].delta())?);
    Ok(-2.0 * kernel.zeta(x)? - checked_ratio(num, den, x)?)
}

/// u = z₁₂,ₓ in closed form.
pub fn u12_closed(x: f64, kernel: &Weierstrass, p: [&SpectralParam; 2]) -> Result<f64> {
    let den = kernel.zeta(x + p[0].delta())? - kernel.zeta(x + p[1].delta())? - p[0].zeta_delta() + p[1].zeta_delta();
    let num = 2.0
        * (kernel.wp(p[0].delta())? - kernel.wp(p[1].delta())?)
        * (kernel.wp(x + p[0].delta())? - kernel.wp(x + p[1].delta())?);
    Ok(2.0 * kernel.wp(x)? - checked_ratio(num, den * den, x)?)
}

/// Cyclic form of the 3-soliton; z₀ does not appear.
pub fn z123_from_values(z: [f64; 3], lam: [f64; 3], x: f64) -> Result<f64> {
    let (d12, d23, d31) = (lam[0] - lam[1], lam[1] - lam[2], lam[2] - lam[0]);
    let num = d12 * z[0] * z[1] + d23 * z[1] * z[2] + d31 * z[2] * z[0];
    let den = d12 * z[2] + d23 * z[0] + d31 * z[1];
    Ok(-checked_ratio(num, den, x)?)
}

/// z₁₂₃₄ = z₀ + G/F with the rank-4 antisymmetric contractions.
pub fn z1234_from_values(z0: f64, z: [f64; 4], lam: [f64; 4], x: f64) -> Result<f64> {
    let mut f = 0.0;
    let mut g = 0.0;
    for (p, sign) in signed_permutations(4) {
        let (i, j, k, l) = (p[0], p[1], p[2], p[3]);
        f += sign * (lam[i] - lam[j]) * (lam[k] - lam[l]) * z[i] * z[j];
        g += -2.0 * sign * lam[i] * lam[j] * (lam[i] - lam[j]) * z[k];
    }
    Ok(z0 + checked_ratio(g, f, x)?)
}

/// z₁₂₃₄₅ = G/F with the rank-5 antisymmetric contractions.
pub fn z12345_from_values(z: [f64; 5], lam: [f64; 5], x: f64) -> Result<f64> {
    let mut f = 0.0;
    let mut g = 0.0;
    for (p, sign) in signed_permutations(5) {
        let (i, j, k, l, m) = (p[0], p[1], p[2], p[3], p[4]);
        let w = sign * (lam[i] - lam[j]) * (lam[k] - lam[l]) * (lam[l] - lam[m]) * (lam[m] - lam[k]);
        f += w * z[i] * z[j];
        g += w * z[k] * z[l] * z[m];
    }
    checked_ratio(g, f, x)
}

fn seeds<const N: usize>(x: f64, kernel: &Weierstrass, p: [&SpectralParam; N]) -> Result<([f64; N], [f64; N])> {
    let mut z = [0.0; N];
    let mut lam = [0.0; N];
    for k in 0..N {
        z[k] = one_soliton(x, kernel.invariants(), Some(p[k]))?;
        lam[k] = p[k].lambda_sq();
    }
    Ok((z, lam))
}

pub fn z123_closed(x: f64, kernel: &Weierstrass, p: [&SpectralParam; 3]) -> Result<f64> {
    let (z, lam) = seeds(x, kernel, p)?;
    z123_from_values(z, lam, x)
}

pub fn z1234_closed(x: f64, kernel: &Weierstrass, p: [&SpectralParam; 4]) -> Result<f64> {
    let (z, lam) = seeds(x, kernel, p)?;
    let z0 = one_soliton(x, kernel.invariants(), None)?;
    z1234_from_values(z0, z, lam, x)
}

pub fn z12345_closed(x: f64, kernel: &Weierstrass, p: [&SpectralParam; 5]) -> Result<f64> {
    let (z, lam) = seeds(x, kernel, p)?;
    z12345_from_values(z, lam, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_signs() {
        let perms = signed_permutations(4);
        assert_eq!(perms.len(), 24);
        assert_eq!(perms.iter().map(|(_, s)| s).sum::<f64>(), 0.0);
        let id = perms.iter().find(|(p, _)| p == &vec![0, 1, 2, 3]).unwrap();
        assert_eq!(id.1, 1.0);
        let swap = perms.iter().find(|(p, _)| p == &vec![1, 0, 2, 3]).unwrap();
        assert_eq!(swap.1, -1.0);
        assert_eq!(signed_permutations(5).len(), 120);
    }

    #[test]
    fn three_soliton_is_cyclic() {
        let z = [1.3, -0.4, 2.2];
        let lam = [5.0, 7.5, -1.0];
        let a = z123_from_values(z, lam, 0.0).unwrap();
        let b = z123_from_values([z[1], z[2], z[0]], [lam[1], lam[2], lam[0]], 0.0).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs());
    }

    #[test]
    fn rank_four_and_five_are_symmetric() {
        let z = [1.3, -0.4, 2.2, 0.7, -1.9];
        let lam = [5.0, 7.5, -1.0, 3.25, 11.0];
        let a = z1234_from_values(0.3, [z[0], z[1], z[2], z[3]], [lam[0], lam[1], lam[2], lam[3]], 0.0).unwrap();
        let b = z1234_from_values(0.3, [z[2], z[0], z[3], z[1]], [lam[2], lam[0], lam[3], lam[1]], 0.0).unwrap();
        assert!((a - b).abs() < 1e-13 * a.abs());
        let c = z12345_from_values(z, lam, 0.0).unwrap();
        let order = [4, 2, 0, 3, 1];
        let d = z12345_from_values(order.map(|i| z[i]), order.map(|i| lam[i]), 0.0).unwrap();
        assert!((c - d).abs() < 1e-13 * c.abs());
    }
}
