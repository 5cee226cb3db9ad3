//! Faà di Bruno partitions and derivatives of integer powers.
//!
//! The `r`-th derivative of `[g(s)]^n` is a sum over the solutions of
//! `b₁ + 2b₂ + … + r·b_r = r` in nonnegative integers. Everything here works on
//! Taylor data at a single point, for real or complex values.

use std::ops::{Add, AddAssign, Mul};
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{DixonError, Result};

/// Largest derivative order with enumerated partitions.
pub const MAX_ORDER: usize = 40;

/// Values [`power_derivative`] can work with (`f64`, `Complex64`).
pub trait Scalar:
    Copy + Zero + One + Add<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> + AddAssign
{
}

impl<T> Scalar for T where
    T: Copy + Zero + One + Add<Output = T> + Mul<Output = T> + Mul<f64, Output = T> + AddAssign
{
}

/// One solution of `b₁ + 2b₂ + … + r·b_r = r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdBPartition {
    pub r: usize,
    /// `b[j-1] = b_j`
    pub b: Vec<u32>,
    /// number of parts, `Σ b_j`
    pub l: usize,
    /// `r! / (Π b_j! (j!)^{b_j})`
    pub weight: f64,
}

impl FdBPartition {
    /// Nonzero `(j, b_j)` pairs.
    pub fn parts(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.b
            .iter()
            .enumerate()
            .filter(|(_, &bj)| bj > 0)
            .map(|(i, &bj)| (i + 1, bj))
    }
}

fn factorial(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

fn build(r: usize) -> Vec<FdBPartition> {
    fn recurse(j: usize, rem: usize, r: usize, b: &mut Vec<u32>, out: &mut Vec<FdBPartition>) {
        if j > r {
            if rem == 0 {
                let l = b.iter().map(|&x| x as usize).sum();
                let mut denom = 1.0;
                for (i, &bj) in b.iter().enumerate() {
                    denom *= factorial(bj as usize) * factorial(i + 1).powi(bj as i32);
                }
                out.push(FdBPartition {
                    r,
                    b: b.clone(),
                    l,
                    weight: factorial(r) / denom,
                });
            }
            return;
        }
        if j == r {
            // last slot absorbs whatever is left, if it divides evenly
            if rem % r == 0 {
                b.push((rem / r) as u32);
                recurse(j + 1, 0, r, b, out);
                b.pop();
            }
            return;
        }
        for bj in (0..=rem / j).rev() {
            b.push(bj as u32);
            recurse(j + 1, rem - bj * j, r, b, out);
            b.pop();
        }
    }
    let mut out = Vec::new();
    recurse(1, r, r, &mut Vec::with_capacity(r), &mut out);
    out
}

fn cached(r: usize) -> &'static [FdBPartition] {
    static CACHE: [OnceLock<Vec<FdBPartition>>; MAX_ORDER + 1] =
        [const { OnceLock::new() }; MAX_ORDER + 1];
    CACHE[r].get_or_init(|| build(r))
}

/// All solutions of `b₁ + 2b₂ + … + r·b_r = r`, ordered lexicographically
/// from the largest `b₁` down. There are `p(r)` of them.
pub fn enumerate_partitions(r: usize) -> Result<Vec<FdBPartition>> {
    check_order(r)?;
    if r == 0 {
        return Err(DixonError::Size(
            "partitions are enumerated for r >= 1".into(),
        ));
    }
    Ok(cached(r).to_vec())
}

fn check_order(r: usize) -> Result<()> {
    if r > MAX_ORDER {
        return Err(DixonError::Size(format!(
            "derivative order {r} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

fn powu<T: Scalar>(x: T, mut e: u32) -> T {
    let mut base = x;
    let mut acc = T::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// Partial Bell sums grouped by part count.
///
/// Given Taylor coefficients `h[j] = g^{(j)}/j!`, returns `S[l]` for
/// `l = 0..=r`, where `S[l] = Σ Π_j h[j]^{b_j} / b_j!` over the partitions of
/// `r` with `l` parts. `[u^r] (Σ_j h[j] u^j)^n = Σ_l n!/(n-l)! · h[0]^{n-l} · S[l]`.
pub fn partial_bell_sums<T: Scalar>(h: &[T], r: usize) -> Result<Vec<T>> {
    check_order(r)?;
    if h.len() < r + 1 {
        return Err(DixonError::Length {
            expected: r + 1,
            got: h.len(),
        });
    }
    let mut sums = vec![T::zero(); r + 1];
    if r == 0 {
        sums[0] = T::one();
        return Ok(sums);
    }
    for p in cached(r) {
        let mut term = T::one();
        let mut denom = 1.0;
        for (j, bj) in p.parts() {
            term = term * powu(h[j], bj);
            denom *= factorial(bj as usize);
        }
        sums[p.l] += term * (1.0 / denom);
    }
    Ok(sums)
}

/// Taylor coefficient `[u^r]` of `(Σ_j h[j] u^j)^n`, through the Faà di Bruno
/// sum. Terms with more parts than `n` vanish.
pub fn power_taylor_coeff<T: Scalar>(h: &[T], n: usize, r: usize) -> Result<T> {
    let sums = partial_bell_sums(h, r)?;
    Ok(combine_bell_sums(&sums, h[0], n))
}

/// `Σ_l n!/(n-l)! · g^{n-l} · S[l]`
pub fn combine_bell_sums<T: Scalar>(sums: &[T], g: T, n: usize) -> T {
    let mut acc = T::zero();
    let mut falling = 1.0; // n!/(n-l)!
    for (l, &s) in sums.iter().enumerate() {
        if l > n {
            break;
        }
        if l > 0 {
            falling *= (n - l + 1) as f64;
        }
        acc += s * powu(g, (n - l) as u32) * falling;
    }
    acc
}

/// `r`-th derivative of `[g(s)]^n` given `g_derivs = (g, g', …, g^{(r)})` at a
/// point:
/// `Σ r!·n!/((n-l)!·b₁!…b_r!) · g^{n-l} · Π_j (g^{(j)}/j!)^{b_j}`.
pub fn power_derivative<T: Scalar>(g_derivs: &[T], n: usize, r: usize) -> Result<T> {
    if n == 0 {
        return Err(DixonError::domain("power_derivative needs n >= 1"));
    }
    check_order(r)?;
    if g_derivs.len() < r + 1 {
        return Err(DixonError::Length {
            expected: r + 1,
            got: g_derivs.len(),
        });
    }
    let h: Vec<T> = g_derivs[..=r]
        .iter()
        .enumerate()
        .map(|(j, &d)| d * (1.0 / factorial(j)))
        .collect();
    Ok(power_taylor_coeff(&h, n, r)? * factorial(r))
}

/// All partial Bell sums up to order `r_max` at once: `table[r][l]` equals
/// `partial_bell_sums(h, r)[l]`.
///
/// Uses `S[r][l] = [u^r] h̃(u)^l / l!` with `h̃ = Σ_{j≥1} h[j] u^j`, building
/// the powers of `h̃` by truncated multiplication instead of walking every
/// partition. Real-valued; meant for the residue series, where it runs once
/// per pole.
pub fn partial_bell_table(h: &[f64], r_max: usize) -> Result<Vec<Vec<f64>>> {
    if h.len() < r_max + 1 {
        return Err(DixonError::Length {
            expected: r_max + 1,
            got: h.len(),
        });
    }
    let len = r_max + 1;
    let mut table = vec![vec![0.0; len]; len];
    table[0][0] = 1.0;
    // power[r] = [u^r] h̃^l / l!
    let mut power = vec![0.0; len];
    power[0] = 1.0;
    for l in 1..len {
        let mut next = vec![0.0; len];
        for (i, &p) in power.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for j in 1..len - i {
                next[i + j] += p * h[j];
            }
        }
        let inv = 1.0 / l as f64;
        for (r, v) in next.iter_mut().enumerate() {
            *v *= inv;
            table[r][l] = *v;
        }
        power = next;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// Euler's pentagonal-number recurrence.
    fn partition_numbers(n: usize) -> Vec<u64> {
        let mut p = vec![0u64; n + 1];
        p[0] = 1;
        for k in 1..=n {
            let mut acc: i64 = 0;
            let mut i = 1i64;
            loop {
                let g1 = (i * (3 * i - 1) / 2) as usize;
                if g1 > k {
                    break;
                }
                let sign = if i % 2 == 1 { 1 } else { -1 };
                acc += sign * p[k - g1] as i64;
                let g2 = (i * (3 * i + 1) / 2) as usize;
                if g2 <= k {
                    acc += sign * p[k - g2] as i64;
                }
                i += 1;
            }
            p[k] = acc as u64;
        }
        p
    }

    #[test]
    fn small_enumerations() {
        let one = enumerate_partitions(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].b, vec![1]);

        let three = enumerate_partitions(3).unwrap();
        let bs: Vec<_> = three.iter().map(|p| p.b.clone()).collect();
        assert_eq!(bs, vec![vec![3, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]);
        assert_eq!(enumerate_partitions(10).unwrap().len(), 42);
    }

    #[test]
    fn counts_match_partition_function() {
        let p = partition_numbers(MAX_ORDER);
        for r in 1..=MAX_ORDER {
            assert_eq!(cached(r).len() as u64, p[r], "r={r}");
        }
    }

    #[test]
    fn partition_invariants() {
        for r in 1..=20 {
            let parts = enumerate_partitions(r).unwrap();
            let mut weight_sum = 0.0;
            for p in &parts {
                let total: usize = p.parts().map(|(j, b)| j * b as usize).sum();
                assert_eq!(total, r);
                assert!(p.l >= 1 && p.l <= r);
                weight_sum += p.weight;
            }
            // Σ weights = Bell number; check a few known values
            let bell = [1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0, 4140.0];
            if r < bell.len() {
                assert_eq!(weight_sum, bell[r]);
            }
        }
        assert!(matches!(enumerate_partitions(41), Err(DixonError::Size(_))));
    }

    #[test]
    fn degenerate_and_product_rule() {
        let g = [2.0, 3.0, 5.0];
        assert_eq!(power_derivative(&g[..2], 1, 1).unwrap(), 3.0);
        // d²/ds² g² = 2 g g'' + 2 g'²
        assert_eq!(
            power_derivative(&g, 2, 2).unwrap(),
            2.0 * 2.0 * 5.0 + 2.0 * 9.0
        );
        assert_eq!(power_derivative(&g, 3, 0).unwrap(), 8.0);
        assert!(matches!(
            power_derivative(&g, 2, 3),
            Err(DixonError::Length { .. })
        ));
    }

    #[test]
    fn exponential_case() {
        for &c in &[0.0f64, 0.3] {
            let e = c.exp();
            let g = vec![e; 7];
            for n in 1..=5usize {
                for r in 0..=6usize {
                    let got = power_derivative(&g, n, r).unwrap();
                    let want = (n as f64).powi(r as i32) * (n as f64 * c).exp();
                    assert!((got - want).abs() <= 1e-12 * want, "n={n} r={r}");
                }
            }
        }
    }

    #[test]
    fn monomial_case() {
        let mut g = vec![0.0; 9];
        g[0] = 2.0;
        g[1] = 1.0;
        for n in 1..=6usize {
            for r in 0..=8usize {
                let got = power_derivative(&g, n, r).unwrap();
                let want = if r <= n {
                    factorial(n) / factorial(n - r) * 2f64.powi((n - r) as i32)
                } else {
                    0.0
                };
                assert!((got - want).abs() <= 1e-12 * want.max(1.0), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn complex_values() {
        let g = [Complex64::new(1.0, 1.0), Complex64::new(0.5, -2.0)];
        // d/ds g³ = 3 g² g'
        let want = g[0] * g[0] * g[1] * 3.0;
        let got = power_derivative(&g, 3, 1).unwrap();
        assert!((got - want).norm() < 1e-14);
    }

    fn naive_power(h: &[f64], n: usize) -> Vec<f64> {
        let mut acc = vec![0.0; h.len()];
        acc[0] = 1.0;
        for _ in 0..n {
            let mut next = vec![0.0; h.len()];
            for (i, &ai) in acc.iter().enumerate() {
                for (j, &hj) in h.iter().enumerate().take(h.len() - i) {
                    next[i + j] += ai * hj;
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn bell_table_matches_enumeration() {
        let h: Vec<f64> = (0..16).map(|j| ((j as f64) * 0.7).sin() + 0.1).collect();
        let table = partial_bell_table(&h, 15).unwrap();
        for r in 0..=15 {
            let sums = partial_bell_sums(&h, r).unwrap();
            for l in 0..=r {
                let scale = sums[l].abs().max(1e-300);
                assert!(
                    (table[r][l] - sums[l]).abs() <= 1e-13 * scale.max(1.0),
                    "r={r} l={l}"
                );
            }
        }
        assert!(partial_bell_table(&h, 16).is_err());
    }

    proptest! {
        #[test]
        fn taylor_coeff_matches_series_multiplication(
            h in prop::collection::vec(-2.0f64..2.0, 9),
            n in 1usize..7,
        ) {
            let direct = naive_power(&h, n);
            for r in 0..h.len() {
                let fdb = power_taylor_coeff(&h, n, r).unwrap();
                let scale = direct.iter().map(|x| x.abs()).fold(1.0, f64::max) * 10f64.powi(n as i32);
                prop_assert!((fdb - direct[r]).abs() <= 1e-12 * scale, "r={} {} vs {}", r, fdb, direct[r]);
            }
        }
    }
}
