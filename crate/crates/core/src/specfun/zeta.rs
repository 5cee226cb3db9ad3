use super::bernoulli::bernoulli;
use crate::error::{DixonError, Result};

/// Number of Euler–Maclaurin correction terms.
const EM_TERMS: usize = 14;

/// Hurwitz zeta `ζ(s, x) = Σ_{k≥0} (x+k)^{-s}` for real `s > 1`, `x > 0`.
///
/// The first `N` terms are summed directly (smallest first), the remainder by
/// Euler–Maclaurin with the shift `N` chosen so that `x + N ≥ s + 2·EM_TERMS`.
/// With that shift each correction term is at least `(2π)²` times smaller than
/// the previous one.
pub fn hurwitz_zeta(s: f64, x: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(DixonError::domain(format!(
            "hurwitz_zeta needs s > 1, got {s}"
        )));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(DixonError::domain(format!(
            "hurwitz_zeta needs x > 0, got {x}"
        )));
    }
    let target = (s + 2.0 * EM_TERMS as f64).max(16.0);
    let n = if x >= target {
        0
    } else {
        (target - x).ceil() as usize
    };
    let z = x + n as f64;

    // Euler–Maclaurin tail, accumulated from its smallest term upward.
    // term_j = B_{2j}/(2j)! · s(s+1)…(s+2j-2) · z^{-s-2j+1}
    let mut corrections = [0.0; EM_TERMS];
    let zs = z.powf(-s);
    let mut rising = s; // s(s+1)…(s+2j-2)
    let mut fact = 2.0; // (2j)!
    let mut zpow = zs / z; // z^{-s-2j+1}
    for (j, slot) in corrections.iter_mut().enumerate() {
        let jj = j + 1;
        *slot = bernoulli(2 * jj)? / fact * rising * zpow;
        let a = (2 * jj) as f64;
        rising *= (s + a - 1.0) * (s + a);
        fact *= (a + 1.0) * (a + 2.0);
        zpow /= z * z;
    }
    let mut acc = 0.0;
    for &c in corrections.iter().rev() {
        acc += c;
    }
    acc += 0.5 * zs;
    acc += z.powf(1.0 - s) / (s - 1.0);
    for k in (0..n).rev() {
        acc += (x + k as f64).powf(-s);
    }
    Ok(acc)
}

/// Riemann zeta at real `s > 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    hurwitz_zeta(s, 1.0)
}

/// Digamma `ψ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(DixonError::domain(format!("digamma needs x > 0, got {x}")));
    }
    let mut z = x;
    let mut shift = 0.0;
    while z < 12.0 {
        shift += 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut tail = 0.0;
    for j in (1..=10).rev() {
        tail = tail * inv2 + bernoulli(2 * j)? / (2 * j) as f64;
    }
    tail *= inv2;
    Ok(z.ln() - 0.5 / z - tail - shift)
}

/// Polygamma `ψ^{(n)}(x)` for `x > 0`; `n = 0` is the digamma function.
///
/// For `n ≥ 1` uses `ψ^{(n)}(x) = (-1)^{n+1} n! ζ(n+1, x)`.
pub fn polygamma(n: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(DixonError::domain(format!(
            "polygamma needs x > 0, got {x}"
        )));
    }
    if n == 0 {
        return digamma(x);
    }
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign * fact * hurwitz_zeta(n as f64 + 1.0, x)?)
}
