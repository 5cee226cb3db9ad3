use serde::Serialize;

use super::{bernoulli, gamma, polygamma, riemann_zeta, series_exp, EULER_GAMMA};
use crate::error::{DixonError, Result};

/// `[Γ(x), Γ'(x), …, Γ^{(ν_max)}(x)]` for `x > 0`.
///
/// Built from `Γ^{(ν+1)} = Σ_{j≤ν} C(ν, j) Γ^{(j)} ψ^{(ν-j)}`. Overflows to
/// infinity once `Γ(x)` does (x ≳ 171); use [`gamma_taylor_normalized`] there.
pub fn gamma_derivs(x: f64, nu_max: usize) -> Result<Vec<f64>> {
    if !(x > 0.0) {
        return Err(DixonError::domain(format!(
            "gamma_derivs needs x > 0, got {x}"
        )));
    }
    let psi = (0..nu_max)
        .map(|n| polygamma(n, x))
        .collect::<Result<Vec<_>>>()?;
    let mut g = Vec::with_capacity(nu_max + 1);
    g.push(gamma(x)?);
    for nu in 0..nu_max {
        let mut binom = 1.0;
        let mut acc = 0.0;
        for j in 0..=nu {
            acc += binom * g[j] * psi[nu - j];
            binom = binom * (nu - j) as f64 / (j + 1) as f64;
        }
        g.push(acc);
    }
    Ok(g)
}

/// Taylor coefficients of `Γ(w + v) / Γ(w)` in `v`, `len` of them.
///
/// `Γ(w+v)/Γ(w) = exp(Σ_{k≥1} ψ^{(k-1)}(w) v^k / k!)`; the normalization keeps
/// the coefficients finite for any `w`, unlike [`gamma_derivs`].
pub fn gamma_taylor_normalized(w: f64, len: usize) -> Result<Vec<f64>> {
    if !(w > 0.0) {
        return Err(DixonError::domain(format!(
            "gamma_taylor_normalized needs w > 0, got {w}"
        )));
    }
    let mut b = vec![0.0; len];
    let mut fact = 1.0;
    for (k, slot) in b.iter_mut().enumerate().skip(1) {
        fact *= k as f64;
        *slot = polygamma(k - 1, w)? / fact;
    }
    Ok(series_exp(&b, len))
}

/// Derivatives of `1/Γ(w)` at `w = m + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecipGammaDerivs {
    pub m: usize,
    /// `d[ν] = (d/dw)^ν [1/Γ(w)]` at `w = m + 1`
    pub d: Vec<f64>,
}

/// Reciprocal power series of the Taylor expansion of `Γ` at `m + 1`.
pub fn recip_gamma_derivs(m: usize, nu_max: usize) -> Result<RecipGammaDerivs> {
    let g = gamma_derivs(m as f64 + 1.0, nu_max)?;
    let mut fact = 1.0;
    let mut t = Vec::with_capacity(nu_max + 1);
    for (k, gk) in g.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        t.push(gk / fact);
    }
    let mut r = vec![0.0; nu_max + 1];
    r[0] = 1.0 / t[0];
    for k in 1..=nu_max {
        let acc: f64 = (1..=k).map(|i| t[i] * r[k - i]).sum();
        r[k] = -acc / t[0];
    }
    let mut fact = 1.0;
    let d = r
        .iter()
        .enumerate()
        .map(|(k, rk)| {
            if k > 0 {
                fact *= k as f64;
            }
            rk * fact
        })
        .collect();
    Ok(RecipGammaDerivs { m, d })
}

/// Laurent coefficients of `Γ` at its poles:
/// `Γ(z) = (-1)^m / (z+m) · Σ_k c_{k,m} (z+m)^k` near `z = -m`.
///
/// Stored as `m! · c_{k,m}` so the table stays representable for pole indices
/// where `1/m!` underflows; [`LaurentTable::c`] undoes the scaling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentTable {
    m_max: usize,
    k_max: usize,
    /// `scaled[m][k] = m! · c_{k,m}`
    scaled: Vec<Vec<f64>>,
    ln_fact: Vec<f64>,
}

impl LaurentTable {
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `c_{k,m}`; underflows to zero for `m ≳ 170`.
    pub fn c(&self, k: usize, m: usize) -> f64 {
        self.scaled[m][k] * (-self.ln_fact[m]).exp()
    }

    /// `c_{k,m}` with a depth check.
    pub fn get(&self, k: usize, m: usize) -> Result<f64> {
        self.check_depth(k, m)?;
        Ok(self.c(k, m))
    }

    /// `m! · c_{k,m}` for `k = 0..=k_max`.
    pub fn scaled(&self, m: usize) -> &[f64] {
        &self.scaled[m]
    }

    /// `ln m!`
    pub fn ln_factorial(&self, m: usize) -> f64 {
        self.ln_fact[m]
    }

    pub fn check_depth(&self, k: usize, m: usize) -> Result<()> {
        if k > self.k_max || m > self.m_max {
            return Err(DixonError::TableDepth {
                need: format!("k = {k}, m = {m}"),
                have: format!("k_max = {}, m_max = {}", self.k_max, self.m_max),
            });
        }
        Ok(())
    }

    /// Partial Laurent sum `(-1)^m/u · Σ_{k≤k_max} c_{k,m} u^k`, an approximation
    /// of `Γ(-m + u)`.
    pub fn gamma_near_pole(&self, m: usize, u: f64) -> f64 {
        let row = &self.scaled[m];
        let mut acc = 0.0;
        for &ck in row.iter().rev() {
            acc = acc * u + ck;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sign * acc * (-self.ln_fact[m]).exp() / u
    }

    /// Copy of the table with `c_{k,m}` scaled by `1 + rel`. Used by the
    /// validation suite to confirm that the residue checks notice a bad
    /// coefficient.
    pub fn with_perturbed(mut self, k: usize, m: usize, rel: f64) -> Self {
        self.scaled[m][k] *= 1.0 + rel;
        self
    }
}

/// Build `c_{k,m}` for `m ≤ m_max`, `k ≤ k_max`.
///
/// With `u = z + m`, the functional equation gives
/// `Σ_k m!·c_{k,m} u^k = Γ(1+u) · Π_{j=1..m} (1 - u/j)^{-1}`, where
/// `Γ(1+u) = exp(-γu + Σ_{k≥2} (-1)^k ζ(k) u^k / k)`. Each extra factor is a
/// geometric series, so row `m` follows from row `m-1` by
/// `row_m[k] = row_{m-1}[k] + row_m[k-1] / m`.
pub fn laurent_coeffs(m_max: usize, k_max: usize) -> LaurentTable {
    let len = k_max + 1;
    let mut b = vec![0.0; len];
    if len > 1 {
        b[1] = -EULER_GAMMA;
    }
    for (k, slot) in b.iter_mut().enumerate().skip(2) {
        let z = riemann_zeta(k as f64).expect("zeta at integer k >= 2");
        *slot = if k % 2 == 0 { z } else { -z } / k as f64;
    }
    let mut row = series_exp(&b, len);
    let mut scaled = Vec::with_capacity(m_max + 1);
    let mut ln_fact = Vec::with_capacity(m_max + 1);
    scaled.push(row.clone());
    ln_fact.push(0.0);
    for m in 1..=m_max {
        let inv = 1.0 / m as f64;
        for k in 1..len {
            row[k] += row[k - 1] * inv;
        }
        scaled.push(row.clone());
        ln_fact.push(ln_fact[m - 1] + (m as f64).ln());
    }
    LaurentTable {
        m_max,
        k_max,
        scaled,
        ln_fact,
    }
}

/// `c_{k,m}` from the Bernoulli-number representation
/// `c_{k,m} = Σ_ν (-1)^{(ν+k)/2-1} (2^{k-ν}-2) B_{k-ν} π^{k-ν} d_{ν,m} / (ν! (k-ν)!)`.
///
/// The sign exponent is an integer exactly when `k - ν` is even; for odd
/// `k - ν` the factor `(2^{k-ν}-2) B_{k-ν}` vanishes, so those terms are
/// skipped. Kept as an independent check on [`laurent_coeffs`].
pub fn laurent_coeff_bernoulli_form(k: usize, m: usize) -> Result<f64> {
    let d = recip_gamma_derivs(m, k)?.d;
    let pi = std::f64::consts::PI;
    let mut acc = 0.0;
    let mut nu_fact = 1.0;
    for nu in 0..=k {
        if nu > 0 {
            nu_fact *= nu as f64;
        }
        let j = k - nu;
        if j % 2 == 1 {
            continue;
        }
        let mut j_fact = 1.0;
        for i in 2..=j {
            j_fact *= i as f64;
        }
        let exponent = (nu + k) / 2;
        // (-1)^{exponent - 1}
        let sign = if exponent % 2 == 1 { 1.0 } else { -1.0 };
        let weight = (2f64.powi(j as i32) - 2.0) * bernoulli(j)? * pi.powi(j as i32);
        acc += sign * weight * d[nu] / (nu_fact * j_fact);
    }
    Ok(acc)
}
