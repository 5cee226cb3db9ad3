//! Gauss rules and compensated summation.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{DixonError, Result};
use crate::specfun::ln_gamma;

/// Nodes and weights of an interpolatory rule on `[-1, 1]` (or a mapped interval).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Legendre `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// The 16-point Legendre rule used for contour panels.
pub fn legendre16() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Jacobi `P_n^{(α,β)}(x)` and `P_{n-1}^{(α,β)}(x)`.
fn jacobi_pair(n: usize, alpha: f64, beta: f64, x: f64) -> (f64, f64) {
    let ab = alpha + beta;
    let mut p0 = 1.0;
    if n == 0 {
        return (p0, 0.0);
    }
    let mut p1 = 0.5 * (alpha - beta + (ab + 2.0) * x);
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + ab;
        let a1 = 2.0 * kf * (kf + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (c * (c - 2.0) * x + alpha * alpha - beta * beta);
        let a3 = 2.0 * (kf + alpha - 1.0) * (kf + beta - 1.0) * c;
        let p2 = (a2 * p1 - a3 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn jacobi_derivative(n: usize, alpha: f64, beta: f64, x: f64, pn: f64, pn1: f64) -> f64 {
    let nf = n as f64;
    let c = 2.0 * nf + alpha + beta;
    (nf * ((alpha - beta) - c * x) * pn + 2.0 * (nf + alpha) * (nf + beta) * pn1)
        / (c * (1.0 - x * x))
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix by implicit QL with Wilkinson shifts. `off[i]` couples rows `i` and
/// `i+1`; the last entry is ignored.
fn tridiagonal_eigen(mut diag: Vec<f64>, mut off: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut z = vec![0.0; n];
    if n == 0 {
        return Ok((diag, z));
    }
    z[0] = 1.0;
    off.resize(n, 0.0);
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(DixonError::non_convergence(
                    "tridiagonal QL",
                    format!("eigenvalue {l} after 60 sweeps"),
                ));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok((diag, z))
}

/// `n`-point Gauss–Jacobi rule for the weight `(1-x)^α (1+x)^β` on `[-1, 1]`.
///
/// Golub–Welsch on the Jacobi matrix gives starting nodes; each node is then
/// polished by Newton on `P_n^{(α,β)}` and the weights are recomputed from
/// `w_i = Γ(n+α+1)Γ(n+β+1)/(Γ(n+α+β+1) n!) · 2^{α+β+1} / ((1-x_i²) P_n'(x_i)²)`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if n == 0 {
        return Err(DixonError::Size("Gauss–Jacobi rule needs n >= 1".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(DixonError::domain(format!(
            "Gauss–Jacobi needs alpha, beta > -1, got ({alpha}, {beta})"
        )));
    }
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        let c = 2.0 * kf + ab;
        let a = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / (c * (c + 2.0))
        };
        diag.push(a);
        let k1 = kf + 1.0;
        let c1 = 2.0 * k1 + ab;
        let num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab);
        let den = c1 * c1 * (c1 + 1.0) * (c1 - 1.0);
        off.push((num / den).sqrt());
    }
    let (mut nodes, _) = tridiagonal_eigen(diag, off)?;
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));

    let ln_const = ln_gamma(n as f64 + alpha + 1.0)? + ln_gamma(n as f64 + beta + 1.0)?
        - ln_gamma(n as f64 + ab + 1.0)?
        - ln_gamma(n as f64 + 1.0)?
        + (ab + 1.0) * std::f64::consts::LN_2;
    let scale = ln_const.exp();

    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (pn, pn1) = jacobi_pair(n, alpha, beta, *x);
            let dp = jacobi_derivative(n, alpha, beta, *x, pn, pn1);
            let dx = pn / dp;
            if !dx.is_finite() || dx.abs() > 1e-6 {
                break;
            }
            *x -= dx;
            if dx.abs() < 1e-17 {
                break;
            }
        }
        let (pn, pn1) = jacobi_pair(n, alpha, beta, *x);
        let dp = jacobi_derivative(n, alpha, beta, *x, pn, pn1);
        weights.push(scale / ((1.0 - *x * *x) * dp * dp));
    }
    Ok(GaussRule { nodes, weights })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of complex values, componentwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::beta_real;

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = gauss_legendre(16);
        for k in 0..32 {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(k))
                .sum();
            let want = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            assert!((got - want).abs() < 1e-14, "k={k}: {got}");
        }
    }

    #[test]
    fn jacobi_weight_sum_matches_beta_integral() {
        for &(alpha, beta) in &[(0.0, -0.5), (0.0, 0.5), (0.0, -0.7), (1.5, 0.3), (0.0, 1.5)] {
            for &n in &[1usize, 7, 64, 512] {
                let rule = gauss_jacobi(n, alpha, beta).unwrap();
                let sum: f64 = rule.weights.iter().sum();
                let mu0 =
                    2f64.powf(alpha + beta + 1.0) * beta_real(alpha + 1.0, beta + 1.0).unwrap();
                assert!(
                    (sum - mu0).abs() <= 1e-12 * mu0,
                    "n={n} ({alpha},{beta}): {sum} vs {mu0}"
                );
                assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
                assert!(rule.weights.iter().all(|&w| w > 0.0));
            }
        }
    }

    #[test]
    fn jacobi_integrates_moments_exactly() {
        // ∫ (1+x)^{β} x^k with α = 0 against the same rule at high degree
        let beta = -0.5;
        let rule = gauss_jacobi(20, 0.0, beta).unwrap();
        let reference = gauss_jacobi(80, 0.0, beta).unwrap();
        for k in 0..39 {
            let q = |r: &GaussRule| -> f64 {
                r.nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(k))
                    .sum()
            };
            assert!(
                (q(&rule) - q(&reference)).abs() < 1e-12,
                "k={k}: {} {}",
                q(&rule),
                q(&reference)
            );
        }
    }

    #[test]
    fn beta_integral_identity() {
        // ∫₀^∞ x^{a-1}(1+x)^{-1-2a} dx with x = t/(1-t) becomes ∫₀¹ t^{a-1}(1-t)^a dt;
        // on [-1,1] that is the Jacobi weight with α = a, β = a - 1 times 2^{-2a}.
        for &a in &[0.3, 0.5, 1.0, 2.5] {
            let rule = gauss_jacobi(32, a, a - 1.0).unwrap();
            let q: f64 = rule.weights.iter().sum::<f64>() * 2f64.powf(-2.0 * a);
            let b = beta_real(a, a + 1.0).unwrap();
            assert!((q - b).abs() <= 1e-10 * b, "a={a}: {q} vs {b}");
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-14).abs() < 1e-27, "{}", s.value());
    }
}
