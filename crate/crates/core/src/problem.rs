//! Problem definition, kernels, admissibility and the residual operator.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{DixonError, Result};
use crate::quadrature::{gauss_jacobi, CompensatedSum};
use crate::specfun::beta_real;

/// Parameters `(a, A, λ)` of one equation instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemSpec {
    a: f64,
    #[serde(rename = "A")]
    big_a: f64,
    lambda: Complex64,
    b0: f64,
}

impl ProblemSpec {
    pub fn new(a: f64, big_a: f64, lambda: Complex64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(DixonError::domain(format!(
                "a must be positive and finite, got {a}"
            )));
        }
        if !(big_a >= 1.0) || !big_a.is_finite() {
            return Err(DixonError::domain(format!(
                "A must be finite and at least 1, got {big_a}"
            )));
        }
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(DixonError::domain("lambda must be finite"));
        }
        if lambda == Complex64::new(0.0, 0.0) {
            return Err(DixonError::domain("lambda must be nonzero"));
        }
        let b0 = beta_real(a, a + 1.0)?;
        Ok(Self {
            a,
            big_a,
            lambda,
            b0,
        })
    }

    /// Shorthand for a real coupling.
    pub fn real(a: f64, big_a: f64, lambda: f64) -> Result<Self> {
        Self::new(a, big_a, Complex64::new(lambda, 0.0))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Right endpoint `A` of the interval.
    pub fn big_a(&self) -> f64 {
        self.big_a
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// `B(a, a+1)`.
    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn lambda_is_real(&self) -> bool {
        self.lambda.im == 0.0
    }

    /// Same `a` and `A` with a different coupling.
    pub fn with_lambda(&self, lambda: Complex64) -> Result<Self> {
        Self::new(self.a, self.big_a, lambda)
    }

    pub fn admissible(&self, sigma: f64) -> Result<Admissibility> {
        admissible(self, sigma)
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a = {}, A = {}, lambda = {}",
            self.a, self.big_a, self.lambda
        )
    }
}

/// `h(x) = x^a / (1+x)^{1+2a}`.
pub fn kernel_h(x: f64, a: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(DixonError::domain(format!(
            "kernel_h needs x >= 0, got {x}"
        )));
    }
    if !(a > 0.0) {
        return Err(DixonError::domain(format!("kernel_h needs a > 0, got {a}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((a * x.ln() - (1.0 + 2.0 * a) * x.ln_1p()).exp())
}

/// Multiplier of `f(y)` under the integral:
/// `λ x^{a+1} y^{a-1} / (B(a,a+1) (x+y)^{1+2a})`.
pub fn fredholm_kernel(x: f64, y: f64, spec: &ProblemSpec) -> Result<Complex64> {
    if !(x > 0.0) || !(y > 0.0) {
        return Err(DixonError::domain(format!(
            "fredholm_kernel needs x, y > 0, got ({x}, {y})"
        )));
    }
    let a = spec.a;
    let ln = (a + 1.0) * x.ln() + (a - 1.0) * y.ln() - (1.0 + 2.0 * a) * (x + y).ln();
    Ok(spec.lambda * (ln.exp() / spec.b0))
}

/// The kernel without the `y^{a-1}` factor, for quadratures that carry it in the weight.
pub(crate) fn kernel_without_weight(x: f64, y: f64, spec: &ProblemSpec) -> Complex64 {
    let a = spec.a;
    let ln = (a + 1.0) * x.ln() - (1.0 + 2.0 * a) * (x + y).ln();
    spec.lambda * (ln.exp() / spec.b0)
}

/// Outcome of a successful admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub sigma: f64,
    /// `B(a, a+1) / B(a+σ, a+1-σ)`
    pub bound: f64,
    /// `bound - |λ|`
    pub margin: f64,
}

/// `B(a, a+1) / B(a+σ, a+1-σ)` for `σ ∈ (-a, a+1)`.
pub fn admissibility_bound(a: f64, sigma: f64) -> Result<f64> {
    if !(sigma > -a && sigma < a + 1.0) {
        return Err(DixonError::range(format!(
            "sigma = {sigma} outside ({}, {})",
            -a,
            a + 1.0
        )));
    }
    Ok(beta_real(a, a + 1.0)? / beta_real(a + sigma, a + 1.0 - sigma)?)
}

/// Checks `|λ| < B(a, a+1) / B(a+σ, a+1-σ)`.
pub fn admissible(spec: &ProblemSpec, sigma: f64) -> Result<Admissibility> {
    let bound = admissibility_bound(spec.a, sigma)?;
    let lambda_abs = spec.lambda.norm();
    if lambda_abs < bound {
        Ok(Admissibility {
            sigma,
            bound,
            margin: bound - lambda_abs,
        })
    } else {
        Err(DixonError::Inadmissible {
            sigma,
            bound,
            lambda_abs,
        })
    }
}

/// Largest `σ ∈ (1, a+1)` at which the coupling is still admissible, or `None`
/// when no abscissa right of 1 is (the bound is below 1 there, so this needs `|λ| < 1`).
pub fn exterior_sigma_limit(spec: &ProblemSpec) -> Result<Option<f64>> {
    let lam = spec.lambda.norm();
    if lam >= 1.0 {
        return Ok(None);
    }
    let a = spec.a;
    let (mut lo, mut hi) = (1.0, a + 1.0);
    // the bound decreases from 1 at σ = 1 to 0 at σ = a+1
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if admissibility_bound(a, mid)? > lam {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + a) {
            break;
        }
    }
    Ok(Some(lo))
}

/// Sup over `x_k = kA/n_check`, `k = 1..=n_check`, of
/// `|f(x) - 1 - λ x^{a+1}/B(a,a+1) ∫₀^A y^{a-1}(x+y)^{-1-2a} f(y) dy|`.
///
/// The integral uses an `n_quad`-point Gauss–Jacobi rule with weight `y^{a-1}`.
pub fn residual_supnorm<F>(
    f_eval: F,
    spec: &ProblemSpec,
    n_quad: usize,
    n_check: usize,
) -> Result<f64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    Ok(residual_profile(f_eval, spec, n_quad, n_check)?
        .into_iter()
        .map(|(_, r)| r)
        .fold(0.0, f64::max))
}

/// Pointwise residuals behind [`residual_supnorm`].
pub fn residual_profile<F>(
    f_eval: F,
    spec: &ProblemSpec,
    n_quad: usize,
    n_check: usize,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<Complex64>,
{
    residual_profile_many(
        |xs| xs.iter().map(|&x| f_eval(x)).collect(),
        spec,
        n_quad,
        n_check,
    )
}

/// [`residual_profile`] for evaluators that work on many points at once.
pub fn residual_profile_many<F>(
    f_many: F,
    spec: &ProblemSpec,
    n_quad: usize,
    n_check: usize,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&[f64]) -> Result<Vec<Complex64>>,
{
    if n_quad < 8 || n_check < 8 {
        return Err(DixonError::Size(format!(
            "residual needs n_quad, n_check >= 8, got ({n_quad}, {n_check})"
        )));
    }
    let (ys, ws) = jacobi_nodes_on_interval(spec, n_quad)?;
    let big_a = spec.big_a;
    let xs: Vec<f64> = (1..=n_check)
        .map(|k| big_a * k as f64 / n_check as f64)
        .collect();
    let fy = f_many(&ys)?;
    let fx = f_many(&xs)?;
    if fy.len() != ys.len() || fx.len() != xs.len() {
        return Err(DixonError::Length {
            expected: ys.len() + xs.len(),
            got: fy.len() + fx.len(),
        });
    }
    let mut out = Vec::with_capacity(n_check);
    for (&x, &f_x) in xs.iter().zip(&fx) {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for ((&y, &w), &f) in ys.iter().zip(&ws).zip(&fy) {
            let t = kernel_without_weight(x, y, spec) * (w * f);
            re.add(t.re);
            im.add(t.im);
        }
        let integral = Complex64::new(re.value(), im.value());
        out.push((x, (f_x - 1.0 - integral).norm()));
    }
    Ok(out)
}

/// Gauss–Jacobi nodes on `(0, A)` for the weight `y^{a-1}`; weights include it.
pub fn jacobi_nodes_on_interval(spec: &ProblemSpec, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = gauss_jacobi(n, 0.0, spec.a - 1.0)?;
    let half = 0.5 * spec.big_a;
    let scale = half.powf(spec.a);
    let ys = rule.nodes.iter().map(|t| half * (1.0 + t)).collect();
    let ws = rule.weights.iter().map(|w| w * scale).collect();
    Ok((ys, ws))
}

/// The four solution methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nystrom,
    Picard,
    Mellin,
    Series,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Nystrom,
        Method::Picard,
        Method::Mellin,
        Method::Series,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nystrom => "nystrom",
            Method::Picard => "picard",
            Method::Mellin => "mellin",
            Method::Series => "series",
        }
    }

    /// Whether the method can evaluate `x > A`.
    pub fn supports_exterior(self) -> bool {
        matches!(self, Method::Mellin | Method::Series)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = DixonError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nystrom" => Ok(Method::Nystrom),
            "picard" => Ok(Method::Picard),
            "mellin" => Ok(Method::Mellin),
            "series" => Ok(Method::Series),
            other => Err(DixonError::domain(format!("unknown method '{other}'"))),
        }
    }
}

/// Values of one method on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub method: Method,
    pub xs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub est_error: Vec<f64>,
    pub meta: BTreeMap<String, String>,
}

impl MethodResult {
    pub fn new(
        method: Method,
        xs: Vec<f64>,
        values: Vec<Complex64>,
        est_error: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != xs.len() || est_error.len() != xs.len() {
            return Err(DixonError::Length {
                expected: xs.len(),
                got: values.len().min(est_error.len()),
            });
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(DixonError::domain(
                "evaluation grid must be strictly increasing",
            ));
        }
        if est_error.iter().any(|e| !(*e >= 0.0)) {
            return Err(DixonError::domain("error estimates must be nonnegative"));
        }
        Ok(Self {
            method,
            xs,
            values,
            est_error,
            meta: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    /// Indices where `|Im f| > 10 · est_error` (meaningful for real `λ` only).
    pub fn reality_violations(&self) -> Vec<usize> {
        self.values
            .iter()
            .zip(&self.est_error)
            .enumerate()
            .filter(|(_, (v, e))| v.im.abs() > 10.0 * **e)
            .map(|(i, _)| i)
            .collect()
    }
}
