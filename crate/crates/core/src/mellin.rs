//! Mellin–Barnes contour quadrature.
//!
//! With `R(s) = B(a+s, a+1-s) / (B(a,a+1) - λ B(a+s, a+1-s))` and `y = x/A`:
//!
//! ```text
//! interior, σ ∈ (-a, 1):  f(x) = 1 - λ f(A) (1/2π) ∫ R(σ+it) y^{1-s} / (1-s) dt
//! exterior, σ ∈ (1, a+1): f(x) = f(A) + λ f(A) (1/2π) ∫ R(σ+it) (1 - y^{1-s}) / (1-s) dt
//! closure:                f(A) = 1 / (1 + λ (1/2π) ∫ R(σ+it) / (1-s) dt)
//! ```
//!
//! Every integral is taken along the full line (no conjugate-symmetry folding)
//! with composite Gauss–Legendre panels accumulated outward from `t = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{DixonError, Result};
use crate::problem::{admissibility_bound, admissible, exterior_sigma_limit, ProblemSpec};
use crate::quadrature::{gauss_legendre, legendre16, ComplexSum, GaussRule};
use crate::specfun::{ln_gamma, log_gamma};

/// Smallest admissible distance of a contour from the pole at `s = 1`.
pub const POLE_GUARD: f64 = 1e-6;

/// Smallest admissibility margin accepted by [`kernel_ratio`].
pub const MIN_MARGIN: f64 = 1e-10;

/// A vertical contour `Re s = σ` and its quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSettings {
    pub sigma: f64,
    /// Hard cap on `|t|`; reaching it is a non-convergence error.
    pub t_max: f64,
    pub abs_tol: f64,
    /// Gauss–Legendre nodes per panel.
    pub panel: usize,
}

impl ContourSettings {
    pub const DEFAULT_T_MAX: f64 = 400.0;
    pub const DEFAULT_ABS_TOL: f64 = 1e-10;
    pub const DEFAULT_PANEL: usize = 16;

    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            t_max: Self::DEFAULT_T_MAX,
            abs_tol: Self::DEFAULT_ABS_TOL,
            panel: Self::DEFAULT_PANEL,
        }
    }

    /// `σ = 1/2`, where `B(a+σ, a+1-σ)` is smallest.
    pub fn interior_default() -> Self {
        Self::new(0.5)
    }

    /// `σ = min(1 + a/2, (1 + σ*)/2)` with `σ*` the right edge of the
    /// admissible part of `(1, a+1)`.
    pub fn exterior_default(spec: &ProblemSpec) -> Result<Self> {
        let limit = exterior_sigma_limit(spec)?.ok_or_else(|| DixonError::Inadmissible {
            sigma: 1.0,
            bound: 1.0,
            lambda_abs: spec.lambda().norm(),
        })?;
        let sigma = (1.0 + 0.5 * spec.a()).min(0.5 * (1.0 + limit));
        Ok(Self::new(sigma))
    }

    pub fn with_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    fn check_common(&self, spec: &ProblemSpec) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.t_max > 0.0) || self.panel < 2 {
            return Err(DixonError::domain(format!(
                "invalid contour settings {self:?}"
            )));
        }
        if (self.sigma - 1.0).abs() < POLE_GUARD {
            return Err(DixonError::range(format!(
                "sigma = {} is within {POLE_GUARD} of the pole at s = 1",
                self.sigma
            )));
        }
        let adm = admissible(spec, self.sigma)?;
        if adm.margin < MIN_MARGIN {
            return Err(DixonError::Inadmissible {
                sigma: self.sigma,
                bound: adm.bound,
                lambda_abs: spec.lambda().norm(),
            });
        }
        Ok(())
    }

    /// Requires `σ ∈ (-a, 1)` and admissibility.
    pub fn check_interior(&self, spec: &ProblemSpec) -> Result<()> {
        if !(self.sigma > -spec.a() && self.sigma < 1.0) {
            return Err(DixonError::range(format!(
                "interior contour needs {} < sigma < 1, got {}",
                -spec.a(),
                self.sigma
            )));
        }
        self.check_common(spec)
    }

    /// Requires `σ ∈ (1, a+1)` and admissibility.
    pub fn check_exterior(&self, spec: &ProblemSpec) -> Result<()> {
        if !(self.sigma > 1.0 && self.sigma < spec.a() + 1.0) {
            return Err(DixonError::range(format!(
                "exterior contour needs 1 < sigma < {}, got {}",
                spec.a() + 1.0,
                self.sigma
            )));
        }
        self.check_common(spec)
    }
}

/// A contour integral `(1/2π) ∫ g(σ+it) dt` with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourValue {
    pub value: Complex64,
    pub est_error: f64,
    /// Panels used on both sides together
    pub panels: usize,
    /// Largest `|t|` reached
    pub t_end: f64,
}

/// A solution value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MellinValue {
    pub value: Complex64,
    pub est_error: f64,
    pub panels: usize,
}

/// `B(a+s, a+1-s) / B(a, a+1)` through log-gamma.
pub(crate) fn beta_ratio(s: Complex64, spec: &ProblemSpec) -> Result<Complex64> {
    let a = spec.a();
    let ln = log_gamma(s + a)? + log_gamma(Complex64::new(a + 1.0, 0.0) - s)?
        - ln_gamma(a)?
        - ln_gamma(a + 1.0)?;
    Ok(ln.exp())
}

fn kernel_ratio_unchecked(s: Complex64, spec: &ProblemSpec) -> Result<Complex64> {
    let q = beta_ratio(s, spec)?;
    Ok(q / (1.0 - spec.lambda() * q))
}

/// `R(s) = B(a+s, a+1-s) / (B(a,a+1) - λ B(a+s, a+1-s))`.
pub fn kernel_ratio(s: Complex64, spec: &ProblemSpec) -> Result<Complex64> {
    let adm = admissible(spec, s.re)?;
    if adm.margin < MIN_MARGIN {
        return Err(DixonError::Inadmissible {
            sigma: s.re,
            bound: adm.bound,
            lambda_abs: spec.lambda().norm(),
        });
    }
    kernel_ratio_unchecked(s, spec)
}

/// Panel width: at most 1, at most twice the distance to the nearest
/// singularity off the line, and short enough to resolve `exp(-i t ln y)`.
fn panel_width(sigma: f64, a: f64, log_y: f64) -> f64 {
    let mut w: f64 = 1.0;
    w = w.min(2.0 * (sigma - 1.0).abs());
    w = w.min(2.0 * (sigma + a));
    w = w.min(2.0 * (a + 1.0 - sigma));
    if log_y != 0.0 {
        w = w.min(3.0 / log_y.abs());
    }
    w
}

/// Distance from `Re s = σ` to the real point where `|λ| B(a+σ', a+1-σ') / B(a, a+1)`
/// reaches 1. `1 / (1 - λ q(s))` has no pole closer to the line than this.
fn coupling_pole_gap(spec: &ProblemSpec, sigma: f64) -> f64 {
    let lam = spec.lambda().norm();
    let a = spec.a();
    if lam == 0.0 {
        return f64::INFINITY;
    }
    // the bound peaks at σ = 1/2 and falls to 0 at both ends
    let (mut inside, mut outside) = if sigma >= 0.5 {
        (sigma, a + 1.0)
    } else {
        (sigma, -a)
    };
    for _ in 0..60 {
        let mid = 0.5 * (inside + outside);
        match admissibility_bound(a, mid) {
            Ok(b) if b > lam => inside = mid,
            _ => outside = mid,
        }
    }
    (0.5 * (inside + outside) - sigma).abs()
}

fn panel_sum<G>(rule: &GaussRule, sigma: f64, t0: f64, t1: f64, g: &G) -> Result<Complex64>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let half = 0.5 * (t1 - t0);
    let mid = 0.5 * (t1 + t0);
    let mut acc = ComplexSum::new();
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc.add(g(Complex64::new(sigma, mid + half * x))? * (w * half));
    }
    Ok(acc.value())
}

/// `(1/2π) ∫_{-∞}^{∞} g(σ+it) dt` by symmetric outward panel accumulation.
///
/// `width` is the panel width. Stops once two consecutive panel pairs each
/// add less than `abs_tol/10`; the estimate is the last pair's contribution
/// plus a geometric tail extrapolated from the last two pairs.
pub fn line_integral<G>(settings: &ContourSettings, width: f64, g: G) -> Result<ContourValue>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    graded_line_integral(settings, width, f64::INFINITY, g)
}

/// [`line_integral`] with panels near `t = 0` shrunk to resolve a pole at
/// distance `gap` from `σ` on the real axis.
fn graded_line_integral<G>(
    settings: &ContourSettings,
    width: f64,
    gap: f64,
    g: G,
) -> Result<ContourValue>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let owned;
    let rule = if settings.panel == ContourSettings::DEFAULT_PANEL {
        legendre16()
    } else {
        owned = gauss_legendre(settings.panel);
        &owned
    };
    let sigma = settings.sigma;
    let small = settings.abs_tol / 10.0;
    let mut total = ComplexSum::new();
    let mut quiet = 0;
    let mut prev_mag = f64::INFINITY;
    let mut last_mag = f64::INFINITY;
    let mut t = 0.0;
    let mut panels = 0;
    while quiet < 2 {
        if t >= settings.t_max {
            return Err(DixonError::non_convergence(
                "contour quadrature",
                format!(
                    "reached |t| = {t} on Re s = {sigma}; last panel pair added {last_mag:.3e}"
                ),
            ));
        }
        let t1 = (t + width.min(2.0 * gap.max(t))).min(settings.t_max);
        let pair = panel_sum(rule, sigma, t, t1, &g)? + panel_sum(rule, sigma, -t1, -t, &g)?;
        panels += 2;
        total.add(pair);
        prev_mag = last_mag;
        last_mag = pair.norm() / (2.0 * std::f64::consts::PI);
        quiet = if last_mag < small { quiet + 1 } else { 0 };
        t = t1;
    }
    let q = if prev_mag > 0.0 {
        last_mag / prev_mag
    } else {
        0.0
    };
    let tail = if q < 1.0 {
        last_mag * q / (1.0 - q)
    } else {
        last_mag
    };
    Ok(ContourValue {
        value: total.value() / (2.0 * std::f64::consts::PI),
        est_error: last_mag + tail + 8.0 * f64::EPSILON * total.value().norm(),
        panels,
        t_end: t,
    })
}

fn y_of(x: f64, spec: &ProblemSpec) -> f64 {
    x / spec.big_a()
}

/// `J(y) = (1/2π) ∫ R(s) y^{1-s} / (1-s) dt` on the line of `contour`.
fn interior_j(y: f64, spec: &ProblemSpec, contour: &ContourSettings) -> Result<ContourValue> {
    let ly = y.ln();
    let width = panel_width(contour.sigma, spec.a(), ly);
    graded_line_integral(
        contour,
        width,
        coupling_pole_gap(spec, contour.sigma),
        |s| {
            let one_minus = Complex64::new(1.0, 0.0) - s;
            Ok(kernel_ratio_unchecked(s, spec)? * (one_minus * ly).exp() / one_minus)
        },
    )
}

/// Interior solution for `x ∈ [0, A]`; `f(0) = 1` exactly.
pub fn f_interior_mb(
    x: f64,
    spec: &ProblemSpec,
    fa: Complex64,
    contour: &ContourSettings,
) -> Result<MellinValue> {
    if !(0.0..=spec.big_a()).contains(&x) {
        return Err(DixonError::range(format!(
            "interior evaluation needs 0 <= x <= {}, got {x}",
            spec.big_a()
        )));
    }
    contour.check_interior(spec)?;
    if x == 0.0 {
        return Ok(MellinValue {
            value: Complex64::new(1.0, 0.0),
            est_error: 0.0,
            panels: 0,
        });
    }
    let j = interior_j(y_of(x, spec), spec, contour)?;
    let scale = (spec.lambda() * fa).norm();
    Ok(MellinValue {
        value: 1.0 - spec.lambda() * fa * j.value,
        est_error: scale * j.est_error,
        panels: j.panels,
    })
}

/// Exterior solution for `x ≥ A`; `f(A) = fa` exactly.
pub fn f_exterior_mb(
    x: f64,
    spec: &ProblemSpec,
    fa: Complex64,
    contour: &ContourSettings,
) -> Result<MellinValue> {
    if !(x >= spec.big_a()) || !x.is_finite() {
        return Err(DixonError::range(format!(
            "exterior evaluation needs x >= {}, got {x}",
            spec.big_a()
        )));
    }
    contour.check_exterior(spec)?;
    if x == spec.big_a() {
        return Ok(MellinValue {
            value: fa,
            est_error: 0.0,
            panels: 0,
        });
    }
    let ly = y_of(x, spec).ln();
    let width = panel_width(contour.sigma, spec.a(), ly);
    let j = graded_line_integral(
        contour,
        width,
        coupling_pole_gap(spec, contour.sigma),
        |s| {
            let one_minus = Complex64::new(1.0, 0.0) - s;
            Ok(kernel_ratio_unchecked(s, spec)? * (1.0 - (one_minus * ly).exp()) / one_minus)
        },
    )?;
    let scale = (spec.lambda() * fa).norm();
    Ok(MellinValue {
        value: fa + spec.lambda() * fa * j.value,
        est_error: scale * j.est_error,
        panels: j.panels,
    })
}

/// Both closures for `f(A)` and their disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaClosures {
    /// From the exterior contour, `1 / (1 + λ J)` with `σ ∈ (1, a+1)`
    pub exterior: Complex64,
    pub exterior_err: f64,
    pub sigma_exterior: f64,
    /// From the interior formula at `x = A`, `σ ∈ (-a, 1)`
    pub interior: Complex64,
    pub interior_err: f64,
    pub sigma_interior: f64,
    pub discrepancy: f64,
}

impl FaClosures {
    /// Whether the two closures agree within ten times their combined estimates.
    pub fn consistent(&self) -> bool {
        self.discrepancy <= 10.0 * (self.exterior_err + self.interior_err)
    }
}

fn closure(spec: &ProblemSpec, contour: &ContourSettings) -> Result<(Complex64, f64)> {
    let width = panel_width(contour.sigma, spec.a(), 0.0);
    let j = graded_line_integral(
        contour,
        width,
        coupling_pole_gap(spec, contour.sigma),
        |s| {
            let one_minus = Complex64::new(1.0, 0.0) - s;
            Ok(kernel_ratio_unchecked(s, spec)? / one_minus)
        },
    )?;
    let denom = 1.0 + spec.lambda() * j.value;
    if denom.norm() < 1e-300 {
        return Err(DixonError::Singular(format!(
            "closure denominator vanishes for {spec}"
        )));
    }
    let fa = 1.0 / denom;
    Ok((fa, spec.lambda().norm() * j.est_error * fa.norm_sqr()))
}

/// `f(A)` from the exterior contour only.
pub fn fa_exterior(spec: &ProblemSpec, contour: &ContourSettings) -> Result<(Complex64, f64)> {
    contour.check_exterior(spec)?;
    closure(spec, contour)
}

/// `f(A)` from the interior formula at `x = A`.
pub fn fa_interior(spec: &ProblemSpec, contour: &ContourSettings) -> Result<(Complex64, f64)> {
    contour.check_interior(spec)?;
    closure(spec, contour)
}

/// Computes `f(A)` both ways without judging the outcome.
pub fn fa_closures(
    spec: &ProblemSpec,
    exterior: &ContourSettings,
    interior: &ContourSettings,
) -> Result<FaClosures> {
    let (ext, ext_err) = fa_exterior(spec, exterior)?;
    let (int, int_err) = fa_interior(spec, interior)?;
    Ok(FaClosures {
        exterior: ext,
        exterior_err: ext_err,
        sigma_exterior: exterior.sigma,
        interior: int,
        interior_err: int_err,
        sigma_interior: interior.sigma,
        discrepancy: (ext - int).norm(),
    })
}

/// `f(A)` from the exterior contour, checked against the interior closure at
/// the default interior abscissa. Disagreement beyond ten times the combined
/// estimates is an error.
pub fn f_at_a(spec: &ProblemSpec, contour: &ContourSettings) -> Result<Complex64> {
    let c = fa_closures(
        spec,
        contour,
        &ContourSettings::interior_default().with_tol(contour.abs_tol),
    )?;
    if !c.consistent() {
        return Err(DixonError::Disagreement {
            what: "f(A) closures",
            first: format!("{} (exterior, sigma = {})", c.exterior, c.sigma_exterior),
            second: format!("{} (interior, sigma = {})", c.interior, c.sigma_interior),
            diff: c.discrepancy,
            allowed: 10.0 * (c.exterior_err + c.interior_err),
        });
    }
    Ok(c.exterior)
}

/// `f'(x) = -λ f(A)/(2π A) ∫ R(s) y^{-s} dt` for `x ∈ (0, A)`.
pub fn fprime_interior_mb(
    x: f64,
    spec: &ProblemSpec,
    fa: Complex64,
    contour: &ContourSettings,
) -> Result<MellinValue> {
    if !(x > 0.0 && x < spec.big_a()) {
        return Err(DixonError::range(format!(
            "derivative needs 0 < x < {}, got {x}",
            spec.big_a()
        )));
    }
    contour.check_interior(spec)?;
    let ly = y_of(x, spec).ln();
    let width = panel_width(contour.sigma, spec.a(), ly);
    let j = graded_line_integral(
        contour,
        width,
        coupling_pole_gap(spec, contour.sigma),
        |s| Ok(kernel_ratio_unchecked(s, spec)? * (-s * ly).exp()),
    )?;
    let scale = (spec.lambda() * fa).norm() / spec.big_a();
    Ok(MellinValue {
        value: -spec.lambda() * fa * j.value / spec.big_a(),
        est_error: scale * j.est_error,
        panels: j.panels,
    })
}

/// `[Γ(a+s) Γ(a+1-s)]^n`.
fn gamma_pair_power(s: Complex64, a: f64, n: usize) -> Result<Complex64> {
    let ln = log_gamma(s + a)? + log_gamma(Complex64::new(a + 1.0, 0.0) - s)?;
    Ok((ln * n as f64).exp())
}

/// `(1/2πi) ∫ [Γ(a+s)Γ(a+1-s)]^n y^{1-s} / (1-s) ds` along `Re s = σ ∈ (-a, 1)`:
/// the `n`-th Neumann term of the interior solution before the `Λ^n` factor.
pub fn neumann_term_interior(
    n: usize,
    y: f64,
    a: f64,
    contour: &ContourSettings,
) -> Result<ContourValue> {
    if n == 0 {
        return Err(DixonError::Size("Neumann order starts at 1".into()));
    }
    if !(y > 0.0 && y <= 1.0) {
        return Err(DixonError::range(format!(
            "interior term needs 0 < y <= 1, got {y}"
        )));
    }
    if !(contour.sigma > -a && contour.sigma < 1.0) {
        return Err(DixonError::range(format!(
            "sigma = {} outside ({}, 1)",
            contour.sigma, -a
        )));
    }
    let ly = y.ln();
    let width = panel_width(contour.sigma, a, ly);
    line_integral(contour, width, |s| {
        let one_minus = Complex64::new(1.0, 0.0) - s;
        Ok(gamma_pair_power(s, a, n)? * (one_minus * ly).exp() / one_minus)
    })
}

/// `(1/2πi) ∫ [Γ(a+s)Γ(a+1-s)]^n y^{s} / s ds` along `Re s = σ ∈ (-a, 0)`, `y ≥ 1`:
/// the `x`-dependent `n`-th term of the exterior solution.
pub fn neumann_term_exterior(
    n: usize,
    y: f64,
    a: f64,
    contour: &ContourSettings,
) -> Result<ContourValue> {
    if n == 0 {
        return Err(DixonError::Size("Neumann order starts at 1".into()));
    }
    if !(y >= 1.0) || !y.is_finite() {
        return Err(DixonError::range(format!(
            "exterior term needs y >= 1, got {y}"
        )));
    }
    if !(contour.sigma > -a && contour.sigma < 0.0) {
        return Err(DixonError::range(format!(
            "sigma = {} outside ({}, 0)",
            contour.sigma, -a
        )));
    }
    let ly = y.ln();
    let mut width = panel_width(contour.sigma, a, ly);
    width = width.min(2.0 * contour.sigma.abs());
    line_integral(contour, width, |s| {
        Ok(gamma_pair_power(s, a, n)? * (s * ly).exp() / s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec(a: f64, big_a: f64, lam: f64) -> ProblemSpec {
        ProblemSpec::real(a, big_a, lam).unwrap()
    }

    #[test]
    fn closure_resolves_nearby_coupling_pole() {
        // σ = 1.4 sits 0.02 left of the real pole of 1/(1 - λq); value from
        // adaptive quadrature at 20 digits
        let s = spec(0.5, 1.0, 0.15);
        for sigma in [1.2, 1.3, 1.4] {
            let (fa, _) = fa_exterior(&s, &ContourSettings::new(sigma).with_tol(1e-12)).unwrap();
            assert!(
                (fa.re - 1.172_183_683_189_439_8).abs() < 1e-12,
                "sigma = {sigma}: {fa}"
            );
        }
    }

    #[test]
    fn kernel_ratio_at_half() {
        let s = spec(0.5, 1.0, 0.5);
        let r = kernel_ratio(Complex64::new(0.5, 0.0), &s).unwrap();
        assert_relative_eq!(r.re, 1.0 / (PI / 2.0 - 0.5), max_relative = 1e-13);
        assert!(r.im.abs() < 1e-15);
    }

    #[test]
    fn kernel_ratio_small_coupling_limit() {
        let s = spec(0.8, 1.0, 1e-12);
        let z = Complex64::new(0.3, 2.0);
        let r = kernel_ratio(z, &s).unwrap();
        let b = crate::specfun::beta(z + 0.8, Complex64::new(1.8, 0.0) - z).unwrap() / s.b0();
        assert!((r - b).norm() < 1e-10 * b.norm());
    }

    #[test]
    fn kernel_ratio_rejects_inadmissible_abscissa() {
        let s = spec(0.5, 1.0, 0.5);
        assert!(matches!(
            kernel_ratio(Complex64::new(1.4, 0.0), &s),
            Err(DixonError::Inadmissible { .. })
        ));
        assert!(matches!(
            kernel_ratio(Complex64::new(1.6, 0.0), &s),
            Err(DixonError::Range(_))
        ));
    }

    #[test]
    fn kernel_ratio_decay_matches_stirling() {
        // |R(σ+it)| ~ C |t|^{2a} e^{-π|t|}
        for &(a, sigma) in &[(0.5, 0.5), (1.0, 0.2), (2.5, 1.3)] {
            let s = spec(a, 1.0, 0.3);
            let mag = |t: f64| kernel_ratio(Complex64::new(sigma, t), &s).unwrap().norm();
            let predicted = (25.0f64 / 20.0).powf(2.0 * a) * (-PI * 5.0).exp();
            let observed = mag(25.0) / mag(20.0);
            assert!(
                (observed / predicted - 1.0).abs() < 0.1,
                "a={a}: {observed} vs {predicted}"
            );
            let c = mag(10.0) / (11.0f64.powf(2.0 * a) * (-PI * 10.0).exp());
            for &t in &[20.0, 40.0] {
                let bound = c * (1.0 + t as f64).powf(2.0 * a) * (-PI * t).exp();
                let m = mag(t);
                assert!(m <= 2.0 * bound && m >= 0.5 * bound, "a={a} t={t}");
            }
        }
    }

    #[test]
    fn line_integral_of_a_gaussian() {
        // (1/2π)∫ e^{-t²} dt = 1/(2√π)
        let c = ContourSettings::new(0.0);
        let v = line_integral(&c, 1.0, |s| Ok((-(s.im * s.im)).exp().into())).unwrap();
        assert_relative_eq!(v.value.re, 0.5 / PI.sqrt(), max_relative = 1e-14);
        assert!(v.est_error < 1e-10);
    }

    #[test]
    fn line_integral_reports_non_convergence() {
        let mut c = ContourSettings::new(0.0);
        c.t_max = 20.0;
        let r = line_integral(&c, 1.0, |s| {
            Ok(Complex64::new(1.0 / (1.0 + s.im.abs()), 0.0))
        });
        assert!(matches!(r, Err(DixonError::NonConvergence { .. })));
    }

    #[test]
    fn mellin_image_of_h_is_the_beta_function() {
        // ∫₀^∞ x^{s-1} h(x) dx = B(a+s, a+1-s) at a = 0.5, s = 0.3 + 2i. With x = e^u the
        // integrand e^{u(a+s)} (1+e^u)^{-1-2a} is analytic in |Im u| < π and decays
        // exponentially both ways, so the trapezoid rule converges geometrically.
        let a = 0.5;
        let s = Complex64::new(0.3, 2.0);
        let h = 0.02;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -2500..=2500 {
            let u = k as f64 * h;
            acc += (s * u + a * u).exp() * (-(1.0 + 2.0 * a) * u.exp().ln_1p()).exp();
        }
        acc *= h;
        let b = crate::specfun::beta(s + a, Complex64::new(a + 1.0, 0.0) - s).unwrap();
        assert!((acc - b).norm() < 1e-9 * b.norm(), "{acc} vs {b}");
    }

    #[test]
    fn exterior_default_sigma_is_admissible() {
        for &(a, lam) in &[(0.5, 0.5), (1.0, 0.4), (2.5, 0.5), (0.5, 0.9)] {
            let s = spec(a, 1.0, lam);
            let c = ContourSettings::exterior_default(&s).unwrap();
            assert!(
                c.check_exterior(&s).is_ok(),
                "a={a} lambda={lam} sigma={}",
                c.sigma
            );
        }
        assert!(ContourSettings::exterior_default(&spec(0.5, 1.0, 1.2)).is_err());
    }

    #[test]
    fn contour_checks() {
        let s = spec(0.5, 1.0, 0.5);
        assert!(ContourSettings::new(1.0 - 1e-7).check_interior(&s).is_err());
        assert!(ContourSettings::new(-0.6).check_interior(&s).is_err());
        assert!(ContourSettings::new(1.1).check_interior(&s).is_err());
        assert!(ContourSettings::new(0.5).check_exterior(&s).is_err());
        assert!(ContourSettings::new(1.2).check_exterior(&s).is_ok());
        assert!(matches!(
            ContourSettings::new(1.4).check_exterior(&s),
            Err(DixonError::Inadmissible { .. })
        ));
    }

    #[test]
    fn interior_value_at_zero_is_one() {
        let s = spec(0.5, 1.0, 0.5);
        let v = f_interior_mb(
            0.0,
            &s,
            Complex64::new(0.9, 0.0),
            &ContourSettings::interior_default(),
        )
        .unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn interior_is_independent_of_the_abscissa() {
        let s = spec(0.5, 1.0, 0.5);
        let fa = Complex64::new(0.9, 0.0);
        for &x in &[0.1, 0.5, 0.9] {
            let vals: Vec<_> = [0.2, 0.5, 0.8]
                .iter()
                .map(|&sg| {
                    f_interior_mb(x, &s, fa, &ContourSettings::new(sg))
                        .unwrap()
                        .value
                })
                .collect();
            assert!(
                (vals[0] - vals[1]).norm() < 1e-9 && (vals[1] - vals[2]).norm() < 1e-9,
                "x={x}: {vals:?}"
            );
        }
    }

    #[test]
    fn exterior_value_at_endpoint_is_fa() {
        let s = spec(1.0, 1.0, 0.4);
        let fa = Complex64::new(0.8, 0.0);
        let c = ContourSettings::exterior_default(&s).unwrap();
        assert_eq!(f_exterior_mb(1.0, &s, fa, &c).unwrap().value, fa);
        assert!(f_exterior_mb(0.5, &s, fa, &c).is_err());
    }

    #[test]
    fn real_coupling_gives_real_values() {
        let s = spec(1.0, 2.0, 0.4);
        let fa = fa_exterior(&s, &ContourSettings::exterior_default(&s).unwrap())
            .unwrap()
            .0;
        assert!(fa.im.abs() < 1e-14);
        for &x in &[0.3, 1.0, 1.9] {
            let v = f_interior_mb(x, &s, fa, &ContourSettings::interior_default()).unwrap();
            assert!(v.value.im.abs() <= 10.0 * v.est_error.max(1e-15), "{v:?}");
        }
    }

    #[test]
    fn closures_differ_by_the_residue_at_one() {
        // Moving the closure line across s = 1 picks up Res R(s)/(1-s) = -R(1)
        // = -1/(1-λ), so 1/f_int - 1/f_ext = λ/(1-λ).
        for &(a, lam) in &[(0.5, 0.5), (1.0, 0.4), (2.5, -0.3)] {
            let s = spec(a, 1.0, lam);
            let c = fa_closures(
                &s,
                &ContourSettings::exterior_default(&s).unwrap(),
                &ContourSettings::interior_default(),
            )
            .unwrap();
            let jump = 1.0 / c.interior - 1.0 / c.exterior;
            assert!((jump.re - lam / (1.0 - lam)).abs() < 1e-9, "a={a}: {jump}");
            assert!(!c.consistent());
            assert!(matches!(
                f_at_a(&s, &ContourSettings::exterior_default(&s).unwrap()),
                Err(DixonError::Disagreement { .. })
            ));
        }
    }

    #[test]
    fn closure_tends_to_one_for_small_coupling() {
        let s = spec(0.7, 1.0, 1e-9);
        let (fa, _) = fa_exterior(&s, &ContourSettings::exterior_default(&s).unwrap()).unwrap();
        assert!((fa - 1.0).norm() < 1e-8);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = spec(0.5, 1.0, 0.5);
        let fa = Complex64::new(0.9, 0.0);
        let c = ContourSettings::interior_default().with_tol(1e-13);
        let h = 1e-4;
        let fp = f_interior_mb(0.5 + h, &s, fa, &c).unwrap().value;
        let fm = f_interior_mb(0.5 - h, &s, fa, &c).unwrap().value;
        let fd = (fp - fm) / (2.0 * h);
        let d = fprime_interior_mb(0.5, &s, fa, &c).unwrap().value;
        assert!((d - fd).norm() < 1e-6 * d.norm(), "{d} vs {fd}");
    }

    #[test]
    fn derivative_vanishes_at_origin_at_the_first_pole_of_r() {
        // For a = 1/2, B(a+σ, a+1-σ)/B(a, a+1) = (1-2σ)/cos(πσ). With λ = 1/2 the
        // rightmost pole of R left of the contour solves (1-2σ)/cos(πσ) = 2, and
        // f'(x) behaves like x^{-σ₀} there, ahead of the x^a from Γ(a+s).
        let (mut lo, mut hi) = (-0.5f64 + 1e-9, 0.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (1.0 - 2.0 * mid) / (PI * mid).cos() > 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let expected = -lo;
        let s = spec(0.5, 1.0, 0.5);
        let fa = Complex64::new(0.9, 0.0);
        let c = ContourSettings::interior_default();
        let d1 = fprime_interior_mb(1e-6, &s, fa, &c).unwrap().value.norm();
        let d2 = fprime_interior_mb(1e-8, &s, fa, &c).unwrap().value.norm();
        assert!(d2 < d1);
        let slope = (d1 / d2).log10() / 2.0;
        assert!((slope - expected).abs() < 0.02, "{slope} vs {expected}");
    }

    #[test]
    fn first_neumann_term_is_the_integrated_kernel() {
        // d/dy of the n = 1 term is the inverse Mellin transform of Γ(2a+1) B(a+s, a+1-s),
        // i.e. Γ(2a+1) h(y); at a = 1/2, ∫₀^y √t/(1+t)² dt = atan(√y) - √y/(1+y).
        for &y in &[0.1f64, 0.4, 1.0] {
            let want = y.sqrt().atan() - y.sqrt() / (1.0 + y);
            for &sigma in &[0.2, 0.7] {
                let v = neumann_term_interior(1, y, 0.5, &ContourSettings::new(sigma)).unwrap();
                assert!(
                    (v.value.re - want).abs() < 1e-10,
                    "y={y} sigma={sigma}: {} vs {want}",
                    v.value
                );
                assert!(v.value.im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn first_exterior_term_matches_the_kernel_tail() {
        // d/dy of the exterior n = 1 term is Γ(2a+1) h(1/y)/y and the term vanishes
        // as y → ∞, so at a = 1/2 it equals -(atan(√u) + √u/(1+u)) with u = 1/y.
        let c = ContourSettings::new(-0.25);
        for &y in &[1.0f64, 2.0, 5.0, 100.0] {
            let u = 1.0 / y;
            let want = -(u.sqrt().atan() + u.sqrt() / (1.0 + u));
            let got = neumann_term_exterior(1, y, 0.5, &c).unwrap().value;
            assert!(
                (got.re - want).abs() < 1e-10 && got.im.abs() < 1e-13,
                "y={y}: {got} vs {want}"
            );
        }
    }
}
