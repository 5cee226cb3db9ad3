//! Self-checks for every module, grouped into suites.
//!
//! Each suite returns a list of [`Check`]s, a measured quantity against a
//! limit. `Quick` uses reduced depths; `Full` uses the depths of the
//! acceptance runs and takes a few minutes.

use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::combinat::enumerate_partitions;
use crate::error::{DixonError, Result};
use crate::mellin::{self, ContourSettings};
use crate::oracle::{nystrom_eval, nystrom_solve, picard_solve};
use crate::problem::{admissible, jacobi_nodes_on_interval, residual_supnorm, ProblemSpec};
use crate::series::{gamma_power_derivative, residue_interior, SeriesEngine, SeriesTruncation};
use crate::specfun::{
    digamma, gamma, laurent_coeff_bernoulli_form, laurent_coeffs, ln_gamma, LaurentTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = DixonError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(DixonError::domain(format!(
                "unknown validation level {s:?}"
            ))),
        }
    }
}

/// Deliberate faults, for confirming that the suites can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Hooks {
    /// Scale `c_{k,m}` by `1 + rel` in the Laurent table the residue suite uses.
    pub laurent_perturbation: Option<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub limit: f64,
    /// `true` when the value must exceed the limit.
    pub lower: bool,
    pub passed: bool,
}

impl Check {
    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            limit,
            lower: false,
            passed: value <= limit,
        }
    }

    pub fn at_least(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            limit,
            lower: true,
            passed: value >= limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
    /// Set when the suite stopped on an error.
    pub error: Option<String>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

pub const SUITES: [&str; 6] = [
    "specfun",
    "combinat",
    "problem",
    "fredholm_oracle",
    "mellin",
    "residue_series",
];

pub fn run_all(level: Level, hooks: &Hooks) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .map(|s| run_suite(s, level, hooks).expect("known suite"))
        .collect()
}

pub fn run_suite(name: &str, level: Level, hooks: &Hooks) -> Result<SuiteReport> {
    let (name, f): (&'static str, fn(Level, &Hooks) -> Result<Vec<Check>>) = match name {
        "specfun" => ("specfun", specfun_suite),
        "combinat" => ("combinat", combinat_suite),
        "problem" => ("problem", problem_suite),
        "fredholm_oracle" => ("fredholm_oracle", oracle_suite),
        "mellin" => ("mellin", mellin_suite),
        "residue_series" => ("residue_series", residue_suite),
        _ => return Err(DixonError::domain(format!("unknown suite {name:?}"))),
    };
    let t0 = Instant::now();
    let (checks, error) = match f(level, hooks) {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    Ok(SuiteReport {
        name,
        checks,
        error,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

/// `order`-th derivative of `f` at `x` from central differences with step
/// `h`, improved by two Richardson steps (error `O(h^6)`).
pub fn richardson_derivative<F: Fn(f64) -> f64>(f: F, x: f64, order: usize, h: f64) -> f64 {
    // central stencils of second order
    let stencil = |h: f64| -> f64 {
        let p = |k: f64| f(x + k * h);
        match order {
            0 => f(x),
            1 => (p(1.0) - p(-1.0)) / (2.0 * h),
            2 => (p(1.0) - 2.0 * p(0.0) + p(-1.0)) / (h * h),
            3 => (p(2.0) - 2.0 * p(1.0) + 2.0 * p(-1.0) - p(-2.0)) / (2.0 * h.powi(3)),
            4 => (p(2.0) - 4.0 * p(1.0) + 6.0 * p(0.0) - 4.0 * p(-1.0) + p(-2.0)) / h.powi(4),
            _ => f64::NAN,
        }
    };
    let d = [stencil(h), stencil(h / 2.0), stencil(h / 4.0)];
    let r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0];
    (16.0 * r1[1] - r1[0]) / 15.0
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fitted_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Largest relative error of `c_{0,m} = 1/m!` and `c_{1,m} = ψ(m+1)/m!`.
pub fn laurent_identity_error(table: &LaurentTable, m_max: usize) -> Result<(f64, f64)> {
    let (mut e0, mut e1) = (0.0f64, 0.0f64);
    for m in 0..=m_max {
        let inv_fact = 1.0 / gamma(m as f64 + 1.0)?;
        e0 = e0.max(rel(table.get(0, m)?, inv_fact));
        e1 = e1.max(rel(table.get(1, m)?, digamma(m as f64 + 1.0)? * inv_fact));
    }
    Ok((e0, e1))
}

/// Largest relative error of the truncated Laurent sum against `Γ(-m + u)`.
pub fn pole_reconstruction_error(table: &LaurentTable, m_max: usize, u: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in 0..=m_max {
        worst = worst.max(rel(table.gamma_near_pole(m, u), gamma(u - m as f64)?));
    }
    Ok(worst)
}

/// Largest relative gap between the Faà di Bruno derivatives of
/// `[Γ(a+1-s)]^n` at `s = -a-m` and finite differences, over `n, r ≤ order`.
pub fn faa_di_bruno_error(a: f64, m: usize, order: usize) -> Result<f64> {
    let s0 = -a - m as f64;
    let mut worst = 0.0f64;
    for n in 1..=order {
        let f = |s: f64| (n as f64 * ln_gamma(a + 1.0 - s).unwrap_or(f64::NAN)).exp();
        for r in 0..=order {
            let exact = gamma_power_derivative(n, r, m, a)?;
            let h = [0.0, 0.02, 0.04, 0.04, 0.06][r.min(4)];
            let fd = richardson_derivative(f, s0, r, h);
            worst = worst.max(rel(fd, exact));
        }
    }
    Ok(worst)
}

/// Largest gap between the pole sum of the `n`-th interior integrand and its
/// direct contour quadrature, over `n ≤ n_top` and the given `y`.
pub fn pole_sum_vs_quadrature(a: f64, n_top: usize, ys: &[f64]) -> Result<f64> {
    let s = ProblemSpec::real(a, 1.0, 0.1)?;
    let eng = SeriesEngine::new(
        &s,
        SeriesTruncation::new(&s, n_top, crate::series::M_MAX_LIMIT, 1e-9)?,
    )?;
    let c = ContourSettings::new(0.5).with_tol(1e-12);
    let mut worst = 0.0f64;
    for n in 1..=n_top {
        for &y in ys {
            let series = eng.neumann_term_interior(n, y)?;
            let quad = mellin::neumann_term_interior(n, y, a, &c)?;
            worst = worst.max(
                (series.value - quad.value.re)
                    .abs()
                    .max(quad.value.im.abs()),
            );
        }
    }
    Ok(worst)
}

/// Largest relative gap between the Leibniz-form residues (built on `table`)
/// and the factorized ones, over `n ≤ n_top`, `m ≤ m_top`.
pub fn literal_vs_engine_residues(
    a: f64,
    n_top: usize,
    m_top: usize,
    ys: &[f64],
    table: &LaurentTable,
) -> Result<f64> {
    let s = ProblemSpec::real(a, 1.0, 0.1)?;
    let eng = SeriesEngine::new(&s, SeriesTruncation::new(&s, n_top, m_top.max(1), 1e-9)?)?;
    let mut worst = 0.0f64;
    for n in 1..=n_top {
        for m in 0..=m_top {
            for &y in ys {
                let lit = residue_interior(n, m, y, &s, table)?;
                let fast = eng.residue_interior(n, m, y)?;
                worst = worst.max((lit - fast).abs() / fast.abs().max(1e-300));
            }
        }
    }
    Ok(worst)
}

fn specfun_suite(level: Level, _: &Hooks) -> Result<Vec<Check>> {
    let m_top = if level == Level::Full { 10 } else { 6 };
    let t = laurent_coeffs(m_top, 12);
    let (e0, e1) = laurent_identity_error(&t, m_top)?;
    let mut out = vec![
        Check::at_most(format!("c_0,m = 1/m!, m <= {m_top}"), e0, 1e-12),
        Check::at_most(format!("c_1,m = psi(m+1)/m!, m <= {m_top}"), e1, 1e-12),
        Check::at_most(
            "Laurent sum vs gamma at -m + 0.05, m <= 6, k <= 12",
            pole_reconstruction_error(&laurent_coeffs(6, 12), 6, 0.05)?,
            1e-8,
        ),
    ];
    let mut worst = 0.0f64;
    for m in 0..=4 {
        for k in 0..=6 {
            worst = worst.max((laurent_coeff_bernoulli_form(k, m)? - t.get(k, m)?).abs());
        }
    }
    out.push(Check::at_most(
        "recursive vs Bernoulli-form coefficients, k <= 6, m <= 4",
        worst,
        1e-12,
    ));
    let mut worst = 0.0f64;
    for &x in &[0.3, 1.0, 2.5, 7.25, 30.0] {
        worst = worst.max((digamma(x + 1.0)? - digamma(x)? - 1.0 / x).abs());
        worst = worst.max((ln_gamma(x + 1.0)? - ln_gamma(x)? - x.ln()).abs());
    }
    out.push(Check::at_most(
        "digamma and ln gamma recurrences",
        worst,
        1e-13,
    ));
    Ok(out)
}

fn combinat_suite(level: Level, _: &Hooks) -> Result<Vec<Check>> {
    // p(r), r = 1..=12
    const PARTITIONS: [usize; 12] = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77];
    let mut bad = 0usize;
    for (i, &p) in PARTITIONS.iter().enumerate() {
        if enumerate_partitions(i + 1)?.len() != p {
            bad += 1;
        }
    }
    let mut out = vec![Check::at_most(
        "partition counts p(r), 1 <= r <= 12",
        bad as f64,
        0.0,
    )];
    let order = if level == Level::Full { 4 } else { 3 };
    for (a, m) in [(0.5, 1), (1.5, 0)] {
        out.push(Check::at_most(
            format!("Faa di Bruno vs finite differences, n, r <= {order}, a = {a}, m = {m}"),
            faa_di_bruno_error(a, m, order)?,
            1e-6,
        ));
    }
    Ok(out)
}

fn problem_suite(level: Level, _: &Hooks) -> Result<Vec<Check>> {
    let s = ProblemSpec::real(0.5, 1.0, 1.5)?;
    let bound = admissible(&s, 0.5)?.bound;
    let mut out = vec![Check::at_most(
        "bound at a = 1/2 equals pi/2",
        (bound - std::f64::consts::FRAC_PI_2).abs(),
        1e-10,
    )];
    let rejected = matches!(
        admissible(&ProblemSpec::real(0.5, 1.0, 1.6)?, 0.5),
        Err(DixonError::Inadmissible { .. })
    );
    out.push(Check::at_least(
        "lambda = 1.6 rejected at a = 1/2",
        rejected as u8 as f64,
        1.0,
    ));
    let (n_quad, n_check) = if level == Level::Full {
        (512, 41)
    } else {
        (128, 21)
    };
    let s = ProblemSpec::real(0.5, 1.0, 0.5)?;
    let (_, w) = jacobi_nodes_on_interval(&ProblemSpec::real(0.5, 2.0, 0.5)?, 64)?;
    let want = 2f64.powf(0.5) / 0.5;
    out.push(Check::at_most(
        "Jacobi weights sum to A^a/a",
        rel(w.iter().sum(), want),
        1e-12,
    ));
    let mut least = f64::INFINITY;
    for c in [0.5, 1.0, 2.0] {
        least = least.min(residual_supnorm(
            |_| Ok(Complex64::new(c, 0.0)),
            &s,
            n_quad,
            n_check,
        )?);
    }
    out.push(Check::at_least(
        "residual of constants, lambda = 0.5",
        least,
        1e-3,
    ));
    Ok(out)
}

fn oracle_suite(level: Level, _: &Hooks) -> Result<Vec<Check>> {
    let s = ProblemSpec::real(0.5, 1.0, 0.5)?;
    let (coarse_n, fine_n) = if level == Level::Full {
        (128, 512)
    } else {
        (64, 128)
    };
    let coarse = nystrom_solve(&s, coarse_n)?;
    let fine = nystrom_solve(&s, fine_n)?;
    let mut out = vec![Check::at_most(
        "Nystrom backward error",
        fine.backward_error,
        1e-12,
    )];
    let f0 = nystrom_eval(&fine, 0.0)?;
    out.push(Check::at_most(
        "Nystrom f(0) = 1 exactly",
        (f0 - 1.0).norm(),
        0.0,
    ));
    let pic = picard_solve(&s, coarse_n, 5000, 1e-14)?;
    let gap = coarse
        .f_values
        .iter()
        .zip(&pic.f_values)
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max);
    out.push(Check::at_most(
        format!("Picard vs Nystrom, n = {coarse_n}"),
        gap,
        1e-10,
    ));
    let mut gap = 0.0f64;
    for k in 0..=20 {
        let x = k as f64 / 20.0;
        gap = gap.max((nystrom_eval(&fine, x)? - nystrom_eval(&coarse, x)?).norm());
    }
    if level == Level::Full {
        out.push(Check::at_most(
            "Nystrom n = 128 vs 512 on 21 points",
            gap,
            1e-9,
        ));
        let r = residual_supnorm(|x| nystrom_eval(&fine, x), &s, 512, 41)?;
        out.push(Check::at_most("Nystrom residual, n_quad = 512", r, 1e-8));
    } else {
        // refinement should at least shrink the error the smaller grid makes
        let mut gap_half = 0.0f64;
        let half = nystrom_solve(&s, coarse_n / 2)?;
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            gap_half = gap_half.max((nystrom_eval(&coarse, x)? - nystrom_eval(&half, x)?).norm());
        }
        out.push(Check::at_most(
            "Nystrom refinement shrinks the change",
            gap,
            gap_half,
        ));
    }
    Ok(out)
}

fn mellin_suite(level: Level, _: &Hooks) -> Result<Vec<Check>> {
    let tol = 1e-12;
    // σ = 1.4 is admissible only for |λ| below about 0.17 at a = 1/2
    let weak = ProblemSpec::real(0.5, 1.0, 0.15)?;
    let (f1, _) = mellin::fa_exterior(&weak, &ContourSettings::new(1.2).with_tol(tol))?;
    let (f2, _) = mellin::fa_exterior(&weak, &ContourSettings::new(1.4).with_tol(tol))?;
    let mut out = vec![Check::at_most(
        "exterior f(A) at sigma = 1.2 vs 1.4, lambda = 0.15",
        (f1 - f2).norm(),
        1e-9,
    )];
    let s = ProblemSpec::real(0.5, 1.0, 0.5)?;
    let ce = ContourSettings::exterior_default(&s)?.with_tol(tol);
    let (fa, _) = mellin::fa_exterior(&s, &ce)?;
    let xs: Vec<f64> = if level == Level::Full {
        (0..=20).map(|k| 0.9 * k as f64 / 20.0).collect()
    } else {
        vec![0.1, 0.5, 0.9]
    };
    let mut gap = 0.0f64;
    for &x in &xs {
        let vals: Vec<Complex64> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&sig| {
                mellin::f_interior_mb(x, &s, fa, &ContourSettings::new(sig).with_tol(tol))
                    .map(|v| v.value)
            })
            .collect::<Result<_>>()?;
        gap = gap
            .max((vals[0] - vals[1]).norm())
            .max((vals[1] - vals[2]).norm());
    }
    out.push(Check::at_most(
        "interior f across sigma = 0.2, 0.5, 0.8",
        gap,
        1e-9,
    ));
    if level == Level::Full {
        let c = mellin::fa_closures(&s, &ce, &ContourSettings::new(0.5).with_tol(tol))?;
        out.push(Check::at_most(
            "f(A) exterior vs interior closure",
            (c.exterior - c.interior).norm(),
            1e-8,
        ));
        let grid = nystrom_solve(&s, 512)?;
        let r = residual_supnorm(
            |x| {
                Ok(
                    mellin::f_interior_mb(x, &s, fa, &ContourSettings::new(0.5).with_tol(tol))?
                        .value,
                )
            },
            &s,
            512,
            41,
        )?;
        out.push(Check::at_most(
            "contour solution residual, n_quad = 512",
            r,
            1e-6,
        ));
        let fan = nystrom_eval(&grid, 1.0)?;
        out.push(Check::at_most(
            "exterior f(A) vs Nystrom at A",
            (fa - fan).norm(),
            1e-6,
        ));
    }
    Ok(out)
}

fn residue_suite(level: Level, hooks: &Hooks) -> Result<Vec<Check>> {
    let ys = [0.1, 0.5, 0.9];
    let mut table = laurent_coeffs(12, 8);
    if let Some((k, m, r)) = hooks.laurent_perturbation {
        table.check_depth(k, m)?;
        table = table.with_perturbed(k, m, r);
    }
    let mut out = Vec::new();
    let n_top = if level == Level::Full { 4 } else { 3 };
    for a in [0.5, 1.5] {
        out.push(Check::at_most(
            format!("Leibniz vs factorized residues, n <= {n_top}, m <= 12, a = {a}"),
            literal_vs_engine_residues(a, n_top, 12, &ys, &table)?,
            1e-10,
        ));
    }
    let sets: &[f64] = if level == Level::Full {
        &[0.5, 1.5]
    } else {
        &[0.5]
    };
    for &a in sets {
        out.push(Check::at_most(
            format!("pole sums vs contour quadrature, n <= {n_top}, a = {a}"),
            pole_sum_vs_quadrature(a, n_top, &ys)?,
            1e-7,
        ));
    }
    // series solution against the contour solution
    let s = ProblemSpec::real(0.5, 1.0, 0.5)?;
    let eng = SeriesEngine::auto(&s, 1e-9, true)?;
    let ce = ContourSettings::exterior_default(&s)?.with_tol(1e-12);
    let ci = ContourSettings::new(0.5).with_tol(1e-12);
    let (fa, fa_err) = mellin::fa_exterior(&s, &ce)?;
    let xs: Vec<f64> = if level == Level::Full {
        (0..=20).map(|k| 0.9 * k as f64 / 20.0).collect()
    } else {
        vec![0.3, 0.9]
    };
    let mut gap = 0.0f64;
    for (x, r) in xs.iter().zip(eng.f_interior_many(&xs, fa, fa_err)) {
        gap = gap.max((r?.value - mellin::f_interior_mb(*x, &s, fa, &ci)?.value).norm());
    }
    out.push(Check::at_most(
        "series vs contour solution on [0, 0.9A]",
        gap,
        1e-7,
    ));
    let xe: Vec<f64> = if level == Level::Full {
        (0..11).map(|k| 1.1 + 8.9 * k as f64 / 10.0).collect()
    } else {
        vec![1.5, 4.0]
    };
    let mut gap = 0.0f64;
    for (x, r) in xe.iter().zip(eng.f_exterior_many(&xe, fa, fa_err)) {
        gap = gap.max((r?.value - mellin::f_exterior_mb(*x, &s, fa, &ce)?.value).norm());
    }
    out.push(Check::at_most(
        "series vs contour solution on [1.1A, 10A]",
        gap,
        1e-7,
    ));
    Ok(out)
}
