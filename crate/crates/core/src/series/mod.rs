//! Neumann series of the contour solution, evaluated by residues.
//!
//! With `H(s) = Γ(a+s) Γ(a+1-s)`, `Λ = λ / (Γ(a) Γ(a+1))` and `y = x/A`,
//!
//! ```text
//! interior: f(x) = 1 - f(A) Σ_n Λ^n I_n(y),  I_n(y) = (1/2πi) ∫ H^n y^{1-s} / (1-s) ds
//! exterior: f(x) = 1 - f(A) Σ_n Λ^n Y_n(y),  Y_n(y) = (1/2πi) ∫ H^n y^{s} / s ds
//! ```
//!
//! `I_n` is taken on `Re s ∈ (-a, 1)`, `Y_n` on `Re s ∈ (-a, 0)`. Closing both
//! contours to the left leaves the order-`n` poles at `s = -a - m`; each
//! residue is a polynomial in `ln y`. The literal form built from Laurent
//! coefficients of `Γ` at `-m` and Taylor coefficients of `Γ` at
//! `2a + 1 + m` is [`residue_interior`]; the engine uses an equivalent
//! factorization that can be stepped from pole to pole.
//!
//! The pole terms of order `n` grow to roughly `(y^m m^{2a})^n` before they
//! decay, and their sum is far smaller, so a double-precision pass only
//! measures them and the sums themselves are carried in extended precision.

use num_complex::Complex64;
use serde::Serialize;

mod exact;

use exact::{exact_pole_sums, ExactRequest};

use crate::combinat::power_derivative;
use crate::error::{DixonError, Result};
use crate::problem::ProblemSpec;
use crate::quadrature::CompensatedSum;
use crate::specfun::{
    beta_real, digamma, gamma_derivs, hurwitz_zeta, ln_gamma, riemann_zeta, LaurentTable,
};

/// Deepest Neumann order the engine builds.
pub const MAX_NEUMANN: usize = 41;

/// Largest pole depth the automatic truncation will go to.
pub const M_MAX_LIMIT: usize = 60_000;

/// Ceiling on the extended working precision.
pub const MAX_BITS: usize = 8192;

/// Absolute accuracy aimed at by the single-order sums.
const TERM_TARGET: f64 = 1e-12;

/// Default target error.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Truncation of the double sum over Neumann order `n` and pole index `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTruncation {
    pub n_max: usize,
    pub m_max: usize,
    pub tol: f64,
    /// Interior Neumann ratio `|λ| B(a+½, a+½) / B(a, a+1)`.
    pub rho: f64,
    /// Exterior Neumann ratio `|λ|`; `None` when `|λ| ≥ 1`.
    pub rho_exterior: Option<f64>,
}

/// `|λ| B(a+½, a+½) / B(a, a+1)`
pub fn neumann_ratio(spec: &ProblemSpec) -> Result<f64> {
    let a = spec.a();
    Ok(spec.lambda().norm() * beta_real(a + 0.5, a + 0.5)? / spec.b0())
}

/// Smallest `n` with `rho^{n+1} / (1 - rho) ≤ tol / 2`.
pub fn neumann_depth(rho: f64, tol: f64) -> Option<usize> {
    if !(rho < 1.0) {
        return None;
    }
    if rho == 0.0 {
        return Some(1);
    }
    let mut n = 1usize;
    while rho.powi(n as i32 + 1) / (1.0 - rho) > tol / 2.0 {
        n += 1;
        if n > 100_000 {
            return None;
        }
    }
    Some(n)
}

impl SeriesTruncation {
    /// Explicit truncation; fails when the interior ratio is not below 1.
    pub fn new(spec: &ProblemSpec, n_max: usize, m_max: usize, tol: f64) -> Result<Self> {
        if n_max == 0 || n_max > MAX_NEUMANN {
            return Err(DixonError::Size(format!(
                "n_max must be in 1..={MAX_NEUMANN}, got {n_max}"
            )));
        }
        if !(tol > 0.0) {
            return Err(DixonError::domain(format!(
                "tol must be positive, got {tol}"
            )));
        }
        let rho = neumann_ratio(spec)?;
        if !(rho < 1.0) {
            return Err(DixonError::Inadmissible {
                sigma: 0.5,
                bound: spec.b0() / beta_real(spec.a() + 0.5, spec.a() + 0.5)?,
                lambda_abs: spec.lambda().norm(),
            });
        }
        let lam = spec.lambda().norm();
        Ok(Self {
            n_max,
            m_max,
            tol,
            rho,
            rho_exterior: (lam < 1.0).then_some(lam),
        })
    }

    /// Orders used inside `[0, A]`: the interior ratio is smaller than the
    /// exterior one, and orders past the tolerance only add rounding error.
    pub fn n_interior(&self) -> usize {
        neumann_depth(self.rho, self.tol).map_or(self.n_max, |n| n.min(self.n_max))
    }

    /// Geometric tail bound on the omitted interior orders.
    pub fn n_tail_interior(&self) -> f64 {
        self.rho.powi(self.n_interior() as i32 + 1) / (1.0 - self.rho)
    }

    /// Geometric tail bound on the omitted exterior orders.
    pub fn n_tail_exterior(&self) -> f64 {
        match self.rho_exterior {
            Some(r) => 2.0 * r.powi(self.n_max as i32 + 1) / (1.0 - r),
            None => f64::INFINITY,
        }
    }
}

fn log_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Interior,
    Exterior,
}

/// One Neumann order summed over poles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderSum {
    pub n: usize,
    pub value: f64,
    /// `Σ_m |term|`, the scale of the rounding error.
    pub abs_sum: f64,
    /// `ln abs_sum`, finite even when `abs_sum` overflows.
    pub ln_abs_sum: f64,
    pub max_term: f64,
    /// Extrapolated contribution of the poles past the last one summed.
    pub m_tail: f64,
    /// Rounding estimate of `value`.
    pub rounding: f64,
    /// Last pole whose term was above the cutoff.
    pub m_significant: usize,
    /// `Σ |term|` over the poles after `m_significant`.
    pub skipped: f64,
    /// Working precision of the extended pass, when one was used.
    pub extended_bits: Option<usize>,
}

impl OrderSum {
    pub fn est_error(&self) -> f64 {
        self.m_tail + self.rounding
    }
}

/// A series value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub est_error: f64,
    pub n_tail: f64,
    pub m_tail: f64,
    pub rounding: f64,
    /// Largest single `|Λ^n × residue|` that entered the sum.
    pub max_term: f64,
}

impl SeriesValue {
    fn exact(value: Complex64) -> Self {
        Self {
            value,
            est_error: 0.0,
            n_tail: 0.0,
            m_tail: 0.0,
            rounding: 0.0,
            max_term: 0.0,
        }
    }
}

/// Pole data in double precision, stepped one pole at a time.
///
/// With `u = s + a + m` and `w₀ = 2a + 1`, `u·H(s) = (-1)^m Γ(w₀) r_m g_m(u)`
/// where `r_m = Γ(w₀+m) / (Γ(w₀) m!)` and `ln g_m` has Taylor coefficients
/// `p_k / k`, `p_1 = ψ(m+1) - ψ(w₀+m)`, `p_k = (-1)^k ζ(k, m+1) + ζ(k, w₀+m)`.
#[derive(Debug, Clone)]
struct PoleWalk {
    w0: f64,
    m: usize,
    ln_r: f64,
    p: Vec<f64>,
}

impl PoleWalk {
    fn new(a: f64, len: usize) -> Result<Self> {
        let w0 = 2.0 * a + 1.0;
        let mut p = vec![0.0; len.max(1)];
        for (k, pk) in p.iter_mut().enumerate().skip(1) {
            *pk = if k == 1 {
                digamma(1.0)? - digamma(w0)?
            } else {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * riemann_zeta(k as f64)? + hurwitz_zeta(k as f64, w0)?
            };
        }
        Ok(Self {
            w0,
            m: 0,
            ln_r: 0.0,
            p,
        })
    }

    fn advance(&mut self) {
        self.m += 1;
        let m = self.m as f64;
        let w = self.w0 + m - 1.0;
        self.ln_r += (w / m).ln();
        let (ij, iw) = (1.0 / m, 1.0 / w);
        let (mut pj, mut pw) = (ij, iw);
        for pk in self.p.iter_mut().skip(1) {
            *pk += pj - pw;
            pj *= ij;
            pw *= iw;
        }
    }

    /// Taylor coefficients `e_0..e_{n-1}` of `g_m^n`.
    fn powers(&self, n: usize, e: &mut [f64]) {
        e[0] = 1.0;
        for k in 1..n {
            let acc: f64 = (1..=k).map(|j| self.p[j] * e[k - j]).sum();
            e[k] = acc * n as f64 / k as f64;
        }
    }
}

/// `ln y` polynomial of one pole for one point: `Z_j` such that the residue
/// of order `n` is `Σ_i e_i Z_{n-1-i}` times the amplitude.
fn pole_weights(side: Side, m: usize, a: f64, log_y: f64, out: &mut [f64]) {
    let mut prev = 0.0;
    let mut pow = 1.0;
    let (d, sgn) = match side {
        Side::Interior => (1.0 + a + m as f64, -1.0),
        Side::Exterior => (a + m as f64, 1.0),
    };
    for (j, slot) in out.iter_mut().enumerate() {
        if j > 0 {
            pow *= sgn * log_y / j as f64;
        }
        prev = match side {
            Side::Interior => (prev + pow) / d,
            Side::Exterior => (prev - pow) / d,
        };
        *slot = prev;
    }
}

/// `ln` of `y^{1+a+m}` inside, `y^{-a-m}` outside.
fn ln_power_of_y(side: Side, m: usize, a: f64, log_y: f64) -> f64 {
    match side {
        Side::Interior => (1.0 + a + m as f64) * log_y,
        Side::Exterior => -(a + m as f64) * log_y,
    }
}

/// Running statistics of one order at one point during the magnitude pass.
#[derive(Debug, Clone, Copy)]
struct Tally {
    value: CompensatedSum,
    ln_abs: f64,
    ln_max: f64,
    last: (f64, f64),
    significant: usize,
    skipped: f64,
    done: bool,
}

impl Tally {
    fn new() -> Self {
        Self {
            value: CompensatedSum::new(),
            ln_abs: f64::NEG_INFINITY,
            ln_max: f64::NEG_INFINITY,
            last: (f64::INFINITY, f64::INFINITY),
            significant: 0,
            skipped: 0.0,
            done: false,
        }
    }

    fn finish(&self, n: usize) -> OrderSum {
        let (before, at_end) = self.last;
        let m_tail = if at_end == 0.0 {
            0.0
        } else if !(at_end < before) {
            f64::INFINITY
        } else {
            let q = at_end / before;
            at_end * q / (1.0 - q)
        };
        let abs_sum = self.ln_abs.exp();
        OrderSum {
            n,
            value: self.value.value(),
            abs_sum,
            ln_abs_sum: self.ln_abs,
            max_term: self.ln_max.exp(),
            m_tail,
            rounding: 8.0 * f64::EPSILON * abs_sum,
            m_significant: self.significant,
            skipped: self.skipped,
            extended_bits: None,
        }
    }
}

/// Residue series for a problem and truncation.
#[derive(Debug, Clone)]
pub struct SeriesEngine {
    spec: ProblemSpec,
    trunc: SeriesTruncation,
}

impl SeriesEngine {
    /// Engine with an explicit truncation; `m_max` caps the pole depth.
    pub fn new(spec: &ProblemSpec, trunc: SeriesTruncation) -> Result<Self> {
        if trunc.n_max == 0 || trunc.n_max > MAX_NEUMANN {
            return Err(DixonError::Size(format!(
                "n_max must be in 1..={MAX_NEUMANN}"
            )));
        }
        Ok(Self { spec: *spec, trunc })
    }

    /// Chooses `n_max` from the Neumann ratios, covering the exterior too
    /// when `exterior` is set, with pole depth capped at [`M_MAX_LIMIT`].
    pub fn auto(spec: &ProblemSpec, tol: f64, exterior: bool) -> Result<Self> {
        let probe = SeriesTruncation::new(spec, 1, M_MAX_LIMIT, tol)?;
        let n_int = neumann_depth(probe.rho, tol);
        let n_ext = match (exterior, probe.rho_exterior) {
            (true, Some(r)) => neumann_depth(r, tol),
            _ => Some(1),
        };
        let n_max = match (n_int, n_ext) {
            (Some(i), Some(e)) => i.max(e),
            _ => 0,
        };
        if n_max == 0 || n_max > MAX_NEUMANN {
            return Err(DixonError::non_convergence(
                "residue series",
                format!(
                    "Neumann ratio {:.4} needs more than {MAX_NEUMANN} orders for tol = {tol:e}",
                    probe.rho.max(probe.rho_exterior.unwrap_or(0.0))
                ),
            ));
        }
        Self::new(spec, SeriesTruncation::new(spec, n_max, M_MAX_LIMIT, tol)?)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn truncation(&self) -> &SeriesTruncation {
        &self.trunc
    }

    /// `ln |Λ|`
    fn ln_lambda_scale(&self) -> f64 {
        let a = self.spec.a();
        self.spec.lambda().norm().ln()
            - ln_gamma(a).unwrap_or(0.0)
            - ln_gamma(a + 1.0).unwrap_or(0.0)
    }

    fn lambda_phase(&self) -> f64 {
        self.spec.lambda().arg()
    }

    /// Double-precision pass over the poles for `orders` at each point, each
    /// order scaled by `exp(n·ln_scale)`. A point stops once every order's
    /// terms decrease and their extrapolated remainder is below `cutoff`;
    /// `cutoff = 0` runs to `m_max`. Also returns, per pole, the largest
    /// `ln |term|` of each order over the points.
    fn scan(
        &self,
        side: Side,
        ys: &[f64],
        ln_scale: f64,
        orders: std::ops::RangeInclusive<usize>,
        cutoff: f64,
    ) -> Result<(Vec<Vec<OrderSum>>, Vec<Vec<f64>>)> {
        let n_lo = *orders.start();
        let n_hi = *orders.end();
        let a = self.spec.a();
        let ln_g0 = ln_gamma(2.0 * a + 1.0)?;
        let mut walk = PoleWalk::new(a, n_hi)?;
        let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mut tallies = vec![vec![Tally::new(); n_hi + 1 - n_lo]; ys.len()];
        let mut active = vec![true; ys.len()];
        let mut es = vec![vec![0.0; n_hi]; n_hi + 1 - n_lo];
        let mut z = vec![0.0; n_hi];
        let mut profile = Vec::new();
        let mut m = 0;
        loop {
            for (e, n) in es.iter_mut().zip(orders.clone()) {
                walk.powers(n, e);
            }
            let mut row = vec![f64::NEG_INFINITY; n_hi + 1 - n_lo];
            for (p, &ly) in logs.iter().enumerate() {
                if !active[p] {
                    continue;
                }
                pole_weights(side, m, a, ly, &mut z);
                let ln_y = ln_power_of_y(side, m, a, ly);
                for (i, n) in orders.clone().enumerate() {
                    let e = &es[i];
                    let (mut dot, mut dot_abs) = (0.0, 0.0);
                    for k in 0..n {
                        let t = e[k] * z[n - 1 - k];
                        dot += t;
                        dot_abs += t.abs();
                    }
                    let ln_amp = n as f64 * (walk.ln_r + ln_g0 + ln_scale) + ln_y;
                    let sign = if (m * n) % 2 == 1 { -1.0 } else { 1.0 };
                    let t = &mut tallies[p][i];
                    t.value.add(sign * ln_amp.exp() * dot);
                    let ln_mag = ln_amp + dot_abs.ln();
                    row[i] = row[i].max(ln_mag);
                    t.ln_abs = log_add(t.ln_abs, ln_mag);
                    t.ln_max = t.ln_max.max(ln_mag);
                    let mag = ln_mag.exp();
                    t.last = (t.last.1, mag);
                    if mag >= cutoff {
                        t.significant = m;
                        t.skipped = 0.0;
                    } else {
                        t.skipped += mag;
                    }
                    let (before, now) = t.last;
                    t.done = m >= 8 && now < before && {
                        let q = now / before;
                        now * q / (1.0 - q) <= cutoff
                    };
                    if ln_mag.is_nan() || ln_mag == f64::INFINITY {
                        return Err(DixonError::non_convergence(
                            "residue series",
                            format!("order {n} pole term at m = {m} is not finite"),
                        ));
                    }
                }
                if cutoff > 0.0 && tallies[p].iter().all(|t| t.done) {
                    active[p] = false;
                }
            }
            profile.push(row);
            if m >= self.trunc.m_max || !active.iter().any(|&x| x) {
                break;
            }
            walk.advance();
            m += 1;
        }
        let sums = tallies
            .iter()
            .map(|ts| {
                ts.iter()
                    .enumerate()
                    .map(|(i, t)| t.finish(n_lo + i))
                    .collect()
            })
            .collect();
        Ok((sums, profile))
    }

    /// Recomputes every order in extended precision, with enough bits that
    /// rounding stays below `target`.
    fn refine(
        &self,
        side: Side,
        ys: &[f64],
        sums: &mut [Vec<OrderSum>],
        profile: &[Vec<f64>],
        ln_scale: f64,
        target: f64,
    ) -> Result<()> {
        let mut need = 0.0f64;
        let reqs: Vec<ExactRequest> = ys
            .iter()
            .zip(sums.iter())
            .map(|(&y, s)| ExactRequest {
                y,
                orders: s
                    .iter()
                    .map(|o| {
                        need = need.max((o.ln_abs_sum - target.ln()) / std::f64::consts::LN_2);
                        (o.n, o.m_significant)
                    })
                    .collect(),
            })
            .collect();
        if reqs.is_empty() {
            return Ok(());
        }
        let bits = ((need.max(0.0).ceil() as usize + 64).max(128)).div_ceil(64) * 64;
        if bits > MAX_BITS {
            return Err(DixonError::non_convergence(
                "residue series",
                format!(
                    "pole sums cancel by 2^{need:.0}; more than {MAX_BITS} bits would be needed"
                ),
            ));
        }
        // each pole only needs the bits that keep its own rounding below
        // the target share
        let n_lo = sums.first().and_then(|s| s.first()).map_or(1, |o| o.n);
        let ln_share =
            target.ln() - ((profile.len() * (profile.first().map_or(1, Vec::len))) as f64).ln();
        let prec: Vec<Vec<u16>> = profile
            .iter()
            .map(|row| {
                let mut out = vec![bits as u16; n_lo - 1];
                out.extend(row.iter().map(|&lm| {
                    let need =
                        ((lm - ln_share) / std::f64::consts::LN_2).max(0.0).ceil() as usize + 32;
                    need.clamp(64, bits) as u16
                }));
                out
            })
            .collect();
        let values = exact_pole_sums(self.spec.a(), side, &reqs, ln_scale, bits, &prec)?;
        let ln_floor = -((bits - 16) as f64) * std::f64::consts::LN_2;
        for (s, vals) in sums.iter_mut().zip(values) {
            for (o, v) in s.iter_mut().zip(vals) {
                o.value = v;
                o.rounding = (o.ln_abs_sum + ln_floor).exp() + o.skipped;
                o.extended_bits = Some(bits);
            }
        }
        Ok(())
    }

    /// `Σ_n Λ^n (pole sum)_n` at each point, with error parts.
    fn neumann_many(&self, side: Side, ys: &[f64], target: f64) -> Result<Vec<SeriesValue>> {
        let n_max = match side {
            Side::Interior => self.trunc.n_interior(),
            Side::Exterior => self.trunc.n_max,
        };
        let ln_scale = self.ln_lambda_scale();
        let (mut all, profile) = self.scan(side, ys, ln_scale, 1..=n_max, target * 1e-3)?;
        self.refine(side, ys, &mut all, &profile, ln_scale, target)?;
        let phase = self.lambda_phase();
        Ok(all
            .iter()
            .map(|sums| {
                let mut re = CompensatedSum::new();
                let mut im = CompensatedSum::new();
                let (mut m_tail, mut rounding, mut max_term) = (0.0, 0.0, 0.0f64);
                for s in sums {
                    let z = Complex64::from_polar(s.value, s.n as f64 * phase);
                    re.add(z.re);
                    im.add(z.im);
                    m_tail += s.m_tail;
                    rounding += s.rounding;
                    max_term = max_term.max(s.max_term);
                }
                SeriesValue {
                    value: Complex64::new(re.value(), im.value()),
                    est_error: 0.0,
                    n_tail: 0.0,
                    m_tail,
                    rounding,
                    max_term,
                }
            })
            .collect())
    }

    fn finish(
        &self,
        sum: SeriesValue,
        fa: Complex64,
        fa_err: f64,
        n_tail: f64,
        y: f64,
    ) -> Result<SeriesValue> {
        if !(sum.m_tail <= self.trunc.tol) {
            return Err(DixonError::non_convergence(
                "residue series",
                format!(
                    "pole tail at x/A = {y} is {:.3e} after m_max = {}, above tol {:e}",
                    sum.m_tail, self.trunc.m_max, self.trunc.tol
                ),
            ));
        }
        let fan = fa.norm();
        let n_tail = fan * n_tail;
        let m_tail = fan * sum.m_tail;
        let rounding = fan * sum.rounding;
        Ok(SeriesValue {
            value: Complex64::new(1.0, 0.0) - fa * sum.value,
            est_error: n_tail + m_tail + rounding + fa_err * sum.value.norm(),
            n_tail,
            m_tail,
            rounding,
            max_term: fan * sum.max_term,
        })
    }

    fn target(&self, fa: Complex64) -> f64 {
        self.trunc.tol / (10.0 * fa.norm().max(1.0))
    }

    /// `f(x)` for `0 ≤ x ≤ A`. `f(0) = 1` exactly.
    pub fn f_interior(&self, x: f64, fa: Complex64, fa_err: f64) -> Result<SeriesValue> {
        self.f_interior_many(&[x], fa, fa_err).remove(0)
    }

    /// [`Self::f_interior`] at several points, sharing one pass over the
    /// poles.
    pub fn f_interior_many(
        &self,
        xs: &[f64],
        fa: Complex64,
        fa_err: f64,
    ) -> Vec<Result<SeriesValue>> {
        let big_a = self.spec.big_a();
        let pre = xs
            .iter()
            .map(|&x| {
                let y = x / big_a;
                if !(y >= 0.0 && y <= 1.0) {
                    Some(Err(DixonError::range(format!(
                        "interior series needs 0 <= x <= A, got x = {x}"
                    ))))
                } else if y == 0.0 {
                    Some(Ok(SeriesValue::exact(Complex64::new(1.0, 0.0))))
                } else {
                    None
                }
            })
            .collect();
        self.fill(Side::Interior, xs, pre, fa, fa_err)
    }

    /// `f(x)` for `x ≥ A`. `f(A) = fA` exactly.
    pub fn f_exterior(&self, x: f64, fa: Complex64, fa_err: f64) -> Result<SeriesValue> {
        self.f_exterior_many(&[x], fa, fa_err).remove(0)
    }

    /// [`Self::f_exterior`] at several points.
    pub fn f_exterior_many(
        &self,
        xs: &[f64],
        fa: Complex64,
        fa_err: f64,
    ) -> Vec<Result<SeriesValue>> {
        let big_a = self.spec.big_a();
        let no_series = self.trunc.rho_exterior.is_none();
        let pre = xs
            .iter()
            .map(|&x| {
                let y = x / big_a;
                if !(y >= 1.0) || !y.is_finite() {
                    Some(Err(DixonError::range(format!(
                        "exterior series needs x >= A, got x = {x}"
                    ))))
                } else if y == 1.0 {
                    Some(Ok(SeriesValue {
                        est_error: fa_err,
                        ..SeriesValue::exact(fa)
                    }))
                } else if no_series {
                    Some(Err(DixonError::non_convergence(
                        "residue series",
                        format!(
                            "exterior Neumann series needs |lambda| < 1, got {}",
                            self.spec.lambda().norm()
                        ),
                    )))
                } else {
                    None
                }
            })
            .collect();
        self.fill(Side::Exterior, xs, pre, fa, fa_err)
    }

    /// Evaluates the points `pre` leaves open.
    fn fill(
        &self,
        side: Side,
        xs: &[f64],
        mut out: Vec<Option<Result<SeriesValue>>>,
        fa: Complex64,
        fa_err: f64,
    ) -> Vec<Result<SeriesValue>> {
        let big_a = self.spec.big_a();
        let (idx, ys): (Vec<usize>, Vec<f64>) = out
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_none())
            .map(|(i, _)| (i, xs[i] / big_a))
            .unzip();
        if !ys.is_empty() {
            match self.neumann_many(side, &ys, self.target(fa)) {
                Ok(sums) => {
                    for ((i, y), sum) in idx.into_iter().zip(ys).zip(sums) {
                        let n_tail = match side {
                            Side::Interior => self.trunc.n_tail_interior() * y.sqrt(),
                            Side::Exterior => self.trunc.n_tail_exterior(),
                        };
                        out[i] = Some(self.finish(sum, fa, fa_err, n_tail, y));
                    }
                }
                Err(e) => {
                    for i in idx {
                        out[i] = Some(Err(e.clone()));
                    }
                }
            }
        }
        out.into_iter()
            .map(|o| o.expect("every point assigned"))
            .collect()
    }

    /// The `x`-independent part of the exterior residues,
    /// `S = Σ_n Λ^n Σ_m Res_{s=-a-m} H^n / s`, for which `f(A)(1 - S) = 1`
    /// would fix `f(A)`. Its pole terms grow like `m^{2an-1}`, so this
    /// reports non-convergence unless they decay.
    pub fn exterior_constant_sum(&self) -> Result<SeriesValue> {
        if self.trunc.rho_exterior.is_none() {
            return Err(DixonError::non_convergence(
                "exterior constant sum",
                format!("needs |lambda| < 1, got {}", self.spec.lambda().norm()),
            ));
        }
        let (sums, _) = self.scan(
            Side::Exterior,
            &[1.0],
            self.ln_lambda_scale(),
            1..=self.trunc.n_max,
            0.0,
        )?;
        let phase = self.lambda_phase();
        let mut value = Complex64::new(0.0, 0.0);
        let (mut m_tail, mut rounding, mut max_term) = (0.0, 0.0, 0.0f64);
        for s in &sums[0] {
            value += Complex64::from_polar(s.value, s.n as f64 * phase);
            m_tail += s.m_tail;
            rounding += s.rounding;
            max_term = max_term.max(s.max_term);
        }
        if !(m_tail <= self.trunc.tol) {
            return Err(DixonError::non_convergence(
                "exterior constant sum",
                format!(
                    "pole terms do not decay: largest {max_term:.3e}, estimated tail {m_tail:.3e} after m_max = {}",
                    self.trunc.m_max
                ),
            ));
        }
        let n_tail = self.trunc.n_tail_exterior();
        Ok(SeriesValue {
            value: -value,
            est_error: m_tail + rounding + n_tail,
            n_tail,
            m_tail,
            rounding,
            max_term,
        })
    }

    fn single_order(&self, side: Side, n: usize, y: f64) -> Result<OrderSum> {
        let (mut sums, profile) = self.scan(side, &[y], 0.0, n..=n, TERM_TARGET * 1e-3)?;
        self.refine(side, &[y], &mut sums, &profile, 0.0, TERM_TARGET)?;
        Ok(sums[0][0])
    }

    /// `I_n(y)` summed over the poles, without the `Λ^n` factor; absolute
    /// accuracy about `1e-12` when the pole depth suffices.
    pub fn neumann_term_interior(&self, n: usize, y: f64) -> Result<OrderSum> {
        self.check_order(n)?;
        if !(y > 0.0 && y <= 1.0) {
            return Err(DixonError::range(format!(
                "interior term needs 0 < y <= 1, got {y}"
            )));
        }
        self.single_order(Side::Interior, n, y)
    }

    /// `Y_n(y)` summed over the poles, without the `Λ^n` factor.
    pub fn neumann_term_exterior(&self, n: usize, y: f64) -> Result<OrderSum> {
        self.check_order(n)?;
        if !(y >= 1.0) {
            return Err(DixonError::range(format!(
                "exterior term needs y >= 1, got {y}"
            )));
        }
        self.single_order(Side::Exterior, n, y)
    }

    /// [`Self::neumann_term_interior`] in double precision only, over all
    /// poles up to `m_max`.
    pub fn neumann_term_interior_double(&self, n: usize, y: f64) -> Result<OrderSum> {
        self.check_order(n)?;
        if !(y > 0.0 && y <= 1.0) {
            return Err(DixonError::range(format!(
                "interior term needs 0 < y <= 1, got {y}"
            )));
        }
        Ok(self.scan(Side::Interior, &[y], 0.0, n..=n, 0.0)?.0[0][0])
    }

    /// Residue of `H^n y^{1-s} / (1-s)` at `s = -a - m` in double precision.
    pub fn residue_interior(&self, n: usize, m: usize, y: f64) -> Result<f64> {
        self.check_order(n)?;
        if !(y > 0.0) {
            return Err(DixonError::range(format!("residue needs y > 0, got {y}")));
        }
        let a = self.spec.a();
        let mut walk = PoleWalk::new(a, n)?;
        for _ in 0..m {
            walk.advance();
        }
        let mut e = vec![0.0; n];
        let mut z = vec![0.0; n];
        walk.powers(n, &mut e);
        pole_weights(Side::Interior, m, a, y.ln(), &mut z);
        let dot: f64 = (0..n).map(|k| e[k] * z[n - 1 - k]).sum();
        let sign = if (m * n) % 2 == 1 { -1.0 } else { 1.0 };
        let ln_amp = n as f64 * (walk.ln_r + ln_gamma(2.0 * a + 1.0)?)
            + ln_power_of_y(Side::Interior, m, a, y.ln());
        Ok(sign * ln_amp.exp() * dot)
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.trunc.n_max {
            return Err(DixonError::Size(format!(
                "order {n} outside 1..={}",
                self.trunc.n_max
            )));
        }
        Ok(())
    }
}

/// `d^r/ds^r [((s+a+m) Γ(a+s))^n]` at `s = -a - m`, from the Laurent table.
pub fn pole_power_limit(n: usize, r: usize, m: usize, table: &LaurentTable) -> Result<f64> {
    table.check_depth(r, m)?;
    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
    let mut fact = 1.0;
    let derivs: Vec<f64> = (0..=r)
        .map(|j| {
            if j > 0 {
                fact *= j as f64;
            }
            sign * fact * table.c(j, m)
        })
        .collect();
    power_derivative(&derivs, n, r)
}

/// `d^ν/ds^ν [Γ(a+1-s)^n]` at `s = -a - m`.
pub fn gamma_power_derivative(n: usize, nu: usize, m: usize, a: f64) -> Result<f64> {
    let g = gamma_derivs(2.0 * a + 1.0 + m as f64, nu)?;
    let d = power_derivative(&g, n, nu)?;
    Ok(if nu % 2 == 1 { -d } else { d })
}

/// Residue of `[Γ(a+s) Γ(a+1-s)]^n (x/A)^{1-s} / (1-s)` at `s = -a - m` by the
/// literal Leibniz expansion. Slow; a reference for [`SeriesEngine`].
pub fn residue_interior(
    n: usize,
    m: usize,
    x: f64,
    spec: &ProblemSpec,
    table: &LaurentTable,
) -> Result<f64> {
    if n == 0 {
        return Err(DixonError::Size("Neumann order starts at 1".into()));
    }
    let y = x / spec.big_a();
    if !(y > 0.0 && y <= 1.0) {
        return Err(DixonError::range(format!(
            "residue needs 0 < x <= A, got x = {x}"
        )));
    }
    let a = spec.a();
    let b = 1.0 + a + m as f64;
    let ly = y.ln();
    // q-th derivative of y^{1-s}/(1-s) at the pole: q! y^b Σ_k (-ln y)^{q-k} / ((q-k)! b^{k+1})
    let decay = |q: usize| -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        let mut pow = 1.0;
        let mut qf = 1.0;
        for j in 0..=q {
            if j > 0 {
                pow *= -ly / j as f64;
                qf *= j as f64;
            }
            prev = (prev + pow) / b;
            acc = prev;
        }
        qf * acc * (b * ly).exp()
    };
    let binom = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let mut total = 0.0;
    for r in 0..n {
        let p = n - 1 - r;
        let mut inner = 0.0;
        for nu in 0..=p {
            inner += binom(p, nu) * gamma_power_derivative(n, nu, m, a)? * decay(p - nu);
        }
        total += binom(n - 1, r) * pole_power_limit(n, r, m, table)? * inner;
    }
    let nf: f64 = (1..n).map(|k| k as f64).product();
    Ok(total / nf)
}
