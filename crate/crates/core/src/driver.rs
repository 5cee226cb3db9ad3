//! Runs the requested methods on one set of points and compares them.
//!
//! [`Solver`] holds everything a method needs once it is set up (the Nyström
//! grids, `f(A)`, the series engine), so the same state serves the grid run,
//! the residual check and the `f(A)` report.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{DixonError, Result};
use crate::mellin::{self, ContourSettings, FaClosures};
use crate::oracle::{self, NystromGrid};
use crate::problem::{admissible, residual_profile_many, Method, MethodResult, ProblemSpec};
use crate::series::{SeriesEngine, SeriesTruncation, DEFAULT_TOL};

/// Points with `|x/A - 1|` below this are handed from the series to the
/// contour integral.
pub const JUNCTION_BAND: f64 = 0.05;

pub const DEFAULT_NYSTROM_N: usize = 512;
pub const DEFAULT_PICARD_MAX_ITER: usize = 5000;

/// Method selection and numerical controls for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOptions {
    /// Kept in canonical order without repeats.
    pub methods: Vec<Method>,
    pub tol: f64,
    pub sigma_interior: f64,
    /// `None` picks [`ContourSettings::exterior_default`].
    pub sigma_exterior: Option<f64>,
    pub n_max: Option<usize>,
    pub m_max: Option<usize>,
    pub nystrom_n: usize,
    pub picard_max_iter: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            tol: DEFAULT_TOL,
            sigma_interior: 0.5,
            sigma_exterior: None,
            n_max: None,
            m_max: None,
            nystrom_n: DEFAULT_NYSTROM_N,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
        }
    }
}

impl RunOptions {
    pub fn with_methods(mut self, methods: &[Method]) -> Self {
        let mut m = methods.to_vec();
        m.sort();
        m.dedup();
        self.methods = m;
        self
    }

    fn uses(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}

/// Which evaluator produced a series value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluator {
    Series,
    Mellin,
}

impl Evaluator {
    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Series => "series",
            Evaluator::Mellin => "mellin",
        }
    }
}

/// The ways of obtaining `f(A)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaReport {
    /// The value the contour and series methods use.
    pub used: Complex64,
    pub used_err: f64,
    /// `"exterior"` or `"interior"` closure.
    pub source: &'static str,
    pub closures: Option<FaClosures>,
    pub nystrom: Option<Complex64>,
    pub picard: Option<Complex64>,
    /// `1/(1 - S)` from the series constant sum; `None` when it diverges.
    pub series: Option<Complex64>,
    pub series_note: Option<String>,
}

impl FaReport {
    /// Largest distance between any two available values.
    pub fn spread(&self) -> f64 {
        let mut v = vec![self.used];
        if let Some(c) = self.closures {
            v.push(c.exterior);
            v.push(c.interior);
        }
        v.extend(self.nystrom);
        v.extend(self.picard);
        v.extend(self.series);
        let mut worst = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                worst = worst.max((v[i] - v[j]).norm());
            }
        }
        worst
    }
}

/// Prepared state for every selected method.
#[derive(Debug, Clone)]
pub struct Solver {
    spec: ProblemSpec,
    options: RunOptions,
    bound: f64,
    interior: ContourSettings,
    exterior: Option<ContourSettings>,
    fa: Option<(Complex64, f64, &'static str)>,
    nystrom: Option<(NystromGrid, NystromGrid)>,
    picard: Option<NystromGrid>,
    engine: Option<SeriesEngine>,
}

impl Solver {
    /// Checks admissibility at `σ = 1/2` (the binding abscissa) and at every
    /// contour in use, then sets up the selected methods.
    pub fn new(spec: &ProblemSpec, options: &RunOptions) -> Result<Self> {
        let options = options.clone().with_methods(&options.methods);
        if options.methods.is_empty() {
            return Err(DixonError::domain("no method selected"));
        }
        if !(options.tol > 0.0) {
            return Err(DixonError::domain(format!(
                "tol must be positive, got {}",
                options.tol
            )));
        }
        let bound = admissible(spec, 0.5)?.bound;
        let quad_tol = (0.1 * options.tol).min(ContourSettings::DEFAULT_ABS_TOL);
        let interior = ContourSettings::new(options.sigma_interior).with_tol(quad_tol);
        let contour = options.uses(Method::Mellin) || options.uses(Method::Series);
        let mut exterior = None;
        let mut fa = None;
        if contour {
            interior.check_interior(spec)?;
            exterior = match options.sigma_exterior {
                Some(s) => {
                    let c = ContourSettings::new(s).with_tol(quad_tol);
                    c.check_exterior(spec)?;
                    Some(c)
                }
                // no admissible exterior abscissa when |λ| ≥ 1
                None => ContourSettings::exterior_default(spec)
                    .ok()
                    .map(|c| c.with_tol(quad_tol)),
            };
            fa = Some(match &exterior {
                Some(c) => {
                    let (v, e) = mellin::fa_exterior(spec, c)?;
                    (v, e, "exterior")
                }
                None => {
                    let (v, e) = mellin::fa_interior(spec, &interior)?;
                    (v, e, "interior")
                }
            });
        }
        let nystrom = if options.uses(Method::Nystrom) {
            let fine = oracle::nystrom_solve(spec, options.nystrom_n)?;
            let coarse =
                oracle::nystrom_solve(spec, (options.nystrom_n / 2).max(oracle::MIN_NODES))?;
            Some((fine, coarse))
        } else {
            None
        };
        let picard = if options.uses(Method::Picard) {
            Some(oracle::picard_solve(
                spec,
                options.nystrom_n,
                options.picard_max_iter,
                0.01 * options.tol,
            )?)
        } else {
            None
        };
        let engine = if options.uses(Method::Series) {
            let auto = SeriesEngine::auto(spec, options.tol, exterior.is_some());
            let trunc = match (options.n_max, auto) {
                (Some(n), _) => SeriesTruncation::new(
                    spec,
                    n,
                    options.m_max.unwrap_or(crate::series::M_MAX_LIMIT),
                    options.tol,
                )?,
                (None, Ok(e)) => SeriesTruncation {
                    m_max: options.m_max.unwrap_or(e.truncation().m_max),
                    ..*e.truncation()
                },
                (None, Err(e)) => return Err(e),
            };
            Some(SeriesEngine::new(spec, trunc)?)
        } else {
            None
        };
        Ok(Self {
            spec: *spec,
            options,
            bound,
            interior,
            exterior,
            fa,
            nystrom,
            picard,
            engine,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn options(&self) -> &RunOptions {
        &self.options
    }

    /// `B(a, a+1) / B(a+½, a+½)`, the binding admissibility bound.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn sigma_interior(&self) -> f64 {
        self.interior.sigma
    }

    pub fn sigma_exterior(&self) -> Option<f64> {
        self.exterior.map(|c| c.sigma)
    }

    pub fn truncation(&self) -> Option<SeriesTruncation> {
        self.engine.as_ref().map(|e| *e.truncation())
    }

    pub fn nystrom_grid(&self) -> Option<&NystromGrid> {
        self.nystrom.as_ref().map(|(g, _)| g)
    }

    pub fn picard_grid(&self) -> Option<&NystromGrid> {
        self.picard.as_ref()
    }

    /// `f(A)` used by the contour and series methods, with its estimate.
    pub fn fa(&self) -> Option<(Complex64, f64)> {
        self.fa.map(|(v, e, _)| (v, e))
    }

    /// Values, error estimates and (series only) evaluators of `method` at
    /// `xs`. Interior-only methods fail on points beyond `A`.
    pub fn eval(
        &self,
        method: Method,
        xs: &[f64],
    ) -> Result<(Vec<Complex64>, Vec<f64>, Vec<Evaluator>)> {
        let big_a = self.spec.big_a();
        if let Some(&x) = xs.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(DixonError::range(format!(
                "evaluation point {x} is not a finite x >= 0"
            )));
        }
        if !method.supports_exterior() {
            if let Some(&x) = xs.iter().find(|&&x| x > big_a) {
                return Err(DixonError::range(format!(
                    "{method} evaluates only 0 <= x <= A, got x = {x}"
                )));
            }
        }
        match method {
            Method::Nystrom => {
                let (fine, coarse) = self.nystrom.as_ref().ok_or_else(|| not_prepared(method))?;
                let mut vals = Vec::with_capacity(xs.len());
                let mut errs = Vec::with_capacity(xs.len());
                for &x in xs {
                    let f = oracle::nystrom_eval(fine, x)?;
                    vals.push(f);
                    errs.push((f - oracle::nystrom_eval(coarse, x)?).norm());
                }
                Ok((vals, errs, Vec::new()))
            }
            Method::Picard => {
                let grid = self.picard.as_ref().ok_or_else(|| not_prepared(method))?;
                let rho = grid.contraction.filter(|r| *r < 1.0).unwrap_or(0.5);
                let iter_err = 0.01 * self.options.tol * rho / (1.0 - rho);
                let mut vals = Vec::with_capacity(xs.len());
                let mut errs = Vec::with_capacity(xs.len());
                for &x in xs {
                    let f = oracle::nystrom_eval(grid, x)?;
                    let disc = match &self.nystrom {
                        Some((fine, coarse)) if fine.n == grid.n => {
                            (oracle::nystrom_eval(fine, x)? - oracle::nystrom_eval(coarse, x)?)
                                .norm()
                        }
                        _ => 0.0,
                    };
                    vals.push(f);
                    errs.push(iter_err + disc);
                }
                Ok((vals, errs, Vec::new()))
            }
            Method::Mellin => {
                let mut vals = Vec::with_capacity(xs.len());
                let mut errs = Vec::with_capacity(xs.len());
                for &x in xs {
                    let v = self.mellin_at(x)?;
                    vals.push(v.0);
                    errs.push(v.1);
                }
                Ok((vals, errs, Vec::new()))
            }
            Method::Series => self.series_eval(xs),
        }
    }

    fn mellin_at(&self, x: f64) -> Result<(Complex64, f64)> {
        let (fa, fa_err, _) = self.fa.ok_or_else(|| not_prepared(Method::Mellin))?;
        if x <= self.spec.big_a() {
            let v = mellin::f_interior_mb(x, &self.spec, fa, &self.interior)?;
            let j = if fa.norm() > 0.0 {
                (1.0 - v.value).norm() / fa.norm()
            } else {
                0.0
            };
            Ok((v.value, v.est_error + fa_err * j))
        } else {
            let c = self.exterior.as_ref().ok_or_else(|| {
                DixonError::non_convergence(
                    "exterior contour",
                    format!(
                        "no admissible abscissa in (1, a+1) for |lambda| = {}",
                        self.spec.lambda().norm()
                    ),
                )
            })?;
            let v = mellin::f_exterior_mb(x, &self.spec, fa, c)?;
            let j = if fa.norm() > 0.0 {
                (v.value / fa).norm()
            } else {
                0.0
            };
            Ok((v.value, v.est_error + fa_err * j))
        }
    }

    fn series_eval(&self, xs: &[f64]) -> Result<(Vec<Complex64>, Vec<f64>, Vec<Evaluator>)> {
        let engine = self
            .engine
            .as_ref()
            .ok_or_else(|| not_prepared(Method::Series))?;
        let (fa, fa_err, _) = self.fa.ok_or_else(|| not_prepared(Method::Series))?;
        let big_a = self.spec.big_a();
        let mut vals = vec![Complex64::new(0.0, 0.0); xs.len()];
        let mut errs = vec![0.0; xs.len()];
        let mut how = vec![Evaluator::Series; xs.len()];
        let (mut inner, mut outer) = (Vec::new(), Vec::new());
        for (i, &x) in xs.iter().enumerate() {
            let y = x / big_a;
            if (y - 1.0).abs() < JUNCTION_BAND {
                let v = self.mellin_at(x)?;
                vals[i] = v.0;
                errs[i] = v.1;
                how[i] = Evaluator::Mellin;
            } else if y < 1.0 {
                inner.push(i);
            } else {
                outer.push(i);
            }
        }
        let xi: Vec<f64> = inner.iter().map(|&i| xs[i]).collect();
        for (&i, r) in inner.iter().zip(engine.f_interior_many(&xi, fa, fa_err)) {
            let v = r?;
            vals[i] = v.value;
            errs[i] = v.est_error;
        }
        let xo: Vec<f64> = outer.iter().map(|&i| xs[i]).collect();
        for (&i, r) in outer.iter().zip(engine.f_exterior_many(&xo, fa, fa_err)) {
            let v = r?;
            vals[i] = v.value;
            errs[i] = v.est_error;
        }
        Ok((vals, errs, how))
    }

    /// Every selected method on `xs` (strictly increasing, `x ≥ 0`).
    /// Interior-only methods skip the points beyond `A`.
    pub fn run(&self, xs: &[f64]) -> Result<Run> {
        if xs.is_empty() {
            return Err(DixonError::domain("no evaluation points"));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(DixonError::domain(
                "evaluation points must be strictly increasing",
            ));
        }
        let big_a = self.spec.big_a();
        if xs.iter().any(|&x| x > big_a)
            && !self.options.methods.iter().any(|m| m.supports_exterior())
        {
            return Err(DixonError::range(format!(
                "points beyond A = {big_a} need the mellin or series method"
            )));
        }
        let mut results = Vec::new();
        let mut evaluators = Vec::new();
        for &m in &self.options.methods {
            let pts: Vec<f64> = if m.supports_exterior() {
                xs.to_vec()
            } else {
                xs.iter().copied().filter(|&x| x <= big_a).collect()
            };
            if pts.is_empty() {
                continue;
            }
            let (vals, errs, how) = self.eval(m, &pts)?;
            let mut r = MethodResult::new(m, pts, vals, errs)?;
            r = self.annotate(r);
            if m == Method::Series {
                evaluators = how;
            }
            results.push(r);
        }
        Ok(Run {
            spec: self.spec,
            xs: xs.to_vec(),
            results,
            series_evaluator: evaluators,
        })
    }

    fn annotate(&self, r: MethodResult) -> MethodResult {
        match r.method {
            Method::Nystrom => {
                let g = self.nystrom_grid().expect("prepared");
                r.with_meta("n", g.n)
                    .with_meta(
                        "condition_estimate",
                        format!("{:.6e}", g.condition_estimate),
                    )
                    .with_meta("backward_error", format!("{:.3e}", g.backward_error))
            }
            Method::Picard => {
                let g = self.picard_grid().expect("prepared");
                r.with_meta("n", g.n)
                    .with_meta("iterations", g.iterations.unwrap_or(0))
                    .with_meta(
                        "contraction",
                        format!("{:.6}", g.contraction.unwrap_or(f64::NAN)),
                    )
            }
            Method::Mellin => {
                let mut r = r.with_meta("sigma_interior", self.interior.sigma);
                if let Some(s) = self.sigma_exterior() {
                    r = r.with_meta("sigma_exterior", s);
                }
                r
            }
            Method::Series => {
                let t = self.truncation().expect("prepared");
                r.with_meta("n_max", t.n_max)
                    .with_meta("n_interior", t.n_interior())
                    .with_meta("m_max", t.m_max)
                    .with_meta("rho", format!("{:.12}", t.rho))
            }
        }
    }

    /// Sup-norm of the equation residual of `method` over `(0, A]`.
    pub fn residual(&self, method: Method, n_quad: usize, n_check: usize) -> Result<f64> {
        let prof = residual_profile_many(
            |ys| Ok(self.eval(method, ys)?.0),
            &self.spec,
            n_quad,
            n_check,
        )?;
        Ok(prof.into_iter().map(|(_, r)| r).fold(0.0, f64::max))
    }

    /// `f(A)` from every available route.
    pub fn fa_report(&self) -> Result<FaReport> {
        let big_a = self.spec.big_a();
        let closures = match &self.exterior {
            Some(c) if self.fa.is_some() => {
                Some(mellin::fa_closures(&self.spec, c, &self.interior)?)
            }
            _ => None,
        };
        let nystrom = self
            .nystrom_grid()
            .map(|g| oracle::nystrom_eval(g, big_a))
            .transpose()?;
        let picard = self
            .picard_grid()
            .map(|g| oracle::nystrom_eval(g, big_a))
            .transpose()?;
        let (series, series_note) = match &self.engine {
            Some(e) => match e.exterior_constant_sum() {
                Ok(s) => (Some(1.0 / (1.0 - s.value)), None),
                Err(err) => (None, Some(err.to_string())),
            },
            None => (None, None),
        };
        let (used, used_err, source) =
            self.fa
                .unwrap_or((Complex64::new(f64::NAN, 0.0), f64::NAN, "none"));
        Ok(FaReport {
            used,
            used_err,
            source,
            closures,
            nystrom,
            picard,
            series,
            series_note,
        })
    }
}

fn not_prepared(m: Method) -> DixonError {
    DixonError::domain(format!("method {m} was not selected for this solver"))
}

/// Results of one run, one [`MethodResult`] per method in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Run {
    pub spec: ProblemSpec,
    pub xs: Vec<f64>,
    pub results: Vec<MethodResult>,
    /// Per point of `xs` when the series ran; empty otherwise.
    pub series_evaluator: Vec<Evaluator>,
}

/// Discrepancy statistics of one method pair over their common points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairStat {
    pub first: Method,
    pub second: Method,
    pub points: usize,
    pub max: f64,
    pub median: f64,
}

impl Run {
    pub fn result(&self, m: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == m)
    }

    /// Value and estimate of `m` at `xs[i]`, if `m` covers that point.
    pub fn value(&self, m: Method, i: usize) -> Option<(Complex64, f64)> {
        let r = self.result(m)?;
        let x = self.xs[i];
        let k = r.xs.iter().position(|&v| v == x)?;
        Some((r.values[k], r.est_error[k]))
    }

    /// Largest `|f_p - f_q|` over the method pairs present at `xs[i]`.
    pub fn discrepancy(&self, i: usize) -> f64 {
        let v: Vec<Complex64> = self
            .results
            .iter()
            .filter_map(|r| self.value(r.method, i))
            .map(|v| v.0)
            .collect();
        let mut worst = 0.0f64;
        for p in 0..v.len() {
            for q in p + 1..v.len() {
                worst = worst.max((v[p] - v[q]).norm());
            }
        }
        worst
    }

    pub fn pair_stats(&self) -> Vec<PairStat> {
        let mut out = Vec::new();
        for (p, rp) in self.results.iter().enumerate() {
            for rq in &self.results[p + 1..] {
                let mut d: Vec<f64> = (0..self.xs.len())
                    .filter_map(|i| {
                        Some((self.value(rp.method, i)?.0 - self.value(rq.method, i)?.0).norm())
                    })
                    .collect();
                if d.is_empty() {
                    continue;
                }
                d.sort_by(f64::total_cmp);
                let median = if d.len() % 2 == 1 {
                    d[d.len() / 2]
                } else {
                    0.5 * (d[d.len() / 2 - 1] + d[d.len() / 2])
                };
                out.push(PairStat {
                    first: rp.method,
                    second: rq.method,
                    points: d.len(),
                    max: *d.last().expect("nonempty"),
                    median,
                });
            }
        }
        out
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn uniform_grid(n: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || (n > 1 && !(hi > lo)) {
        return Err(DixonError::domain(format!("invalid grid {n}:{lo}:{hi}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunOptions {
        RunOptions {
            nystrom_n: 64,
            tol: 1e-8,
            ..RunOptions::default()
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(21, 0.0, 1.0).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[20], 1.0);
        assert!(uniform_grid(0, 0.0, 1.0).is_err());
        assert!(uniform_grid(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn inadmissible_coupling_reports_bound() {
        let s = ProblemSpec::real(0.5, 1.0, 2.0).unwrap();
        match Solver::new(&s, &quick()) {
            Err(DixonError::Inadmissible { bound, .. }) => {
                assert!((bound - std::f64::consts::FRAC_PI_2).abs() < 1e-12)
            }
            other => panic!("expected inadmissible, got {other:?}"),
        }
    }

    #[test]
    fn series_defers_near_junction() {
        let s = ProblemSpec::real(0.5, 1.0, 0.3).unwrap();
        let opts = quick().with_methods(&[Method::Mellin, Method::Series]);
        let solver = Solver::new(&s, &opts).unwrap();
        let run = solver.run(&[0.0, 0.5, 0.97, 1.0, 1.02, 2.0]).unwrap();
        use Evaluator::*;
        assert_eq!(
            run.series_evaluator,
            vec![Series, Series, Mellin, Mellin, Mellin, Series]
        );
        for i in 0..run.xs.len() {
            assert!(
                run.discrepancy(i) < 1e-7,
                "x = {}: {}",
                run.xs[i],
                run.discrepancy(i)
            );
        }
        assert_eq!(
            run.value(Method::Series, 0).unwrap().0,
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn interior_methods_skip_exterior_points() {
        let s = ProblemSpec::real(1.0, 1.0, 0.3).unwrap();
        let opts = quick().with_methods(&[Method::Nystrom, Method::Mellin]);
        let run = Solver::new(&s, &opts)
            .unwrap()
            .run(&[0.5, 1.0, 3.0])
            .unwrap();
        assert_eq!(run.result(Method::Nystrom).unwrap().xs, vec![0.5, 1.0]);
        assert_eq!(run.result(Method::Mellin).unwrap().xs.len(), 3);
        assert!(run.value(Method::Nystrom, 2).is_none());
        let only = quick().with_methods(&[Method::Nystrom]);
        assert!(Solver::new(&s, &only).unwrap().run(&[0.5, 3.0]).is_err());
    }

    #[test]
    fn strong_coupling_falls_back_to_interior_closure() {
        let s = ProblemSpec::real(0.5, 1.0, 1.2).unwrap();
        let opts = quick().with_methods(&[Method::Mellin]);
        let solver = Solver::new(&s, &opts).unwrap();
        assert_eq!(solver.sigma_exterior(), None);
        assert_eq!(solver.fa_report().unwrap().source, "interior");
        assert!(solver.run(&[0.5, 2.0]).is_err());
    }
}
