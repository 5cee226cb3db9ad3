//! Output formats for the subcommands.

use std::collections::BTreeMap;

use dixon_core::driver::{FaReport, PairStat, Run, Solver};
use dixon_core::specfun::{digamma, gamma, laurent_coeffs};
use dixon_core::{Method, Result as CoreResult};
use serde_json::{json, Value};

use crate::{CliResult, Failure, Format, Prepared};

fn csv_failure(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: crate::EXIT_IO,
        message: format!("CSV output failed: {e}"),
    }
}

fn json_text(v: &Value) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(csv_failure)?;
    s.push('\n');
    Ok(s)
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
fn num(x: f64) -> String {
    let m = x.abs();
    if m == 0.0 || (1e-4..1e15).contains(&m) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn methods_of(run: &Run) -> Vec<Method> {
    run.results.iter().map(|r| r.method).collect()
}

pub fn solve_csv(run: &Run) -> CliResult<String> {
    let methods = methods_of(run);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string()];
    for m in &methods {
        for part in ["re", "im", "err"] {
            header.push(format!("{m}_{part}"));
        }
    }
    header.push("max_discrepancy".into());
    let with_eval = !run.series_evaluator.is_empty();
    if with_eval {
        header.push("series_evaluator".into());
    }
    w.write_record(&header).map_err(csv_failure)?;
    for (i, &x) in run.xs.iter().enumerate() {
        let mut row = vec![num(x)];
        for &m in &methods {
            match run.value(m, i) {
                Some((v, e)) => row.extend([num(v.re), num(v.im), num(e)]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        row.push(num(run.discrepancy(i)));
        if with_eval {
            row.push(run.series_evaluator[i].name().to_string());
        }
        w.write_record(&row).map_err(csv_failure)?;
    }
    let bytes = w.into_inner().map_err(csv_failure)?;
    String::from_utf8(bytes).map_err(csv_failure)
}

fn meta(p: &Prepared, solver: &Solver, run: &Run) -> Value {
    let a = &p.args;
    let methods: BTreeMap<String, Value> = run
        .results
        .iter()
        .map(|r| (r.method.name().to_string(), json!(r.meta)))
        .collect();
    let fa = solver
        .fa()
        .map(|(v, e)| json!({"re": v.re, "im": v.im, "err": e}));
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": {
            "a": a.a,
            "A": a.big_a,
            "lambda_re": a.lambda,
            "lambda_im": a.lambda_im,
            "methods": p.options.methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "points": p.xs.len(),
            "tol": p.options.tol,
            "sigma_interior": p.options.sigma_interior,
            "sigma_exterior": p.options.sigma_exterior,
            "n_max": p.options.n_max,
            "m_max": p.options.m_max,
            "nystrom_n": p.options.nystrom_n,
        },
        "bound": solver.bound(),
        "sigma_interior": solver.sigma_interior(),
        "sigma_exterior": solver.sigma_exterior(),
        "truncation": solver.truncation(),
        "f_a": fa,
        "methods": methods,
    })
}

pub fn solve_json(p: &Prepared, solver: &Solver, run: &Run) -> CliResult<String> {
    let methods = methods_of(run);
    let points: Vec<Value> = run
        .xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut per = serde_json::Map::new();
            for &m in &methods {
                let v = run.value(m, i).map_or(
                    Value::Null,
                    |(v, e)| json!({"re": v.re, "im": v.im, "err": e}),
                );
                per.insert(m.name().to_string(), v);
            }
            json!({
                "x": x,
                "values": per,
                "max_discrepancy": run.discrepancy(i),
                "series_evaluator": run.series_evaluator.get(i).map(|e| e.name()),
            })
        })
        .collect();
    json_text(&json!({"meta": meta(p, solver, run), "points": points}))
}

/// What `compare` reports.
pub struct Summary {
    spec: String,
    tol: f64,
    bound: f64,
    points: usize,
    pairs: Vec<PairStat>,
    residuals: Vec<(Method, CoreResult<f64>)>,
    fa: FaReport,
    meta: Value,
}

impl Summary {
    pub fn new(
        p: &Prepared,
        solver: &Solver,
        run: &Run,
        residuals: Vec<(Method, CoreResult<f64>)>,
        fa: FaReport,
    ) -> Self {
        Self {
            spec: p.spec.to_string(),
            tol: p.options.tol,
            bound: solver.bound(),
            points: run.xs.len(),
            pairs: run.pair_stats(),
            residuals,
            fa,
            meta: meta(p, solver, run),
        }
    }

    pub fn all_within_tol(&self) -> bool {
        self.pairs.iter().all(|p| p.max < self.tol)
    }

    fn fa_rows(&self) -> Vec<(String, Option<f64>, Option<f64>, String)> {
        let mut rows = Vec::new();
        let f = &self.fa;
        rows.push((
            format!("used ({} closure)", f.source),
            Some(f.used.re),
            Some(f.used.im),
            format!("{:.1e}", f.used_err),
        ));
        if let Some(c) = f.closures {
            rows.push((
                format!("exterior closure, sigma = {:.4}", c.sigma_exterior),
                Some(c.exterior.re),
                Some(c.exterior.im),
                format!("{:.1e}", c.exterior_err),
            ));
            rows.push((
                format!("interior closure, sigma = {:.4}", c.sigma_interior),
                Some(c.interior.re),
                Some(c.interior.im),
                format!("{:.1e}", c.interior_err),
            ));
        }
        if let Some(v) = f.nystrom {
            rows.push(("nystrom at A".into(), Some(v.re), Some(v.im), String::new()));
        }
        if let Some(v) = f.picard {
            rows.push(("picard at A".into(), Some(v.re), Some(v.im), String::new()));
        }
        match (&f.series, &f.series_note) {
            (Some(v), _) => rows.push((
                "series closure 1/(1-S)".into(),
                Some(v.re),
                Some(v.im),
                String::new(),
            )),
            (None, Some(note)) => {
                rows.push(("series closure 1/(1-S)".into(), None, None, note.clone()))
            }
            _ => {}
        }
        rows
    }

    pub fn text(&self) -> String {
        let mut s = format!(
            "{}\nbound at sigma = 1/2: {:.10}\npoints: {}\n\n",
            self.spec, self.bound, self.points
        );
        s += &format!(
            "{:<18} {:>6} {:>12} {:>12}  within tol {:.1e}\n",
            "pair", "points", "max", "median", self.tol
        );
        for p in &self.pairs {
            s += &format!(
                "{:<18} {:>6} {:>12.3e} {:>12.3e}  {}\n",
                format!("{}-{}", p.first, p.second),
                p.points,
                p.max,
                p.median,
                if p.max < self.tol { "yes" } else { "no" }
            );
        }
        s += "\nresidual sup-norm over (0, A]\n";
        for (m, r) in &self.residuals {
            match r {
                Ok(v) => s += &format!("{:<18} {:>12.3e}\n", m.name(), v),
                Err(e) => s += &format!("{:<18} error: {e}\n", m.name()),
            }
        }
        s += "\nf(A)\n";
        for (label, re, im, note) in self.fa_rows() {
            match (re, im) {
                (Some(re), Some(im)) => {
                    s += &format!("{label:<34} {re:>20.12} {im:>+12.3e}  {note}\n")
                }
                _ => s += &format!("{label:<34} {:>20}  {note}\n", "-"),
            }
        }
        s += &format!(
            "spread of available f(A) values: {:.3e}\n",
            self.fa.spread()
        );
        let bad = self.pairs.iter().filter(|p| p.max >= self.tol).count();
        if bad == 0 {
            s += "\nall pairs agree within tol\n";
        } else {
            s += &format!("\n{bad} of {} pairs exceed tol\n", self.pairs.len());
        }
        s
    }

    pub fn json(&self) -> CliResult<String> {
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|p| {
                json!({
                    "first": p.first.name(), "second": p.second.name(), "points": p.points,
                    "max": p.max, "median": p.median, "within_tol": p.max < self.tol,
                })
            })
            .collect();
        let residuals: BTreeMap<&str, Value> = self
            .residuals
            .iter()
            .map(|(m, r)| {
                let v = match r {
                    Ok(v) => json!(v),
                    Err(e) => json!({"error": e.to_string()}),
                };
                (m.name(), v)
            })
            .collect();
        let fa: Vec<Value> = self
            .fa_rows()
            .into_iter()
            .map(|(label, re, im, note)| json!({"label": label, "re": re, "im": im, "note": note}))
            .collect();
        json_text(&json!({
            "meta": self.meta,
            "pairs": pairs,
            "residuals": residuals,
            "f_a": fa,
            "f_a_spread": self.fa.spread(),
            "all_within_tol": self.all_within_tol(),
        }))
    }
}

pub fn coeffs(m_max: usize, k_max: usize, format: Format) -> CliResult<String> {
    let t = laurent_coeffs(m_max, k_max);
    let mut rows = Vec::new();
    for m in 0..=m_max {
        let inv_fact = 1.0 / gamma(m as f64 + 1.0)?;
        for k in 0..=k_max {
            let c = t.get(k, m)?;
            let check = match k {
                0 => Some(inv_fact),
                1 => Some(digamma(m as f64 + 1.0)? * inv_fact),
                _ => None,
            };
            let pass = check.map(|v| (c - v).abs() <= 1e-12 * v.abs().max(f64::MIN_POSITIVE));
            rows.push((m, k, c, check, pass));
        }
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["m", "k", "c", "check", "check_pass"])
                .map_err(csv_failure)?;
            for (m, k, c, check, pass) in rows {
                w.write_record([
                    m.to_string(),
                    k.to_string(),
                    num(c),
                    check.map_or(String::new(), num),
                    pass.map_or(String::new(), |p| p.to_string()),
                ])
                .map_err(csv_failure)?;
            }
            String::from_utf8(w.into_inner().map_err(csv_failure)?).map_err(csv_failure)
        }
        Format::Json => {
            let v: Vec<Value> = rows
                .into_iter()
                .map(|(m, k, c, check, pass)| json!({"m": m, "k": k, "c": c, "check": check, "check_pass": pass}))
                .collect();
            json_text(&json!(v))
        }
    }
}
