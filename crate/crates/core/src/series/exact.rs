//! Pole sums in extended precision.
//!
//! With `u = s + a + m` and `w₀ = 2a + 1`,
//!
//! ```text
//! u·H(s) = (-1)^m Γ(w₀) r_m g_m(u),     r_m = Γ(w₀+m) / (Γ(w₀) m!),
//! g_m(u) = Γ(1+u) Γ(w₀-u)/Γ(w₀) · Π_{i<m} (1 - u/(w₀+i)) / Π_{j≤m} (1 - u/j).
//! ```
//!
//! `ln g_m` has Taylor coefficients `p_k / k` with
//! `p_k = k[ψ-data at 1 and w₀] + Σ_{j≤m} j^{-k} - Σ_{i<m} (w₀+i)^{-k}`, so
//! moving from one pole to the next only needs power sums, and the whole
//! residue sum can be carried at any working precision.

use astro_float::BigFloat;

use super::Side;
use crate::error::{DixonError, Result};
use crate::specfun::ln_gamma;
use crate::specfun::mp::{ln_gamma_taylor, to_f64, MpCtx, RM};

fn round(x: &BigFloat, bits: usize) -> BigFloat {
    let mut y = x.clone();
    // only fails for an invalid precision, which callers never pass
    let _ = y.set_precision(bits, RM);
    y
}

/// Orders wanted at one point: `(n, last pole index)`.
#[derive(Debug, Clone)]
pub(crate) struct ExactRequest {
    pub y: f64,
    pub orders: Vec<(usize, usize)>,
}

struct PointState {
    /// `(∓ ln y)^j / j!`
    ex: Vec<BigFloat>,
    /// `y^{b_m}` inside, `y^{-c_m}` outside
    ypow: BigFloat,
    /// `ypow` at the current pole's precision
    ypow_m: BigFloat,
    step: BigFloat,
    z: Vec<BigFloat>,
    len: usize,
    acc: Vec<BigFloat>,
}

/// `Σ_m Res` per requested order, each multiplied by
/// `exp(n·ln_scale)`; results follow the order of `req.orders`.
///
/// `prec[m][n-1]`, when present, is the precision that pole `m` of order `n`
/// needs; running state and the sums stay at `bits`.
pub(crate) fn exact_pole_sums(
    a: f64,
    side: Side,
    reqs: &[ExactRequest],
    ln_scale: f64,
    bits: usize,
    prec: &[Vec<u16>],
) -> Result<Vec<Vec<f64>>> {
    let r_max = reqs
        .iter()
        .flat_map(|r| r.orders.iter().map(|o| o.0))
        .max()
        .unwrap_or(0);
    if r_max == 0 {
        return Ok(reqs.iter().map(|_| Vec::new()).collect());
    }
    let mut m_lim = vec![None::<usize>; r_max + 1];
    for r in reqs {
        for &(n, m) in &r.orders {
            m_lim[n] = Some(m_lim[n].map_or(m, |v: usize| v.max(m)));
        }
    }
    let m_top = m_lim.iter().flatten().copied().max().unwrap_or(0);

    let mut ctx = MpCtx::new(bits)?;
    let w0 = 2.0 * a + 1.0;
    let ab = ctx.num(a);
    let w0b = ctx.add(&ctx.add(&ab, &ab), &ctx.int(1));
    let lg1 = ln_gamma_taylor(1.0, r_max, &mut ctx)?;
    let lgw = ln_gamma_taylor(w0, r_max, &mut ctx)?;
    let mut p: Vec<BigFloat> = (0..r_max)
        .map(|k| {
            if k == 0 {
                return ctx.zero();
            }
            let c = if k % 2 == 0 {
                ctx.add(&lg1[k], &lgw[k])
            } else {
                ctx.sub(&lg1[k], &lgw[k])
            };
            ctx.mul(&c, &ctx.int(k as u64))
        })
        .collect();

    let mut points = Vec::with_capacity(reqs.len());
    for r in reqs {
        let len = r.orders.iter().map(|o| o.0).max().unwrap_or(0);
        let yb = ctx.num(r.y);
        let ly = ctx.ln(&yb);
        let signed = match side {
            Side::Interior => {
                let mut v = ly.clone();
                v.inv_sign();
                v
            }
            Side::Exterior => ly.clone(),
        };
        let mut ex = Vec::with_capacity(len);
        let mut t = ctx.int(1);
        for j in 0..len {
            if j > 0 {
                t = ctx.div(&ctx.mul(&t, &signed), &ctx.int(j as u64));
            }
            ex.push(t.clone());
        }
        let (expo, step) = match side {
            Side::Interior => (ctx.mul(&ctx.add(&ab, &ctx.int(1)), &ly), yb.clone()),
            Side::Exterior => {
                let mut e = ctx.mul(&ab, &ly);
                e.inv_sign();
                (e, ctx.div(&ctx.int(1), &yb))
            }
        };
        let ypow = ctx.exp(&expo);
        points.push(PointState {
            ex,
            ypow_m: ypow.clone(),
            ypow,
            step,
            z: vec![ctx.zero(); len],
            len,
            acc: vec![ctx.zero(); r.orders.len()],
        });
    }

    let full = ctx.p;
    let bits_at = |m: usize, n: usize| -> usize {
        prec.get(m)
            .and_then(|row| row.get(n - 1))
            .map_or(full, |&b| (b as usize).clamp(64, full))
    };
    let mut r_m = ctx.int(1);
    let mut e = vec![ctx.zero(); r_max];
    let mut pr = vec![ctx.zero(); r_max];
    for m in 0..=m_top {
        ctx.p = full;
        if m > 0 {
            let inv_j = ctx.div(&ctx.int(1), &ctx.int(m as u64));
            let inv_w = ctx.div(&ctx.int(1), &ctx.add(&w0b, &ctx.int(m as u64 - 1)));
            let (mut pj, mut pw) = (inv_j.clone(), inv_w.clone());
            for pk in p.iter_mut().skip(1) {
                *pk = ctx.add(pk, &ctx.sub(&pj, &pw));
                pj = ctx.mul(&pj, &inv_j);
                pw = ctx.mul(&pw, &inv_w);
            }
            r_m = ctx.div(
                &ctx.mul(&r_m, &ctx.add(&w0b, &ctx.int(m as u64 - 1))),
                &ctx.int(m as u64),
            );
        }
        let denom = match side {
            Side::Interior => ctx.add(&ctx.add(&ab, &ctx.int(1)), &ctx.int(m as u64)),
            Side::Exterior => ctx.add(&ab, &ctx.int(m as u64)),
        };
        let inv_full = ctx.div(&ctx.int(1), &denom);
        let bits_m = (1..=r_max)
            .filter(|&n| m_lim[n].is_some_and(|l| m <= l))
            .map(|n| bits_at(m, n))
            .max();
        let Some(bits_m) = bits_m else {
            for pt in points.iter_mut() {
                pt.ypow = ctx.mul(&pt.ypow, &pt.step);
            }
            continue;
        };
        ctx.p = bits_m;
        let inv_d = round(&inv_full, bits_m);
        for (pt, req) in points.iter_mut().zip(reqs) {
            if !req.orders.iter().any(|o| o.1 >= m) {
                continue;
            }
            pt.ypow_m = round(&pt.ypow, bits_m);
            let mut prev = ctx.zero();
            for j in 0..pt.len {
                let v = match side {
                    Side::Interior => ctx.add(&prev, &pt.ex[j]),
                    Side::Exterior => ctx.sub(&prev, &pt.ex[j]),
                };
                prev = ctx.mul(&v, &inv_d);
                pt.z[j] = prev.clone();
            }
        }
        let mut rn = BigFloat::from_u64(1, full);
        for n in 1..=r_max {
            rn = rn.mul(&r_m, full, RM);
            if m_lim[n].map_or(true, |lim| m > lim) {
                continue;
            }
            ctx.p = bits_at(m, n);
            for j in 1..n {
                pr[j] = round(&p[j], ctx.p);
            }
            // e = exp(n ln g_m), degree n-1
            let nb = ctx.int(n as u64);
            e[0] = ctx.int(1);
            for k in 1..n {
                let mut acc = ctx.zero();
                for j in 1..=k {
                    acc = ctx.add(&acc, &ctx.mul(&pr[j], &e[k - j]));
                }
                e[k] = ctx.div(&ctx.mul(&acc, &nb), &ctx.int(k as u64));
            }
            let mut coef = round(&rn, ctx.p);
            if (m * n) % 2 == 1 {
                coef.inv_sign();
            }
            for (pt, req) in points.iter_mut().zip(reqs) {
                for (slot, &(nn, lim)) in req.orders.iter().enumerate() {
                    if nn != n || m > lim {
                        continue;
                    }
                    let mut dot = ctx.zero();
                    for i in 0..n {
                        dot = ctx.add(&dot, &ctx.mul(&e[i], &pt.z[n - 1 - i]));
                    }
                    let term = ctx.mul(&ctx.mul(&coef, &pt.ypow_m), &dot);
                    pt.acc[slot] = pt.acc[slot].add(&term, full, RM);
                }
            }
        }
        ctx.p = full;
        for pt in points.iter_mut() {
            pt.ypow = ctx.mul(&pt.ypow, &pt.step);
        }
    }

    ctx.p = full;
    let lg_w0 = ln_gamma(w0)?;
    let mut out = Vec::with_capacity(reqs.len());
    for (pt, req) in points.iter().zip(reqs) {
        let mut vals = Vec::with_capacity(req.orders.len());
        for (slot, &(n, _)) in req.orders.iter().enumerate() {
            let scale = ctx.exp(&ctx.num(n as f64 * (lg_w0 + ln_scale)));
            let v = to_f64(&ctx.mul(&pt.acc[slot], &scale));
            if !v.is_finite() {
                return Err(DixonError::non_convergence(
                    "extended-precision pole sum",
                    format!("order {n} at y = {} is not finite", req.y),
                ));
            }
            vals.push(v);
        }
        out.push(vals);
    }
    Ok(out)
}
