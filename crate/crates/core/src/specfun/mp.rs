//! Extended-precision pieces for the residue sums: Bernoulli numbers, the
//! Taylor coefficients of `ln Γ` at a regular point, and conversions.

use astro_float::{BigFloat, Consts, RoundingMode, Sign, WORD_BIT_SIZE};
use num_bigint::{BigInt, Sign as BigSign};

use crate::error::{DixonError, Result};

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision plus the constants cache `ln`/`exp` need.
pub(crate) struct MpCtx {
    pub p: usize,
    cc: Consts,
}

impl MpCtx {
    pub fn new(bits: usize) -> Result<Self> {
        let cc = Consts::new()
            .map_err(|e| DixonError::domain(format!("extended precision setup failed: {e:?}")))?;
        Ok(Self {
            p: bits.max(64),
            cc,
        })
    }

    pub fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn int(&self, k: u64) -> BigFloat {
        BigFloat::from_u64(k, self.p)
    }

    pub fn zero(&self) -> BigFloat {
        BigFloat::from_u64(0, self.p)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, RM, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }

    pub fn from_bigint(&self, n: &BigInt) -> BigFloat {
        let (sign, digits) = n.to_u64_digits();
        let radix = self.num(18446744073709551616.0);
        let mut acc = self.zero();
        for d in digits.iter().rev() {
            acc = self.add(&self.mul(&acc, &radix), &BigFloat::from_u64(*d, self.p));
        }
        if sign == BigSign::Minus {
            acc.inv_sign();
        }
        acc
    }
}

/// Nearest `f64`; zero for NaN, which the callers treat as a failure
/// through their own finiteness checks.
pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    // value = 0.w_top w_next … × 2^exp with the top word normalized
    let scale = 2f64.powi(WORD_BIT_SIZE as i32);
    let mut mant = 0.0;
    for w in words
        .iter()
        .rev()
        .take(128 / WORD_BIT_SIZE + 1)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
    {
        mant = mant / scale + *w as f64;
    }
    let mant = mant / scale;
    let v = if exp > 1000 {
        f64::INFINITY
    } else if exp < -1100 {
        0.0
    } else {
        mant * 2f64.powi(exp)
    };
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// `B_0, B_2, …, B_{2j_max}` exactly, from the tangent numbers:
/// `B_{2k} = (-1)^{k-1} 2k T_k / (4^k (4^k - 1))`.
pub(crate) fn bernoulli_even(j_max: usize, ctx: &MpCtx) -> Vec<BigFloat> {
    let mut out = Vec::with_capacity(j_max + 1);
    out.push(ctx.int(1));
    if j_max == 0 {
        return out;
    }
    let mut t: Vec<BigInt> = vec![BigInt::from(0); j_max + 1];
    t[1] = BigInt::from(1);
    for k in 2..=j_max {
        t[k] = &t[k - 1] * BigInt::from(k - 1);
    }
    for k in 2..=j_max {
        for j in k..=j_max {
            t[j] = &t[j - 1] * BigInt::from(j - k) + &t[j] * BigInt::from(j - k + 2);
        }
    }
    for (k, tk) in t.iter().enumerate().skip(1) {
        let four_k = BigInt::from(1) << (2 * k);
        let num = tk * BigInt::from(2 * k);
        let den = &four_k * (&four_k - 1);
        let mut b = ctx.div(&ctx.from_bigint(&num), &ctx.from_bigint(&den));
        if k % 2 == 0 {
            b.inv_sign();
        }
        out.push(b);
    }
    out
}

/// Taylor coefficients of `ln Γ(x + u) - ln Γ(x)` in `u`, `len` of them
/// (index 0 is zero): `ψ(x)` and then `(-1)^k ζ(k, x) / k`.
///
/// Shifts to `X = x + N` with `N` about half the precision in bits and uses
/// the Euler–Maclaurin tails there.
pub(crate) fn ln_gamma_taylor(x: f64, len: usize, ctx: &mut MpCtx) -> Result<Vec<BigFloat>> {
    if !(x > 0.0) {
        return Err(DixonError::domain(format!(
            "ln_gamma_taylor needs x > 0, got {x}"
        )));
    }
    let mut out = vec![ctx.zero(); len];
    if len < 2 {
        return Ok(out);
    }
    let s_max = len - 1;
    let n_shift = (ctx.p / 2).max(4 * len) as u64;
    // direct sums Σ_{i<N} (x+i)^{-s}, s = 1..=s_max
    let mut sums = vec![ctx.zero(); s_max + 1];
    let xb = ctx.num(x);
    for i in 0..n_shift {
        let inv = ctx.div(&ctx.int(1), &ctx.add(&xb, &ctx.int(i)));
        let mut pw = inv.clone();
        for s in sums.iter_mut().skip(1) {
            *s = ctx.add(s, &pw);
            pw = ctx.mul(&pw, &inv);
        }
    }
    let big_x = ctx.add(&xb, &ctx.int(n_shift));
    let inv_x = ctx.div(&ctx.int(1), &big_x);
    let inv_x2 = ctx.mul(&inv_x, &inv_x);
    let threshold_bits = ctx.p as i32 + 16;
    let small = |v: &BigFloat, scale: &BigFloat| -> bool {
        match (v.exponent(), scale.exponent()) {
            (Some(ev), Some(es)) => v.is_zero() || ev < es - threshold_bits,
            _ => v.is_zero(),
        }
    };
    // enough Bernoulli numbers for the tails; extended on demand
    let mut bern = bernoulli_even(64, ctx);
    let mut fact2j = vec![ctx.int(1)]; // (2j)!

    // ψ(x) = ln X - 1/(2X) - Σ_j B_{2j} / (2j X^{2j}) - Σ_{i<N} 1/(x+i)
    let ln_x = ctx.ln(&big_x);
    let mut psi = ctx.sub(&ln_x, &ctx.div(&inv_x, &ctx.int(2)));
    let mut pw = inv_x2.clone();
    let mut j = 1usize;
    loop {
        if j >= bern.len() {
            bern = bernoulli_even(2 * bern.len(), ctx);
        }
        let term = ctx.div(&ctx.mul(&bern[j], &pw), &ctx.int(2 * j as u64));
        psi = ctx.sub(&psi, &term);
        if small(&term, &psi) {
            break;
        }
        pw = ctx.mul(&pw, &inv_x2);
        j += 1;
        if j > 4 * ctx.p {
            return Err(DixonError::non_convergence(
                "extended digamma",
                format!("no convergence at x = {x}"),
            ));
        }
    }
    out[1] = ctx.sub(&psi, &sums[1]);

    // ζ(s, x) = Σ_{i<N} (x+i)^{-s} + X^{1-s}/(s-1) + X^{-s}/2
    //           + Σ_j B_{2j}/(2j)! · s(s+1)…(s+2j-2) · X^{-s-2j+1}
    let mut x_pow = inv_x.clone(); // X^{-(s-1)}
    for s in 2..=s_max {
        let x_s = ctx.mul(&x_pow, &inv_x); // X^{-s}
        let mut tail = ctx.add(
            &ctx.div(&x_pow, &ctx.int(s as u64 - 1)),
            &ctx.div(&x_s, &ctx.int(2)),
        );
        // rising = s(s+1)…(s+2j-2), pw = X^{-s-2j+1}
        let mut rising = ctx.int(s as u64);
        let mut pw = ctx.mul(&x_s, &inv_x);
        let mut j = 1usize;
        loop {
            if j >= bern.len() {
                bern = bernoulli_even(2 * bern.len(), ctx);
            }
            while fact2j.len() <= j {
                let k = fact2j.len() as u64;
                let f = ctx.mul(&fact2j[fact2j.len() - 1], &ctx.int((2 * k - 1) * (2 * k)));
                fact2j.push(f);
            }
            let term = ctx.div(&ctx.mul(&ctx.mul(&bern[j], &rising), &pw), &fact2j[j]);
            tail = ctx.add(&tail, &term);
            if small(&term, &tail) {
                break;
            }
            let a = (s + 2 * j - 1) as u64;
            rising = ctx.mul(&rising, &ctx.int(a * (a + 1)));
            pw = ctx.mul(&pw, &inv_x2);
            j += 1;
            if j > 4 * ctx.p {
                return Err(DixonError::non_convergence(
                    "extended Hurwitz zeta",
                    format!("no convergence at s = {s}"),
                ));
            }
        }
        let zeta = ctx.add(&sums[s], &tail);
        let mut c = ctx.div(&zeta, &ctx.int(s as u64));
        if s % 2 == 1 {
            c.inv_sign();
        }
        out[s] = c;
        x_pow = x_s;
    }
    Ok(out)
}
