use num_complex::Complex64;

use super::HALF_LN_2PI;
use crate::error::{DixonError, Result};

/// Shift target for the Stirling series.
const STIRLING_MIN_RE: f64 = 15.0;

/// `B_{2k} / (2k (2k-1))` for k = 1..=12.
const STIRLING_COEFFS: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
    77_683.0 / 5_796.0,
    -236_364_091.0 / 1_506_960.0,
];

fn is_pole(re: f64, im: f64) -> bool {
    im == 0.0 && re <= 0.0 && re == re.floor()
}

/// Log-gamma on the complex plane.
///
/// Returns the analytic continuation of `ln Γ(s)` from the positive real axis
/// (the branch used by most numerical libraries); `exp` of the result is
/// `Γ(s)`. The argument is shifted upward with `ln Γ(s) = ln Γ(s+N) - Σ ln(s+k)`
/// until `Re(s+N) ≥ 15`, where a 12-term Stirling series is accurate to well
/// below 1e-15.
pub fn log_gamma(s: Complex64) -> Result<Complex64> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(DixonError::domain(format!("log_gamma of non-finite {s}")));
    }
    if is_pole(s.re, s.im) {
        return Err(DixonError::Pole(s.re));
    }

    // ln Γ(s) = ln Γ(s+N) - Σ ln(s+k). Moduli are multiplied in chunks of
    // four before taking the log; arguments are summed one by one so the
    // imaginary part follows the continuous branch.
    let mut z = s;
    let mut ln_mod = 0.0;
    let mut arg_sum = 0.0;
    let mut prod = 1.0;
    let mut pending = 0;
    while z.re < STIRLING_MIN_RE {
        prod *= z.norm();
        arg_sum += z.arg();
        pending += 1;
        if pending == 4 {
            ln_mod += prod.ln();
            prod = 1.0;
            pending = 0;
        }
        z += 1.0;
    }
    ln_mod += prod.ln();

    let inv = z.inv();
    let inv2 = inv * inv;
    let mut tail = Complex64::new(0.0, 0.0);
    for &c in STIRLING_COEFFS.iter().rev() {
        tail = tail * inv2 + c;
    }
    tail *= inv;

    let stirling = (z - 0.5) * z.ln() - z + HALF_LN_2PI + tail;
    Ok(stirling - Complex64::new(ln_mod, arg_sum))
}

/// `ln |Γ(x)|` for real `x` off the poles.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(DixonError::domain(format!("ln_gamma of non-finite {x}")));
    }
    if is_pole(x, 0.0) {
        return Err(DixonError::Pole(x));
    }
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1-x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin().abs();
        return Ok(std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < STIRLING_MIN_RE {
        prod *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut tail = 0.0;
    for &c in STIRLING_COEFFS.iter().rev() {
        tail = tail * inv2 + c;
    }
    tail *= inv;
    Ok((z - 0.5) * z.ln() - z + HALF_LN_2PI + tail - prod.ln())
}

/// Real gamma function.
pub fn gamma(x: f64) -> Result<f64> {
    if is_pole(x, 0.0) {
        return Err(DixonError::Pole(x));
    }
    if x >= 1.0 && x <= 171.0 && x.fract() == 0.0 {
        return Ok((2..x as u32).fold(1.0, |acc, k| acc * k as f64));
    }
    if x > 0.0 && x < STIRLING_MIN_RE {
        // Recurrence down from the Stirling region keeps small arguments exact
        // to a few ulps.
        let n = (STIRLING_MIN_RE - x).ceil();
        let mut prod = 1.0;
        let mut z = x;
        for _ in 0..n as usize {
            prod *= z;
            z += 1.0;
        }
        return Ok(ln_gamma(z)?.exp() / prod);
    }
    let mag = ln_gamma(x)?.exp();
    if x > 0.0 {
        Ok(mag)
    } else {
        // sign of Γ on (-k-1, -k) is (-1)^{k+1}
        let k = (-x).floor() as i64;
        Ok(if k % 2 == 0 { -mag } else { mag })
    }
}

/// Complex beta function `Γ(p) Γ(q) / Γ(p+q)`.
pub fn beta(p: Complex64, q: Complex64) -> Result<Complex64> {
    Ok((log_gamma(p)? + log_gamma(q)? - log_gamma(p + q)?).exp())
}

/// Real beta function for positive arguments.
pub fn beta_real(p: f64, q: f64) -> Result<f64> {
    if p <= 0.0 || q <= 0.0 {
        return Err(DixonError::domain(format!(
            "beta_real needs positive arguments, got ({p}, {q})"
        )));
    }
    Ok((ln_gamma(p)? + ln_gamma(q)? - ln_gamma(p + q)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_gamma_at_one_and_half() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert_relative_eq!(half.re, 0.572_364_942_924_700_1, max_relative = 1e-14);
        assert_eq!(half.im, 0.0);
    }

    #[test]
    fn log_gamma_matches_multiprecision_values() {
        // mpmath.loggamma at 40 digits
        let cases = [
            (
                c(2.0, 3.0),
                c(-2.092_851_753_092_733_3, 2.302_396_543_466_867_6),
            ),
            (
                c(0.5, 20.0),
                c(-30.496_988_002_693_26, 39.916_729_108_473_326),
            ),
            (
                c(-3.5, 0.7),
                c(-2.766_560_633_983_366, -11.590_672_776_543_29),
            ),
            (
                c(1.3, -250.0),
                c(-387.362_973_599_229_9, -1131.620_753_194_297_6),
            ),
            (
                c(45.0, 2.0),
                c(125.272_344_334_800_03, 7.591_693_280_079_762),
            ),
            (
                c(-3.5, 0.0),
                c(-1.309_006_684_993_042, -12.566_370_614_359_172),
            ),
        ];
        for (s, want) in cases {
            let got = log_gamma(s).unwrap();
            assert!(
                (got - want).norm() <= 1e-12 * want.norm().max(1.0),
                "log_gamma({s}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn poles_are_rejected() {
        for k in 0..5 {
            assert!(matches!(
                log_gamma(c(-(k as f64), 0.0)),
                Err(DixonError::Pole(_))
            ));
        }
        assert!(matches!(gamma(-3.0), Err(DixonError::Pole(_))));
    }

    #[test]
    fn real_gamma_values() {
        assert_relative_eq!(gamma(5.0).unwrap(), 24.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(-0.5).unwrap(), -2.0 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(
            gamma(-1.5).unwrap(),
            4.0 * PI.sqrt() / 3.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            gamma(30.0).unwrap(),
            8.841_761_993_739_701e30,
            max_relative = 1e-13
        );
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(beta_real(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(beta_real(0.5, 1.5).unwrap(), PI / 2.0, max_relative = 1e-14);
        assert_relative_eq!(beta_real(1.0, 2.0).unwrap(), 0.5, max_relative = 1e-14);
        let b = beta(c(0.5, 0.0), c(1.5, 0.0)).unwrap();
        assert_relative_eq!(b.re, PI / 2.0, max_relative = 1e-14);
        assert!(b.im.abs() < 1e-15);
    }
}
