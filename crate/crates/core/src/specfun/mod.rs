//! Gamma-family special functions.
//!
//! Everything the solvers need from the gamma function lives here: complex
//! log-gamma for the contour integrands, beta functions, digamma/polygamma via
//! the Hurwitz zeta function, Bernoulli numbers, Taylor coefficients of `Γ` and
//! `1/Γ` at regular points, and the Laurent coefficients of `Γ` at its poles.

mod bernoulli;
mod gamma;
mod laurent;
pub(crate) mod mp;
mod zeta;

pub use bernoulli::{bernoulli, BERNOULLI_MAX};
pub use gamma::{beta, beta_real, gamma, ln_gamma, log_gamma};
pub use laurent::{
    gamma_derivs, gamma_taylor_normalized, laurent_coeff_bernoulli_form, laurent_coeffs,
    recip_gamma_derivs, LaurentTable, RecipGammaDerivs,
};
pub use zeta::{digamma, hurwitz_zeta, polygamma, riemann_zeta};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln(2π) / 2`
pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `exp` of a power series with zero constant term, truncated to `len` terms.
pub(crate) fn series_exp(b: &[f64], len: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    if len == 0 {
        return e;
    }
    e[0] = 1.0;
    for k in 1..len {
        let mut acc = 0.0;
        for j in 1..=k {
            if let Some(&bj) = b.get(j) {
                acc += j as f64 * bj * e[k - j];
            }
        }
        e[k] = acc / k as f64;
    }
    e
}
