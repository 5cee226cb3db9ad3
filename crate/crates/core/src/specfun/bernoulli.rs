use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{DixonError, Result};

/// Largest index served by [`bernoulli`].
pub const BERNOULLI_MAX: usize = 60;

fn table() -> &'static [f64; BERNOULLI_MAX + 1] {
    static TABLE: OnceLock<[f64; BERNOULLI_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Exact rationals through Σ_{j≤n} C(n+1, j) B_j = 0; the floating-point
        // version of this recurrence loses all accuracy well before n = 60.
        let mut exact: Vec<BigRational> = Vec::with_capacity(BERNOULLI_MAX + 1);
        exact.push(BigRational::from_integer(BigInt::from(1)));
        for n in 1..=BERNOULLI_MAX {
            let mut binom = BigInt::from(1); // C(n+1, 0)
            let mut acc = BigRational::zero();
            for (j, bj) in exact.iter().enumerate() {
                acc += BigRational::from_integer(binom.clone()) * bj;
                binom = binom * BigInt::from(n + 1 - j) / BigInt::from(j + 1);
            }
            exact.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
        }
        let mut out = [0.0; BERNOULLI_MAX + 1];
        for (slot, b) in out.iter_mut().zip(&exact) {
            *slot = b.to_f64().unwrap_or(f64::NAN);
        }
        out
    })
}

/// Bernoulli number `B_n` with the convention `B_1 = -1/2`.
pub fn bernoulli(n: usize) -> Result<f64> {
    if n > BERNOULLI_MAX {
        return Err(DixonError::Size(format!(
            "bernoulli({n}): only n <= {BERNOULLI_MAX} is tabulated in double precision"
        )));
    }
    Ok(table()[n])
}
