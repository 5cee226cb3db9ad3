//! Solvers for the generalized Dixon integral equation
//!
//! ```text
//! f(x) = 1 + λ x^{a+1} / B(a, a+1) ∫₀^A y^{a-1} (x + y)^{-1-2a} f(y) dy,   0 ≤ x ≤ A,
//! ```
//!
//! computed three ways so the answers can be checked against each other:
//!
//! * [`oracle`]: Nyström discretization on a Gauss–Jacobi grid (and Picard
//!   iteration on the same grid), a brute-force ground truth on `[0, A]`.
//! * [`mellin`]: direct quadrature of the Mellin–Barnes contour integrals on a
//!   vertical line `Re s = σ`, both inside `[0, A]` and for `x ≥ A`.
//! * [`series`]: the Neumann series of the contour integral evaluated term by
//!   term through residues at the multiple poles `s = -a - m` of
//!   `[Γ(a+s) Γ(a+1-s)]^n`.
//!
//! [`specfun`] and [`combinat`] hold the gamma-function and Faà di Bruno
//! machinery the residue series is built from; [`problem`] holds the problem
//! definition and the residual operator used to check any candidate solution
//! against the equation itself.

pub mod combinat;
pub mod driver;
pub mod error;
pub mod mellin;
pub mod oracle;
pub mod problem;
pub mod quadrature;
pub mod series;
pub mod specfun;
pub mod validation;

pub use error::{DixonError, Result};
pub use num_complex::Complex64;
pub use problem::{Method, MethodResult, ProblemSpec};
