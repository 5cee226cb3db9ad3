//! Nyström discretization of the equation on `[0, A]` and Picard iteration.
//!
//! The `y^{a-1}` factor of the kernel goes into a Gauss–Jacobi weight, the rest
//! of the kernel is sampled at the nodes, and `(I - K) f = 1` is solved densely.
//! Off the nodes the solution is extended by the equation itself (Nyström
//! interpolation), so `f(0) = 1` exactly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{DixonError, Result};
use crate::problem::{jacobi_nodes_on_interval, kernel_without_weight, ProblemSpec};
use crate::quadrature::ComplexSum;

pub const MIN_NODES: usize = 8;
pub const MAX_NODES: usize = 2048;

/// A solved Nyström system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NystromGrid {
    pub spec: ProblemSpec,
    pub n: usize,
    /// Gauss–Jacobi abscissas in `(0, A)`, increasing
    pub nodes: Vec<f64>,
    /// Quadrature weights including the `y^{a-1}` factor
    pub weights: Vec<f64>,
    pub f_values: Vec<Complex64>,
    /// Infinity-norm condition number estimate of `I - K` (a lower bound)
    pub condition_estimate: f64,
    /// `‖(I-K)f - 1‖∞ / (‖I-K‖∞ ‖f‖∞ + 1)`
    pub backward_error: f64,
    /// Picard only: iterations used
    pub iterations: Option<usize>,
    /// Picard only: observed ratio of successive sup-norm updates
    pub contraction: Option<f64>,
}

fn check_size(n: usize) -> Result<()> {
    if !(MIN_NODES..=MAX_NODES).contains(&n) {
        return Err(DixonError::Size(format!(
            "Nyström node count must lie in [{MIN_NODES}, {MAX_NODES}], got {n}"
        )));
    }
    Ok(())
}

/// Discrete operator `K_ij = w_j k(x_i, y_j)`.
fn assemble(spec: &ProblemSpec, nodes: &[f64], weights: &[f64]) -> DMatrix<Complex64> {
    let n = nodes.len();
    DMatrix::from_fn(n, n, |i, j| {
        kernel_without_weight(nodes[i], nodes[j], spec) * weights[j]
    })
}

fn sup(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn row_sum_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn backward_error(system: &DMatrix<Complex64>, f: &DVector<Complex64>) -> f64 {
    let n = f.len();
    let resid = system * f - DVector::from_element(n, Complex64::new(1.0, 0.0));
    sup(&resid) / (row_sum_norm(system) * sup(f) + 1.0)
}

/// Solves `(I - K) f = 1` on an `n`-node grid by LU factorization.
pub fn nystrom_solve(spec: &ProblemSpec, n: usize) -> Result<NystromGrid> {
    check_size(n)?;
    let (nodes, weights) = jacobi_nodes_on_interval(spec, n)?;
    let k = assemble(spec, &nodes, &weights);
    let system = DMatrix::<Complex64>::identity(n, n) - &k;
    let lu = system.clone().lu();
    let ones = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let f = lu
        .solve(&ones)
        .ok_or_else(|| DixonError::Singular(format!("I - K is singular for {spec}, n = {n}")))?;
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DixonError::Singular(format!(
            "non-finite solution for {spec}, n = {n}"
        )));
    }

    // ‖A⁻¹‖∞ from below with a few probe right-hand sides
    let mut inv_norm = sup(&f);
    let alternating = DVector::from_fn(n, |i, _| {
        Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    });
    if let Some(z) = lu.solve(&alternating) {
        inv_norm = inv_norm.max(sup(&z));
    }
    let signs = f.map(|z| {
        if z.norm() > 0.0 {
            z / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    if let Some(z) = lu.solve(&signs) {
        inv_norm = inv_norm.max(sup(&z));
    }
    let condition_estimate = row_sum_norm(&system) * inv_norm;
    let backward_error = backward_error(&system, &f);

    Ok(NystromGrid {
        spec: *spec,
        n,
        nodes,
        weights,
        f_values: f.iter().copied().collect(),
        condition_estimate,
        backward_error,
        iterations: None,
        contraction: None,
    })
}

/// Nyström interpolation `f(x) = 1 + Σ_j w_j k(x, y_j) f_j` for `x ∈ [0, A]`.
pub fn nystrom_eval(grid: &NystromGrid, x: f64) -> Result<Complex64> {
    let big_a = grid.spec.big_a();
    if !(0.0..=big_a).contains(&x) {
        return Err(DixonError::range(format!(
            "Nyström evaluation needs 0 <= x <= {big_a}, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if let Ok(k) = grid
        .nodes
        .binary_search_by(|y| y.partial_cmp(&x).expect("finite nodes"))
    {
        return Ok(grid.f_values[k]);
    }
    let mut acc = ComplexSum::new();
    for ((&y, &w), &f) in grid.nodes.iter().zip(&grid.weights).zip(&grid.f_values) {
        acc.add(kernel_without_weight(x, y, &grid.spec) * (w * f));
    }
    Ok(Complex64::new(1.0, 0.0) + acc.value())
}

/// Successive approximation `f ← 1 + K f` from `f ≡ 1` on the Nyström grid.
///
/// Stops when the sup-norm update drops below `tol`. Fails after `max_iter`
/// sweeps, or early once the updates have grown for five sweeps in a row.
pub fn picard_solve(
    spec: &ProblemSpec,
    n: usize,
    max_iter: usize,
    tol: f64,
) -> Result<NystromGrid> {
    check_size(n)?;
    if !(tol > 0.0) {
        return Err(DixonError::domain(format!(
            "Picard tolerance must be positive, got {tol}"
        )));
    }
    let (nodes, weights) = jacobi_nodes_on_interval(spec, n)?;
    let k = assemble(spec, &nodes, &weights);
    let ones = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let mut f = ones.clone();
    let mut prev_change = f64::INFINITY;
    let mut ratio = f64::NAN;
    let mut growing = 0;
    for iter in 1..=max_iter {
        let next = &ones + &k * &f;
        let change = sup(&(&next - &f));
        f = next;
        if prev_change.is_finite() && prev_change > 0.0 {
            ratio = change / prev_change;
        }
        if change < tol {
            let system = DMatrix::<Complex64>::identity(n, n) - &k;
            return Ok(NystromGrid {
                spec: *spec,
                n,
                nodes,
                weights,
                f_values: f.iter().copied().collect(),
                condition_estimate: f64::NAN,
                backward_error: backward_error(&system, &f),
                iterations: Some(iter),
                contraction: Some(ratio),
            });
        }
        growing = if change > prev_change { growing + 1 } else { 0 };
        if growing >= 5 || !change.is_finite() {
            return Err(DixonError::non_convergence(
                "Picard iteration",
                format!("diverging after {iter} sweeps, update ratio {ratio:.4}"),
            ));
        }
        prev_change = change;
    }
    Err(DixonError::non_convergence(
        "Picard iteration",
        format!(
            "{max_iter} sweeps exhausted, update {prev_change:.3e}, contraction ratio {ratio:.4}"
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::residual_supnorm;

    fn spec(a: f64, big_a: f64, lam: f64) -> ProblemSpec {
        ProblemSpec::real(a, big_a, lam).unwrap()
    }

    #[test]
    fn size_limits() {
        let s = spec(0.5, 1.0, 0.5);
        assert!(matches!(nystrom_solve(&s, 7), Err(DixonError::Size(_))));
        assert!(matches!(nystrom_solve(&s, 2049), Err(DixonError::Size(_))));
        assert!(nystrom_solve(&s, 8).is_ok());
    }

    #[test]
    fn grid_invariants() {
        let s = spec(0.5, 2.0, 0.5);
        let g = nystrom_solve(&s, 64).unwrap();
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes.iter().all(|&y| y > 0.0 && y < 2.0));
        assert!(g.weights.iter().all(|&w| w > 0.0));
        let sum: f64 = g.weights.iter().sum();
        assert!((sum - 2f64.powf(0.5) / 0.5).abs() < 1e-12 * sum);
        assert!(g.backward_error < 1e-12, "{}", g.backward_error);
        assert!(g.condition_estimate >= 1.0);
    }

    #[test]
    fn interpolation_hits_nodes_and_origin() {
        let s = spec(1.0, 1.0, 0.3);
        let g = nystrom_solve(&s, 32).unwrap();
        assert_eq!(nystrom_eval(&g, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        for k in [0, 7, 31] {
            assert_eq!(nystrom_eval(&g, g.nodes[k]).unwrap(), g.f_values[k]);
        }
        assert!(nystrom_eval(&g, 1.0 + 1e-12).is_err());
        assert!(nystrom_eval(&g, -1e-12).is_err());
    }

    #[test]
    fn interpolation_is_consistent_with_the_discrete_system() {
        // evaluating the interpolant slightly off a node stays close to the node value
        let s = spec(1.0, 1.0, 0.3);
        let g = nystrom_solve(&s, 64).unwrap();
        let k = 40;
        let near = nystrom_eval(&g, g.nodes[k] * (1.0 + 1e-9)).unwrap();
        assert!((near - g.f_values[k]).norm() < 1e-8);
    }

    #[test]
    fn small_coupling_stays_near_one() {
        let s = spec(0.5, 1.0, 0.01);
        let g = nystrom_solve(&s, 128).unwrap();
        assert!(g.f_values.iter().all(|f| (f - 1.0).norm() < 0.02));
    }

    #[test]
    fn picard_first_sweep_is_one_plus_k_one() {
        let s = spec(0.5, 1.0, 0.5);
        let (nodes, weights) = jacobi_nodes_on_interval(&s, 16).unwrap();
        let k = assemble(&s, &nodes, &weights);
        let ones = DVector::from_element(16, Complex64::new(1.0, 0.0));
        let expect = &ones + &k * &ones;
        // with an infinite tolerance the loop stops after one sweep
        let g = picard_solve(&s, 16, 1, f64::INFINITY).unwrap();
        assert_eq!(g.iterations, Some(1));
        for (a, b) in g.f_values.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn picard_matches_direct_solve() {
        let s = spec(1.0, 1.0, 0.4);
        let direct = nystrom_solve(&s, 128).unwrap();
        let pic = picard_solve(&s, 128, 500, 1e-14).unwrap();
        let diff = direct
            .f_values
            .iter()
            .zip(&pic.f_values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "{diff}");
    }

    #[test]
    fn picard_contracts_at_about_the_coupling() {
        // Row sums of |K| approach |λ| near x = 0. The observed asymptotic
        // ratio (≈ 0.3515 for these parameters) lies above the σ = 1/2 ratio
        // |λ|·B(a+1/2, a+1/2)/B(a, a+1) = 1/π and below |λ|.
        let s = spec(0.5, 1.0, 0.5);
        let pic = picard_solve(&s, 256, 500, 1e-12).unwrap();
        let ratio = pic.contraction.unwrap();
        assert!(
            ratio > 1.0 / std::f64::consts::PI + 0.02 && ratio < 0.5,
            "{ratio}"
        );
    }

    #[test]
    fn picard_reports_exhaustion() {
        let s = spec(0.5, 1.0, 0.5);
        match picard_solve(&s, 64, 3, 1e-14) {
            Err(DixonError::NonConvergence { detail, .. }) => {
                assert!(detail.contains("contraction"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_is_not_a_fixed_point() {
        let s = spec(0.5, 1.0, 0.5);
        for &c in &[0.5, 1.0, 2.0] {
            let r = residual_supnorm(|_| Ok(Complex64::new(c, 0.0)), &s, 256, 41).unwrap();
            assert!(r > 1e-3);
        }
    }
}
