//! Dense linear algebra helpers on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Solution of an equilibrated dense system together with the 1-norm
/// condition number of the equilibrated matrix.
#[derive(Debug, Clone)]
pub struct ConditionedSolve {
    pub solution: DVector<Complex64>,
    pub condition: f64,
}

/// Solves `a x = b` with LU and partial pivoting after row and column
/// max-abs equilibration. Returns `None` when the LU factorization is exactly
/// singular or the condition number is not finite.
pub fn solve_conditioned(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<ConditionedSolve> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut scaled = a.clone();
    let mut rhs = b.clone();

    let mut row_scale = Vec::with_capacity(n);
    for i in 0..n {
        let m = scaled.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = if m > 0.0 { 1.0 / m } else { 1.0 };
        row_scale.push(s);
        for j in 0..n {
            scaled[(i, j)] *= s;
        }
        rhs[i] *= s;
    }
    let mut col_scale = Vec::with_capacity(n);
    for j in 0..n {
        let m = scaled.column(j).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = if m > 0.0 { 1.0 / m } else { 1.0 };
        col_scale.push(s);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }

    let lu = scaled.clone().lu();
    let inverse = lu.try_inverse()?;
    let condition = one_norm(&scaled) * one_norm(&inverse);
    if !condition.is_finite() {
        return None;
    }
    let mut solution = &inverse * rhs;
    for (j, s) in col_scale.iter().enumerate() {
        solution[j] *= *s;
    }
    Some(ConditionedSolve { solution, condition })
}

/// Maximum absolute column sum.
pub fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves a small square complex system, returning `None` if singular.
pub fn solve(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    a.clone().lu().solve(b)
}

/// Roots of the real polynomial `coeffs[0] + coeffs[1] z + … + coeffs[n] zⁿ`
/// as eigenvalues of its companion matrix, each refined by a few Newton steps.
///
/// # Panics
///
/// Panics if the leading coefficient is zero.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    let lead = coeffs[degree];
    assert!(lead != 0.0, "leading coefficient must be nonzero");
    if degree == 0 {
        return Vec::new();
    }
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
    }
    let eigen = if degree == 1 {
        alloc::vec![Complex64::new(companion[(0, 0)], 0.0)]
    } else {
        companion.complex_eigenvalues().iter().copied().collect::<Vec<_>>()
    };
    eigen.into_iter().map(|z| newton_polish(coeffs, z)).collect()
}

fn newton_polish(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (p, dp) = horner(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        // Accept only steps that do not increase the residual.
        if horner(coeffs, next).0.norm() <= p.norm() {
            z = next;
        } else {
            break;
        }
        if step.norm() <= 1e-17 * z.norm() {
            break;
        }
    }
    z
}

/// Value and derivative of a real-coefficient polynomial at a complex point.
pub fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_roots() {
        // z² - 3z + 2 = (z - 1)(z - 2)
        let mut roots = polynomial_roots(&[2.0, -3.0, 1.0]);
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((roots[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((roots[1] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_pair() {
        // z² + 1
        let roots = polynomial_roots(&[1.0, 0.0, 1.0]);
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-14);
            assert!(r.re.abs() < 1e-14);
        }
    }

    #[test]
    fn quintic_residuals_small() {
        let coeffs = [-0.3, 1.0, -1.0, 2.0, -5.0, 14.0];
        let roots = polynomial_roots(&coeffs);
        assert_eq!(roots.len(), 5);
        for r in roots {
            let scale: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| a.abs() * r.norm().powi(j as i32))
                .sum();
            assert!(horner(&coeffs, r).0.norm() / scale < 1e-14);
        }
    }

    #[test]
    fn conditioned_solve_matches_direct() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1e6, 0.0), c(2.0, 1.0), c(0.0, 1.0), c(3e-4, 0.0)]);
        let b = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, -1.0)]);
        let out = solve_conditioned(&a, &b).unwrap();
        let r = &a * &out.solution - &b;
        assert!(r.norm() < 1e-10);
        assert!(out.condition < 10.0);
    }

    #[test]
    fn singular_system_detected() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        let b = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        match solve_conditioned(&a, &b) {
            None => {}
            Some(out) => assert!(out.condition > 1e15),
        }
    }
}
