//! Ordinary least squares with classical standard errors.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use super::EconError;

/// A fitted least-squares regression. When a constant is included it is the
/// first coefficient; remaining coefficients follow the order of the supplied
/// regressor columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n_obs: usize,
    pub has_constant: bool,
}

impl OlsFit {
    pub fn n_regressors(&self) -> usize {
        self.coefficients.len()
    }

    /// Residual degrees of freedom, n − k.
    pub fn df_resid(&self) -> usize {
        self.n_obs - self.n_regressors()
    }

    pub fn t_statistics(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(&self.standard_errors)
            .map(|(b, se)| b / se)
            .collect()
    }

    /// Two-sided p-values against Student-t with n − k degrees of freedom.
    pub fn p_values(&self) -> Vec<f64> {
        let df = self.df_resid() as f64;
        self.t_statistics()
            .iter()
            .map(|&t| crate::stats::student_t_two_sided_p(t, df))
            .collect()
    }
}

/// Least-squares fit of `y` on the given columns, optionally prepending a
/// constant. Standard errors assume homoskedastic errors. R² is centered
/// when a constant is present and uncentered otherwise.
pub fn ols(y: &[f64], columns: &[&[f64]], add_constant: bool) -> Result<OlsFit, EconError> {
    let n = y.len();
    for col in columns {
        if col.len() != n {
            return Err(EconError::LengthMismatch(n, col.len()));
        }
    }
    let k = columns.len() + usize::from(add_constant);
    if k == 0 || n <= k {
        return Err(EconError::TooFewObservations { n_obs: n, n_regressors: k });
    }

    let mut x = DMatrix::<f64>::zeros(n, k);
    let mut j = 0;
    if add_constant {
        x.column_mut(0).fill(1.0);
        j = 1;
    }
    for col in columns {
        for (i, &v) in col.iter().enumerate() {
            x[(i, j)] = v;
        }
        j += 1;
    }
    let yv = DVector::from_column_slice(y);

    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &yv;
    let chol = Cholesky::new(xtx).ok_or(EconError::RankDeficient)?;
    let beta = chol.solve(&xty);
    let xtx_inv = chol.inverse();

    let fitted = &x * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();

    let (sst, n_centered) = if add_constant {
        let mean = y.iter().sum::<f64>() / n as f64;
        (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>(), n - 1)
    } else {
        (y.iter().map(|v| v * v).sum::<f64>(), n)
    };
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 0.0 };
    let adj_r_squared = if sst > 0.0 {
        1.0 - (1.0 - r_squared) * n_centered as f64 / (n - k) as f64
    } else {
        0.0
    };

    let sigma2 = ssr / (n - k) as f64;
    let standard_errors: Vec<f64> =
        (0..k).map(|i| (sigma2 * xtx_inv[(i, i)]).sqrt()).collect();

    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        standard_errors,
        residuals,
        r_squared,
        adj_r_squared,
        n_obs: n,
        has_constant: add_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_linear_relationship_gives_unit_r2_zero_residuals() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v).collect();
        let fit = ols(&y, &[&x], true).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficients[1], 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        for e in &fit.residuals {
            assert_abs_diff_eq!(*e, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_on_constant_defines_r2_as_zero() {
        let y = vec![4.2; 8];
        let fit = ols(&y, &[], true).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 4.2, epsilon = 1e-12);
        assert_eq!(fit.r_squared, 0.0);
        assert_eq!(fit.adj_r_squared, 0.0);
    }

    #[test]
    fn matches_hand_checked_two_point_slope() {
        // y on x with two free parameters and three points: closed form.
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 2.0, 4.0];
        let fit = ols(&y, &[&x], true).unwrap();
        // slope = cov/var = ((0-1)(1-7/3)+(0)(2-7/3)+(1)(4-7/3))/2 = 1.5
        assert_abs_diff_eq!(fit.coefficients[1], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coefficients[0], 7.0 / 3.0 - 1.5, epsilon = 1e-12);
        assert_eq!(fit.n_obs, 3);
        assert_eq!(fit.df_resid(), 1);
    }

    #[test]
    fn residuals_orthogonal_to_regressors_and_sum_to_fitted() {
        let x1: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let x2: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let y: Vec<f64> = (0..30)
            .map(|i| 1.0 + 0.5 * x1[i] - 2.0 * x2[i] + ((i * 17 % 7) as f64 - 3.0) * 0.3)
            .collect();
        let fit = ols(&y, &[&x1, &x2], true).unwrap();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        assert_abs_diff_eq!(fit.residuals.iter().sum::<f64>(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(dot(&fit.residuals, &x1), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(dot(&fit.residuals, &x2), 0.0, epsilon = 1e-8);
        // fitted + residual = y
        for i in 0..30 {
            let fitted = fit.coefficients[0]
                + fit.coefficients[1] * x1[i]
                + fit.coefficients[2] * x2[i];
            assert_abs_diff_eq!(fitted + fit.residuals[i], y[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn r2_never_decreases_when_adding_a_regressor() {
        let x1: Vec<f64> = (0..25).map(|i| (i as f64 * 1.3).cos()).collect();
        let x2: Vec<f64> = (0..25).map(|i| ((i * i) % 13) as f64).collect();
        let y: Vec<f64> = (0..25).map(|i| x1[i] * 2.0 + ((i % 5) as f64) - 2.0).collect();
        let small = ols(&y, &[&x1], true).unwrap();
        let big = ols(&y, &[&x1, &x2], true).unwrap();
        assert!(big.r_squared >= small.r_squared - 1e-12);
    }

    #[test]
    fn uncentered_r2_used_without_constant() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.1, 5.9, 8.0];
        let fit = ols(&y, &[&x], false).unwrap();
        let ssr: f64 = fit.residuals.iter().map(|e| e * e).sum();
        let sst: f64 = y.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(fit.r_squared, 1.0 - ssr / sst, epsilon = 1e-12);
        assert!(!fit.has_constant);
    }

    #[test]
    fn rejects_rank_deficient_and_tiny_samples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let x_dup = x;
        let y = [1.0, 2.0, 3.0, 5.0];
        assert_eq!(ols(&y, &[&x, &x_dup], true).unwrap_err(), EconError::RankDeficient);
        assert_eq!(
            ols(&y[..2], &[&x[..2]], true).unwrap_err(),
            EconError::TooFewObservations { n_obs: 2, n_regressors: 2 }
        );
        assert_eq!(
            ols(&y, &[&x[..3]], true).unwrap_err(),
            EconError::LengthMismatch(4, 3)
        );
    }

    #[test]
    fn standard_errors_match_simple_regression_formula() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.1, 3.9, 6.2, 7.8, 10.1];
        let fit = ols(&y, &[&x], true).unwrap();
        let ssr: f64 = fit.residuals.iter().map(|e| e * e).sum();
        let s2 = ssr / 3.0;
        let mean_x = 3.0;
        let sxx: f64 = x.iter().map(|v| (v - mean_x) * (v - mean_x)).sum();
        assert_abs_diff_eq!(fit.standard_errors[1], (s2 / sxx).sqrt(), epsilon = 1e-12);
        let se0 = (s2 * (1.0 / 5.0 + mean_x * mean_x / sxx)).sqrt();
        assert_abs_diff_eq!(fit.standard_errors[0], se0, epsilon = 1e-12);
    }
}
