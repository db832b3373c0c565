//! Least-squares control-point fitting with a pseudo-inverse precomputed once per
//! `(m, n, degree)` and shared by every sphere and trajectory.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use super::bspline::{basis_row, clamped_uniform_knots};
use crate::error::{Error, Result};
use crate::geometry::Point3;

#[derive(Debug, Clone)]
pub struct SplineFitOperator {
    pub degree: usize,
    /// Trajectory points per fit.
    pub m: usize,
    /// Control points per curve.
    pub n: usize,
    pub knots: Vec<f64>,
    /// Sample parameters, uniform on `[0, 1]` with both ends included.
    pub params: Vec<f64>,
    /// `m x n` basis matrix, `phi[(j, i)] = B_i(u_j)`.
    pub phi: DMatrix<f64>,
    /// `n x m` pseudo-inverse `(phi^T phi)^-1 phi^T`.
    pub phi_pinv: DMatrix<f64>,
}

impl SplineFitOperator {
    /// Builds without consulting the cache.
    pub fn new(m: usize, n: usize, degree: usize) -> Result<SplineFitOperator> {
        if degree == 0 || n < degree + 1 || m < n {
            return Err(Error::InvalidArgument(format!(
                "spline fit needs m >= n >= degree + 1 and degree >= 1 (m={m}, n={n}, degree={degree})"
            )));
        }
        let knots = clamped_uniform_knots(n, degree);
        let params: Vec<f64> = (0..m)
            .map(|j| if m == 1 { 0.0 } else { j as f64 / (m - 1) as f64 })
            .collect();
        let mut phi = DMatrix::zeros(m, n);
        for (j, &u) in params.iter().enumerate() {
            for (i, v) in basis_row(&knots, n, degree, u).into_iter().enumerate() {
                phi[(j, i)] = v;
            }
        }
        let normal = phi.transpose() * &phi;
        let chol = normal.cholesky().ok_or(Error::RankDeficient { m, n, degree })?;
        let phi_pinv = chol.solve(&phi.transpose());
        Ok(SplineFitOperator {
            degree,
            m,
            n,
            knots,
            params,
            phi,
            phi_pinv,
        })
    }

    /// `P = phi_pinv * Q`.
    pub fn fit(&self, points: &[Point3]) -> Result<Vec<Point3>> {
        if points.len() != self.m {
            return Err(Error::InvalidArgument(format!(
                "fit operator expects {} points, got {}",
                self.m,
                points.len()
            )));
        }
        Ok((0..self.n)
            .map(|i| {
                let mut acc = nalgebra::Vector3::zeros();
                for (j, p) in points.iter().enumerate() {
                    acc += p.coords * self.phi_pinv[(i, j)];
                }
                Point3::from(acc)
            })
            .collect())
    }

    /// `phi * P`: the fitted curve at the sample parameters.
    pub fn evaluate_at_params(&self, control: &[Point3]) -> Vec<Point3> {
        (0..self.m)
            .map(|j| {
                let mut acc = nalgebra::Vector3::zeros();
                for (i, c) in control.iter().enumerate() {
                    acc += c.coords * self.phi[(j, i)];
                }
                Point3::from(acc)
            })
            .collect()
    }

    /// Sum of squared distances between fitted samples and `points`.
    pub fn residual(&self, control: &[Point3], points: &[Point3]) -> f64 {
        self.evaluate_at_params(control)
            .iter()
            .zip(points)
            .map(|(a, b)| (a - b).norm_squared())
            .sum()
    }
}

type Cache = Mutex<HashMap<(usize, usize, usize), Arc<SplineFitOperator>>>;

/// Cached operator for `(m, n, degree)`.
pub fn build_fit_operator(m: usize, n: usize, degree: usize) -> Result<Arc<SplineFitOperator>> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(op) = cache.lock().expect("fit cache poisoned").get(&(m, n, degree)) {
        return Ok(op.clone());
    }
    let op = Arc::new(SplineFitOperator::new(m, n, degree)?);
    cache
        .lock()
        .expect("fit cache poisoned")
        .entry((m, n, degree))
        .or_insert(op.clone());
    Ok(op)
}

pub fn fit_control_points(op: &SplineFitOperator, points: &[Point3]) -> Result<Vec<Point3>> {
    op.fit(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_is_left_inverse() {
        for (m, n, d) in [(16, 8, 2), (32, 4, 2), (10, 10, 3), (20, 6, 3)] {
            let op = SplineFitOperator::new(m, n, d).unwrap();
            let id = &op.phi_pinv * &op.phi;
            assert!((id - DMatrix::identity(n, n)).abs().max() < 1e-9);
        }
    }

    #[test]
    fn interpolation_when_square() {
        let op = SplineFitOperator::new(6, 6, 2).unwrap();
        let q: Vec<Point3> = (0..6).map(|i| Point3::new(i as f64, (i as f64).sin(), 0.3 * i as f64)).collect();
        let p = op.fit(&q).unwrap();
        for (a, b) in op.evaluate_at_params(&p).iter().zip(&q) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn cache_reuses_operators() {
        let a = build_fit_operator(12, 5, 2).unwrap();
        let b = build_fit_operator(12, 5, 2).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(build_fit_operator(3, 5, 2).is_err());
    }
}
