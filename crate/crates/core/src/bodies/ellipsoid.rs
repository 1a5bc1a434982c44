use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::numeric::ball_volume;

/// Origin-centred ellipsoid `{x : xᵀ Q x ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    q: DMatrix<f64>,
    q_inv: DMatrix<f64>,
    det: f64,
}

impl Ellipsoid {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() == 0 {
            return Err(Error::InvalidInput(
                "Q must be a non-empty square matrix".into(),
            ));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("Q has non-finite entries".into()));
        }
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * q.amax().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "Q is not symmetric (defect {asym:e})"
            )));
        }
        let q = (&q + q.transpose()) * 0.5;
        let eig = SymmetricEigen::new(q.clone());
        let min = eig.eigenvalues.min();
        if min <= 1e-14 * eig.eigenvalues.amax() {
            return Err(Error::InvalidInput(format!(
                "Q is not positive definite (smallest eigenvalue {min:e})"
            )));
        }
        let q_inv = q
            .clone()
            .try_inverse()
            .ok_or(Error::Singular { det: 0.0 })?;
        let q_inv = (&q_inv + q_inv.transpose()) * 0.5;
        let det = eig.eigenvalues.product();
        Ok(Ellipsoid { q, q_inv, det })
    }

    /// Ball of radius `r`.
    pub fn ball(n: usize, r: f64) -> Self {
        Ellipsoid::new(DMatrix::identity(n, n) / (r * r)).expect("ball is valid")
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Ellipsoid::new(DMatrix::from_diagonal(&DVector::from_row_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.q_inv
    }

    fn quad_inv(&self, xi: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += xi[i] * self.q_inv[(i, j)] * xi[j];
            }
        }
        s
    }

    pub fn support(&self, xi: &[f64]) -> f64 {
        self.quad_inv(xi).max(0.0).sqrt()
    }

    /// `∇h(ξ) = Q⁻¹ξ / h(ξ)`, the boundary point with outer normal `ξ`.
    pub fn gradient(&self, xi: &[f64]) -> Vec<f64> {
        let h = self.support(xi);
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.q_inv[(i, j)] * xi[j]).sum::<f64>() / h)
            .collect()
    }

    /// `∇²h(ξ) = Q⁻¹/h − (Q⁻¹ξ)(Q⁻¹ξ)ᵀ/h³`.
    pub fn hessian(&self, xi: &[f64]) -> DMatrix<f64> {
        let h = self.support(xi);
        let m = &self.q_inv * DVector::from_row_slice(xi);
        &self.q_inv / h - (&m * m.transpose()) / (h * h * h)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * self.q[(i, j)] * x[j];
            }
        }
        s <= 1.0 + tol
    }

    /// `ρ(x) = (xᵀQx)^{-1/2}`.
    pub fn radial(&self, x: &[f64]) -> f64 {
        let v = DVector::from_row_slice(x);
        1.0 / (v.transpose() * &self.q * &v)[0].sqrt()
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.dim()) / self.det.sqrt()
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn polar(&self) -> Ellipsoid {
        Ellipsoid {
            q: self.q_inv.clone(),
            q_inv: self.q.clone(),
            det: 1.0 / self.det,
        }
    }

    pub fn scale_by(&self, t: f64) -> Result<Ellipsoid> {
        if t <= 0.0 {
            if t == 0.0 {
                return Err(Error::Degenerate("scaling by zero".into()));
            }
            return self.scale_by(-t);
        }
        Ellipsoid::new(&self.q / (t * t))
    }

    /// `T(E) = {y : yᵀ T^{-T} Q T^{-1} y ≤ 1}`.
    pub fn linear_image(&self, t: &DMatrix<f64>) -> Result<Ellipsoid> {
        check_dim(self.dim(), t.nrows())?;
        let det = t.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::Singular { det });
        }
        let ti = t.clone().try_inverse().ok_or(Error::Singular { det })?;
        Ellipsoid::new(ti.transpose() * &self.q * ti)
    }

    /// `Q^{-1/2}`, mapping the unit ball onto the ellipsoid.
    pub fn sqrt_inverse(&self) -> DMatrix<f64> {
        let eig = SymmetricEigen::new(self.q.clone());
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_examples() {
        let b = Ellipsoid::ball(2, 1.0);
        assert_relative_eq!(b.support(&[3.0, 4.0]), 5.0, epsilon = 1e-14);
        assert_relative_eq!(b.volume(), std::f64::consts::PI, epsilon = 1e-14);
    }

    #[test]
    fn polar_inverts_q() {
        let e = Ellipsoid::diagonal(&[4.0, 1.0]).unwrap();
        let p = e.polar();
        assert_relative_eq!(p.matrix()[(0, 0)], 0.25);
        assert_relative_eq!(p.matrix()[(1, 1)], 1.0);
    }

    #[test]
    fn rejects_invalid_forms() {
        let nonsym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(Ellipsoid::new(nonsym).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(Ellipsoid::new(indefinite).is_err());
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let e = Ellipsoid::new(DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.7],
        ))
        .unwrap();
        let u = [0.3, -0.5, 0.8];
        let hess = e.hessian(&u);
        let step = 1e-5;
        for j in 0..3 {
            let mut up = u;
            let mut dn = u;
            up[j] += step;
            dn[j] -= step;
            let (gp, gm) = (e.gradient(&up), e.gradient(&dn));
            for i in 0..3 {
                assert!(((gp[i] - gm[i]) / (2.0 * step) - hess[(i, j)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn linear_image_support() {
        let e = Ellipsoid::diagonal(&[4.0, 1.0]).unwrap();
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.2, 1.3]);
        let img = e.linear_image(&t).unwrap();
        let xi = [0.7, -0.4];
        let tx = [
            t[(0, 0)] * xi[0] + t[(1, 0)] * xi[1],
            t[(0, 1)] * xi[0] + t[(1, 1)] * xi[1],
        ];
        assert_relative_eq!(img.support(&xi), e.support(&tx), epsilon = 1e-12);
    }
}
