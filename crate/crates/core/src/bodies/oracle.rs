use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::numeric::{norm, probe_directions};

pub type SupportFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A convex body given only through its support function and, optionally,
/// exact first and second derivatives. Missing derivatives are replaced by
/// central finite differences.
#[derive(Clone)]
pub struct SupportOracle {
    n: usize,
    h: SupportFn,
    grad: Option<GradientFn>,
    hess: Option<HessianFn>,
}

impl fmt::Debug for SupportOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupportOracle")
            .field("n", &self.n)
            .field("exact_gradient", &self.grad.is_some())
            .field("exact_hessian", &self.hess.is_some())
            .finish()
    }
}

impl SupportOracle {
    /// Wraps `h`, checking positive homogeneity on a fixed direction set.
    pub fn new(n: usize, h: SupportFn) -> Result<Self> {
        let oracle = SupportOracle {
            n,
            h,
            grad: None,
            hess: None,
        };
        for u in probe_directions(n) {
            let u = u.as_slice();
            let h1 = (oracle.h)(u);
            let u2: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
            let h2 = (oracle.h)(&u2);
            if !h1.is_finite() || (h2 - 2.0 * h1).abs() > 1e-9 * h1.abs().max(1.0) {
                return Err(Error::InvalidInput(
                    "support callback is not positively 1-homogeneous".into(),
                ));
            }
        }
        Ok(oracle)
    }

    /// Adds exact derivative callbacks; the Hessian is checked to be
    /// positive semidefinite on a fixed direction set.
    pub fn with_derivatives(mut self, grad: GradientFn, hess: HessianFn) -> Result<Self> {
        self.grad = Some(grad);
        self.hess = Some(hess);
        self.check_hessian()?;
        Ok(self)
    }

    fn check_hessian(&self) -> Result<()> {
        for u in probe_directions(self.n) {
            let hm = self.hessian(u.as_slice());
            let scale = hm.amax().max(1e-300);
            let min = SymmetricEigen::new((&hm + hm.transpose()) * 0.5)
                .eigenvalues
                .min();
            if min < -1e-6 * scale {
                return Err(Error::InvalidInput(
                    "support Hessian is not positive semidefinite".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn derivatives_exact(&self) -> bool {
        self.grad.is_some() && self.hess.is_some()
    }

    pub(crate) fn parts(&self) -> (SupportFn, Option<GradientFn>, Option<HessianFn>) {
        (self.h.clone(), self.grad.clone(), self.hess.clone())
    }

    pub(crate) fn from_parts(
        n: usize,
        h: SupportFn,
        grad: Option<GradientFn>,
        hess: Option<HessianFn>,
    ) -> Self {
        SupportOracle { n, h, grad, hess }
    }

    pub fn support(&self, xi: &[f64]) -> f64 {
        if xi.iter().all(|x| *x == 0.0) {
            return 0.0;
        }
        (self.h)(xi)
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(u);
        }
        let step = 1e-6 * norm(u).max(1e-300);
        (0..self.n)
            .map(|i| {
                let mut a = u.to_vec();
                let mut b = u.to_vec();
                a[i] += step;
                b[i] -= step;
                ((self.h)(&a) - (self.h)(&b)) / (2.0 * step)
            })
            .collect()
    }

    pub fn hessian(&self, u: &[f64]) -> DMatrix<f64> {
        if let Some(h) = &self.hess {
            return h(u);
        }
        let step = 1e-4 * norm(u).max(1e-300);
        let f = |v: &[f64]| (self.h)(v);
        let mut m = DMatrix::zeros(self.n, self.n);
        let h0 = f(u);
        for i in 0..self.n {
            let mut a = u.to_vec();
            let mut b = u.to_vec();
            a[i] += step;
            b[i] -= step;
            m[(i, i)] = (f(&a) - 2.0 * h0 + f(&b)) / (step * step);
            for j in i + 1..self.n {
                let mut pp = u.to_vec();
                let mut pm = u.to_vec();
                let mut mp = u.to_vec();
                let mut mm = u.to_vec();
                pp[i] += step;
                pp[j] += step;
                pm[i] += step;
                pm[j] -= step;
                mp[i] -= step;
                mp[j] += step;
                mm[i] -= step;
                mm[j] -= step;
                let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * step * step);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}
