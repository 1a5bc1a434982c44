//! Seeded generation of test instances.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Ellipsoid, Polytope};
use crate::error::{Error, Result};
use crate::numeric::condition_number;

const MAX_ATTEMPTS: usize = 10_000;

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng))
}

/// Gaussian matrix rescaled to determinant 1, rejected while its condition
/// number exceeds `kappa_max`.
pub fn random_sl_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    kappa_max: f64,
) -> Result<DMatrix<f64>> {
    for _ in 0..MAX_ATTEMPTS {
        let mut m = gaussian_matrix(rng, n);
        let mut det = m.determinant();
        if det.abs() < 1e-8 {
            continue;
        }
        if det < 0.0 {
            m.row_mut(0).neg_mut();
            det = -det;
        }
        m /= det.powf(1.0 / n as f64);
        if condition_number(&m) <= kappa_max {
            return Ok(m);
        }
    }
    Err(Error::RejectionExhausted(MAX_ATTEMPTS))
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let len = crate::numeric::norm(&v);
        if len > 1e-6 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Hull of `count` random points with radii in `[0.5, 1]`. With
/// `contains_origin`, samples are redrawn until every facet lies at
/// distance at least 0.05 from the origin.
pub fn random_polytope<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    count: usize,
    contains_origin: bool,
) -> Result<Polytope> {
    if count <= n {
        return Err(Error::InvalidInput(format!(
            "need more than {n} points for a full-dimensional polytope"
        )));
    }
    for _ in 0..MAX_ATTEMPTS {
        let shift: Vec<f64> = if contains_origin {
            vec![0.0; n]
        } else {
            random_unit(rng, n).into_iter().map(|x| 1.5 * x).collect()
        };
        let pts: Vec<Vec<f64>> = (0..count)
            .map(|_| {
                let r = rng.random_range(0.5..1.0);
                random_unit(rng, n)
                    .iter()
                    .zip(&shift)
                    .map(|(x, s)| r * x + s)
                    .collect()
            })
            .collect();
        let p = match Polytope::from_vertices(pts) {
            Ok(p) => p,
            Err(_) => continue,
        };
        if !contains_origin || p.min_offset() >= 0.05 {
            return Ok(p);
        }
    }
    Err(Error::RejectionExhausted(MAX_ATTEMPTS))
}

/// Ellipsoid `RᵀDR` with a random rotation and eigenvalues in `[1/4, 4]`.
pub fn random_ellipsoid<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Ellipsoid> {
    let g = gaussian_matrix(rng, n);
    let q = g.qr().q();
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            4f64.powf(rng.random_range(-1.0..1.0))
        } else {
            0.0
        }
    });
    let m = q.transpose() * d * &q;
    Ellipsoid::new((&m + m.transpose()) * 0.5)
}
