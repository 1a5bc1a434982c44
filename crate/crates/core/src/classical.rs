//! Projection bodies, `L^p` centroid and projection bodies, `Q`-projection
//! and `Q`-mean-width bodies.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::bodies::{ConvexBody, PointSet, Polytope, Support};
use crate::error::{check_dim, Error, Result};
use crate::numeric::{dot, norm, CompensatedSum};
use crate::quad::{
    integrate_simplex_fixed, integrate_simplices, mixed_volume_last, split_simplex, QuadOptions,
};

/// `Σ [−z_i, z_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    n: usize,
    segments: Vec<Vec<f64>>,
}

impl Zonotope {
    pub fn new(n: usize, segments: Vec<Vec<f64>>) -> Result<Self> {
        for z in &segments {
            check_dim(n, z.len())?;
        }
        Ok(Zonotope { n, segments })
    }

    pub fn segments(&self) -> &[Vec<f64>] {
        &self.segments
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.segments
            .iter()
            .map(|z| dot(z, u).abs())
            .collect::<CompensatedSum>()
            .value()
    }
}

impl Support for Zonotope {
    fn dim(&self) -> usize {
        self.n
    }
    fn support(&self, xi: &[f64]) -> f64 {
        Zonotope::support(self, xi)
    }
}

/// `ΠP` with generators `½ vol(F_i) u_i`, so `h_{ΠP}(x) = ½ Σ vol(F_i)|⟨u_i, x⟩|`.
pub fn projection_body(p: &Polytope) -> Zonotope {
    let segments = p
        .facets()
        .iter()
        .map(|f| f.normal.iter().map(|u| 0.5 * f.volume * u).collect())
        .collect();
    Zonotope {
        n: p.dim(),
        segments,
    }
}

/// `p!` for real `p ≥ 0`.
fn real_factorial(p: f64) -> f64 {
    gamma(p + 1.0)
}

fn check_direction(n: usize, v: &[f64]) -> Result<()> {
    check_dim(n, v.len())?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("direction must be finite".into()));
    }
    Ok(())
}

/// `∫_P |⟨v, x⟩|^p dx`. Each simplex is split along `⟨v, x⟩ = 0`; for
/// integer `p` the pieces are integrated exactly.
pub fn polytope_abs_moment(poly: &Polytope, v: &[f64], p: f64, opts: &QuadOptions) -> Result<f64> {
    check_direction(poly.dim(), v)?;
    let mut pieces = Vec::new();
    for s in poly.triangulation() {
        let (lo, hi) = split_simplex(&s, v, 0.0)?;
        pieces.extend(lo);
        pieces.extend(hi);
    }
    let g = |x: &[f64]| dot(v, x).abs().powf(p);
    if p.fract() == 0.0 && p <= 15.0 {
        let s = (p as usize).div_ceil(2).max(1);
        Ok(pieces
            .iter()
            .map(|piece| integrate_simplex_fixed(piece, &g, s))
            .collect::<CompensatedSum>()
            .value())
    } else {
        Ok(integrate_simplices(pieces, &g, opts).value)
    }
}

/// `∫_{S^{n-1}} |u_1|^p du = 2π^{(n−1)/2} Γ((p+1)/2) / Γ((n+p)/2)`.
pub fn sphere_abs_moment(n: usize, p: f64) -> f64 {
    2.0 * (0.5 * (n as f64 - 1.0) * std::f64::consts::PI.ln() + ln_gamma(0.5 * (p + 1.0))
        - ln_gamma(0.5 * (n as f64 + p)))
    .exp()
}

/// `∫_K |⟨v, x⟩|^p dx` for polytopes and ellipsoids. For
/// `K = {xᵀQx ≤ 1}` this is `det(Q)^{−1/2} |Q^{−1/2} v|^p ∫_B |y_1|^p dy`.
pub fn abs_moment(k: &ConvexBody, v: &[f64], p: f64, opts: &QuadOptions) -> Result<f64> {
    match k {
        ConvexBody::Polytope(poly) => polytope_abs_moment(poly, v, p, opts),
        ConvexBody::Ellipsoid(e) => {
            check_direction(e.dim(), v)?;
            let n = e.dim();
            let w = e.sqrt_inverse() * DVector::from_row_slice(v);
            let ball = sphere_abs_moment(n, p) / (n as f64 + p);
            Ok(e.det().sqrt().recip() * w.norm().powf(p) * ball)
        }
        ConvexBody::Oracle(_) => Err(Error::Unsupported(
            "volume integrals over a support-function oracle".into(),
        )),
    }
}

/// `h_{Γ_pK}(v) = (p!(n+p) ∫_K |⟨v, x⟩|^p dx)^{1/p}`.
pub fn lp_centroid(k: &ConvexBody, p: f64, v: &[f64]) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "L^p centroid body needs p >= 1, got {p}"
        )));
    }
    if !k.contains_origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let n = k.dim() as f64;
    let m = abs_moment(k, v, p, &QuadOptions::with_rel_tol(1e-12))?;
    Ok((real_factorial(p) * (n + p) * m).powf(1.0 / p))
}

/// `h_{Π_qK}(v) = (q! Σ_i |⟨u_i, v⟩|^q h_K(u_i)^{1−q} vol(F_i))^{1/q}`.
pub fn lp_projection(k: &Polytope, q: f64, v: &[f64]) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "L^q projection body needs q >= 1, got {q}"
        )));
    }
    check_direction(k.dim(), v)?;
    if !k.contains_origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let sum = k
        .facets()
        .iter()
        .map(|f| dot(&f.normal, v).abs().powf(q) * f.offset.powf(1.0 - q) * f.volume)
        .collect::<CompensatedSum>()
        .value();
    Ok((real_factorial(q) * sum).powf(1.0 / q))
}

/// `h_{Π_QK}(ξ) = V(K, …, K, ξQ)` for `ξ: R^p → R^n` given as an `n × p`
/// matrix and `Q` given by its vertices.
pub fn q_projection_body(k: &Polytope, q: &[Vec<f64>], xi: &DMatrix<f64>) -> Result<f64> {
    check_dim(k.dim(), xi.nrows())?;
    let image = PointSet::new(q.to_vec())?.linear_image(xi)?;
    mixed_volume_last(k, &image)
}

/// Finitely supported measure on `S^{p−1}` with vanishing first moment.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    p: usize,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let p = atoms
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInput("measure without atoms".into()))?;
        check_dim(atoms.len(), weights.len())?;
        for a in &atoms {
            check_dim(p, a.len())?;
            if (norm(a) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(
                    "measure atoms must be unit vectors".into(),
                ));
            }
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput(
                "measure weights must be positive".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        let centroid: Vec<f64> = (0..p)
            .map(|i| atoms.iter().zip(&weights).map(|(a, w)| w * a[i]).sum())
            .collect();
        if norm(&centroid) > 1e-10 * total.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "measure is not centered: |Σ w u| = {:e}",
                norm(&centroid)
            )));
        }
        Ok(DiscreteMeasure { p, atoms, weights })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `h_{M_μK}(ξ) = Σ_j w_j h_K(ξᵀ u_j)` for `ξ: R^n → R^p` as a `p × n`
/// matrix.
pub fn q_mean_width_body<K: Support + ?Sized>(
    k: &K,
    mu: &DiscreteMeasure,
    xi: &DMatrix<f64>,
) -> Result<f64> {
    check_dim(mu.dim(), xi.nrows())?;
    check_dim(k.dim(), xi.ncols())?;
    let xt = xi.transpose();
    Ok(mu
        .atoms
        .iter()
        .zip(&mu.weights)
        .map(|(u, w)| {
            let dir = &xt * DVector::from_row_slice(u);
            w * k.support(dir.as_slice())
        })
        .collect::<CompensatedSum>()
        .value())
}
