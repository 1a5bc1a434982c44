//! Convex bodies: polytopes, ellipsoids and support-function oracles.

mod ellipsoid;
pub(crate) mod hull;
pub mod io;
mod oracle;
mod polytope;
pub mod random;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use ellipsoid::Ellipsoid;
pub use hull::Facet;
pub use oracle::{GradientFn, HessianFn, SupportFn, SupportOracle};
pub use polytope::{Polytope, SlabSplit};

use crate::error::{check_dim, Error, Result};
use crate::numeric::{dot, norm, probe_directions};

/// Anything with a support function.
pub trait Support {
    fn dim(&self) -> usize;
    fn support(&self, xi: &[f64]) -> f64;
}

/// A body whose support function is twice differentiable away from 0.
pub trait SmoothBody: Send + Sync {
    fn dim(&self) -> usize;
    fn support(&self, u: &[f64]) -> f64;
    fn gradient(&self, u: &[f64]) -> Vec<f64>;
    fn hessian(&self, u: &[f64]) -> DMatrix<f64>;
    /// Whether derivatives are exact rather than finite differences.
    fn exact(&self) -> bool;
}

impl SmoothBody for Ellipsoid {
    fn dim(&self) -> usize {
        Ellipsoid::dim(self)
    }
    fn support(&self, u: &[f64]) -> f64 {
        Ellipsoid::support(self, u)
    }
    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        Ellipsoid::gradient(self, u)
    }
    fn hessian(&self, u: &[f64]) -> DMatrix<f64> {
        Ellipsoid::hessian(self, u)
    }
    fn exact(&self) -> bool {
        true
    }
}

impl SmoothBody for SupportOracle {
    fn dim(&self) -> usize {
        SupportOracle::dim(self)
    }
    fn support(&self, u: &[f64]) -> f64 {
        SupportOracle::support(self, u)
    }
    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        SupportOracle::gradient(self, u)
    }
    fn hessian(&self, u: &[f64]) -> DMatrix<f64> {
        SupportOracle::hessian(self, u)
    }
    fn exact(&self) -> bool {
        self.derivatives_exact()
    }
}

impl Support for Polytope {
    fn dim(&self) -> usize {
        Polytope::dim(self)
    }
    fn support(&self, xi: &[f64]) -> f64 {
        Polytope::support(self, xi)
    }
}

impl Support for Ellipsoid {
    fn dim(&self) -> usize {
        Ellipsoid::dim(self)
    }
    fn support(&self, xi: &[f64]) -> f64 {
        Ellipsoid::support(self, xi)
    }
}

impl Support for SupportOracle {
    fn dim(&self) -> usize {
        SupportOracle::dim(self)
    }
    fn support(&self, xi: &[f64]) -> f64 {
        SupportOracle::support(self, xi)
    }
}

/// The three concrete body representations.
#[derive(Debug, Clone)]
pub enum ConvexBody {
    Polytope(Polytope),
    Ellipsoid(Ellipsoid),
    Oracle(SupportOracle),
}

impl From<Polytope> for ConvexBody {
    fn from(p: Polytope) -> Self {
        ConvexBody::Polytope(p)
    }
}

impl From<Ellipsoid> for ConvexBody {
    fn from(e: Ellipsoid) -> Self {
        ConvexBody::Ellipsoid(e)
    }
}

impl From<SupportOracle> for ConvexBody {
    fn from(o: SupportOracle) -> Self {
        ConvexBody::Oracle(o)
    }
}

impl Support for ConvexBody {
    fn dim(&self) -> usize {
        ConvexBody::dim(self)
    }
    fn support(&self, xi: &[f64]) -> f64 {
        ConvexBody::support(self, xi)
    }
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Polytope(p) => p.dim(),
            ConvexBody::Ellipsoid(e) => e.dim(),
            ConvexBody::Oracle(o) => o.dim(),
        }
    }

    pub fn support(&self, xi: &[f64]) -> f64 {
        match self {
            ConvexBody::Polytope(p) => p.support(xi),
            ConvexBody::Ellipsoid(e) => e.support(xi),
            ConvexBody::Oracle(o) => o.support(xi),
        }
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            ConvexBody::Polytope(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        match self {
            ConvexBody::Ellipsoid(e) => Some(e),
            _ => None,
        }
    }

    /// The smooth-body view, for ellipsoids and oracles.
    pub fn smooth(&self) -> Option<&dyn SmoothBody> {
        match self {
            ConvexBody::Polytope(_) => None,
            ConvexBody::Ellipsoid(e) => Some(e),
            ConvexBody::Oracle(o) => Some(o),
        }
    }

    /// Exact for polytopes and ellipsoids; for oracles, the minimum of the
    /// support function over `±e_i` and `(±1,…,±1)/√n` must be positive.
    pub fn contains_origin_interior(&self) -> bool {
        match self {
            ConvexBody::Polytope(p) => p.contains_origin_interior(),
            ConvexBody::Ellipsoid(_) => true,
            ConvexBody::Oracle(o) => probe_directions(o.dim())
                .iter()
                .all(|u| o.support(u.as_slice()) > 1e-9),
        }
    }

    pub fn polar(&self) -> Result<ConvexBody> {
        match self {
            ConvexBody::Polytope(p) => Ok(p.polar()?.into()),
            ConvexBody::Ellipsoid(e) => Ok(e.polar().into()),
            ConvexBody::Oracle(_) => Err(Error::Unsupported(
                "polar of a support-function oracle".into(),
            )),
        }
    }

    pub fn volume(&self) -> Result<f64> {
        match self {
            ConvexBody::Polytope(p) => Ok(p.volume()),
            ConvexBody::Ellipsoid(e) => Ok(e.volume()),
            ConvexBody::Oracle(_) => Err(Error::Unsupported(
                "volume of a support-function oracle".into(),
            )),
        }
    }

    /// Membership test; unavailable for oracles.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        match self {
            ConvexBody::Polytope(p) => Ok(p.contains(x, tol)),
            ConvexBody::Ellipsoid(e) => Ok(e.contains(x, tol)),
            ConvexBody::Oracle(_) => Err(Error::Unsupported(
                "membership in a support-function oracle".into(),
            )),
        }
    }

    /// Radial function `ρ(x) = max{t : t x ∈ K}` by bisection on membership.
    pub fn radial(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if !self.contains_origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        let len = norm(x);
        if len == 0.0 {
            return Err(Error::InvalidInput("radial function at 0".into()));
        }
        let mut lo = 0.0;
        let mut hi = 1.0 / len;
        let at = |t: f64| -> Vec<f64> { x.iter().map(|v| v * t).collect() };
        while self.contains(&at(hi), 0.0)? {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.contains(&at(mid), 0.0)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn scale_by(&self, t: f64) -> Result<ConvexBody> {
        if t == 0.0 {
            return Err(Error::Degenerate("scaling by zero".into()));
        }
        match self {
            ConvexBody::Polytope(p) => Ok(p.scale_by(t)?.into()),
            ConvexBody::Ellipsoid(e) => Ok(e.scale_by(t)?.into()),
            ConvexBody::Oracle(o) if t > 0.0 => {
                let (h, g, hs) = o.parts();
                Ok(SupportOracle::from_parts(
                    o.dim(),
                    Arc::new(move |u| t * h(u)),
                    g.map(|g| -> GradientFn {
                        Arc::new(move |u| g(u).iter().map(|x| t * x).collect())
                    }),
                    hs.map(|hs| -> HessianFn { Arc::new(move |u| hs(u) * t) }),
                )
                .into())
            }
            ConvexBody::Oracle(_) => self.reflect().scale_by(-t),
        }
    }

    /// `-K`.
    pub fn reflect(&self) -> ConvexBody {
        match self {
            ConvexBody::Polytope(p) => p.reflect().into(),
            ConvexBody::Ellipsoid(e) => e.clone().into(),
            ConvexBody::Oracle(o) => {
                let (h, g, hs) = o.parts();
                let neg = |u: &[f64]| -> Vec<f64> { u.iter().map(|x| -x).collect() };
                SupportOracle::from_parts(
                    o.dim(),
                    Arc::new(move |u| h(&neg(u))),
                    g.map(|g| -> GradientFn { Arc::new(move |u| neg(&g(&neg(u)))) }),
                    hs.map(|hs| -> HessianFn { Arc::new(move |u| hs(&neg(u))) }),
                )
                .into()
            }
        }
    }

    /// `K + v`. Translated ellipsoids become oracles with exact derivatives.
    pub fn translate(&self, v: &[f64]) -> Result<ConvexBody> {
        check_dim(self.dim(), v.len())?;
        match self {
            ConvexBody::Polytope(p) => Ok(p.translate(v)?.into()),
            _ => {
                let smooth = self.smooth().expect("non-polytope bodies are smooth");
                let exact = smooth.exact();
                let body = self.clone();
                let (b1, b2, b3) = (body.clone(), body.clone(), body);
                let (v1, v2) = (v.to_vec(), v.to_vec());
                let grad: GradientFn = Arc::new(move |u| {
                    let g = b2.smooth().expect("smooth").gradient(u);
                    g.iter().zip(&v2).map(|(a, b)| a + b).collect()
                });
                let hess: HessianFn = Arc::new(move |u| b3.smooth().expect("smooth").hessian(u));
                Ok(SupportOracle::from_parts(
                    self.dim(),
                    Arc::new(move |u| b1.support(u) + dot(&v1, u)),
                    exact.then_some(grad),
                    exact.then_some(hess),
                )
                .into())
            }
        }
    }

    /// `T K`.
    pub fn linear_image(&self, t: &DMatrix<f64>) -> Result<ConvexBody> {
        check_dim(self.dim(), t.nrows())?;
        match self {
            ConvexBody::Polytope(p) => Ok(p.linear_image(t)?.into()),
            ConvexBody::Ellipsoid(e) => Ok(e.linear_image(t)?.into()),
            ConvexBody::Oracle(o) => {
                let det = t.determinant();
                if det.abs() < 1e-12 {
                    return Err(Error::Singular { det });
                }
                let (h, g, hs) = o.parts();
                let tt = t.transpose();
                let pull = move |u: &[f64]| -> Vec<f64> {
                    (&tt * DVector::from_row_slice(u)).as_slice().to_vec()
                };
                let (p1, p2, p3) = (pull.clone(), pull.clone(), pull);
                let (t2, t3) = (t.clone(), t.clone());
                Ok(SupportOracle::from_parts(
                    o.dim(),
                    Arc::new(move |u| h(&p1(u))),
                    g.map(|g| -> GradientFn {
                        Arc::new(move |u| (&t2 * DVector::from_vec(g(&p2(u)))).as_slice().to_vec())
                    }),
                    hs.map(|hs| -> HessianFn {
                        Arc::new(move |u| &t3 * hs(&p3(u)) * t3.transpose())
                    }),
                )
                .into())
            }
        }
    }

    /// `K + L`: exact hull for two polytopes, otherwise an oracle whose
    /// support function is `h_K + h_L`.
    pub fn minkowski_sum(&self, other: &ConvexBody) -> Result<ConvexBody> {
        check_dim(self.dim(), other.dim())?;
        if let (ConvexBody::Polytope(a), ConvexBody::Polytope(b)) = (self, other) {
            return Ok(a.minkowski_sum(b)?.into());
        }
        let both_smooth = matches!(
            (self.smooth(), other.smooth()),
            (Some(a), Some(b)) if a.exact() && b.exact()
        );
        let (a1, b1) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        let (a3, b3) = (self.clone(), other.clone());
        let grad: GradientFn = Arc::new(move |u| {
            let x = a2.smooth().expect("smooth").gradient(u);
            let y = b2.smooth().expect("smooth").gradient(u);
            x.iter().zip(&y).map(|(p, q)| p + q).collect()
        });
        let hess: HessianFn = Arc::new(move |u| {
            a3.smooth().expect("smooth").hessian(u) + b3.smooth().expect("smooth").hessian(u)
        });
        Ok(SupportOracle::from_parts(
            self.dim(),
            Arc::new(move |u| a1.support(u) + b1.support(u)),
            both_smooth.then_some(grad),
            both_smooth.then_some(hess),
        )
        .into())
    }

    /// `ΔK = K + (−K)`.
    pub fn difference_body(&self) -> Result<ConvexBody> {
        self.minkowski_sum(&self.reflect())
    }
}

/// A finite point set, standing for its (possibly lower-dimensional)
/// convex hull. Useful for segments and other degenerate summands.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInput("empty point set".into()))?;
        for p in &points {
            check_dim(n, p.len())?;
        }
        Ok(PointSet { n, points })
    }

    /// The segment `[a, b]`.
    pub fn segment(a: &[f64], b: &[f64]) -> Result<Self> {
        PointSet::new(vec![a.to_vec(), b.to_vec()])
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn minkowski_sum(&self, other: &PointSet) -> Result<PointSet> {
        check_dim(self.n, other.n)?;
        let mut pts = Vec::with_capacity(self.points.len() * other.points.len());
        for a in &self.points {
            for b in &other.points {
                pts.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        PointSet::new(pts)
    }

    pub fn reflect(&self) -> PointSet {
        PointSet {
            n: self.n,
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(|x| -x).collect())
                .collect(),
        }
    }

    pub fn difference_body(&self) -> PointSet {
        self.minkowski_sum(&self.reflect()).expect("same dimension")
    }

    pub fn linear_image(&self, t: &DMatrix<f64>) -> Result<PointSet> {
        check_dim(self.n, t.ncols())?;
        PointSet::new(
            self.points
                .iter()
                .map(|p| (t * DVector::from_row_slice(p)).as_slice().to_vec())
                .collect(),
        )
    }

    /// The hull as a full-dimensional polytope, if it is one.
    pub fn to_polytope(&self) -> Result<Polytope> {
        Polytope::from_vertices(self.points.clone())
    }
}

impl Support for PointSet {
    fn dim(&self) -> usize {
        self.n
    }
    fn support(&self, xi: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| dot(p, xi))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `max_u |h_K(u) − h_L(u)|` over the given (normalized) directions.
pub fn hausdorff_distance<A, B>(k: &A, l: &B, directions: &[Vec<f64>]) -> Result<f64>
where
    A: Support + ?Sized,
    B: Support + ?Sized,
{
    check_dim(k.dim(), l.dim())?;
    let mut best = 0.0_f64;
    for u in directions {
        check_dim(k.dim(), u.len())?;
        let len = norm(u);
        if len == 0.0 {
            continue;
        }
        let u: Vec<f64> = u.iter().map(|x| x / len).collect();
        best = best.max((k.support(&u) - l.support(&u)).abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dirs(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn segments_sum_to_square() {
        let a = PointSet::segment(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let b = PointSet::segment(&[0.0, 0.0], &[0.0, 1.0]).unwrap();
        let sq = a.minkowski_sum(&b).unwrap().to_polytope().unwrap();
        assert_relative_eq!(sq.volume(), 1.0, epsilon = 1e-15);
        assert_eq!(sq.facets().len(), 4);
    }

    #[test]
    fn difference_body_of_segment() {
        let s = PointSet::segment(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let d = s.difference_body();
        let t = PointSet::segment(&[-1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(
            hausdorff_distance(&d, &t, &random_dirs(2, 100, 2)).unwrap(),
            0.0
        );
    }

    #[test]
    fn difference_body_support_adds_reflection() {
        let s: ConvexBody = Polytope::standard_simplex(2).into();
        let d = s.difference_body().unwrap();
        for u in random_dirs(2, 20, 7) {
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            assert_relative_eq!(
                d.support(&u),
                s.support(&u) + s.support(&neg),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn symmetric_body_difference_is_double() {
        let c: ConvexBody = Polytope::cube(3, 1.0).into();
        let d = c.difference_body().unwrap();
        let two = c.scale_by(2.0).unwrap();
        assert!(hausdorff_distance(&d, &two, &random_dirs(3, 200, 3)).unwrap() < 1e-12);
    }

    #[test]
    fn hausdorff_examples() {
        let b: ConvexBody = Ellipsoid::ball(3, 1.0).into();
        let b2: ConvexBody = Ellipsoid::ball(3, 2.0).into();
        let dirs = random_dirs(3, 50, 1);
        assert_eq!(hausdorff_distance(&b, &b, &dirs).unwrap(), 0.0);
        assert_relative_eq!(
            hausdorff_distance(&b, &b2, &dirs).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mixed_sum_adds_support_functions() {
        let c: ConvexBody = Polytope::cube(2, 1.0).into();
        let e: ConvexBody = Ellipsoid::diagonal(&[4.0, 1.0]).unwrap().into();
        let s = c.minkowski_sum(&e).unwrap();
        for u in random_dirs(2, 20, 4) {
            assert_relative_eq!(
                s.support(&u),
                c.support(&u) + e.support(&u),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn translated_ellipsoid_keeps_exact_derivatives() {
        let e: ConvexBody = Ellipsoid::diagonal(&[4.0, 1.0]).unwrap().into();
        let t = e.translate(&[0.1, -0.2]).unwrap();
        let s = t.smooth().unwrap();
        assert!(s.exact());
        let u = [0.6, 0.8];
        let g = s.gradient(&u);
        let g0 = e.smooth().unwrap().gradient(&u);
        assert_relative_eq!(g[0], g0[0] + 0.1, epsilon = 1e-15);
        assert_relative_eq!(g[1], g0[1] - 0.2, epsilon = 1e-15);
    }

    #[test]
    fn oracle_linear_image_matches_ellipsoid() {
        let e = Ellipsoid::diagonal(&[4.0, 1.0, 0.5]).unwrap();
        let e2 = e.clone();
        let (e3, e4) = (e.clone(), e.clone());
        let o: ConvexBody = SupportOracle::new(3, Arc::new(move |u| e2.support(u)))
            .unwrap()
            .with_derivatives(
                Arc::new(move |u| e3.gradient(u)),
                Arc::new(move |u| e4.hessian(u)),
            )
            .unwrap()
            .into();
        let t = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, -0.3, 1.1, 0.4, 0.0, 0.5, 0.9]);
        let a = o.linear_image(&t).unwrap();
        let b: ConvexBody = e.linear_image(&t).unwrap().into();
        let u = [0.3, -0.4, 0.2];
        assert_relative_eq!(a.support(&u), b.support(&u), epsilon = 1e-12);
        let (ha, hb) = (
            a.smooth().unwrap().hessian(&u),
            b.smooth().unwrap().hessian(&u),
        );
        assert!((ha - hb).amax() < 1e-10);
    }

    #[test]
    fn bisection_radial_matches_exact() {
        let p: ConvexBody =
            Polytope::from_vertices(vec![vec![-1.0, -0.5], vec![2.0, -0.3], vec![0.1, 1.5]])
                .unwrap()
                .into();
        let e: ConvexBody = Ellipsoid::diagonal(&[4.0, 1.0]).unwrap().into();
        for u in random_dirs(2, 20, 9) {
            let rp = p.radial(&u).unwrap();
            assert_relative_eq!(
                rp,
                p.as_polytope().unwrap().radial(&u).unwrap(),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                e.radial(&u).unwrap(),
                e.as_ellipsoid().unwrap().radial(&u),
                max_relative = 1e-12
            );
            let polar = p.polar().unwrap();
            assert_relative_eq!(polar.support(&u) * rp, 1.0, max_relative = 1e-8);
        }
    }
}
