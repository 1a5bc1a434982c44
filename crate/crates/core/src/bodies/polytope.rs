use nalgebra::DMatrix;

use super::hull::{convex_hull, Facet};
use crate::error::{check_dim, Error, Result};
use crate::numeric::{dot, norm};

/// Full-dimensional convex polytope with its vertex and facet descriptions.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    n: usize,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
    volume: f64,
    scale: f64,
}

impl Polytope {
    /// Convex hull of a finite point set. Non-extreme points are discarded.
    pub fn from_vertices(points: Vec<Vec<f64>>) -> Result<Self> {
        let (vertices, facets) = convex_hull(&points)?;
        let n = vertices[0].len();
        let scale = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
        let centroid: Vec<f64> = (0..n)
            .map(|k| vertices.iter().map(|v| v[k]).sum::<f64>() / vertices.len() as f64)
            .collect();
        let volume = facets
            .iter()
            .map(|f| (f.offset - dot(&f.normal, &centroid)) * f.volume)
            .sum::<f64>()
            / n as f64;
        if volume <= 1e-14 * scale.powi(n as i32) {
            return Err(Error::Degenerate("polytope has zero volume".into()));
        }
        Ok(Polytope {
            n,
            vertices,
            facets,
            volume,
            scale,
        })
    }

    /// The cube `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Self {
        Self::box_shape(&vec![-r; n], &vec![r; n]).expect("cube is full-dimensional")
    }

    /// Axis-parallel box with the given lower and upper corners.
    pub fn box_shape(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let n = lo.len();
        check_dim(n, hi.len())?;
        let pts = (0..1usize << n)
            .map(|m| {
                (0..n)
                    .map(|i| if m >> i & 1 == 1 { hi[i] } else { lo[i] })
                    .collect()
            })
            .collect();
        Self::from_vertices(pts)
    }

    /// `conv{±r e_i}`.
    pub fn cross_polytope(n: usize, r: f64) -> Self {
        let mut pts = Vec::with_capacity(2 * n);
        for i in 0..n {
            for s in [r, -r] {
                let mut e = vec![0.0; n];
                e[i] = s;
                pts.push(e);
            }
        }
        Self::from_vertices(pts).expect("cross-polytope is full-dimensional")
    }

    /// `conv{0, e_1, …, e_n}`.
    pub fn standard_simplex(n: usize) -> Self {
        let mut pts = vec![vec![0.0; n]];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            pts.push(e);
        }
        Self::from_vertices(pts).expect("simplex is full-dimensional")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Largest vertex norm; the natural length scale for tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Decomposition into `n`-simplices coned from the vertex centroid.
    pub fn triangulation(&self) -> Vec<Vec<Vec<f64>>> {
        let c: Vec<f64> = (0..self.n)
            .map(|k| self.vertices.iter().map(|v| v[k]).sum::<f64>() / self.vertices.len() as f64)
            .collect();
        self.facets
            .iter()
            .flat_map(|f| f.simplices.iter())
            .map(|s| {
                let mut simplex = Vec::with_capacity(self.n + 1);
                simplex.push(c.clone());
                simplex.extend(s.iter().map(|&i| self.vertices[i].clone()));
                simplex
            })
            .collect()
    }

    /// Vertex coordinates of each simplex triangulating facet `i`.
    pub fn facet_simplices(&self, i: usize) -> Vec<Vec<Vec<f64>>> {
        self.facets[i]
            .simplices
            .iter()
            .map(|s| s.iter().map(|&v| self.vertices[v].clone()).collect())
            .collect()
    }

    pub fn support(&self, xi: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v, xi))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of a vertex attaining the support value in direction `xi`.
    pub fn argmax_vertex(&self, xi: &[f64]) -> usize {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, v) in self.vertices.iter().enumerate() {
            let s = dot(v, xi);
            if s > best.0 {
                best = (s, i);
            }
        }
        best.1
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.facets
            .iter()
            .all(|f| dot(&f.normal, x) <= f.offset + tol)
    }

    /// Smallest facet offset; positive iff the origin is interior.
    pub fn min_offset(&self) -> f64 {
        self.facets
            .iter()
            .map(|f| f.offset)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_origin_interior(&self) -> bool {
        self.min_offset() > 1e-9 * self.scale.max(1.0)
    }

    /// Exact radial function `ρ(x) = min_{⟨u_i,x⟩>0} h_i / ⟨u_i, x⟩`.
    pub fn radial(&self, x: &[f64]) -> Result<f64> {
        if !self.contains_origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        Ok(self
            .facets
            .iter()
            .filter_map(|f| {
                let s = dot(&f.normal, x);
                (s > 0.0).then(|| f.offset / s)
            })
            .fold(f64::INFINITY, f64::min))
    }

    /// Polar body `conv{u_i / h_i}` over the facets.
    pub fn polar(&self) -> Result<Polytope> {
        if !self.contains_origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        let pts = self
            .facets
            .iter()
            .map(|f| f.normal.iter().map(|u| u / f.offset).collect())
            .collect();
        Polytope::from_vertices(pts)
    }

    pub fn scale_by(&self, t: f64) -> Result<Polytope> {
        self.map_vertices(|v| v.iter().map(|x| t * x).collect())
    }

    pub fn translate(&self, shift: &[f64]) -> Result<Polytope> {
        check_dim(self.n, shift.len())?;
        self.map_vertices(|v| v.iter().zip(shift).map(|(a, b)| a + b).collect())
    }

    pub fn reflect(&self) -> Polytope {
        self.map_vertices(|v| v.iter().map(|x| -x).collect())
            .expect("reflection preserves full dimension")
    }

    pub fn linear_image(&self, t: &DMatrix<f64>) -> Result<Polytope> {
        check_dim(self.n, t.ncols())?;
        self.map_vertices(|v| {
            (0..t.nrows())
                .map(|r| (0..self.n).map(|c| t[(r, c)] * v[c]).sum())
                .collect()
        })
    }

    fn map_vertices(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Polytope> {
        Polytope::from_vertices(self.vertices.iter().map(|v| f(v)).collect())
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        check_dim(self.n, other.n)?;
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        Polytope::from_vertices(pts)
    }

    /// `P ∩ {x : ⟨a, x⟩ ≤ b}`.
    pub fn clip(&self, a: &[f64], b: f64) -> Result<Polytope> {
        check_dim(self.n, a.len())?;
        let eps = 1e-12 * self.scale.max(1.0) * norm(a);
        let side: Vec<f64> = self.vertices.iter().map(|v| dot(a, v) - b).collect();
        let mut pts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .zip(&side)
            .filter(|(_, s)| **s <= eps)
            .map(|(v, _)| v.clone())
            .collect();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for f in &self.facets {
            for s in &f.simplices {
                for i in 0..s.len() {
                    for j in i + 1..s.len() {
                        edges.push((s[i].min(s[j]), s[i].max(s[j])));
                    }
                }
            }
        }
        if self.n == 1 {
            edges.push((0, 1));
        }
        edges.sort_unstable();
        edges.dedup();
        for (i, j) in edges {
            let (si, sj) = (side[i], side[j]);
            if (si < -eps && sj > eps) || (si > eps && sj < -eps) {
                let t = si / (si - sj);
                let (vi, vj) = (&self.vertices[i], &self.vertices[j]);
                pts.push(vi.iter().zip(vj).map(|(x, y)| x + t * (y - x)).collect());
            }
        }
        if pts.len() <= self.n {
            return Err(Error::Degenerate("halfspace cuts off the polytope".into()));
        }
        Polytope::from_vertices(pts)
    }

    /// Splits `P` by the slab `|x_1| ≤ a` into `K = P ∩ {x_1 ≤ a}` and
    /// `L = P ∩ {x_1 ≥ -a}`; returns `(K, L, K ∪ L, K ∩ L)`.
    pub fn split_by_slab(&self, a: f64) -> Result<SlabSplit> {
        let mut e1 = vec![0.0; self.n];
        e1[0] = 1.0;
        let upper = self.support(&e1);
        e1[0] = -1.0;
        let lower = -self.support(&e1);
        if !self.contains_origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        if !(a > 0.0 && a < upper.min(-lower)) {
            return Err(Error::InvalidInput(format!(
                "slab half-width {a} must lie in (0, {})",
                upper.min(-lower)
            )));
        }
        let mut plus = vec![0.0; self.n];
        plus[0] = 1.0;
        let minus: Vec<f64> = plus.iter().map(|x| -x).collect();
        let k = self.clip(&plus, a)?;
        let l = self.clip(&minus, a)?;
        let inter = k.clip(&minus, a)?;
        Ok(SlabSplit {
            k,
            l,
            union: self.clone(),
            intersection: inter,
        })
    }
}

/// The four bodies of a valuation-identity instance.
#[derive(Debug, Clone)]
pub struct SlabSplit {
    pub k: Polytope,
    pub l: Polytope,
    pub union: Polytope,
    pub intersection: Polytope,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cube_support_is_l1_norm() {
        let c = Polytope::cube(3, 1.0);
        let xi = [0.3, -1.2, 0.5];
        assert_relative_eq!(c.support(&xi), 2.0, epsilon = 1e-15);
        assert_relative_eq!(c.volume(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn simplex_examples() {
        let s = Polytope::standard_simplex(2);
        assert_eq!(s.support(&[1.0, 2.0]), 2.0);
        assert_relative_eq!(s.volume(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(Polytope::cube(4, 0.5).volume(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cube_polar_is_cross_polytope() {
        for n in 2..=4 {
            let p = Polytope::cube(n, 1.0).polar().unwrap();
            let c = Polytope::cross_polytope(n, 1.0);
            assert_eq!(p.vertices().len(), 2 * n);
            for v in c.vertices() {
                assert!(p
                    .vertices()
                    .iter()
                    .any(|w| w.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-12)));
            }
        }
    }

    #[test]
    fn polar_requires_interior_origin() {
        assert!(matches!(
            Polytope::standard_simplex(2).polar(),
            Err(Error::OriginNotInterior)
        ));
    }

    #[test]
    fn bipolar_recovers_simplex() {
        let s = Polytope::from_vertices(vec![vec![-1.0, -0.5], vec![2.0, -0.3], vec![0.1, 1.5]])
            .unwrap();
        let bb = s.polar().unwrap().polar().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let u = [th.cos(), th.sin()];
            assert!((bb.support(&u) - s.support(&u)).abs() < 1e-12);
        }
    }

    #[test]
    fn surface_measure_closes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=4 {
            let pts: Vec<Vec<f64>> = (0..20)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let p = Polytope::from_vertices(pts).unwrap();
            for k in 0..n {
                let s: f64 = p.facets().iter().map(|f| f.volume * f.normal[k]).sum();
                assert!(s.abs() < 1e-8);
            }
            for v in p.vertices() {
                assert!(p.contains(v, 1e-9));
            }
        }
    }

    #[test]
    fn clip_cube_by_slab() {
        let split = Polytope::cube(2, 1.0).split_by_slab(0.5).unwrap();
        assert_relative_eq!(split.intersection.volume(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(split.k.volume(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(split.l.volume(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(
            split.intersection.support(&[1.0, 0.0]),
            0.5,
            epsilon = 1e-15
        );
        assert!(Polytope::cube(2, 1.0).split_by_slab(1.5).is_err());
    }

    #[test]
    fn difference_body_of_triangle_is_hexagon() {
        let s = Polytope::standard_simplex(2);
        let d = s.minkowski_sum(&s.reflect()).unwrap();
        assert_eq!(d.vertices().len(), 6);
        assert_eq!(d.facets().len(), 6);
    }

    #[test]
    fn radial_matches_polar_support() {
        let p = Polytope::from_vertices(vec![
            vec![-1.0, -0.5],
            vec![2.0, -0.3],
            vec![0.1, 1.5],
            vec![-0.7, 0.9],
        ])
        .unwrap();
        let q = p.polar().unwrap();
        for k in 0..12 {
            let th = k as f64 * 0.5;
            let x = [th.cos(), th.sin()];
            assert_relative_eq!(
                q.support(&x),
                1.0 / p.radial(&x).unwrap(),
                max_relative = 1e-12
            );
        }
    }
}
