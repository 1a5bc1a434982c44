//! Quadrature on the unit sphere `S^{n-1}`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::simplex::{integrate_simplices_guarded, QuadOptions, QuadReport, SignGuard, Simplex};
use crate::error::{Error, Result};
use crate::numeric::{norm, sphere_area, CompensatedSum};

/// Fixed quadrature rule on `S^{n-1}` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub n: usize,
    pub level: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Gauss–Jacobi nodes and weights for the weight `(1 − t)^a (1 + t)^a` on
/// `[-1, 1]` (Golub–Welsch).
pub fn gauss_gegenbauer(m: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let s = 2.0 * kf + 2.0 * a;
        let beta =
            4.0 * kf * (kf + a) * (kf + a) * (kf + 2.0 * a) / (s * s * (s + 1.0) * (s - 1.0));
        let b = beta.sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let mu0 =
        ((2.0 * a + 1.0) * 2f64.ln() + 2.0 * ln_gamma(a + 1.0) - ln_gamma(2.0 * a + 2.0)).exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Symmetrize to remove eigen-solver asymmetry.
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let t = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-t, w);
        pairs[j] = (t, w);
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

impl SphereRule {
    /// `n = 2`: `2·level` equally spaced angles (offset half a step).
    /// `n ≥ 3`: product of Gauss–Gegenbauer rules with `level` nodes in each
    /// polar coordinate and `2·level` angles on the final circle.
    pub fn new(n: usize, level: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("sphere rules need n >= 2".into()));
        }
        if level == 0 {
            return Err(Error::InvalidInput(
                "sphere rule level must be positive".into(),
            ));
        }
        let (nodes, weights) = product_rule(n, level);
        Ok(SphereRule {
            n,
            level,
            nodes,
            weights,
        })
    }

    /// Level used when none is configured.
    pub fn default_level(n: usize) -> usize {
        match n {
            0..=2 => 1024,
            3 => 96,
            4 => 24,
            _ => 10,
        }
    }

    pub fn default_for(n: usize) -> Result<Self> {
        Self::new(n, Self::default_level(n))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i g(u_i)`, evaluated in parallel with a fixed-order reduction.
    pub fn integrate<F>(&self, g: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let partial: Vec<f64> = self
            .nodes
            .par_chunks(256)
            .zip(self.weights.par_chunks(256))
            .map(|(us, ws)| {
                us.iter()
                    .zip(ws)
                    .map(|(u, w)| w * g(u))
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        partial.into_iter().collect::<CompensatedSum>().value()
    }

    /// As [`Self::integrate`] for fallible integrands; the first error wins.
    pub fn try_integrate<F>(&self, g: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let partial: Vec<Result<f64>> = self
            .nodes
            .par_chunks(256)
            .zip(self.weights.par_chunks(256))
            .map(|(us, ws)| {
                let mut s = CompensatedSum::new();
                for (u, w) in us.iter().zip(ws) {
                    s.add(w * g(u)?);
                }
                Ok(s.value())
            })
            .collect();
        let mut total = CompensatedSum::new();
        for p in partial {
            total.add(p?);
        }
        Ok(total.value())
    }
}

fn product_rule(n: usize, level: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if n == 2 {
        let m = 2 * level;
        let step = std::f64::consts::TAU / m as f64;
        let nodes = (0..m)
            .map(|k| {
                let th = (k as f64 + 0.5) * step;
                vec![th.cos(), th.sin()]
            })
            .collect();
        return (nodes, vec![step; m]);
    }
    let (inner_nodes, inner_weights) = product_rule(n - 1, level);
    let (ts, tw) = gauss_gegenbauer(level, (n as f64 - 3.0) / 2.0);
    let mut nodes = Vec::with_capacity(ts.len() * inner_nodes.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (t, w) in ts.iter().zip(&tw) {
        let r = (1.0 - t * t).max(0.0).sqrt();
        for (v, wv) in inner_nodes.iter().zip(&inner_weights) {
            let mut u = Vec::with_capacity(n);
            u.push(*t);
            u.extend(v.iter().map(|x| r * x));
            nodes.push(u);
            weights.push(w * wv);
        }
    }
    (nodes, weights)
}

/// The `2^n` facets of the cross-polytope `conv{±e_i}`, each an
/// `(n-1)`-simplex; they project radially onto a partition of the sphere.
fn cross_polytope_facets(n: usize) -> Vec<Simplex> {
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                    e
                })
                .collect()
        })
        .collect()
}

/// Adaptive integration over `S^{n-1}` by radially projecting the facets of
/// the cross-polytope: `∫_S g du = Σ_F ∫_F g(x/|x|) d_F |x|^{-n} dx`, with
/// `d_F = 1/√n` the distance of each facet plane from the origin. Kinks of
/// `g` are resolved by the simplex bisection.
pub fn integrate_sphere_adaptive<F>(n: usize, g: &F, opts: &QuadOptions) -> QuadReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_sphere_guarded(n, g, None, opts)
}

/// As [`integrate_sphere_adaptive`] with the kinks of `g` on the zero set of
/// a homogeneous polynomial.
pub fn integrate_sphere_guarded<F>(
    n: usize,
    g: &F,
    guard: Option<&SignGuard<'_>>,
    opts: &QuadOptions,
) -> QuadReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = 1.0 / (n as f64).sqrt();
    let mapped = |x: &[f64]| {
        let r = norm(x);
        let u: Vec<f64> = x.iter().map(|v| v / r).collect();
        g(&u) * d / r.powi(n as i32)
    };
    integrate_simplices_guarded(cross_polytope_facets(n), &mapped, guard, opts)
}

/// How integrals over the sphere are evaluated.
#[derive(Debug, Clone)]
pub enum SphereIntegration {
    Rule(SphereRule),
    Adaptive(QuadOptions),
}

impl Default for SphereIntegration {
    fn default() -> Self {
        SphereIntegration::Adaptive(QuadOptions::with_rel_tol(1e-7))
    }
}

impl SphereIntegration {
    pub fn integrate<F>(&self, n: usize, g: &F) -> Result<QuadReport>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.integrate_guarded(n, g, None)
    }

    /// The guard is used by the adaptive scheme only.
    pub fn integrate_guarded<F>(
        &self,
        n: usize,
        g: &F,
        guard: Option<&SignGuard<'_>>,
    ) -> Result<QuadReport>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        match self {
            SphereIntegration::Rule(rule) => {
                if rule.n != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: rule.n,
                    });
                }
                Ok(QuadReport::exact(rule.integrate(g)))
            }
            SphereIntegration::Adaptive(opts) => Ok(integrate_sphere_guarded(n, g, guard, opts)),
        }
    }

    /// Sphere area, used to sanity-check a configured rule.
    pub fn total_weight(&self, n: usize) -> f64 {
        match self {
            SphereIntegration::Rule(r) => r.weights.iter().sum(),
            SphereIntegration::Adaptive(_) => sphere_area(n),
        }
    }
}
