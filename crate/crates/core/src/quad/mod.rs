//! Integration over facets, volumes, spheres and smooth boundaries.

mod simplex;
mod sphere;

pub use simplex::{
    gm_rule, integrate_simplex_fixed, integrate_simplices, integrate_simplices_guarded,
    may_change_sign, split_simplex, GmRule, QuadOptions, QuadReport, SignGuard, Simplex,
};
pub use sphere::{
    gauss_gegenbauer, integrate_sphere_adaptive, integrate_sphere_guarded, SphereIntegration,
    SphereRule,
};

use crate::bodies::{Polytope, SmoothBody, Support};
use crate::error::{Error, Result};
use crate::numeric::{norm, principal_minor_sum};

/// Adaptive integral of `g` over facet `i` of `p`.
pub fn integrate_facet<F>(p: &Polytope, i: usize, g: &F, opts: &QuadOptions) -> QuadReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_simplices(p.facet_simplices(i), g, opts)
}

/// As [`integrate_facet`] with the kinks of `g` on the zero set of `guard`.
pub fn integrate_facet_guarded<F>(
    p: &Polytope,
    i: usize,
    g: &F,
    guard: &SignGuard<'_>,
    opts: &QuadOptions,
) -> QuadReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_simplices_guarded(p.facet_simplices(i), g, Some(guard), opts)
}

/// Adaptive integral of `g` over the polytope.
pub fn integrate_polytope<F>(p: &Polytope, g: &F, opts: &QuadOptions) -> QuadReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_simplices(p.triangulation(), g, opts)
}

fn unit(u: &[f64]) -> Result<Vec<f64>> {
    let len = norm(u);
    if len == 0.0 || !len.is_finite() {
        return Err(Error::InvalidInput("direction must be non-zero".into()));
    }
    Ok(u.iter().map(|x| x / len).collect())
}

/// `α_K(u)`: the sum of the principal `(n-1)`-minors of the Hessian of the
/// 1-homogeneous support function at the unit vector `u`.
pub fn alpha_k(k: &dyn SmoothBody, u: &[f64]) -> Result<f64> {
    let u = unit(u)?;
    Ok(principal_minor_sum(&k.hessian(&u)))
}

/// `κ_K` at the boundary point `∇h_K(u)`, i.e. `1/α_K(u)`.
pub fn kappa_k(k: &dyn SmoothBody, u: &[f64]) -> Result<f64> {
    let alpha = alpha_k(k, u)?;
    let scale = k
        .support(&unit(u)?)
        .abs()
        .max(1e-300)
        .powi(k.dim() as i32 - 1);
    if !(alpha > 1e-13 * scale) {
        return Err(Error::CurvatureUndefined { alpha });
    }
    Ok(1.0 / alpha)
}

/// `∫_{∂K} g(x, ν(x)) dx`, computed on the sphere as
/// `∫_S g(∇h(u), u) α_K(u) du`.
pub fn boundary_integrate_smooth<F>(
    k: &dyn SmoothBody,
    g: &F,
    integration: &SphereIntegration,
) -> Result<QuadReport>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let integrand = |u: &[f64]| {
        let x = k.gradient(u);
        let alpha = principal_minor_sum(&k.hessian(u));
        g(&x, u) * alpha
    };
    integration.integrate(k.dim(), &integrand)
}

/// `V(K, …, K, L) = (1/n) Σ_i h_L(u_i) vol(F_i)`.
pub fn mixed_volume_last<L: Support + ?Sized>(k: &Polytope, l: &L) -> Result<f64> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: l.dim(),
        });
    }
    Ok(k.facets()
        .iter()
        .map(|f| l.support(&f.normal) * f.volume)
        .sum::<f64>()
        / k.dim() as f64)
}
