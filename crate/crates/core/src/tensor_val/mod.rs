//! The tensor-valued valuations `Φ^{p,q}` and `Ψ^{p,q}` and their isotypic
//! projections.

mod isotypic;

use std::sync::Arc;

use nalgebra::DVector;

pub use isotypic::{gl_action_matrix, isotypic, IsotypicComponent, IsotypicDecomposition};

use crate::bodies::{ConvexBody, Polytope, SmoothBody};
use crate::error::{Error, Result};
use crate::numeric::{dot, principal_minor_sum};
use crate::quad::{
    integrate_simplex_fixed, integrate_simplices_guarded, split_simplex, QuadOptions, QuadReport,
    SignGuard, SphereIntegration, SphereRule,
};
use crate::symtensor::{MixedTensor, Variance};

/// Quadrature settings for the valuation evaluators.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Adaptive integration over facets.
    pub facet: QuadOptions,
    /// Integration over the sphere for smooth bodies.
    pub sphere: SphereIntegration,
}

fn check_variance(t: &MixedTensor, expected: Variance, what: &str) -> Result<()> {
    if t.first() != expected {
        return Err(Error::VarianceMismatch(format!(
            "{what} needs a tensor whose first factor is a {}",
            match expected {
                Variance::Vector => "vector",
                Variance::Covector => "covector",
            }
        )));
    }
    Ok(())
}

fn check_body(k: &ConvexBody, t: &MixedTensor) -> Result<()> {
    if k.dim() != t.n() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: t.n(),
        });
    }
    if !k.contains_origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    Ok(())
}

/// `h_{Φ^{p,q}K}(φ) = ∫_{∂K} |⟨φ, x^p ⊗ ν^q⟩| ⟨x, ν⟩^{1−q} dx` for
/// `φ ∈ Sym^p V* ⊗ Sym^q V`.
pub fn phi_pq(k: &ConvexBody, phi: &MixedTensor, opts: &EvalOptions) -> Result<QuadReport> {
    check_variance(phi, Variance::Covector, "Phi")?;
    check_body(k, phi)?;
    match k {
        ConvexBody::Polytope(poly) => Ok(phi_polytope(poly, phi, &opts.facet)),
        ConvexBody::Ellipsoid(e) => phi_smooth(e, phi, Some(e.inverse_matrix()), &opts.sphere),
        ConvexBody::Oracle(o) => phi_smooth(o, phi, None, &opts.sphere),
    }
}

/// Facet sum `Σ_i h_i^{1−q} ∫_{F_i} |⟨φ, x^p ⊗ u_i^q⟩| dx`.
fn phi_polytope(poly: &Polytope, phi: &MixedTensor, opts: &QuadOptions) -> QuadReport {
    let ev = phi.evaluator();
    let mag = magnitude(phi);
    let mag_ev = mag.evaluator();
    let p = phi.p();
    let weight_exp = 1.0 - phi.q() as f64;
    let mut reports = Vec::with_capacity(poly.facets().len());
    for (i, facet) in poly.facets().iter().enumerate() {
        let partial = ev.partial_second(&facet.normal);
        let poly_at = |x: &[f64]| {
            let mut scratch = Vec::new();
            ev.eval_partial(&partial, x, &mut scratch)
        };
        let report = match p {
            0 => QuadReport::exact(poly_at(&facet.normal).abs() * facet.volume),
            1 => {
                // Linear kink: split along ⟨a, x⟩ = 0 and integrate exactly.
                let n = poly.dim();
                let a: Vec<f64> = (0..n)
                    .map(|j| {
                        let mut e = vec![0.0; n];
                        e[j] = 1.0;
                        poly_at(&e)
                    })
                    .collect();
                let g = |x: &[f64]| dot(&a, x).abs();
                let mut value = 0.0;
                for s in poly.facet_simplices(i) {
                    // A facet simplex always splits into valid pieces.
                    let (lo, hi) = split_simplex(&s, &a, 0.0).expect("facet simplex split");
                    for piece in lo.iter().chain(&hi) {
                        value += integrate_simplex_fixed(piece, &g, 1);
                    }
                }
                QuadReport::exact(value)
            }
            _ => {
                let guard = SignGuard {
                    degree: p,
                    poly: &poly_at,
                };
                let g = |x: &[f64]| poly_at(x).abs();
                let mag_partial = mag_ev.partial_second(&abs(&facet.normal));
                let mut scratch = Vec::new();
                let scale = facet
                    .vertices
                    .iter()
                    .map(|&v| {
                        mag_ev.eval_partial(&mag_partial, &abs(&poly.vertices()[v]), &mut scratch)
                    })
                    .fold(0.0, f64::max)
                    * facet.volume;
                let opts = with_roundoff_floor(opts, scale);
                integrate_simplices_guarded(poly.facet_simplices(i), &g, Some(&guard), &opts)
            }
        };
        reports.push(report.scaled(facet.offset.powf(weight_exp)));
    }
    QuadReport::combine(reports)
}

/// `∫_S |⟨φ, ∇h(u)^p ⊗ u^q⟩| h(u)^{1−q} α_K(u) du`. When `∇h(u)` is linear
/// in `u` up to a positive factor (ellipsoids, `∇h(u) = Q^{-1}u / h(u)`)
/// the kinks of the integrand lie on the zero set of a polynomial, which
/// guides the adaptive scheme.
fn phi_smooth<B: SmoothBody>(
    k: &B,
    phi: &MixedTensor,
    linear: Option<&nalgebra::DMatrix<f64>>,
    integration: &SphereIntegration,
) -> Result<QuadReport> {
    let weight_exp = 1 - phi.q() as i32;
    let integrand = |t: &MixedTensor, u: &[f64]| {
        let h = k.support(u);
        let x = k.gradient(u);
        let alpha = principal_minor_sum(&k.hessian(u));
        t.evaluator().eval(&x, u).abs() * h.powi(weight_exp) * alpha
    };
    integrate_with_guard(k.dim(), &integrand, phi, linear, integration)
}

/// Coefficient-wise absolute value: evaluated at `(|x|, |ξ|)` it bounds
/// the terms summed by the bracket.
fn magnitude(t: &MixedTensor) -> MixedTensor {
    let mut m = t.clone();
    m.coeffs_mut().apply(|c| *c = c.abs());
    m
}

fn abs(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.abs()).collect()
}

/// Raises the absolute tolerance to the rounding level of `scale`.
fn with_roundoff_floor(opts: &QuadOptions, scale: f64) -> QuadOptions {
    QuadOptions {
        abs_tol: opts.abs_tol.max(ROUNDOFF_FLOOR * scale),
        ..*opts
    }
}

const ROUNDOFF_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Level of the coarse rule used to estimate integrand magnitudes.
const SCALE_RULE_LEVEL: usize = 4;

fn integrate_with_guard<F>(
    n: usize,
    integrand: &F,
    t: &MixedTensor,
    linear: Option<&nalgebra::DMatrix<f64>>,
    integration: &SphereIntegration,
) -> Result<QuadReport>
where
    F: Fn(&MixedTensor, &[f64]) -> f64 + Sync,
{
    let f = |u: &[f64]| integrand(t, u);
    let integration = match integration {
        SphereIntegration::Adaptive(opts) => {
            let mag = magnitude(t);
            let scale = SphereRule::new(n, SCALE_RULE_LEVEL)?
                .integrate(|u: &[f64]| integrand(&mag, &abs(u)));
            SphereIntegration::Adaptive(with_roundoff_floor(opts, scale))
        }
        other => other.clone(),
    };
    match linear {
        Some(m) => {
            let ev = t.evaluator();
            let poly = |u: &[f64]| {
                let x = m * DVector::from_row_slice(u);
                ev.eval(x.as_slice(), u)
            };
            let guard = SignGuard {
                degree: t.p() + t.q(),
                poly: &poly,
            };
            integration.integrate_guarded(n, &f, Some(&guard))
        }
        None => integration.integrate(n, &f),
    }
}

/// `h_{Ψ^{p,q}K}(ψ) = ∫_{∂K} |⟨ψ, ν^p ⊗ x^q⟩| ⟨x, ν⟩^{−(n+p)} κ_K dx` for
/// `ψ ∈ Sym^p V ⊗ Sym^q V*`. Smooth bodies use `κ dx = du`; polytopes go
/// through the polar body, `Ψ_V(K) = Φ_{V*}(K*)`.
pub fn psi_pq(k: &ConvexBody, psi: &MixedTensor, opts: &EvalOptions) -> Result<QuadReport> {
    check_variance(psi, Variance::Vector, "Psi")?;
    check_body(k, psi)?;
    match k {
        ConvexBody::Polytope(poly) => Ok(phi_polytope(&poly.polar()?, &psi.dual(), &opts.facet)),
        ConvexBody::Ellipsoid(e) => psi_smooth(e, psi, Some(e.inverse_matrix()), &opts.sphere),
        ConvexBody::Oracle(o) => psi_smooth(o, psi, None, &opts.sphere),
    }
}

fn psi_smooth<B: SmoothBody>(
    k: &B,
    psi: &MixedTensor,
    linear: Option<&nalgebra::DMatrix<f64>>,
    integration: &SphereIntegration,
) -> Result<QuadReport> {
    let exp = -((k.dim() + psi.p()) as i32);
    let integrand = |t: &MixedTensor, u: &[f64]| {
        let h = k.support(u);
        let x = k.gradient(u);
        t.evaluator().eval(&x, u).abs() * h.powi(exp)
    };
    integrate_with_guard(k.dim(), &integrand, psi, linear, integration)
}

/// `Φ^{p,q}_λ`: `h_{π_λ Φ K}(φ) = h_{ΦK}(π_λ^* φ)`. The projectors are
/// self-adjoint for the natural pairing, so `π_λ^* = π_λ`.
pub fn phi_lambda(
    k: &ConvexBody,
    decomposition: &IsotypicDecomposition,
    index: usize,
    phi: &MixedTensor,
    opts: &EvalOptions,
) -> Result<QuadReport> {
    phi_pq(k, &decomposition.project(index, phi)?, opts)
}

/// As [`phi_lambda`] for `Ψ`.
pub fn psi_lambda(
    k: &ConvexBody,
    decomposition: &IsotypicDecomposition,
    index: usize,
    psi: &MixedTensor,
    opts: &EvalOptions,
) -> Result<QuadReport> {
    psi_pq(k, &decomposition.project(index, psi)?, opts)
}

type Evaluator = Arc<dyn Fn(&MixedTensor) -> Result<f64> + Send + Sync>;

/// A convex body in a tensor space, known through its support function.
#[derive(Clone)]
pub struct ValuationBody {
    n: usize,
    p: usize,
    q: usize,
    /// Variance of the first factor of the tensors the support function
    /// accepts.
    argument: Variance,
    evaluator: Evaluator,
}

impl std::fmt::Debug for ValuationBody {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValuationBody")
            .field("n", &self.n)
            .field("p", &self.p)
            .field("q", &self.q)
            .field("argument", &self.argument)
            .finish()
    }
}

impl ValuationBody {
    /// `Φ^{p,q}(K)`.
    pub fn phi(k: ConvexBody, p: usize, q: usize, opts: EvalOptions) -> Self {
        ValuationBody {
            n: k.dim(),
            p,
            q,
            argument: Variance::Covector,
            evaluator: Arc::new(move |t| phi_pq(&k, t, &opts).map(|r| r.value)),
        }
    }

    /// `Ψ^{p,q}(K)`.
    pub fn psi(k: ConvexBody, p: usize, q: usize, opts: EvalOptions) -> Self {
        ValuationBody {
            n: k.dim(),
            p,
            q,
            argument: Variance::Vector,
            evaluator: Arc::new(move |t| psi_pq(&k, t, &opts).map(|r| r.value)),
        }
    }

    /// The image under the isotypic projection with the given index.
    pub fn project(&self, decomposition: Arc<IsotypicDecomposition>, index: usize) -> Result<Self> {
        if (decomposition.n(), decomposition.p(), decomposition.q()) != (self.n, self.p, self.q) {
            return Err(Error::InvalidInput(
                "decomposition does not match the body's tensor space".into(),
            ));
        }
        decomposition.component(index)?;
        let inner = self.evaluator.clone();
        Ok(ValuationBody {
            evaluator: Arc::new(move |t| inner(&decomposition.project(index, t)?)),
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn support(&self, t: &MixedTensor) -> Result<f64> {
        if (t.n(), t.p(), t.q()) != (self.n, self.p, self.q) {
            return Err(Error::DegreeMismatch {
                expected: self.p,
                found: t.p(),
            });
        }
        check_variance(t, self.argument, "this valuation body")?;
        (self.evaluator)(t)
    }
}
