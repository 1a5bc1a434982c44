//! The upper semicontinuous families `Φ_f^p`, `Ψ_f^p` built from affine
//! curvature, with `f` concave, `f(0) = 0` and `f(t)/t → 0`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bodies::{hausdorff_distance, ConvexBody, Ellipsoid, PointSet, SmoothBody};
use crate::error::{Error, Result};
use crate::numeric::{norm, principal_minor_sum};
use crate::quad::{alpha_k, QuadReport, SignGuard, SphereIntegration};
use crate::symtensor::{SymTensor, Variance};

/// Callback for a user-supplied concave function.
pub type ConcFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `t^γ`, `0 < γ < 1`.
    Power(f64),
    /// `min(a t, c)`.
    MinLinear { slope: f64, cap: f64 },
    /// `g(t)`, or `t g(1/t)` when `dual` is set.
    Custom { name: String, g: ConcFn, dual: bool },
}

/// A function in `Conc(0, ∞)`.
#[derive(Clone)]
pub struct ConcFunction {
    kind: Kind,
}

impl fmt::Debug for ConcFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConcFunction({self})")
    }
}

impl fmt::Display for ConcFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Power(g) => write!(f, "power:{g}"),
            Kind::MinLinear { slope, cap } if *slope == 1.0 => write!(f, "clamp:{cap}"),
            Kind::MinLinear { slope, cap } => write!(f, "min({slope}t,{cap})"),
            Kind::Custom {
                name, dual: false, ..
            } => write!(f, "{name}"),
            Kind::Custom {
                name, dual: true, ..
            } => write!(f, "{name}*"),
        }
    }
}

const GRID_POINTS: usize = 241;
const CONCAVITY_TOL: f64 = 1e-10;

impl ConcFunction {
    /// `t^γ` for `0 < γ < 1`.
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InadmissibleFunction(format!(
                "power exponent must lie in (0, 1), got {gamma}"
            )));
        }
        Ok(ConcFunction {
            kind: Kind::Power(gamma),
        })
    }

    /// `min(t, c)`.
    pub fn clamp(c: f64) -> Result<Self> {
        Self::min_linear(1.0, c)
    }

    /// `min(a t, c)`; the family is closed under `f ↦ f*`.
    pub fn min_linear(slope: f64, cap: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite() && cap > 0.0 && cap.is_finite()) {
            return Err(Error::InadmissibleFunction(format!(
                "min(a t, c) needs finite a, c > 0, got a = {slope}, c = {cap}"
            )));
        }
        Ok(ConcFunction {
            kind: Kind::MinLinear { slope, cap },
        })
    }

    /// A callback, accepted after the grid tests of [`ConcFunction::check_admissible`].
    pub fn custom(name: impl Into<String>, g: ConcFn) -> Result<Self> {
        let f = ConcFunction {
            kind: Kind::Custom {
                name: name.into(),
                g,
                dual: false,
            },
        };
        f.check_admissible()?;
        let growth = f.eval(1e8) / 1e8;
        if !(growth < 1e-3 * f.eval(1.0)) {
            return Err(Error::InadmissibleFunction(format!(
                "f(t)/t = {growth:e} at t = 1e8 does not vanish"
            )));
        }
        Ok(f)
    }

    /// Parses `power:γ` or `clamp:c`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, value) = spec.split_once(':').ok_or_else(|| {
            Error::InvalidInput(format!("expected power:γ or clamp:c, got {spec:?}"))
        })?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad number in {spec:?}")))?;
        match kind.trim() {
            "power" => Self::power(value),
            "clamp" => Self::clamp(value),
            other => Err(Error::InvalidInput(format!(
                "unknown function kind {other:?}"
            ))),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Power(g) => t.powf(*g),
            Kind::MinLinear { slope, cap } => (slope * t).min(*cap),
            Kind::Custom { g, dual: false, .. } => g(t),
            Kind::Custom { g, dual: true, .. } => t * g(1.0 / t),
        }
    }

    /// Grid tests: `f(0) = 0`, `f ≥ 0`, midpoint concavity and `f(t)/t`
    /// non-increasing.
    pub fn check_admissible(&self) -> Result<()> {
        let f0 = match &self.kind {
            Kind::Custom { g, dual: false, .. } => g(0.0),
            _ => 0.0,
        };
        if f0.abs() > 1e-12 {
            return Err(Error::InadmissibleFunction(format!(
                "f(0) = {f0} is not zero"
            )));
        }
        let grid: Vec<f64> = (0..GRID_POINTS)
            .map(|k| 10f64.powf(-6.0 + 12.0 * k as f64 / (GRID_POINTS - 1) as f64))
            .collect();
        let values: Vec<f64> = grid.iter().map(|&t| self.eval(t)).collect();
        for (t, v) in grid.iter().zip(&values) {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InadmissibleFunction(format!(
                    "f({t:e}) = {v} is negative or not finite"
                )));
            }
        }
        for w in 0..grid.len() {
            for step in [1, 2, 8] {
                let Some(b) = grid.get(w + step) else {
                    continue;
                };
                let a = grid[w];
                let mid = self.eval(0.5 * (a + b));
                let chord = 0.5 * (values[w] + values[w + step]);
                if mid < chord - CONCAVITY_TOL * chord.abs().max(1.0) {
                    return Err(Error::InadmissibleFunction(format!(
                        "not concave between {a:e} and {b:e}"
                    )));
                }
            }
        }
        for k in 1..grid.len() {
            let (r0, r1) = (values[k - 1] / grid[k - 1], values[k] / grid[k]);
            if r1 > r0 * (1.0 + CONCAVITY_TOL) + CONCAVITY_TOL {
                return Err(Error::InadmissibleFunction(format!(
                    "f(t)/t increases near t = {:e}",
                    grid[k]
                )));
            }
        }
        Ok(())
    }

    /// `f*(t) = t f(1/t)`.
    pub fn dual(&self) -> ConcFunction {
        let kind = match &self.kind {
            Kind::Power(g) => Kind::Power(1.0 - g),
            Kind::MinLinear { slope, cap } => Kind::MinLinear {
                slope: *cap,
                cap: *slope,
            },
            Kind::Custom { name, g, dual } => Kind::Custom {
                name: name.clone(),
                g: g.clone(),
                dual: !dual,
            },
        };
        ConcFunction { kind }
    }
}

/// `f ↦ f*`.
pub fn conc_dual(f: &ConcFunction) -> ConcFunction {
    f.dual()
}

fn unit(u: &[f64]) -> Result<Vec<f64>> {
    let len = norm(u);
    if len == 0.0 || !len.is_finite() {
        return Err(Error::InvalidInput("direction must be non-zero".into()));
    }
    Ok(u.iter().map(|x| x / len).collect())
}

fn smooth_part(k: &ConvexBody) -> Result<&dyn SmoothBody> {
    k.smooth()
        .ok_or_else(|| Error::Unsupported("curvature is only defined for smooth bodies".into()))
}

/// Gauss curvature of the quadric `xᵀQx = 1` at a boundary point, from the
/// bordered Hessian of `F(x) = xᵀQx`:
/// `κ = −det [[∇²F, ∇F], [∇Fᵀ, 0]] / |∇F|^{n+1}`.
pub fn ellipsoid_gauss_curvature(e: &Ellipsoid, x: &[f64]) -> f64 {
    let n = e.dim();
    let q = e.matrix();
    let grad = (q * DVector::from_row_slice(x)) * 2.0;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&(q * 2.0));
    for i in 0..n {
        m[(i, n)] = grad[i];
        m[(n, i)] = grad[i];
    }
    -m.determinant() / grad.norm().powi(n as i32 + 1)
}

/// `κ_K` at the boundary point with outer normal `u`. Ellipsoids use the
/// curvature of the boundary surface itself, oracles `1/α_K(u)`.
fn gauss_curvature_at_normal(k: &ConvexBody, u: &[f64]) -> Result<f64> {
    match k {
        ConvexBody::Ellipsoid(e) => Ok(ellipsoid_gauss_curvature(e, &e.gradient(u))),
        ConvexBody::Oracle(o) => crate::quad::kappa_k(o, u),
        ConvexBody::Polytope(_) => Err(Error::Unsupported(
            "curvature is only defined for smooth bodies".into(),
        )),
    }
}

/// `κ̃_K(x) = κ_K(x)/⟨x, ν⟩^{n+1}` at `x = ∇h_K(u)`.
pub fn tilde_kappa(k: &ConvexBody, u: &[f64]) -> Result<f64> {
    let s = smooth_part(k)?;
    let u = unit(u)?;
    let h = s.support(&u);
    Ok(gauss_curvature_at_normal(k, &u)? / h.powi(s.dim() as i32 + 1))
}

/// `α̃_K(u) = h_K(u)^{n+1} α_K(u)` at the unit vector in direction `u`.
pub fn tilde_alpha(k: &ConvexBody, u: &[f64]) -> Result<f64> {
    let s = smooth_part(k)?;
    let u = unit(u)?;
    Ok(s.support(&u).powi(s.dim() as i32 + 1) * alpha_k(s, &u)?)
}

/// `κ̃` and `α̃` sampled at a set of directions.
#[derive(Debug, Clone)]
pub struct AffineCurvature {
    pub directions: Vec<Vec<f64>>,
    pub tilde_kappa: Vec<f64>,
    pub tilde_alpha: Vec<f64>,
}

impl AffineCurvature {
    pub fn sample(k: &ConvexBody, directions: &[Vec<f64>]) -> Result<Self> {
        let tilde_kappa = directions
            .iter()
            .map(|u| tilde_kappa(k, u))
            .collect::<Result<_>>()?;
        let tilde_alpha = directions
            .iter()
            .map(|u| tilde_alpha(k, u))
            .collect::<Result<_>>()?;
        Ok(AffineCurvature {
            directions: directions.to_vec(),
            tilde_kappa,
            tilde_alpha,
        })
    }

    /// `max |κ̃ α̃ − 1|`.
    pub fn max_product_defect(&self) -> f64 {
        self.tilde_kappa
            .iter()
            .zip(&self.tilde_alpha)
            .map(|(k, a)| (k * a - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn check_input(k: &ConvexBody, t: &SymTensor, variance: Variance, what: &str) -> Result<()> {
    if t.variance() != variance {
        return Err(Error::VarianceMismatch(format!(
            "{what} needs a {} tensor",
            match variance {
                Variance::Vector => "vector-side",
                Variance::Covector => "covector-side",
            }
        )));
    }
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

fn integrate<F>(
    n: usize,
    integrand: &F,
    guard: Option<&SignGuard<'_>>,
    integration: &SphereIntegration,
) -> Result<QuadReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integration.integrate_guarded(n, integrand, guard)
}

/// `h_{Φ_f^p K}(φ) = ∫_{∂K} |⟨φ, x^p⟩| f(κ̃_K) ⟨x, ν⟩ dx`, evaluated on the
/// sphere as `∫ |⟨φ, ∇h^p⟩| h^{−n} f*(α̃) du`. Polytopes give 0.
pub fn phi_f_p(
    k: &ConvexBody,
    f: &ConcFunction,
    phi: &SymTensor,
    integration: &SphereIntegration,
) -> Result<QuadReport> {
    check_input(k, phi, Variance::Covector, "Phi_f")?;
    let Some(s) = k.smooth() else {
        return Ok(QuadReport::exact(0.0));
    };
    let n = s.dim();
    let fd = f.dual();
    let integrand = |u: &[f64]| {
        let h = s.support(u);
        let x = s.gradient(u);
        let at = h.powi(n as i32 + 1) * principal_minor_sum(&s.hessian(u));
        phi.eval_power(&x).abs() * h.powi(-(n as i32)) * fd.eval(at)
    };
    integrate_phi_side(k, phi, &integrand, integration)
}

/// Integrates with the kinks of `|⟨φ, ∇h(u)^p⟩|` guarded where `∇h` is
/// linear up to a positive factor.
fn integrate_phi_side<F>(
    k: &ConvexBody,
    phi: &SymTensor,
    integrand: &F,
    integration: &SphereIntegration,
) -> Result<QuadReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match k {
        ConvexBody::Ellipsoid(e) => {
            let m = e.inverse_matrix();
            let poly = |u: &[f64]| phi.eval_power((m * DVector::from_row_slice(u)).as_slice());
            let guard = SignGuard {
                degree: phi.degree(),
                poly: &poly,
            };
            integrate(k.dim(), integrand, Some(&guard), integration)
        }
        _ => integrate(k.dim(), integrand, None, integration),
    }
}

fn integrate_psi_side<F>(
    psi: &SymTensor,
    integrand: &F,
    integration: &SphereIntegration,
) -> Result<QuadReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let poly = |u: &[f64]| psi.eval_power(u);
    let guard = SignGuard {
        degree: psi.degree(),
        poly: &poly,
    };
    integrate(psi.n(), integrand, Some(&guard), integration)
}

/// [`phi_f_p`] from the boundary integral, `∫ |⟨φ, x^p⟩| ⟨x, ν⟩ f(κ̃) dx`
/// with `dx = α du`.
pub fn phi_f_p_boundary(
    k: &ConvexBody,
    f: &ConcFunction,
    phi: &SymTensor,
    integration: &SphereIntegration,
) -> Result<QuadReport> {
    check_input(k, phi, Variance::Covector, "Phi_f")?;
    let Some(s) = k.smooth() else {
        return Ok(QuadReport::exact(0.0));
    };
    let n = s.dim();
    let integrand = |u: &[f64]| {
        let h = s.support(u);
        let x = s.gradient(u);
        let alpha = principal_minor_sum(&s.hessian(u));
        let kt = gauss_curvature_at_normal(k, u).unwrap_or(0.0) / h.powi(n as i32 + 1);
        phi.eval_power(&x).abs() * h * f.eval(kt) * alpha
    };
    integrate_phi_side(k, phi, &integrand, integration)
}

/// `h_{Ψ_f^p K}(ψ) = ∫_{∂K} |⟨ψ, ν^p⟩| ⟨x, ν⟩^{1−p} f(κ̃_K) dx`, evaluated
/// as `∫ |⟨ψ, u^p⟩| h^{−(n+p)} f*(α̃) du`. Polytopes give 0.
pub fn psi_f_p(
    k: &ConvexBody,
    f: &ConcFunction,
    psi: &SymTensor,
    integration: &SphereIntegration,
) -> Result<QuadReport> {
    check_input(k, psi, Variance::Vector, "Psi_f")?;
    let Some(s) = k.smooth() else {
        return Ok(QuadReport::exact(0.0));
    };
    let n = s.dim();
    let exp = -((n + psi.degree()) as i32);
    let fd = f.dual();
    let integrand = |u: &[f64]| {
        let h = s.support(u);
        let at = h.powi(n as i32 + 1) * principal_minor_sum(&s.hessian(u));
        psi.eval_power(u).abs() * h.powi(exp) * fd.eval(at)
    };
    integrate_psi_side(psi, &integrand, integration)
}

/// [`psi_f_p`] from the boundary integral.
pub fn psi_f_p_boundary(
    k: &ConvexBody,
    f: &ConcFunction,
    psi: &SymTensor,
    integration: &SphereIntegration,
) -> Result<QuadReport> {
    check_input(k, psi, Variance::Vector, "Psi_f")?;
    let Some(s) = k.smooth() else {
        return Ok(QuadReport::exact(0.0));
    };
    let n = s.dim();
    let exp = 1 - psi.degree() as i32;
    let integrand = |u: &[f64]| {
        let h = s.support(u);
        let alpha = principal_minor_sum(&s.hessian(u));
        let kt = gauss_curvature_at_normal(k, u).unwrap_or(0.0) / h.powi(n as i32 + 1);
        psi.eval_power(u).abs() * h.powi(exp) * f.eval(kt) * alpha
    };
    integrate_psi_side(psi, &integrand, integration)
}

/// One refinement level of the semicontinuity experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SemicontinuityRow {
    pub level: usize,
    pub vertices: usize,
    pub hausdorff: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemicontinuityTable {
    pub smooth_value: f64,
    pub rows: Vec<SemicontinuityRow>,
}

impl SemicontinuityTable {
    pub const HEADER: [&'static str; 5] =
        ["level", "vertices", "hausdorff", "value", "smooth_value"];

    pub fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.level.to_string(),
                    r.vertices.to_string(),
                    format!("{:.12e}", r.hausdorff),
                    format!("{:.12e}", r.value),
                    format!("{:.12e}", self.smooth_value),
                ]
            })
            .collect()
    }
}

const MAX_EXPERIMENT_POINTS: usize = 20_000;

/// Points of the boundary of `[-1, 1]^n` on a grid with `m` cells per edge.
fn cube_surface_grid(n: usize, m: usize) -> Vec<Vec<f64>> {
    let ticks: Vec<f64> = (0..=m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        if idx.iter().any(|&i| i == 0 || i == m) {
            out.push(idx.iter().map(|&i| ticks[i]).collect());
        }
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] <= m {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    out
}

/// Inscribed polytopes `P_j = conv{∇h_K(u)}` over nested direction grids
/// approach the smooth body `K`; every `Φ_f^p(P_j)` is 0 while `Φ_f^p(K)`
/// is not. Rows report the Hausdorff distance of `P_j` to `K`.
pub fn semicontinuity_experiment(
    k: &ConvexBody,
    levels: usize,
    f: &ConcFunction,
    phi: &SymTensor,
    integration: &SphereIntegration,
) -> Result<SemicontinuityTable> {
    let s = smooth_part(k)?;
    let n = s.dim();
    if levels == 0 {
        return Err(Error::InvalidInput(
            "at least one refinement level is needed".into(),
        ));
    }
    let last = 1usize << levels;
    if 2 * n * (last + 1).pow(n as u32 - 1) > MAX_EXPERIMENT_POINTS {
        return Err(Error::SizeCap(format!(
            "{levels} refinement levels in dimension {n}"
        )));
    }
    let smooth_value = phi_f_p(k, f, phi, integration)?.value;
    let probe: Vec<Vec<f64>> = cube_surface_grid(n, 4 * last);
    let mut rows = Vec::with_capacity(levels);
    for level in 1..=levels {
        let points: Vec<Vec<f64>> = cube_surface_grid(n, 1 << level)
            .iter()
            .map(|d| s.gradient(&unit(d).expect("cube surface avoids 0")))
            .collect();
        let polytope = PointSet::new(points)?.to_polytope()?;
        let mut directions = probe.clone();
        directions.extend(polytope.facets().iter().map(|fc| fc.normal.clone()));
        let hausdorff = hausdorff_distance(k, &polytope, &directions)?;
        let body: ConvexBody = polytope.into();
        let value = phi_f_p(&body, f, phi, integration)?.value;
        if value > smooth_value {
            return Err(Error::InvalidInput(format!(
                "polytope value {value} exceeds the smooth value {smooth_value}"
            )));
        }
        rows.push(SemicontinuityRow {
            level,
            vertices: body.as_polytope().map(|p| p.vertices().len()).unwrap_or(0),
            hausdorff,
            value,
        });
    }
    Ok(SemicontinuityTable { smooth_value, rows })
}
