use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::quad::{QuadOptions, SphereIntegration, SphereRule};
use crate::tensor_val::EvalOptions;

/// A runnable check. Exact checks count mismatches and have tolerance 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSpec {
    pub name: &'static str,
    pub criterion: u8,
    pub default_tol: f64,
}

impl CheckSpec {
    pub fn is_exact(&self) -> bool {
        self.default_tol == 0.0
    }
}

const fn spec(name: &'static str, criterion: u8, default_tol: f64) -> CheckSpec {
    CheckSpec {
        name,
        criterion,
        default_tol,
    }
}

pub const CHECKS: &[CheckSpec] = &[
    spec("identity_volume", 1, 1e-9),
    spec("skew_vanishing", 2, 1e-6),
    spec("simplex_positive", 3, 0.0),
    spec("sl_invariance_polytope", 4, 1e-6),
    spec("sl_invariance_ellipsoid", 4, 1e-4),
    spec("valuation_identity", 5, 1e-6),
    spec("homogeneity_phi", 6, 1e-8),
    spec("homogeneity_psi", 6, 1e-4),
    spec("polarity", 7, 1e-4),
    spec("lp_reductions", 8, 1e-6),
    spec("projection_cube", 9, 1e-12),
    spec("projection_derivative", 9, 1e-3),
    spec("decomposition_lemma", 10, 0.0),
    spec("isotypic_idempotence", 11, 1e-9),
    spec("isotypic_equivariance", 11, 1e-7),
    spec("isotypic_rank", 11, 0.0),
    spec("curvature_product", 12, 1e-8),
    spec("curvature_polarity", 12, 1e-6),
    spec("semicont_ball", 13, 1e-6),
    spec("semicont_polytope", 13, 0.0),
    spec("semicont_sides", 13, 1e-6),
    spec("semicont_polarity", 13, 1e-4),
    spec("divergence_lemma", 14, 1e-4),
    spec("schur_lr", 15, 1e-10),
];

pub fn check_spec(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

pub const DEFAULT_SEED: u64 = 20240611;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_SPHERE_TOL: f64 = 1e-7;

/// Settings shared by all subcommands.
///
/// Defaults: seed [`DEFAULT_SEED`], the tolerances of [`CHECKS`], adaptive
/// sphere integration at relative tolerance [`DEFAULT_SPHERE_TOL`], facet
/// quadrature at [`DEFAULT_QUAD_TOL`], dimensions 2 and 3, no output
/// directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// Overrides of the default check tolerances.
    pub tolerances: BTreeMap<String, f64>,
    /// Fixed product rule level instead of adaptive sphere integration.
    pub sphere_level: Option<usize>,
    pub quad_tol: f64,
    pub sphere_tol: f64,
    pub out: Option<PathBuf>,
    /// Dimensions used by the geometric checks.
    pub dims: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            tolerances: BTreeMap::new(),
            sphere_level: None,
            quad_tol: DEFAULT_QUAD_TOL,
            sphere_tol: DEFAULT_SPHERE_TOL,
            out: None,
            dims: vec![2, 3],
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Parses `NAME=VALUE`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("expected NAME=VALUE, got '{s}'")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("tolerance '{value}' is not a number")))?;
    Ok((name.trim().to_string(), v))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, tol) in &self.tolerances {
            let spec = check_spec(name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown check '{name}'")))?;
            if spec.is_exact() {
                return Err(Error::InvalidInput(format!(
                    "check '{name}' is exact and takes no tolerance"
                )));
            }
            positive(&format!("tolerance of '{name}'"), *tol)?;
        }
        positive("quad tolerance", self.quad_tol)?;
        positive("sphere tolerance", self.sphere_tol)?;
        if self.sphere_level == Some(0) {
            return Err(Error::InvalidInput(
                "sphere level must be at least 1".into(),
            ));
        }
        if self.dims.is_empty() {
            return Err(Error::InvalidInput("no dimensions selected".into()));
        }
        if let Some(n) = self.dims.iter().find(|n| !(2..=4).contains(*n)) {
            return Err(Error::InvalidInput(format!("dimension {n} outside 2..=4")));
        }
        Ok(())
    }

    pub fn tolerance(&self, check: &CheckSpec) -> f64 {
        self.tolerances
            .get(check.name)
            .copied()
            .unwrap_or(check.default_tol)
    }

    pub fn facet_options(&self) -> QuadOptions {
        QuadOptions::with_rel_tol(self.quad_tol)
    }

    pub fn sphere(&self, n: usize) -> Result<SphereIntegration> {
        Ok(match self.sphere_level {
            Some(level) => SphereIntegration::Rule(SphereRule::new(n, level)?),
            None => SphereIntegration::Adaptive(QuadOptions::with_rel_tol(self.sphere_tol)),
        })
    }

    pub fn eval_options(&self, n: usize) -> Result<EvalOptions> {
        Ok(EvalOptions {
            facet: self.facet_options(),
            sphere: self.sphere(n)?,
        })
    }
}
