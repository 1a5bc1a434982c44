//! Symmetric tensor powers of `R^n` in the monomial basis.
//!
//! An element of `Sym^p V` is stored as a dense coefficient vector over the
//! multi-indices `α` with `|α| = p`, with respect to the basis
//! `e^α = e_1^{α_1} ⋯ e_n^{α_n}` of symmetric products. In that basis the
//! natural pairing with `Sym^p V*` is diagonal, `⟨e^α, ε^β⟩ = δ_{αβ} α!`,
//! and `x^p = Σ_α (p choose α) x^α e^α`, so that `⟨x^p, ξ^p⟩ = p!⟨x, ξ⟩^p`.
//!
//! Mixed tensors `Sym^p ⊗ Sym^q` store a `dim_p × dim_q` coefficient matrix;
//! exactly one of the two factors is covariant.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use std::sync::LazyLock;

use crate::error::{check_dim, Error, Result};
use crate::numeric::{binomial, factorial};

const SINGULAR_TOL: f64 = 1e-12;

/// Whether a tensor factor lives on `V` or on `V*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Vector,
    Covector,
}

impl Variance {
    pub fn dual(self) -> Self {
        match self {
            Variance::Vector => Variance::Covector,
            Variance::Covector => Variance::Vector,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Variance::Vector => "vector",
            Variance::Covector => "covector",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "vector" => Some(Variance::Vector),
            "covector" => Some(Variance::Covector),
            _ => None,
        }
    }
}

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: Vec<u8>) -> Self {
        MultiIndex(exponents)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    /// `α! = Π α_i!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a as usize)).product()
    }

    /// Multinomial coefficient `|α|! / α!`.
    pub fn multinomial(&self) -> f64 {
        factorial(self.degree()) / self.factorial()
    }

    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }
}

/// All multi-indices of a fixed degree in a fixed number of variables,
/// in descending lexicographic order.
#[derive(Debug)]
pub struct MonomialBasis {
    pub n: usize,
    pub degree: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl MonomialBasis {
    fn build(n: usize, degree: usize) -> Self {
        let mut indices = Vec::with_capacity(sym_dim(n, degree));
        let mut current = vec![0u8; n];
        fill(&mut indices, &mut current, 0, degree);
        let lookup = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        MonomialBasis {
            n,
            degree,
            indices,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Values `x^α` for every basis index.
    pub fn monomials(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.monomials_into(x, &mut out);
        out
    }

    pub fn monomials_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        if self.degree == 0 {
            out.push(1.0);
            return;
        }
        // powers[i][k] = x_i^k
        let d = self.degree;
        let mut powers = vec![1.0; self.n * (d + 1)];
        for i in 0..self.n {
            for k in 1..=d {
                powers[i * (d + 1) + k] = powers[i * (d + 1) + k - 1] * x[i];
            }
        }
        for alpha in &self.indices {
            let mut v = 1.0;
            for (i, &a) in alpha.0.iter().enumerate() {
                if a != 0 {
                    v *= powers[i * (d + 1) + a as usize];
                }
            }
            out.push(v);
        }
    }

    /// Diagonal of the natural pairing, `α!` for each basis index.
    pub fn pairing_weights(&self) -> Vec<f64> {
        self.indices.iter().map(MultiIndex::factorial).collect()
    }
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<u8>, pos: usize, remaining: usize) {
    let n = current.len();
    if pos + 1 == n {
        current[pos] = remaining as u8;
        out.push(MultiIndex(current.clone()));
        current[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a as u8;
        fill(out, current, pos + 1, remaining - a);
    }
    current[pos] = 0;
}

static BASES: LazyLock<Mutex<HashMap<(usize, usize), Arc<MonomialBasis>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Shared, cached monomial basis of `Sym^degree(R^n)`.
pub fn basis(n: usize, degree: usize) -> Arc<MonomialBasis> {
    assert!(n >= 1, "dimension must be positive");
    let mut cache = BASES.lock().expect("basis cache poisoned");
    cache
        .entry((n, degree))
        .or_insert_with(|| Arc::new(MonomialBasis::build(n, degree)))
        .clone()
}

/// `dim Sym^p(R^n) = C(n+p-1, p)`.
pub fn sym_dim(n: usize, p: usize) -> usize {
    binomial(n + p - 1, p)
}

/// Matrix of the map induced on `Sym^p` by a linear map `m` of `R^n`.
///
/// Column `α` holds the coefficients of `Π_i (m e_i)^{α_i}`.
pub fn induced_matrix(m: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let target = basis(n, p);
    let mut out = DMatrix::zeros(target.len(), target.len());
    for (col, alpha) in target.indices().iter().enumerate() {
        // Multiply out the product of linear forms one factor at a time.
        let mut poly: HashMap<Vec<u8>, f64> = HashMap::new();
        poly.insert(vec![0u8; n], 1.0);
        for (i, &a) in alpha.exponents().iter().enumerate() {
            for _ in 0..a {
                let mut next: HashMap<Vec<u8>, f64> = HashMap::with_capacity(poly.len() * n);
                for (mono, c) in &poly {
                    for j in 0..n {
                        let mij = m[(j, i)];
                        if mij == 0.0 {
                            continue;
                        }
                        let mut e = mono.clone();
                        e[j] += 1;
                        *next.entry(e).or_insert(0.0) += c * mij;
                    }
                }
                poly = next;
            }
        }
        for (mono, c) in poly {
            let row = target
                .position(&MultiIndex(mono))
                .expect("product has the right degree");
            out[(row, col)] += c;
        }
    }
    out
}

/// The matrix by which `t` acts on a factor of the given variance: `t` on
/// vectors, `t^{-T}` on covectors.
pub fn factor_matrix(t: &DMatrix<f64>, variance: Variance) -> Result<DMatrix<f64>> {
    if t.nrows() != t.ncols() {
        return Err(Error::InvalidInput("transformation must be square".into()));
    }
    let det = t.determinant();
    if det.abs() < SINGULAR_TOL {
        return Err(Error::Singular { det });
    }
    Ok(match variance {
        Variance::Vector => t.clone(),
        Variance::Covector => t
            .clone()
            .try_inverse()
            .ok_or(Error::Singular { det })?
            .transpose(),
    })
}

/// Element of `Sym^p V` or `Sym^p V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    n: usize,
    p: usize,
    variance: Variance,
    coeffs: DVector<f64>,
}

impl SymTensor {
    pub fn zeros(n: usize, p: usize, variance: Variance) -> Self {
        SymTensor {
            n,
            p,
            variance,
            coeffs: DVector::zeros(sym_dim(n, p)),
        }
    }

    pub fn from_coeffs(
        n: usize,
        p: usize,
        variance: Variance,
        coeffs: DVector<f64>,
    ) -> Result<Self> {
        check_dim(sym_dim(n, p), coeffs.len())?;
        Ok(SymTensor {
            n,
            p,
            variance,
            coeffs,
        })
    }

    /// `x^p`, the `p`-th symmetric power of `x`.
    pub fn power(x: &[f64], p: usize, variance: Variance) -> Self {
        let n = x.len();
        let b = basis(n, p);
        let coeffs = DVector::from_iterator(
            b.len(),
            b.indices().iter().map(|a| a.multinomial() * a.monomial(x)),
        );
        SymTensor {
            n,
            p,
            variance,
            coeffs,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Option<f64> {
        basis(self.n, self.p)
            .position(alpha)
            .map(|i| self.coeffs[i])
    }

    /// Same coefficients, read in the dual space (`V** = V`).
    pub fn dual(&self) -> Self {
        SymTensor {
            variance: self.variance.dual(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymTensor {
            coeffs: &self.coeffs * s,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &SymTensor) -> Result<SymTensor> {
        self.check_same_space(other)?;
        Ok(SymTensor {
            coeffs: &self.coeffs + &other.coeffs,
            ..self.clone()
        })
    }

    fn check_same_space(&self, other: &SymTensor) -> Result<()> {
        check_dim(self.n, other.n)?;
        if self.p != other.p {
            return Err(Error::DegreeMismatch {
                expected: self.p,
                found: other.p,
            });
        }
        if self.variance != other.variance {
            return Err(Error::VarianceMismatch(
                "tensors live in different spaces".into(),
            ));
        }
        Ok(())
    }

    /// Natural pairing `Sym^p V × Sym^p V* → R`.
    pub fn pair(&self, other: &SymTensor) -> Result<f64> {
        check_dim(self.n, other.n)?;
        if self.p != other.p {
            return Err(Error::DegreeMismatch {
                expected: self.p,
                found: other.p,
            });
        }
        if self.variance == other.variance {
            return Err(Error::VarianceMismatch(
                "pairing needs one vector-side and one covector-side tensor".into(),
            ));
        }
        let w = basis(self.n, self.p).pairing_weights();
        Ok(self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .zip(&w)
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    /// `⟨self, y^p⟩` for a point `y` of the dual space.
    pub fn eval_power(&self, y: &[f64]) -> f64 {
        let b = basis(self.n, self.p);
        let m = b.monomials(y);
        factorial(self.p) * self.coeffs.iter().zip(&m).map(|(c, m)| c * m).sum::<f64>()
    }

    /// Natural action of an invertible `t`.
    pub fn transform(&self, t: &DMatrix<f64>) -> Result<SymTensor> {
        check_dim(self.n, t.nrows())?;
        let m = factor_matrix(t, self.variance)?;
        Ok(SymTensor {
            coeffs: induced_matrix(&m, self.p) * &self.coeffs,
            ..self.clone()
        })
    }
}

/// Element of `Sym^p ⊗ Sym^q` with one covariant factor.
///
/// `first` is the variance of the degree-`p` factor; the degree-`q` factor
/// has the opposite variance. `φ ∈ Sym^p V* ⊗ Sym^q V` has
/// `first = Covector`; `ψ ∈ Sym^p V ⊗ Sym^q V*` has `first = Vector`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTensor {
    n: usize,
    p: usize,
    q: usize,
    first: Variance,
    coeffs: DMatrix<f64>,
}

impl MixedTensor {
    pub fn zeros(n: usize, p: usize, q: usize, first: Variance) -> Self {
        MixedTensor {
            n,
            p,
            q,
            first,
            coeffs: DMatrix::zeros(sym_dim(n, p), sym_dim(n, q)),
        }
    }

    pub fn from_coeffs(
        n: usize,
        p: usize,
        q: usize,
        first: Variance,
        coeffs: DMatrix<f64>,
    ) -> Result<Self> {
        check_dim(sym_dim(n, p), coeffs.nrows())?;
        check_dim(sym_dim(n, q), coeffs.ncols())?;
        Ok(MixedTensor {
            n,
            p,
            q,
            first,
            coeffs,
        })
    }

    /// Row-major flattening `(α, β) ↦ α·dim_q + β`.
    pub fn from_flat(n: usize, p: usize, q: usize, first: Variance, flat: &[f64]) -> Result<Self> {
        let (dp, dq) = (sym_dim(n, p), sym_dim(n, q));
        check_dim(dp * dq, flat.len())?;
        Ok(MixedTensor {
            n,
            p,
            q,
            first,
            coeffs: DMatrix::from_row_slice(dp, dq, flat),
        })
    }

    pub fn flat(&self) -> DVector<f64> {
        let (dp, dq) = self.coeffs.shape();
        DVector::from_fn(dp * dq, |k, _| self.coeffs[(k / dq, k % dq)])
    }

    /// The identity endomorphism as an element of `V* ⊗ V` (`p = q = 1`).
    pub fn identity(n: usize) -> Self {
        MixedTensor {
            n,
            p: 1,
            q: 1,
            first: Variance::Covector,
            coeffs: DMatrix::identity(n, n),
        }
    }

    /// The tensor `φ ∈ V* ⊗ V` with `⟨φ, x ⊗ ξ⟩ = ⟨A x, ξ⟩`.
    pub fn from_endomorphism(a: &DMatrix<f64>) -> Self {
        MixedTensor {
            n: a.nrows(),
            p: 1,
            q: 1,
            first: Variance::Covector,
            coeffs: a.transpose(),
        }
    }

    /// Embeds a symmetric tensor as a mixed tensor with `q = 0`.
    pub fn from_sym(s: &SymTensor) -> Self {
        MixedTensor {
            n: s.n,
            p: s.p,
            q: 0,
            first: s.variance,
            coeffs: DMatrix::from_column_slice(s.coeffs.len(), 1, s.coeffs.as_slice()),
        }
    }

    /// Simple tensor `a^p ⊗ b^q`.
    pub fn power_product(a: &[f64], p: usize, b: &[f64], q: usize, first: Variance) -> Self {
        let sa = SymTensor::power(a, p, first);
        let sb = SymTensor::power(b, q, first.dual());
        MixedTensor {
            n: a.len(),
            p,
            q,
            first,
            coeffs: &sa.coeffs * sb.coeffs.transpose(),
        }
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

    pub fn first(&self) -> Variance {
        self.first
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn dual(&self) -> Self {
        MixedTensor {
            first: self.first.dual(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        MixedTensor {
            coeffs: &self.coeffs * s,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &MixedTensor) -> Result<MixedTensor> {
        self.check_same_space(other)?;
        Ok(MixedTensor {
            coeffs: &self.coeffs + &other.coeffs,
            ..self.clone()
        })
    }

    pub fn same_space(&self, other: &MixedTensor) -> bool {
        self.n == other.n && self.p == other.p && self.q == other.q && self.first == other.first
    }

    fn check_same_space(&self, other: &MixedTensor) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::VarianceMismatch(
                "tensors live in different spaces".into(),
            ))
        }
    }

    /// Diagonal of the natural pairing on the flattened coefficients.
    pub fn pairing_weights(n: usize, p: usize, q: usize) -> DVector<f64> {
        let wp = basis(n, p).pairing_weights();
        let wq = basis(n, q).pairing_weights();
        DVector::from_fn(wp.len() * wq.len(), |k, _| {
            wp[k / wq.len()] * wq[k % wq.len()]
        })
    }

    /// Natural pairing with a tensor of the dual space.
    pub fn pair(&self, other: &MixedTensor) -> Result<f64> {
        if self.n != other.n || self.p != other.p || self.q != other.q || self.first == other.first
        {
            return Err(Error::VarianceMismatch("pairing needs dual spaces".into()));
        }
        let w = Self::pairing_weights(self.n, self.p, self.q);
        Ok(self
            .flat()
            .iter()
            .zip(other.flat().iter())
            .zip(w.iter())
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    /// `⟨φ, x^p ⊗ ξ^q⟩` when the first factor is covariant, and
    /// `⟨ψ, ξ^p ⊗ x^q⟩` when it is contravariant. `x ∈ V`, `ξ ∈ V*`.
    pub fn bracket(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, xi.len())?;
        Ok(self.evaluator().eval(x, xi))
    }

    /// Precomputed bases for repeated bracket evaluation.
    pub fn evaluator(&self) -> BracketEvaluator<'_> {
        BracketEvaluator {
            tensor: self,
            bp: basis(self.n, self.p),
            bq: basis(self.n, self.q),
            scale: factorial(self.p) * factorial(self.q),
        }
    }

    /// Natural action of an invertible `t` on both factors.
    pub fn transform(&self, t: &DMatrix<f64>) -> Result<MixedTensor> {
        check_dim(self.n, t.nrows())?;
        let m1 = factor_matrix(t, self.first)?;
        let m2 = factor_matrix(t, self.first.dual())?;
        let r1 = induced_matrix(&m1, self.p);
        let r2 = induced_matrix(&m2, self.q);
        Ok(MixedTensor {
            coeffs: r1 * &self.coeffs * r2.transpose(),
            ..self.clone()
        })
    }

    fn variance_label(&self) -> String {
        format!("{}-{}", self.first.as_str(), self.first.dual().as_str())
    }
}

/// Evaluates `p! q! Σ c_{αβ} a^α b^β` with cached bases.
pub struct BracketEvaluator<'a> {
    tensor: &'a MixedTensor,
    bp: Arc<MonomialBasis>,
    bq: Arc<MonomialBasis>,
    scale: f64,
}

impl BracketEvaluator<'_> {
    /// `x ∈ V`, `ξ ∈ V*`; the roles are assigned by the tensor's variance.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        let (a, b) = match self.tensor.first {
            Variance::Covector => (x, xi),
            Variance::Vector => (xi, x),
        };
        let ma = self.bp.monomials(a);
        let mb = self.bq.monomials(b);
        let c = &self.tensor.coeffs;
        let mut total = 0.0;
        for (i, ai) in ma.iter().enumerate() {
            if *ai == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for (j, bj) in mb.iter().enumerate() {
                row += c[(i, j)] * bj;
            }
            total += ai * row;
        }
        self.scale * total
    }

    /// Contract the degree-`q` factor against `b^q`, leaving the polynomial
    /// `a ↦ ⟨·, a^p ⊗ b^q⟩` as a coefficient vector over `Sym^p`.
    pub fn partial_second(&self, b: &[f64]) -> Vec<f64> {
        let mb = self.bq.monomials(b);
        let c = &self.tensor.coeffs;
        (0..c.nrows())
            .map(|i| self.scale * (0..c.ncols()).map(|j| c[(i, j)] * mb[j]).sum::<f64>())
            .collect()
    }

    /// Evaluate a coefficient vector from [`Self::partial_second`] at `a`.
    pub fn eval_partial(&self, partial: &[f64], a: &[f64], scratch: &mut Vec<f64>) -> f64 {
        self.bp.monomials_into(a, scratch);
        partial.iter().zip(scratch.iter()).map(|(c, m)| c * m).sum()
    }
}

/// `⟨φ, x^p ⊗ ξ^q⟩` (free-function form).
pub fn mixed_bracket(phi: &MixedTensor, x: &[f64], xi: &[f64]) -> Result<f64> {
    phi.bracket(x, xi)
}

/// Either kind of tensor, as read from a tensor file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    Sym(SymTensor),
    Mixed(MixedTensor),
}

impl AnyTensor {
    pub fn into_mixed(self) -> MixedTensor {
        match self {
            AnyTensor::Sym(s) => MixedTensor::from_sym(&s),
            AnyTensor::Mixed(m) => m,
        }
    }

    pub fn into_sym(self) -> Result<SymTensor> {
        match self {
            AnyTensor::Sym(s) => Ok(s),
            AnyTensor::Mixed(m) if m.q == 0 => SymTensor::from_coeffs(
                m.n,
                m.p,
                m.first,
                DVector::from_column_slice(m.coeffs.as_slice()),
            ),
            AnyTensor::Mixed(_) => Err(Error::InvalidInput(
                "expected a symmetric tensor (q = 0)".into(),
            )),
        }
    }
}

fn format_index(alpha: &MultiIndex) -> String {
    alpha
        .exponents()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Text form: a header line `n,p,q,variance` followed by one line
/// `α;β;coefficient` per nonzero coefficient. Symmetric tensors use `q = 0`,
/// variance `vector|covector` and an empty `β`.
pub fn write_tensor(t: &AnyTensor) -> String {
    let mut out = String::new();
    match t {
        AnyTensor::Sym(s) => {
            let _ = writeln!(out, "{},{},0,{}", s.n, s.p, s.variance.as_str());
            let b = basis(s.n, s.p);
            for (alpha, c) in b.indices().iter().zip(s.coeffs.iter()) {
                if *c != 0.0 {
                    let _ = writeln!(out, "{};;{}", format_index(alpha), c);
                }
            }
        }
        AnyTensor::Mixed(m) => {
            let _ = writeln!(out, "{},{},{},{}", m.n, m.p, m.q, m.variance_label());
            let bp = basis(m.n, m.p);
            let bq = basis(m.n, m.q);
            for (i, alpha) in bp.indices().iter().enumerate() {
                for (j, beta) in bq.indices().iter().enumerate() {
                    let c = m.coeffs[(i, j)];
                    if c != 0.0 {
                        let _ =
                            writeln!(out, "{};{};{}", format_index(alpha), format_index(beta), c);
                    }
                }
            }
        }
    }
    out
}

/// Parses one or more tensor blocks; each header line starts a new block.
pub fn parse_tensors(text: &str, origin: &str) -> Result<Vec<AnyTensor>> {
    let mut out = Vec::new();
    let mut current: Option<AnyTensor> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !line.contains(';') {
            if let Some(t) = current.take() {
                out.push(t);
            }
            current = Some(parse_header(line, origin, lineno)?);
            continue;
        }
        let t = current
            .as_mut()
            .ok_or_else(|| Error::parse(origin, lineno, "coefficient line before header"))?;
        let fields: Vec<&str> = line.split(';').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                origin,
                lineno,
                "expected `alpha;beta;coefficient`",
            ));
        }
        let value: f64 = fields[2].trim().parse().map_err(|_| {
            Error::parse(origin, lineno, format!("bad coefficient `{}`", fields[2]))
        })?;
        match t {
            AnyTensor::Sym(s) => {
                if !fields[1].trim().is_empty() {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        "symmetric tensor takes an empty beta",
                    ));
                }
                let alpha = parse_index(fields[0], s.n, s.p, origin, lineno)?;
                let pos = basis(s.n, s.p).position(&alpha).expect("validated index");
                s.coeffs[pos] = value;
            }
            AnyTensor::Mixed(m) => {
                let alpha = parse_index(fields[0], m.n, m.p, origin, lineno)?;
                let beta = parse_index(fields[1], m.n, m.q, origin, lineno)?;
                let i = basis(m.n, m.p).position(&alpha).expect("validated index");
                let j = basis(m.n, m.q).position(&beta).expect("validated index");
                m.coeffs[(i, j)] = value;
            }
        }
    }
    if let Some(t) = current.take() {
        out.push(t);
    }
    if out.is_empty() {
        return Err(Error::parse(origin, 0, "no tensor header found"));
    }
    Ok(out)
}

fn parse_header(line: &str, origin: &str, lineno: usize) -> Result<AnyTensor> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(Error::parse(
            origin,
            lineno,
            "header must be `n,p,q,variance`",
        ));
    }
    let num = |s: &str, what: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::parse(origin, lineno, format!("bad {what} `{s}`")))
    };
    let n = num(fields[0], "n")?;
    let p = num(fields[1], "p")?;
    let q = num(fields[2], "q")?;
    if !(1..=8).contains(&n) {
        return Err(Error::parse(origin, lineno, "n must lie in 1..=8"));
    }
    if p > 12 || q > 12 {
        return Err(Error::parse(
            origin,
            lineno,
            "degrees above 12 are not supported",
        ));
    }
    let variance = fields[3];
    if let Some((a, b)) = variance.split_once('-') {
        let first = Variance::parse(a)
            .ok_or_else(|| Error::parse(origin, lineno, format!("bad variance `{variance}`")))?;
        if Variance::parse(b) != Some(first.dual()) {
            return Err(Error::parse(
                origin,
                lineno,
                "mixed tensor needs one covariant factor",
            ));
        }
        Ok(AnyTensor::Mixed(MixedTensor::zeros(n, p, q, first)))
    } else {
        let v = Variance::parse(variance)
            .ok_or_else(|| Error::parse(origin, lineno, format!("bad variance `{variance}`")))?;
        if q != 0 {
            return Err(Error::parse(
                origin,
                lineno,
                "symmetric tensor header needs q = 0",
            ));
        }
        Ok(AnyTensor::Sym(SymTensor::zeros(n, p, v)))
    }
}

fn parse_index(
    s: &str,
    n: usize,
    degree: usize,
    origin: &str,
    lineno: usize,
) -> Result<MultiIndex> {
    let s = s.trim();
    let exps: Vec<u8> = if s.is_empty() {
        Vec::new()
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<u8>()
                    .map_err(|_| Error::parse(origin, lineno, format!("bad exponent `{t}`")))
            })
            .collect::<Result<_>>()?
    };
    let alpha = if exps.is_empty() && degree == 0 {
        MultiIndex(vec![0; n])
    } else {
        MultiIndex(exps)
    };
    if alpha.len() != n {
        return Err(Error::parse(
            origin,
            lineno,
            format!("multi-index has {} entries, expected {n}", alpha.len()),
        ));
    }
    if alpha.degree() != degree {
        return Err(Error::parse(
            origin,
            lineno,
            format!("multi-index degree {} != {degree}", alpha.degree()),
        ));
    }
    Ok(alpha)
}

pub fn read_tensors(path: &Path) -> Result<Vec<AnyTensor>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tensors(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn idx(e: &[u8]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn rotation(theta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        loop {
            let m: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            if m.determinant().abs() > 0.2 {
                return m;
            }
        }
    }

    #[test]
    fn basis_dimension_matches_binomial() {
        for n in 1..=6 {
            for p in 0..=6 {
                assert_eq!(basis(n, p).len(), binomial(n + p - 1, p));
            }
        }
    }

    #[test]
    fn power_of_basis_vector() {
        let s = SymTensor::power(&[1.0, 0.0, 0.0], 3, Variance::Vector);
        assert_eq!(s.coeff(&idx(&[3, 0, 0])), Some(1.0));
        assert_eq!(s.coeffs().iter().filter(|c| **c != 0.0).count(), 1);
    }

    #[test]
    fn power_of_zero_is_zero() {
        let s = SymTensor::power(&[0.0, 0.0], 2, Variance::Vector);
        assert!(s.coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn power_of_ones_carries_multinomials() {
        // (e1 + e2)^2 = e1^2 + 2 e1 e2 + e2^2 as a symmetric product.
        let s = SymTensor::power(&[1.0, 1.0], 2, Variance::Vector);
        assert_eq!(s.coeff(&idx(&[2, 0])), Some(1.0));
        assert_eq!(s.coeff(&idx(&[1, 1])), Some(2.0));
        assert_eq!(s.coeff(&idx(&[0, 2])), Some(1.0));
    }

    #[test]
    fn pairing_examples() {
        let e = SymTensor::power(&[1.0, 0.0], 2, Variance::Vector);
        assert_eq!(e.pair(&e.dual()).unwrap(), 2.0);
        let u = SymTensor::power(&[1.0, 0.0, 0.0], 3, Variance::Vector);
        assert_eq!(u.pair(&u.dual()).unwrap(), 6.0);
        let a = SymTensor::power(&[1.0, 1.0], 2, Variance::Vector);
        let b = SymTensor::power(&[1.0, -1.0], 2, Variance::Covector);
        assert_eq!(a.pair(&b).unwrap(), 0.0);
    }

    #[test]
    fn pairing_rejects_same_variance() {
        let a = SymTensor::power(&[1.0, 1.0], 2, Variance::Vector);
        assert!(matches!(a.pair(&a), Err(Error::VarianceMismatch(_))));
        let c = SymTensor::power(&[1.0, 1.0], 3, Variance::Covector);
        assert!(matches!(a.pair(&c), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn action_examples() {
        let s = SymTensor::power(&[1.0, 0.0], 3, Variance::Vector);
        let id = DMatrix::identity(2, 2);
        assert_eq!(s.transform(&id).unwrap(), s);
        let doubled = s.transform(&(id * 2.0)).unwrap();
        assert_relative_eq!(doubled.coeffs(), &(s.coeffs() * 8.0), epsilon = 1e-14);
        let r = rotation(std::f64::consts::FRAC_PI_2);
        let rotated = SymTensor::power(&[1.0, 0.0], 2, Variance::Vector)
            .transform(&r)
            .unwrap();
        let expected = SymTensor::power(&[0.0, 1.0], 2, Variance::Vector);
        assert_relative_eq!(rotated.coeffs(), expected.coeffs(), epsilon = 1e-15);
    }

    #[test]
    fn singular_action_rejected() {
        let s = SymTensor::power(&[1.0, 2.0], 2, Variance::Vector);
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(s.transform(&t), Err(Error::Singular { .. })));
    }

    #[test]
    fn bracket_examples() {
        let x = [0.3, -1.2];
        let xi = [2.0, 0.7];
        let id = MixedTensor::identity(2);
        assert_relative_eq!(
            id.bracket(&x, &xi).unwrap(),
            0.3 * 2.0 - 1.2 * 0.7,
            epsilon = 1e-15
        );

        let scalar = MixedTensor::from_coeffs(
            2,
            0,
            0,
            Variance::Covector,
            DMatrix::from_element(1, 1, 2.5),
        )
        .unwrap();
        assert_eq!(scalar.bracket(&x, &xi).unwrap(), 2.5);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let phi = MixedTensor::from_endomorphism(&a);
            let expected =
                (DVector::from_row_slice(&xi).transpose() * &a * DVector::from_row_slice(&x))[0];
            assert_relative_eq!(phi.bracket(&x, &xi).unwrap(), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn bracket_of_power_product_matches_pairings() {
        let a = [0.4, -0.1, 0.8];
        let b = [1.1, 0.2, -0.5];
        let phi = MixedTensor::power_product(&a, 2, &b, 1, Variance::Covector);
        let x = [0.3, 0.9, -0.2];
        let xi = [-0.7, 0.1, 0.6];
        let expected = 2.0 * numeric_dot(&a, &x).powi(2) * numeric_dot(&b, &xi);
        assert_relative_eq!(phi.bracket(&x, &xi).unwrap(), expected, epsilon = 1e-14);
    }

    fn numeric_dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let flat: Vec<f64> = (0..(3 * 6)).map(|_| rng.random_range(-2.0..2.0)).collect();
        let m = MixedTensor::from_flat(3, 1, 2, Variance::Covector, &flat).unwrap();
        let s = SymTensor::power(&[0.5, -0.25, 1.0], 2, Variance::Vector);
        let text =
            write_tensor(&AnyTensor::Mixed(m.clone())) + &write_tensor(&AnyTensor::Sym(s.clone()));
        let parsed = parse_tensors(&text, "mem").unwrap();
        assert_eq!(parsed, vec![AnyTensor::Mixed(m), AnyTensor::Sym(s)]);
    }

    #[test]
    fn csv_diagnostics_name_the_line() {
        let err = parse_tensors("2,1,1,covector-vector\n1,0;1,0,0;1.0\n", "phi.csv").unwrap_err();
        match err {
            Error::Parse { line, path, .. } => {
                assert_eq!(line, 2);
                assert_eq!(path, "phi.csv");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_tensors("2,1,1,vector-vector\n", "x").is_err());
    }

    proptest! {
        #[test]
        fn pairing_is_invariant(seed in 0u64..500, n in 2usize..4, p in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_matrix(&mut rng, n);
            let d = sym_dim(n, p);
            let s = SymTensor::from_coeffs(n, p, Variance::Vector,
                DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0))).unwrap();
            let c = SymTensor::from_coeffs(n, p, Variance::Covector,
                DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0))).unwrap();
            let before = s.pair(&c).unwrap();
            let after = s.transform(&t).unwrap().pair(&c.transform(&t).unwrap()).unwrap();
            let scale = s.coeffs().norm() * c.coeffs().norm() * crate::numeric::factorial(p);
            prop_assert!((before - after).abs() <= 1e-10 * scale.max(1.0));
        }

        #[test]
        fn bracket_is_invariant(seed in 0u64..500, p in 0usize..3, q in 0usize..3) {
            let n = 3;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_matrix(&mut rng, n);
            let flat: Vec<f64> = (0..sym_dim(n, p) * sym_dim(n, q)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let phi = MixedTensor::from_flat(n, p, q, Variance::Covector, &flat).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let tx = (&t * DVector::from_row_slice(&x)).as_slice().to_vec();
            let t_inv_t = t.clone().try_inverse().unwrap().transpose();
            let txi = (&t_inv_t * DVector::from_row_slice(&xi)).as_slice().to_vec();
            let before = phi.bracket(&x, &xi).unwrap();
            let after = phi.transform(&t).unwrap().bracket(&tx, &txi).unwrap();
            prop_assert!((before - after).abs() <= 1e-10 * before.abs().max(1.0));
        }

        #[test]
        fn action_is_multiplicative(seed in 0u64..200, p in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 3);
            let b = random_matrix(&mut rng, 3);
            let s = SymTensor::power(&[0.2, -0.7, 1.1], p, Variance::Covector);
            let lhs = s.transform(&(&a * &b)).unwrap();
            let rhs = s.transform(&b).unwrap().transform(&a).unwrap();
            prop_assert!((lhs.coeffs() - rhs.coeffs()).norm() <= 1e-10 * lhs.coeffs().norm().max(1.0));
        }
    }
}
