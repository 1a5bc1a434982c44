//! Partitions, highest weights, Schur polynomials and the decomposition of
//! `Sym^p V ⊗ Sym^q V*` under `SL(V)`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::binomial;

/// A weakly decreasing sequence of non-negative integers; trailing zeros are
/// dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!(
                "{parts:?} is not weakly decreasing"
            )));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn row(k: usize) -> Self {
        if k == 0 {
            Partition::empty()
        } else {
            Partition(vec![k])
        }
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Number of non-zero parts.
    pub fn length(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// Part `i` (zero beyond the length).
    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn contains(&self, other: &Partition) -> bool {
        (0..other.length()).all(|i| self.part(i) >= other.part(i))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Integer weight `Σ p_i ε_i` of `GL(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Weight(Vec<i64>);

impl Weight {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Weight(coeffs)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn is_dominant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Differences `p_i − p_n`, `i < n`, which label the `SL(n)` weight.
    pub fn sl_form(&self) -> Vec<i64> {
        let last = self.0.last().copied().unwrap_or(0);
        self.0[..self.0.len().saturating_sub(1)]
            .iter()
            .map(|p| p - last)
            .collect()
    }

    pub fn from_partition(lambda: &Partition, n: usize) -> Result<Self> {
        if lambda.length() > n {
            return Err(Error::InvalidInput(format!(
                "{lambda} has more than {n} parts"
            )));
        }
        Ok(Weight((0..n).map(|i| lambda.part(i) as i64).collect()))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .sl_form()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| {
                if *c == 1 {
                    format!("e{}", i + 1)
                } else {
                    format!("{c}e{}", i + 1)
                }
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

/// Complete homogeneous symmetric polynomials `h_0, …, h_k` at `x`.
fn complete_homogeneous(x: &[f64], k: usize) -> Vec<f64> {
    // h_j(x_1..x_m) = h_j(x_1..x_{m-1}) + x_m h_{j-1}(x_1..x_m)
    let mut h = vec![0.0; k + 1];
    h[0] = 1.0;
    for &xi in x {
        for j in 1..=k {
            h[j] += xi * h[j - 1];
        }
    }
    h
}

/// `s_λ(x)` by the Jacobi–Trudi determinant `det(h_{λ_i − i + j})`.
pub fn schur_eval(lambda: &Partition, x: &[f64]) -> Result<f64> {
    if lambda.length() > x.len() {
        return Ok(0.0);
    }
    let l = lambda.length();
    if l == 0 {
        return Ok(1.0);
    }
    let top = lambda.part(0) + l;
    let h = complete_homogeneous(x, top);
    let m = DMatrix::from_fn(l, l, |i, j| {
        let idx = lambda.part(i) as i64 - i as i64 + j as i64;
        if idx < 0 {
            0.0
        } else {
            h[idx as usize]
        }
    });
    Ok(m.determinant())
}

/// All `μ ⊇ λ` with `μ/λ` a horizontal strip of `k` boxes and at most `n`
/// rows.
pub fn pieri(lambda: &Partition, k: usize, n: usize) -> Vec<Partition> {
    let rows = (lambda.length() + 1).min(n);
    if lambda.length() > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut mu = vec![0; rows];
    fn rec(
        lambda: &Partition,
        i: usize,
        left: usize,
        mu: &mut Vec<usize>,
        out: &mut Vec<Partition>,
    ) {
        if i == mu.len() {
            if left == 0 {
                out.push(Partition::new(mu.clone()).expect("strip keeps the order"));
            }
            return;
        }
        // Row i may grow up to the old length of row i-1.
        let cap = if i == 0 {
            left
        } else {
            (lambda.part(i - 1) - lambda.part(i)).min(left)
        };
        for add in (0..=cap).rev() {
            mu[i] = lambda.part(i) + add;
            rec(lambda, i + 1, left - add, mu, out);
        }
    }
    rec(lambda, 0, k, &mut mu, &mut out);
    out
}

/// Whether `mu/lambda` is a horizontal strip (no two boxes in one column).
pub fn is_horizontal_strip(mu: &Partition, lambda: &Partition) -> bool {
    mu.contains(lambda) && (1..mu.length()).all(|i| mu.part(i) <= lambda.part(i - 1))
}

/// Partitions of `total` containing `lambda` with at most `rows` parts.
fn partitions_containing(lambda: &Partition, total: usize, rows: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        lambda: &Partition,
        left: usize,
        max: usize,
        rows: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Partition>,
    ) {
        let i = cur.len();
        if left == 0 {
            if (i..lambda.length()).all(|j| lambda.part(j) == 0) {
                out.push(Partition(cur.clone()));
            }
            return;
        }
        if i == rows {
            return;
        }
        let lo = lambda.part(i).max(1);
        for part in (lo..=max.min(left)).rev() {
            cur.push(part);
            rec(lambda, left - part, part, rows, cur, out);
            cur.pop();
        }
    }
    if lambda.degree() <= total {
        rec(lambda, total, total, rows, &mut cur, &mut out);
    }
    out
}

const LR_CAP: usize = 12;

/// Number of Littlewood–Richardson tableaux of shape `nu/lambda` and
/// content `mu`.
fn lr_count(nu: &Partition, lambda: &Partition, mu: &Partition) -> u64 {
    // Cells in reverse reading order: rows top to bottom, right to left.
    let cells: Vec<(usize, usize)> = (0..nu.length())
        .flat_map(|r| (lambda.part(r)..nu.part(r)).rev().map(move |c| (r, c)))
        .collect();
    let mut filling: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut counts = vec![0usize; mu.length() + 1];
    fn rec(
        idx: usize,
        cells: &[(usize, usize)],
        lambda: &Partition,
        mu: &Partition,
        filling: &mut BTreeMap<(usize, usize), usize>,
        counts: &mut Vec<usize>,
    ) -> u64 {
        if idx == cells.len() {
            return 1;
        }
        let (r, c) = cells[idx];
        let mut total = 0;
        for v in 1..=mu.length() {
            if counts[v] >= mu.part(v - 1) {
                continue;
            }
            if v > 1 && counts[v] + 1 > counts[v - 1] {
                continue;
            }
            if let Some(&right) = filling.get(&(r, c + 1)) {
                if v > right {
                    continue;
                }
            }
            if r > 0 && c >= lambda.part(r - 1) {
                if let Some(&above) = filling.get(&(r - 1, c)) {
                    if v <= above {
                        continue;
                    }
                }
            }
            filling.insert((r, c), v);
            counts[v] += 1;
            total += rec(idx + 1, cells, lambda, mu, filling, counts);
            counts[v] -= 1;
            filling.remove(&(r, c));
        }
        total
    }
    rec(0, &cells, lambda, mu, &mut filling, &mut counts)
}

/// `s_λ s_μ = Σ_ν N^ν_{λμ} s_ν` restricted to `ν` with at most `n` rows.
pub fn lr_coefficients(
    lambda: &Partition,
    mu: &Partition,
    n: usize,
) -> Result<BTreeMap<Partition, u64>> {
    let total = lambda.degree() + mu.degree();
    if total > LR_CAP {
        return Err(Error::SizeCap(format!(
            "|λ| + |μ| = {total} exceeds {LR_CAP}"
        )));
    }
    let mut out = BTreeMap::new();
    for nu in partitions_containing(lambda, total, n) {
        let c = lr_count(&nu, lambda, mu);
        if c > 0 {
            out.insert(nu, c);
        }
    }
    Ok(out)
}

/// Dimension of the irreducible `GL(n)` module of highest weight `λ`:
/// `∏_{i<j} (λ_i − λ_j + j − i)/(j − i)`.
pub fn weyl_dim(lambda: &Weight) -> Result<u64> {
    if !lambda.is_dominant() {
        return Err(Error::InvalidInput(format!(
            "weight {:?} is not dominant",
            lambda.coeffs()
        )));
    }
    let l = lambda.coeffs();
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            num *= (l[i] - l[j] + (j - i) as i64) as u128;
            den *= (j - i) as u128;
        }
    }
    Ok((num / den) as u64)
}

/// One irreducible summand of `Sym^p V ⊗ Sym^q V*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    /// Index `i` in `(p+q−2i)ε₁ + (q−i)(ε₂ + … + ε_{n−1})`.
    pub index: usize,
    /// Highest weight of `Sym^p V ⊗ (Sym^q V)* ⊗ det^q` as a `GL(n)` weight.
    pub gl_weight: Weight,
    pub multiplicity: u64,
    pub dimension: u64,
}

impl Summand {
    pub fn sl_weight(&self) -> Vec<i64> {
        self.gl_weight.sl_form()
    }
}

/// Decomposes `Sym^p V ⊗ Sym^q V*` for `V = R^n`, `n ≥ 2`: tensor
/// `Sym^p V` (weight `p ε₁`) with `(Sym^q V)* ⊗ det^q` (weight
/// `q(ε₁ + … + ε_{n−1})`) by the Pieri rule.
pub fn decompose_sym_mixed(n: usize, p: usize, q: usize) -> Result<Vec<Summand>> {
    if n < 2 {
        return Err(Error::InvalidInput("decomposition needs n >= 2".into()));
    }
    let base = Partition::new(vec![q; n - 1])?;
    let mut out = Vec::new();
    let mut seen: BTreeMap<Partition, u64> = BTreeMap::new();
    for mu in pieri(&base, p, n) {
        *seen.entry(mu).or_default() += 1;
    }
    for (mu, mult) in seen {
        let w = Weight::from_partition(&mu, n)?;
        let index = mu.part(n - 1);
        out.push(Summand {
            index,
            dimension: weyl_dim(&w)?,
            gl_weight: w,
            multiplicity: mult,
        });
    }
    out.sort_by_key(|s| s.index);
    Ok(out)
}

/// `dim Sym^p V ⊗ Sym^q V*`.
pub fn mixed_dim(n: usize, p: usize, q: usize) -> u64 {
    (binomial(n + p - 1, p) * binomial(n + q - 1, q)) as u64
}
