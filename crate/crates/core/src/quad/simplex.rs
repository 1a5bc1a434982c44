//! Grundmann–Möller rules and globally adaptive simplex quadrature.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use rayon::prelude::*;
use std::sync::LazyLock;

use crate::bodies::hull::triangulate;
use crate::error::{Error, Result};
use crate::numeric::{dot, factorial, simplex_volume, CompensatedSum};

/// Vertex coordinates of a `k`-simplex in `R^n` (`k + 1` points).
pub type Simplex = Vec<Vec<f64>>;

/// Settings for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_subdivisions: 200_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Result of an integration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadReport {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
    /// False when the subdivision cap stopped refinement early.
    pub converged: bool,
}

impl QuadReport {
    pub fn exact(value: f64) -> Self {
        QuadReport {
            value,
            error_estimate: 0.0,
            subdivisions: 0,
            converged: true,
        }
    }

    /// Sum of independent reports.
    pub fn combine(reports: impl IntoIterator<Item = QuadReport>) -> QuadReport {
        let mut value = CompensatedSum::new();
        let mut out = QuadReport::exact(0.0);
        for r in reports {
            value.add(r.value);
            out.error_estimate += r.error_estimate;
            out.subdivisions += r.subdivisions;
            out.converged &= r.converged;
        }
        out.value = value.value();
        out
    }

    pub fn scaled(self, s: f64) -> QuadReport {
        QuadReport {
            value: self.value * s,
            error_estimate: self.error_estimate * s.abs(),
            ..self
        }
    }
}

/// Embedded pair of Grundmann–Möller rules of degrees `2s+1` and `2s-1` on
/// the `k`-simplex, sharing nodes. Weights are normalized to sum to one.
#[derive(Debug)]
pub struct GmRule {
    pub k: usize,
    pub s: usize,
    /// Barycentric coordinates (`k + 1` entries).
    pub nodes: Vec<Vec<f64>>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
}

fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(parts - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn gm_weights(k: usize, s: usize, level: usize) -> f64 {
    // Weight of the nodes with |β| = level in the degree 2s+1 rule.
    let i = s - level;
    let d = 2 * s + 1;
    let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    let denom = (d + k - 2 * i) as f64;
    sign * 2f64.powi(-2 * s as i32) * denom.powi(d as i32) / (factorial(i) * factorial(d + k - i))
        * factorial(k)
}

impl GmRule {
    fn build(k: usize, s: usize) -> Self {
        assert!(s >= 1);
        let mut nodes = Vec::new();
        let mut high = Vec::new();
        let mut low = Vec::new();
        for level in 0..=s {
            let denom = (2 * level + k + 1) as f64;
            let wh = gm_weights(k, s, level);
            let wl = if level < s {
                gm_weights(k, s - 1, level)
            } else {
                0.0
            };
            for beta in compositions(k + 1, level) {
                nodes.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
                high.push(wh);
                low.push(wl);
            }
        }
        GmRule {
            k,
            s,
            nodes,
            high,
            low,
        }
    }
}

static RULES: LazyLock<Mutex<HashMap<(usize, usize), Arc<GmRule>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

pub fn gm_rule(k: usize, s: usize) -> Arc<GmRule> {
    let mut cache = RULES.lock().expect("rule cache poisoned");
    cache
        .entry((k, s))
        .or_insert_with(|| Arc::new(GmRule::build(k, s)))
        .clone()
}

const ADAPTIVE_S: usize = 3;

fn simplex_measure(simplex: &[Vec<f64>]) -> f64 {
    let refs: Vec<&[f64]> = simplex.iter().map(Vec::as_slice).collect();
    simplex_volume(&refs)
}

/// Applies the embedded rules; returns the high-order value and the
/// difference to the low-order value as the error estimate.
fn apply_rule<F: Fn(&[f64]) -> f64>(rule: &GmRule, simplex: &[Vec<f64>], f: &F) -> (f64, f64) {
    if simplex.len() == 1 {
        return (f(&simplex[0]), 0.0);
    }
    let vol = simplex_measure(simplex);
    let n = simplex[0].len();
    let mut x = vec![0.0; n];
    let mut hi = CompensatedSum::new();
    let mut lo = CompensatedSum::new();
    for ((bary, wh), wl) in rule.nodes.iter().zip(&rule.high).zip(&rule.low) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (b, v) in bary.iter().zip(simplex) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += b * vi;
            }
        }
        let fx = f(&x);
        hi.add(wh * fx);
        lo.add(wl * fx);
    }
    let (h, l) = (hi.value() * vol, lo.value() * vol);
    let err = (h - l).abs().max(4.0 * f64::EPSILON * h.abs());
    (h, err)
}

/// Non-adaptive integration with the degree-`2s+1` Grundmann–Möller rule.
pub fn integrate_simplex_fixed<F: Fn(&[f64]) -> f64>(simplex: &[Vec<f64>], f: &F, s: usize) -> f64 {
    let k = simplex.len() - 1;
    apply_rule(&gm_rule(k, s.max(1)), simplex, f).0
}

struct Region {
    simplex: Simplex,
    value: f64,
    err: f64,
}

struct HeapItem {
    err: f64,
    idx: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

fn bisect(simplex: &[Vec<f64>]) -> (Simplex, Simplex) {
    let mut best = (f64::NEG_INFINITY, 0, 1);
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            let d: f64 = simplex[i]
                .iter()
                .zip(&simplex[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    let (_, i, j) = best;
    let mid: Vec<f64> = simplex[i]
        .iter()
        .zip(&simplex[j])
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut a = simplex.to_vec();
    let mut b = simplex.to_vec();
    a[j] = mid.clone();
    b[i] = mid;
    (a, b)
}

const BATCH: usize = 32;

/// A polynomial whose zero set carries the kinks of the integrand, e.g. `P`
/// for integrands of the form `|P(x)| w(x)` with `w` smooth.
#[derive(Clone, Copy)]
pub struct SignGuard<'a> {
    pub degree: usize,
    pub poly: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

struct BernsteinTable {
    points: Vec<Vec<f64>>,
    inverse: DMatrix<f64>,
}

static BERNSTEIN: LazyLock<Mutex<HashMap<(usize, usize), Arc<BernsteinTable>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn bernstein_table(k: usize, d: usize) -> Arc<BernsteinTable> {
    let mut cache = BERNSTEIN.lock().expect("bernstein cache poisoned");
    cache
        .entry((k, d))
        .or_insert_with(|| {
            let idx = compositions(k + 1, d);
            let points: Vec<Vec<f64>> = idx
                .iter()
                .map(|g| g.iter().map(|&c| c as f64 / d.max(1) as f64).collect())
                .collect();
            let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
                let beta = &idx[c];
                let coef = factorial(d) / beta.iter().map(|&b| factorial(b)).product::<f64>();
                coef * points[r]
                    .iter()
                    .zip(beta)
                    .map(|(l, &b)| l.powi(b as i32))
                    .product::<f64>()
            });
            let inverse = m
                .try_inverse()
                .expect("Bernstein collocation matrix is invertible");
            Arc::new(BernsteinTable { points, inverse })
        })
        .clone()
}

/// Whether the polynomial of degree at most `degree` may change sign on the
/// simplex, judged by the signs of its Bernstein–Bézier coefficients.
pub fn may_change_sign(guard: &SignGuard<'_>, simplex: &[Vec<f64>]) -> bool {
    let k = simplex.len() - 1;
    let table = bernstein_table(k, guard.degree);
    let n = simplex[0].len();
    let mut x = vec![0.0; n];
    let values: Vec<f64> = table
        .points
        .iter()
        .map(|bary| {
            x.iter_mut().for_each(|v| *v = 0.0);
            for (b, v) in bary.iter().zip(simplex) {
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += b * vi;
                }
            }
            (guard.poly)(&x)
        })
        .collect();
    let coeffs = &table.inverse * nalgebra::DVector::from_vec(values);
    let scale = coeffs.amax();
    if scale == 0.0 || !scale.is_finite() {
        return !scale.is_finite();
    }
    let eps = 1e-12 * scale;
    let pos = coeffs.iter().any(|c| *c > eps);
    let neg = coeffs.iter().any(|c| *c < -eps);
    pos && neg
}

/// Rule evaluation plus, where the guard reports a possible kink, the
/// discrepancy against the vertex rule. Interior nodes alone cannot see a
/// kink that only cuts off a corner of the simplex. Edges and triangles
/// whose kink is a single clean crossing are cut along it first.
fn evaluate<F: Fn(&[f64]) -> f64>(
    rule: &GmRule,
    simplex: &[Vec<f64>],
    f: &F,
    guard: Option<&SignGuard<'_>>,
) -> (f64, f64) {
    let Some(g) = guard else {
        return apply_rule(rule, simplex, f);
    };
    if let Some(cut) = evaluate_cut(rule, simplex, f, g) {
        return cut;
    }
    let (value, err) = apply_rule(rule, simplex, f);
    if may_change_sign(g, simplex) {
        let vol = simplex_measure(simplex);
        let vertex = simplex.iter().map(|v| f(v)).sum::<f64>() * vol / simplex.len() as f64;
        (value, err.max((value - vertex).abs()))
    } else {
        (value, err)
    }
}

/// Sign variations of the Bernstein coefficients of the guard on a segment;
/// an upper bound on its number of roots there.
fn edge_sign_variations(g: &SignGuard<'_>, a: &[f64], b: &[f64]) -> usize {
    let table = bernstein_table(1, g.degree);
    let values: Vec<f64> = table
        .points
        .iter()
        .map(|bary| {
            let x: Vec<f64> = a
                .iter()
                .zip(b)
                .map(|(p, q)| bary[0] * p + bary[1] * q)
                .collect();
            (g.poly)(&x)
        })
        .collect();
    let coeffs = &table.inverse * nalgebra::DVector::from_vec(values);
    let eps = 1e-12 * coeffs.amax();
    let signs: Vec<bool> = coeffs
        .iter()
        .filter(|c| c.abs() > eps)
        .map(|c| *c > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Root of the guard on the segment from `a` (value `fa`) to `b` (value
/// `fb`) of opposite signs, as the parameter `t ∈ (0, 1)`.
fn edge_root(g: &SignGuard<'_>, a: &[f64], b: &[f64], fa: f64, fb: f64) -> f64 {
    let at = |t: f64| -> f64 {
        let x: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
        (g.poly)(&x)
    };
    // Illinois variant of regula falsi.
    let (mut lo, mut hi, mut flo, mut fhi) = (0.0, 1.0, fa, fb);
    let mut last = 0;
    let mut best = (f64::INFINITY, 0.5);
    for _ in 0..100 {
        let t = (lo * fhi - hi * flo) / (fhi - flo);
        if !(t > lo && t < hi) || hi - lo < 4.0 * f64::EPSILON {
            break;
        }
        let ft = at(t);
        if ft == 0.0 {
            return t;
        }
        if ft.abs() < best.0 {
            best = (ft.abs(), t);
        }
        if (ft > 0.0) == (flo > 0.0) {
            lo = t;
            flo = ft;
            if last == -1 {
                fhi *= 0.5;
            }
            last = -1;
        } else {
            hi = t;
            fhi = ft;
            if last == 1 {
                flo *= 0.5;
            }
            last = 1;
        }
    }
    best.1
}

/// Integrates segments and triangles crossed once by the zero set of the
/// guard by cutting along it: exactly for segments, along the chord through
/// the two edge roots for triangles. The error estimate adds the mass of the
/// sliver between chord and curve, located from the chord midpoint.
fn evaluate_cut<F: Fn(&[f64]) -> f64>(
    rule: &GmRule,
    simplex: &[Vec<f64>],
    f: &F,
    g: &SignGuard<'_>,
) -> Option<(f64, f64)> {
    let k = simplex.len() - 1;
    if k > 2 || g.degree == 0 {
        return None;
    }
    let side: Vec<f64> = simplex.iter().map(|v| (g.poly)(v)).collect();
    if side.iter().any(|s| !s.is_finite())
        || !side.iter().any(|s| *s > 0.0)
        || !side.iter().any(|s| *s < 0.0)
    {
        return None;
    }
    let mut roots = BTreeMap::new();
    for i in 0..=k {
        for j in i + 1..=k {
            let crosses = side[i] * side[j] < 0.0;
            if g.degree > 1
                && edge_sign_variations(g, &simplex[i], &simplex[j]) != usize::from(crosses)
            {
                return None;
            }
            if crosses {
                roots.insert(
                    (i, j),
                    edge_root(g, &simplex[i], &simplex[j], side[i], side[j]),
                );
            }
        }
    }
    let (below, above) = split_at_crossings(simplex, &side, |i, j| roots[&(i, j)]).ok()?;
    let mut value = 0.0;
    let mut err = 0.0;
    for piece in below.iter().chain(&above) {
        let (v, e) = apply_rule(rule, piece, f);
        value += v;
        err += e;
    }
    if k == 2 && g.degree > 1 {
        let point = |(i, j): (usize, usize)| -> Vec<f64> {
            let t = roots[&(i, j)];
            simplex[i]
                .iter()
                .zip(&simplex[j])
                .map(|(p, q)| p + t * (q - p))
                .collect()
        };
        let ends: Vec<Vec<f64>> = roots
            .keys()
            .copied()
            .map(point)
            .chain(
                simplex
                    .iter()
                    .zip(&side)
                    .filter(|(_, s)| **s == 0.0)
                    .map(|(v, _)| v.clone()),
            )
            .collect();
        if ends.len() != 2 {
            return None;
        }
        let dir: Vec<f64> = ends[1].iter().zip(&ends[0]).map(|(p, q)| p - q).collect();
        let len = dot(&dir, &dir).sqrt();
        if len == 0.0 {
            return Some((value, err));
        }
        let mid: Vec<f64> = ends[0]
            .iter()
            .zip(&ends[1])
            .map(|(p, q)| 0.5 * (p + q))
            .collect();
        // In-plane normal to the chord, from the vertex farthest from it.
        let mut normal = Vec::new();
        let mut best = 0.0;
        for v in simplex {
            let w: Vec<f64> = v.iter().zip(&mid).map(|(p, q)| p - q).collect();
            let along = dot(&w, &dir) / (len * len);
            let perp: Vec<f64> = w.iter().zip(&dir).map(|(p, d)| p - along * d).collect();
            let d = dot(&perp, &perp).sqrt();
            if d > best {
                best = d;
                normal = perp.iter().map(|p| p / d).collect();
            }
        }
        let r_mid = (g.poly)(&mid);
        let step = 1e-3 * len;
        let probe: Vec<f64> = mid.iter().zip(&normal).map(|(p, q)| p + step * q).collect();
        let slope = ((g.poly)(&probe) - r_mid) / step;
        let offset = if slope != 0.0 {
            (r_mid / slope).abs()
        } else {
            len
        };
        err += len * offset.min(len) * f(&mid).abs();
    }
    Some((value, err))
}

/// Globally adaptive integration over a union of simplices of equal
/// dimension. The region with the largest error estimate is bisected along
/// its longest edge until the total estimate falls below
/// `max(rel_tol·|value|, abs_tol)` or the subdivision cap is reached.
pub fn integrate_simplices<F>(simplices: Vec<Simplex>, f: &F, opts: &QuadOptions) -> QuadReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_simplices_guarded(simplices, f, None, opts)
}

/// As [`integrate_simplices`], with the kinks of `f` located on the zero set
/// of `guard`.
pub fn integrate_simplices_guarded<F>(
    simplices: Vec<Simplex>,
    f: &F,
    guard: Option<&SignGuard<'_>>,
    opts: &QuadOptions,
) -> QuadReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if simplices.is_empty() {
        return QuadReport::exact(0.0);
    }
    let k = simplices[0].len() - 1;
    if k == 0 {
        return QuadReport::exact(simplices.iter().map(|s| f(&s[0])).sum());
    }
    let rule = gm_rule(k, ADAPTIVE_S);
    let mut regions: Vec<Option<Region>> = simplices
        .into_par_iter()
        .map(|s| {
            let (value, err) = evaluate(&rule, &s, f, guard);
            Some(Region {
                simplex: s,
                value,
                err,
            })
        })
        .collect();
    let mut heap: BinaryHeap<HeapItem> = regions
        .iter()
        .enumerate()
        .map(|(idx, r)| HeapItem {
            err: r.as_ref().expect("fresh").err,
            idx,
        })
        .collect();
    let mut total = regions
        .iter()
        .flatten()
        .map(|r| r.value)
        .collect::<CompensatedSum>();
    let mut total_err = regions
        .iter()
        .flatten()
        .map(|r| r.err)
        .collect::<CompensatedSum>();
    let mut subdivisions = 0;
    let tol = |v: f64| (opts.rel_tol * v.abs()).max(opts.abs_tol);

    while total_err.value() > tol(total.value()) && subdivisions < opts.max_subdivisions {
        let mut batch = Vec::with_capacity(BATCH);
        while batch.len() < BATCH {
            match heap.pop() {
                Some(item) => batch.push(regions[item.idx].take().expect("live region")),
                None => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        subdivisions += batch.len();
        let children: Vec<(Region, Region)> = batch
            .par_iter()
            .map(|r| {
                let (a, b) = bisect(&r.simplex);
                let (va, ea) = evaluate(&rule, &a, f, guard);
                let (vb, eb) = evaluate(&rule, &b, f, guard);
                (
                    Region {
                        simplex: a,
                        value: va,
                        err: ea,
                    },
                    Region {
                        simplex: b,
                        value: vb,
                        err: eb,
                    },
                )
            })
            .collect();
        for (parent, (a, b)) in batch.iter().zip(children) {
            total.add(-parent.value);
            total_err.add(-parent.err);
            for child in [a, b] {
                total.add(child.value);
                total_err.add(child.err);
                heap.push(HeapItem {
                    err: child.err,
                    idx: regions.len(),
                });
                regions.push(Some(child));
            }
        }
    }
    let value = regions
        .iter()
        .flatten()
        .map(|r| r.value)
        .collect::<CompensatedSum>()
        .value();
    let err = regions
        .iter()
        .flatten()
        .map(|r| r.err)
        .collect::<CompensatedSum>()
        .value();
    QuadReport {
        value,
        error_estimate: err,
        subdivisions,
        converged: err <= tol(value),
    }
}

/// Splits a simplex by the hyperplane `⟨a, x⟩ = b` into triangulations of
/// the parts `⟨a, x⟩ ≤ b` and `⟨a, x⟩ ≥ b`.
pub fn split_simplex(
    simplex: &[Vec<f64>],
    a: &[f64],
    b: f64,
) -> Result<(Vec<Simplex>, Vec<Simplex>)> {
    let side: Vec<f64> = simplex.iter().map(|v| dot(a, v) - b).collect();
    split_at_crossings(simplex, &side, |i, j| side[i] / (side[i] - side[j]))
}

/// Splits a simplex by the sign of `side` at its vertices. The dividing
/// surface meets the edge `v_i v_j` at `(1 − t) v_i + t v_j` with
/// `t = crossing(i, j)`; for `k ≥ 3` these points must be coplanar.
fn split_at_crossings<C>(
    simplex: &[Vec<f64>],
    side: &[f64],
    crossing: C,
) -> Result<(Vec<Simplex>, Vec<Simplex>)>
where
    C: Fn(usize, usize) -> f64,
{
    let k = simplex.len() - 1;
    let scale = side.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    let eps = 1e-13 * scale;
    if side.iter().all(|s| *s <= eps) {
        return Ok((vec![simplex.to_vec()], Vec::new()));
    }
    if side.iter().all(|s| *s >= -eps) {
        return Ok((Vec::new(), vec![simplex.to_vec()]));
    }
    // Work in affine coordinates of the simplex: v_0 ↦ 0, v_i ↦ e_i.
    let local = |bary: &[f64]| -> Vec<f64> { bary[1..].to_vec() };
    let unit = |i: usize| -> Vec<f64> {
        let mut e = vec![0.0; k + 1];
        e[i] = 1.0;
        e
    };
    let mut below = Vec::new();
    let mut above = Vec::new();
    for i in 0..=k {
        if side[i] <= eps {
            below.push(local(&unit(i)));
        }
        if side[i] >= -eps {
            above.push(local(&unit(i)));
        }
    }
    for i in 0..=k {
        for j in i + 1..=k {
            if (side[i] < -eps && side[j] > eps) || (side[i] > eps && side[j] < -eps) {
                let t = crossing(i, j);
                let mut bary = vec![0.0; k + 1];
                bary[i] = 1.0 - t;
                bary[j] = t;
                below.push(local(&bary));
                above.push(local(&bary));
            }
        }
    }
    let to_global = |c: &[f64]| -> Vec<f64> {
        let mut x = simplex[0].clone();
        for (ci, v) in c.iter().zip(&simplex[1..]) {
            for ((xi, vi), v0) in x.iter_mut().zip(v).zip(&simplex[0]) {
                *xi += ci * (vi - v0);
            }
        }
        x
    };
    let piece = |pts: Vec<Vec<f64>>| -> Result<Vec<Simplex>> {
        match triangulate(&pts) {
            Ok(parts) => Ok(parts
                .into_iter()
                .map(|s| s.iter().map(|c| to_global(c)).collect())
                .collect()),
            // A sliver below the hull resolution carries no mass.
            Err(Error::Degenerate(_)) => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    };
    Ok((piece(below)?, piece(above)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_one() {
        for k in 1..=5 {
            for s in 1..=4 {
                let r = gm_rule(k, s);
                assert_relative_eq!(r.high.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                assert_relative_eq!(r.low.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn exact_for_monomials_up_to_degree() {
        // ∫_{standard 2-simplex} x^a y^b = a! b! / (a+b+2)!
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        for a in 0..=4 {
            for b in 0..=(7 - a).min(4) {
                let v = integrate_simplex_fixed(&tri, &|x: &[f64]| x[0].powi(a) * x[1].powi(b), 3);
                let exact = factorial(a as usize) * factorial(b as usize)
                    / factorial(a as usize + b as usize + 2);
                assert_relative_eq!(v, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn adaptive_handles_kink() {
        // |x - 1/3| over [0, 1] = 5/18
        let seg = vec![vec![vec![0.0], vec![1.0]]];
        let r = integrate_simplices(
            seg,
            &|x: &[f64]| (x[0] - 1.0 / 3.0).abs(),
            &QuadOptions::default(),
        );
        assert!(r.converged);
        assert_relative_eq!(r.value, 5.0 / 18.0, max_relative = 1e-9);
    }

    #[test]
    fn square_facet_abs_integral() {
        // |x_2| over the facet {1} × [-1,1]^2 equals 2.
        let pts = [
            vec![1.0, -1.0, -1.0],
            vec![1.0, 1.0, -1.0],
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, 1.0],
        ];
        let tris = vec![
            vec![pts[0].clone(), pts[1].clone(), pts[2].clone()],
            vec![pts[0].clone(), pts[2].clone(), pts[3].clone()],
        ];
        let r = integrate_simplices(tris, &|x: &[f64]| x[1].abs(), &QuadOptions::default());
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn split_preserves_volume_and_sides() {
        let tri = vec![
            vec![0.0, 0.0, 1.0],
            vec![2.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ];
        let a = [1.0, -1.0, 0.2];
        let (lo, hi) = split_simplex(&tri, &a, 0.5).unwrap();
        let vol = |ps: &Vec<Simplex>| ps.iter().map(|s| simplex_measure(s)).sum::<f64>();
        assert_relative_eq!(vol(&lo) + vol(&hi), 1.0, epsilon = 1e-13);
        for s in &lo {
            for v in s {
                assert!(dot(&a, v) <= 0.5 + 1e-12);
            }
        }
        for s in &hi {
            for v in s {
                assert!(dot(&a, v) >= 0.5 - 1e-12);
            }
        }
    }

    #[test]
    fn split_then_exact_rule_integrates_abs_linear() {
        // ∫_{[0,1]} |x - 0.3| via split = 0.29
        let seg = vec![vec![0.0], vec![1.0]];
        let (lo, hi) = split_simplex(&seg, &[1.0], 0.3).unwrap();
        let total: f64 = lo
            .iter()
            .chain(&hi)
            .map(|s| integrate_simplex_fixed(s, &|x: &[f64]| (x[0] - 0.3).abs(), 1))
            .sum();
        assert_relative_eq!(total, 0.29, epsilon = 1e-15);
    }

    #[test]
    fn guard_catches_corner_kinks() {
        // ∫ |x - 0.3| over the unit triangle = 0.0976666…
        let tri = vec![vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]];
        let poly = |x: &[f64]| x[0] - 0.3;
        let guard = SignGuard {
            degree: 1,
            poly: &poly,
        };
        let r = integrate_simplices_guarded(
            tri,
            &|x: &[f64]| poly(x).abs(),
            Some(&guard),
            &QuadOptions::default(),
        );
        assert_relative_eq!(r.value, 0.0405 + 0.343 / 6.0, max_relative = 1e-9);
    }

    #[test]
    fn sign_test_on_bernstein_coefficients() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let q = |x: &[f64]| (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) - 0.01;
        assert!(may_change_sign(
            &SignGuard {
                degree: 2,
                poly: &q
            },
            &tri
        ));
        let p = |x: &[f64]| x[0] * x[0] + x[1] + 0.1;
        assert!(!may_change_sign(
            &SignGuard {
                degree: 2,
                poly: &p
            },
            &tri
        ));
    }

    #[test]
    fn curved_kink_is_cut_along_its_chords() {
        // ∫_{[-1,1]^2} |x² + y² − 1/4| = 5/3 + π/16
        let square = vec![
            vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![1.0, 1.0]],
            vec![vec![-1.0, -1.0], vec![1.0, 1.0], vec![-1.0, 1.0]],
        ];
        let q = |x: &[f64]| x[0] * x[0] + x[1] * x[1] - 0.25;
        let guard = SignGuard {
            degree: 2,
            poly: &q,
        };
        let opts = QuadOptions::with_rel_tol(1e-10);
        let r = integrate_simplices_guarded(square, &|x: &[f64]| q(x).abs(), Some(&guard), &opts);
        assert!(r.converged);
        assert!(r.subdivisions < 20_000, "{}", r.subdivisions);
        assert_relative_eq!(
            r.value,
            5.0 / 3.0 + std::f64::consts::PI / 16.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn edge_roots_are_exact_for_linear_guards() {
        let p = |x: &[f64]| 3.0 * x[0] - 1.0;
        let g = SignGuard {
            degree: 1,
            poly: &p,
        };
        let t = edge_root(&g, &[0.0], &[1.0], -1.0, 2.0);
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
    }
}
