//! Small numeric helpers shared by the geometry and quadrature code.

use nalgebra::{DMatrix, DVector};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `Γ(t + 1)`, agreeing with `factorial` at integers.
pub fn gamma_factorial(t: f64) -> f64 {
    if t >= 0.0 && t.fract() == 0.0 && t <= 170.0 {
        factorial(t as usize)
    } else {
        statrs::function::gamma::gamma(t + 1.0)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Surface area of the unit sphere `S^{n-1}`, i.e. `2π^{n/2}/Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        sphere_area(n) / n as f64
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sum of the principal `(n-1)`-minors of a square matrix.
pub fn principal_minor_sum(h: &DMatrix<f64>) -> f64 {
    let n = h.nrows();
    if n == 1 {
        return 1.0;
    }
    (0..n)
        .map(|i| h.clone().remove_row(i).remove_column(i).determinant())
        .sum()
}

/// Unit normal to the hyperplane through `points` (n points in `R^n`), via
/// signed cofactors of the edge matrix. Returns the raw (unnormalized)
/// cofactor vector.
pub fn cofactor_normal(points: &[&[f64]]) -> DVector<f64> {
    let n = points[0].len();
    debug_assert_eq!(points.len(), n);
    let base = points[0];
    let edges = DMatrix::from_fn(n - 1, n, |r, c| points[r + 1][c] - base[c]);
    let mut normal = DVector::zeros(n);
    for i in 0..n {
        let minor = edges.clone().remove_column(i);
        let det = if n == 1 { 1.0 } else { minor.determinant() };
        normal[i] = if i % 2 == 0 { det } else { -det };
    }
    normal
}

/// `(n-1)`-dimensional volume of the simplex spanned by `n` points in `R^n`
/// (or generally `k+1` points in `R^m`).
pub fn simplex_volume(points: &[&[f64]]) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let m = points[0].len();
    let base = points[0];
    let edges = DMatrix::from_fn(m, k, |r, c| points[c + 1][r] - base[r]);
    let gram = edges.transpose() * &edges;
    gram.determinant().max(0.0).sqrt() / factorial(k)
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn relative_error(value: f64, expected: f64) -> f64 {
    let scale = expected.abs().max(value.abs());
    if scale == 0.0 {
        0.0
    } else {
        (value - expected).abs() / scale
    }
}

/// Deterministic direction set `±e_i` together with all `(±1,…,±1)/√n`.
pub fn probe_directions(n: usize) -> Vec<DVector<f64>> {
    let mut dirs = Vec::with_capacity(2 * n + (1 << n));
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(n);
            e[i] = s;
            dirs.push(e);
        }
    }
    let inv = 1.0 / (n as f64).sqrt();
    for mask in 0..(1usize << n) {
        dirs.push(DVector::from_fn(n, |i, _| {
            if mask >> i & 1 == 1 {
                -inv
            } else {
                inv
            }
        }));
    }
    dirs
}
