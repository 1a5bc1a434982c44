//! End-to-end acceptance run: one line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use affval::bodies::random::{random_ellipsoid, random_polytope, random_sl_matrix};
use affval::bodies::{ConvexBody, Ellipsoid, Polytope, SmoothBody};
use affval::classical::projection_body;
use affval::quad::{alpha_k, boundary_integrate_smooth, SphereIntegration};
use affval::rep_theory::{decompose_sym_mixed, lr_coefficients, schur_eval, Partition};
use affval::semicont::{
    ellipsoid_gauss_curvature, phi_f_p, phi_f_p_boundary, psi_f_p, psi_f_p_boundary, tilde_alpha,
    tilde_kappa, ConcFunction,
};
use affval::symtensor::{sym_dim, MixedTensor, SymTensor, Variance};
use affval::tensor_val::{isotypic, phi_pq, psi_pq, EvalOptions};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Res<T> = Result<T, Box<dyn std::error::Error>>;
type Scalar<'a> = Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>;

const DIMS: [usize; 2] = [2, 3];
const PQ: [(usize, usize); 4] = [(1, 0), (0, 1), (1, 1), (2, 1)];

struct Part {
    label: &'static str,
    instances: usize,
    max_err: f64,
    tol: f64,
}

impl Part {
    fn new(label: &'static str, tol: f64) -> Self {
        Part {
            label,
            instances: 0,
            max_err: 0.0,
            tol,
        }
    }

    fn push(&mut self, err: f64) {
        self.instances += 1;
        self.max_err = if err.is_nan() {
            f64::INFINITY
        } else {
            self.max_err.max(err)
        };
    }

    fn count(&mut self, bad: bool) {
        self.instances += 1;
        if bad {
            self.max_err += 1.0;
        }
    }

    fn pass(&self) -> bool {
        self.instances > 0 && self.max_err <= self.tol
    }
}

fn rel(value: f64, expected: f64) -> f64 {
    let scale = expected.abs();
    if scale == 0.0 {
        value.abs()
    } else {
        (value - expected).abs() / scale
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v = random_vec(rng, n);
    let len = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / len).collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

fn random_mixed(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    q: usize,
    first: Variance,
) -> Res<MixedTensor> {
    let flat: Vec<f64> = (0..sym_dim(n, p) * sym_dim(n, q))
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    Ok(MixedTensor::from_flat(n, p, q, first, &flat)?)
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize, p: usize, v: Variance) -> Res<SymTensor> {
    let c = DVector::from_fn(sym_dim(n, p), |_, _| rng.random_range(-1.0..1.0));
    Ok(SymTensor::from_coeffs(n, p, v, c)?)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn sphere_area(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    }
}

fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// `Γ(m/2)`.
fn gamma_half(m: usize) -> f64 {
    match m {
        1 => PI.sqrt(),
        2 => 1.0,
        _ => (m as f64 / 2.0 - 1.0) * gamma_half(m - 2),
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

// Brute-force convex hull in dimensions 2 and 3.

struct HullFacet {
    normal: Vec<f64>,
    offset: f64,
    area: f64,
    /// Boundary of the facet in cyclic order.
    polygon: Vec<Vec<f64>>,
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn planar_hull(pts: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
    });
    let turn = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<usize> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let order: Vec<usize> = if pass == 0 {
            idx.clone()
        } else {
            idx.iter().rev().copied().collect()
        };
        for i in order {
            while hull.len() >= start + 2
                && turn(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

fn hull_facets(points: &[Vec<f64>]) -> Vec<HullFacet> {
    let n = points[0].len();
    let scale = points.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let mut out: Vec<HullFacet> = Vec::new();
    let m = points.len();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if n == 2 {
                let d = sub(&points[j], &points[i]);
                candidates.push(vec![d[1], -d[0]]);
                continue;
            }
            for k in j + 1..m {
                candidates.push(cross(
                    &sub(&points[j], &points[i]),
                    &sub(&points[k], &points[i]),
                ));
            }
        }
    }
    for c in candidates {
        let len = dot(&c, &c).sqrt();
        if len < 1e-12 * scale * scale {
            continue;
        }
        for sign in [1.0, -1.0] {
            let u: Vec<f64> = c.iter().map(|x| sign * x / len).collect();
            let s: Vec<f64> = points.iter().map(|p| dot(&u, p)).collect();
            let offset = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let on_plane = |value: f64| (value - offset).abs() <= tol;
            if s.iter().filter(|v| on_plane(**v)).count() < n
                || out.iter().any(|f| dot(&f.normal, &u) > 1.0 - 1e-12)
            {
                continue;
            }
            let face: Vec<&Vec<f64>> = points.iter().filter(|p| on_plane(dot(&u, p))).collect();
            let (area, polygon) = if n == 2 {
                let t = [-u[1], u[0]];
                let lo = face
                    .iter()
                    .min_by(|a, b| dot(&t, a).total_cmp(&dot(&t, b)))
                    .unwrap();
                let hi = face
                    .iter()
                    .max_by(|a, b| dot(&t, a).total_cmp(&dot(&t, b)))
                    .unwrap();
                (
                    dot(&t, hi) - dot(&t, lo),
                    vec![(*lo).clone(), (*hi).clone()],
                )
            } else {
                let e1 = {
                    let d = sub(face[1], face[0]);
                    let l = dot(&d, &d).sqrt();
                    d.iter().map(|x| x / l).collect::<Vec<_>>()
                };
                let e2 = cross(&u, &e1);
                let flat: Vec<[f64; 2]> = face.iter().map(|p| [dot(&e1, p), dot(&e2, p)]).collect();
                let ring = planar_hull(&flat);
                let mut area = 0.0;
                for a in 0..ring.len() {
                    let (p, q) = (flat[ring[a]], flat[ring[(a + 1) % ring.len()]]);
                    area += p[0] * q[1] - p[1] * q[0];
                }
                (
                    0.5 * area.abs(),
                    ring.iter().map(|&r| face[r].clone()).collect(),
                )
            };
            out.push(HullFacet {
                normal: u,
                offset,
                area,
                polygon,
            });
        }
    }
    out
}

fn hull_volume(points: &[Vec<f64>]) -> f64 {
    let n = points[0].len() as f64;
    hull_facets(points)
        .iter()
        .map(|f| f.offset * f.area)
        .sum::<f64>()
        / n
}

/// Simplices coning the boundary to the origin.
fn cone_simplices(facets: &[HullFacet]) -> Vec<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for f in facets {
        let n = f.normal.len();
        let origin = vec![0.0; n];
        if n == 2 {
            out.push(vec![origin, f.polygon[0].clone(), f.polygon[1].clone()]);
        } else {
            for i in 1..f.polygon.len() - 1 {
                out.push(vec![
                    origin.clone(),
                    f.polygon[0].clone(),
                    f.polygon[i].clone(),
                    f.polygon[i + 1].clone(),
                ]);
            }
        }
    }
    out
}

fn simplex_volume(s: &[Vec<f64>]) -> f64 {
    let n = s.len() - 1;
    let m = DMatrix::from_fn(n, n, |i, j| s[i + 1][j] - s[0][j]);
    m.determinant().abs() / factorial(n)
}

/// `∫_S (l)_+^p` for the affine function with values `l` at the vertices,
/// by divided differences of `t ↦ t_+^{n+p}`.
fn positive_part_moment(vol: f64, l: &[f64], p: usize) -> f64 {
    let n = l.len() - 1;
    let mut s = 0.0;
    for i in 0..l.len() {
        if l[i] <= 0.0 {
            continue;
        }
        let denom: f64 = (0..l.len())
            .filter(|&j| j != i)
            .map(|j| l[i] - l[j])
            .product();
        s += l[i].powi((n + p) as i32) / denom;
    }
    vol * factorial(n) * factorial(p) / factorial(n + p) * s
}

/// `∫_P |⟨v, x⟩|^p dx`, `p ∈ {1, 2}`.
fn polytope_moment(points: &[Vec<f64>], v: &[f64], p: usize) -> f64 {
    let n = v.len() as f64;
    cone_simplices(&hull_facets(points))
        .iter()
        .map(|s| {
            let vol = simplex_volume(s);
            let l: Vec<f64> = s.iter().map(|x| dot(v, x)).collect();
            if p == 2 {
                let sum: f64 = l.iter().sum();
                vol * (l.iter().map(|x| x * x).sum::<f64>() + sum * sum) / ((n + 1.0) * (n + 2.0))
            } else {
                let neg: Vec<f64> = l.iter().map(|x| -x).collect();
                positive_part_moment(vol, &l, p) + positive_part_moment(vol, &neg, p)
            }
        })
        .sum()
}

/// `∫_E |⟨v, x⟩|^p dx` for `E = {xᵀQx ≤ 1}`.
fn ellipsoid_moment(e: &Ellipsoid, v: &[f64], p: usize) -> f64 {
    let n = e.dim();
    let qinv = e.matrix().clone().try_inverse().unwrap();
    let w = DVector::from_row_slice(v);
    let len = w.dot(&(&qinv * &w)).sqrt();
    let sphere = 2.0 * PI.powf((n as f64 - 1.0) / 2.0) * gamma_half(p + 1) / gamma_half(n + p);
    e.matrix().determinant().sqrt().recip() * len.powi(p as i32) * sphere / (n + p) as f64
}

fn lp_projection_oracle(points: &[Vec<f64>], v: &[f64], q: usize) -> f64 {
    factorial(q)
        * hull_facets(points)
            .iter()
            .map(|f| dot(&f.normal, v).abs().powi(q as i32) * f.offset.powi(1 - q as i32) * f.area)
            .sum::<f64>()
}

fn random_body(rng: &mut ChaCha8Rng, n: usize, ellipsoid: bool) -> Res<ConvexBody> {
    Ok(if ellipsoid {
        random_ellipsoid(rng, n)?.into()
    } else {
        random_polytope(rng, n, 3 * n + 2, true)?.into()
    })
}

fn opts() -> EvalOptions {
    EvalOptions::default()
}

fn c1(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut part = Part::new("n vol(K)", 1e-9);
    for i in 0..20 {
        let n = DIMS[i % 2];
        let poly = random_polytope(rng, n, n + 4 + i % 5, true)?;
        let expected = n as f64 * hull_volume(poly.vertices());
        let v = phi_pq(&poly.into(), &MixedTensor::identity(n), &opts())?.value;
        part.push(rel(v, expected));
    }
    Ok(vec![part])
}

fn c2(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut part = Part::new("skew on ball", 1e-6);
    for n in DIMS {
        let ball: ConvexBody = Ellipsoid::ball(n, 1.0).into();
        for _ in 0..10 {
            let m = random_matrix(rng, n);
            let a = &m - m.transpose();
            let v = phi_pq(&ball, &MixedTensor::from_endomorphism(&a), &opts())?.value;
            part.push(v.abs() / (a.norm() * sphere_area(n)));
        }
    }
    Ok(vec![part])
}

fn c3(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut part = Part::new("positive on simplex", 0.0);
    let simplices = [
        vec![vec![-1.0, -1.0], vec![2.0, -0.5], vec![-0.5, 1.5]],
        vec![
            vec![-1.0, -1.0, -1.0],
            vec![2.0, -0.5, -0.5],
            vec![-0.5, 1.5, -0.3],
            vec![-0.2, -0.4, 1.8],
        ],
    ];
    for verts in simplices {
        let n = verts.len() - 1;
        let s: ConvexBody = Polytope::from_vertices(verts)?.into();
        for _ in 0..20 {
            let a = random_matrix(rng, n);
            let v = phi_pq(&s, &MixedTensor::from_endomorphism(&a), &opts())?.value;
            part.count(!(v > 0.0));
        }
    }
    Ok(vec![part])
}

fn c4(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut parts = vec![Part::new("polytopes", 1e-6), Part::new("ellipsoids", 1e-4)];
    for (j, part) in parts.iter_mut().enumerate() {
        for n in DIMS {
            for (p, q) in PQ {
                let k = random_body(rng, n, j == 1)?;
                let phi = random_mixed(rng, n, p, q, Variance::Covector)?;
                let base = phi_pq(&k, &phi, &opts())?.value;
                for _ in 0..5 {
                    let t = random_sl_matrix(rng, n, 20.0)?;
                    let v = phi_pq(&k.linear_image(&t)?, &phi.transform(&t)?, &opts())?.value;
                    part.push(rel(v, base));
                }
            }
        }
    }
    Ok(parts)
}

fn c5(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut parts = vec![
        Part::new("projection body", 1e-6),
        Part::new("Phi^{p,q}", 1e-6),
    ];
    for i in 0..10 {
        let n = DIMS[i % 2];
        let poly = random_polytope(rng, n, 4 * n, true)?;
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        let hi = poly.support(&e);
        e[0] = -1.0;
        let width = hi.min(poly.support(&e));
        let split = poly.split_by_slab(rng.random_range(0.2..0.8) * width)?;
        let pieces = [&split.k, &split.l, &split.union, &split.intersection];
        let pi = pieces.map(projection_body);
        for _ in 0..5 {
            let x = random_vec(rng, n);
            parts[0].push(rel(
                pi[0].support(&x) + pi[1].support(&x),
                pi[2].support(&x) + pi[3].support(&x),
            ));
        }
        let (p, q) = PQ[i % PQ.len()];
        let phi = random_mixed(rng, n, p, q, Variance::Covector)?;
        let mut vals = [0.0; 4];
        for (v, b) in vals.iter_mut().zip(pieces) {
            *v = phi_pq(&b.clone().into(), &phi, &opts())?.value;
        }
        parts[1].push(rel(vals[0] + vals[1], vals[2] + vals[3]));
    }
    Ok(parts)
}

fn c6(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut parts = vec![Part::new("Phi", 1e-8), Part::new("Psi", 1e-4)];
    for (j, part) in parts.iter_mut().enumerate() {
        let psi = j == 1;
        for n in DIMS {
            for (p, q) in PQ {
                for ellipsoid in [false, true] {
                    let k = random_body(rng, n, ellipsoid)?;
                    let first = if psi {
                        Variance::Vector
                    } else {
                        Variance::Covector
                    };
                    let tensor = random_mixed(rng, n, p, q, first)?;
                    let eval = |b: &ConvexBody| -> Res<f64> {
                        Ok(if psi {
                            psi_pq(b, &tensor, &opts())?
                        } else {
                            phi_pq(b, &tensor, &opts())?
                        }
                        .value)
                    };
                    let degree = if psi {
                        q as i32 - p as i32 - n as i32
                    } else {
                        (n + p) as i32 - q as i32
                    };
                    let base = eval(&k)?;
                    for t in [0.5f64, 2.0] {
                        part.push(rel(eval(&k.scale_by(t)?)?, t.powi(degree) * base));
                    }
                }
            }
        }
    }
    Ok(parts)
}

fn c7(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut part = Part::new("Phi(K*) = Psi(K)", 1e-4);
    for n in DIMS {
        for _ in 0..5 {
            let e: ConvexBody = random_ellipsoid(rng, n)?.into();
            let polar = e.polar()?;
            for p in 0..=2 {
                for q in 0..=2 {
                    let psi = random_mixed(rng, n, p, q, Variance::Vector)?;
                    let lhs = phi_pq(&polar, &psi.dual(), &opts())?.value;
                    part.push(rel(lhs, psi_pq(&e, &psi, &opts())?.value));
                }
            }
        }
    }
    Ok(vec![part])
}

fn c8(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut parts = vec![Part::new("Gamma_p", 1e-6), Part::new("Pi_q", 1e-6)];
    for n in DIMS {
        let poly = random_polytope(rng, n, 3 * n + 2, true)?;
        let e = random_ellipsoid(rng, n)?;
        let pk: ConvexBody = poly.clone().into();
        let ek: ConvexBody = e.clone().into();
        for _ in 0..10 {
            let v = random_unit(rng, n);
            for p in 1..=2 {
                let phi = MixedTensor::power_product(&v, p, &v, 0, Variance::Covector);
                let norm = factorial(p) * (n + p) as f64;
                let want = norm * polytope_moment(poly.vertices(), &v, p);
                parts[0].push(rel(phi_pq(&pk, &phi, &opts())?.value, want));
                let want = norm * ellipsoid_moment(&e, &v, p);
                parts[0].push(rel(phi_pq(&ek, &phi, &opts())?.value, want));
            }
            for q in 1..=2 {
                let phi = MixedTensor::power_product(&v, 0, &v, q, Variance::Covector);
                let want = lp_projection_oracle(poly.vertices(), &v, q);
                parts[1].push(rel(phi_pq(&pk, &phi, &opts())?.value, want));
            }
        }
    }
    Ok(parts)
}

fn c9(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    const T: f64 = 1e-4;
    let mut parts = vec![
        Part::new("unit cube", 1e-12),
        Part::new("finite difference", 1e-3),
    ];
    for n in DIMS {
        let cube = Polytope::box_shape(&vec![0.0; n], &vec![1.0; n])?;
        let z = projection_body(&cube);
        for _ in 0..50 {
            let x = random_vec(rng, n);
            parts[0].push(rel(z.support(&x), x.iter().map(|c| c.abs()).sum()));
        }
        let mut bodies = vec![cube];
        for _ in 0..3 {
            bodies.push(random_polytope(rng, n, 3 * n + 2, false)?);
        }
        for body in &bodies {
            let z = projection_body(body);
            let vol = hull_volume(body.vertices());
            for _ in 0..5 {
                let x = random_vec(rng, n);
                let mut pts = body.vertices().to_vec();
                pts.extend(
                    body.vertices()
                        .iter()
                        .map(|v| v.iter().zip(&x).map(|(a, b)| a + T * b).collect()),
                );
                parts[1].push(rel((hull_volume(&pts) - vol) / T, z.support(&x)));
            }
        }
    }
    Ok(parts)
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Weyl dimension formula for a `GL(n)` weight.
fn weyl_dimension(w: &[i64]) -> u64 {
    let n = w.len();
    let mut num = 1i128;
    let mut den = 1i128;
    for i in 0..n {
        for j in i + 1..n {
            num *= (w[i] - w[j]) as i128 + (j - i) as i128;
            den *= (j - i) as i128;
        }
    }
    (num / den) as u64
}

fn c10(_rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut part = Part::new("weights and dimensions", 0.0);
    for n in 2..=5 {
        for p in 0..=4 {
            for q in 0..=4 {
                let s = decompose_sym_mixed(n, p, q)?;
                let mut got: Vec<Vec<i64>> = s.iter().map(|x| x.sl_weight()).collect();
                let mut want: Vec<Vec<i64>> = (0..=p.min(q))
                    .map(|i| {
                        let mut w = vec![(p + q - 2 * i) as i64];
                        w.extend(std::iter::repeat_n((q - i) as i64, n - 2));
                        w
                    })
                    .collect();
                got.sort();
                want.sort();
                let dims_ok = s.iter().all(|x| {
                    let mut full = x.sl_weight();
                    full.push(0);
                    x.dimension == weyl_dimension(&full)
                });
                let total: u64 = s.iter().map(|x| x.dimension).sum();
                part.count(
                    s.len() != p.min(q) + 1
                        || got != want
                        || !dims_ok
                        || s.iter().any(|x| x.multiplicity != 1)
                        || total != binomial(n + p - 1, p) * binomial(n + q - 1, q),
                );
            }
        }
    }
    Ok(vec![part])
}

fn c11(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut parts = vec![
        Part::new("idempotence", 1e-9),
        Part::new("equivariance", 1e-7),
        Part::new("rank", 0.0),
    ];
    for n in 2..=4 {
        for p in 0..=3 {
            for q in 0..=3 {
                let d = isotypic(n, p, q)?;
                let mut total = 0u64;
                let mut bad = false;
                let probes: Vec<MixedTensor> = (0..2)
                    .map(|_| random_mixed(rng, n, p, q, Variance::Covector))
                    .collect::<Res<_>>()?;
                let t = random_sl_matrix(rng, n, 10.0)?;
                for c in d.components() {
                    let pm = &c.projector;
                    parts[0].push((pm * pm - pm).norm() / pm.norm());
                    for x in &probes {
                        let lhs = d.project(c.index, &x.transform(&t)?)?;
                        let rhs = d.project(c.index, x)?.transform(&t)?;
                        let scale = x.transform(&t)?.norm();
                        parts[1].push((lhs.coeffs() - rhs.coeffs()).norm() / scale);
                    }
                    let rank = pm.singular_values().iter().filter(|s| **s > 0.5).count() as u64;
                    total += rank;
                    let i = c.index as i64;
                    let mut w = vec![p as i64 + q as i64 - 2 * i];
                    w.extend(std::iter::repeat_n(q as i64 - i, n - 2));
                    w.push(0);
                    bad |= rank != weyl_dimension(&w);
                }
                parts[2].count(bad || total != binomial(n + p - 1, p) * binomial(n + q - 1, q));
            }
        }
    }
    Ok(parts)
}

fn c12(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut parts = vec![
        Part::new("kappa alpha = 1", 1e-8),
        Part::new("polarity", 1e-6),
    ];
    for n in DIMS {
        for _ in 0..5 {
            let e = random_ellipsoid(rng, n)?;
            let det = e.matrix().determinant();
            let qinv = e.matrix().clone().try_inverse().unwrap();
            let k: ConvexBody = e.clone().into();
            let polar = k.polar()?;
            for _ in 0..200 {
                let u = random_unit(rng, n);
                let x = SmoothBody::gradient(&e, &u);
                let qx = e.matrix() * DVector::from_row_slice(&x);
                let uu = DVector::from_row_slice(&u);
                let kappa = det / qx.norm().powi(n as i32 + 1);
                let alpha = uu.dot(&(&qinv * &uu)).powf(-(n as f64 + 1.0) / 2.0) / det;
                let lk = ellipsoid_gauss_curvature(&e, &x);
                let la = alpha_k(&e, &u)?;
                parts[0].push((lk * la - 1.0).abs());
                parts[0].push(rel(lk, kappa).max(rel(la, alpha)));
                let tk = tilde_kappa(&k, &u)?;
                parts[0].push((tk * tilde_alpha(&k, &u)? - 1.0).abs());
                parts[0].push(rel(tk, det));
                parts[1].push(rel(tk, tilde_alpha(&polar, &x)?));
            }
        }
    }
    Ok(parts)
}

fn constant_one(n: usize, v: Variance) -> Res<SymTensor> {
    Ok(SymTensor::from_coeffs(
        n,
        0,
        v,
        DVector::from_element(1, 1.0),
    )?)
}

fn c13(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut parts = vec![
        Part::new("unit ball", 1e-6),
        Part::new("ellipsoid closed form", 1e-6),
        Part::new("zero on polytopes", 0.0),
        Part::new("boundary side", 1e-6),
        Part::new("polarity", 1e-4),
    ];
    let sphere = SphereIntegration::default();
    for n in DIMS {
        let fs = [
            ConcFunction::power(1.0 / (n as f64 + 1.0))?,
            ConcFunction::clamp(1.0)?,
        ];
        let ball: ConvexBody = Ellipsoid::ball(n, 1.0).into();
        for f in &fs {
            parts[0].push(rel(
                phi_f_p(&ball, f, &constant_one(n, Variance::Covector)?, &sphere)?.value,
                sphere_area(n),
            ));
            let e = random_ellipsoid(rng, n)?;
            let det = e.matrix().determinant();
            let want = f.eval(det) * n as f64 * ball_volume(n) / det.sqrt();
            let k: ConvexBody = e.into();
            parts[1].push(rel(
                phi_f_p(&k, f, &constant_one(n, Variance::Covector)?, &sphere)?.value,
                want,
            ));
        }
        for _ in 0..3 {
            let k: ConvexBody = random_polytope(rng, n, 3 * n + 2, true)?.into();
            for f in &fs {
                for p in 0..=2 {
                    let phi = random_sym(rng, n, p, Variance::Covector)?;
                    parts[2].count(phi_f_p(&k, f, &phi, &sphere)?.value != 0.0);
                    parts[2].count(psi_f_p(&k, f, &phi.dual(), &sphere)?.value != 0.0);
                }
            }
        }
        for j in 0..3 {
            let k: ConvexBody = random_ellipsoid(rng, n)?.into();
            let polar = k.polar()?;
            let f = &fs[j % 2];
            for p in 0..=2 {
                let phi = random_sym(rng, n, p, Variance::Covector)?;
                let psi = random_sym(rng, n, p, Variance::Vector)?;
                let a = phi_f_p(&k, f, &phi, &sphere)?.value;
                parts[3].push(rel(phi_f_p_boundary(&k, f, &phi, &sphere)?.value, a));
                let b = psi_f_p(&k, f, &psi, &sphere)?.value;
                parts[3].push(rel(psi_f_p_boundary(&k, f, &psi, &sphere)?.value, b));
                let lhs = phi_f_p(&polar, f, &phi, &sphere)?.value;
                parts[4].push(rel(
                    lhs,
                    psi_f_p(&k, &f.dual(), &phi.dual(), &sphere)?.value,
                ));
                let lhs = psi_f_p(&polar, f, &psi, &sphere)?.value;
                parts[4].push(rel(
                    lhs,
                    phi_f_p(&k, &f.dual(), &psi.dual(), &sphere)?.value,
                ));
            }
        }
    }
    Ok(parts)
}

fn c14(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut part = Part::new("boundary = (lambda+n) volume", 1e-4);
    let sphere = SphereIntegration::default();
    for n in DIMS {
        let nf = n as f64;
        for _ in 0..3 {
            let e = random_ellipsoid(rng, n)?;
            let q = e.matrix().clone();
            let qinv = q.clone().try_inverse().unwrap();
            let scale = q.determinant().sqrt().recip() * ball_volume(n);
            let a = DVector::from_vec(random_vec(rng, n));
            let aqa = a.dot(&(&qinv * &a));
            let quad = move |x: &[f64]| {
                let v = DVector::from_row_slice(x);
                v.dot(&(&q * &v))
            };
            let lin = |x: &[f64]| a.dot(&DVector::from_row_slice(x));
            // (f, λ, ∫_E f)
            let cases: [(Scalar<'_>, usize, f64); 4] = [
                (Box::new(|_| 1.0), 0, scale),
                (Box::new(|x| lin(x).powi(2) / quad(x)), 0, scale * aqa / nf),
                (
                    Box::new(|x| quad(x).sqrt() + lin(x)),
                    1,
                    scale * nf / (nf + 1.0),
                ),
                (
                    Box::new(|x| lin(x).powi(2) + dot(x, x)),
                    2,
                    scale * (aqa + qinv.trace()) / (nf + 2.0),
                ),
            ];
            for (f, lambda, integral) in cases {
                let g = |x: &[f64], u: &[f64]| f(x) * dot(x, u);
                let boundary = boundary_integrate_smooth(&e, &g, &sphere)?.value;
                part.push(rel(boundary, (lambda + n) as f64 * integral));
            }
        }
    }
    Ok(vec![part])
}

fn partitions(k: usize, max_part: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=k.min(max_part)).rev() {
        for mut rest in partitions(k - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `s_λ(x)` as a ratio of alternants.
fn bialternant(lambda: &[usize], x: &[f64]) -> f64 {
    let n = x.len();
    if lambda.len() > n {
        return 0.0;
    }
    let part = |j: usize| lambda.get(j).copied().unwrap_or(0);
    let num = DMatrix::from_fn(n, n, |i, j| x[i].powi((part(j) + n - 1 - j) as i32));
    let den = DMatrix::from_fn(n, n, |i, j| x[i].powi((n - 1 - j) as i32));
    num.determinant() / den.determinant()
}

fn c15(rng: &mut ChaCha8Rng) -> Res<Vec<Part>> {
    let mut parts = vec![
        Part::new("Schur values", 1e-10),
        Part::new("LR products", 1e-10),
    ];
    let all: Vec<Vec<usize>> = (0..=4).flat_map(|k| partitions(k, k)).collect();
    for n in 2..=4 {
        let fit: Vec<&Vec<usize>> = all.iter().filter(|l| l.len() <= n).collect();
        let points: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi += 0.2 * i as f64;
                }
                x
            })
            .collect();
        for lambda in &fit {
            let l = Partition::new(lambda.to_vec())?;
            for x in &points {
                parts[0].push(rel(schur_eval(&l, x)?, bialternant(lambda, x)));
            }
            for mu in &fit {
                let m = Partition::new(mu.to_vec())?;
                let lr = lr_coefficients(&l, &m, n)?;
                for x in &points {
                    let lhs = bialternant(lambda, x) * bialternant(mu, x);
                    let rhs: f64 = lr
                        .iter()
                        .map(|(nu, c)| *c as f64 * bialternant(nu.parts(), x))
                        .sum();
                    parts[1].push(rel(rhs, lhs));
                }
            }
        }
    }
    Ok(parts)
}

type Criterion = fn(&mut ChaCha8Rng) -> Res<Vec<Part>>;

const CRITERIA: [(&str, Criterion); 15] = [
    ("identity tensor gives n vol", c1),
    ("skew-symmetric tensors vanish", c2),
    ("simplex values are positive", c3),
    ("SL(n) invariance", c4),
    ("valuation identity", c5),
    ("homogeneity", c6),
    ("polarity", c7),
    ("L^p reductions", c8),
    ("projection body", c9),
    ("decomposition lemma", c10),
    ("isotypic projectors", c11),
    ("curvature relations", c12),
    ("semicontinuous family", c13),
    ("divergence lemma", c14),
    ("Schur and Littlewood-Richardson", c15),
];

fn main() -> ExitCode {
    let mut failures = 0;
    for (i, (name, run)) in CRITERIA.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(20240611 + i as u64);
        let start = Instant::now();
        let (pass, detail) = match run(&mut rng) {
            Ok(parts) => {
                let pass = parts.iter().all(Part::pass);
                let detail = parts
                    .iter()
                    .map(|p| {
                        format!(
                            "{}: {} cases, max {:.2e} (tol {:.0e})",
                            p.label, p.instances, p.max_err, p.tol
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("; ");
                (pass, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name} [{detail}] {:.1}s",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        CRITERIA.len() - failures,
        CRITERIA.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
