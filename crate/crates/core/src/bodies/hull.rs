//! Incremental (beneath-beyond) convex hull with simplicial facets.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::{cofactor_normal, dot, norm, simplex_volume};

/// A merged facet: all boundary simplices sharing one supporting hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Indices into the polytope's vertex list.
    pub vertices: Vec<usize>,
    /// `(n-1)`-simplices triangulating the facet, as vertex indices.
    pub simplices: Vec<Vec<usize>>,
    pub volume: f64,
}

struct Simplicial {
    verts: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
}

/// Extreme points and facets of `conv(points)`; vertex indices in the
/// returned facets refer to the returned point list.
pub(crate) fn convex_hull(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Facet>)> {
    if points.is_empty() {
        return Err(Error::Degenerate("empty point set".into()));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidInput("points of mixed dimension".into()));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    if d == 1 {
        return interval(points);
    }
    let scale = points
        .iter()
        .map(|p| norm(p))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = 1e-10 * scale;

    let simplices = beneath_beyond(points, eps)?;
    let facets = merge(points, &simplices, scale);
    let extreme = extreme_indices(points.len(), d, &facets);

    let used: Vec<usize> = {
        let mut u: Vec<usize> = simplices
            .iter()
            .flat_map(|s| s.verts.iter().copied())
            .collect();
        u.sort_unstable();
        u.dedup();
        u
    };
    let pts: Vec<Vec<f64>> = extreme.iter().map(|&i| points[i].clone()).collect();
    if extreme == used && extreme.len() == points.len() {
        return Ok((pts, facets));
    }
    // Rebuild on the extreme points only so every simplex vertex is a vertex.
    let simplices = beneath_beyond(&pts, eps)?;
    let facets = merge(&pts, &simplices, scale);
    Ok((pts, facets))
}

/// Triangulates `conv(points)` (full-dimensional in its ambient space) by
/// coning the boundary simplices from the vertex centroid.
pub(crate) fn triangulate(points: &[Vec<f64>]) -> Result<Vec<Vec<Vec<f64>>>> {
    let (verts, facets) = convex_hull(points)?;
    if verts[0].len() == 1 {
        return Ok(vec![verts]);
    }
    let d = verts[0].len();
    let c: Vec<f64> = (0..d)
        .map(|k| verts.iter().map(|v| v[k]).sum::<f64>() / verts.len() as f64)
        .collect();
    Ok(facets
        .iter()
        .flat_map(|f| f.simplices.iter())
        .map(|s| {
            let mut simplex = Vec::with_capacity(d + 1);
            simplex.push(c.clone());
            simplex.extend(s.iter().map(|&i| verts[i].clone()));
            simplex
        })
        .collect())
}

fn interval(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Facet>)> {
    let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = points
        .iter()
        .map(|p| p[0])
        .fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-10 * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("segment has zero length".into()));
    }
    let facets = vec![
        Facet {
            normal: vec![-1.0],
            offset: -lo,
            vertices: vec![0],
            simplices: vec![vec![0]],
            volume: 1.0,
        },
        Facet {
            normal: vec![1.0],
            offset: hi,
            vertices: vec![1],
            simplices: vec![vec![1]],
            volume: 1.0,
        },
    ];
    Ok((vec![vec![lo], vec![hi]], facets))
}

fn hyperplane(points: &[Vec<f64>], verts: &[usize], interior: &[f64]) -> Option<(Vec<f64>, f64)> {
    let refs: Vec<&[f64]> = verts.iter().map(|&i| points[i].as_slice()).collect();
    let raw = cofactor_normal(&refs);
    let len = raw.norm();
    if len == 0.0 || !len.is_finite() {
        return None;
    }
    let mut normal: Vec<f64> = raw.iter().map(|x| x / len).collect();
    let mut offset = dot(&normal, refs[0]);
    if dot(&normal, interior) > offset {
        normal.iter_mut().for_each(|x| *x = -*x);
        offset = -offset;
    }
    Some((normal, offset))
}

fn initial_simplex(points: &[Vec<f64>], eps: f64) -> Result<Vec<usize>> {
    let d = points[0].len();
    let first = (0..points.len())
        .min_by(|&a, &b| points[a].partial_cmp(&points[b]).expect("finite"))
        .expect("non-empty");
    let mut chosen = vec![first];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for _ in 0..d {
        let mut best = (0.0, usize::MAX, Vec::new());
        for (i, p) in points.iter().enumerate() {
            let mut r: Vec<f64> = p.iter().zip(&points[first]).map(|(a, b)| a - b).collect();
            for b in &basis {
                let c = dot(&r, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let len = norm(&r);
            if len > best.0 {
                best = (len, i, r);
            }
        }
        if best.0 <= eps {
            return Err(Error::Degenerate(
                "points do not span a full-dimensional body".into(),
            ));
        }
        chosen.push(best.1);
        basis.push(best.2.iter().map(|x| x / best.0).collect());
    }
    Ok(chosen)
}

fn beneath_beyond(points: &[Vec<f64>], eps: f64) -> Result<Vec<Simplicial>> {
    let d = points[0].len();
    let init = initial_simplex(points, eps)?;
    let interior: Vec<f64> = (0..d)
        .map(|k| init.iter().map(|&i| points[i][k]).sum::<f64>() / (d + 1) as f64)
        .collect();

    let mut facets: Vec<Simplicial> = Vec::new();
    for skip in 0..=d {
        let verts: Vec<usize> = init
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != skip)
            .map(|(_, &i)| i)
            .collect();
        let (normal, offset) = hyperplane(points, &verts, &interior)
            .ok_or_else(|| Error::Degenerate("initial simplex is flat".into()))?;
        facets.push(Simplicial {
            verts,
            normal,
            offset,
        });
    }

    let mut in_init = vec![false; points.len()];
    init.iter().for_each(|&i| in_init[i] = true);

    for (pi, p) in points.iter().enumerate() {
        if in_init[pi] {
            continue;
        }
        let visible: Vec<bool> = facets
            .iter()
            .map(|f| dot(&f.normal, p) - f.offset > eps)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for (f, _) in facets.iter().zip(&visible).filter(|(_, &v)| v) {
            for skip in 0..d {
                let mut r: Vec<usize> = f
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, &i)| i)
                    .collect();
                r.sort_unstable();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<Simplicial> = facets
            .into_iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| f)
            .collect();
        let mut horizon: Vec<Vec<usize>> = ridges
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort_unstable();
        for mut verts in horizon {
            verts.push(pi);
            if let Some((normal, offset)) = hyperplane(points, &verts, &interior) {
                kept.push(Simplicial {
                    verts,
                    normal,
                    offset,
                });
            }
        }
        facets = kept;
    }
    Ok(facets)
}

fn merge(points: &[Vec<f64>], simplices: &[Simplicial], scale: f64) -> Vec<Facet> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    'outer: for (i, s) in simplices.iter().enumerate() {
        for g in groups.iter_mut() {
            let r = &simplices[g[0]];
            let dn = s
                .normal
                .iter()
                .zip(&r.normal)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dn < 1e-9 && (s.offset - r.offset).abs() < 1e-9 * scale {
                g.push(i);
                continue 'outer;
            }
        }
        groups.push(vec![i]);
    }
    groups
        .into_iter()
        .map(|g| {
            let mut volume = 0.0;
            let mut best = (f64::NEG_INFINITY, 0);
            let mut verts: Vec<usize> = Vec::new();
            let mut simps = Vec::with_capacity(g.len());
            for &i in &g {
                let s = &simplices[i];
                let refs: Vec<&[f64]> = s.verts.iter().map(|&v| points[v].as_slice()).collect();
                let v = simplex_volume(&refs);
                volume += v;
                if v > best.0 {
                    best = (v, i);
                }
                verts.extend(&s.verts);
                simps.push(s.verts.clone());
            }
            verts.sort_unstable();
            verts.dedup();
            let normal = simplices[best.1].normal.clone();
            let offset = verts
                .iter()
                .map(|&v| dot(&normal, &points[v]))
                .fold(f64::NEG_INFINITY, f64::max);
            Facet {
                normal,
                offset,
                vertices: verts,
                simplices: simps,
                volume,
            }
        })
        .collect()
}

/// A vertex is extreme iff the normals of its incident facets span `R^d`.
fn extreme_indices(count: usize, d: usize, facets: &[Facet]) -> Vec<usize> {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (fi, f) in facets.iter().enumerate() {
        for &v in &f.vertices {
            incident[v].push(fi);
        }
    }
    (0..count)
        .filter(|&v| {
            let inc = &incident[v];
            if inc.len() < d {
                return false;
            }
            let m = DMatrix::from_fn(inc.len(), d, |r, c| facets[inc[r]].normal[c]);
            let sv = m.singular_values();
            sv.iter().filter(|&&s| s > 1e-8).count() == d
        })
        .collect()
}
