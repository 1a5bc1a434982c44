//! Isotypic projectors of `Sym^p V ⊗ Sym^q V*`.
//!
//! Coefficients `c_{αβ}` are read as the polynomial `F(a, b) = Σ c_{αβ} a^α b^β`.
//! The operator `E = (Σ a_j b_j)(Σ ∂_{a_i} ∂_{b_i})` (contract one slot
//! pair, then insert the identity) commutes with the group action and is
//! self-adjoint for the pairing weights `α! β!`; its eigenspaces are the
//! isotypic components.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::rep_theory::decompose_sym_mixed;
use crate::symtensor::{basis, factor_matrix, induced_matrix, sym_dim, MixedTensor, Variance};

/// Largest coefficient-space dimension for which dense projectors are built.
const MAX_SPACE_DIM: usize = 4096;
const GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct IsotypicComponent {
    pub index: usize,
    /// Acts on row-major flattened coefficients.
    pub projector: DMatrix<f64>,
    /// `SL(n)` highest weight as differences `p_i − p_n`.
    pub sl_weight: Vec<i64>,
    pub dimension: usize,
    /// Eigenvalue of the contraction–insertion operator.
    pub eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct IsotypicDecomposition {
    n: usize,
    p: usize,
    q: usize,
    components: Vec<IsotypicComponent>,
}

/// Matrix of `ρ(t)` on the flattened coefficients of `MixedTensor`s with
/// the given shape.
pub fn gl_action_matrix(
    n: usize,
    p: usize,
    q: usize,
    first: Variance,
    t: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let r1 = induced_matrix(&factor_matrix(t, first)?, p);
    let r2 = induced_matrix(&factor_matrix(t, first.dual())?, q);
    debug_assert_eq!(r1.nrows(), sym_dim(n, p));
    Ok(r1.kronecker(&r2))
}

/// The contraction–insertion operator on flattened coefficients.
fn contraction_insertion(n: usize, p: usize, q: usize) -> DMatrix<f64> {
    let bp = basis(n, p);
    let bq = basis(n, q);
    let dq = bq.len();
    let dim = bp.len() * dq;
    let mut e = DMatrix::zeros(dim, dim);
    for (ia, alpha) in bp.indices().iter().enumerate() {
        for (ib, beta) in bq.indices().iter().enumerate() {
            let src = ia * dq + ib;
            let (a, b) = (alpha.exponents(), beta.exponents());
            for i in 0..n {
                let c = a[i] as f64 * b[i] as f64;
                if c == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let mut a2 = a.to_vec();
                    let mut b2 = b.to_vec();
                    a2[i] -= 1;
                    b2[i] -= 1;
                    a2[j] += 1;
                    b2[j] += 1;
                    let ta = bp
                        .position(&crate::symtensor::MultiIndex::new(a2))
                        .expect("same degree");
                    let tb = bq
                        .position(&crate::symtensor::MultiIndex::new(b2))
                        .expect("same degree");
                    e[(ta * dq + tb, src)] += c;
                }
            }
        }
    }
    e
}

/// Decomposes `Sym^p V ⊗ Sym^q V*`, `V = R^n`, into its `min(p, q) + 1`
/// isotypic components, labelled by descending dimension.
pub fn isotypic(n: usize, p: usize, q: usize) -> Result<IsotypicDecomposition> {
    if n < 2 {
        return Err(Error::InvalidInput(
            "isotypic decomposition needs n >= 2".into(),
        ));
    }
    let bp = basis(n, p);
    let bq = basis(n, q);
    let dq = bq.len();
    let dim = bp.len() * dq;
    if dim > MAX_SPACE_DIM {
        return Err(Error::SizeCap(format!(
            "coefficient space of dimension {dim} exceeds {MAX_SPACE_DIM}"
        )));
    }
    let e = contraction_insertion(n, p, q);
    let weights = MixedTensor::pairing_weights(n, p, q);
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();

    // E preserves the torus weight α − β, so it is block diagonal.
    let mut blocks: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (ia, alpha) in bp.indices().iter().enumerate() {
        for (ib, beta) in bq.indices().iter().enumerate() {
            let key = alpha
                .exponents()
                .iter()
                .zip(beta.exponents())
                .map(|(x, y)| *x as i64 - *y as i64)
                .collect();
            blocks.entry(key).or_default().push(ia * dq + ib);
        }
    }

    // (eigenvalue, eigenvector in the symmetrized coordinates)
    let mut pairs: Vec<(f64, DVector<f64>)> = Vec::with_capacity(dim);
    for idx in blocks.values() {
        let m = idx.len();
        let mut s = DMatrix::from_fn(m, m, |r, c| {
            e[(idx[r], idx[c])] * sqrt_w[idx[r]] / sqrt_w[idx[c]]
        });
        s = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);
        for k in 0..m {
            let mut v = DVector::zeros(dim);
            for (r, &g) in idx.iter().enumerate() {
                v[g] = eig.eigenvectors[(r, k)];
            }
            pairs.push((eig.eigenvalues[k], v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let scale = pairs.last().map(|p| p.0.abs()).unwrap_or(0.0).max(1.0);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..pairs.len() {
        if k > 0 && pairs[k].0 - pairs[k - 1].0 <= 1e-6 * scale {
            clusters.last_mut().expect("non-empty").push(k);
        } else {
            clusters.push(vec![k]);
        }
    }
    let expected = p.min(q) + 1;
    if clusters.len() != expected {
        return Err(Error::DecompositionFailed(format!(
            "found {} eigenvalue clusters, expected {expected}",
            clusters.len()
        )));
    }
    let means: Vec<f64> = clusters
        .iter()
        .map(|c| c.iter().map(|&k| pairs[k].0).sum::<f64>() / c.len() as f64)
        .collect();
    if means.windows(2).any(|w| w[1] - w[0] < GAP_TOL * scale) {
        return Err(Error::DecompositionFailed(
            "eigenvalue gap below tolerance".into(),
        ));
    }

    let summands = decompose_sym_mixed(n, p, q)?;
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by(|&a, &b| {
        clusters[b]
            .len()
            .cmp(&clusters[a].len())
            .then(means[a].total_cmp(&means[b]))
    });
    let mut components = Vec::with_capacity(expected);
    for (index, &c) in order.iter().enumerate() {
        let cluster = &clusters[c];
        let mut ps = DMatrix::zeros(dim, dim);
        for &k in cluster {
            let v = &pairs[k].1;
            ps += v * v.transpose();
        }
        // Back to coefficient coordinates: P = W^{-1/2} P_s W^{1/2}.
        let projector = DMatrix::from_fn(dim, dim, |r, col| ps[(r, col)] * sqrt_w[col] / sqrt_w[r]);
        let summand = summands.iter().find(|s| s.index == index).ok_or_else(|| {
            Error::DecompositionFailed(format!("no highest weight with index {index}"))
        })?;
        if summand.dimension as usize != cluster.len() {
            return Err(Error::DecompositionFailed(format!(
                "component {index} has dimension {} but its highest weight predicts {}",
                cluster.len(),
                summand.dimension
            )));
        }
        components.push(IsotypicComponent {
            index,
            projector,
            sl_weight: summand.sl_weight(),
            dimension: cluster.len(),
            eigenvalue: means[c],
        });
    }
    Ok(IsotypicDecomposition {
        n,
        p,
        q,
        components,
    })
}

impl IsotypicDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn components(&self) -> &[IsotypicComponent] {
        &self.components
    }

    pub fn component(&self, index: usize) -> Result<&IsotypicComponent> {
        self.components
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("no isotypic component {index}")))
    }

    /// The index of the one-dimensional component spanned by powers of the
    /// identity, if `p = q`.
    pub fn trivial_index(&self) -> Option<usize> {
        if self.p != self.q {
            return None;
        }
        self.components
            .iter()
            .position(|c| c.sl_weight.iter().all(|w| *w == 0))
    }

    /// `π_i t` for a tensor of either variance.
    pub fn project(&self, index: usize, t: &MixedTensor) -> Result<MixedTensor> {
        if (t.n(), t.p(), t.q()) != (self.n, self.p, self.q) {
            return Err(Error::DimensionMismatch {
                expected: sym_dim(self.n, self.p) * sym_dim(self.n, self.q),
                found: sym_dim(t.n(), t.p()) * sym_dim(t.n(), t.q()),
            });
        }
        let c = self.component(index)?;
        let flat = &c.projector * t.flat();
        MixedTensor::from_flat(self.n, self.p, self.q, t.first(), flat.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::random::random_sl_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn endomorphisms_of_the_plane() {
        let d = isotypic(2, 1, 1).unwrap();
        let dims: Vec<usize> = d.components().iter().map(|c| c.dimension).collect();
        assert_eq!(dims, vec![3, 1]);
        let id = MixedTensor::identity(2);
        let projected = d.project(1, &id).unwrap();
        assert!((projected.coeffs() - id.coeffs()).norm() < 1e-12);
        assert!(d.project(0, &id).unwrap().norm() < 1e-12);
        assert_eq!(d.trivial_index(), Some(1));
    }

    #[test]
    fn single_component_when_a_degree_vanishes() {
        let d = isotypic(3, 0, 2).unwrap();
        assert_eq!(d.components().len(), 1);
        let p = &d.components()[0].projector;
        assert!((p - DMatrix::identity(p.nrows(), p.ncols())).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_follow_the_harmonic_formula() {
        // On (a·b)^i H with H harmonic of bidegree (p−i, q−i): i (n + p + q − i − 1).
        for (n, p, q) in [(2, 2, 3), (3, 2, 2), (4, 3, 1)] {
            let d = isotypic(n, p, q).unwrap();
            for c in d.components() {
                let i = c.index as f64;
                let expected = i * ((n + p + q) as f64 - i - 1.0);
                assert!(
                    (c.eigenvalue - expected).abs() < 1e-9,
                    "{n} {p} {q}: {} vs {expected}",
                    c.eigenvalue
                );
            }
        }
    }

    #[test]
    fn projectors_commute_with_the_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = isotypic(3, 2, 1).unwrap();
        for _ in 0..3 {
            let t = random_sl_matrix(&mut rng, 3, 10.0).unwrap();
            let rho = gl_action_matrix(3, 2, 1, Variance::Covector, &t).unwrap();
            for c in d.components() {
                let comm = &c.projector * &rho - &rho * &c.projector;
                assert!(comm.norm() < 1e-9 * rho.norm());
            }
        }
    }

    #[test]
    fn large_spaces_are_capped() {
        assert!(matches!(isotypic(6, 6, 6), Err(Error::SizeCap(_))));
    }
}
