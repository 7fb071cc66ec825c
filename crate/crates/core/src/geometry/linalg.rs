use nalgebra::DMatrix;

use crate::scalar::Scalar;

/// Singular values and right singular vectors of a dense matrix.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// Singular values, non-increasing.
    pub values: Vec<T>,
    /// Right singular vectors, `vectors[j]` pairs with `values[j]`.
    pub vectors: Vec<Vec<T>>,
}

/// Singular values and right singular vectors of the `rows.len() x ncols`
/// matrix `rows`, computed in double precision. Only the first
/// `min(rows, ncols)` pairs are returned.
pub fn singular_decomposition<T: Scalar>(rows: &[Vec<T>], ncols: usize) -> Svd<T> {
    let m = rows.len();
    if m == 0 || ncols == 0 {
        return Svd {
            values: Vec::new(),
            vectors: Vec::new(),
        };
    }
    let a = DMatrix::from_fn(m, ncols, |i, j| rows[i][j].as_f64());
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    Svd {
        values: order.iter().map(|&k| T::of(svd.singular_values[k])).collect(),
        vectors: order
            .iter()
            .map(|&k| v_t.row(k).iter().map(|&x| T::of(x)).collect())
            .collect(),
    }
}

/// Flips `v` so its first clearly nonzero component is positive.
pub(crate) fn canonical_sign<T: Scalar>(v: &mut [T]) {
    let thresh = T::of(1e-6);
    if let Some(&first) = v.iter().find(|c| c.abs() > thresh) {
        if first < T::zero() {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

/// Gram-Schmidt completion: unit vectors orthogonal to `basis`, built from the
/// standard axes in order of largest remaining component.
pub(crate) fn orthogonal_complement<T: Scalar>(basis: &[Vec<T>], dim: usize) -> Vec<Vec<T>> {
    let mut all: Vec<Vec<T>> = basis.to_vec();
    let mut out = Vec::new();
    while all.len() < dim {
        let mut best: Option<(T, Vec<T>)> = None;
        for axis in 0..dim {
            let mut e = vec![T::zero(); dim];
            e[axis] = T::one();
            for _ in 0..2 {
                for b in &all {
                    let d = crate::scalar::dot(&e, b);
                    e.iter_mut().zip(b).for_each(|(x, &y)| *x = *x - d * y);
                }
            }
            let n = crate::scalar::norm(&e);
            if best.as_ref().is_none_or(|(bn, _)| n > *bn + T::of(1e-12)) {
                best = Some((n, e));
            }
        }
        let (n, mut e) = best.expect("dim > 0");
        e.iter_mut().for_each(|x| *x = *x / n);
        canonical_sign(&mut e);
        all.push(e.clone());
        out.push(e);
    }
    out
}
