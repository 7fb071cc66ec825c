use super::subspace::affine_hull;
use super::{Dataset, Point};
use crate::error::Result;
use crate::scalar::Scalar;

/// Phase-one simplex for `A w = b, w >= 0`.
///
/// Minimises the L1 infeasibility using one artificial variable per row and
/// Bland's rule. Returns the primal weights of the final basis and the
/// remaining infeasibility.
pub(crate) fn phase_one<T: Scalar>(a: &[Vec<T>], b: &[T]) -> (Vec<T>, T) {
    let rows = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + rows + 1;
    let last = width - 1;
    let eps = T::epsilon().sqrt() * T::of(1e-3);

    let mut tab: Vec<Vec<T>> = Vec::with_capacity(rows);
    let mut basis: Vec<usize> = Vec::with_capacity(rows);
    for (i, (row, &rhs)) in a.iter().zip(b).enumerate() {
        let flip = rhs < T::zero();
        let mut r = vec![T::zero(); width];
        for (j, &v) in row.iter().enumerate() {
            r[j] = if flip { -v } else { v };
        }
        r[n + i] = T::one();
        r[last] = if flip { -rhs } else { rhs };
        tab.push(r);
        basis.push(n + i);
    }
    let mut obj = vec![T::zero(); width];
    for r in &tab {
        for j in 0..n {
            obj[j] = obj[j] - r[j];
        }
        obj[last] = obj[last] - r[last];
    }

    let max_iter = 50 * (n + rows + 1);
    for _ in 0..max_iter {
        let Some(enter) = (0..n + rows).find(|&j| obj[j] < -eps) else {
            break;
        };
        let mut leave: Option<(usize, T)> = None;
        for (i, r) in tab.iter().enumerate() {
            if r[enter] > eps {
                let ratio = r[last] / r[enter];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - eps || (ratio <= lr + eps && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else { break };
        let piv = tab[pr][enter];
        tab[pr].iter_mut().for_each(|x| *x = *x / piv);
        let pivot_row = tab[pr].clone();
        for (i, r) in tab.iter_mut().enumerate() {
            if i != pr {
                let f = r[enter];
                if f != T::zero() {
                    r.iter_mut().zip(&pivot_row).for_each(|(x, &p)| *x = *x - f * p);
                }
            }
        }
        let f = obj[enter];
        obj.iter_mut().zip(&pivot_row).for_each(|(x, &p)| *x = *x - f * p);
        basis[pr] = enter;
    }

    let mut w = vec![T::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            w[bv] = tab[i][last];
        }
    }
    (w, -obj[last])
}

/// Clamps LP weights into the simplex and checks the reconstruction of `target`.
pub(crate) fn certify_weights<T: Scalar>(
    mut w: Vec<T>,
    locations: &[&[T]],
    target: &[T],
    tol: T,
) -> Option<Vec<T>> {
    w.iter_mut().for_each(|x| {
        if *x < T::zero() {
            *x = T::zero();
        }
    });
    let total: T = w.iter().copied().sum();
    if !(total > T::zero()) {
        return None;
    }
    w.iter_mut().for_each(|x| *x = (*x / total).min(T::one()));
    let mut recon = vec![T::zero(); target.len()];
    for (&wi, loc) in w.iter().zip(locations) {
        recon.iter_mut().zip(loc.iter()).for_each(|(r, &x)| *r = *r + wi * x);
    }
    (crate::scalar::dist(&recon, target) <= tol).then_some(w)
}

/// Convex weights for `query` over the intrinsic sample coordinates, if the LP
/// is feasible to within `tol` in the ambient reconstruction.
pub(crate) fn convex_weights<T: Scalar>(
    intrinsic: &[Vec<T>],
    query_intrinsic: &[T],
    scale: T,
    locations: &[&[T]],
    target: &[T],
    tol: T,
) -> Option<Vec<T>> {
    let k = query_intrinsic.len();
    let m = intrinsic.len();
    let mut a: Vec<Vec<T>> = Vec::with_capacity(k + 1);
    let mut b: Vec<T> = Vec::with_capacity(k + 1);
    a.push(vec![T::one(); m]);
    b.push(T::one());
    for j in 0..k {
        a.push(intrinsic.iter().map(|z| z[j] / scale).collect());
        b.push(query_intrinsic[j] / scale);
    }
    let (w, _) = phase_one(&a, &b);
    certify_weights(w, locations, target, tol)
}

/// Tests whether `p` is within `tol` of a convex combination of the sample
/// locations; on success returns the witness weights.
pub fn in_convex_hull<T: Scalar>(p: &Point<T>, data: &Dataset<T>, tol: T) -> Result<(bool, Option<Vec<T>>)> {
    p.check_dim(data.ambient_dim())?;
    let hull = affine_hull(data, T::of(1e-8))?;
    let (_, residual) = hull.project_unchecked(p.coords());
    if residual > tol {
        return Ok((false, None));
    }
    let intrinsic: Vec<Vec<T>> = data
        .locations()
        .map(|l| hull.intrinsic_unchecked(l.coords()))
        .collect();
    let q = hull.intrinsic_unchecked(p.coords());
    let scale = intrinsic
        .iter()
        .map(|z| crate::scalar::norm(z))
        .fold(T::one(), T::max);
    let locs: Vec<&[T]> = data.locations().map(Point::coords).collect();
    let w = convex_weights(&intrinsic, &q, scale, &locs, p.coords(), tol);
    Ok((w.is_some(), w))
}
