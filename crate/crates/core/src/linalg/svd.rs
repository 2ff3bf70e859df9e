use nalgebra::{DMatrix, DVector};

/// Thin singular value decomposition `M = U diag(sigma) V^T`.
///
/// `u` is `p x min(p, q)`, `v` (when requested) is `q x min(p, q)`, and
/// `sigma` is sorted in non-increasing order.
#[derive(Clone, Debug)]
pub struct DenseSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: Option<DMatrix<f64>>,
}

/// Dense SVD of a block-scale matrix, backed by nalgebra's bidiagonal SVD.
pub fn dense_svd(m: &DMatrix<f64>, want_v: bool) -> DenseSvd {
    let (p, q) = m.shape();
    let k = p.min(q);
    if k == 0 {
        return DenseSvd {
            u: DMatrix::zeros(p, 0),
            sigma: DVector::zeros(0),
            v: want_v.then(|| DMatrix::zeros(q, 0)),
        };
    }
    let svd = m.clone().svd(true, want_v);
    let u = svd.u.expect("u requested");
    let mut order: Vec<usize> = (0..k).collect();
    // Stable sort keeps nalgebra's order among equal values.
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let sigma = DVector::from_iterator(k, order.iter().map(|&i| svd.singular_values[i]));
    let u = DMatrix::from_fn(p, k, |r, c| u[(r, order[c])]);
    let v = svd.v_t.map(|vt| DMatrix::from_fn(q, k, |r, c| vt[(order[c], r)]));
    DenseSvd { u, sigma, v }
}
