//! Dense linear algebra kernels used by the subspace model.
//!
//! Nothing in here knows about images. Matrices are `nalgebra::DMatrix<f64>`
//! (column-major), which keeps each pixel column contiguous.

mod householder;
mod qr;
mod svd;

use nalgebra::DMatrix;

pub use householder::{apply_stack, HouseholderStack};
pub use qr::{householder_qr, qr_column_pivot, PivotedQr, QrFactors};
pub use svd::{dense_svd, DenseSvd};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Eight independent sums so the loop vectorizes.
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `a[from.., :]^T b[from.., :]`
pub(crate) fn tr_mul_from(a: &DMatrix<f64>, b: &DMatrix<f64>, from: usize) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let n = a.nrows();
    let from = from.min(n);
    let (ka, kb) = (a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(ka, kb);
    if ka == 0 || kb == 0 || from == n {
        return out;
    }
    // SAFETY: `a` and `b` are column-major with column stride `n`, so row
    // `from + l` of column `i` sits at `i * n + from + l` with `l < n - from`;
    // `out` is a dense column-major `ka x kb` buffer.
    unsafe {
        matrixmultiply::dgemm(
            ka,
            n - from,
            kb,
            1.0,
            a.as_ptr().add(from),
            n as isize,
            1,
            b.as_ptr().add(from),
            1,
            n as isize,
            0.0,
            out.as_mut_ptr(),
            1,
            ka as isize,
        );
    }
    out
}

/// `x[from.., :] -= a[from.., :] w`
pub(crate) fn sub_mul_from(x: &mut DMatrix<f64>, a: &DMatrix<f64>, w: &DMatrix<f64>, from: usize) {
    assert_eq!(x.nrows(), a.nrows());
    assert_eq!((a.ncols(), x.ncols()), w.shape());
    let n = x.nrows();
    let from = from.min(n);
    let (k, m) = w.shape();
    if k == 0 || m == 0 || from == n {
        return;
    }
    // SAFETY: same layout argument as in `tr_mul_from`; `x` and `a` are
    // distinct matrices, so the output does not alias the inputs.
    unsafe {
        matrixmultiply::dgemm(
            n - from,
            k,
            m,
            -1.0,
            a.as_ptr().add(from),
            1,
            n as isize,
            w.as_ptr(),
            1,
            k as isize,
            1.0,
            x.as_mut_ptr().add(from),
            1,
            n as isize,
        );
    }
}
