use std::sync::Arc;

use nalgebra::DMatrix;

use super::{axpy, dot, norm2, sub_mul_from, tr_mul_from};
use crate::error::{check_dim, Result};

/// An ordered product of elementary reflections `H_1 H_2 ... H_k` over `R^d`.
///
/// Each reflection is `I - 2 v v^T` with `v` of unit length, or the identity
/// when `v` is the zero vector. Applying the stack to `X` computes
/// `H_1 (H_2 (... (H_k X)))`; the transposed application reverses the order.
///
/// Reflections pushed together form a block stored in compact WY form
/// `I - V T V^T`, so a block is applied with two passes over `V` instead of
/// one pass per reflection and column. Blocks are shared between clones.
#[derive(Clone, Debug, PartialEq)]
pub struct HouseholderStack {
    dim: usize,
    len: usize,
    blocks: Vec<Arc<ReflectorBlock>>,
}

#[derive(Debug, PartialEq)]
struct ReflectorBlock {
    /// Rows above this index are zero in every vector of the block.
    start: usize,
    /// `d x k`, one reflection vector per column in application order.
    v: DMatrix<f64>,
    /// Upper triangular `k x k` with `H_1 ... H_k = I - V T V^T`.
    t: DMatrix<f64>,
}

impl ReflectorBlock {
    fn new(dim: usize, vectors: &[Vec<f64>]) -> Self {
        let k = vectors.len();
        let v = DMatrix::from_fn(dim, k, |r, c| vectors[c][r]);
        let start = vectors
            .iter()
            .map(|x| x.iter().position(|&e| e != 0.0).unwrap_or(dim))
            .min()
            .unwrap_or(dim);
        let gram = tr_mul_from(&v, &v, start);
        // T_ii = 2, T[..i, i] = -2 T[..i, ..i] (V[:, ..i]^T v_i)
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = 2.0;
            for row in 0..i {
                let s: f64 = (row..i).map(|c| t[(row, c)] * gram[(c, i)]).sum();
                t[(row, i)] = -2.0 * s;
            }
        }
        Self { start, v, t }
    }

    /// `x <- (I - V T V^T) x`, or with `T^T` when `transposed`.
    fn apply(&self, x: &mut DMatrix<f64>, transposed: bool) {
        let w = tr_mul_from(&self.v, x, self.start);
        let w = if transposed { self.t.tr_mul(&w) } else { &self.t * w };
        sub_mul_from(x, &self.v, &w, self.start);
    }

    fn apply_column(&self, x: &mut [f64], transposed: bool) {
        let s = self.start;
        let d = self.v.nrows();
        let cols: Vec<&[f64]> = self.v.as_slice().chunks_exact(d.max(1)).collect();
        let w: Vec<f64> = cols.iter().map(|c| dot(&c[s..], &x[s..])).collect();
        let k = w.len();
        for (i, c) in cols.iter().enumerate() {
            let coeff: f64 = if transposed {
                (0..=i).map(|j| self.t[(j, i)] * w[j]).sum()
            } else {
                (i..k).map(|j| self.t[(i, j)] * w[j]).sum()
            };
            if coeff != 0.0 {
                axpy(-coeff, &c[s..], &mut x[s..]);
            }
        }
    }
}

impl HouseholderStack {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            len: 0,
            blocks: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Reflection vectors in application order.
    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> + '_ {
        let d = self.dim.max(1);
        self.blocks
            .iter()
            .flat_map(move |b| b.v.as_slice().chunks_exact(d))
    }

    /// Appends a reflection. `v` is normalized; a zero vector stays zero.
    pub fn push(&mut self, mut v: Vec<f64>) -> Result<()> {
        check_dim("householder vector", self.dim, v.len())?;
        let n = norm2(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
        self.push_block(vec![v]);
        Ok(())
    }

    /// Appends reflections whose vectors are already normalized (or zero) as
    /// one block.
    pub(crate) fn push_block(&mut self, vectors: Vec<Vec<f64>>) {
        if vectors.is_empty() {
            return;
        }
        debug_assert!(vectors.iter().all(|v| v.len() == self.dim));
        self.len += vectors.len();
        self.blocks.push(Arc::new(ReflectorBlock::new(self.dim, &vectors)));
    }

    /// Applies the stack to one column in place.
    pub fn apply_in_place(&self, x: &mut [f64], transposed: bool) {
        debug_assert_eq!(x.len(), self.dim);
        if transposed {
            for b in &self.blocks {
                b.apply_column(x, true);
            }
        } else {
            for b in self.blocks.iter().rev() {
                b.apply_column(x, false);
            }
        }
    }

    /// Applies the stack to every column of `x` in place.
    pub fn apply_matrix_in_place(&self, x: &mut DMatrix<f64>, transposed: bool) -> Result<()> {
        check_dim("apply_stack rows", self.dim, x.nrows())?;
        if x.is_empty() {
            return Ok(());
        }
        if transposed {
            for b in &self.blocks {
                b.apply(x, true);
            }
        } else {
            for b in self.blocks.iter().rev() {
                b.apply(x, false);
            }
        }
        Ok(())
    }

    /// Dense `d x d` matrix of the product. Test and debugging aid only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.dim, self.dim);
        self.apply_matrix_in_place(&mut m, false)
            .expect("identity has matching rows");
        m
    }
}

/// `x <- (I - 2 v v^T) x`
#[inline]
pub(crate) fn reflect(v: &[f64], x: &mut [f64]) {
    let s = 2.0 * dot(v, x);
    if s != 0.0 {
        axpy(-s, v, x);
    }
}

/// Returns `(product) X` or, when `transposed`, `(product)^T X`.
pub fn apply_stack(
    stack: &HouseholderStack,
    x: &DMatrix<f64>,
    transposed: bool,
) -> Result<DMatrix<f64>> {
    let mut out = x.clone();
    stack.apply_matrix_in_place(&mut out, transposed)?;
    Ok(out)
}
