use nalgebra::DMatrix;

use super::householder::reflect;
use super::{dot, norm2};

/// Output of a (possibly early-terminated) Householder QR of a `p x q` matrix.
///
/// With `P` the column permutation given by `perm` (`perm[j]` is the original
/// index of the column placed at position `j`) and `Q = H_1 ... H_k` built from
/// `reflectors`, the first `k` rows of `Q^T M P` equal `r`.
#[derive(Clone, Debug)]
pub struct QrFactors {
    /// Full-length (`p`) unit reflection vectors, zero in their leading `j` entries.
    pub reflectors: Vec<Vec<f64>>,
    /// `k x q` upper-trapezoidal factor, columns in pivoted order.
    pub r: DMatrix<f64>,
    pub perm: Vec<usize>,
    /// Remaining column norm at each pivoting step, including the step that
    /// stopped the factorization (if any).
    pub pivots: Vec<f64>,
}

/// Householder QR with optional column pivoting.
///
/// Pivoting picks the column with the largest remaining 2-norm; ties go to
/// the lowest index. `stop(step, pivot_norm)` is consulted before each step
/// and ends the factorization when it returns true.
pub fn householder_qr(
    mut m: DMatrix<f64>,
    pivoting: bool,
    mut stop: impl FnMut(usize, f64) -> bool,
) -> QrFactors {
    let (p, q) = m.shape();
    let steps = p.min(q);
    let mut perm: Vec<usize> = (0..q).collect();
    let mut reflectors = Vec::with_capacity(steps);
    let mut pivots = Vec::with_capacity(steps);
    let mut diag = Vec::with_capacity(steps);

    for j in 0..steps {
        let mut best = j;
        let mut best_norm = norm2(&m.column(j).as_slice()[j..]);
        if pivoting {
            for c in j + 1..q {
                let n = norm2(&m.column(c).as_slice()[j..]);
                if n > best_norm {
                    best = c;
                    best_norm = n;
                }
            }
        }
        pivots.push(best_norm);
        if stop(j, best_norm) {
            break;
        }
        if best != j {
            m.swap_columns(j, best);
            perm.swap(j, best);
        }

        let (v, alpha) = make_reflector(&m.column(j).as_slice()[j..]);
        let mut full = vec![0.0; p];
        full[j..].copy_from_slice(&v);
        for c in j + 1..q {
            let col = &mut m.column_mut(c);
            reflect(&v, &mut col.as_mut_slice()[j..]);
        }
        diag.push(alpha);
        reflectors.push(full);
    }

    let k = reflectors.len();
    let mut r = DMatrix::zeros(k, q);
    for i in 0..k {
        r[(i, i)] = diag[i];
        for c in i + 1..q {
            r[(i, c)] = m[(i, c)];
        }
    }
    QrFactors {
        reflectors,
        r,
        perm,
        pivots,
    }
}

/// Unit `v` and `alpha` with `(I - 2 v v^T) x = alpha e_1`.
///
/// A zero `x` yields the zero vector (identity reflection) and `alpha = 0`.
pub(crate) fn make_reflector(x: &[f64]) -> (Vec<f64>, f64) {
    let n = norm2(x);
    if n == 0.0 {
        return (vec![0.0; x.len()], 0.0);
    }
    let alpha = if x[0] >= 0.0 { -n } else { n };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vn = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|e| *e /= vn);
    (v, alpha)
}

/// Column-pivoted QR `M P = Q R` of a block-scale matrix.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    /// `p x p` orthogonal factor.
    pub q: DMatrix<f64>,
    /// `p x q` upper-triangular factor with non-increasing `|diag|`.
    pub r: DMatrix<f64>,
    pub perm: Vec<usize>,
}

impl PivotedQr {
    /// Dense permutation matrix `P` such that `M P = Q R`.
    pub fn permutation_matrix(&self) -> DMatrix<f64> {
        let n = self.perm.len();
        let mut pm = DMatrix::zeros(n, n);
        for (j, &src) in self.perm.iter().enumerate() {
            pm[(src, j)] = 1.0;
        }
        pm
    }
}

pub fn qr_column_pivot(m: &DMatrix<f64>) -> PivotedQr {
    let (p, q) = m.shape();
    let f = householder_qr(m.clone(), true, |_, _| false);
    let mut qm = DMatrix::identity(p, p);
    if p == 0 {
        return PivotedQr {
            q: qm,
            r: DMatrix::zeros(0, q),
            perm: f.perm,
        };
    }
    for col in qm.as_mut_slice().chunks_exact_mut(p) {
        for v in f.reflectors.iter().rev() {
            reflect(v, col);
        }
    }
    let mut r = DMatrix::zeros(p, q);
    r.view_mut((0, 0), (f.r.nrows(), q)).copy_from(&f.r);
    PivotedQr {
        q: qm,
        r,
        perm: f.perm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthonormality_error(q: &DMatrix<f64>) -> f64 {
        let g = q.transpose() * q - DMatrix::identity(q.ncols(), q.ncols());
        g.abs().max()
    }

    fn check(m: &DMatrix<f64>) -> PivotedQr {
        let f = qr_column_pivot(m);
        let pm = f.permutation_matrix();
        let scale = m.norm().max(1.0);
        assert!((m * &pm - &f.q * &f.r).norm() / scale < 1e-12);
        assert!(orthonormality_error(&f.q) < 1e-12);
        for i in 0..f.r.nrows() {
            for j in 0..i.min(f.r.ncols()) {
                assert_eq!(f.r[(i, j)], 0.0);
            }
        }
        let k = m.nrows().min(m.ncols());
        for i in 1..k {
            assert!(f.r[(i, i)].abs() <= f.r[(i - 1, i - 1)].abs() * (1.0 + 1e-12) + 1e-14);
        }
        let mut seen = f.perm.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..m.ncols()).collect::<Vec<_>>());
        f
    }

    #[test]
    fn identity_factors_trivially() {
        let f = check(&DMatrix::identity(3, 3));
        assert_eq!(f.perm, vec![0, 1, 2]);
        for i in 0..3 {
            assert!((f.r[(i, i)].abs() - 1.0).abs() < 1e-15);
            assert!((f.q[(i, i)].abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_nonzero_column_pivots_first() {
        let mut m = DMatrix::zeros(4, 3);
        m[(0, 2)] = 3.0;
        m[(3, 2)] = 4.0;
        let f = check(&m);
        assert_eq!(f.perm[0], 2);
        assert!((f.r[(0, 0)].abs() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_gives_identity_permutation() {
        let f = check(&DMatrix::zeros(3, 4));
        assert_eq!(f.perm, vec![0, 1, 2, 3]);
        assert_eq!(f.r.norm(), 0.0);
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(qr_column_pivot(&m).perm, vec![0, 1]);
    }

    #[test]
    fn random_shapes_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(p, q) in &[(6, 4), (4, 6), (1, 3), (3, 1), (10, 10)] {
            let m = DMatrix::from_fn(p, q, |_, _| rng.random_range(-1.0..1.0));
            check(&m);
        }
    }

    #[test]
    fn early_stop_keeps_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = DMatrix::from_fn(8, 5, |_, _| rng.random_range(-1.0..1.0));
        let f = householder_qr(m, true, |step, _| step == 2);
        assert_eq!(f.reflectors.len(), 2);
        assert_eq!(f.r.nrows(), 2);
        assert_eq!(f.pivots.len(), 3);
    }
}
