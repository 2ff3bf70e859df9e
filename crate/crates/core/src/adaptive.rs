//! Incremental, thresholded SVD of a column-augmented matrix.
//!
//! The left factor of `A_k = U_k Σ_k V_k^T` is kept as a Householder stack of
//! length `r` plus a small `r x r` orthogonal matrix:
//!
//! ```text
//! U_k = (H_1 ... H_r) · [ Ũ_k ]
//!                       [  0  ]
//! ```
//!
//! `V_k` is never formed. Appending a block `B` costs `O(d m (r + m))` flops:
//! the block is rotated into the stack's coordinates, its component outside
//! `span(U_k)` is reduced by a column-pivoted QR whose pivots are compared to
//! the significance level `τ`, and the small middle matrix
//!
//! ```text
//! [ Σ_k  Z_top P ]
//! [  0     R_k   ]
//! ```
//!
//! is diagonalized densely. Accepted QR reflections are appended to the stack.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dense_svd, householder_qr, HouseholderStack};

/// Residual pivots at or below this fraction of the block's largest column
/// norm are treated as lying in the span of the current basis.
pub const DEGENERATE_RTOL: f64 = 1e-10;

/// Low-rank model of the column space seen so far.
#[derive(Clone, Debug)]
pub struct FactoredBasis {
    dim: usize,
    house: HouseholderStack,
    u_small: DMatrix<f64>,
    sigma: Vec<f64>,
    i_hat: usize,
}

impl FactoredBasis {
    /// Rank-zero basis over `R^dim`.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            house: HouseholderStack::new(dim),
            u_small: DMatrix::zeros(0, 0),
            sigma: Vec::new(),
            i_hat: 0,
        }
    }

    /// Assembles a basis from its parts, checking shapes and ordering.
    pub fn from_parts(
        house: HouseholderStack,
        u_small: DMatrix<f64>,
        sigma: Vec<f64>,
        i_hat: usize,
    ) -> Result<Self> {
        let r = house.len();
        check_dim("u_small rows", r, u_small.nrows())?;
        check_dim("u_small cols", r, u_small.ncols())?;
        check_dim("sigma length", r, sigma.len())?;
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0)
            || sigma.windows(2).any(|w| w[0] < w[1])
        {
            return Err(Error::InvalidArgument(
                "singular values must be finite, non-negative and non-increasing".into(),
            ));
        }
        if i_hat > r || (r > 0 && i_hat == 0) {
            return Err(Error::InvalidArgument(format!(
                "threshold index {i_hat} outside 1..={r}"
            )));
        }
        Ok(Self {
            dim: house.dim(),
            house,
            u_small,
            sigma,
            i_hat,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Number of leading singular vectors treated as background (`î`).
    pub fn i_hat(&self) -> usize {
        self.i_hat
    }

    pub fn householder(&self) -> &HouseholderStack {
        &self.house
    }

    pub fn u_small(&self) -> &DMatrix<f64> {
        &self.u_small
    }

    /// `sqrt(Σ σ_i²)`
    pub fn sigma_norm(&self) -> f64 {
        self.sigma.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Replaces `î`, clamped to `1..=rank` (or 0 for an empty basis).
    pub fn with_i_hat(mut self, i_hat: usize) -> Self {
        self.i_hat = i_hat.clamp(self.rank().min(1), self.rank());
        self
    }

    /// Materializes the first `count` columns of `U` as a `d x count` matrix.
    pub fn left_vectors(&self, count: usize) -> DMatrix<f64> {
        let r = self.rank();
        let count = count.min(r);
        let mut u = DMatrix::zeros(self.dim, count);
        u.view_mut((0, 0), (r, count))
            .copy_from(&self.u_small.columns(0, count));
        self.house
            .apply_matrix_in_place(&mut u, false)
            .expect("shape matches stack");
        u
    }

    /// `U[:, :count]^T x`
    pub fn coefficients(&self, x: &[f64], count: usize) -> Result<Vec<f64>> {
        check_dim("coefficients", self.dim, x.len())?;
        let count = count.min(self.rank());
        let mut y = x.to_vec();
        self.house.apply_in_place(&mut y, true);
        Ok(self.leading_coefficients(&y, count))
    }

    fn leading_coefficients(&self, rotated: &[f64], count: usize) -> Vec<f64> {
        let r = self.rank();
        (0..count)
            .map(|c| {
                let col = self.u_small.column(c);
                (0..r).map(|i| col[i] * rotated[i]).sum()
            })
            .collect()
    }

    /// Orthogonal projection `U[:, :count] (U[:, :count]^T x)`.
    pub fn project(&self, x: &[f64], count: usize) -> Result<Vec<f64>> {
        check_dim("project", self.dim, x.len())?;
        let count = count.min(self.rank());
        let mut y = x.to_vec();
        self.house.apply_in_place(&mut y, true);
        let c = self.leading_coefficients(&y, count);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (k, ck) in c.iter().enumerate() {
            let col = self.u_small.column(k);
            for i in 0..self.rank() {
                y[i] += col[i] * ck;
            }
        }
        self.house.apply_in_place(&mut y, false);
        Ok(y)
    }

    /// Projection onto the `î` leading directions.
    pub fn project_background(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.project(x, self.i_hat)
    }
}

/// Outcome of one block append.
#[derive(Clone, Debug, PartialEq)]
pub struct AppendReport {
    /// Number of new directions added to the basis.
    pub accepted: usize,
    /// Block columns whose residual did not become a new direction.
    pub rejected_frames: Vec<usize>,
    /// Significance level the residual pivots were compared against.
    pub tau: f64,
    /// Residual pivot norms in pivoting order; one past `accepted` when a
    /// column was turned away.
    pub pivots: Vec<f64>,
}

/// Knobs for [`svd_append_with`].
#[derive(Clone, Copy, Debug)]
pub struct AppendConfig {
    /// Slope threshold for `î`. Non-positive disables the significance gate.
    pub tau_star: f64,
    /// Rank never grows beyond this.
    pub max_rank: usize,
    /// Accept every non-degenerate residual direction (periodic update).
    pub force: bool,
}

impl AppendConfig {
    pub fn new(tau_star: f64) -> Self {
        Self {
            tau_star,
            max_rank: usize::MAX,
            force: false,
        }
    }
}

/// `î = min{i : σ_i − σ_{i+1} < τ*}` (1-based) and `τ = σ_î`.
///
/// Falls back to `î = r` when no gap is below `τ*`. Returns `(0, 0.0)` for
/// an empty spectrum.
pub fn threshold_index(sigma: &[f64], tau_star: f64) -> (usize, f64) {
    let r = sigma.len();
    if r == 0 {
        return (0, 0.0);
    }
    for i in 0..r - 1 {
        if sigma[i] - sigma[i + 1] < tau_star {
            return (i + 1, sigma[i]);
        }
    }
    (r, sigma[r - 1])
}

/// Initial factorization: best rank-`ell` approximation of `a`.
pub fn svd_comp(a: &DMatrix<f64>, ell: usize, tau_star: f64) -> Result<FactoredBasis> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Empty("initialization matrix"));
    }
    if ell == 0 {
        return Err(Error::InvalidArgument("rank cap ell must be >= 1".into()));
    }
    let cfg = AppendConfig {
        tau_star: 0.0,
        max_rank: usize::MAX,
        force: true,
    };
    let (full, _) = svd_append_with(&FactoredBasis::empty(a.nrows()), a, &cfg)?;
    let truncated = reinit_iii(&full, ell);
    let i_hat = threshold_index(&truncated.sigma, tau_star).0;
    Ok(truncated.with_i_hat(i_hat))
}

/// Appends a block with the significance level derived from `tau_star`.
pub fn svd_append(
    basis: &FactoredBasis,
    block: &DMatrix<f64>,
    tau_star: f64,
) -> Result<(FactoredBasis, AppendReport)> {
    svd_append_with(basis, block, &AppendConfig::new(tau_star))
}

pub fn svd_append_with(
    basis: &FactoredBasis,
    block: &DMatrix<f64>,
    cfg: &AppendConfig,
) -> Result<(FactoredBasis, AppendReport)> {
    let d = basis.dim;
    check_dim("appended block rows", d, block.nrows())?;
    let m = block.ncols();
    if m == 0 {
        return Err(Error::Empty("appended block"));
    }
    let r = basis.rank();
    if r + m > d {
        return Err(Error::InvalidArgument(format!(
            "rank {r} plus block width {m} exceeds dimension {d}"
        )));
    }

    let tau = if cfg.force || cfg.tau_star <= 0.0 || r == 0 {
        0.0
    } else {
        threshold_index(&basis.sigma, cfg.tau_star).1
    };

    // Rotate the block into the coordinates of the stack: Y = (H_1..H_r)^T B.
    let mut y = block.clone();
    basis.house.apply_matrix_in_place(&mut y, true)?;
    let z_top = basis.u_small.transpose() * y.rows(0, r);
    let mut z_bot = DMatrix::zeros(d - r, m);
    if d > r {
        for (dst, src) in z_bot
            .as_mut_slice()
            .chunks_exact_mut(d - r)
            .zip(y.as_slice().chunks_exact(d))
        {
            dst.copy_from_slice(&src[r..]);
        }
    }

    let largest = block
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    let degenerate = DEGENERATE_RTOL * largest;
    let room = cfg.max_rank.saturating_sub(r);
    let qr = householder_qr(z_bot, true, |step, pivot| {
        step >= room || pivot <= degenerate || pivot < tau
    });
    let k = qr.reflectors.len();

    let mut middle = DMatrix::zeros(r + k, r + m);
    for (i, s) in basis.sigma.iter().enumerate() {
        middle[(i, i)] = *s;
    }
    for (j, &src) in qr.perm.iter().enumerate() {
        middle
            .view_mut((0, r + j), (r, 1))
            .copy_from(&z_top.column(src));
    }
    middle.view_mut((r, r), (k, m)).copy_from(&qr.r);

    let svd = dense_svd(&middle, false);

    let mut lifted = DMatrix::identity(r + k, r + k);
    lifted.view_mut((0, 0), (r, r)).copy_from(&basis.u_small);
    let u_small = lifted * svd.u;

    let mut house = basis.house.clone();
    house.push_block(
        qr.reflectors
            .into_iter()
            .map(|v| {
                let mut full = vec![0.0; d];
                full[r..].copy_from_slice(&v);
                full
            })
            .collect(),
    );

    let sigma: Vec<f64> = svd.sigma.iter().map(|s| s.max(0.0)).collect();
    let i_hat = threshold_index(&sigma, cfg.tau_star).0;
    let mut rejected_frames: Vec<usize> = qr.perm[k..].to_vec();
    rejected_frames.sort_unstable();

    Ok((
        FactoredBasis {
            dim: d,
            house,
            u_small,
            sigma,
            i_hat,
        },
        AppendReport {
            accepted: k,
            rejected_frames,
            tau,
            pivots: qr.pivots,
        },
    ))
}

/// Truncates to the leading `ell` singular triplets and rebuilds a stack of
/// length `ell`. Singular values are copied, never recomputed.
pub fn reinit_iii(basis: &FactoredBasis, ell: usize) -> FactoredBasis {
    if ell >= basis.rank() {
        return basis.clone();
    }
    if ell == 0 {
        return FactoredBasis::empty(basis.dim);
    }
    let u = basis.left_vectors(ell);
    let qr = householder_qr(u, false, |_, _| false);
    let mut house = HouseholderStack::new(basis.dim);
    house.push_block(qr.reflectors);
    FactoredBasis {
        dim: basis.dim,
        house,
        u_small: qr.r,
        sigma: basis.sigma[..ell].to_vec(),
        i_hat: basis.i_hat.min(ell),
    }
}

/// Re-initialization from stored background projections (columns of `store`).
pub fn reinit_ii(store: &DMatrix<f64>, ell: usize, tau_star: f64) -> Result<FactoredBasis> {
    if store.ncols() == 0 {
        return Err(Error::Empty("background store"));
    }
    svd_comp(store, ell, tau_star)
}

/// `ρ = ‖A‖_F / sqrt(n) · sqrt(η)`
pub fn compute_rho(a: &DMatrix<f64>, eta: f64) -> Result<f64> {
    if a.ncols() == 0 {
        return Err(Error::Empty("initialization matrix"));
    }
    Ok(a.norm() / (a.ncols() as f64).sqrt() * eta.sqrt())
}

/// Scales the singular values down so that `‖σ‖₂ <= rho`.
pub fn normalize_sigma(basis: &FactoredBasis, rho: f64) -> Result<FactoredBasis> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "normalization bound must be positive, got {rho}"
        )));
    }
    let norm = basis.sigma_norm();
    let mut out = basis.clone();
    if norm > rho {
        let scale = rho / norm;
        out.sigma.iter_mut().for_each(|s| *s *= scale);
    }
    Ok(out)
}
