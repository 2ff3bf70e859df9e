use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the basis is shrunk once its rank reaches `n_star`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Re-factor the stored background projections of recent frames.
    II,
    /// Truncate `U Σ` to its leading `ell` columns, then cap `‖σ‖` at `ρ`.
    III,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ii" | "2" => Ok(Strategy::II),
            "iii" | "3" => Ok(Strategy::III),
            other => Err(Error::InvalidArgument(format!(
                "unknown re-initialization strategy `{other}` (expected ii or iii)"
            ))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::II => "ii",
            Strategy::III => "iii",
        })
    }
}

/// Pipeline parameters. [`Params::default`] gives the reference setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Rank kept after (re-)initialization.
    pub ell: usize,
    /// Rank at which re-initialization is triggered.
    pub n_star: usize,
    /// System size: `ρ` is `sqrt(η)` times the RMS init-frame norm.
    pub eta: f64,
    /// `τ* = tau_star_factor · ρ`.
    pub tau_star_factor: f64,
    /// Frames per appended block.
    pub beta: usize,
    /// Partners per frame in the similarity check.
    pub nu: usize,
    /// Summed temporal distance of the partners.
    pub delta_t: usize,
    /// Frames whose mean similarity falls below this are not appended.
    pub s_bar: f64,
    pub similarity_check: bool,
    /// Binarization threshold in normalized intensity units.
    pub theta: f64,
    /// Forced update every `period` blocks; 0 disables.
    pub period: usize,
    pub strategy: Strategy,
    /// Background store size `μ` (strategy II).
    pub store_size: usize,
    /// Offer only every `update_stride`-th frame for a background update.
    pub update_stride: usize,
    pub morph_radius: usize,
    pub min_blob_area: usize,
    pub downsample_window: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            ell: 15,
            n_star: 30,
            eta: 30.0,
            tau_star_factor: 0.05,
            beta: 6,
            nu: 3,
            delta_t: 6,
            s_bar: 0.97,
            similarity_check: true,
            theta: 1.0,
            period: 10,
            strategy: Strategy::III,
            store_size: 30,
            update_stride: 1,
            morph_radius: 2,
            min_blob_area: 15,
            downsample_window: 1,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.ell == 0 {
            return fail("ell must be >= 1".into());
        }
        if self.ell > self.n_star {
            return fail(format!("ell ({}) must not exceed n_star ({})", self.ell, self.n_star));
        }
        if self.beta == 0 {
            return fail("beta must be >= 1".into());
        }
        if self.similarity_check {
            if self.nu == 0 || self.nu + 1 > self.beta {
                return fail(format!("nu ({}) must be in 1..=beta-1 ({})", self.nu, self.beta));
            }
            if self.delta_t < self.nu {
                return fail(format!("delta_t ({}) must be >= nu ({})", self.delta_t, self.nu));
            }
        }
        if !(self.eta > 0.0) {
            return fail(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.tau_star_factor >= 0.0) {
            return fail(format!("tau_star_factor must be >= 0, got {}", self.tau_star_factor));
        }
        if !(self.theta >= 0.0) {
            return fail(format!("theta must be >= 0, got {}", self.theta));
        }
        if self.update_stride == 0 {
            return fail("update stride must be >= 1".into());
        }
        if self.downsample_window == 0 {
            return fail("downsample window must be >= 1".into());
        }
        if self.strategy == Strategy::II && self.store_size == 0 {
            return fail("store size must be >= 1 for strategy ii".into());
        }
        Ok(())
    }
}

/// Whether the block with 1-based counter `block` is a forced update.
pub fn forced_update_due(block: usize, period: usize) -> bool {
    period > 0 && block > 0 && block % period == 0
}
