//! Per-frame background subtraction driven by the adaptive SVD.
//!
//! Every frame is normalized, projected onto the current background
//! subspace and thresholded. Frames are then buffered into blocks; each full
//! block passes a similarity gate and is appended to the basis. The basis is
//! re-initialized whenever its rank reaches `n_star`.

mod frame;
mod params;
mod similarity;

use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::adaptive::{
    compute_rho, normalize_sigma, reinit_ii, reinit_iii, svd_append_with, svd_comp,
    threshold_index, AppendConfig, AppendReport, FactoredBasis,
};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot};
use crate::postprocess::Mask;

pub use frame::{normalize_frame, Frame};
pub use params::{forced_update_due, Params, Strategy};
pub use similarity::{mean_similarity, select_partners, similarity};

/// Running counters. Every frame offered for an update ends up in exactly
/// one of `accepted`, `rejected_tau`, `rejected_similarity`, `degenerate`,
/// or is still pending.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModelStats {
    pub frames: usize,
    pub offered: usize,
    pub accepted: usize,
    pub rejected_tau: usize,
    pub rejected_similarity: usize,
    pub degenerate: usize,
    pub blocks: usize,
    pub forced_updates: usize,
    pub reinits: usize,
    pub append_seconds: f64,
    pub reinit_seconds: f64,
}

/// Result of processing one frame.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub mask: Mask,
    /// Raw input intensities where the mask is set, zero elsewhere.
    pub foreground: Vec<f64>,
    /// Background projection mapped back to raw intensities.
    pub background: Vec<f64>,
    /// `|B - J|` in normalized units.
    pub residual: Vec<f64>,
    /// Append report when this frame completed a block that reached the SVD.
    pub append: Option<AppendReport>,
    pub reinitialized: bool,
}

/// Background model state for a single camera stream.
#[derive(Clone)]
pub struct BackgroundModel {
    width: usize,
    height: usize,
    params: Params,
    basis: FactoredBasis,
    /// `U[:, :î]`, refreshed whenever the basis changes.
    background_vectors: DMatrix<f64>,
    rho: f64,
    tau_star: f64,
    /// Frames offered for the next block and their background projections.
    pending: Vec<Frame>,
    pending_backgrounds: Vec<Vec<f64>>,
    store: VecDeque<Vec<f64>>,
    frames_seen: usize,
    stats: ModelStats,
}

impl BackgroundModel {
    /// Builds the initial basis from raw initialization frames.
    pub fn initialize(
        init: &[Vec<f64>],
        width: usize,
        height: usize,
        params: Params,
    ) -> Result<Self> {
        params.validate()?;
        let d = width * height;
        let mut columns = Vec::with_capacity(init.len());
        for (i, raw) in init.iter().enumerate() {
            let f = normalize_frame(raw, width, height, i)?;
            if f.degenerate {
                log::warn!("initialization frame {i} is constant, skipped");
                continue;
            }
            columns.push(f.pixels);
        }
        if columns.is_empty() {
            return Err(Error::Empty("initialization frames"));
        }
        let a = DMatrix::from_fn(d, columns.len(), |r, c| columns[c][r]);
        let rho = compute_rho(&a, params.eta)?;
        let tau_star = params.tau_star_factor * rho;
        let mut basis = svd_comp(&a, params.ell, tau_star)?;
        if basis.rank() < params.ell {
            log::warn!(
                "initialization matrix has rank {} < ell = {}; continuing with the lower rank",
                basis.rank(),
                params.ell
            );
        }
        if params.strategy == Strategy::III {
            basis = normalize_sigma(&basis, rho)?;
        }
        let mut store = VecDeque::with_capacity(params.store_size);
        if params.strategy == Strategy::II {
            for col in columns.iter().rev().take(params.store_size).rev() {
                store.push_back(basis.project_background(col)?);
            }
        }
        Ok(Self {
            width,
            height,
            params,
            background_vectors: basis.left_vectors(basis.i_hat()),
            basis,
            rho,
            tau_star,
            pending: Vec::new(),
            pending_backgrounds: Vec::new(),
            store,
            frames_seen: 0,
            stats: ModelStats::default(),
        })
    }

    pub fn basis(&self) -> &FactoredBasis {
        &self.basis
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Absolute slope threshold `τ*`.
    pub fn tau_star(&self) -> f64 {
        self.tau_star
    }

    pub fn stats(&self) -> &ModelStats {
        &self.stats
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn store_len(&self) -> usize {
        self.store.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Masks `raw` against the current basis, then feeds it to the update path.
    pub fn step(&mut self, raw: &[f64]) -> Result<StepOutput> {
        let d = self.width * self.height;
        check_dim("frame pixels", d, raw.len())?;
        let index = self.frames_seen;
        self.frames_seen += 1;
        self.stats.frames += 1;
        let offered = index % self.params.update_stride == 0;

        let frame = normalize_frame(raw, self.width, self.height, index)?;
        if frame.degenerate {
            if offered {
                self.stats.offered += 1;
                self.stats.degenerate += 1;
            }
            return Ok(StepOutput {
                mask: Mask::new(self.width, self.height),
                foreground: vec![0.0; d],
                background: raw.to_vec(),
                residual: vec![0.0; d],
                append: None,
                reinitialized: false,
            });
        }

        let projection = self.project(&frame.pixels);
        let residual: Vec<f64> = frame
            .pixels
            .iter()
            .zip(&projection)
            .map(|(b, j)| (b - j).abs())
            .collect();
        let mask = Mask::from_vec(
            self.width,
            self.height,
            residual.iter().map(|&r| r > self.params.theta).collect(),
        )?;
        let foreground = raw
            .iter()
            .zip(mask.as_slice())
            .map(|(&v, &m)| if m { v } else { 0.0 })
            .collect();
        let background = projection.iter().map(|&j| frame.denormalize(j)).collect();

        let mut out = StepOutput {
            mask,
            foreground,
            background,
            residual,
            append: None,
            reinitialized: false,
        };
        if offered {
            self.stats.offered += 1;
            self.pending.push(frame);
            self.pending_backgrounds.push(projection);
            if self.pending.len() == self.params.beta {
                let (append, reinit) = self.process_block()?;
                out.append = append;
                out.reinitialized = reinit;
            }
        }
        Ok(out)
    }

    /// Background estimate `U_î U_îᵀ x` of a normalized frame.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let u = &self.background_vectors;
        let coeffs: Vec<f64> = u.column_iter().map(|c| dot(c.as_slice(), x)).collect();
        let mut out = vec![0.0; x.len()];
        for (c, &k) in u.column_iter().zip(&coeffs) {
            axpy(k, c.as_slice(), &mut out);
        }
        out
    }

    fn set_basis(&mut self, basis: FactoredBasis) {
        self.background_vectors = basis.left_vectors(basis.i_hat());
        self.basis = basis;
    }

    fn process_block(&mut self) -> Result<(Option<AppendReport>, bool)> {
        let frames = std::mem::take(&mut self.pending);
        let backgrounds = std::mem::take(&mut self.pending_backgrounds);
        self.stats.blocks += 1;
        let forced = forced_update_due(self.stats.blocks, self.params.period);

        let mut keep = vec![true; frames.len()];
        if self.params.similarity_check {
            for (i, k) in keep.iter_mut().enumerate() {
                *k = mean_similarity(&frames, i, self.params.nu, self.params.delta_t)?
                    >= self.params.s_bar;
            }
        }
        let survivors: Vec<Frame> = frames
            .into_iter()
            .zip(&keep)
            .filter_map(|(f, &k)| k.then_some(f))
            .collect();
        self.stats.rejected_similarity += self.params.beta - survivors.len();
        if survivors.is_empty() {
            return Ok((None, false));
        }

        if self.params.strategy == Strategy::II {
            for (bg, _) in backgrounds.into_iter().zip(&keep).filter(|(_, &k)| k) {
                if self.store.len() == self.params.store_size {
                    self.store.pop_front();
                }
                self.store.push_back(bg);
            }
        }

        let d = self.width * self.height;
        let b = DMatrix::from_fn(d, survivors.len(), |r, c| survivors[c].pixels[r]);
        let cfg = AppendConfig {
            tau_star: self.tau_star,
            max_rank: self.params.n_star,
            force: forced,
        };
        let t0 = Instant::now();
        let (basis, report) = svd_append_with(&self.basis, &b, &cfg)?;
        self.stats.append_seconds += t0.elapsed().as_secs_f64();
        self.set_basis(basis);
        self.stats.rejected_tau += report.rejected_frames.len();
        self.stats.accepted += survivors.len() - report.rejected_frames.len();
        if forced {
            self.stats.forced_updates += 1;
        }

        let mut reinit = false;
        if self.basis.rank() >= self.params.n_star {
            self.reinitialize()?;
            reinit = true;
        }
        Ok((Some(report), reinit))
    }

    fn reinitialize(&mut self) -> Result<()> {
        let t0 = Instant::now();
        let ell = self.params.ell;
        let basis = match self.params.strategy {
            Strategy::III => {
                let b = normalize_sigma(&reinit_iii(&self.basis, ell), self.rho)?;
                let i_hat = threshold_index(b.sigma(), self.tau_star).0;
                b.with_i_hat(i_hat)
            }
            Strategy::II => {
                if self.store.is_empty() {
                    reinit_iii(&self.basis, ell)
                } else {
                    let d = self.width * self.height;
                    let m = DMatrix::from_fn(d, self.store.len(), |r, c| self.store[c][r]);
                    reinit_ii(&m, ell, self.tau_star)?
                }
            }
        };
        self.set_basis(basis);
        self.stats.reinits += 1;
        self.stats.reinit_seconds += t0.elapsed().as_secs_f64();
        Ok(())
    }
}
