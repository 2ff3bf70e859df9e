//! Streaming background subtraction for static cameras.
//!
//! The background is modelled as a low-rank subspace of the image space,
//! tracked by an incrementally updated and thresholded singular value
//! decomposition. Each incoming frame is projected onto the leading singular
//! vectors; pixels far from their projection form the foreground mask.
//!
//! * [`linalg`]: Householder stacks, pivoted QR, dense SVD.
//! * [`adaptive`]: the incremental SVD (`svd_comp`, `svd_append`, re-initialization).
//! * [`model`]: the per-frame pipeline driving the SVD.
//! * [`io`]: frame decoding, grayscale conversion, downsampling, CDnet layout.
//! * [`postprocess`] and [`metrics`]: mask cleanup and benchmark scores.
//! * [`synthetic`]: seeded test scenes with exact ground truth.

pub mod adaptive;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod postprocess;
pub mod synthetic;

pub use adaptive::{
    compute_rho, normalize_sigma, reinit_ii, reinit_iii, svd_append, svd_append_with, svd_comp,
    threshold_index, AppendConfig, AppendReport, FactoredBasis,
};
pub use error::{Error, Result};

pub use io::{
    downsample, load_image, load_labels, read_sequence, resize_nearest, to_grayscale, write_intensities, write_mask,
    CdnetSequence, FrameSource, RawImage,
};
pub use metrics::{accumulate_confusion, metrics, ConfusionCounts, MetricsReport};
pub use model::{
    forced_update_due, mean_similarity, normalize_frame, select_partners, similarity,
    BackgroundModel, Frame, ModelStats, Params, StepOutput, Strategy,
};
pub use postprocess::{morph_close, remove_small_blobs, Mask};
