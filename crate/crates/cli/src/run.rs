use std::path::PathBuf;
use std::time::Instant;

use adasvd::{read_sequence, write_intensities, write_mask, BackgroundModel, FrameSource, Params, RawImage};
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use crate::{ensure_dir, mask_file_name, postprocess, write_json, ParamArgs};

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Directory of input frames, read in file-name order.
    #[arg(long)]
    pub input: PathBuf,
    /// Leading frames of the input used to build the initial basis.
    #[arg(long = "init-count", default_value_t = 15)]
    pub init_count: usize,
    /// Separate directory of initialization frames (replaces `--init-count`).
    #[arg(long = "init-dir")]
    pub init_dir: Option<PathBuf>,
    /// Read only every N-th input file.
    #[arg(long = "read-stride", default_value_t = 1)]
    pub read_stride: usize,
    /// Directory for binary masks (`binNNNNNN.png`).
    #[arg(long = "out-masks")]
    pub out_masks: Option<PathBuf>,
    /// Directory for foreground images (masked input intensities).
    #[arg(long = "out-foreground")]
    pub out_foreground: Option<PathBuf>,
    /// Directory for background estimates.
    #[arg(long = "out-background")]
    pub out_background: Option<PathBuf>,
    /// JSON run summary.
    #[arg(long = "out-summary")]
    pub out_summary: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub input: PathBuf,
    pub width: usize,
    pub height: usize,
    pub init_frames: usize,
    pub frames: usize,
    pub offered: usize,
    pub accepted: usize,
    pub rejected_tau: usize,
    pub rejected_similarity: usize,
    pub degenerate: usize,
    /// Offered frames still waiting for a full block when the input ended.
    pub pending: usize,
    pub blocks: usize,
    pub forced_updates: usize,
    pub reinits: usize,
    pub final_rank: usize,
    pub append_seconds: f64,
    pub reinit_seconds: f64,
    pub seconds: f64,
    pub fps: f64,
    pub params: Params,
}

pub fn cmd_run(args: &RunArgs) -> Result<RunSummary> {
    let params = args.params.resolve()?;
    let source = FrameSource {
        dir: args.input.clone(),
        stride: args.read_stride,
        downsample_window: params.downsample_window,
    };
    if !args.input.is_dir() {
        bail!("input directory {} does not exist", args.input.display());
    }
    let files = source.files()?;
    if files.is_empty() {
        bail!("no frames found in {}", args.input.display());
    }
    let mut frames = source.frames()?;

    let mut buffered: Vec<RawImage> = Vec::new();
    let init: Vec<RawImage> = match &args.init_dir {
        Some(dir) => read_sequence(&FrameSource {
            dir: dir.clone(),
            stride: 1,
            downsample_window: params.downsample_window,
        })?,
        None => {
            for f in frames.by_ref().take(args.init_count.max(1)) {
                buffered.push(f?);
            }
            buffered.clone()
        }
    };
    if init.is_empty() {
        bail!("no initialization frames");
    }
    if init.len() < args.init_count && args.init_dir.is_none() {
        log::warn!("only {} frames available for initialization", init.len());
    }
    let (width, height) = (init[0].width, init[0].height);
    let init_pixels: Vec<Vec<f64>> = init.iter().map(|f| f.pixels.clone()).collect();
    let mut model = BackgroundModel::initialize(&init_pixels, width, height, params.clone())
        .context("initializing the background model")?;
    log::info!(
        "initialized from {} frames of {width}x{height}: rank {}, background rank {}",
        init.len(),
        model.basis().rank(),
        model.basis().i_hat()
    );

    for dir in [&args.out_masks, &args.out_foreground, &args.out_background]
        .into_iter()
        .flatten()
    {
        ensure_dir(dir)?;
    }

    let start = Instant::now();
    let mut index = 0;
    for frame in buffered.into_iter().map(Ok).chain(frames) {
        let frame = frame?;
        if (frame.width, frame.height) != (width, height) {
            bail!(
                "frame {} is {}x{}, initialization frames are {width}x{height}",
                index + 1,
                frame.width,
                frame.height
            );
        }
        index += 1;
        let out = model.step(&frame.pixels)?;
        if let Some(dir) = &args.out_masks {
            write_mask(&dir.join(mask_file_name(index)), &postprocess(&out.mask, &params))?;
        }
        if let Some(dir) = &args.out_foreground {
            let path = dir.join(format!("fg{index:06}.png"));
            write_intensities(&path, width, height, &out.foreground)?;
        }
        if let Some(dir) = &args.out_background {
            let path = dir.join(format!("bg{index:06}.png"));
            write_intensities(&path, width, height, &out.background)?;
        }
    }
    let seconds = start.elapsed().as_secs_f64();

    let s = model.stats();
    let summary = RunSummary {
        input: args.input.clone(),
        width,
        height,
        init_frames: init.len(),
        frames: s.frames,
        offered: s.offered,
        accepted: s.accepted,
        rejected_tau: s.rejected_tau,
        rejected_similarity: s.rejected_similarity,
        degenerate: s.degenerate,
        pending: model.pending_len(),
        blocks: s.blocks,
        forced_updates: s.forced_updates,
        reinits: s.reinits,
        final_rank: model.basis().rank(),
        append_seconds: s.append_seconds,
        reinit_seconds: s.reinit_seconds,
        seconds,
        fps: if seconds > 0.0 { s.frames as f64 / seconds } else { 0.0 },
        params,
    };
    println!(
        "{} frames ({} offered: {} accepted, {} below tau, {} dissimilar, {} degenerate, {} pending), \
         {} re-initializations, {:.1} fps",
        summary.frames,
        summary.offered,
        summary.accepted,
        summary.rejected_tau,
        summary.rejected_similarity,
        summary.degenerate,
        summary.pending,
        summary.reinits,
        summary.fps
    );
    if let Some(path) = &args.out_summary {
        write_json(path, &summary)?;
    }
    Ok(summary)
}
