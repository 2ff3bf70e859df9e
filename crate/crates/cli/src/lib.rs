//! Command-line driver for the adaptive-SVD background subtraction pipeline.

pub mod config;
pub mod eval;
pub mod run;
pub mod timing;

use std::path::Path;

use adasvd::{morph_close, remove_small_blobs, Mask, Params};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::ParamArgs;
pub use eval::{cmd_eval, EvalArgs, EvalReport};
pub use run::{cmd_run, RunArgs, RunSummary};
pub use timing::{cmd_timing, format_table, timing_rows, TimingArgs, TimingRow};

#[derive(Debug, Parser)]
#[command(name = "adasvd", version, about = "Background subtraction with an adaptive SVD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a directory of frames and write per-frame masks.
    Run(RunArgs),
    /// Score a CDnet sequence against its ground truth.
    Eval(EvalArgs),
    /// Summed update and re-initialization time at several image sizes.
    Timing(TimingArgs),
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(&args).map(|_| ()),
        Command::Eval(args) => cmd_eval(&args).map(|_| ()),
        Command::Timing(args) => cmd_timing(&args).map(|_| ()),
    }
}

/// Morphological closing followed by small-blob removal.
pub fn postprocess(mask: &Mask, params: &Params) -> Mask {
    remove_small_blobs(&morph_close(mask, params.morph_radius), params.min_blob_area)
}

/// CDnet-style output file name for the 1-based frame `index`.
pub fn mask_file_name(index: usize) -> String {
    format!("bin{index:06}.png")
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
