use std::fmt::Write as _;
use std::path::PathBuf;

use adasvd::synthetic::Scene;
use adasvd::{read_sequence, resize_nearest, BackgroundModel, FrameSource, Params, RawImage};
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use crate::ParamArgs;

#[derive(Debug, Clone, Args)]
pub struct TimingArgs {
    /// Directory of frames; a seeded synthetic scene is used when absent.
    /// Short sequences are replayed from the start.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Synthetic scene width.
    #[arg(long, default_value_t = 640)]
    pub width: usize,
    /// Synthetic scene height.
    #[arg(long, default_value_t = 480)]
    pub height: usize,
    /// Pixel-count divisors; each size has `1/sqrt(i)` of the side lengths.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub sizes: Vec<usize>,
    /// Frames offered for a background update per size.
    #[arg(long, default_value_t = 900)]
    pub frames: usize,
    /// Leading frames used to build the initial basis at each size.
    #[arg(long = "init-count", default_value_t = 15)]
    pub init_count: usize,
    /// Text table output.
    #[arg(long = "out-timing")]
    pub out_timing: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub divisor: usize,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub append_seconds: f64,
    pub reinit_seconds: f64,
    /// `t(d/i) / (t(d/i_max) · i_max / i)`: 1 means exactly linear in the pixel count.
    pub factor: f64,
    pub accepted: usize,
    pub reinits: usize,
}

/// Side lengths for a pixel count of `d / divisor`.
pub fn scaled_dims(width: usize, height: usize, divisor: usize) -> (usize, usize) {
    let s = (divisor as f64).sqrt();
    (
        ((width as f64 / s).round() as usize).max(1),
        ((height as f64 / s).round() as usize).max(1),
    )
}

/// Runs the model once per size until `offered` frames were offered for an
/// update, summing the time spent in appends and re-initializations.
///
/// `frame(t)` returns the full-size frame `t`; it is resized per row.
pub fn timing_rows(
    frame: &dyn Fn(usize) -> Result<RawImage>,
    sizes: &[usize],
    offered: usize,
    init_count: usize,
    params: &Params,
) -> Result<Vec<TimingRow>> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() || sizes[0] == 0 {
        bail!("sizes must be positive divisors");
    }
    let first = frame(0)?;
    let mut rows = Vec::with_capacity(sizes.len());
    for &divisor in &sizes {
        let (w, h) = scaled_dims(first.width, first.height, divisor);
        let get = |t: usize| -> Result<Vec<f64>> { Ok(resize_nearest(&frame(t)?, w, h)?.pixels) };
        let init = (0..init_count).map(get).collect::<Result<Vec<_>>>()?;
        let mut model = BackgroundModel::initialize(&init, w, h, params.clone())
            .with_context(|| format!("initializing at {w}x{h}"))?;
        let mut t = init_count;
        while model.stats().offered < offered {
            model.step(&get(t)?)?;
            t += 1;
        }
        let s = model.stats();
        rows.push(TimingRow {
            divisor,
            width: w,
            height: h,
            frames: s.frames,
            append_seconds: s.append_seconds,
            reinit_seconds: s.reinit_seconds,
            factor: 0.0,
            accepted: s.accepted,
            reinits: s.reinits,
        });
    }
    let reference = rows.last().expect("at least one size").clone();
    for row in &mut rows {
        let linear = reference.append_seconds * reference.divisor as f64 / row.divisor as f64;
        row.factor = if linear > 0.0 { row.append_seconds / linear } else { 0.0 };
    }
    Ok(rows)
}

pub fn format_table(rows: &[TimingRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6} {:>11} {:>8} {:>12} {:>12} {:>8}",
        "size", "resolution", "frames", "append [s]", "re-init [s]", "factor"
    );
    for r in rows {
        let label = if r.divisor == 1 { "d".to_string() } else { format!("d/{}", r.divisor) };
        let _ = writeln!(
            out,
            "{:>6} {:>11} {:>8} {:>12.3} {:>12.3} {:>8.2}",
            label,
            format!("{}x{}", r.width, r.height),
            r.frames,
            r.append_seconds,
            r.reinit_seconds,
            r.factor
        );
    }
    out
}

pub fn cmd_timing(args: &TimingArgs) -> Result<Vec<TimingRow>> {
    let params = args.params.resolve()?;
    let rows = match &args.input {
        Some(dir) => {
            let frames = read_sequence(&FrameSource {
                dir: dir.clone(),
                stride: 1,
                downsample_window: params.downsample_window,
            })?;
            if frames.is_empty() {
                bail!("no frames found in {}", dir.display());
            }
            let n = frames.len();
            let get = |t: usize| Ok(frames[t % n].clone());
            timing_rows(&get, &args.sizes, args.frames, args.init_count, &params)?
        }
        None => {
            let gen = Scene::moving_square(args.width, args.height, 1).generator();
            let get = |t: usize| Ok(RawImage::new(args.width, args.height, gen.frame(t))?);
            timing_rows(&get, &args.sizes, args.frames, args.init_count, &params)?
        }
    };
    let table = format_table(&rows);
    print!("{table}");
    if let Some(path) = &args.out_timing {
        std::fs::write(path, &table).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rows)
}
