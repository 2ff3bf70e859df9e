use std::path::PathBuf;
use std::time::Instant;

use adasvd::{
    accumulate_confusion, load_labels, metrics, write_mask, BackgroundModel, CdnetSequence,
    ConfusionCounts, Mask, MetricsReport, Params,
};
use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use crate::{ensure_dir, mask_file_name, postprocess, write_json, ParamArgs};

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// CDnet video directory holding `input/`, `groundtruth/` and `temporalROI.txt`.
    #[arg(long)]
    pub input: PathBuf,
    /// Frames sampled evenly from the segment before the evaluation range.
    #[arg(long = "init-count", default_value_t = 15)]
    pub init_count: usize,
    /// Score existing masks (`binNNNNNN.png`) instead of running the model.
    #[arg(long = "from-masks")]
    pub from_masks: Option<PathBuf>,
    /// Directory for the evaluated masks.
    #[arg(long = "out-masks")]
    pub out_masks: Option<PathBuf>,
    /// JSON file with the seven scores and the raw confusion counts.
    #[arg(long = "out-metrics")]
    pub out_metrics: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub sequence: PathBuf,
    pub first_frame: usize,
    pub last_frame: usize,
    pub init_frames: Vec<usize>,
    pub frames_scored: usize,
    /// Frames in the evaluation range without a ground-truth file.
    pub missing_groundtruth: Vec<usize>,
    pub counts: ConfusionCounts,
    pub metrics: MetricsReport,
    /// Frames per second of model update plus postprocessing, decoding excluded.
    pub fps: f64,
    pub params: Params,
}

/// `count` indices spread evenly over `first..=last`, endpoints included.
pub fn equidistant(first: usize, last: usize, count: usize) -> Vec<usize> {
    if count == 0 || last < first {
        return Vec::new();
    }
    let span = last - first;
    let count = count.min(span + 1);
    if count == 1 {
        return vec![first];
    }
    (0..count).map(|k| first + k * span / (count - 1)).collect()
}

/// Initialization frames: evenly spread over the frames before the evaluation
/// range, or the first frames of the range when nothing precedes it.
pub fn init_indices(roi: (usize, usize), len: usize, count: usize) -> Vec<usize> {
    if roi.0 > 1 {
        equidistant(1, roi.0 - 1, count)
    } else {
        (1..=count.min(len)).collect()
    }
}

/// Nearest-neighbour enlargement of a mask computed on downsampled frames.
fn upscale(mask: &Mask, width: usize, height: usize) -> Mask {
    if (mask.width(), mask.height()) == (width, height) {
        return mask.clone();
    }
    let (mw, mh) = (mask.width(), mask.height());
    Mask::from_fn(width, height, |x, y| {
        mask.get((x * mw / width).min(mw - 1), (y * mh / height).min(mh - 1))
    })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    let params = args.params.resolve()?;
    let seq = CdnetSequence::open(&args.input)?;
    let (first, last) = seq.roi;
    if let Some(dir) = &args.out_masks {
        ensure_dir(dir)?;
    }

    let mut model = None;
    let mut init_frames = Vec::new();
    if args.from_masks.is_none() {
        init_frames = init_indices(seq.roi, seq.len, args.init_count);
        let mut init = Vec::with_capacity(init_frames.len());
        let mut dims = (0, 0);
        for &i in &init_frames {
            let img = seq.load_input(i, params.downsample_window)?;
            dims = (img.width, img.height);
            init.push(img.pixels);
        }
        if init.is_empty() {
            bail!("no initialization frames in {}", args.input.display());
        }
        model = Some(
            BackgroundModel::initialize(&init, dims.0, dims.1, params.clone())
                .context("initializing the background model")?,
        );
    }

    let mut counts = ConfusionCounts::default();
    let mut missing = Vec::new();
    let mut scored = 0;
    let mut busy = 0.0;
    for index in first..=last {
        let mask = match (&mut model, &args.from_masks) {
            (Some(model), _) => {
                let frame = seq.load_input(index, params.downsample_window)?;
                let t0 = Instant::now();
                let out = model.step(&frame.pixels)?;
                let mask = postprocess(&out.mask, &params);
                busy += t0.elapsed().as_secs_f64();
                mask
            }
            (None, Some(dir)) => {
                let path = dir.join(mask_file_name(index));
                let (w, h, labels) = load_labels(&path)?;
                Mask::from_vec(w, h, labels.iter().map(|&v| v > 127).collect())?
            }
            (None, None) => unreachable!("either a model or a mask directory is present"),
        };
        if let Some(dir) = &args.out_masks {
            write_mask(&dir.join(mask_file_name(index)), &mask)?;
        }
        let Some((gw, gh, labels)) = seq.load_groundtruth(index)? else {
            log::warn!("no ground truth for frame {index}; excluded from scoring");
            missing.push(index);
            continue;
        };
        let mask = upscale(&mask, gw, gh);
        counts += accumulate_confusion(&mask, &labels)
            .with_context(|| format!("scoring frame {index}"))?;
        scored += 1;
    }
    if !missing.is_empty() {
        log::warn!("{} frames lacked ground truth: {:?}", missing.len(), missing);
    }

    let report = EvalReport {
        sequence: args.input.clone(),
        first_frame: first,
        last_frame: last,
        init_frames,
        frames_scored: scored,
        missing_groundtruth: missing,
        counts,
        metrics: metrics(&counts),
        fps: if busy > 0.0 { (last - first + 1) as f64 / busy } else { 0.0 },
        params,
    };
    let m = &report.metrics;
    println!(
        "recall {:.4}  specificity {:.4}  fpr {:.4}  fnr {:.4}  pbc {:.4}  precision {:.4}  f-measure {:.4}",
        m.recall, m.specificity, m.fpr, m.fnr, m.pbc, m.precision, m.f_measure
    );
    if let Some(path) = &args.out_metrics {
        write_json(path, &report)?;
    }
    Ok(report)
}
