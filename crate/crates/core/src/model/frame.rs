use crate::error::{Error, Result};

/// One vectorized grayscale frame, normalized to zero mean and unit sample
/// standard deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub pixels: Vec<f64>,
    /// Mean of the raw intensities.
    pub mean: f64,
    /// Sample standard deviation (denominator `d - 1`) of the raw intensities.
    pub sd: f64,
    pub index: usize,
    pub width: usize,
    pub height: usize,
    /// Constant input: `pixels` are all zero and the frame is never appended.
    pub degenerate: bool,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Maps a value in normalized units back to raw intensity.
    pub fn denormalize(&self, v: f64) -> f64 {
        v * self.sd + self.mean
    }
}

/// `(raw - mean) / sample_std`, keeping the statistics for de-normalization.
pub fn normalize_frame(raw: &[f64], width: usize, height: usize, index: usize) -> Result<Frame> {
    let d = width * height;
    if raw.len() != d {
        return Err(Error::DimensionMismatch {
            context: "frame pixels",
            expected: d,
            found: raw.len(),
        });
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "frame needs at least 2 pixels, got {d}"
        )));
    }
    let mean = raw.iter().sum::<f64>() / d as f64;
    let var = raw.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (d - 1) as f64;
    let sd = var.sqrt();
    let degenerate = !(sd > 0.0) || !sd.is_finite();
    let pixels = if degenerate {
        vec![0.0; d]
    } else {
        raw.iter().map(|x| (x - mean) / sd).collect()
    };
    Ok(Frame {
        pixels,
        mean,
        sd: if degenerate { 0.0 } else { sd },
        index,
        width,
        height,
        degenerate,
    })
}
