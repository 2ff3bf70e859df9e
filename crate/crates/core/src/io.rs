//! Frame ingestion: decoding, grayscale conversion, box downsampling and the
//! CDnet directory layout.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage};

use crate::error::{Error, Result};
use crate::postprocess::Mask;

/// Extensions accepted by [`read_sequence`], lowercase.
pub const SUPPORTED_EXTENSIONS: &[&str] = &["png", "pgm", "ppm", "pnm", "jpg", "jpeg"];

/// Row-major grayscale image with `f64` intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct RawImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        crate::error::check_dim("image pixels", width * height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

/// BT.601 luma of an 8-bit RGB triple.
pub fn to_grayscale(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

/// Box-filter downsampling by a `window × window` mean.
///
/// Dimensions not divisible by `window` are padded by replicating the last
/// row and column, so the output is `ceil(w / window) × ceil(h / window)`.
pub fn downsample(img: &RawImage, window: usize) -> Result<RawImage> {
    if window == 0 {
        return Err(Error::InvalidArgument("downsample window must be >= 1".into()));
    }
    if window == 1 {
        return Ok(img.clone());
    }
    let ow = img.width.div_ceil(window);
    let oh = img.height.div_ceil(window);
    let area = (window * window) as f64;
    let mut pixels = Vec::with_capacity(ow * oh);
    for by in 0..oh {
        for bx in 0..ow {
            let mut sum = 0.0;
            for dy in 0..window {
                let y = (by * window + dy).min(img.height - 1);
                let row = &img.pixels[y * img.width..(y + 1) * img.width];
                for dx in 0..window {
                    sum += row[(bx * window + dx).min(img.width - 1)];
                }
            }
            pixels.push(sum / area);
        }
    }
    Ok(RawImage {
        width: ow,
        height: oh,
        pixels,
    })
}

/// Nearest-neighbour resampling to `width × height`.
pub fn resize_nearest(img: &RawImage, width: usize, height: usize) -> Result<RawImage> {
    if width == 0 || height == 0 || img.width == 0 || img.height == 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot resize {}x{} to {width}x{height}",
            img.width, img.height
        )));
    }
    let pixels = (0..width * height)
        .map(|i| {
            let (x, y) = (i % width, i / width);
            img.get(x * img.width / width, y * img.height / height)
        })
        .collect();
    Ok(RawImage {
        width,
        height,
        pixels,
    })
}

fn gray_of(img: DynamicImage) -> RawImage {
    let (width, height) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(f64::from).collect(),
        DynamicImage::ImageLuma16(g) => g
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 257.0)
            .collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| to_grayscale(p[0], p[1], p[2]))
            .collect(),
    };
    RawImage {
        width,
        height,
        pixels,
    }
}

/// Decodes one image file to grayscale intensities in `[0, 255]`.
pub fn load_image(path: &Path) -> Result<RawImage> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(gray_of(img))
}

/// Loads an 8-bit label image without color conversion.
pub fn load_labels(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let g = img.into_luma8();
    Ok((g.width() as usize, g.height() as usize, g.into_raw()))
}

/// Writes a mask as an 8-bit {0, 255} image; the format follows the extension.
pub fn write_mask(path: &Path, mask: &Mask) -> Result<()> {
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, mask.to_u8())
        .expect("mask buffer matches its dimensions");
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes intensities as an 8-bit grayscale image, rounding and clamping to `[0, 255]`.
pub fn write_intensities(path: &Path, width: usize, height: usize, pixels: &[f64]) -> Result<()> {
    crate::error::check_dim("image pixels", width * height, pixels.len())?;
    let bytes = pixels.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    let img = GrayImage::from_raw(width as u32, height as u32, bytes)
        .expect("buffer matches its dimensions");
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn list_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let supported = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| SUPPORTED_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if supported && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// A directory of still images read in lexicographic file-name order.
#[derive(Clone, Debug)]
pub struct FrameSource {
    pub dir: PathBuf,
    /// Keep every `stride`-th file, starting with the first.
    pub stride: usize,
    pub downsample_window: usize,
}

impl FrameSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            stride: 1,
            downsample_window: 1,
        }
    }

    /// The files that will be decoded, after applying the stride.
    pub fn files(&self) -> Result<Vec<PathBuf>> {
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be >= 1".into()));
        }
        Ok(list_dir(&self.dir)?.into_iter().step_by(self.stride).collect())
    }

    /// Lazily decodes frames; every item after the first must match its size.
    pub fn frames(&self) -> Result<impl Iterator<Item = Result<RawImage>> + '_> {
        let files = self.files()?;
        let mut dims: Option<(usize, usize)> = None;
        Ok(files.into_iter().map(move |path| {
            let img = downsample(&load_image(&path)?, self.downsample_window)?;
            match dims {
                None => dims = Some((img.width, img.height)),
                Some((w, h)) if (w, h) != (img.width, img.height) => {
                    return Err(Error::Format {
                        path,
                        message: format!(
                            "frame is {}x{} but the sequence is {w}x{h}",
                            img.width, img.height
                        ),
                    })
                }
                Some(_) => {}
            }
            Ok(img)
        }))
    }
}

/// Reads a whole sequence into memory.
pub fn read_sequence(source: &FrameSource) -> Result<Vec<RawImage>> {
    source.frames()?.collect()
}

/// One CDnet 2014 category/video directory.
#[derive(Clone, Debug)]
pub struct CdnetSequence {
    pub root: PathBuf,
    pub input_dir: PathBuf,
    pub groundtruth_dir: PathBuf,
    /// First and last evaluated frame, 1-based and inclusive.
    pub roi: (usize, usize),
    /// Number of input frames.
    pub len: usize,
}

impl CdnetSequence {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let input_dir = root.join("input");
        let groundtruth_dir = root.join("groundtruth");
        let roi_path = root.join("temporalROI.txt");
        let text = fs::read_to_string(&roi_path).map_err(|source| Error::Io {
            path: roi_path.clone(),
            source,
        })?;
        let nums: Vec<usize> = text
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format {
                path: roi_path.clone(),
                message: format!("expected two integers: {e}"),
            })?;
        let [start, end] = nums[..] else {
            return Err(Error::Format {
                path: roi_path,
                message: format!("expected two integers, found {}", nums.len()),
            });
        };
        if start == 0 || end < start {
            return Err(Error::Format {
                path: roi_path,
                message: format!("invalid evaluation range {start}..{end}"),
            });
        }
        let len = list_dir(&input_dir)?.len();
        if end > len {
            return Err(Error::Format {
                path: roi_path,
                message: format!("evaluation range ends at {end} but only {len} input frames exist"),
            });
        }
        Ok(Self {
            root,
            input_dir,
            groundtruth_dir,
            roi: (start, end),
            len,
        })
    }

    /// Path of input frame `index` (1-based), whichever extension exists.
    pub fn input_path(&self, index: usize) -> Result<PathBuf> {
        for ext in ["jpg", "png", "pgm"] {
            let p = self.input_dir.join(format!("in{index:06}.{ext}"));
            if p.is_file() {
                return Ok(p);
            }
        }
        Err(Error::Format {
            path: self.input_dir.join(format!("in{index:06}.jpg")),
            message: "input frame not found".into(),
        })
    }

    pub fn groundtruth_path(&self, index: usize) -> PathBuf {
        self.groundtruth_dir.join(format!("gt{index:06}.png"))
    }

    pub fn load_input(&self, index: usize, downsample_window: usize) -> Result<RawImage> {
        downsample(&load_image(&self.input_path(index)?)?, downsample_window)
    }

    /// Ground-truth labels of frame `index`, or `None` when the file is absent.
    pub fn load_groundtruth(&self, index: usize) -> Result<Option<(usize, usize, Vec<u8>)>> {
        let p = self.groundtruth_path(index);
        if !p.is_file() {
            return Ok(None);
        }
        load_labels(&p).map(Some)
    }
}
