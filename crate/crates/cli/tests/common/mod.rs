#![allow(dead_code)]

use std::fs;
use std::path::Path;

use adasvd::synthetic::SceneGenerator;
use adasvd::{write_intensities, write_mask};

/// Writes frames `range` of a scene as 8-bit PNGs named `in%06d.png`, numbered from 1.
pub fn write_frames(gen: &SceneGenerator, range: std::ops::Range<usize>, dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let (w, h) = (gen.scene().width, gen.scene().height);
    for (k, t) in range.enumerate() {
        write_intensities(&dir.join(format!("in{:06}.png", k + 1)), w, h, &gen.frame(t)).unwrap();
    }
}

/// Lays out a CDnet-style sequence: frames `0..len` with exact ground truth,
/// evaluation range `first..=last` (1-based).
pub fn write_cdnet(gen: &SceneGenerator, len: usize, first: usize, last: usize, root: &Path) {
    write_frames(gen, 0..len, &root.join("input"));
    let gt = root.join("groundtruth");
    fs::create_dir_all(&gt).unwrap();
    for t in 0..len {
        write_mask(&gt.join(format!("gt{:06}.png", t + 1)), &gen.ground_truth(t)).unwrap();
    }
    fs::write(root.join("temporalROI.txt"), format!("{first} {last}\n")).unwrap();
}
