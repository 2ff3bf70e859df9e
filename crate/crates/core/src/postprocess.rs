//! Binary mask cleanup: morphological closing and small-blob removal.

use crate::error::{check_dim, Result};

/// Boolean foreground map, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    /// All-background mask.
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dim("mask pixels", width * height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let data = (0..width * height).map(|i| f(i % width, i / width)).collect();
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Whether every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// 8-bit rendering with values {0, 255}.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }
}

/// Offsets of the discrete disk `dx² + dy² <= r²`.
#[cfg(test)]
fn disk(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Row-wise spans `(dy, half_width)` of the disk, for run-based filtering.
fn disk_rows(radius: usize) -> Vec<(isize, usize)> {
    let r = radius as isize;
    (-r..=r)
        .map(|dy| {
            let mut half = 0;
            while ((half + 1) * (half + 1)) as isize + dy * dy <= r * r {
                half += 1;
            }
            (dy, half as usize)
        })
        .collect()
}

/// Per row, marks pixels with a set pixel within `half` columns.
fn spread_rows(src: &[u8], width: usize, half: usize) -> Vec<u8> {
    let mut out = src.to_vec();
    for (row, dst) in src.chunks_exact(width).zip(out.chunks_exact_mut(width)) {
        for s in 1..=half.min(width - 1) {
            for (d, &v) in dst[s..].iter_mut().zip(&row[..width - s]) {
                *d |= v;
            }
            for (d, &v) in dst[..width - s].iter_mut().zip(&row[s..]) {
                *d |= v;
            }
        }
    }
    out
}

/// Sets a pixel when any pixel of the disk around it (inside the image) equals
/// `value`; returns the complement rule when `value` is false.
fn disk_filter(mask: &Mask, radius: usize, value: bool) -> Mask {
    let (w, h) = (mask.width, mask.height);
    if w == 0 || h == 0 {
        return mask.clone();
    }
    let src: Vec<u8> = mask.data.iter().map(|&b| (b == value) as u8).collect();
    let rows = disk_rows(radius);
    let mut spread: Vec<Option<Vec<u8>>> = vec![None; radius + 1];
    for &(_, half) in &rows {
        if spread[half].is_none() {
            spread[half] = Some(spread_rows(&src, w, half));
        }
    }
    let mut hit = vec![0u8; w * h];
    for (y, dst) in hit.chunks_exact_mut(w).enumerate() {
        for &(dy, half) in &rows {
            let yy = y as isize + dy;
            if yy < 0 || yy >= h as isize {
                continue;
            }
            let spread = spread[half].as_deref().expect("filled above");
            let from = &spread[yy as usize * w..][..w];
            for (d, &s) in dst.iter_mut().zip(from) {
                *d |= s;
            }
        }
    }
    Mask {
        width: w,
        height: h,
        data: hit.into_iter().map(|v| (v != 0) == value).collect(),
    }
}

/// Dilation by a disk; pixels outside the image count as background.
pub fn dilate(mask: &Mask, radius: usize) -> Mask {
    disk_filter(mask, radius, true)
}

/// Erosion by a disk; pixels outside the image count as foreground.
pub fn erode(mask: &Mask, radius: usize) -> Mask {
    disk_filter(mask, radius, false)
}

/// Morphological closing (dilation, then erosion) with a disk of `radius`.
pub fn morph_close(mask: &Mask, radius: usize) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    erode(&dilate(mask, radius), radius)
}

/// Clears 8-connected components with fewer than `min_area` pixels.
pub fn remove_small_blobs(mask: &Mask, min_area: usize) -> Mask {
    if min_area <= 1 {
        return mask.clone();
    }
    let (w, h) = (mask.width, mask.height);
    let mut out = mask.clone();
    let mut seen = vec![false; w * h];
    let mut component = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.data[start] || seen[start] {
            continue;
        }
        component.clear();
        stack.push(start);
        seen[start] = true;
        while let Some(p) = stack.pop() {
            component.push(p);
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if mask.data[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        if component.len() < min_area {
            for &p in &component {
                out.data[p] = false;
            }
        }
    }
    out
}
