use super::frame::Frame;
use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;

/// Normalized covariance of two frames, `1/(d-1) Σ a_l b_l` on normalized pixels.
pub fn similarity(a: &Frame, b: &Frame) -> Result<f64> {
    if a.degenerate || b.degenerate {
        return Err(Error::DegenerateFrame);
    }
    check_dim("similarity", a.len(), b.len())?;
    let d = a.len();
    Ok(dot(&a.pixels, &b.pixels) / (d - 1) as f64)
}

/// Partners of frame `i` within a block of `m` frames.
///
/// Candidates are ordered by temporal distance, then by index. The first
/// `nu`-subset in that order whose distances sum to exactly `delta_t` wins;
/// when no subset reaches the sum, the `nu` nearest candidates are used.
pub fn select_partners(m: usize, i: usize, nu: usize, delta_t: usize) -> Vec<usize> {
    let mut candidates: Vec<usize> = (0..m).filter(|&j| j != i).collect();
    candidates.sort_by_key(|&j| (j.abs_diff(i), j));
    if candidates.len() <= nu {
        return candidates;
    }
    let mut chosen = Vec::with_capacity(nu);
    if search(&candidates, i, nu, delta_t, 0, 0, &mut chosen) {
        chosen
    } else {
        candidates.truncate(nu);
        candidates
    }
}

fn search(
    candidates: &[usize],
    i: usize,
    nu: usize,
    target: usize,
    start: usize,
    sum: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == nu {
        return sum == target;
    }
    for pos in start..candidates.len() {
        let j = candidates[pos];
        let s = sum + j.abs_diff(i);
        // distances are non-decreasing along `candidates`
        if s > target {
            break;
        }
        chosen.push(j);
        if search(candidates, i, nu, target, pos + 1, s, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Mean similarity of `block[i]` to the partners chosen by [`select_partners`].
pub fn mean_similarity(block: &[Frame], i: usize, nu: usize, delta_t: usize) -> Result<f64> {
    if i >= block.len() {
        return Err(Error::InvalidArgument(format!(
            "frame index {i} outside block of {}",
            block.len()
        )));
    }
    let partners = select_partners(block.len(), i, nu, delta_t);
    if partners.is_empty() {
        return Err(Error::InvalidArgument(
            "mean similarity needs at least two frames".into(),
        ));
    }
    let mut total = 0.0;
    for &j in &partners {
        total += similarity(&block[i], &block[j])?;
    }
    Ok(total / partners.len() as f64)
}
