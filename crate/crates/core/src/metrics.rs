//! Pixel-level change-detection scores.
//!
//! Ground-truth labels follow the CDnet encoding: 0 static, 50 shadow,
//! 85 outside the region of interest, 170 unknown, 255 motion. Shadows count
//! as background; 85 and 170 are excluded from every count.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::postprocess::Mask;

pub const GT_STATIC: u8 = 0;
pub const GT_SHADOW: u8 = 50;
pub const GT_OUTSIDE_ROI: u8 = 85;
pub const GT_UNKNOWN: u8 = 170;
pub const GT_MOTION: u8 = 255;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub excluded: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_ + self.excluded
    }
}

impl std::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fn_ += o.fn_;
        self.excluded += o.excluded;
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// Scores one predicted mask against an 8-bit label image.
///
/// Labels other than the five CDnet values are thresholded: `> 127` is
/// motion, otherwise static.
pub fn accumulate_confusion(pred: &Mask, gt: &[u8]) -> Result<ConfusionCounts> {
    check_dim("ground truth pixels", pred.as_slice().len(), gt.len())?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.as_slice().iter().zip(gt) {
        match g {
            GT_OUTSIDE_ROI | GT_UNKNOWN => c.excluded += 1,
            _ => {
                let truth = g > 127;
                match (p, truth) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fp += 1,
                    (false, false) => c.tn += 1,
                    (false, true) => c.fn_ += 1,
                }
            }
        }
    }
    Ok(c)
}

/// The seven benchmark scores. Ratios with a zero denominator are reported
/// as 0 and listed in `undefined`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub recall: f64,
    pub specificity: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub pbc: f64,
    pub precision: f64,
    pub f_measure: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

pub fn metrics(c: &ConfusionCounts) -> MetricsReport {
    let mut undefined = Vec::new();
    let mut ratio = |name: &str, num: u64, den: u64| {
        if den == 0 {
            undefined.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let recall = ratio("recall", c.tp, c.tp + c.fn_);
    let specificity = ratio("specificity", c.tn, c.tn + c.fp);
    let fpr = ratio("fpr", c.fp, c.fp + c.tn);
    let fnr = ratio("fnr", c.fn_, c.tp + c.fn_);
    let pbc = 100.0 * ratio("pbc", c.fn_ + c.fp, c.tp + c.fn_ + c.fp + c.tn);
    let precision = ratio("precision", c.tp, c.tp + c.fp);
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        undefined.push("f_measure".into());
        0.0
    };
    MetricsReport {
        recall,
        specificity,
        fpr,
        fnr,
        pbc,
        precision,
        f_measure,
        undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts {
            tp,
            fp,
            tn,
            fn_,
            excluded: 0,
        }
    }

    #[test]
    fn perfect_prediction() {
        let gt: Vec<u8> = (0..12).map(|i| if i % 3 == 0 { 255 } else { 0 }).collect();
        let pred = Mask::from_vec(4, 3, gt.iter().map(|&g| g == 255).collect()).unwrap();
        let c = accumulate_confusion(&pred, &gt).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let m = metrics(&c);
        assert_eq!((m.recall, m.precision, m.f_measure, m.pbc), (1.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn empty_prediction_against_all_foreground() {
        let c = accumulate_confusion(&Mask::new(5, 2), &[255; 10]).unwrap();
        assert_eq!(c.fn_, 10);
        let m = metrics(&c);
        assert!(m.undefined.contains(&"precision".to_string()));
        assert_eq!(m.f_measure, 0.0);
    }

    #[test]
    fn reported_table_row_is_consistent() {
        let (p, r) = (0.973f64, 0.936f64);
        let f = 2.0 * p * r / (p + r);
        assert!((f - 0.954).abs() < 5e-4);
    }

    #[test]
    fn balanced_counts() {
        let m = metrics(&counts(1, 1, 1, 1));
        assert_eq!((m.recall, m.precision, m.f_measure, m.pbc), (0.5, 0.5, 0.5, 50.0));
    }

    #[test]
    fn label_encoding() {
        let pred = Mask::from_vec(5, 1, vec![true; 5]).unwrap();
        let c = accumulate_confusion(&pred, &[0, 50, 85, 170, 255]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 2, tn: 0, fn_: 0, excluded: 2 });
        assert!(accumulate_confusion(&pred, &[0; 4]).is_err());
    }

    #[test]
    fn matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let labels = [0u8, 50, 85, 170, 255];
        let gt: Vec<u8> = (0..300).map(|_| labels[rng.random_range(0..5)]).collect();
        let pred = Mask::from_fn(20, 15, |_, _| rng.random_bool(0.4));
        let c = accumulate_confusion(&pred, &gt).unwrap();
        let (mut tp, mut fp, mut tn, mut fn_, mut ex) = (0, 0, 0, 0, 0);
        for i in 0..300 {
            let p = pred.as_slice()[i];
            if gt[i] == 85 || gt[i] == 170 {
                ex += 1;
            } else if gt[i] == 255 {
                if p { tp += 1 } else { fn_ += 1 }
            } else if p {
                fp += 1
            } else {
                tn += 1
            }
        }
        assert_eq!(c, ConfusionCounts { tp, fp, tn, fn_, excluded: ex });
        assert_eq!(c.total(), 300);
    }

    proptest::proptest! {
        #[test]
        fn complementary_rates(tp in 0u64..1000, fp in 0u64..1000, tn in 0u64..1000, fn_ in 0u64..1000) {
            let m = metrics(&counts(tp, fp, tn, fn_));
            if tn + fp > 0 {
                proptest::prop_assert!((m.fpr + m.specificity - 1.0).abs() < 1e-15);
            }
            if tp + fn_ > 0 {
                proptest::prop_assert!((m.fnr + m.recall - 1.0).abs() < 1e-15);
            }
            for v in [m.recall, m.specificity, m.fpr, m.fnr, m.precision, m.f_measure] {
                proptest::prop_assert!((0.0..=1.0).contains(&v));
            }
            proptest::prop_assert!((0.0..=100.0).contains(&m.pbc));
        }
    }
}
