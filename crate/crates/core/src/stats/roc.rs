//! ROC curves and AUC.
//!
//! The curve is swept from the highest score down, one step per group of
//! tied scores, so tied pairs contribute one half to the area. The area is
//! therefore exactly the Mann-Whitney U statistic over `n_pos · n_neg`.

use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RocError {
    #[error("both classes must be present")]
    SingleClass,
    #[error("scores must not be NaN")]
    NanScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

pub fn roc_auc(scored: &[(f64, bool)]) -> Result<RocCurve, RocError> {
    if scored.iter().any(|(s, _)| s.is_nan()) {
        return Err(RocError::NanScore);
    }
    let n_pos = scored.iter().filter(|(_, y)| *y).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(RocError::SingleClass);
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    // Twice the U statistic, kept integral.
    let mut twice_u: u128 = 0;
    let mut i = 0;
    while i < sorted.len() {
        let score = sorted[i].0;
        let (mut pos, mut neg) = (0usize, 0usize);
        while i < sorted.len() && sorted[i].0 == score {
            if sorted[i].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            i += 1;
        }
        twice_u += neg as u128 * (2 * tp + pos) as u128;
        tp += pos;
        fp += neg;
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    let auc = twice_u as f64 / (2.0 * n_pos as f64 * n_neg as f64);
    Ok(RocCurve { points, auc })
}

pub fn auc(scored: &[(f64, bool)]) -> Result<f64, RocError> {
    roc_auc(scored).map(|c| c.auc)
}

/// Error of always predicting the majority class.
pub fn naive_error(labels: &[bool]) -> Option<f64> {
    if labels.is_empty() {
        return None;
    }
    let pos = labels.iter().filter(|&&y| y).count();
    Some(pos.min(labels.len() - pos) as f64 / labels.len() as f64)
}

pub fn write_roc<W: Write>(mut w: W, curve: &RocCurve) -> io::Result<()> {
    writeln!(w, "# fpr\ttpr\tauc={}", curve.auc)?;
    for (fpr, tpr) in &curve.points {
        writeln!(w, "{fpr}\t{tpr}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking() {
        let s = [(0.9, true), (0.8, true), (0.1, false), (0.2, false)];
        let c = roc_auc(&s).unwrap();
        assert_eq!(c.auc, 1.0);
        assert_eq!(c.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(c.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn all_ties_is_one_half() {
        let s = [(1.0, true), (1.0, false), (1.0, false), (1.0, true), (1.0, false)];
        assert_eq!(auc(&s).unwrap(), 0.5);
    }

    #[test]
    fn smartcore_reference_case() {
        let s = [(0.1, false), (0.4, false), (0.35, true), (0.8, true)];
        assert!((auc(&s).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        assert_eq!(auc(&[(1.0, true)]), Err(RocError::SingleClass));
        assert_eq!(auc(&[(f64::NAN, true), (0.0, false)]), Err(RocError::NanScore));
    }

    #[test]
    fn naive_error_rates() {
        assert_eq!(naive_error(&[true, false, true, false]), Some(0.5));
        assert_eq!(naive_error(&[false, false, false, true]), Some(0.25));
        assert_eq!(naive_error(&[]), None);
    }

    #[test]
    fn curve_is_monotone() {
        let s = [(3.0, true), (2.0, false), (2.0, true), (1.0, false), (0.5, true)];
        let c = roc_auc(&s).unwrap();
        for w in c.points.windows(2) {
            assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
        }
    }
}
