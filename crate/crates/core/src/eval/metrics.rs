//! Ranking and classification metrics.

use crate::error::{Error, Result};

fn check_binary(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Metric(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Metric("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Metric(
            "binary metric needs both classes present".into(),
        ));
    }
    Ok((pos, neg))
}

/// Indices sorted by descending score.
fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Fraction of (positive, negative) pairs ranked correctly; ties count 1/2.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = check_binary(scores, labels)?;
    let order = ranked(scores);
    // Walk groups of tied scores from the top, counting negatives seen so far.
    let mut discordant = 0.0;
    let mut neg_above = 0usize;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end < order.len() && scores[order[end]] == scores[order[k]] {
            end += 1;
        }
        let group = &order[k..end];
        let gp = group.iter().filter(|&&i| labels[i]).count();
        let gn = group.len() - gp;
        discordant += gp as f64 * (neg_above as f64 + 0.5 * gn as f64);
        neg_above += gn;
        k = end;
    }
    Ok(1.0 - discordant / (pos as f64 * neg as f64))
}

/// Step-wise area under the precision-recall curve (average precision),
/// with one threshold per distinct score.
pub fn pr_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, _) = check_binary(scores, labels)?;
    let order = ranked(scores);
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut area = 0.0;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end < order.len() && scores[order[end]] == scores[order[k]] {
            end += 1;
        }
        let gp = order[k..end].iter().filter(|&&i| labels[i]).count();
        tp += gp;
        seen += end - k;
        area += gp as f64 * (tp as f64 / seen as f64);
        k = end;
    }
    Ok(area / pos as f64)
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / pred.len() as f64
}

fn confusion(pred: &[usize], truth: &[usize], num_classes: usize) -> Vec<(usize, usize, usize)> {
    assert_eq!(pred.len(), truth.len());
    // (true positives, false positives, false negatives) per class
    let mut c = vec![(0, 0, 0); num_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if p == t {
            c[p].0 += 1;
        } else {
            c[p].1 += 1;
            c[t].2 += 1;
        }
    }
    c
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// F1 over pooled counts. For single-label tasks this equals accuracy.
pub fn micro_f(pred: &[usize], truth: &[usize], num_classes: usize) -> f64 {
    let (tp, fp, fn_) = confusion(pred, truth, num_classes)
        .into_iter()
        .fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    f1(tp, fp, fn_)
}

/// Unweighted mean of per-class F1 over classes that occur in `truth` or
/// `pred`.
pub fn macro_f(pred: &[usize], truth: &[usize], num_classes: usize) -> f64 {
    let present: Vec<f64> = confusion(pred, truth, num_classes)
        .into_iter()
        .filter(|&(tp, fp, fn_)| tp + fp + fn_ > 0)
        .map(|(tp, fp, fn_)| f1(tp, fp, fn_))
        .collect();
    if present.is_empty() {
        return 0.0;
    }
    present.iter().sum::<f64>() / present.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_worked_example() {
        let auc = roc_auc(&[0.9, 0.8, 0.7, 0.6], &[true, false, true, false]).unwrap();
        assert_eq!(auc, 0.75);
    }

    #[test]
    fn ties_get_half_credit() {
        assert_eq!(roc_auc(&[0.5, 0.5], &[true, false]).unwrap(), 0.5);
        assert_eq!(
            roc_auc(&[1.0, 0.5, 0.5], &[true, true, false]).unwrap(),
            0.75
        );
    }

    #[test]
    fn perfect_ranking() {
        let s = [0.9, 0.8, 0.3, 0.1];
        let l = [true, true, false, false];
        assert_eq!(roc_auc(&s, &l).unwrap(), 1.0);
        assert_eq!(pr_auc(&s, &l).unwrap(), 1.0);
    }

    #[test]
    fn average_precision_by_hand() {
        // hits at ranks 1 and 3: (1/2)(1/1) + (1/2)(2/3)
        let ap = pr_auc(&[0.9, 0.8, 0.7, 0.6], &[true, false, true, false]).unwrap();
        assert!((ap - (0.5 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn one_class_is_an_error() {
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_err());
        assert!(pr_auc(&[0.1, 0.2], &[false, false]).is_err());
    }

    #[test]
    fn constant_prediction_balanced() {
        let truth = [0, 1, 0, 1];
        assert_eq!(micro_f(&[0; 4], &truth, 2), 0.5);
        assert!((macro_f(&[0; 4], &truth, 2) - (2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_multiclass() {
        let t = [0, 1, 2, 2, 1];
        assert_eq!(micro_f(&t, &t, 3), 1.0);
        assert_eq!(macro_f(&t, &t, 3), 1.0);
    }
}
