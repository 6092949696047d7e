//! Agreement between two labellings.

use std::collections::BTreeMap;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{check_len, Error, Result};

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, `I(A; B) / ((H(A) + H(B)) / 2)`.
///
/// Two single-cluster labellings are identical partitions and score 1.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    check_len("second labelling", b.len(), a.len())?;
    if a.is_empty() {
        return Err(Error::Validation("labellings are empty".into()));
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ca: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cb: BTreeMap<usize, usize> = BTreeMap::new();
    for (&la, &lb) in a.iter().zip(b) {
        *joint.entry((la, lb)).or_default() += 1;
        *ca.entry(la).or_default() += 1;
        *cb.entry(lb).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), n);
    let hb = entropy(cb.values().copied(), n);
    if ha + hb == 0.0 {
        return Ok(1.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(la, lb), &c)| {
            let c = c as f64;
            let expected = ca[&la] as f64 * cb[&lb] as f64;
            c / n * (c * n / expected).ln()
        })
        .sum();
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}

/// Fraction of points labelled correctly under the best one-to-one renaming
/// of the `k` predicted clusters onto the `k` classes.
pub fn accuracy(pred: &[usize], truth: &[usize], k: usize) -> Result<f64> {
    check_len("true labelling", truth.len(), pred.len())?;
    if pred.is_empty() {
        return Err(Error::Validation("labellings are empty".into()));
    }
    let mut confusion = Matrix::new(k, k, 0i64);
    for (&p, &t) in pred.iter().zip(truth) {
        for (what, label) in [("predicted label", p), ("true label", t)] {
            if label >= k {
                return Err(Error::Index {
                    what,
                    index: label,
                    bound: k,
                });
            }
        }
        confusion[(p, t)] += 1;
    }
    let (matched, _) = kuhn_munkres(&confusion);
    Ok(matched as f64 / pred.len() as f64)
}
