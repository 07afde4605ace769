//! Paired fold-wise comparison of two result sets.

use std::collections::BTreeMap;

use crate::cv::ResultRecord;
use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deltas {
    pub folds: usize,
    /// Mean of `a.test_acc - b.test_acc` over matched folds.
    pub mean: f64,
    /// Sample standard deviation of the differences; 0 for a single fold.
    pub std: f64,
    /// `|mean| > 2 std`.
    pub significant: bool,
}

/// Test-accuracy differences `a - b`, paired by `(repeat, fold)`. Both sets
/// must cover exactly the same folds.
pub fn foldwise_deltas(a: &[ResultRecord], b: &[ResultRecord]) -> Result<Deltas> {
    let index = |rs: &[ResultRecord], side: &str| -> Result<BTreeMap<(usize, usize), f64>> {
        let mut map = BTreeMap::new();
        for r in rs {
            if map.insert((r.repeat, r.fold), r.test_acc).is_some() {
                return Err(BenchError::Mismatch(format!("{side} repeats fold {} of repeat {}", r.fold, r.repeat)));
            }
        }
        Ok(map)
    };
    let (a, b) = (index(a, "a")?, index(b, "b")?);
    if a.is_empty() || a.keys().ne(b.keys()) {
        return Err(BenchError::Mismatch("result sets cover different folds".into()));
    }
    let diffs: Vec<f64> = a.iter().map(|(k, x)| x - b[k]).collect();
    let k = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / k;
    let std = if diffs.len() > 1 {
        (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(Deltas {
        folds: diffs.len(),
        mean,
        std,
        significant: mean.abs() > 2.0 * std,
    })
}
