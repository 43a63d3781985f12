//! Minimal `(C, s)`-uniformity constants of probability vectors.

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{serde_str, symmetric_ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformityReport {
    #[serde(with = "serde_str")]
    pub min_c: Rational,
    /// `(i, j, l)`: the windows `p_{i+1..i+l}` and `p_{j+1..j+l}` realizing
    /// `min_c`. Absent when no window pair qualifies.
    pub windows: Option<(usize, usize, usize)>,
}

/// Smallest `C` such that `p` is `(C, s)`-uniform: the largest ratio between
/// sums of two adjacent or overlapping windows of equal length `l >= s`,
/// over all `0 <= i <= j <= i + l <= j + l <= len`.
///
/// Ties keep the first triple in `(l, i, j)` order.
pub fn min_uniform_constant(p: &[Rational], s: usize) -> UniformityReport {
    assert!(s >= 1, "window floor must be at least 1");
    let k = p.len();
    let mut prefix = Vec::with_capacity(k + 1);
    prefix.push(Rational::zero());
    for x in p {
        let next = prefix.last().expect("non-empty") + x;
        prefix.push(next);
    }
    let window = |start: usize, l: usize| &prefix[start + l] - &prefix[start];

    let mut best: Option<(Rational, (usize, usize, usize))> = None;
    for l in s..=k {
        for i in 0..=k - l {
            let a = window(i, l);
            for j in i..=(i + l).min(k - l) {
                let b = window(j, l);
                let r = symmetric_ratio(&a, &b);
                if best.as_ref().is_none_or(|(c, _)| &r > c) {
                    best = Some((r, (i, j, l)));
                }
            }
        }
    }
    match best {
        Some((min_c, windows)) => UniformityReport {
            min_c,
            windows: Some(windows),
        },
        None => UniformityReport {
            min_c: Rational::one(),
            windows: None,
        },
    }
}
