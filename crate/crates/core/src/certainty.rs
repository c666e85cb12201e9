//! Deducing extreme-ranked labels with certainty from a reported AUC.
//!
//! With `n0` negatives and `n1` positives, a single positive among the `k`
//! lowest-ranked examples leaves at least `n0 - k` misordered pairs, capping
//! the AUC at `1 - 1/n1 + k/(n0·n1)`. Any reported AUC strictly above that
//! cap forces the `k` lowest-ranked examples to be negative. The mirrored
//! argument covers the highest-ranked examples and positives.
//!
//! Every comparison here is done on integers.

use serde::{Deserialize, Serialize};

use crate::auc::{rank_order, Guesses, Labeling, RationalScore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertaintyResult {
    pub k_neg: usize,
    pub k_pos: usize,
    /// The `k_neg` lowest-scored indices, in ascending score order.
    pub neg_indices: Vec<usize>,
    /// The `k_pos` highest-scored indices, in ascending score order.
    pub pos_indices: Vec<usize>,
}

/// Largest `k ≤ limit` with `c > 1 - 1/other + k/(n0·n1)`, or 0.
///
/// Multiplying through by `n0·n1·q` (for `c = p/q`) gives the integer test
/// `p·n0·n1 > q·(n0·n1 - this + k)`, where `this` is the class being deduced
/// (`n0` when deducing negatives; the `1/n1` term is `n0/(n0·n1)`).
fn certain_count(c: &RationalScore, this: usize, limit: usize, n0: usize, n1: usize) -> usize {
    let pairs = (n0 as u128) * (n1 as u128);
    let p = u128::from(c.numerator());
    let q = u128::from(c.denominator());
    let lhs = p * pairs;
    // pairs - this ≥ 0 because the other class is non-empty
    let base = pairs - this as u128;
    (1..=limit)
        .take_while(|&k| lhs > q * (base + k as u128))
        .last()
        .unwrap_or(0)
}

/// Class counts for which `deduce_certain_labels` is meaningful.
pub fn certain_counts(c: &RationalScore, n0: usize, n1: usize) -> Result<(usize, usize)> {
    if n0 == 0 || n1 == 0 {
        return Err(Error::InvalidClassCounts { n0, n1, n: n0 + n1 });
    }
    Ok((
        certain_count(c, n0, n0, n0, n1),
        certain_count(c, n1, n1, n0, n1),
    ))
}

fn check_counts(n0: usize, n1: usize, guesses: &Guesses) -> Result<()> {
    if n0 == 0 || n1 == 0 || n0 + n1 != guesses.len() {
        return Err(Error::InvalidClassCounts {
            n0,
            n1,
            n: guesses.len(),
        });
    }
    Ok(())
}

/// How many of the lowest- and highest-ranked examples are provably
/// negative and positive, given the exact AUC `c` and the true class counts.
pub fn deduce_certain_labels(
    c: &RationalScore,
    n0: usize,
    n1: usize,
    guesses: &Guesses,
) -> Result<CertaintyResult> {
    check_counts(n0, n1, guesses)?;
    let order = rank_order(guesses)?;
    let (k_neg, k_pos) = certain_counts(c, n0, n1)?;
    Ok(CertaintyResult {
        k_neg,
        k_pos,
        neg_indices: order[..k_neg].to_vec(),
        pos_indices: order[order.len() - k_pos..].to_vec(),
    })
}

/// At `c = 1` the labeling is fully determined: the `n0` lowest-ranked
/// examples are negative and the rest positive. Returns `None` otherwise.
pub fn perfect_auc_shortcut(
    c: &RationalScore,
    n0: usize,
    n1: usize,
    guesses: &Guesses,
) -> Result<Option<Labeling>> {
    check_counts(n0, n1, guesses)?;
    let order = rank_order(guesses)?;
    if !c.is_one() {
        return Ok(None);
    }
    let mut labels = vec![true; guesses.len()];
    for &i in &order[..n0] {
        labels[i] = false;
    }
    Ok(Some(Labeling::from_bools(labels)))
}
