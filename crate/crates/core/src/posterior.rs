//! Posterior label marginals given a reported AUC.
//!
//! Each guess `ŷ_i` doubles as the prior `P(Y_i = 1) = ŷ_i`. Observing the
//! exact AUC `c` restricts the prior to the labelings whose AUC equals `c`,
//! and the posterior of each label is its weighted share among them:
//!
//! ```text
//! P(Y_i = 1 | ŷ, c) ∝ Σ_{y : y_i = 1, auc(y, ŷ) = c} Π_j P(y_j | ŷ_j)
//! ```
//!
//! Two routes compute the same quantity:
//!
//! * [`posterior_brute_force`] enumerates all `2^n` labelings (capped at
//!   [`BRUTE_FORCE_MAX_N`]).
//! * [`posterior_dp`] walks the examples in ascending rank order keeping, for
//!   every `(negatives placed, correct pairs so far)` state, the summed prior
//!   weight of all partial labelings that reach it. Placing a negative moves
//!   to `(a + 1, m)`; placing a positive moves to `(a, m + a)`. A final state
//!   with `a` negatives and `m` correct pairs matches `c = p/q` iff
//!   `m·q = p·a·(n - a)`. Marginals come from rerunning the pass with one
//!   label clamped to 1.
//!
//! Both routes sum over every class split by default; the `_with_counts`
//! variants keep only labelings with the given `(n0, n1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auc::{correct_pairs_in_rank_order, rank_order, Guesses, RationalScore};
use crate::error::{Error, Result};

/// Largest `n` accepted by the enumeration route.
pub const BRUTE_FORCE_MAX_N: usize = 24;

/// Largest `n` accepted by the dynamic program; keeps labeling counts
/// inside `u128`.
pub const DP_MAX_N: usize = 126;

/// Guesses read as calibrated probabilities `P(Y_i = 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbGuesses {
    probs: Vec<f64>,
}

impl ProbGuesses {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, &p)| !(p > 0.0 && p < 1.0))
        {
            return Err(Error::InvalidProbability { index, value });
        }
        let guesses = Guesses::new(probs)?;
        guesses.ensure_distinct()?;
        Ok(Self {
            probs: guesses.into(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn to_guesses(&self) -> Guesses {
        Guesses::new(self.probs.clone()).expect("validated on construction")
    }
}

impl TryFrom<Vec<f64>> for ProbGuesses {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<ProbGuesses> for Vec<f64> {
    fn from(p: ProbGuesses) -> Self {
        p.probs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BruteForce,
    Dp,
}

/// Class counts used to restrict the set of admissible labelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub n0: usize,
    pub n1: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorResult {
    /// `P(Y_i = 1 | ŷ, c)` for each example, in input order.
    pub posterior: Vec<f64>,
    pub satisfying_count: u128,
    /// Summed prior weight of all satisfying labelings.
    pub total_weight: f64,
    pub method: Method,
}

fn check_counts(n: usize, counts: Option<ClassCounts>) -> Result<()> {
    match counts {
        Some(ClassCounts { n0, n1 }) if n0 == 0 || n1 == 0 || n0 + n1 != n => {
            Err(Error::InvalidClassCounts { n0, n1, n })
        }
        _ => Ok(()),
    }
}

/// Probabilities rearranged into ascending rank order, with the permutation.
fn ranked(probs: &ProbGuesses) -> (Vec<usize>, Vec<f64>) {
    let order = rank_order(&probs.to_guesses()).expect("validated distinct");
    let ranked = order.iter().map(|&i| probs.probs()[i]).collect();
    (order, ranked)
}

pub fn posterior_brute_force(probs: &ProbGuesses, c: &RationalScore) -> Result<PosteriorResult> {
    brute_force(probs, c, None)
}

pub fn posterior_brute_force_with_counts(
    probs: &ProbGuesses,
    c: &RationalScore,
    counts: ClassCounts,
) -> Result<PosteriorResult> {
    brute_force(probs, c, Some(counts))
}

pub fn posterior_dp(probs: &ProbGuesses, c: &RationalScore) -> Result<PosteriorResult> {
    dp(probs, c, None)
}

pub fn posterior_dp_with_counts(
    probs: &ProbGuesses,
    c: &RationalScore,
    counts: ClassCounts,
) -> Result<PosteriorResult> {
    dp(probs, c, Some(counts))
}

/// Per-chunk partial sums of the enumeration.
#[derive(Clone)]
struct Partial {
    count: u128,
    total: f64,
    positive: Vec<f64>,
}

impl Partial {
    fn empty(n: usize) -> Self {
        Self {
            count: 0,
            total: 0.0,
            positive: vec![0.0; n],
        }
    }
}

/// Masks per parallel chunk. Chunk boundaries are fixed, and chunk results
/// are combined in mask order, so floating-point sums do not depend on
/// scheduling.
const CHUNK_BITS: u32 = 14;

fn brute_force(
    probs: &ProbGuesses,
    c: &RationalScore,
    counts: Option<ClassCounts>,
) -> Result<PosteriorResult> {
    let n = probs.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::EnumerationCap {
            n,
            cap: BRUTE_FORCE_MAX_N,
        });
    }
    check_counts(n, counts)?;
    let (order, ranked) = ranked(probs);

    // bit r of a mask is the label of the example at rank r
    let masks: u64 = 1 << n;
    let chunk = 1u64 << CHUNK_BITS.min(n as u32);
    let chunks: Vec<Partial> = (0..masks / chunk)
        .into_par_iter()
        .map(|chunk_index| {
            let mut acc = Partial::empty(n);
            let start = chunk_index * chunk;
            for mask in start..start + chunk {
                let n1 = mask.count_ones() as usize;
                let n0 = n - n1;
                if n0 == 0 || n1 == 0 {
                    continue;
                }
                if let Some(k) = counts {
                    if k.n0 != n0 {
                        continue;
                    }
                }
                let correct = correct_pairs_in_rank_order((0..n).map(|r| mask >> r & 1 == 1));
                if !c.matches(correct, (n0 * n1) as u64) {
                    continue;
                }
                let weight = (0..n).fold(1.0, |w, r| {
                    w * if mask >> r & 1 == 1 {
                        ranked[r]
                    } else {
                        1.0 - ranked[r]
                    }
                });
                acc.count += 1;
                acc.total += weight;
                for (r, slot) in acc.positive.iter_mut().enumerate() {
                    if mask >> r & 1 == 1 {
                        *slot += weight;
                    }
                }
            }
            acc
        })
        .collect();

    let mut sum = Partial::empty(n);
    for part in chunks {
        sum.count += part.count;
        sum.total += part.total;
        for (s, p) in sum.positive.iter_mut().zip(&part.positive) {
            *s += p;
        }
    }
    if sum.count == 0 {
        return Err(Error::NoSatisfyingLabeling);
    }

    let mut posterior = vec![0.0; n];
    for (r, &i) in order.iter().enumerate() {
        posterior[i] = sum.positive[r] / sum.total;
    }
    Ok(PosteriorResult {
        posterior,
        satisfying_count: sum.count,
        total_weight: sum.total,
        method: Method::BruteForce,
    })
}

/// Rank-ordered forward pass over `(negatives placed, correct pairs)` states.
///
/// `weights[r]` is the pair `(P(label 0), P(label 1))` for the example at
/// rank `r`. Returns the summed weight of, and the number of labelings
/// reaching, the final states that match `c`.
fn forward_pass<W: Weight>(
    weights: &[(W, W)],
    c: &RationalScore,
    counts: Option<ClassCounts>,
) -> W {
    let n = weights.len();
    let max_pairs = (n / 2) * (n - n / 2);
    let width = max_pairs + 1;
    // layer[a * width + m]
    let mut layer = vec![W::ZERO; (n + 1) * width];
    let mut next = layer.clone();
    layer[0] = W::ONE;

    for (t, (w0, w1)) in weights.iter().enumerate() {
        next.iter_mut().for_each(|x| *x = W::ZERO);
        for a in 0..=t {
            let reachable = a * (t - a);
            for m in 0..=reachable {
                let w = layer[a * width + m];
                if w.is_zero() {
                    continue;
                }
                next[(a + 1) * width + m].add_assign(w.mul(*w0));
                next[a * width + m + a].add_assign(w.mul(*w1));
            }
        }
        std::mem::swap(&mut layer, &mut next);
    }

    let p = u128::from(c.numerator());
    let q = u128::from(c.denominator());
    let mut total = W::ZERO;
    for n0 in 1..n {
        if counts.is_some_and(|k| k.n0 != n0) {
            continue;
        }
        let pairs = (n0 * (n - n0)) as u128;
        // m·q = p·pairs has an integer solution only when q divides p·pairs
        if (p * pairs) % q != 0 {
            continue;
        }
        let m = (p * pairs / q) as usize;
        if m <= n0 * (n - n0) {
            total.add_assign(layer[n0 * width + m]);
        }
    }
    total
}

trait Weight: Copy {
    const ZERO: Self;
    const ONE: Self;
    fn is_zero(&self) -> bool;
    fn mul(self, other: Self) -> Self;
    fn add_assign(&mut self, other: Self);
}

impl Weight for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn mul(self, other: Self) -> Self {
        self * other
    }

    fn add_assign(&mut self, other: Self) {
        *self += other;
    }
}

impl Weight for u128 {
    const ZERO: Self = 0;
    const ONE: Self = 1;

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn mul(self, other: Self) -> Self {
        self * other
    }

    fn add_assign(&mut self, other: Self) {
        *self += other;
    }
}

fn dp(probs: &ProbGuesses, c: &RationalScore, counts: Option<ClassCounts>) -> Result<PosteriorResult> {
    let n = probs.len();
    if n > DP_MAX_N {
        return Err(Error::EnumerationCap { n, cap: DP_MAX_N });
    }
    check_counts(n, counts)?;
    let (order, ranked) = ranked(probs);

    let satisfying_count = forward_pass(&vec![(1u128, 1u128); n], c, counts);
    if satisfying_count == 0 {
        return Err(Error::NoSatisfyingLabeling);
    }

    let weights: Vec<(f64, f64)> = ranked.iter().map(|&p| (1.0 - p, p)).collect();
    let total_weight = forward_pass(&weights, c, counts);

    // one pass per example with its label clamped to 1
    let clamped: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut w = weights.clone();
            w[r].0 = 0.0;
            forward_pass(&w, c, counts)
        })
        .collect();

    let mut posterior = vec![0.0; n];
    for (r, &i) in order.iter().enumerate() {
        posterior[i] = clamped[r] / total_weight;
    }
    Ok(PosteriorResult {
        posterior,
        satisfying_count,
        total_weight,
        method: Method::Dp,
    })
}

/// Number of two-class labelings of `n` rank-ordered examples whose AUC is
/// exactly `c`. Depends only on `n` and `c`.
pub fn count_satisfying(n: usize, c: &RationalScore) -> Result<u128> {
    count_satisfying_impl(n, c, None)
}

pub fn count_satisfying_with_counts(n: usize, c: &RationalScore, counts: ClassCounts) -> Result<u128> {
    count_satisfying_impl(n, c, Some(counts))
}

fn count_satisfying_impl(n: usize, c: &RationalScore, counts: Option<ClassCounts>) -> Result<u128> {
    if n < 2 {
        return Err(Error::TooFewScores(n));
    }
    if n > DP_MAX_N {
        return Err(Error::EnumerationCap { n, cap: DP_MAX_N });
    }
    check_counts(n, counts)?;
    Ok(forward_pass(&vec![(1u128, 1u128); n], c, counts))
}
