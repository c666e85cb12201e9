//! Exact AUC computation over (negative, positive) pairs.
//!
//! The AUC of a guess vector is the fraction of pairs `(i, j)` with
//! `y_i = 0`, `y_j = 1` whose scores are ordered `ŷ_i < ŷ_j`. Pair counts are
//! kept as integers so two AUC values can be compared exactly.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real-valued guesses submitted for a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Guesses {
    scores: Vec<f64>,
}

impl Guesses {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.len() < 2 {
            return Err(Error::TooFewScores(scores.len()));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteScore(i));
        }
        Ok(Self { scores })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// First pair of indices sharing a score, if any. Equality is exact.
    pub fn first_tie(&self) -> Option<(usize, usize)> {
        let order = sorted_indices(&self.scores);
        order
            .windows(2)
            .find(|w| self.scores[w[0]] == self.scores[w[1]])
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    pub fn is_distinct(&self) -> bool {
        self.first_tie().is_none()
    }

    pub(crate) fn ensure_distinct(&self) -> Result<()> {
        match self.first_tie() {
            Some((first, second)) => Err(Error::TiedGuesses { first, second }),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<f64>> for Guesses {
    type Error = Error;

    fn try_from(scores: Vec<f64>) -> Result<Self> {
        Self::new(scores)
    }
}

impl From<Guesses> for Vec<f64> {
    fn from(g: Guesses) -> Self {
        g.scores
    }
}

/// Binary ground-truth labels with cached class counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Labeling {
    labels: Vec<bool>,
    n0: usize,
    n1: usize,
}

impl Labeling {
    pub fn from_bools(labels: Vec<bool>) -> Self {
        let n1 = labels.iter().filter(|&&y| y).count();
        let n0 = labels.len() - n1;
        Self { labels, n0, n1 }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let labels = bits
            .iter()
            .enumerate()
            .map(|(index, &value)| match value {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::InvalidLabel { index, value }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(labels))
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn bits(&self) -> Vec<u8> {
        self.labels.iter().map(|&y| u8::from(y)).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn has_both_classes(&self) -> bool {
        self.n0 > 0 && self.n1 > 0
    }

    /// Every label inverted.
    pub fn flipped(&self) -> Self {
        Self {
            labels: self.labels.iter().map(|&y| !y).collect(),
            n0: self.n1,
            n1: self.n0,
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            labels: self.labels.iter().rev().copied().collect(),
            n0: self.n0,
            n1: self.n1,
        }
    }

    pub(crate) fn ensure_both_classes(&self) -> Result<()> {
        if self.has_both_classes() {
            Ok(())
        } else {
            Err(Error::UndefinedAuc {
                n0: self.n0,
                n1: self.n1,
            })
        }
    }
}

impl TryFrom<Vec<u8>> for Labeling {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::from_bits(&bits)
    }
}

impl From<Labeling> for Vec<u8> {
    fn from(l: Labeling) -> Self {
        l.bits()
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &y) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", u8::from(y))?;
        }
        Ok(())
    }
}

/// An AUC held as an exact fraction `numerator / denominator` in `[0, 1]`.
///
/// Equality and ordering compare values, so `2/4 == 1/2`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RationalScore {
    numerator: u64,
    denominator: u64,
}

impl RationalScore {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidFraction("denominator must be positive".into()));
        }
        if numerator > denominator {
            return Err(Error::InvalidFraction(format!(
                "{numerator}/{denominator} exceeds 1"
            )));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn one() -> Self {
        Self {
            numerator: 1,
            denominator: 1,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn reduced(&self) -> Self {
        let g = gcd(self.numerator, self.denominator);
        Self {
            numerator: self.numerator / g,
            denominator: self.denominator / g,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `1 - self`, the AUC of the same guesses under flipped labels.
    pub fn complement(&self) -> Self {
        Self {
            numerator: self.denominator - self.numerator,
            denominator: self.denominator,
        }
    }

    pub fn is_one(&self) -> bool {
        self.numerator == self.denominator
    }

    /// True when `pairs / total` has the same value as `self`.
    pub fn matches(&self, pairs: u64, total: u64) -> bool {
        u128::from(pairs) * u128::from(self.denominator)
            == u128::from(self.numerator) * u128::from(total)
    }
}

impl PartialEq for RationalScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RationalScore {}

impl PartialOrd for RationalScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalScore {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u128::from(self.numerator) * u128::from(other.denominator);
        let rhs = u128::from(other.numerator) * u128::from(self.denominator);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for RationalScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Parses `"p/q"`, or a bare integer `"0"` / `"1"`. Decimal input is
/// rejected since it cannot carry an exact pair count.
impl FromStr for RationalScore {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |part: &str| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidFraction(format!("expected p/q, got {s:?}")))
        };
        match s.split_once('/') {
            Some((p, q)) => Self::new(parse(p)?, parse(q)?),
            None => Self::new(parse(s)?, 1),
        }
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn sorted_indices(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    order
}

fn check_lengths(labels: &Labeling, guesses: &Guesses) -> Result<()> {
    if labels.len() != guesses.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: guesses.len(),
        });
    }
    Ok(())
}

/// Indices sorted by ascending score.
pub fn rank_order(guesses: &Guesses) -> Result<Vec<usize>> {
    guesses.ensure_distinct()?;
    Ok(sorted_indices(guesses.scores()))
}

/// Number of correctly ordered (negative, positive) pairs when labels are
/// laid out in ascending rank order.
pub(crate) fn correct_pairs_in_rank_order(ranked: impl IntoIterator<Item = bool>) -> u64 {
    let mut negatives = 0u64;
    let mut correct = 0u64;
    for y in ranked {
        if y {
            correct += negatives;
        } else {
            negatives += 1;
        }
    }
    correct
}

/// AUC of distinct guesses, returned unreduced as `(correct pairs, n0·n1)`.
pub fn auc_exact(labels: &Labeling, guesses: &Guesses) -> Result<RationalScore> {
    check_lengths(labels, guesses)?;
    labels.ensure_both_classes()?;
    let order = rank_order(guesses)?;
    let correct = correct_pairs_in_rank_order(order.iter().map(|&i| labels.labels()[i]));
    let total = (labels.n0() * labels.n1()) as u64;
    RationalScore::new(correct, total)
}

/// Tie-aware AUC. Tied (negative, positive) pairs count one half, so the
/// result is `(2·correct + tied, 2·n0·n1)`.
pub fn auc_with_ties(labels: &Labeling, guesses: &Guesses) -> Result<RationalScore> {
    check_lengths(labels, guesses)?;
    labels.ensure_both_classes()?;
    let scores = guesses.scores();
    let order = sorted_indices(scores);

    let mut negatives_below = 0u64;
    let mut doubled = 0u64;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let group = &order[start..end];
        let group_pos = group.iter().filter(|&&i| labels.labels()[i]).count() as u64;
        let group_neg = group.len() as u64 - group_pos;
        doubled += group_pos * (2 * negatives_below + group_neg);
        negatives_below += group_neg;
        start = end;
    }
    RationalScore::new(doubled, 2 * (labels.n0() * labels.n1()) as u64)
}
