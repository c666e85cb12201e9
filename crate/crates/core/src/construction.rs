//! Building many labelings that share one AUC.
//!
//! For `c = p/q` with `0 < p < q` and `n = 4q` ranked examples:
//!
//! * `c ≥ 1/2`: `2(2p - q)` leading negatives followed by a mirror-symmetric
//!   band of length `2(3q - 2p)` holding `2q` positives.
//! * `c < 1/2`: with `r = q - p`, a mirror-symmetric band of length
//!   `2(3q - 2r)` holding `2q` positives, followed by `2(2r - q)` trailing
//!   negatives.
//!
//! Inside a mirror-symmetric band, correctly and incorrectly ordered pairs
//! pair off, so the padding alone decides the AUC. Choosing which `q` of the
//! `band_len / 2` half-band slots are positive gives
//! `C(band_len / 2, q)` distinct labelings, which is at least
//! `(2 - 2|c - 1/2|)^(n/4)`.

use serde::{Deserialize, Serialize};

use crate::auc::{Guesses, Labeling, RationalScore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionCase {
    HalfOrAbove,
    BelowHalf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub p: u64,
    pub q: u64,
    pub case: ConstructionCase,
    pub n: usize,
    /// Leading negatives (`HalfOrAbove`), otherwise 0.
    pub left_pad: usize,
    /// Trailing negatives (`BelowHalf`), otherwise 0.
    pub right_pad: usize,
    pub band_len: usize,
    pub band_pos: usize,
    pub band_neg: usize,
}

impl ConstructionPlan {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::InvalidConstruction(format!(
                "need 0 < p < q, got p={p}, q={q}"
            )));
        }
        let (p_us, q_us) = (to_usize(p)?, to_usize(q)?);
        let n = q_us
            .checked_mul(4)
            .ok_or_else(|| Error::InvalidConstruction(format!("q={q} is too large")))?;
        // band parameter is p for the upper case and r = q - p below half
        let (case, s) = if 2 * p_us >= q_us {
            (ConstructionCase::HalfOrAbove, p_us)
        } else {
            (ConstructionCase::BelowHalf, q_us - p_us)
        };
        let pad = 2 * (2 * s - q_us);
        let band_len = 2 * (3 * q_us - 2 * s);
        let (left_pad, right_pad) = match case {
            ConstructionCase::HalfOrAbove => (pad, 0),
            ConstructionCase::BelowHalf => (0, pad),
        };
        Ok(Self {
            p,
            q,
            case,
            n,
            left_pad,
            right_pad,
            band_len,
            band_pos: 2 * q_us,
            band_neg: 4 * (q_us - s),
        })
    }

    pub fn half_len(&self) -> usize {
        self.band_len / 2
    }

    /// Positives placed in each half of the band.
    pub fn half_pos(&self) -> usize {
        self.band_pos / 2
    }

    pub fn target(&self) -> RationalScore {
        RationalScore::new(self.p, self.q).expect("p < q")
    }

    /// Number of symmetric variants, `C(band_len / 2, q)`.
    pub fn variant_count(&self) -> u128 {
        binomial(self.half_len() as u64, self.half_pos() as u64)
    }

    /// Builds the labeling with positives at `half_choice` in the first half
    /// of the band, mirrored onto the second half.
    pub fn labeling(&self, half_choice: &[usize]) -> Result<Labeling> {
        let half = self.half_len();
        if half_choice.len() != self.half_pos() {
            return Err(Error::InvalidConstruction(format!(
                "half band needs exactly {} positives, got {}",
                self.half_pos(),
                half_choice.len()
            )));
        }
        let mut half_band = vec![false; half];
        for &slot in half_choice {
            if slot >= half || half_band[slot] {
                return Err(Error::InvalidConstruction(format!(
                    "half-band slot {slot} is out of range or repeated (half length {half})"
                )));
            }
            half_band[slot] = true;
        }

        let mut labels = Vec::with_capacity(self.n);
        labels.resize(self.left_pad, false);
        labels.extend(&half_band);
        labels.extend(half_band.iter().rev());
        labels.resize(self.n, false);
        Ok(Labeling::from_bools(labels))
    }
}

fn to_usize(v: u64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::InvalidConstruction(format!("{v} does not fit in usize")))
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// The guesses paired with every constructed labeling: `1, 2, …, n`.
pub fn rank_guesses(n: usize) -> Guesses {
    Guesses::new((1..=n).map(|i| i as f64).collect()).expect("n ≥ 4")
}

/// A labeling of length `4q` whose AUC against [`rank_guesses`] is `p/q`.
/// Without `half_choice`, positives fill the leading half-band slots.
pub fn construct_labeling(p: u64, q: u64, half_choice: Option<&[usize]>) -> Result<Labeling> {
    let plan = ConstructionPlan::new(p, q)?;
    match half_choice {
        Some(choice) => plan.labeling(choice),
        None => plan.labeling(&(0..plan.half_pos()).collect::<Vec<_>>()),
    }
}

/// Streams every symmetric variant, half-band subsets in lexicographic order.
#[derive(Debug, Clone)]
pub struct Variants {
    plan: ConstructionPlan,
    current: Option<Vec<usize>>,
    remaining: Option<usize>,
}

impl Iterator for Variants {
    type Item = Labeling;

    fn next(&mut self) -> Option<Labeling> {
        if self.remaining == Some(0) {
            return None;
        }
        let choice = self.current.take()?;
        let labeling = self.plan.labeling(&choice).expect("valid subset");
        self.current = next_combination(choice, self.plan.half_len());
        if let Some(r) = self.remaining.as_mut() {
            *r -= 1;
        }
        Some(labeling)
    }
}

/// Lexicographic successor of a sorted `k`-subset of `0..n`.
fn next_combination(mut comb: Vec<usize>, n: usize) -> Option<Vec<usize>> {
    let k = comb.len();
    let i = (0..k).rev().find(|&i| comb[i] < n - k + i)?;
    comb[i] += 1;
    for j in i + 1..k {
        comb[j] = comb[j - 1] + 1;
    }
    Some(comb)
}

pub fn enumerate_variants(p: u64, q: u64, limit: Option<usize>) -> Result<Variants> {
    let plan = ConstructionPlan::new(p, q)?;
    Ok(Variants {
        current: Some((0..plan.half_pos()).collect()),
        plan,
        remaining: limit,
    })
}

/// `(2 - 2|c - 1/2|)^(n/4)`.
pub fn lower_bound(c: &RationalScore, n: usize) -> Result<f64> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::InvalidConstruction(format!(
            "n must be a positive multiple of 4, got {n}"
        )));
    }
    if c.numerator() == 0 || c.is_one() {
        return Err(Error::InvalidConstruction(format!(
            "c must lie strictly between 0 and 1, got {c}"
        )));
    }
    let (num, den) = bound_base(c);
    Ok((num as f64 / den as f64).powi((n / 4) as i32))
}

/// Base of the bound as an exact fraction: `(3q - 2p)/q` at or above one
/// half, `(q + 2p)/q` below.
pub fn bound_base(c: &RationalScore) -> (u128, u128) {
    let p = u128::from(c.numerator());
    let q = u128::from(c.denominator());
    if 2 * p >= q {
        (3 * q - 2 * p, q)
    } else {
        (q + 2 * p, q)
    }
}

/// Exact check of `C(half_len, q) ≥ base^q` for the plan of `p/q`.
pub fn variant_count_meets_bound(p: u64, q: u64) -> Result<bool> {
    let plan = ConstructionPlan::new(p, q)?;
    let (num, den) = bound_base(&plan.target());
    let exp = u32::try_from(q).map_err(|_| Error::InvalidConstruction("q too large".into()))?;
    let lhs = den
        .checked_pow(exp)
        .and_then(|d| d.checked_mul(plan.variant_count()));
    let rhs = num.checked_pow(exp);
    match (lhs, rhs) {
        (Some(lhs), Some(rhs)) => Ok(lhs >= rhs),
        _ => Err(Error::InvalidConstruction(format!(
            "bound for q={q} overflows exact arithmetic"
        ))),
    }
}

/// Whether `(a + c)/(b + c) ≤ a/b`, by cross-multiplication. Always true
/// for `a > b > 0`, `c ≥ 0`.
pub fn lemma_ratio_check(a: u64, b: u64, c: u64) -> Result<bool> {
    if !(a > b && b > 0) {
        return Err(Error::InvalidConstruction(format!(
            "need a > b > 0, got a={a}, b={b}"
        )));
    }
    let (a, b, c) = (u128::from(a), u128::from(b), u128::from(c));
    Ok((a + c) * b <= a * (b + c))
}
