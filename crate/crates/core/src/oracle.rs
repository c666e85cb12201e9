//! A simulated contest oracle that scores submissions against hidden labels.
//!
//! The default configuration reports the exact AUC fraction. Hardened
//! configurations round the score (round-half-up, computed exactly from the
//! fraction), then add zero-mean Gaussian noise clamped to `[0, 1]`, and may
//! cap the number of queries. Noise is drawn from a ChaCha8 stream seeded
//! with `seed`, so responses are reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::auc::{auc_exact, Guesses, Labeling, RationalScore};
use crate::error::{Error, Result};

/// Largest supported `round_decimals`; `10^18` still fits in a `u64`.
pub const MAX_ROUND_DECIMALS: u32 = 18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub budget: Option<u32>,
    pub noise_stddev: f64,
    pub round_decimals: Option<u32>,
    pub report_exact_fraction: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            budget: None,
            noise_stddev: 0.0,
            round_decimals: None,
            report_exact_fraction: true,
        }
    }
}

impl OracleConfig {
    /// A configuration with the given perturbations; the exact fraction is
    /// reported only when neither rounding nor noise is active.
    pub fn hardened(budget: Option<u32>, noise_stddev: f64, round_decimals: Option<u32>) -> Self {
        Self {
            budget,
            noise_stddev,
            round_decimals,
            report_exact_fraction: noise_stddev == 0.0 && round_decimals.is_none(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_stddev >= 0.0 && self.noise_stddev.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise_stddev must be finite and non-negative, got {}",
                self.noise_stddev
            )));
        }
        if self.budget == Some(0) {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        if let Some(d) = self.round_decimals {
            if d > MAX_ROUND_DECIMALS {
                return Err(Error::InvalidConfig(format!(
                    "round_decimals must be at most {MAX_ROUND_DECIMALS}, got {d}"
                )));
            }
        }
        let perturbed = self.noise_stddev > 0.0 || self.round_decimals.is_some();
        if perturbed && self.report_exact_fraction {
            return Err(Error::InvalidConfig(
                "exact fractions cannot be reported when rounding or noise is enabled".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResponse {
    pub score_float: f64,
    pub score_fraction: Option<RationalScore>,
    pub queries_remaining: Option<u32>,
}

/// Holds hidden labels and answers AUC queries.
#[derive(Debug, Clone)]
pub struct Oracle {
    labels: Labeling,
    config: OracleConfig,
    remaining: Option<u32>,
    rng: ChaCha8Rng,
}

impl Oracle {
    pub fn new(labels: Labeling, config: OracleConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        labels.ensure_both_classes()?;
        Ok(Self {
            remaining: config.budget,
            labels,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn queries_remaining(&self) -> Option<u32> {
        self.remaining
    }

    /// Scores `guesses` against the hidden labels. Failed queries do not
    /// consume budget.
    pub fn query(&mut self, guesses: &Guesses) -> Result<OracleResponse> {
        if self.remaining == Some(0) {
            return Err(Error::BudgetExhausted);
        }
        let exact = auc_exact(&self.labels, guesses)?;

        let mut score = match self.config.round_decimals {
            Some(d) => round_half_up(&exact, d),
            None => exact.to_f64(),
        };
        if self.config.noise_stddev > 0.0 {
            let normal = Normal::new(0.0, self.config.noise_stddev)
                .expect("validated noise_stddev");
            score = (score + normal.sample(&mut self.rng)).clamp(0.0, 1.0);
        }

        if let Some(r) = self.remaining.as_mut() {
            *r -= 1;
        }
        Ok(OracleResponse {
            score_float: score,
            score_fraction: self.config.report_exact_fraction.then(|| exact.reduced()),
            queries_remaining: self.remaining,
        })
    }
}

/// Rounds `score` half-up to `decimals` places using integer arithmetic on
/// the fraction, so `3/4` at one decimal is exactly the float nearest 0.8.
pub fn round_half_up(score: &RationalScore, decimals: u32) -> f64 {
    let scale = 10u128.pow(decimals);
    let num = u128::from(score.numerator());
    let den = u128::from(score.denominator());
    let units = (2 * num * scale + den) / (2 * den);
    units as f64 / scale as f64
}
