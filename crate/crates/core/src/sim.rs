//! Synthetic logistic-regression contests probed with a single AUC query.
//!
//! Each trial draws a true parameter vector and standard-normal features,
//! labels every example with `Bernoulli(sigmoid(θᵀx))`, fits an
//! L2-regularized logistic regression on `k` training examples, submits the
//! fitted probabilities for the `n` test examples to an exact oracle,
//! replaces them with the AUC-conditioned posterior, and resubmits. The
//! record keeps both scores and the gain `C' - C`.
//!
//! # Seeding
//!
//! Every trial gets its own ChaCha8 stream seeded with
//! `derive_seed(master, &[m, k, run])`, where `derive_seed` folds each part
//! into the state with SplitMix64:
//!
//! ```text
//! s = splitmix64(master); for x in parts { s = splitmix64(s ^ x) }
//! ```
//!
//! Trials are therefore independent of execution order and can run in
//! parallel while the output stays byte-identical.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auc::{Guesses, Labeling};
use crate::error::{Error, Result};
use crate::oracle::{Oracle, OracleConfig};
use crate::posterior::{posterior_dp, ProbGuesses};

/// Attempts allowed for drawing a two-class test set (and, separately, a
/// tie-free guess vector).
pub const RESAMPLE_CAP: usize = 1000;
pub const MAX_ITERATIONS: usize = 10_000;
pub const GRADIENT_TOLERANCE: f64 = 1e-8;
/// Upper limit on the tie-breaking step added to resubmitted posteriors.
pub const JITTER_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_test: usize,
    pub m_range: Vec<usize>,
    pub k_range: Vec<usize>,
    pub runs_per_cell: usize,
    pub l2_reg: f64,
    pub seed: u64,
    /// Strictly increasing edges; the last bin is closed on the right.
    pub bins: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_test: 16,
            m_range: (4..=16).collect(),
            k_range: (1..=20).collect(),
            runs_per_cell: 50,
            l2_reg: 1.0,
            seed: 2016,
            bins: default_bins(),
        }
    }
}

/// Twenty bins of width 0.05 over `[0, 1]`.
pub fn default_bins() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_test < 4 {
            return bad(format!("n_test must be at least 4, got {}", self.n_test));
        }
        if self.runs_per_cell == 0 {
            return bad("runs_per_cell must be at least 1".into());
        }
        if !(self.l2_reg >= 0.0 && self.l2_reg.is_finite()) {
            return bad(format!("l2_reg must be finite and non-negative, got {}", self.l2_reg));
        }
        if self.m_range.is_empty() || self.m_range.contains(&0) {
            return bad("m_range must be non-empty with every m ≥ 1".into());
        }
        if self.k_range.is_empty() || self.k_range.contains(&0) {
            return bad("k_range must be non-empty with every k ≥ 1".into());
        }
        validate_bins(&self.bins)
    }
}

pub fn validate_bins(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidConfig("at least two bin edges are required".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "bin edges must be finite and strictly increasing, got {edges:?}"
        )));
    }
    Ok(())
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |s, &x| splitmix64(s ^ x))
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Feature rows with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: Vec<f64>,
}

impl ModelParams {
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.theta, x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub theta_true: ModelParams,
    pub train: Dataset,
    pub test: Dataset,
    /// The test set had to be redrawn because it held a single class.
    pub resampled: bool,
}

fn draw_dataset(theta: &[f64], rows: usize, rng: &mut impl Rng) -> Dataset {
    let mut features = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let x: Vec<f64> = (0..theta.len()).map(|_| rng.sample(StandardNormal)).collect();
        let p = sigmoid(dot(theta, &x));
        labels.push(rng.random::<f64>() < p);
        features.push(x);
    }
    Dataset { features, labels }
}

/// Draws a world with a fixed `theta_true`.
pub fn generate_world_with_theta(
    theta_true: Vec<f64>,
    n_test: usize,
    k_train: usize,
    rng: &mut impl Rng,
) -> Result<World> {
    let train = draw_dataset(&theta_true, k_train, rng);
    for attempt in 0..RESAMPLE_CAP {
        let test = draw_dataset(&theta_true, n_test, rng);
        if test.labels.iter().any(|&y| y) && test.labels.iter().any(|&y| !y) {
            return Ok(World {
                theta_true: ModelParams { theta: theta_true },
                train,
                test,
                resampled: attempt > 0,
            });
        }
    }
    Err(Error::ResampleLimit(RESAMPLE_CAP))
}

pub fn generate_world_from_rng(
    m: usize,
    n_test: usize,
    k_train: usize,
    rng: &mut impl Rng,
) -> Result<World> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be at least 1".into()));
    }
    let theta: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    generate_world_with_theta(theta, n_test, k_train, rng)
}

pub fn generate_world(m: usize, n_test: usize, k_train: usize, seed: u64) -> Result<World> {
    generate_world_from_rng(m, n_test, k_train, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Regularized negative log-likelihood
/// `Σ [log(1 + exp(θᵀx)) - y·θᵀx] + l2_reg·‖θ‖²/2`.
pub fn objective(theta: &[f64], data: &Dataset, l2_reg: f64) -> f64 {
    let nll: f64 = data
        .features
        .iter()
        .zip(&data.labels)
        .map(|(x, &y)| {
            let z = dot(theta, x);
            // log(1 + e^z) computed without overflow
            let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
            softplus - if y { z } else { 0.0 }
        })
        .sum();
    nll + 0.5 * l2_reg * dot(theta, theta)
}

/// `Σ (sigmoid(θᵀx) - y)·x + l2_reg·θ`.
pub fn gradient(theta: &[f64], data: &Dataset, l2_reg: f64) -> Vec<f64> {
    let mut grad: Vec<f64> = theta.iter().map(|t| l2_reg * t).collect();
    for (x, &y) in data.features.iter().zip(&data.labels) {
        let residual = sigmoid(dot(theta, x)) - f64::from(u8::from(y));
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += residual * xi;
        }
    }
    grad
}

/// `objective(θ + d) - objective(θ)`, evaluated term by term so that the
/// tiny decreases near the optimum are not lost to cancellation.
pub fn objective_change(theta: &[f64], d: &[f64], data: &Dataset, l2_reg: f64) -> f64 {
    let nll: f64 = data
        .features
        .iter()
        .zip(&data.labels)
        .map(|(x, &y)| {
            let dz = dot(d, x);
            // softplus(z + dz) - softplus(z) = ln(1 + sigmoid(z)·(e^dz - 1))
            let softplus = (sigmoid(dot(theta, x)) * dz.exp_m1()).ln_1p();
            softplus - if y { dz } else { 0.0 }
        })
        .sum();
    let reg: f64 = theta.iter().zip(d).map(|(t, di)| di * (2.0 * t + di)).sum();
    nll + 0.5 * l2_reg * reg
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

/// Full-batch gradient descent from `θ = 0` with Armijo backtracking.
/// Stops when `‖∇‖ < GRADIENT_TOLERANCE` or after `MAX_ITERATIONS` steps;
/// the final iterate is returned either way.
pub fn train_logistic(train: &Dataset, l2_reg: f64) -> Result<TrainOutcome> {
    let m = train
        .features
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidConfig("training set must be non-empty".into()))?;
    let mut theta = vec![0.0; m];
    let mut grad = gradient(&theta, train, l2_reg);
    let mut norm = dot(&grad, &grad).sqrt();
    let mut step = 1.0;
    let mut iterations = 0;

    while norm >= GRADIENT_TOLERANCE && iterations < MAX_ITERATIONS {
        iterations += 1;
        let sq = norm * norm;
        let mut accepted = false;
        for _ in 0..60 {
            let d: Vec<f64> = grad.iter().map(|g| -step * g).collect();
            if objective_change(&theta, &d, train, l2_reg) <= -0.5 * step * sq {
                theta.iter_mut().zip(&d).for_each(|(t, di)| *t += di);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no representable decrease left along the gradient
            break;
        }
        grad = gradient(&theta, train, l2_reg);
        norm = dot(&grad, &grad).sqrt();
        step *= 2.0;
    }

    Ok(TrainOutcome {
        params: ModelParams { theta },
        iterations,
        gradient_norm: norm,
        converged: norm < GRADIENT_TOLERANCE,
    })
}

/// Separates tied values by adding `i·ε` to the value at index `i`, with
/// `ε = min(1e-12, g / (2n))` and `g` the smallest gap between distinct
/// values, so strictly unequal values keep their order. If floating-point
/// rounding still leaves a collision, the values are replaced by their
/// ranks under `(value, index)` ordering, which preserves the same order.
pub fn jitter_ties(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let min_gap = order
        .windows(2)
        .map(|w| values[w[1]] - values[w[0]])
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let eps = if min_gap.is_finite() {
        JITTER_EPSILON.min(min_gap / (2.0 * n as f64))
    } else {
        JITTER_EPSILON
    };

    let jittered: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| v + i as f64 * eps)
        .collect();
    let strictly_increasing = order.windows(2).all(|w| jittered[w[0]] < jittered[w[1]]);
    if strictly_increasing {
        return jittered;
    }
    let mut ranks = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        ranks[i] = rank as f64;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRunRecord {
    pub m: usize,
    pub k: usize,
    pub run: usize,
    pub initial_auc: f64,
    pub post_auc: f64,
    pub delta: f64,
    pub satisfying_count: u128,
    pub degenerate: bool,
}

/// One full probe-and-resubmit trial for cell `(m, k)`.
pub fn run_attack2_trial(config: &SimConfig, m: usize, k: usize, run: usize) -> Result<SimRunRecord> {
    let seed = derive_seed(config.seed, &[m as u64, k as u64, run as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degenerate = false;

    for _ in 0..RESAMPLE_CAP {
        let world = generate_world_from_rng(m, config.n_test, k, &mut rng)?;
        degenerate |= world.resampled;
        let model = train_logistic(&world.train, config.l2_reg)?.params;
        let probs: Vec<f64> = world.test.features.iter().map(|x| model.predict(x)).collect();
        // saturated or tied probabilities cannot be submitted; redraw
        let Ok(probs) = ProbGuesses::new(probs) else {
            degenerate = true;
            continue;
        };

        let labels = Labeling::from_bools(world.test.labels);
        let mut oracle = Oracle::new(labels, OracleConfig::default(), splitmix64(seed))?;
        let first = oracle.query(&probs.to_guesses())?;
        let c = first.score_fraction.expect("exact oracle");
        let posterior = posterior_dp(&probs, &c)?;
        let resubmission = Guesses::new(jitter_ties(&posterior.posterior))?;
        let second = oracle.query(&resubmission)?;

        return Ok(SimRunRecord {
            m,
            k,
            run,
            initial_auc: first.score_float,
            post_auc: second.score_float,
            delta: second.score_float - first.score_float,
            satisfying_count: posterior.satisfying_count,
            degenerate,
        });
    }
    Err(Error::ResampleLimit(RESAMPLE_CAP))
}

/// Every trial of the sweep, ordered by `(m, k, run)`.
pub fn run_sweep(config: &SimConfig) -> Result<Vec<SimRunRecord>> {
    config.validate()?;
    let cells: Vec<(usize, usize, usize)> = config
        .m_range
        .iter()
        .flat_map(|&m| {
            config
                .k_range
                .iter()
                .flat_map(move |&k| (0..config.runs_per_cell).map(move |run| (m, k, run)))
        })
        .collect();
    let mut records = cells
        .into_par_iter()
        .map(|(m, k, run)| run_attack2_trial(config, m, k, run))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.m, r.k, r.run));
    Ok(records)
}

pub const CSV_HEADER: &str = "m,k,run,C,C_prime,delta,satisfying_count,degenerate";

pub fn write_csv<W: Write>(records: &[SimRunRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.m, r.k, r.run, r.initial_auc, r.post_auc, r.delta, r.satisfying_count, r.degenerate
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean_delta: Option<f64>,
    pub std_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub version: u32,
    pub bins: Vec<BinSummary>,
}

/// Index of the bin holding `x`; the last bin includes its right edge.
fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    let last = edges.len() - 2;
    if x == edges[last + 1] {
        return Some(last);
    }
    (0..=last).find(|&i| edges[i] <= x && x < edges[i + 1])
}

/// Mean gain and standard error per initial-AUC bin. Records outside the
/// edges are ignored.
pub fn aggregate(records: &[SimRunRecord], edges: &[f64]) -> Result<Curve> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    validate_bins(edges)?;
    let mut sorted: Vec<&SimRunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.m, r.k, r.run));

    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); edges.len() - 1];
    for r in sorted {
        if let Some(i) = bin_index(edges, r.initial_auc) {
            groups[i].push(r.delta);
        }
    }
    let bins = groups
        .iter()
        .enumerate()
        .map(|(i, deltas)| {
            let count = deltas.len();
            let mean = (count > 0).then(|| deltas.iter().sum::<f64>() / count as f64);
            let std_err = mean.filter(|_| count > 1).map(|mu| {
                let var = deltas.iter().map(|d| (d - mu).powi(2)).sum::<f64>() / (count - 1) as f64;
                (var / count as f64).sqrt()
            });
            BinSummary {
                lo: edges[i],
                hi: edges[i + 1],
                count,
                mean_delta: mean,
                std_err,
            }
        })
        .collect();
    Ok(Curve { version: 1, bins })
}

/// Mean gain over records with initial AUC in `[lo, hi)`, or `None`.
pub fn mean_gain_in(records: &[SimRunRecord], lo: f64, hi: f64) -> Option<f64> {
    let deltas: Vec<f64> = records
        .iter()
        .filter(|r| r.initial_auc >= lo && r.initial_auc < hi)
        .map(|r| r.delta)
        .collect();
    (!deltas.is_empty()).then(|| deltas.iter().sum::<f64>() / deltas.len() as f64)
}
