//! `auc-oracle`: batch commands for scoring, probing and attacking AUC
//! oracles.
//!
//! Exit codes:
//!
//! | code | meaning                                        |
//! |------|------------------------------------------------|
//! | 0    | success                                        |
//! | 1    | other input errors (ties, bad probabilities)   |
//! | 2    | invalid arguments                              |
//! | 3    | file or schema errors                          |
//! | 4    | AUC undefined (single-class labels)            |
//! | 5    | no labeling attains the requested AUC          |
//! | 6    | oracle query budget exhausted                  |

mod dataset;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use auc_oracle::construction::{rank_guesses, ConstructionPlan};
use auc_oracle::posterior::{
    posterior_brute_force_with_counts, posterior_dp_with_counts, ClassCounts,
};
use auc_oracle::sim::{aggregate, run_sweep, validate_bins, write_csv, SimConfig};
use auc_oracle::{
    auc_exact, auc_with_ties, deduce_certain_labels, enumerate_variants, lower_bound,
    perfect_auc_shortcut, posterior_brute_force, posterior_dp, Error, Guesses, Labeling, Oracle,
    OracleConfig, ProbGuesses, RationalScore,
};
use clap::{Parser, Subcommand, ValueEnum};

use crate::dataset::DatasetFile;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(3, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UndefinedAuc { .. } => 4,
            Error::NoSatisfyingLabeling => 5,
            Error::BudgetExhausted => 6,
            Error::InvalidFraction(_)
            | Error::InvalidClassCounts { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidConstruction(_)
            | Error::EnumerationCap { .. } => 2,
            _ => 1,
        };
        Self::new(code, e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::schema(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "auc-oracle", version, about = "Exact AUC scoring and AUC-oracle attacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bf,
    Dp,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact AUC of a dataset's guesses against its labels.
    Auc {
        dataset: PathBuf,
        /// Count tied (negative, positive) pairs as one half.
        #[arg(long)]
        ties: bool,
    },
    /// Deduce certainly-negative lowest and certainly-positive highest ranks.
    Attack1 {
        /// Exact AUC as p/q.
        #[arg(long)]
        auc: String,
        #[arg(long)]
        n0: usize,
        #[arg(long)]
        n1: usize,
        /// Dataset supplying guesses; without it indices are rank positions.
        dataset: Option<PathBuf>,
    },
    /// Posterior label probabilities given an exact AUC.
    Attack2 {
        dataset: PathBuf,
        #[arg(long)]
        auc: String,
        #[arg(long, value_enum, default_value = "dp")]
        method: MethodArg,
        /// Restrict to labelings with this many negatives (requires --n1).
        #[arg(long, requires = "n1")]
        n0: Option<usize>,
        #[arg(long, requires = "n0")]
        n1: Option<usize>,
    },
    /// Build labelings of size 4q with AUC exactly p/q.
    Construct {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        /// Print the first N symmetric variants.
        #[arg(long, value_name = "N")]
        variants: Option<usize>,
        /// Print the number of symmetric variants.
        #[arg(long)]
        count: bool,
        /// Print the lower bound on satisfying labelings.
        #[arg(long)]
        bound: bool,
        /// Write the default labeling as a dataset file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the probe-and-resubmit simulation sweep.
    Simulate {
        /// JSON simulation config; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        /// Feature dimensions, e.g. "4-16" or "4,8,12".
        #[arg(long)]
        m: Option<String>,
        /// Training-set sizes, e.g. "1-20".
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        n_test: Option<usize>,
        #[arg(long)]
        l2: Option<f64>,
        /// Comma-separated bin edges for the curve.
        #[arg(long)]
        bins: Option<String>,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Binned-curve JSON output path.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Answer guess files against hidden labels, one query per file.
    Oracle {
        /// Dataset holding the hidden labels.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        budget: Option<u32>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Round reported scores half-up to this many decimals.
        #[arg(long)]
        round: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(required = true)]
        queries: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command, out: &mut impl Write) -> CliResult {
    match command {
        Command::Auc { dataset, ties } => cmd_auc(&dataset, ties, out),
        Command::Attack1 {
            auc,
            n0,
            n1,
            dataset,
        } => cmd_attack1(&auc, n0, n1, dataset.as_deref(), out),
        Command::Attack2 {
            dataset,
            auc,
            method,
            n0,
            n1,
        } => {
            let counts = n0.zip(n1).map(|(n0, n1)| ClassCounts { n0, n1 });
            cmd_attack2(&dataset, &auc, method, counts, out)
        }
        Command::Construct {
            p,
            q,
            variants,
            count,
            bound,
            out: path,
        } => cmd_construct(p, q, variants, count, bound, path.as_deref(), out),
        Command::Simulate {
            config,
            seed,
            runs,
            m,
            k,
            n_test,
            l2,
            bins,
            out: csv,
            curve,
        } => {
            let mut cfg = match config {
                Some(path) => load_sim_config(&path)?,
                None => SimConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(runs) = runs {
                cfg.runs_per_cell = runs;
            }
            if let Some(m) = m {
                cfg.m_range = parse_int_list(&m)?;
            }
            if let Some(k) = k {
                cfg.k_range = parse_int_list(&k)?;
            }
            if let Some(n) = n_test {
                cfg.n_test = n;
            }
            if let Some(l2) = l2 {
                cfg.l2_reg = l2;
            }
            if let Some(bins) = bins {
                cfg.bins = parse_float_list(&bins)?;
            }
            cmd_simulate(&cfg, csv.as_deref(), curve.as_deref(), out)
        }
        Command::Oracle {
            labels,
            budget,
            noise,
            round,
            seed,
            queries,
        } => cmd_oracle(&labels, budget, noise, round, seed, &queries, out),
    }
}

fn cmd_auc(path: &Path, ties: bool, out: &mut impl Write) -> CliResult {
    let data = DatasetFile::load(path)?;
    let labels = Labeling::from_bits(data.require_labels()?)?;
    let guesses = Guesses::new(data.require_guesses()?.to_vec())?;
    let auc = if ties {
        auc_with_ties(&labels, &guesses)?
    } else {
        auc_exact(&labels, &guesses)?
    };
    writeln!(out, "{} {}", auc.reduced(), auc.to_f64())?;
    Ok(())
}

/// Parses an exact `p/q` AUC, refusing decimal input.
fn parse_exact_auc(text: &str) -> CliResult<RationalScore> {
    if text.contains('.') || text.contains('e') {
        return Err(CliError::usage(format!(
            "--auc {text}: an exact score is required for this attack; pass it as a fraction p/q"
        )));
    }
    Ok(text.parse()?)
}

/// Like [`parse_exact_auc`], but a well-formed fraction above 1 is reported
/// as unattainable rather than malformed.
fn parse_target_auc(text: &str) -> CliResult<RationalScore> {
    if let Some((p, q)) = text.split_once('/') {
        if let (Ok(p), Ok(q)) = (p.trim().parse::<u64>(), q.trim().parse::<u64>()) {
            if q > 0 && p > q {
                return Err(CliError::from(Error::NoSatisfyingLabeling));
            }
        }
    }
    parse_exact_auc(text)
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_attack1(
    auc: &str,
    n0: usize,
    n1: usize,
    dataset: Option<&Path>,
    out: &mut impl Write,
) -> CliResult {
    let c = parse_exact_auc(auc)?;
    let guesses = match dataset {
        Some(path) => Guesses::new(DatasetFile::load(path)?.require_guesses()?.to_vec())?,
        None => Guesses::new((0..n0 + n1).map(|i| i as f64).collect())
            .map_err(|_| CliError::from(Error::InvalidClassCounts { n0, n1, n: n0 + n1 }))?,
    };
    let result = deduce_certain_labels(&c, n0, n1, &guesses)?;
    writeln!(out, "k_neg={} k_pos={}", result.k_neg, result.k_pos)?;
    writeln!(out, "neg_indices={}", join(&result.neg_indices))?;
    writeln!(out, "pos_indices={}", join(&result.pos_indices))?;
    if let Some(labels) = perfect_auc_shortcut(&c, n0, n1, &guesses)? {
        writeln!(out, "labels={labels}")?;
    }
    Ok(())
}

/// Fixed-precision rendering with trailing zeros trimmed, so results that
/// agree to 1e-10 print identically.
fn format_prob(p: f64) -> String {
    let s = format!("{p:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn cmd_attack2(
    path: &Path,
    auc: &str,
    method: MethodArg,
    counts: Option<ClassCounts>,
    out: &mut impl Write,
) -> CliResult {
    let c = parse_target_auc(auc)?;
    let probs = ProbGuesses::new(DatasetFile::load(path)?.require_probs()?.to_vec())?;
    let result = match (method, counts) {
        (MethodArg::Bf, None) => posterior_brute_force(&probs, &c)?,
        (MethodArg::Dp, None) => posterior_dp(&probs, &c)?,
        (MethodArg::Bf, Some(k)) => posterior_brute_force_with_counts(&probs, &c, k)?,
        (MethodArg::Dp, Some(k)) => posterior_dp_with_counts(&probs, &c, k)?,
    };
    let values: Vec<String> = result.posterior.iter().map(|&p| format_prob(p)).collect();
    writeln!(out, "{}, count={}", values.join(" "), result.satisfying_count)?;
    Ok(())
}

fn cmd_construct(
    p: u64,
    q: u64,
    variants: Option<usize>,
    count: bool,
    bound: bool,
    path: Option<&Path>,
    out: &mut impl Write,
) -> CliResult {
    let plan = ConstructionPlan::new(p, q)?;
    let target = plan.target();

    if let Some(path) = path {
        let labeling = enumerate_variants(p, q, Some(1))?
            .next()
            .expect("at least one variant");
        let guesses: Vec<f64> = rank_guesses(plan.n).into();
        let data = DatasetFile::new(Some(guesses), Some(labeling.bits()), None);
        fs::write(path, data.to_json() + "\n")?;
    }

    if count || bound {
        let mut parts = Vec::new();
        if count {
            parts.push(format!("variants={}", enumerate_variants(p, q, None)?.count()));
        }
        if bound {
            parts.push(format!("bound={}", lower_bound(&target, plan.n)?));
        }
        writeln!(out, "{}", parts.join(" "))?;
        return Ok(());
    }

    let guesses = rank_guesses(plan.n);
    for labeling in enumerate_variants(p, q, Some(variants.unwrap_or(1)))? {
        if auc_exact(&labeling, &guesses)? != target {
            return Err(CliError::new(1, format!("variant {labeling} misses {target}")));
        }
        writeln!(out, "{labeling}")?;
    }
    writeln!(out, "n={} auc={}", plan.n, target.reduced())?;
    Ok(())
}

fn load_sim_config(path: &Path) -> CliResult<SimConfig> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))
}

/// `"4"`, `"4,5,9"` or `"4-16"` (inclusive), mixed freely.
fn parse_int_list(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::usage(format!("invalid integer list {text:?}"));
    let mut values = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                values.extend(lo..=hi);
            }
            None => values.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(values)
}

fn parse_float_list(text: &str) -> CliResult<Vec<f64>> {
    let edges = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::usage(format!("invalid bin edges {text:?}")))?;
    validate_bins(&edges)?;
    Ok(edges)
}

fn cmd_simulate(
    config: &SimConfig,
    csv: Option<&Path>,
    curve: Option<&Path>,
    out: &mut impl Write,
) -> CliResult {
    let records = run_sweep(config)?;
    match csv {
        Some(path) => {
            let mut buf = Vec::new();
            write_csv(&records, &mut buf)?;
            fs::write(path, buf)?;
        }
        None => write_csv(&records, &mut *out)?,
    }
    if let Some(path) = curve {
        let summary = aggregate(&records, &config.bins)?;
        let json = serde_json::to_string_pretty(&summary).expect("plain data serializes");
        fs::write(path, json + "\n")?;
    }
    if csv.is_some() {
        writeln!(out, "records={}", records.len())?;
    }
    Ok(())
}

fn cmd_oracle(
    labels_path: &Path,
    budget: Option<u32>,
    noise: f64,
    round: Option<u32>,
    seed: u64,
    queries: &[PathBuf],
    out: &mut impl Write,
) -> CliResult {
    let labels = Labeling::from_bits(DatasetFile::load(labels_path)?.require_labels()?)?;
    let config = OracleConfig::hardened(budget, noise, round);
    let mut oracle = Oracle::new(labels, config, seed)?;
    for (i, path) in queries.iter().enumerate() {
        let guesses = Guesses::new(DatasetFile::load(path)?.require_guesses()?.to_vec())?;
        let response = oracle.query(&guesses).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("query {}: {}", i + 1, err.message);
            err
        })?;
        let score = match round {
            Some(d) => format!("{:.*}", d as usize, response.score_float),
            None => response.score_float.to_string(),
        };
        let mut line = format!("query {}:", i + 1);
        if let Some(frac) = response.score_fraction {
            line.push_str(&format!(" {frac}"));
        }
        line.push_str(&format!(" {score}"));
        if let Some(left) = response.queries_remaining {
            line.push_str(&format!(" remaining={left}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_lists() {
        assert_eq!(parse_int_list("4").unwrap(), vec![4]);
        assert_eq!(parse_int_list("4-6,9").unwrap(), vec![4, 5, 6, 9]);
        assert!(parse_int_list("6-4").is_err());
        assert!(parse_int_list("a").is_err());
    }

    #[test]
    fn float_lists() {
        assert_eq!(parse_float_list("0,0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_float_list("0.5,0.2").unwrap_err().code, 2);
    }

    #[test]
    fn exact_auc_policy() {
        assert_eq!(parse_exact_auc("0.985").unwrap_err().code, 2);
        assert_eq!(parse_exact_auc("197/200").unwrap(), RationalScore::new(197, 200).unwrap());
        assert_eq!(parse_target_auc("5/4").unwrap_err().code, 5);
        assert_eq!(parse_target_auc("1/0").unwrap_err().code, 2);
    }

    #[test]
    fn probability_formatting() {
        assert_eq!(format_prob(1.0), "1");
        assert_eq!(format_prob(0.0), "0");
        assert_eq!(format_prob(0.375), "0.375");
        assert_eq!(format_prob(0.375 + 1e-15), "0.375");
        assert_eq!(format_prob(2.0 / 3.0), "0.6666666667");
    }
}
