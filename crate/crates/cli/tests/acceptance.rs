//! Acceptance suite. Each test checks one criterion and prints a single
//! `PASS`/`FAIL` line; run with `--nocapture` to see them.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use auc_oracle::construction::{variant_count_meets_bound, ConstructionPlan};
use auc_oracle::posterior::count_satisfying;
use auc_oracle::sim::{aggregate, gradient, mean_gain_in, objective, run_sweep, Dataset, SimConfig};
use auc_oracle::{
    auc_exact, deduce_certain_labels, enumerate_variants, posterior_brute_force, posterior_dp,
    rank_order, Error, Guesses, Labeling, ProbGuesses, RationalScore,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    println!("[{status}] criterion {id}: {name} ({detail})");
    assert!(passed, "criterion {id} failed: {detail}");
}

fn frac(p: u64, q: u64) -> RationalScore {
    RationalScore::new(p, q).unwrap()
}

fn binomial_count(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn bits_of(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

fn random_distinct_scores(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut ranks: Vec<usize> = (0..n).collect();
    ranks.shuffle(rng);
    ranks
        .into_iter()
        .map(|r| (r as f64 + rng.random_range(0.05..0.95)) / (n as f64 + 1.0))
        .collect()
}

fn random_two_class(n: usize, rng: &mut ChaCha8Rng) -> Labeling {
    loop {
        let l = Labeling::from_bools((0..n).map(|_| rng.random_bool(0.5)).collect());
        if l.has_both_classes() {
            return l;
        }
    }
}

#[test]
fn criterion_1_table_reproduction() {
    let start = Instant::now();
    let guesses = Guesses::new(vec![0.5, 0.6, 0.9, 0.4]).unwrap();
    // (y1, y2, y3, y4) -> AUC, row by row; None where undefined
    let table: [([u8; 4], Option<(u64, u64)>); 16] = [
        ([0, 0, 0, 0], None),
        ([0, 0, 0, 1], Some((0, 1))),
        ([0, 0, 1, 0], Some((1, 1))),
        ([0, 0, 1, 1], Some((1, 2))),
        ([0, 1, 0, 0], Some((2, 3))),
        ([0, 1, 0, 1], Some((1, 4))),
        ([0, 1, 1, 0], Some((1, 1))),
        ([0, 1, 1, 1], Some((2, 3))),
        ([1, 0, 0, 0], Some((1, 3))),
        ([1, 0, 0, 1], Some((0, 1))),
        ([1, 0, 1, 0], Some((3, 4))),
        ([1, 0, 1, 1], Some((1, 3))),
        ([1, 1, 0, 0], Some((1, 2))),
        ([1, 1, 0, 1], Some((0, 1))),
        ([1, 1, 1, 0], Some((1, 1))),
        ([1, 1, 1, 1], None),
    ];
    let mut mismatches = Vec::new();
    for (row, expected) in table {
        let labels = Labeling::from_bits(&row).unwrap();
        let got = auc_exact(&labels, &guesses);
        let ok = match expected {
            Some((p, q)) => got == Ok(frac(p, q)),
            None => matches!(got, Err(Error::UndefinedAuc { .. })),
        };
        if !ok {
            mismatches.push(format!("{row:?} -> {got:?}"));
        }
    }
    let unique_075 = table
        .iter()
        .filter(|(_, e)| *e == Some((3, 4)))
        .count();
    let elapsed = start.elapsed();
    report(
        1,
        "four-example AUC table",
        mismatches.is_empty() && unique_075 == 1 && elapsed < Duration::from_secs(1),
        &format!("{} mismatches, {elapsed:?}", mismatches.len()),
    );
}

#[test]
fn criterion_2_attack1_worked_example() {
    let guesses = Guesses::new((0..100).map(|i| i as f64).collect()).unwrap();
    let r = deduce_certain_labels(&frac(197, 200), 45, 55, &guesses).unwrap();
    report(
        2,
        "Attack 1 worked example",
        r.k_neg == 7 && r.k_pos == 17,
        &format!("k_neg={} k_pos={}", r.k_neg, r.k_pos),
    );
}

#[test]
fn criterion_3_attack1_soundness_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    let mut deduced = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=12);
        let labels = random_two_class(n, &mut rng);
        let guesses = Guesses::new(random_distinct_scores(n, &mut rng)).unwrap();
        let c = auc_exact(&labels, &guesses).unwrap();
        let result = deduce_certain_labels(&c, labels.n0(), labels.n1(), &guesses).unwrap();
        deduced += result.k_neg + result.k_pos;
        let order = rank_order(&guesses).unwrap();
        assert_eq!(result.neg_indices, order[..result.k_neg]);
        assert_eq!(result.pos_indices, order[n - result.k_pos..]);

        for mask in 0u32..1 << n {
            let candidate = Labeling::from_bools(bits_of(mask, n));
            if candidate.n0() != labels.n0() || auc_exact(&candidate, &guesses).unwrap() != c {
                continue;
            }
            let y = candidate.labels();
            if result.neg_indices.iter().any(|&i| y[i]) || result.pos_indices.iter().any(|&i| !y[i]) {
                violations += 1;
            }
        }
    }
    report(
        3,
        "Attack 1 soundness sweep",
        violations == 0 && deduced > 0,
        &format!("1000 instances, {deduced} labels deduced, {violations} violations"),
    );
}

#[test]
fn criterion_4_attack2_certainty_case() {
    let probs = ProbGuesses::new(vec![0.5, 0.6, 0.9, 0.4]).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for result in [
        posterior_brute_force(&probs, &frac(3, 4)).unwrap(),
        posterior_dp(&probs, &frac(3, 4)).unwrap(),
    ] {
        ok &= result.posterior == vec![1.0, 0.0, 1.0, 0.0] && result.satisfying_count == 1;
        detail.push(format!("{:?} posterior={:?}", result.method, result.posterior));
    }
    for result in [
        posterior_brute_force(&probs, &RationalScore::one()).unwrap(),
        posterior_dp(&probs, &RationalScore::one()).unwrap(),
    ] {
        ok &= result.satisfying_count == 3;
        detail.push(format!("c=1 count={}", result.satisfying_count));
    }
    report(4, "Attack 2 certainty case", ok, &detail.join("; "));
}

#[test]
fn criterion_5_dp_matches_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut count_mismatch = 0;
    let mut max_diff = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(4..=16);
        let probs = ProbGuesses::new(random_distinct_scores(n, &mut rng)).unwrap();
        let labels = random_two_class(n, &mut rng);
        let c = auc_exact(&labels, &probs.to_guesses()).unwrap();
        let bf = posterior_brute_force(&probs, &c).unwrap();
        let dp = posterior_dp(&probs, &c).unwrap();
        if bf.satisfying_count != dp.satisfying_count {
            count_mismatch += 1;
        }
        for (a, b) in bf.posterior.iter().zip(&dp.posterior) {
            max_diff = max_diff.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        5,
        "DP vs brute-force equivalence",
        count_mismatch == 0 && max_diff <= 1e-12 && elapsed < Duration::from_secs(120),
        &format!("500 instances, {count_mismatch} count mismatches, max |Δ|={max_diff:e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_6_construction_exactness_and_bound() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for q in 2..=8u64 {
        for p in 1..q {
            let plan = ConstructionPlan::new(p, q).unwrap();
            let guesses = auc_oracle::construction::rank_guesses(plan.n);
            let target = frac(p, q);
            let mut variants = 0u128;
            for labeling in enumerate_variants(p, q, None).unwrap() {
                variants += 1;
                if auc_exact(&labeling, &guesses).unwrap() != target {
                    failures.push(format!("{p}/{q}: variant {labeling} misses"));
                }
            }
            // C(3q - 2p, q) above one half, C(3q - 2r, q) below
            let s = if 2 * p >= q { p } else { q - p };
            if variants != binomial_count(3 * q - 2 * s, q) {
                failures.push(format!("{p}/{q}: {variants} variants"));
            }
            if !variant_count_meets_bound(p, q).unwrap() {
                failures.push(format!("{p}/{q}: bound exceeds variant count"));
            }
            if q <= 4 {
                let total = count_satisfying(plan.n, &target).unwrap();
                if total < variants {
                    failures.push(format!("{p}/{q}: count_satisfying {total} < {variants}"));
                }
            }
            checked += 1;
        }
    }
    report(
        6,
        "Construction exactness and bound",
        failures.is_empty(),
        &format!("{checked} targets, failures: {failures:?}"),
    );
}

#[test]
fn criterion_7_simulation_shape() {
    let start = Instant::now();
    let config = SimConfig::default();
    let records = run_sweep(&config).unwrap();
    let curve = aggregate(&records, &config.bins).unwrap();

    let mid_bins: Vec<_> = curve
        .bins
        .iter()
        .filter(|b| b.lo >= 0.5 && b.hi <= 0.8 + 1e-12)
        .collect();
    let nonpositive: Vec<String> = mid_bins
        .iter()
        .filter(|b| !b.mean_delta.is_some_and(|m| m > 0.0))
        .map(|b| format!("[{:.2},{:.2}) mean={:?} n={}", b.lo, b.hi, b.mean_delta, b.count))
        .collect();
    let low = mean_gain_in(&records, 0.5, 0.65).unwrap_or(f64::NAN);
    // the top interval includes C = 1
    let high = mean_gain_in(&records, 0.85, f64::INFINITY).unwrap_or(f64::NAN);
    let elapsed = start.elapsed();
    for b in &mid_bins {
        println!(
            "    bin [{:.2},{:.2}) n={} mean={:+.5} se={:.5}",
            b.lo,
            b.hi,
            b.count,
            b.mean_delta.unwrap_or(f64::NAN),
            b.std_err.unwrap_or(f64::NAN)
        );
    }
    report(
        7,
        "Simulation gain shape",
        nonpositive.is_empty() && low > high && elapsed < Duration::from_secs(1800),
        &format!(
            "{} records, non-positive mid bins: {nonpositive:?}, gain[0.5,0.65)={low:.5} vs gain[0.85,1]={high:.5}, {elapsed:?}",
            records.len()
        ),
    );
}

#[test]
fn criterion_8_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(1..=16);
        let k = rng.random_range(1..=20);
        let normal = |rng: &mut ChaCha8Rng| rng.sample::<f64, _>(rand_distr_standard());
        let data = Dataset {
            features: (0..k).map(|_| (0..m).map(|_| normal(&mut rng)).collect()).collect(),
            labels: (0..k).map(|_| rng.random_bool(0.5)).collect(),
        };
        let theta: Vec<f64> = (0..m).map(|_| 2.0 * normal(&mut rng)).collect();
        let l2 = rng.random_range(0.0..3.0);
        let analytic = gradient(&theta, &data, l2);
        let numeric: Vec<f64> = (0..m)
            .map(|i| {
                let h = 1e-5 * theta[i].abs().max(1.0);
                let mut plus = theta.clone();
                let mut minus = theta.clone();
                plus[i] += h;
                minus[i] -= h;
                (objective(&plus, &data, l2) - objective(&minus, &data, l2)) / (2.0 * h)
            })
            .collect();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
        let scale = norm(&analytic).max(norm(&numeric)).max(1e-12);
        worst = worst.max(norm(&diff) / scale);
    }
    report(
        8,
        "Gradient check",
        worst < 1e-5,
        &format!("100 points, worst relative error {worst:e}"),
    );
}

/// Standard normal via Box-Muller, kept local so the check does not share
/// sampling code with the library.
fn rand_distr_standard() -> impl rand::distr::Distribution<f64> {
    struct BoxMuller;
    impl rand::distr::Distribution<f64> for BoxMuller {
        fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            let u1: f64 = rng.random_range(f64::EPSILON..1.0);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        }
    }
    BoxMuller
}

fn write_dataset(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

fn run_cli(args: &[&str]) -> (Option<i32>, Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_auc-oracle"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code(), out.stdout, out.stderr)
}

#[test]
fn criterion_9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let table1 = write_dataset(
        d,
        "table1.json",
        r#"{"version":1,"guesses":[0.5,0.6,0.9,0.4],"labels":[1,0,1,0]}"#,
    );
    let probs = write_dataset(
        d,
        "probs.json",
        r#"{"version":1,"guesses":[0.21,0.83,0.47,0.65,0.12,0.58,0.91,0.33,0.74,0.05],"probs":[0.21,0.83,0.47,0.65,0.12,0.58,0.91,0.33,0.74,0.05]}"#,
    );
    let sim_cfg = write_dataset(
        d,
        "sim.json",
        r#"{"m_range":[4,5],"k_range":[1,3,6],"runs_per_cell":4,"seed":9}"#,
    );

    let mut commands: Vec<(String, Vec<String>, Vec<String>)> = Vec::new();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    commands.push(("auc".into(), s(&["auc", &table1]), vec![]));
    commands.push(("auc --ties".into(), s(&["auc", "--ties", &table1]), vec![]));
    commands.push((
        "attack1".into(),
        s(&["attack1", "--auc", "197/200", "--n0", "45", "--n1", "55"]),
        vec![],
    ));
    commands.push((
        "attack2 dp".into(),
        s(&["attack2", &probs, "--auc", "13/24", "--method", "dp"]),
        vec![],
    ));
    commands.push((
        "attack2 bf".into(),
        s(&["attack2", &probs, "--auc", "13/24", "--method", "bf"]),
        vec![],
    ));
    commands.push((
        "construct".into(),
        s(&["construct", "--p", "3", "--q", "4", "--variants", "15"]),
        vec![],
    ));
    commands.push((
        "oracle noisy".into(),
        s(&["oracle", "--labels", &table1, "--noise", "0.05", "--seed", "4", &table1, &table1, &table1]),
        vec![],
    ));
    let mut results = Vec::new();
    for run in 0..2 {
        let csv = d.join(format!("sim{run}.csv"));
        let curve = d.join(format!("curve{run}.json"));
        commands.push((
            format!("simulate#{run}"),
            s(&[
                "simulate",
                "--config",
                &sim_cfg,
                "--out",
                csv.to_str().unwrap(),
                "--curve",
                curve.to_str().unwrap(),
            ]),
            vec![csv.to_str().unwrap().into(), curve.to_str().unwrap().into()],
        ));
    }

    let mut differing = Vec::new();
    for (name, args, _) in &commands {
        if name.starts_with("simulate") {
            continue;
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run_cli(&args);
        let second = run_cli(&args);
        if first.0 != Some(0) {
            differing.push(format!("{name}: exit {:?}", first.0));
        }
        if first != second {
            differing.push(name.clone());
        }
        results.push((name.clone(), first.1));
    }
    let sims: Vec<_> = commands.iter().filter(|(n, _, _)| n.starts_with("simulate")).collect();
    let mut sim_outputs = Vec::new();
    for (name, args, files) in sims {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, stdout, _) = run_cli(&args);
        if code != Some(0) {
            differing.push(format!("{name}: exit {code:?}"));
        }
        let contents: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        sim_outputs.push((stdout, contents));
    }
    if sim_outputs[0] != sim_outputs[1] {
        differing.push("simulate".into());
    }
    let bf = &results.iter().find(|(n, _)| n == "attack2 bf").unwrap().1;
    let dp = &results.iter().find(|(n, _)| n == "attack2 dp").unwrap().1;
    if bf != dp {
        differing.push("attack2 bf vs dp".into());
    }
    report(
        9,
        "CLI determinism",
        differing.is_empty(),
        &format!("{} commands run twice, differing: {differing:?}", commands.len() - 1),
    );
}
