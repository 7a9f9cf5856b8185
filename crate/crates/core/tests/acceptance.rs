//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion fails.
//!
//! Run with `cargo test --release -p qswitch --test acceptance -- --nocapture`.

mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use qswitch::capacity::{capacity, linear_grid, sweep_scalar, SweepParameter, Tolerances, Verdict};
use qswitch::cli::run_cli;
use qswitch::matching::{enumerate_maximal, Matching};
use qswitch::model::{ArrivalSpec, Topology};
use qswitch::scheduler::{max_weight, PolicyKind};
use qswitch::sim::{drift_summary, run_seeds, SimOptions, SimTrace};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force_matchings, fig1_topology, random_topology};

const STABLE: [f64; 3] = [0.35, 0.2, 0.15];
const UNSTABLE: [f64; 3] = [0.45, 0.35, 0.25];
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const HORIZON: u64 = 1_000_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn simulate(topo: &Topology, rates: &[f64], seeds: &[u64], opts: &SimOptions) -> Vec<SimTrace> {
    let arrivals = ArrivalSpec::bernoulli(rates.to_vec()).unwrap();
    run_seeds(topo, &arrivals, PolicyKind::MaxWeight, HORIZON, seeds, opts).unwrap()
}

fn matching_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..200 {
        let topo = random_topology(&mut rng, 6, 10);
        if enumerate_maximal(&topo).unwrap() != brute_force_matchings(&topo) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("200 topologies, {mismatches} mismatches, {:.3}s", elapsed.as_secs_f64()),
    )
}

fn fig1_matchings() -> Outcome {
    let topo = fig1_topology();
    let got = enumerate_maximal(&topo).unwrap();
    let want: Vec<Matching> = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        .iter()
        .map(|b| Matching::from_bits(b))
        .collect();
    let shown: Vec<String> = got.iter().map(|m| format!("({m})")).collect();
    outcome(
        got == want && brute_force_matchings(&topo) == want,
        format!("{{{}}}", shown.join(" ")),
    )
}

fn single_type_capacity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(1..=6);
        let p: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..=1.0)).collect();
        let q = rng.random_range(0.05..=1.0);
        let used: Vec<usize> = (0..k).filter(|_| rng.random_bool(0.6)).collect();
        let used = if used.is_empty() { vec![0] } else { used };
        let lambda = rng.random_range(0.05..=1.0);
        let oracle = q * used.iter().map(|&j| p[j]).product::<f64>() / lambda;
        let topo = Topology::new(p, vec![q], vec![used]).unwrap();
        let r = capacity(&topo, &[lambda], &Tolerances::default()).unwrap();
        worst = worst.max((r.rho_star - oracle).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("100 instances, max |err| {worst:.3e}, {:.3}s", elapsed.as_secs_f64()),
    )
}

fn fig2_stability() -> Outcome {
    let traces = simulate(&fig1_topology(), &STABLE, &SEEDS, &SimOptions::default());
    let mut worst_halves = 0.0f64;
    let mut worst_rate = 0.0f64;
    for t in &traces {
        let halves = (t.mean_qbar_second_half - t.mean_qbar_first_half).abs() / t.mean_qbar_first_half;
        worst_halves = worst_halves.max(halves);
        for (d, l) in t.departure_rates().iter().zip(STABLE) {
            worst_rate = worst_rate.max((d - l).abs() / l);
        }
    }
    outcome(
        worst_halves < 0.10 && worst_rate < 0.02,
        format!(
            "5 seeds, worst half-to-half change {:.1}%, worst departure-rate error {:.1}%",
            100.0 * worst_halves,
            100.0 * worst_rate
        ),
    )
}

fn fig3_instability() -> Outcome {
    let topo = fig1_topology();
    let opts = SimOptions {
        series_stride: 1000,
        ..SimOptions::default()
    };
    let traces = simulate(&topo, &UNSTABLE, &SEEDS, &opts);
    let min_ratio = traces
        .iter()
        .map(|t| t.qbar_at(HORIZON).unwrap() / t.qbar_at(HORIZON / 10).unwrap())
        .fold(f64::INFINITY, f64::min);
    let r = capacity(&topo, &UNSTABLE, &Tolerances::default()).unwrap();
    outcome(
        min_ratio >= 5.0 && r.verdict == Verdict::Exterior,
        format!(
            "min Q(1e6)/Q(1e5) {min_ratio:.2}, rho* {:.6} {}",
            r.rho_star, r.verdict
        ),
    )
}

fn gamma_threshold() -> Outcome {
    let topo = fig1_topology();
    let table = sweep_scalar(
        &topo,
        &STABLE,
        SweepParameter::AllLinks,
        &linear_grid(0.5, 1.0, 11),
        &Tolerances::default(),
        1e-6,
    )
    .unwrap();
    let Some(gamma) = table.crossing else {
        return outcome(false, "no crossing on [0.5, 1.0]");
    };
    let mean_at = |g: f64| -> Vec<f64> {
        let t = topo.with_uniform_link_success(g).unwrap();
        simulate(&t, &STABLE, &SEEDS, &SimOptions::default())
            .iter()
            .map(|tr| tr.mean_qbar)
            .collect()
    };
    let below = mean_at(gamma - 0.1);
    let above = mean_at(gamma + 0.1);
    let min_ratio = below
        .iter()
        .zip(&above)
        .map(|(b, a)| b / a)
        .fold(f64::INFINITY, f64::min);
    let in_band = (0.70..=0.80).contains(&gamma);
    outcome(
        in_band && min_ratio >= 10.0,
        format!(
            "gamma* {gamma:.6} (band [0.70, 0.80] {}), min mean_qbar ratio at gamma*-/+0.1 {min_ratio:.1} ({})",
            if in_band { "met" } else { "missed" },
            if min_ratio >= 10.0 { "met" } else { "missed" }
        ),
    )
}

fn drift_negative() -> Outcome {
    let traces = simulate(&fig1_topology(), &STABLE, &SEEDS, &SimOptions::default());
    let mut checked = 0;
    let mut positive = 0;
    for t in &traces {
        let p90 = t.norm_quantile(0.9).unwrap();
        for b in drift_summary(t, 20).unwrap() {
            if b.upper <= p90 {
                continue;
            }
            if let Some(d) = b.mean_drift {
                checked += 1;
                if d >= 0.0 {
                    positive += 1;
                }
            }
        }
    }
    outcome(
        checked > 0 && positive == 0,
        format!("{checked} populated bins above the 90th percentile, {positive} with nonnegative drift"),
    )
}

fn argmax_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut violations = 0;
    for _ in 0..1000 {
        let topo = random_topology(&mut rng, 6, 8);
        let matchings = enumerate_maximal(&topo).unwrap();
        let t: Vec<bool> = (0..topo.num_links()).map(|_| rng.random_bool(0.7)).collect();
        let q: Vec<u64> = (0..topo.num_types()).map(|_| rng.random_range(0..50)).collect();
        let base = max_weight(&t, &q, &matchings, &topo).chosen;
        let c = rng.random_range(2..1000u64);
        let scaled: Vec<u64> = q.iter().map(|&x| x * c).collect();
        if max_weight(&t, &scaled, &matchings, &topo).chosen != base {
            violations += 1;
        }
        let mut shuffled = matchings.clone();
        shuffled.shuffle(&mut rng);
        if max_weight(&t, &q, &shuffled, &topo).chosen != base {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("1000 draws, {violations} violations"))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = d.path().to_str().unwrap();
        let code = run_cli(["qswitch", "preset", "fig2", "--seed", "42", "--out", out]);
        if code != 0 {
            return outcome(false, format!("preset exited with {code}"));
        }
    }
    let a = read_dir_sorted(dirs[0].path());
    let b = read_dir_sorted(dirs[1].path());
    outcome(
        !a.is_empty() && a == b,
        format!("{} files compared", a.len()),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("matching oracle equivalence", matching_oracle),
        ("three-user matching set", fig1_matchings),
        ("single-type capacity formula", single_type_capacity),
        ("stable-load reproduction", fig2_stability),
        ("overload instability", fig3_instability),
        ("link-probability threshold", gamma_threshold),
        ("negative drift at large norm", drift_negative),
        ("argmax invariance", argmax_invariance),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        println!(
            "criterion {} {name}: {} ({}; {:.1}s)",
            n + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.passed {
            failed.push(n + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
