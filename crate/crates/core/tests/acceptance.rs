//! Acceptance gate: one PASS/FAIL line per criterion, then a byte-level
//! comparison of every report file across two thread counts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use switchdiff::suites::{
    chain_marginal_suite, feller_suite, first_jump_suite, harnack_suite, holding_suite, lemma21_suite,
    moment_suite, pathwise_uniqueness_suite, truncation_suite, SuiteResult,
};
use switchdiff::SimError;

const SEED: u64 = 20_240_917;

struct Criterion {
    id: u8,
    title: &'static str,
    /// Wall-clock budget, where one is stated.
    budget: Option<Duration>,
    run: fn() -> Result<SuiteResult, SimError>,
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            title: "jump-function Lipschitz bound, 1000 random chains, p in {1,2}, i <= 20",
            budget: Some(Duration::from_secs(10)),
            run: || lemma21_suite(SEED, 1000),
        },
        Criterion {
            id: 2,
            title: "chain marginals vs uniformization, 1e5 replicas, >= 99% within 3 se",
            budget: Some(Duration::from_secs(60)),
            run: || chain_marginal_suite(SEED, &[3, 6, 10], &[0.5, 1.0, 2.0], 100_000),
        },
        Criterion {
            id: 3,
            title: "pathwise uniqueness, 100 coupled pairs from identical data",
            budget: None,
            run: || pathwise_uniqueness_suite(SEED, 100),
        },
        Criterion {
            id: 4,
            title: "truncation agrees up to the exit time, exit probability within its bound",
            budget: None,
            run: || truncation_suite(SEED, 100, 10_000, 1e-3),
        },
        Criterion {
            id: 5,
            title: "second-moment bound, all zoo models, T in {0.25, 0.5, 1}, 1e4 replicas, dt = 1e-3",
            budget: None,
            run: || moment_suite(SEED, &[0.25, 0.5, 1.0], 10_000, 1e-3),
        },
        Criterion {
            id: 6,
            title: "holding-time lower bound, k <= K in {3, 5}, 5-point grid, 1e5 replicas",
            budget: None,
            run: || holding_suite(SEED, &[3, 5], &[0.0, 0.1, 0.25, 0.5, 1.0], 100_000, 1e-2),
        },
        Criterion {
            id: 7,
            title: "log-Harnack, 200 random cases, >= 99% pass, failures within 4 se",
            budget: Some(Duration::from_secs(300)),
            run: || harnack_suite(SEED, 200, 10_000, 1e-3),
        },
        Criterion {
            id: 8,
            title: "strong-Feller dichotomy: elliptic gap < 0.02, degenerate plateau at 1/e",
            budget: None,
            run: || feller_suite(SEED, 10_000, 1e-3),
        },
        Criterion {
            id: 9,
            title: "first-jump decomposition vs direct estimate, 20 random cases",
            budget: None,
            run: || first_jump_suite(SEED, 20, 10_000, 1e-3),
        },
    ]
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

fn report_dir(tag: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("acceptance-{tag}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("report dir");
    dir
}

fn write_report(dir: &Path, id: u8, result: &SuiteResult) -> PathBuf {
    let path = dir.join(format!("criterion{id:02}_{}.jsonl", result.name));
    fs::write(&path, result.report_bytes()).expect("write report");
    path
}

fn main() {
    let criteria = criteria();
    let first_dir = report_dir("threads4");
    let second_dir = report_dir("threads2");
    let mut all_pass = true;
    let mut files = Vec::new();

    let wide = pool(4);
    for c in &criteria {
        let start = Instant::now();
        let outcome = wide.install(c.run);
        let elapsed = start.elapsed();
        let (pass, detail) = match &outcome {
            Ok(r) => {
                files.push((c.id, write_report(&first_dir, c.id, r)));
                let in_budget = c.budget.is_none_or(|b| elapsed <= b);
                let budget = c.budget.map_or(String::new(), |b| format!(", budget {}s", b.as_secs()));
                (r.pass && in_budget, format!("{} [{:.1}s{budget}]", r.summary, elapsed.as_secs_f64()))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        all_pass &= pass;
        println!("{} criterion {}: {} :: {detail}", if pass { "PASS" } else { "FAIL" }, c.id, c.title);
    }

    let narrow = pool(2);
    let mut identical = true;
    let mut mismatched = Vec::new();
    for c in &criteria {
        let Some((_, first)) = files.iter().find(|(id, _)| *id == c.id) else {
            identical = false;
            continue;
        };
        match narrow.install(c.run) {
            Ok(r) => {
                let second = write_report(&second_dir, c.id, &r);
                if fs::read(first).ok() != fs::read(&second).ok() {
                    identical = false;
                    mismatched.push(c.id);
                }
            }
            Err(_) => identical = false,
        }
    }
    all_pass &= identical;
    println!(
        "{} criterion 10: report files byte-identical across 4 and 2 threads :: {} files, mismatched {:?}",
        if identical { "PASS" } else { "FAIL" },
        files.len(),
        mismatched
    );
    if !all_pass {
        eprintln!("at least one acceptance criterion failed");
        std::process::exit(1);
    }
}
