//! Acceptance suite. Every criterion prints one `criterion N: PASS` or
//! `criterion N: FAIL` line with the measured numbers, then asserts.
//!
//! Run with `cargo test -p mmsr-cli --test acceptance -- --nocapture`.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mmsr::evaluator::{Move, PlanChange};
use mmsr::evolutionary::{constrained_dominates_points, fast_nondominated_sort_by};
use mmsr::feasibility::{check_plan, enhance, violation_degree};
use mmsr::search::Operator;
use mmsr::simulator::simulate_first_stage;
use mmsr::{
    css, enumerate_pareto, generate_instance, mid, reference_overload, run_algorithm, run_simulation_suite,
    sample_scenarios, sns, station_overload, Algorithm, Budget, Decision, Evaluator, GeneratorConfig, Instance,
    ObjectivePoint, ReinsertionPlan, ScenarioSample, SimConfig, SimEntry, Solution, Tu,
};

// criterion 1
const ORACLE_INSTANCES: u64 = 20;
const ORACLE_SCENARIOS: usize = 4;
const ORACLE_BUDGET: Budget = Budget::Iterations(50_000);
const ORACLE_FULL_SHARE: f64 = 0.8;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(300);

// criterion 2
const OVERLOAD_CASES: usize = 1_000;
const DELTA_MOVES: usize = 10_000;
const EXACTNESS_TIME_LIMIT: Duration = Duration::from_secs(120);

// criteria 3, 4 and 8
const TABLE_INSTANCES: u64 = 10;
const TABLE_VEHICLES: usize = 50;
const TABLE_SCENARIOS: usize = 20;
const TABLE_BUDGET: Budget = Budget::Iterations(10_000);
const TABLE_TEST_SCENARIOS: usize = 50;
const THRESHOLDS: [f64; 6] = [0.0, 3.0, 5.0, 10.0, 15.0, 30.0];
const WO_IMPROVEMENT: f64 = 0.10;
const TABLE_TIME_LIMIT: Duration = Duration::from_secs(1800);
const TREND_RUNS: u64 = 3;
const STMLS_GAP: f64 = 0.20;
const STMLS_GAP_SHARE: f64 = 0.90;

// criterion 5
const ENHANCE_CASES: usize = 1_000;

// criterion 6
const SORT_SETS: usize = 1_000;
const SORT_SET_SIZE: usize = 20;

/// Written to stdout directly so the line survives output capture of
/// passing tests.
fn report(criterion: u8, pass: bool, detail: &str) {
    let line = format!(
        "criterion {criterion}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes())
        .and_then(|_| out.flush())
        .expect("stdout is writable");
}

// ---------------------------------------------------------------------------
// shared runs

struct OracleCase {
    instance: Instance,
    sample: ScenarioSample,
    exact: Vec<ObjectivePoint>,
    archives: Vec<(Algorithm, Vec<Solution>)>,
}

struct OracleRun {
    cases: Vec<OracleCase>,
    elapsed: Duration,
}

fn oracle_instance(seed: u64) -> Instance {
    generate_instance(&GeneratorConfig {
        n_stations: 2,
        fmax: Some(1),
        lambda: 2,
        highrisk_ratio_range: (2.0 / 6.0, 2.0 / 6.0),
        ..GeneratorConfig::new(6, seed)
    })
    .expect("valid generator settings")
}

fn oracle_run() -> &'static OracleRun {
    static RUN: OnceLock<OracleRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let cases = (0..ORACLE_INSTANCES)
            .into_par_iter()
            .map(|k| {
                let instance = oracle_instance(100 + k);
                let sample = sample_scenarios(&instance, ORACLE_SCENARIOS, 200 + k).unwrap();
                let exact = enumerate_pareto(&instance, &sample).unwrap().points;
                let archives = [Algorithm::Stmls, Algorithm::Nsga2, Algorithm::LsNsga2]
                    .into_par_iter()
                    .map(|a| {
                        let arch = run_algorithm(a, &instance, &sample, ORACLE_BUDGET, 300 + k).unwrap();
                        (a, arch.into_sorted())
                    })
                    .collect();
                OracleCase {
                    instance,
                    sample,
                    exact,
                    archives,
                }
            })
            .collect();
        OracleRun {
            cases,
            elapsed: start.elapsed(),
        }
    })
}

struct TableCase {
    instance: Instance,
    sample: ScenarioSample,
    /// (algorithm, run) -> archive
    archives: Vec<(Algorithm, u64, Vec<Solution>)>,
}

struct TableRun {
    cases: Vec<TableCase>,
    elapsed: Duration,
}

fn table_instance(seed: u64) -> Instance {
    generate_instance(&GeneratorConfig::new(TABLE_VEHICLES, seed)).expect("valid generator settings")
}

fn table_run() -> &'static TableRun {
    static RUN: OnceLock<TableRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let cases = (0..TABLE_INSTANCES)
            .into_par_iter()
            .map(|k| {
                let instance = table_instance(1_000 + k);
                let sample = sample_scenarios(&instance, TABLE_SCENARIOS, 2_000 + k).unwrap();
                let mut jobs: Vec<(Algorithm, u64)> = vec![(Algorithm::OneScenario, 0), (Algorithm::Ff, 0)];
                for run in 0..TREND_RUNS {
                    for a in [Algorithm::Stmls, Algorithm::Nsga2, Algorithm::LsNsga2] {
                        jobs.push((a, run));
                    }
                }
                let archives = jobs
                    .into_par_iter()
                    .map(|(a, run)| {
                        let seed = 3_000 + 100 * k + run;
                        let arch = run_algorithm(a, &instance, &sample, TABLE_BUDGET, seed).unwrap();
                        (a, run, arch.into_sorted())
                    })
                    .collect();
                TableCase {
                    instance,
                    sample,
                    archives,
                }
            })
            .collect();
        TableRun {
            cases,
            elapsed: start.elapsed(),
        }
    })
}

impl TableCase {
    fn archive(&self, algo: Algorithm, run: u64) -> &[Solution] {
        self.archives
            .iter()
            .find(|(a, r, _)| *a == algo && *r == run)
            .map(|(_, _, s)| s.as_slice())
            .expect("every job was run")
    }
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_1_oracle_pareto_equivalence() {
    let run = oracle_run();
    let mut dominated_misses = 0;
    let mut full = [0usize; 3];
    for case in &run.cases {
        for (i, (_, arch)) in case.archives.iter().enumerate() {
            let pts: Vec<ObjectivePoint> = arch.iter().map(|s| s.objectives).collect();
            dominated_misses += pts
                .iter()
                .filter(|p| !case.exact.iter().any(|e| e.weakly_dominates(p)))
                .count();
            if !pts.is_empty() && css(&pts, &case.exact).unwrap() == 1.0 {
                full[i] += 1;
            }
        }
    }
    let need = (ORACLE_FULL_SHARE * ORACLE_INSTANCES as f64).ceil() as usize;
    let pass = dominated_misses == 0 && full.iter().all(|&f| f >= need) && run.elapsed <= ORACLE_TIME_LIMIT;
    report(
        1,
        pass,
        &format!(
            "points outside the exact front: {dominated_misses}; fronts fully attained stmls/nsga2/lsnsga2: {}/{}/{} of {ORACLE_INSTANCES} (need {need}); {:.1}s",
            full[0],
            full[1],
            full[2],
            run.elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_evaluator_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut overload_mismatch = 0;
    for _ in 0..OVERLOAD_CASES {
        let c = Tu::from_tenths(rng.random_range(20..=80));
        let l = Tu::from_tenths(c.tenths() + rng.random_range(0..=60));
        let len = rng.random_range(0..=6);
        let loads: Vec<Tu> = (0..len).map(|_| Tu::from_tenths(rng.random_range(0..=160))).collect();
        if station_overload(&loads, l, c).unwrap().1 != reference_overload(&loads, l, c).unwrap() {
            overload_mismatch += 1;
        }
    }

    let mut delta_mismatch = 0;
    let mut done = 0;
    let mut inst_seed = 0;
    while done < DELTA_MOVES {
        inst_seed += 1;
        let instance = generate_instance(&GeneratorConfig {
            n_stations: 3,
            lambda: 3,
            highrisk_ratio_range: (0.2, 0.3),
            ..GeneratorConfig::new(rng.random_range(8..=40), inst_seed)
        })
        .unwrap();
        let sample = sample_scenarios(&instance, 6, inst_seed).unwrap();
        let ev = Evaluator::new(&instance, &sample);
        let n = instance.horizon();
        let mut sol = random_solution(&instance, &sample, &mut rng);
        let mut state = ev.full(&sol);
        for _ in 0..500 {
            let mv = random_move(&sol, n, &mut rng);
            let (obj, next) = ev.delta_evaluate(&sol, &state, mv);
            apply_move(&mut sol, mv);
            let fresh = ev.full(&sol);
            if fresh != next || ev.objectives(&fresh) != obj {
                delta_mismatch += 1;
            }
            state = next;
            done += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = overload_mismatch == 0 && delta_mismatch == 0 && elapsed <= EXACTNESS_TIME_LIMIT;
    report(
        2,
        pass,
        &format!(
            "overload mismatches {overload_mismatch}/{OVERLOAD_CASES}; delta mismatches {delta_mismatch}/{done}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

fn random_solution(instance: &Instance, sample: &ScenarioSample, rng: &mut ChaCha8Rng) -> Solution {
    use rand::seq::SliceRandom;
    let n = instance.horizon();
    let mut fs: Vec<usize> = (0..n).collect();
    fs.shuffle(rng);
    let plans = sample
        .scenarios
        .iter()
        .map(|sc| {
            ReinsertionPlan::new(
                (0..sc.failed().len())
                    .map(|_| Decision::from_gene_value(rng.random_range(0..=n)))
                    .collect(),
            )
        })
        .collect();
    Solution::new(fs, plans)
}

fn random_move(sol: &Solution, n: usize, rng: &mut ChaCha8Rng) -> Move {
    let with_genes: Vec<usize> = (0..sol.plans.len())
        .filter(|&w| !sol.plans[w].decisions.is_empty())
        .collect();
    if with_genes.is_empty() || rng.random_bool(0.5) {
        let op = Operator::ALL[rng.random_range(0..4)];
        let a = rng.random_range(1..=n);
        let b = (a + rng.random_range(1..n) - 1) % n + 1;
        let (i, j) = match op {
            Operator::InsertForward => (a.min(b), a.max(b)),
            Operator::InsertBackward => (a.max(b), a.min(b)),
            _ => (a, b),
        };
        Move::FirstStage { op, i, j }
    } else {
        let w = with_genes[rng.random_range(0..with_genes.len())];
        let genes = sol.plans[w].decisions.len();
        let change = if genes >= 2 && rng.random_bool(0.3) {
            let a = rng.random_range(0..genes);
            PlanChange::Swap(a, (a + rng.random_range(1..genes)) % genes)
        } else {
            PlanChange::Set(
                rng.random_range(0..genes),
                Decision::from_gene_value(rng.random_range(0..=n)),
            )
        };
        Move::SecondStage { scenario: w, change }
    }
}

fn apply_move(sol: &mut Solution, mv: Move) {
    match mv {
        Move::FirstStage { op, i, j } => {
            sol.first_stage = mmsr::search::apply_operator(&sol.first_stage, op, i, j).unwrap();
        }
        Move::SecondStage { scenario, change } => change.apply(&mut sol.plans[scenario]),
    }
}

struct TableOutcome {
    one_wo: Vec<f64>,
    ff_wo: Vec<f64>,
    ffr_wo: Vec<f64>,
    one_re: Vec<f64>,
    ff_re: Vec<f64>,
    ffr_re: Vec<f64>,
}

fn table_outcome() -> &'static TableOutcome {
    static OUT: OnceLock<TableOutcome> = OnceLock::new();
    OUT.get_or_init(|| {
        let run = table_run();
        let mut entries = Vec::new();
        for case in &run.cases {
            for (label, algo) in [
                ("one-scenario", Algorithm::OneScenario),
                ("FF", Algorithm::Ff),
                ("FFR", Algorithm::Stmls),
            ] {
                entries.push(SimEntry {
                    variant: label.to_string(),
                    instance: &case.instance,
                    first_stages: case.archive(algo, 0).iter().map(|s| s.first_stage.clone()).collect(),
                });
            }
        }
        let cfg = SimConfig {
            thresholds: THRESHOLDS.to_vec(),
            n_test_scenarios: TABLE_TEST_SCENARIOS,
            seed: 9_999,
        };
        let rows = run_simulation_suite(&entries, &cfg).unwrap();
        let col = |v: &str, re: bool| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.variant == v)
                .map(|r| if re { r.mean_obj_re } else { r.mean_obj_wo })
                .collect()
        };
        for r in &rows {
            println!(
                "  table: {:<12} threshold {:>4}  obj_wo {:>9.3}  obj_re {:>7.3}",
                r.variant, r.threshold, r.mean_obj_wo, r.mean_obj_re
            );
        }
        TableOutcome {
            one_wo: col("one-scenario", false),
            ff_wo: col("FF", false),
            ffr_wo: col("FFR", false),
            one_re: col("one-scenario", true),
            ff_re: col("FF", true),
            ffr_re: col("FFR", true),
        }
    })
}

#[test]
fn criterion_3_table_directions() {
    let t = table_outcome();
    let last = THRESHOLDS.len() - 1;
    let a = t.ffr_wo[last] <= (1.0 - WO_IMPROVEMENT) * t.one_wo[last];
    let b = t.ff_wo[0] <= t.ffr_wo[0];
    let c = (0..THRESHOLDS.len()).all(|k| t.ffr_re[k] <= t.one_re[k] && t.ffr_re[k] <= t.ff_re[k]);
    let elapsed = table_run().elapsed;
    let pass = a && b && c && elapsed <= TABLE_TIME_LIMIT;
    report(
        3,
        pass,
        &format!(
            "(a) FFR wo {:.2} vs one-scenario {:.2} at threshold 30: {}; (b) FF wo {:.2} vs FFR {:.2} at 0: {}; (c) FFR re lowest at every threshold: {}; {:.1}s",
            t.ffr_wo[last],
            t.one_wo[last],
            a,
            t.ff_wo[0],
            t.ffr_wo[0],
            b,
            c,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_simulation_monotonicity() {
    let run = table_run();
    let per_case: Vec<(usize, usize)> = run
        .cases
        .par_iter()
        .enumerate()
        .map(|(k, case)| {
            let test = sample_scenarios(&case.instance, TABLE_TEST_SCENARIOS, 9_999).unwrap();
            let mut violations = 0;
            let mut pairs = 0;
            for algo in [Algorithm::OneScenario, Algorithm::Ff, Algorithm::Stmls] {
                for sol in case.archive(algo, 0) {
                    let res = simulate_first_stage(&sol.first_stage, &case.instance, &test, &THRESHOLDS);
                    for w in 0..test.len() {
                        pairs += 1;
                        for t in 0..THRESHOLDS.len() {
                            let o = &res[t][w];
                            let cap = Tu::from_f64(THRESHOLDS[t]);
                            violations += o.log.iter().filter(|r| r.delta_wo > cap).count();
                            if t > 0 {
                                let p = &res[t - 1][w];
                                if o.log.len() < p.log.len() || o.re > p.re {
                                    violations += 1;
                                    if violations <= 3 {
                                        println!(
                                            "  instance {k} {algo} scenario {w}: thresholds {} -> {}: insertions {} -> {}, re {} -> {}",
                                            THRESHOLDS[t - 1],
                                            THRESHOLDS[t],
                                            p.log.len(),
                                            o.log.len(),
                                            p.re,
                                            o.re
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
            (violations, pairs)
        })
        .collect();
    let violations: usize = per_case.iter().map(|p| p.0).sum();
    let pairs: usize = per_case.iter().map(|p| p.1).sum();
    let pass = violations == 0;
    report(
        4,
        pass,
        &format!("{violations} violations over {pairs} solution/scenario pairs"),
    );
    assert!(pass);
}

#[test]
fn criterion_5_feasibility() {
    let mut checked = 0;
    let mut bad = 0;
    let mut audit = |instance: &Instance, sample: &ScenarioSample, sols: &[Solution]| {
        for s in sols {
            checked += 1;
            let hard = s.plans.iter().zip(&sample.scenarios).all(|(p, sc)| {
                let r = check_plan(p, sc, &s.first_stage, instance);
                r.ready_violations == 0 && r.due_misses == 0 && r.fmax_excess == 0
            });
            if !hard || violation_degree(s, instance) != 0 || s.violation_degree != 0 {
                bad += 1;
            }
        }
    };
    for case in &oracle_run().cases {
        for (_, arch) in &case.archives {
            audit(&case.instance, &case.sample, arch);
        }
    }
    // the baselines have reinsertion switched off and are not audited
    for case in &table_run().cases {
        for (a, _, arch) in &case.archives {
            if matches!(a, Algorithm::Stmls | Algorithm::Nsga2 | Algorithm::LsNsga2) {
                audit(&case.instance, &case.sample, arch);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut not_idempotent = 0;
    for k in 0..ENHANCE_CASES {
        let instance = generate_instance(&GeneratorConfig {
            n_stations: 2,
            lambda: rng.random_range(1..=6),
            fmax: Some(rng.random_range(0..=3)),
            highrisk_ratio_range: (0.1, 0.4),
            ..GeneratorConfig::new(rng.random_range(6..=40), k as u64)
        })
        .unwrap();
        let sample = sample_scenarios(&instance, 1, k as u64).unwrap();
        let sol = random_solution(&instance, &sample, &mut rng);
        let sc = &sample.scenarios[0];
        let once = enhance(&sol.plans[0], sc, &sol.first_stage, &instance, &mut rng);
        let twice = enhance(&once, sc, &sol.first_stage, &instance, &mut rng);
        if once != twice {
            not_idempotent += 1;
        }
    }
    let pass = bad == 0 && checked > 0 && not_idempotent == 0;
    report(
        5,
        pass,
        &format!("{bad} of {checked} archived solutions infeasible; enhance not idempotent on {not_idempotent}/{ENHANCE_CASES}"),
    );
    assert!(pass);
}

/// Ranks by peeling: each front holds the remaining points no remaining
/// point dominates.
fn cubic_fronts(items: &[(ObjectivePoint, usize)]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..items.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| {
                !left
                    .iter()
                    .any(|&j| constrained_dominates_points((&items[j].0, items[j].1), (&items[i].0, items[i].1)))
            })
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

#[test]
fn criterion_6_metric_identities() {
    let p = ObjectivePoint::new;
    let o = p(0.0, 0.0);
    let mut failures = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64| {
        if got != want {
            failures.push(format!("{name}: {got} != {want}"));
        }
    };
    expect(
        "css half",
        css(&[p(1.0, 1.0)], &[p(2.0, 2.0), p(0.0, 3.0)]).unwrap(),
        0.5,
    );
    expect(
        "css none",
        css(&[p(5.0, 5.0)], &[p(1.0, 1.0), p(2.0, 0.0)]).unwrap(),
        0.0,
    );
    expect("mid zero", mid(&[o], &o).unwrap(), 0.0);
    expect("mid 3-4-5", mid(&[p(3.0, 4.0)], &o).unwrap(), 5.0);
    expect("mid mean", mid(&[p(1.0, 0.0), p(0.0, 3.0)], &o).unwrap(), 2.0);
    expect("sns pair", sns(&[p(1.0, 0.0), p(0.0, 3.0)], &o).unwrap(), 2f64.sqrt());
    expect("sns equal", sns(&[p(1.0, 0.0), p(0.0, 1.0)], &o).unwrap(), 0.0);
    expect("sns single", sns(&[p(3.0, 4.0)], &o).unwrap(), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut self_cover = 0;
    let mut sort_mismatch = 0;
    for _ in 0..SORT_SETS {
        let items: Vec<(ObjectivePoint, usize)> = (0..SORT_SET_SIZE)
            .map(|_| {
                let vd = if rng.random_bool(0.3) {
                    rng.random_range(1..4)
                } else {
                    0
                };
                (p(rng.random_range(0..10) as f64, rng.random_range(0..10) as f64), vd)
            })
            .collect();
        let pts: Vec<ObjectivePoint> = items.iter().map(|i| i.0).collect();
        if css(&pts, &pts).unwrap() != 1.0 {
            self_cover += 1;
        }
        let fast = fast_nondominated_sort_by(&items, |a, b| constrained_dominates_points((&a.0, a.1), (&b.0, b.1)));
        if fast != cubic_fronts(&items) {
            sort_mismatch += 1;
        }
    }
    let pass = failures.is_empty() && self_cover == 0 && sort_mismatch == 0;
    report(
        6,
        pass,
        &format!(
            "hand examples failing: {:?}; css(X,X) != 1 on {self_cover}; sort mismatches {sort_mismatch}/{SORT_SETS}",
            failures
        ),
    );
    assert!(pass);
}

fn mmsr_cmd(args: &[&str], jobs: usize) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mmsr"))
        .args(args)
        .env("MMSR_JOBS", jobs.to_string())
        .output()
        .expect("binary runs")
}

fn pipeline(dir: &Path, jobs: usize) -> Vec<Vec<u8>> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["generate", "--vehicles", "30", "--seed", "7", "--out", &p("inst.mmsr")],
        vec![
            "solve",
            "--instance",
            &p("inst.mmsr"),
            "--algo",
            "stmls",
            "--sample-n",
            "10",
            "--budget",
            "3000it",
            "--seed",
            "3",
            "--runs",
            "2",
            "--out",
            &p("stmls.csv"),
        ],
        vec![
            "solve",
            "--instance",
            &p("inst.mmsr"),
            "--algo",
            "nsga2",
            "--sample-n",
            "10",
            "--budget",
            "2000it",
            "--seed",
            "3",
            "--out",
            &p("nsga2.csv"),
        ],
        vec![
            "solve",
            "--instance",
            &p("inst.mmsr"),
            "--algo",
            "onescenario",
            "--budget",
            "1000it",
            "--seed",
            "3",
            "--out",
            &p("one.csv"),
        ],
        vec![
            "simulate",
            "--instance",
            &p("inst.mmsr"),
            "--archives",
            &p("*.csv"),
            "--test-n",
            "10",
            "--seed",
            "4",
            "--out",
            &p("sim.out"),
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for s in &steps {
        let args: Vec<&str> = s.iter().map(String::as_str).collect();
        let out = mmsr_cmd(&args, jobs);
        assert!(
            out.status.success(),
            "{:?}: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
    }
    [
        "inst.mmsr",
        "stmls.run0.csv",
        "stmls.run1.csv",
        "nsga2.csv",
        "one.csv",
        "sim.out",
    ]
    .iter()
    .map(|f| std::fs::read(dir.join(f)).unwrap())
    .collect()
}

#[test]
fn criterion_7_determinism() {
    let runs: Vec<Vec<Vec<u8>>> = [1, 1, 4]
        .iter()
        .map(|&jobs| {
            let dir = tempfile::tempdir().unwrap();
            pipeline(dir.path(), jobs)
        })
        .collect();
    let same_twice = runs[0] == runs[1];
    let same_jobs = runs[0] == runs[2];
    let pass = same_twice && same_jobs;
    report(
        7,
        pass,
        &format!("identical across reruns: {same_twice}; identical for --jobs 1 and 4: {same_jobs}"),
    );
    assert!(pass);
}

#[test]
fn criterion_8_reliability_trend() {
    let run = table_run();
    let best_wo = |s: &[Solution]| s.iter().map(|x| x.objectives.wo).fold(f64::INFINITY, f64::min);
    let gap = |best: f64, ideal: f64| {
        if best == ideal {
            0.0
        } else if ideal > 0.0 {
            (best - ideal) / ideal
        } else {
            f64::INFINITY
        }
    };
    let mut stmls_gaps = Vec::new();
    let mut nsga_gaps = Vec::new();
    for case in &run.cases {
        let ideal = case
            .archives
            .iter()
            .filter(|(a, _, _)| matches!(a, Algorithm::Stmls | Algorithm::Nsga2 | Algorithm::LsNsga2))
            .map(|(_, _, s)| best_wo(s))
            .fold(f64::INFINITY, f64::min);
        for r in 0..TREND_RUNS {
            stmls_gaps.push(gap(best_wo(case.archive(Algorithm::Stmls, r)), ideal));
            nsga_gaps.push(gap(best_wo(case.archive(Algorithm::Nsga2, r)), ideal));
        }
    }
    let within = stmls_gaps.iter().filter(|&&g| g <= STMLS_GAP).count();
    let share = within as f64 / stmls_gaps.len() as f64;
    let worst = |g: &[f64]| g.iter().copied().fold(0.0, f64::max);
    let pass = share >= STMLS_GAP_SHARE && worst(&nsga_gaps) > worst(&stmls_gaps);
    report(
        8,
        pass,
        &format!(
            "stmls runs within {:.0}% of the ideal: {within}/{} ({:.0}%); worst gap stmls {:.1}% vs nsga2 {:.1}%",
            STMLS_GAP * 100.0,
            stmls_gaps.len(),
            share * 100.0,
            worst(&stmls_gaps) * 100.0,
            worst(&nsga_gaps) * 100.0
        ),
    );
    assert!(pass);
}
