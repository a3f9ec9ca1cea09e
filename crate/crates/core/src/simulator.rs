//! Dynamic reinsertion: replays a first-stage sequence against failure
//! scenarios it was not optimized for, and reinserts reinstating vehicles
//! greedily as soon as a position costs at most a given overload threshold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::feasibility::{lambda_conflict, ready_bound};
use crate::instances::{sample_scenarios, ScenarioSample};
use crate::model::{first_stage_positions, Decision, Instance, ReinsertionPlan, Scenario, Solution};
use crate::search::{greedy, improve_first_stage, improve_one_scenario, Budget, OperatorWeights};
use crate::tu::Tu;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Overload thresholds in TU.
    pub thresholds: Vec<f64>,
    pub n_test_scenarios: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            thresholds: vec![0.0, 3.0, 5.0, 10.0, 15.0, 30.0],
            n_test_scenarios: 1000,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("thresholds must be finite and non-negative".into()));
        }
        if self.n_test_scenarios == 0 {
            return Err(Error::Config("at least one test scenario is needed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reinsertion {
    pub vehicle: usize,
    pub position: usize,
    pub delta_wo: Tu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    /// Total overload of the final sequence.
    pub wo: f64,
    /// Sum of `(g + 1)^2` over vehicles never reinserted.
    pub re: f64,
    pub skipped: usize,
    pub log: Vec<Reinsertion>,
}

/// Walks positions `1..=|T|`. At each position the reinstating vehicles
/// (ready by then and not yet back, ordered by ready position then id) are
/// tried in turn; the first one whose insertion raises the total overload by
/// at most `threshold` and keeps lambda spacing is inserted, and the walk
/// moves on.
pub fn simulate_dynamic(first_stage: &[usize], scenario: &Scenario, instance: &Instance, threshold: Tu) -> SimOutcome {
    let sample = ScenarioSample::new(vec![scenario.clone()], 0);
    let ev = Evaluator::new(instance, &sample);
    walk(&ev, first_stage, &first_stage_positions(first_stage), 0, threshold)
}

fn walk(ev: &Evaluator, first_stage: &[usize], positions: &[usize], w: usize, threshold: Tu) -> SimOutcome {
    let instance = ev.instance();
    let scenario = &ev.sample().scenarios[w];
    let failed = scenario.failed();
    let horizon = instance.horizon();
    let mut order: Vec<(usize, usize, usize)> = failed
        .iter()
        .enumerate()
        .filter_map(|(g, &u)| ready_bound(instance, positions, u).map(|b| (b, instance.unit_id(u), g)))
        .collect();
    order.sort_unstable();

    let mut plan = ReinsertionPlan::all_skip(scenario);
    let mut cur = ev.evaluate_scenario(first_stage, w, &plan);
    let mut log = Vec::new();
    for t in 1..=horizon {
        let targets: Vec<usize> = plan.targets().collect();
        if lambda_conflict(t, targets.iter().copied(), instance.lambda, horizon) {
            continue;
        }
        for &(bound, id, g) in &order {
            if bound > t {
                break;
            }
            if !plan.decisions[g].is_skip() {
                continue;
            }
            plan.decisions[g] = Decision::InsertAt(t);
            let next = ev.reevaluate_scenario(&cur, first_stage, w, &plan);
            let delta = next.overload - cur.overload;
            if delta <= threshold {
                log.push(Reinsertion {
                    vehicle: id,
                    position: t,
                    delta_wo: delta,
                });
                cur = next;
                break;
            }
            plan.decisions[g] = Decision::Skip;
        }
    }
    SimOutcome {
        wo: cur.overload.as_f64(),
        re: cur.penalty as f64,
        skipped: plan.skip_count(),
        log,
    }
}

/// Outcomes of one first stage over every scenario of `test`, indexed
/// `[threshold][scenario]`.
pub fn simulate_first_stage(
    first_stage: &[usize],
    instance: &Instance,
    test: &ScenarioSample,
    thresholds: &[f64],
) -> Vec<Vec<SimOutcome>> {
    let ev = Evaluator::new(instance, test);
    let positions = first_stage_positions(first_stage);
    thresholds
        .iter()
        .map(|&th| {
            let th = Tu::from_f64(th);
            (0..test.len())
                .map(|w| walk(&ev, first_stage, &positions, w, th))
                .collect()
        })
        .collect()
}

/// The first stages of one archive produced for one problem variant.
#[derive(Debug, Clone)]
pub struct SimEntry<'a> {
    pub variant: String,
    pub instance: &'a Instance,
    pub first_stages: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub variant: String,
    pub threshold: f64,
    pub mean_obj_wo: f64,
    pub mean_obj_re: f64,
}

/// Simulates every entry on a fresh test sample of its instance. Each entry
/// is averaged over its first stages and the test scenarios, then entries
/// of the same variant are averaged. Rows come in order of first appearance
/// of the variant, then threshold.
pub fn run_simulation_suite(entries: &[SimEntry], config: &SimConfig) -> Result<Vec<SimRow>> {
    config.validate()?;
    let mut variants: Vec<&str> = Vec::new();
    for e in entries {
        if !variants.contains(&e.variant.as_str()) {
            variants.push(&e.variant);
        }
    }
    let mut samples: Vec<(&Instance, ScenarioSample)> = Vec::new();
    let nt = config.thresholds.len();
    // per variant: per threshold (wo sum, re sum), entry count
    let mut sums = vec![(vec![(0.0, 0.0); nt], 0usize); variants.len()];
    for e in entries {
        if e.first_stages.is_empty() {
            return Err(Error::Config(format!("empty archive for variant {}", e.variant)));
        }
        let test = match samples.iter().position(|(i, _)| std::ptr::eq(*i, e.instance)) {
            Some(k) => &samples[k].1,
            None => {
                let s = sample_scenarios(e.instance, config.n_test_scenarios, config.seed)?;
                samples.push((e.instance, s));
                &samples.last().expect("just pushed").1
            }
        };
        let v = variants.iter().position(|&x| x == e.variant).expect("collected above");
        let mut acc = vec![(0.0, 0.0); nt];
        for fs in &e.first_stages {
            for (k, outcomes) in simulate_first_stage(fs, e.instance, test, &config.thresholds)
                .iter()
                .enumerate()
            {
                for o in outcomes {
                    acc[k].0 += o.wo;
                    acc[k].1 += o.re;
                }
            }
        }
        let n = (e.first_stages.len() * test.len()) as f64;
        for (k, (wo, re)) in acc.into_iter().enumerate() {
            sums[v].0[k].0 += wo / n;
            sums[v].0[k].1 += re / n;
        }
        sums[v].1 += 1;
    }
    let mut rows = Vec::with_capacity(variants.len() * nt);
    for (v, name) in variants.iter().enumerate() {
        let (per, count) = &sums[v];
        for (k, &th) in config.thresholds.iter().enumerate() {
            rows.push(SimRow {
                variant: name.to_string(),
                threshold: th,
                mean_obj_wo: per[k].0 / *count as f64,
                mean_obj_re: per[k].1 / *count as f64,
            });
        }
    }
    Ok(rows)
}

/// Single-objective baselines whose first stages are compared against the
/// reinsertion-aware archive in simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// First stage improved on the failure-free problem only.
    OneScenario,
    /// First stage improved against the sampled failures with every failed
    /// vehicle skipped, so that only the work overload counts.
    FailuresOnly,
}

pub fn baseline_first_stage(
    baseline: Baseline,
    instance: &Instance,
    sample: &ScenarioSample,
    budget: Budget,
    seed: u64,
) -> Result<Solution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = OperatorWeights::default();
    let start = greedy::utilization_greedy(instance);
    match baseline {
        Baseline::OneScenario => {
            let fs = improve_one_scenario(instance, &start, budget, &weights, &mut rng);
            let nominal = ScenarioSample::nominal(instance);
            let mut sol = Solution::new(fs, vec![ReinsertionPlan::default()]);
            crate::evaluator::evaluate(&mut sol, instance, &nominal)?;
            Ok(sol)
        }
        Baseline::FailuresOnly => {
            let plans = sample.scenarios.iter().map(ReinsertionPlan::all_skip).collect();
            improve_first_stage(
                &Solution::new(start, plans),
                instance,
                sample,
                budget,
                &weights,
                &mut rng,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::sequence_overload;
    use crate::model::fixtures::*;

    #[test]
    fn no_failures_gives_deterministic_overload() {
        let inst = line(&[117.0, 117.0, 77.0, 110.0]);
        let fs = vec![0, 1, 2, 3];
        let out = simulate_dynamic(&fs, &Scenario::nominal(4), &inst, Tu::from_f64(30.0));
        assert_eq!(out.wo, sequence_overload(&inst, &fs).as_f64());
        assert_eq!(out.re, 0.0);
        assert!(out.log.is_empty());
    }

    fn tight() -> (Instance, Scenario, Vec<usize>) {
        // every slot already runs at the cycle, so any insertion overloads
        let mut inst = with_old(
            line_with(&[97.0, 110.0, 97.0, 97.0, 97.0, 97.0, 97.0, 97.0], 97.0, 97.0),
            vec![(110.0, 0, 2, 5), (120.0, 2, 0, 5)],
        );
        inst.lambda = 2;
        inst.f_max = 2;
        let mut exists = vec![true; 8];
        exists[1] = false;
        (inst, Scenario::new(exists, vec![0, 1]), (0..8).collect())
    }

    #[test]
    fn higher_threshold_can_raise_the_penalty() {
        // a cheap new failure taken early blocks the costly old vehicle's window
        let mut inst = with_old(line_with(&[97.5, 97.0, 97.0, 97.0], 97.0, 97.0), vec![(97.0, 3, 7, 9)]);
        inst.vehicles[0].ready_offset = 1;
        inst.lambda = 3;
        let sc = Scenario::new(vec![false, true, true, true], vec![0]);
        let fs = vec![0, 1, 2, 3];
        let strict = simulate_dynamic(&fs, &sc, &inst, Tu::ZERO);
        let loose = simulate_dynamic(&fs, &sc, &inst, Tu::from_f64(3.0));
        assert_eq!(
            strict.log.iter().map(|r| (r.vehicle, r.position)).collect::<Vec<_>>(),
            vec![(5, 3)]
        );
        assert_eq!(strict.re, 1.0);
        assert_eq!(
            loose.log.iter().map(|r| (r.vehicle, r.position)).collect::<Vec<_>>(),
            vec![(1, 2)]
        );
        assert_eq!(loose.re, 64.0);
    }

    #[test]
    fn zero_threshold_on_tight_line_inserts_nothing() {
        let (inst, sc, fs) = tight();
        let out = simulate_dynamic(&fs, &sc, &inst, Tu::ZERO);
        assert!(out.log.is_empty());
        // new failure 1, old vehicles waited 2 and 0 days
        assert_eq!(out.re, 1.0 + 9.0 + 1.0);
        assert_eq!(out.skipped, 3);
    }

    #[test]
    fn large_threshold_inserts_at_first_feasible_positions() {
        let (inst, sc, fs) = tight();
        let out = simulate_dynamic(&fs, &sc, &inst, Tu::from_f64(1e6));
        // ready bounds: vehicle 2 at 2, old 9 at 1, old 10 at 2; lambda 2 keeps
        // targets two apart
        let placed: Vec<(usize, usize)> = out.log.iter().map(|r| (r.vehicle, r.position)).collect();
        assert_eq!(placed, vec![(9, 1), (2, 3), (10, 5)]);
        assert_eq!(out.re, 0.0);
        // brute force: no walk can place all three earlier under lambda 2
        for r in &out.log {
            assert!(r.delta_wo <= Tu::from_f64(1e6));
        }
    }

    #[test]
    fn log_respects_threshold_and_counts_are_monotone() {
        let (inst, sc, fs) = tight();
        let sample = ScenarioSample::new(vec![sc], 0);
        let th = [0.0, 3.0, 5.0, 10.0, 15.0, 30.0];
        let res = simulate_first_stage(&fs, &inst, &sample, &th);
        for w in res.windows(2) {
            assert!(w[1][0].log.len() >= w[0][0].log.len());
            assert!(w[1][0].re <= w[0][0].re);
        }
        for (k, r) in res.iter().enumerate() {
            assert!(r[0].log.iter().all(|x| x.delta_wo <= Tu::from_f64(th[k])));
        }
    }

    #[test]
    fn suite_single_row_matches_walk() {
        let inst = crate::instances::generate_instance(&crate::instances::GeneratorConfig {
            n_stations: 2,
            highrisk_ratio_range: (0.3, 0.3),
            ..crate::instances::GeneratorConfig::new(20, 1)
        })
        .unwrap();
        let fs: Vec<usize> = (0..20).collect();
        let cfg = SimConfig {
            thresholds: vec![5.0],
            n_test_scenarios: 1,
            seed: 4,
        };
        let rows = run_simulation_suite(
            &[SimEntry {
                variant: "ffr".into(),
                instance: &inst,
                first_stages: vec![fs.clone()],
            }],
            &cfg,
        )
        .unwrap();
        let test = sample_scenarios(&inst, 1, 4).unwrap();
        let out = simulate_dynamic(&fs, &test.scenarios[0], &inst, Tu::from_f64(5.0));
        assert_eq!(
            rows,
            vec![SimRow {
                variant: "ffr".into(),
                threshold: 5.0,
                mean_obj_wo: out.wo,
                mean_obj_re: out.re
            }]
        );
        let again = run_simulation_suite(
            &[SimEntry {
                variant: "ffr".into(),
                instance: &inst,
                first_stages: vec![fs],
            }],
            &cfg,
        )
        .unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn baselines() {
        let (inst, sc, _) = tight();
        let sample = ScenarioSample::new(vec![sc], 0);
        let one = baseline_first_stage(Baseline::OneScenario, &inst, &sample, Budget::Iterations(200), 1).unwrap();
        assert_eq!(one.objectives.re, 0.0);
        let ff = baseline_first_stage(Baseline::FailuresOnly, &inst, &sample, Budget::Iterations(200), 1).unwrap();
        assert!(ff.plans[0].decisions.iter().all(|d| d.is_skip()));
    }

    #[test]
    fn invalid_config() {
        assert!(SimConfig {
            thresholds: vec![-1.0],
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            n_test_scenarios: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
