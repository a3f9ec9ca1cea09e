use mmsr::feasibility::check_plan;
use mmsr::instances::{format_instance, parse_instance};
use mmsr::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(seed: u64) -> (Instance, ScenarioSample) {
    let inst = generate_instance(&GeneratorConfig {
        n_stations: 3,
        highrisk_ratio_range: (0.2, 0.2),
        ..GeneratorConfig::new(24, seed)
    })
    .unwrap();
    let sample = sample_scenarios(&inst, 5, seed + 1).unwrap();
    (inst, sample)
}

fn assert_sound(algo: Algorithm, archive: &ParetoArchive, inst: &Instance, sample: &ScenarioSample) {
    assert!(!archive.is_empty());
    for s in archive.members() {
        assert_eq!(s.violation_degree, 0);
        for (p, sc) in s.plans.iter().zip(&sample.scenarios) {
            let r = check_plan(p, sc, &s.first_stage, inst);
            assert!(r.is_feasible(), "{algo}: {r:?}");
        }
        let mut again = s.clone();
        evaluate(&mut again, inst, sample).unwrap();
        assert_eq!(again.objectives, s.objectives);
    }
    let pts = archive.points();
    for a in &pts {
        assert!(pts.iter().all(|b| a == b || !b.dominates(a)));
    }
}

#[test]
fn every_algorithm_returns_sound_archives() {
    let (inst, sample) = small(11);
    for algo in Algorithm::ALL {
        let archive = run_algorithm(algo, &inst, &sample, Budget::Iterations(3_000), 5).unwrap();
        if algo == Algorithm::OneScenario {
            assert_eq!(archive.len(), 1);
            assert_eq!(archive.members()[0].objectives.re, 0.0);
        } else if algo == Algorithm::Ff {
            // reinsertion is switched off, so f_max does not apply
            assert_eq!(archive.len(), 1);
            assert!(archive.members()[0]
                .plans
                .iter()
                .all(|p| p.decisions.iter().all(|d| d.is_skip())));
        } else {
            assert_sound(algo, &archive, &inst, &sample);
        }
        let again = run_algorithm(algo, &inst, &sample, Budget::Iterations(3_000), 5).unwrap();
        assert_eq!(archive, again, "{algo} is not reproducible");
    }
}

#[test]
fn two_hundred_vehicles_allow_ten_left_out() {
    let inst = generate_instance(&GeneratorConfig::new(200, 1)).unwrap();
    assert_eq!(inst.f_max, 10);
    assert_eq!(inst.stations.len(), 5);
    assert_eq!(parse_instance(&format_instance(&inst)).unwrap(), inst);
}

#[test]
fn baselines_bracket_the_reinsertion_objective() {
    let (inst, sample) = small(21);
    let ff = run_algorithm(Algorithm::Ff, &inst, &sample, Budget::Iterations(2_000), 1).unwrap();
    let front = run_algorithm(Algorithm::Stmls, &inst, &sample, Budget::Iterations(5_000), 1).unwrap();
    // leaving every failed vehicle out is the worst reinsertion outcome
    let ff_re = ff.members()[0].objectives.re;
    assert!(front.points().iter().all(|p| p.re <= ff_re));
}

fn random_solution(inst: &Instance, sample: &ScenarioSample, rng: &mut ChaCha8Rng) -> Solution {
    let n = inst.horizon();
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cached_and_direct_evaluation_agree(seed in any::<u64>()) {
        let (inst, sample) = small(seed % 1_000);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sol = random_solution(&inst, &sample, &mut rng);
        let ev = Evaluator::new(&inst, &sample);
        let state = ev.full(&sol);
        let direct = evaluate(&mut sol, &inst, &sample).unwrap();
        prop_assert_eq!(ev.objectives(&state), direct);
    }

    #[test]
    fn enhanced_plans_meet_the_hard_rules_when_possible(seed in any::<u64>()) {
        let (inst, sample) = small(seed % 1_000);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sol = random_solution(&inst, &sample, &mut rng);
        for (p, sc) in sol.plans.iter().zip(&sample.scenarios) {
            let fixed = enhance(p, sc, &sol.first_stage, &inst, &mut rng);
            let report = check_plan(&fixed, sc, &sol.first_stage, &inst);
            prop_assert_eq!(report.ready_violations, 0);
            prop_assert_eq!(enhance(&fixed, sc, &sol.first_stage, &inst, &mut rng), fixed);
        }
    }
}
