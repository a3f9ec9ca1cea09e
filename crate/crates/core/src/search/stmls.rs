//! Stochastic two-stage multi-objective local search.
//!
//! The first stage is improved on the failure-free problem, then the search
//! alternates between first-stage improvement and, every `theta`-th
//! iteration, a random flip of one skip/insert decision per scenario followed
//! by second-stage improvement. Flips are accepted whatever they do to the
//! objectives; they move the incumbent along the trade-off curve while the
//! archive keeps the non-dominated solutions seen on the way.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::improve::{first_stage_pass, flip_decision, one_scenario_pass, second_stage_pass, Incumbent};
use super::operators::OperatorWeights;
use super::{greedy, Budget, Stopwatch};
use crate::archive::ParetoArchive;
use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::feasibility::random_plan;
use crate::instances::ScenarioSample;
use crate::model::{Instance, Solution};

#[derive(Debug, Clone, PartialEq)]
pub struct StmlsConfig {
    /// Perturbation period in iterations of the main loop.
    pub theta: u64,
    /// Effort of one first-stage improvement call.
    pub tau_f: Budget,
    /// Effort of one second-stage improvement call, per scenario.
    pub tau_s: Budget,
    pub weights: OperatorWeights,
    pub budget: Budget,
    /// Share of the budget spent on the failure-free problem first.
    pub one_scenario_share: f64,
    pub seed: u64,
}

impl Default for StmlsConfig {
    fn default() -> Self {
        StmlsConfig {
            theta: 10,
            tau_f: Budget::Seconds(1.0),
            tau_s: Budget::Seconds(0.05),
            weights: OperatorWeights::default(),
            budget: Budget::Seconds(600.0),
            one_scenario_share: 0.05,
            seed: 0,
        }
    }
}

impl StmlsConfig {
    /// Defaults with the improvement efforts expressed in the same unit as
    /// `budget`.
    pub fn with_budget(budget: Budget, seed: u64) -> Self {
        let (tau_f, tau_s) = match budget {
            Budget::Iterations(_) => (Budget::Iterations(100), Budget::Iterations(5)),
            Budget::Seconds(_) => (Budget::Seconds(1.0), Budget::Seconds(0.05)),
        };
        StmlsConfig {
            tau_f,
            tau_s,
            budget,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.theta == 0 {
            return Err(Error::Config("theta must be positive".into()));
        }
        if self.tau_f.is_zero() || self.tau_s.is_zero() {
            return Err(Error::Config("tau_f and tau_s must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.one_scenario_share) {
            return Err(Error::Config("one_scenario_share must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Runs STMLS and returns the archive of feasible non-dominated solutions.
pub fn stmls(instance: &Instance, sample: &ScenarioSample, config: &StmlsConfig) -> Result<ParetoArchive> {
    config.validate()?;
    let ev = Evaluator::new(instance, sample);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sw = Stopwatch::new(config.budget);

    let mut child = sw.child(config.budget.fraction(config.one_scenario_share));
    let first_stage = one_scenario_pass(
        instance,
        &greedy::utilization_greedy(instance),
        &mut child,
        &config.weights,
        &mut rng,
    );
    sw.absorb(&child);

    let positions = crate::model::first_stage_positions(&first_stage);
    let plans = sample
        .scenarios
        .iter()
        .map(|sc| random_plan(instance, sc, &positions, 1.0, None, &mut rng))
        .collect();
    let mut inc = Incumbent::new(&ev, Solution::new(first_stage, plans));
    second_stage_all(&ev, &mut inc, &mut sw, config.tau_s, &mut rng);

    let mut archive = ParetoArchive::new();
    archive.insert(&inc.sol);
    let mut iter: u64 = 0;
    while !sw.exhausted() {
        iter += 1;
        if iter % config.theta == 0 {
            archive.insert(&inc.sol);
            for w in 0..sample.len() {
                if !sw.tick() {
                    break;
                }
                flip_decision(&ev, &mut inc, w, &mut rng);
            }
            second_stage_all(&ev, &mut inc, &mut sw, config.tau_s, &mut rng);
        } else {
            let mut child = sw.child(config.tau_f);
            first_stage_pass(&ev, &mut inc, &mut child, &config.weights, &mut rng);
            sw.absorb(&child);
        }
    }
    archive.insert(&inc.sol);
    Ok(archive)
}

fn second_stage_all(ev: &Evaluator, inc: &mut Incumbent, sw: &mut Stopwatch, tau_s: Budget, rng: &mut ChaCha8Rng) {
    for w in 0..ev.n_scenarios() {
        let mut child = sw.child(tau_s);
        second_stage_pass(ev, inc, w, &mut child, rng);
        sw.absorb(&child);
    }
}
