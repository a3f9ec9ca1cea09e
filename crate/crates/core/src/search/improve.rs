//! First- and second-stage improvement procedures.
//!
//! The first stage moves vehicles of the launch sequence and only repairs
//! reinsertions that the move made too early. The second stage moves the
//! reinsertion targets of one scenario. Both accept a neighbor when neither
//! objective nor the violation degree gets worse.

use rand::Rng;

use super::operators::{apply_operator_in_place, OperatorWeights};
use super::tabu::TabuList;
use super::{Budget, Stopwatch};
use crate::error::Result;
use crate::evaluator::{EvalState, Evaluator, PlanChange};
use crate::feasibility::{count_lambda_violations, ready_bound, sample_target};
use crate::instances::ScenarioSample;
use crate::model::{first_stage_positions, Decision, Instance, ReinsertionPlan, Scenario, Solution};

/// A solution with its evaluation caches, inverse permutation and one tabu
/// list per scenario.
#[derive(Debug, Clone)]
pub(crate) struct Incumbent {
    pub sol: Solution,
    pub state: EvalState,
    pub positions: Vec<usize>,
    pub tabus: Vec<TabuList>,
}

impl Incumbent {
    pub fn new(ev: &Evaluator, mut sol: Solution) -> Self {
        let state = ev.full(&sol);
        ev.store(&mut sol, &state);
        let tabu = TabuList::for_lambda(ev.instance().lambda);
        Incumbent {
            positions: sol.positions(),
            tabus: vec![tabu; ev.n_scenarios()],
            sol,
            state,
        }
    }

    fn accepts(&self, next: &EvalState) -> bool {
        next.overload_sum <= self.state.overload_sum
            && next.penalty_sum <= self.state.penalty_sum
            && next.violation_degree <= self.state.violation_degree
    }

    fn commit(&mut self, ev: &Evaluator, state: EvalState) {
        self.state = state;
        ev.store(&mut self.sol, &self.state);
    }

    /// Replaces the plan of scenario `w`, only if nothing gets worse unless
    /// `force` is set.
    pub fn set_plan(&mut self, ev: &Evaluator, w: usize, plan: ReinsertionPlan, force: bool) -> bool {
        let next = ev.reevaluate_scenario(&self.state.scenarios[w], &self.sol.first_stage, w, &plan);
        let cur = &self.state.scenarios[w];
        let better = next.overload <= cur.overload
            && next.penalty <= cur.penalty
            && next.lambda_violations <= cur.lambda_violations;
        if !(force || better) {
            return false;
        }
        Evaluator::replace_scenario(&mut self.state, w, next);
        self.sol.plans[w] = plan;
        ev.store(&mut self.sol, &self.state);
        true
    }
}

/// Moves reinsertions of `plan` that are no longer ready under `positions`.
/// Returns `None` when nothing had to change.
fn repair_ready<R: Rng + ?Sized>(
    instance: &Instance,
    scenario: &Scenario,
    positions: &[usize],
    plan: &ReinsertionPlan,
    tabu: &mut TabuList,
    rng: &mut R,
) -> Option<ReinsertionPlan> {
    let failed = scenario.failed();
    let mut d: Option<Vec<Decision>> = None;
    for g in 0..failed.len() {
        let unit = failed[g];
        if instance.is_old_unit(unit) {
            continue;
        }
        let Decision::InsertAt(t) = plan.decisions[g] else {
            continue;
        };
        let bound = ready_bound(instance, positions, unit).expect("new failures always have a bound");
        if t >= bound {
            continue;
        }
        let dec = d.get_or_insert_with(|| plan.decisions.clone());
        tabu.reject(instance.unit_id(unit), t);
        dec[g] = match sample_target(instance, positions, scenario, dec, g, Some(tabu), rng) {
            Some(t) => Decision::InsertAt(t),
            None => {
                let skips = dec.iter().filter(|x| x.is_skip()).count();
                if skips < instance.f_max {
                    Decision::Skip
                } else {
                    let horizon = instance.horizon();
                    let others: Vec<usize> = dec
                        .iter()
                        .enumerate()
                        .filter(|&(h, _)| h != g)
                        .filter_map(|(_, x)| x.target())
                        .collect();
                    let t = (bound..=horizon)
                        .min_by_key(|&t| {
                            (
                                count_lambda_violations(others.iter().copied().chain([t]), instance.lambda, horizon),
                                t,
                            )
                        })
                        .expect("bound lies within the horizon");
                    Decision::InsertAt(t)
                }
            }
        };
    }
    d.map(ReinsertionPlan::new)
}

/// One first-stage neighbor; true if it was accepted.
pub(crate) fn first_stage_step<R: Rng + ?Sized>(
    ev: &Evaluator,
    inc: &mut Incumbent,
    weights: &OperatorWeights,
    rng: &mut R,
) -> bool {
    let instance = ev.instance();
    let n = instance.horizon();
    if n < 2 {
        return false;
    }
    let (op, i, j) = weights.draw_move(n, rng);
    let mut fs = inc.sol.first_stage.clone();
    apply_operator_in_place(&mut fs, op, i, j);
    let positions = first_stage_positions(&fs);

    let mut plans: Vec<Option<ReinsertionPlan>> = Vec::with_capacity(inc.sol.plans.len());
    for (w, plan) in inc.sol.plans.iter().enumerate() {
        let sc = &ev.sample().scenarios[w];
        plans.push(repair_ready(instance, sc, &positions, plan, &mut inc.tabus[w], rng));
    }
    let scenarios = inc
        .sol
        .plans
        .iter()
        .zip(&plans)
        .enumerate()
        .map(|(w, (old, new))| ev.reevaluate_scenario(&inc.state.scenarios[w], &fs, w, new.as_ref().unwrap_or(old)))
        .collect();
    let next = Evaluator::summarize(scenarios);
    if !inc.accepts(&next) {
        return false;
    }
    inc.sol.first_stage = fs;
    inc.positions = positions;
    for (w, p) in plans.into_iter().enumerate() {
        if let Some(p) = p {
            inc.sol.plans[w] = p;
        }
    }
    inc.commit(ev, next);
    true
}

pub(crate) fn first_stage_pass<R: Rng + ?Sized>(
    ev: &Evaluator,
    inc: &mut Incumbent,
    sw: &mut Stopwatch,
    weights: &OperatorWeights,
    rng: &mut R,
) -> usize {
    let mut accepted = 0;
    while sw.tick() {
        accepted += usize::from(first_stage_step(ev, inc, weights, rng));
    }
    accepted
}

/// One second-stage neighbor of scenario `w`: swap the targets of two
/// reinsertions or move one to another ready, lambda-free position.
/// `None` when the scenario has no reinsertion to move.
pub(crate) fn second_stage_step<R: Rng + ?Sized>(
    ev: &Evaluator,
    inc: &mut Incumbent,
    w: usize,
    rng: &mut R,
) -> Option<bool> {
    let instance = ev.instance();
    let sc = &ev.sample().scenarios[w];
    let plan = &inc.sol.plans[w];
    let inserted: Vec<usize> = (0..plan.decisions.len())
        .filter(|&g| !plan.decisions[g].is_skip())
        .collect();
    if inserted.is_empty() {
        return None;
    }
    let failed = sc.failed();
    let change = if inserted.len() >= 2 && rng.random_bool(0.5) {
        let m = inserted.len();
        let x = rng.random_range(0..m);
        let y = (x + rng.random_range(1..m)) % m;
        let (a, b) = (inserted[x], inserted[y]);
        let (ta, tb) = (plan.decisions[a].gene_value(), plan.decisions[b].gene_value());
        let ready = |g: usize, t: usize| ready_bound(instance, &inc.positions, failed[g]).is_some_and(|x| x <= t);
        if ta == tb || !ready(a, tb) || !ready(b, ta) {
            return Some(false);
        }
        PlanChange::Swap(a, b)
    } else {
        let g = inserted[rng.random_range(0..inserted.len())];
        let t = plan.decisions[g].gene_value();
        let tabu = &inc.tabus[w];
        match sample_target(instance, &inc.positions, sc, &plan.decisions, g, Some(tabu), rng) {
            Some(t2) if t2 != t => PlanChange::Set(g, Decision::InsertAt(t2)),
            _ => return Some(false),
        }
    };
    let mut plan = inc.sol.plans[w].clone();
    change.apply(&mut plan);
    if inc.set_plan(ev, w, plan, false) {
        Some(true)
    } else {
        if let PlanChange::Set(g, Decision::InsertAt(t2)) = change {
            inc.tabus[w].reject(instance.unit_id(failed[g]), t2);
        }
        Some(false)
    }
}

pub(crate) fn second_stage_pass<R: Rng + ?Sized>(
    ev: &Evaluator,
    inc: &mut Incumbent,
    w: usize,
    sw: &mut Stopwatch,
    rng: &mut R,
) -> usize {
    let mut accepted = 0;
    while sw.tick() {
        match second_stage_step(ev, inc, w, rng) {
            None => break,
            Some(a) => accepted += usize::from(a),
        }
    }
    accepted
}

/// Flips the skip/insert decision of one randomly chosen failed vehicle of
/// scenario `w`, regardless of the effect on the objectives. A skipped
/// vehicle is reinserted at a random ready, lambda-free position; a
/// reinserted one is skipped if it is not due and the `f_max` cap allows.
/// Returns false when the chosen flip is not possible.
pub(crate) fn flip_decision<R: Rng + ?Sized>(ev: &Evaluator, inc: &mut Incumbent, w: usize, rng: &mut R) -> bool {
    let instance = ev.instance();
    let sc = &ev.sample().scenarios[w];
    let failed = sc.failed();
    if failed.is_empty() {
        return false;
    }
    let plan = &inc.sol.plans[w];
    let g = rng.random_range(0..failed.len());
    let new = match plan.decisions[g] {
        Decision::Skip => {
            match sample_target(
                instance,
                &inc.positions,
                sc,
                &plan.decisions,
                g,
                Some(&inc.tabus[w]),
                rng,
            ) {
                Some(t) => Decision::InsertAt(t),
                None => return false,
            }
        }
        Decision::InsertAt(_) => {
            if instance.unit_is_due(failed[g]) || plan.skip_count() >= instance.f_max {
                return false;
            }
            Decision::Skip
        }
    };
    let mut plan = plan.clone();
    plan.decisions[g] = new;
    inc.set_plan(ev, w, plan, true);
    true
}

/// Improves the work overload by first-stage moves for `budget`, keeping the
/// skip/insert decisions except where a reinsertion can no longer be placed.
pub fn improve_first_stage<R: Rng + ?Sized>(
    solution: &Solution,
    instance: &Instance,
    sample: &ScenarioSample,
    budget: Budget,
    weights: &OperatorWeights,
    rng: &mut R,
) -> Result<Solution> {
    weights.validate()?;
    let ev = Evaluator::new(instance, sample);
    let mut checked = solution.clone();
    ev.evaluate(&mut checked)?;
    let mut inc = Incumbent::new(&ev, checked);
    first_stage_pass(&ev, &mut inc, &mut Stopwatch::new(budget), weights, rng);
    Ok(inc.sol)
}

/// Improves the work overload by moving the reinsertion targets of one
/// scenario for `budget`.
pub fn improve_second_stage<R: Rng + ?Sized>(
    solution: &Solution,
    scenario: usize,
    instance: &Instance,
    sample: &ScenarioSample,
    budget: Budget,
    rng: &mut R,
) -> Result<Solution> {
    let ev = Evaluator::new(instance, sample);
    let mut checked = solution.clone();
    ev.evaluate(&mut checked)?;
    if scenario >= sample.len() {
        return Err(crate::error::contract(format!("scenario {scenario} out of range")));
    }
    let mut inc = Incumbent::new(&ev, checked);
    second_stage_pass(&ev, &mut inc, scenario, &mut Stopwatch::new(budget), rng);
    Ok(inc.sol)
}

/// First-stage improvement on the failure-free single scenario.
pub fn improve_one_scenario<R: Rng + ?Sized>(
    instance: &Instance,
    first_stage: &[usize],
    budget: Budget,
    weights: &OperatorWeights,
    rng: &mut R,
) -> Vec<usize> {
    let mut sw = Stopwatch::new(budget);
    one_scenario_pass(instance, first_stage, &mut sw, weights, rng)
}

pub(crate) fn one_scenario_pass<R: Rng + ?Sized>(
    instance: &Instance,
    first_stage: &[usize],
    sw: &mut Stopwatch,
    weights: &OperatorWeights,
    rng: &mut R,
) -> Vec<usize> {
    let sample = ScenarioSample::nominal(instance);
    let ev = Evaluator::new(instance, &sample);
    let sol = Solution::new(first_stage.to_vec(), vec![ReinsertionPlan::default()]);
    let mut inc = Incumbent::new(&ev, sol);
    first_stage_pass(&ev, &mut inc, sw, weights, rng);
    inc.sol.first_stage
}
