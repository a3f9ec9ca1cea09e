//! Final-sequence construction and objective evaluation.
//!
//! Work overload at one station follows the side-by-side recursion
//!
//! ```text
//! z_1 = 0
//! t < last: w_t = max(0, z_t + b_t - l),  z_{t+1} = max(0, z_t + b_t - w_t - c)
//! t = last: w_t = max(0, z_t + b_t - c)
//! ```
//!
//! which attains the minimum total overload under the line constraints.
//! Per-scenario caches keep the operator start positions `z` of every prefix
//! so a local move only re-runs the recursion from the first position whose
//! vehicle changed.

use crate::error::{contract, Result};
use crate::feasibility::{count_lambda_violations, ready_bound};
use crate::instances::ScenarioSample;
use crate::model::{
    first_stage_positions, Decision, FinalSequence, Instance, ObjectivePoint, ReinsertionPlan, Scenario, SeqEntry,
    Solution,
};
use crate::search::operators::{apply_operator_in_place, Operator};
use crate::tu::Tu;

/// Per-position trace of one station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationState {
    /// Operator start position `z_t` at the beginning of each cycle.
    pub start: Vec<Tu>,
    pub overload: Vec<Tu>,
    pub load: Vec<Tu>,
}

impl StationState {
    pub fn total(&self) -> Tu {
        self.overload.iter().copied().sum()
    }
}

#[inline]
fn step(z: Tu, b: Tu, length: Tu, cycle: Tu, last: bool) -> (Tu, Tu) {
    if last {
        ((z + b - cycle).pos(), Tu::ZERO)
    } else {
        let w = (z + b - length).pos();
        (w, (z + b - w - cycle).pos())
    }
}

pub fn station_state(loads: &[Tu], length: Tu, cycle: Tu) -> Result<StationState> {
    if let Some(b) = loads.iter().find(|&&b| b < Tu::ZERO) {
        return Err(contract(format!("negative load {b}")));
    }
    if length < cycle {
        return Err(contract(format!("station length {length} shorter than cycle {cycle}")));
    }
    let n = loads.len();
    let mut start = Vec::with_capacity(n);
    let mut overload = Vec::with_capacity(n);
    let mut z = Tu::ZERO;
    for (t, &b) in loads.iter().enumerate() {
        start.push(z);
        let (w, next) = step(z, b, length, cycle, t + 1 == n);
        overload.push(w);
        z = next;
    }
    Ok(StationState {
        start,
        overload,
        load: loads.to_vec(),
    })
}

/// Overload per position and in total for one station.
pub fn station_overload(loads: &[Tu], length: Tu, cycle: Tu) -> Result<(Vec<Tu>, Tu)> {
    let st = station_state(loads, length, cycle)?;
    let total = st.total();
    Ok((st.overload, total))
}

/// Writes the final order of one scenario into `out` without checking the
/// plan. Survivors keep their first-stage order; a reinsertion at `t` goes
/// right before the first survivor whose first-stage position is `>= t`
/// (after every survivor if there is none); skipped vehicles are appended
/// as neutral entries in id order.
pub(crate) fn build_sequence_into(
    instance: &Instance,
    first_stage: &[usize],
    scenario: &Scenario,
    plan: &ReinsertionPlan,
    out: &mut Vec<SeqEntry>,
) {
    out.clear();
    let failed = scenario.failed();
    let mut inserts: Vec<(usize, usize, usize)> = Vec::new();
    let mut neutral: Vec<usize> = Vec::new();
    for (g, (&unit, d)) in failed.iter().zip(&plan.decisions).enumerate() {
        match *d {
            Decision::InsertAt(t) => inserts.push((t, g, unit)),
            Decision::Skip => neutral.push(unit),
        }
    }
    inserts.sort_unstable();
    let mut next = 0;
    for (idx, &v) in first_stage.iter().enumerate() {
        if !scenario.exists[v] {
            continue;
        }
        let pos = idx + 1;
        while next < inserts.len() && inserts[next].0 <= pos {
            out.push(SeqEntry {
                unit: inserts[next].2,
                neutral: false,
            });
            next += 1;
        }
        out.push(SeqEntry {
            unit: v,
            neutral: false,
        });
    }
    for &(_, _, unit) in &inserts[next..] {
        out.push(SeqEntry { unit, neutral: false });
    }
    neutral.sort_by_key(|&u| instance.unit_id(u));
    out.extend(neutral.into_iter().map(|unit| SeqEntry { unit, neutral: true }));
}

fn check_plan_shape(instance: &Instance, scenario: &Scenario, plan: &ReinsertionPlan) -> Result<()> {
    if plan.decisions.len() != scenario.failed().len() {
        return Err(contract(format!(
            "plan has {} decisions for {} failed vehicles",
            plan.decisions.len(),
            scenario.failed().len()
        )));
    }
    if scenario.exists.len() != instance.horizon() {
        return Err(contract("scenario does not match the instance size"));
    }
    Ok(())
}

/// Final order of one scenario after failures and reinsertions.
///
/// Fails if a reinsertion is placed before its being-ready bound.
pub fn build_final_sequence(
    instance: &Instance,
    first_stage: &[usize],
    scenario: &Scenario,
    plan: &ReinsertionPlan,
) -> Result<FinalSequence> {
    check_plan_shape(instance, scenario, plan)?;
    let positions = first_stage_positions(first_stage);
    for (&unit, d) in scenario.failed().iter().zip(&plan.decisions) {
        if let Decision::InsertAt(t) = *d {
            let ok = ready_bound(instance, &positions, unit).is_some_and(|b| b <= t) && t <= instance.horizon();
            if !ok {
                return Err(contract(format!(
                    "vehicle {} reinserted at {} before it is ready",
                    instance.unit_id(unit),
                    t
                )));
            }
        }
    }
    let mut entries = Vec::with_capacity(scenario.final_len());
    build_sequence_into(instance, first_stage, scenario, plan, &mut entries);
    Ok(FinalSequence { entries })
}

/// Cached evaluation of one scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioEval {
    pub seq: Vec<SeqEntry>,
    /// `z` before each position, `(len + 1) * K` entries, position-major.
    start: Vec<Tu>,
    /// Overload accumulated over all stations before each position.
    acc: Vec<Tu>,
    pub overload: Tu,
    /// Sum of `(g + 1)^2` over skipped vehicles.
    pub penalty: i64,
    pub lambda_violations: usize,
}

/// Evaluation of a whole solution with per-scenario caches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalState {
    pub scenarios: Vec<ScenarioEval>,
    pub overload_sum: Tu,
    pub penalty_sum: i64,
    pub violation_degree: usize,
}

/// A local move for [`Evaluator::delta_evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Operator applied to the first stage at 1-based positions `i`, `j`.
    FirstStage { op: Operator, i: usize, j: usize },
    /// Change to one scenario's plan.
    SecondStage { scenario: usize, change: PlanChange },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanChange {
    /// Exchange the decisions of two genes.
    Swap(usize, usize),
    /// Replace the decision of one gene.
    Set(usize, Decision),
}

impl PlanChange {
    pub fn apply(self, plan: &mut ReinsertionPlan) {
        match self {
            PlanChange::Swap(a, b) => plan.decisions.swap(a, b),
            PlanChange::Set(g, d) => plan.decisions[g] = d,
        }
    }
}

/// Evaluates solutions of one instance against one scenario sample.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    instance: &'a Instance,
    sample: &'a ScenarioSample,
    /// `n_units * K` loads, unit-major.
    loads: Vec<Tu>,
    lengths: Vec<Tu>,
    k: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance, sample: &'a ScenarioSample) -> Self {
        let k = instance.n_stations();
        let mut loads = Vec::with_capacity(instance.n_units() * k);
        for u in 0..instance.n_units() {
            loads.extend_from_slice(instance.unit_processing(u));
        }
        Evaluator {
            instance,
            sample,
            loads,
            lengths: instance.stations.iter().map(|s| s.length).collect(),
            k,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn sample(&self) -> &'a ScenarioSample {
        self.sample
    }

    pub fn n_scenarios(&self) -> usize {
        self.sample.scenarios.len()
    }

    #[inline]
    fn load(&self, e: SeqEntry, k: usize) -> Tu {
        if e.neutral {
            self.instance.cycle
        } else {
            self.loads[e.unit * self.k + k]
        }
    }

    fn recompute_from(&self, ev: &mut ScenarioEval, from: usize) {
        let len = ev.seq.len();
        let k = self.k;
        let c = self.instance.cycle;
        ev.start.resize((len + 1) * k, Tu::ZERO);
        ev.acc.resize(len + 1, Tu::ZERO);
        for i in from..len {
            let last = i + 1 == len;
            let e = ev.seq[i];
            let mut wsum = Tu::ZERO;
            for s in 0..k {
                let (w, next) = step(ev.start[i * k + s], self.load(e, s), self.lengths[s], c, last);
                ev.start[(i + 1) * k + s] = next;
                wsum += w;
            }
            ev.acc[i + 1] = ev.acc[i] + wsum;
        }
        ev.overload = ev.acc[len];
    }

    fn plan_terms(&self, scenario: &Scenario, plan: &ReinsertionPlan) -> (i64, usize) {
        let penalty = scenario
            .failed()
            .iter()
            .zip(&plan.decisions)
            .filter(|(_, d)| d.is_skip())
            .map(|(&u, _)| self.instance.skip_penalty(u))
            .sum();
        let viol = count_lambda_violations(plan.targets(), self.instance.lambda, self.instance.horizon());
        (penalty, viol)
    }

    /// Evaluates one scenario from scratch.
    pub fn evaluate_scenario(&self, first_stage: &[usize], scenario: usize, plan: &ReinsertionPlan) -> ScenarioEval {
        let sc = &self.sample.scenarios[scenario];
        let mut seq = Vec::with_capacity(sc.final_len());
        build_sequence_into(self.instance, first_stage, sc, plan, &mut seq);
        let (penalty, lambda_violations) = self.plan_terms(sc, plan);
        let mut ev = ScenarioEval {
            seq,
            start: vec![Tu::ZERO; self.k],
            acc: vec![Tu::ZERO],
            overload: Tu::ZERO,
            penalty,
            lambda_violations,
        };
        self.recompute_from(&mut ev, 0);
        ev
    }

    /// Re-evaluates one scenario reusing `prev` up to the first changed
    /// position of the final sequence.
    pub fn reevaluate_scenario(
        &self,
        prev: &ScenarioEval,
        first_stage: &[usize],
        scenario: usize,
        plan: &ReinsertionPlan,
    ) -> ScenarioEval {
        let sc = &self.sample.scenarios[scenario];
        let mut seq = Vec::with_capacity(sc.final_len());
        build_sequence_into(self.instance, first_stage, sc, plan, &mut seq);
        let (penalty, lambda_violations) = self.plan_terms(sc, plan);
        let from = prev.seq.iter().zip(&seq).position(|(a, b)| a != b);
        let mut ev = ScenarioEval {
            seq,
            start: Vec::new(),
            acc: Vec::new(),
            overload: prev.overload,
            penalty,
            lambda_violations,
        };
        match from {
            None if prev.seq.len() == ev.seq.len() => {
                ev.start = prev.start.clone();
                ev.acc = prev.acc.clone();
            }
            _ => {
                let from = from.unwrap_or(prev.seq.len().min(ev.seq.len()));
                ev.start = prev.start[..(from + 1) * self.k].to_vec();
                ev.acc = prev.acc[..from + 1].to_vec();
                self.recompute_from(&mut ev, from);
            }
        }
        ev
    }

    fn check_solution(&self, solution: &Solution) -> Result<()> {
        if solution.plans.len() != self.n_scenarios() {
            return Err(contract(format!(
                "solution has {} plans for {} scenarios",
                solution.plans.len(),
                self.n_scenarios()
            )));
        }
        if solution.first_stage.len() != self.instance.horizon() {
            return Err(contract("first stage length differs from the number of vehicles"));
        }
        for (sc, plan) in self.sample.scenarios.iter().zip(&solution.plans) {
            check_plan_shape(self.instance, sc, plan)?;
        }
        Ok(())
    }

    /// Full evaluation with caches. The solution's cached fields are untouched.
    pub fn full(&self, solution: &Solution) -> EvalState {
        let scenarios: Vec<ScenarioEval> = solution
            .plans
            .iter()
            .enumerate()
            .map(|(w, plan)| self.evaluate_scenario(&solution.first_stage, w, plan))
            .collect();
        Self::summarize(scenarios)
    }

    pub(crate) fn summarize(scenarios: Vec<ScenarioEval>) -> EvalState {
        let overload_sum = scenarios.iter().map(|s| s.overload).sum();
        let penalty_sum = scenarios.iter().map(|s| s.penalty).sum();
        let violation_degree = scenarios.iter().map(|s| s.lambda_violations).sum();
        EvalState {
            scenarios,
            overload_sum,
            penalty_sum,
            violation_degree,
        }
    }

    /// Replaces one scenario's cache and updates the sums.
    pub fn replace_scenario(state: &mut EvalState, scenario: usize, ev: ScenarioEval) {
        let old = &state.scenarios[scenario];
        state.overload_sum = state.overload_sum - old.overload + ev.overload;
        state.penalty_sum = state.penalty_sum - old.penalty + ev.penalty;
        state.violation_degree = state.violation_degree - old.lambda_violations + ev.lambda_violations;
        state.scenarios[scenario] = ev;
    }

    /// Sample means of the two objectives.
    pub fn objectives(&self, state: &EvalState) -> ObjectivePoint {
        objectives_from_sums(state.overload_sum, state.penalty_sum, self.n_scenarios())
    }

    /// Writes the objectives and violation degree of `state` into `solution`.
    pub fn store(&self, solution: &mut Solution, state: &EvalState) {
        solution.objectives = self.objectives(state);
        solution.violation_degree = state.violation_degree;
    }

    /// Evaluates and caches both objectives on the solution.
    pub fn evaluate(&self, solution: &mut Solution) -> Result<ObjectivePoint> {
        self.check_solution(solution)?;
        let state = self.full(solution);
        self.store(solution, &state);
        Ok(solution.objectives)
    }

    /// Objectives of `solution` after `mv`, recomputing only the touched
    /// scenarios from their first changed position. Returns the new caches.
    pub fn delta_evaluate(&self, solution: &Solution, state: &EvalState, mv: Move) -> (ObjectivePoint, EvalState) {
        match mv {
            Move::FirstStage { op, i, j } => {
                let mut fs = solution.first_stage.clone();
                apply_operator_in_place(&mut fs, op, i, j);
                let scenarios = solution
                    .plans
                    .iter()
                    .enumerate()
                    .map(|(w, plan)| self.reevaluate_scenario(&state.scenarios[w], &fs, w, plan))
                    .collect();
                let next = Self::summarize(scenarios);
                (self.objectives(&next), next)
            }
            Move::SecondStage { scenario, change } => {
                let mut plan = solution.plans[scenario].clone();
                change.apply(&mut plan);
                let ev = self.reevaluate_scenario(&state.scenarios[scenario], &solution.first_stage, scenario, &plan);
                let mut next = state.clone();
                Self::replace_scenario(&mut next, scenario, ev);
                (self.objectives(&next), next)
            }
        }
    }
}

pub(crate) fn objectives_from_sums(overload_sum: Tu, penalty_sum: i64, n: usize) -> ObjectivePoint {
    let n = n.max(1) as f64;
    ObjectivePoint {
        wo: overload_sum.tenths() as f64 / (10.0 * n),
        re: penalty_sum as f64 / n,
    }
}

/// Evaluates `solution` on `sample`, caching the objectives and violation
/// degree on it.
pub fn evaluate(solution: &mut Solution, instance: &Instance, sample: &ScenarioSample) -> Result<ObjectivePoint> {
    Evaluator::new(instance, sample).evaluate(solution)
}

/// Total overload of a plain sequence of units (no neutral entries), summed
/// over stations.
pub fn sequence_overload(instance: &Instance, units: &[usize]) -> Tu {
    let mut total = Tu::ZERO;
    for (k, st) in instance.stations.iter().enumerate() {
        let loads: Vec<Tu> = units.iter().map(|&u| instance.unit_processing(u)[k]).collect();
        match station_overload(&loads, st.length, instance.cycle) {
            Ok((_, t)) => total += t,
            Err(e) => unreachable!("validated instance: {e}"),
        }
    }
    total
}
