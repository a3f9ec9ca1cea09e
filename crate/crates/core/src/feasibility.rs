//! Reinsertion feasibility: being-ready bounds, lambda spacing, the `f_max`
//! cap and the due-vehicle rule, plus the repair procedure applied to
//! second-stage plans.
//!
//! Ready, `f_max` and due rules are hard; lambda spacing is soft and counted
//! per violated window.

use rand::Rng;

use crate::error::{contract, Result};
use crate::model::{first_stage_positions, Decision, Instance, ReinsertionPlan, Scenario, Solution};
use crate::search::tabu::TabuList;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeasibilityReport {
    /// Windows of length lambda holding two or more reinsertions.
    pub lambda_violations: usize,
    pub fmax_excess: usize,
    pub due_misses: usize,
    pub ready_violations: usize,
}

impl FeasibilityReport {
    pub fn hard_ok(&self) -> bool {
        self.fmax_excess == 0 && self.due_misses == 0 && self.ready_violations == 0
    }

    pub fn is_feasible(&self) -> bool {
        self.hard_ok() && self.lambda_violations == 0
    }
}

/// Earliest admissible reinsertion position of a failed unit.
///
/// `positions` is the 1-based inverse of the first-stage permutation.
/// Returns `None` for an old vehicle that cannot become ready within the
/// horizon.
pub(crate) fn ready_bound(instance: &Instance, positions: &[usize], unit: usize) -> Option<usize> {
    let horizon = instance.horizon();
    let r = instance.unit_ready_offset(unit);
    if instance.is_old_unit(unit) {
        let b = r.max(1);
        (b <= horizon).then_some(b)
    } else {
        Some((positions[unit] + r).min(horizon))
    }
}

/// Being-ready lower bound of `unit` under `first_stage`.
///
/// New failures at first-stage position `t` become ready at `min(|T|, t + r)`;
/// old vehicles at `max(1, r)`. The result may exceed `|T|` for an old
/// vehicle that never becomes ready in this horizon.
pub fn ready_lower_bound(
    instance: &Instance,
    scenario: &Scenario,
    first_stage: &[usize],
    unit: usize,
) -> Result<usize> {
    if !scenario.failed().contains(&unit) {
        return Err(contract(format!(
            "vehicle {} is not failed in this scenario",
            instance.unit_id(unit)
        )));
    }
    let r = instance.unit_ready_offset(unit);
    if instance.is_old_unit(unit) {
        Ok(r.max(1))
    } else {
        let positions = first_stage_positions(first_stage);
        Ok((positions[unit] + r).min(instance.horizon()))
    }
}

/// True when a reinsertion at `t` would share a lambda window with any of
/// `others`.
#[inline]
pub(crate) fn lambda_conflict(
    t: usize,
    others: impl IntoIterator<Item = usize>,
    lambda: usize,
    horizon: usize,
) -> bool {
    if horizon < lambda {
        return false;
    }
    others.into_iter().any(|o| t.abs_diff(o) < lambda)
}

/// Counts windows `[s, s+lambda-1]`, `s = 1..=|T|-lambda+1`, containing at
/// least two reinsertion targets.
pub fn count_lambda_violations(targets: impl IntoIterator<Item = usize>, lambda: usize, horizon: usize) -> usize {
    if horizon < lambda || lambda == 0 {
        return 0;
    }
    let mut counts = vec![0usize; horizon + 2];
    let mut any = 0;
    for t in targets {
        if (1..=horizon).contains(&t) {
            counts[t] += 1;
            any += 1;
        }
    }
    if any < 2 {
        return 0;
    }
    let mut window: usize = counts[1..=lambda].iter().sum();
    let mut violated = usize::from(window >= 2);
    for s in 2..=(horizon - lambda + 1) {
        window = window + counts[s + lambda - 1] - counts[s - 1];
        if window >= 2 {
            violated += 1;
        }
    }
    violated
}

fn report_with_positions(
    plan: &ReinsertionPlan,
    scenario: &Scenario,
    positions: &[usize],
    instance: &Instance,
) -> FeasibilityReport {
    let horizon = instance.horizon();
    let mut rep = FeasibilityReport {
        lambda_violations: count_lambda_violations(plan.targets(), instance.lambda, horizon),
        ..Default::default()
    };
    let skips = plan.skip_count();
    rep.fmax_excess = skips.saturating_sub(instance.f_max);
    for (&unit, d) in scenario.failed().iter().zip(&plan.decisions) {
        match *d {
            Decision::Skip => {
                if instance.unit_is_due(unit) {
                    rep.due_misses += 1;
                }
            }
            Decision::InsertAt(t) => {
                let ok = ready_bound(instance, positions, unit).is_some_and(|b| t >= b) && t <= horizon;
                if !ok {
                    rep.ready_violations += 1;
                }
            }
        }
    }
    rep
}

pub fn check_plan(
    plan: &ReinsertionPlan,
    scenario: &Scenario,
    first_stage: &[usize],
    instance: &Instance,
) -> FeasibilityReport {
    debug_assert_eq!(plan.decisions.len(), scenario.failed().len());
    report_with_positions(plan, scenario, &first_stage_positions(first_stage), instance)
}

/// Sum of lambda violations over all plans of a solution.
pub fn violation_degree(solution: &Solution, instance: &Instance) -> usize {
    solution
        .plans
        .iter()
        .map(|p| count_lambda_violations(p.targets(), instance.lambda, instance.horizon()))
        .sum()
}

/// Draws a uniformly random ready, lambda-respecting target for gene `gene`
/// of `decisions`, preferring positions the tabu list allows.
pub(crate) fn sample_target<R: Rng + ?Sized>(
    instance: &Instance,
    positions: &[usize],
    scenario: &Scenario,
    decisions: &[Decision],
    gene: usize,
    tabu: Option<&TabuList>,
    rng: &mut R,
) -> Option<usize> {
    let unit = scenario.failed()[gene];
    let bound = ready_bound(instance, positions, unit)?;
    let horizon = instance.horizon();
    let others = |t: usize| {
        lambda_conflict(
            t,
            decisions
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != gene)
                .filter_map(|(_, d)| d.target()),
            instance.lambda,
            horizon,
        )
    };
    let free: Vec<usize> = (bound..=horizon).filter(|&t| !others(t)).collect();
    if free.is_empty() {
        return None;
    }
    if let Some(tabu) = tabu {
        let id = instance.unit_id(unit);
        let allowed: Vec<usize> = free.iter().copied().filter(|&t| tabu.allows(id, t)).collect();
        if !allowed.is_empty() {
            return Some(allowed[rng.random_range(0..allowed.len())]);
        }
    }
    Some(free[rng.random_range(0..free.len())])
}

/// Repairs a plan.
///
/// 1. Reinsertions before their ready bound are moved to a random ready,
///    lambda-free position, or skipped if none exists.
/// 2. While too many vehicles are skipped (or a due vehicle is skipped),
///    positions `1..=|T|` are scanned in order and skipped vehicles are placed
///    at the first ready, lambda-free positions.
/// 3. Anything still missing is placed at the position adding the fewest
///    violated windows (lowest position on ties), sacrificing lambda spacing.
/// 4. Remaining lambda violations are reduced by single-vehicle moves that
///    keep every hard rule.
///
/// Ready violations, due misses and `f_max` excess are zero afterwards unless
/// a required vehicle has no ready position at all.
pub fn enhance<R: Rng + ?Sized>(
    plan: &ReinsertionPlan,
    scenario: &Scenario,
    first_stage: &[usize],
    instance: &Instance,
    rng: &mut R,
) -> ReinsertionPlan {
    let positions = first_stage_positions(first_stage);
    enhance_with(plan, scenario, &positions, instance, None, rng)
}

pub(crate) fn enhance_with<R: Rng + ?Sized>(
    plan: &ReinsertionPlan,
    scenario: &Scenario,
    positions: &[usize],
    instance: &Instance,
    tabu: Option<&TabuList>,
    rng: &mut R,
) -> ReinsertionPlan {
    let horizon = instance.horizon();
    let lambda = instance.lambda;
    let failed = scenario.failed();
    let bounds: Vec<Option<usize>> = failed.iter().map(|&u| ready_bound(instance, positions, u)).collect();
    let mut d = plan.decisions.clone();

    // ready repair
    for g in 0..d.len() {
        if let Decision::InsertAt(t) = d[g] {
            let ok = bounds[g].is_some_and(|b| t >= b) && t <= horizon;
            if !ok {
                d[g] = match sample_target(instance, positions, scenario, &d, g, tabu, rng) {
                    Some(t) => Decision::InsertAt(t),
                    None => Decision::Skip,
                };
            }
        }
    }

    let is_due = |g: usize| instance.unit_is_due(failed[g]);
    let needs_insert = |d: &[Decision]| {
        let skips = d.iter().filter(|x| x.is_skip()).count();
        skips > instance.f_max || d.iter().enumerate().any(|(g, x)| x.is_skip() && is_due(g))
    };
    // Which skipped gene to place next: due vehicles first, then the larger
    // penalty, then plan order.
    let pick = |d: &[Decision], at: Option<usize>| -> Option<usize> {
        let skips = d.iter().filter(|x| x.is_skip()).count();
        let excess = skips > instance.f_max;
        (0..d.len())
            .filter(|&g| d[g].is_skip())
            .filter(|&g| excess || is_due(g))
            .filter(|&g| match (bounds[g], at) {
                (Some(b), Some(t)) => b <= t,
                (Some(_), None) => true,
                (None, _) => false,
            })
            .min_by_key(|&g| (!is_due(g), std::cmp::Reverse(instance.skip_penalty(failed[g])), g))
    };

    if needs_insert(&d) {
        for t in 1..=horizon {
            if !needs_insert(&d) {
                break;
            }
            if lambda_conflict(t, d.iter().filter_map(|x| x.target()), lambda, horizon) {
                continue;
            }
            if let Some(g) = pick(&d, Some(t)) {
                d[g] = Decision::InsertAt(t);
            }
        }
    }

    while needs_insert(&d) {
        let Some(g) = pick(&d, None) else { break };
        let b = bounds[g].expect("picked genes have a bound");
        let others: Vec<usize> = d.iter().filter_map(|x| x.target()).collect();
        let t = (b..=horizon)
            .min_by_key(|&t| {
                (
                    count_lambda_violations(others.iter().copied().chain([t]), lambda, horizon),
                    t,
                )
            })
            .expect("bound is within the horizon");
        d[g] = Decision::InsertAt(t);
    }

    reduce_lambda_violations(&mut d, failed, &bounds, instance);
    ReinsertionPlan::new(d)
}

/// A plan where each failed vehicle is reinserted with probability
/// `insert_prob` at a random ready, lambda-free position, then repaired.
pub(crate) fn random_plan<R: Rng + ?Sized>(
    instance: &Instance,
    scenario: &Scenario,
    positions: &[usize],
    insert_prob: f64,
    tabu: Option<&TabuList>,
    rng: &mut R,
) -> ReinsertionPlan {
    let n = scenario.failed().len();
    let mut d = vec![Decision::Skip; n];
    for g in 0..n {
        if insert_prob >= 1.0 || rng.random_bool(insert_prob.clamp(0.0, 1.0)) {
            if let Some(t) = sample_target(instance, positions, scenario, &d, g, tabu, rng) {
                d[g] = Decision::InsertAt(t);
            }
        }
    }
    enhance_with(&ReinsertionPlan::new(d), scenario, positions, instance, tabu, rng)
}

fn reduce_lambda_violations(d: &mut [Decision], failed: &[usize], bounds: &[Option<usize>], instance: &Instance) {
    let horizon = instance.horizon();
    let lambda = instance.lambda;
    let count = |d: &[Decision]| count_lambda_violations(d.iter().filter_map(|x| x.target()), lambda, horizon);
    loop {
        let current = count(d);
        if current == 0 {
            return;
        }
        let mut best: Option<(usize, usize, Decision)> = None;
        for g in 0..d.len() {
            let Decision::InsertAt(t) = d[g] else { continue };
            let involved = lambda_conflict(
                t,
                d.iter()
                    .enumerate()
                    .filter(|&(h, _)| h != g)
                    .filter_map(|(_, x)| x.target()),
                lambda,
                horizon,
            );
            if !involved {
                continue;
            }
            let b = bounds[g].expect("inserted genes are ready");
            for t2 in b..=horizon {
                if t2 == t {
                    continue;
                }
                let saved = d[g];
                d[g] = Decision::InsertAt(t2);
                let v = count(d);
                d[g] = saved;
                if v < best.map_or(current, |b| b.0) {
                    best = Some((v, g, Decision::InsertAt(t2)));
                }
            }
        }
        if best.is_none() {
            // Dropping a reinsertion is the last resort, only within f_max.
            let skips = d.iter().filter(|x| x.is_skip()).count();
            if skips < instance.f_max {
                for g in 0..d.len() {
                    if d[g].is_skip() || instance.unit_is_due(failed[g]) {
                        continue;
                    }
                    let saved = d[g];
                    d[g] = Decision::Skip;
                    let v = count(d);
                    d[g] = saved;
                    if v < best.map_or(current, |b| b.0) {
                        best = Some((v, g, Decision::Skip));
                    }
                }
            }
        }
        match best {
            Some((_, g, dec)) => d[g] = dec,
            None => return,
        }
    }
}
