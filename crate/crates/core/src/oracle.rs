//! Exhaustive reference results for tiny instances.
//!
//! Everything here is written from the model definition without reusing the
//! evaluator or the feasibility code, so that the two can be checked against
//! each other.

use crate::error::{Error, Result};
use crate::instances::ScenarioSample;
use crate::model::{Decision, Instance, ObjectivePoint, ReinsertionPlan, Scenario, Solution};
use crate::tu::Tu;

pub const MAX_OVERLOAD_POSITIONS: usize = 6;
pub const MAX_VEHICLES: usize = 7;
pub const MAX_FAILED_PER_SCENARIO: usize = 3;
pub const MAX_SCENARIOS: usize = 8;

/// Minimum total overload of one station by dynamic programming over every
/// start offset `z` and overload `w` on the 0.1 TU grid, subject to
///
/// - `z[1] = 0` and the station being empty after the last position,
/// - `z[t] + b[t] - w[t] <= l`,
/// - `z[t] + b[t] - w[t] - z[t+1] <= c`,
/// - `z, w >= 0`.
///
/// Offsets are searched in `[0, l]`.
pub fn reference_overload(loads: &[Tu], length: Tu, cycle: Tu) -> Result<Tu> {
    if loads.len() > MAX_OVERLOAD_POSITIONS {
        return Err(Error::OracleBounds(format!(
            "{} positions, at most {MAX_OVERLOAD_POSITIONS} allowed",
            loads.len()
        )));
    }
    if cycle.tenths() <= 0 || length < cycle || loads.iter().any(|b| b.tenths() < 0) {
        return Err(Error::OracleBounds("need 0 < c <= l and non-negative loads".into()));
    }
    let l = length.tenths();
    let c = cycle.tenths();
    let states = (l + 1) as usize;
    const INF: i64 = i64::MAX / 4;
    // cost-to-go from position t with offset z; after the last position only
    // z = 0 is allowed
    let mut next = vec![INF; states];
    next[0] = 0;
    for &b in loads.iter().rev() {
        let b = b.tenths();
        // suffix minimum of next over z' >= k
        let mut suffix = vec![INF; states + 1];
        for k in (0..states).rev() {
            suffix[k] = suffix[k + 1].min(next[k]);
        }
        let mut cur = vec![INF; states];
        for (z, slot) in cur.iter_mut().enumerate() {
            let z = z as i64;
            let mut best = INF;
            for w in 0..=(z + b) {
                if z + b - w > l {
                    continue;
                }
                let lo = (z + b - w - c).max(0);
                if lo > l {
                    continue;
                }
                let tail = suffix[lo as usize];
                if tail < INF {
                    best = best.min(w + tail);
                }
            }
            *slot = best;
        }
        next = cur;
    }
    Ok(Tu::from_tenths(next[0]))
}

/// Exact front with one witness solution per point, ordered by increasing
/// work overload.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleFront {
    pub points: Vec<ObjectivePoint>,
    pub witnesses: Vec<Solution>,
}

/// Every reinsertion-plan choice for one scenario, as `(overload tenths,
/// penalty, plan)`.
fn plan_options(instance: &Instance, scenario: &Scenario, first_stage: &[usize]) -> Vec<(i64, i64, ReinsertionPlan)> {
    let n = instance.horizon();
    let nv = instance.vehicles.len();
    let mut pos_of = vec![0usize; nv];
    for (i, &v) in first_stage.iter().enumerate() {
        pos_of[v] = i + 1;
    }
    let failed: Vec<usize> = (0..nv)
        .filter(|&v| !scenario.exists[v])
        .chain(scenario.old_present.iter().map(|&j| nv + j))
        .collect();
    // earliest slot and skip rules per failed vehicle
    let earliest: Vec<usize> = failed
        .iter()
        .map(|&u| {
            if u < nv {
                (pos_of[u] + instance.vehicles[u].ready_offset).min(n)
            } else {
                instance.old_pool[u - nv].ready_offset.max(1)
            }
        })
        .collect();
    let must_insert: Vec<bool> = failed
        .iter()
        .map(|&u| u >= nv && instance.old_pool[u - nv].wait_days == instance.old_pool[u - nv].slack_days)
        .collect();

    let mut out = Vec::new();
    let mut choice = vec![0usize; failed.len()];
    loop {
        let skips = choice.iter().filter(|&&t| t == 0).count();
        let ok = skips <= instance.f_max
            && choice.iter().enumerate().all(|(g, &t)| {
                if t == 0 {
                    !must_insert[g]
                } else {
                    t >= earliest[g] && t <= n
                }
            })
            && spacing_ok(&choice, instance.lambda, n);
        if ok {
            let (ov, pen) = score(instance, scenario, first_stage, &failed, &choice);
            let plan = ReinsertionPlan::new(
                choice
                    .iter()
                    .map(|&t| if t == 0 { Decision::Skip } else { Decision::InsertAt(t) })
                    .collect(),
            );
            out.push((ov, pen, plan));
        }
        // odometer over 0..=n per gene
        let mut g = 0;
        loop {
            if g == choice.len() {
                return out;
            }
            choice[g] += 1;
            if choice[g] <= n {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}

fn spacing_ok(choice: &[usize], lambda: usize, n: usize) -> bool {
    if n < lambda {
        return true;
    }
    let t: Vec<usize> = choice.iter().copied().filter(|&t| t > 0).collect();
    for a in 0..t.len() {
        for b in (a + 1)..t.len() {
            if t[a].abs_diff(t[b]) < lambda {
                return false;
            }
        }
    }
    true
}

fn score(
    instance: &Instance,
    scenario: &Scenario,
    first_stage: &[usize],
    failed: &[usize],
    choice: &[usize],
) -> (i64, i64) {
    let nv = instance.vehicles.len();
    let id = |u: usize| {
        if u < nv {
            instance.vehicles[u].id
        } else {
            instance.old_pool[u - nv].id
        }
    };
    // (slot, rank, tiebreak, unit); a reinsertion at t sorts before the
    // survivor that started at t
    let mut keyed: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (i, &v) in first_stage.iter().enumerate() {
        if scenario.exists[v] {
            keyed.push((i + 1, 1, 0, v));
        }
    }
    let mut pen = 0;
    let mut neutral = Vec::new();
    for (g, (&u, &t)) in failed.iter().zip(choice).enumerate() {
        if t == 0 {
            let wait = if u < nv {
                0
            } else {
                instance.old_pool[u - nv].wait_days as i64
            };
            pen += (wait + 1) * (wait + 1);
            neutral.push(u);
        } else {
            keyed.push((t, 0, g, u));
        }
    }
    keyed.sort_unstable();
    neutral.sort_by_key(|&u| id(u));
    let mut ov = 0;
    for (k, st) in instance.stations.iter().enumerate() {
        let c = instance.cycle.tenths();
        let l = st.length.tenths();
        let mut loads: Vec<i64> = keyed
            .iter()
            .map(|&(_, _, _, u)| {
                if u < nv {
                    instance.vehicles[u].processing[k].tenths()
                } else {
                    instance.old_pool[u - nv].processing[k].tenths()
                }
            })
            .collect();
        loads.extend(neutral.iter().map(|_| c));
        let mut z = 0i64;
        for (i, &b) in loads.iter().enumerate() {
            if i + 1 == loads.len() {
                ov += (z + b - c).max(0);
            } else {
                let w = (z + b - l).max(0);
                ov += w;
                z = (z + b - w - c).max(0);
            }
        }
    }
    (ov, pen)
}

/// Non-dominated subset of `(overload, penalty, payload)` triples, one entry
/// per distinct point (the first one met wins).
fn nondominated<T>(items: Vec<(i64, i64, T)>) -> Vec<(i64, i64, T)> {
    let mut keep: Vec<(i64, i64, T)> = Vec::new();
    for it in items {
        if keep.iter().any(|k| k.0 <= it.0 && k.1 <= it.1) {
            continue;
        }
        keep.retain(|k| !(it.0 <= k.0 && it.1 <= k.1));
        keep.push(it);
    }
    keep
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exact Pareto front of a tiny instance over every first stage and every
/// hard-feasible combination of reinsertion plans.
pub fn enumerate_pareto(instance: &Instance, sample: &ScenarioSample) -> Result<OracleFront> {
    let nv = instance.vehicles.len();
    if nv > MAX_VEHICLES {
        return Err(Error::OracleBounds(format!(
            "{nv} vehicles, at most {MAX_VEHICLES} allowed"
        )));
    }
    if sample.len() > MAX_SCENARIOS || sample.is_empty() {
        return Err(Error::OracleBounds(format!(
            "{} scenarios, between 1 and {MAX_SCENARIOS} allowed",
            sample.len()
        )));
    }
    if let Some(sc) = sample
        .scenarios
        .iter()
        .find(|sc| sc.failed().len() > MAX_FAILED_PER_SCENARIO)
    {
        return Err(Error::OracleBounds(format!(
            "{} failed vehicles in a scenario, at most {MAX_FAILED_PER_SCENARIO} allowed",
            sc.failed().len()
        )));
    }
    let n = sample.len();
    let mut perm: Vec<usize> = (0..nv).collect();
    let mut best: Vec<(i64, i64, Solution)> = Vec::new();
    loop {
        // Minkowski sum of the per-scenario fronts
        let mut acc: Vec<(i64, i64, Vec<ReinsertionPlan>)> = vec![(0, 0, Vec::new())];
        for sc in &sample.scenarios {
            let opts = nondominated(plan_options(instance, sc, &perm));
            let mut sums = Vec::with_capacity(acc.len() * opts.len());
            for (ao, ap, plans) in &acc {
                for (oo, op, plan) in &opts {
                    let mut p = plans.clone();
                    p.push(plan.clone());
                    sums.push((ao + oo, ap + op, p));
                }
            }
            acc = nondominated(sums);
            if acc.is_empty() {
                break;
            }
        }
        for (ov, pen, plans) in acc {
            let mut sol = Solution::new(perm.clone(), plans);
            sol.objectives = point(ov, pen, n);
            sol.violation_degree = 0;
            best.push((ov, pen, sol));
        }
        best = nondominated(best);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.sort_by_key(|b| (b.0, b.1));
    Ok(OracleFront {
        points: best.iter().map(|b| point(b.0, b.1, n)).collect(),
        witnesses: best.into_iter().map(|b| b.2).collect(),
    })
}

fn point(overload_tenths: i64, penalty: i64, n: usize) -> ObjectivePoint {
    let n = n as f64;
    ObjectivePoint::new(overload_tenths as f64 / (10.0 * n), penalty as f64 / n)
}
