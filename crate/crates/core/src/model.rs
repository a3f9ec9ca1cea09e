//! Domain types: stations, vehicles, instances, failure scenarios,
//! reinsertion plans and solutions.
//!
//! Vehicles of the current horizon and the vehicles in the old-failure pool
//! share one index space called a *unit*: unit `u < |V|` is
//! `instance.vehicles[u]`, unit `|V| + j` is `instance.old_pool[j]`.
//! Sequences, plans and the evaluator all speak in units.

use std::collections::HashSet;

use crate::tu::Tu;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RiskClass {
    Low,
    High,
}

impl RiskClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskClass::Low => "low",
            RiskClass::High => "high",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Station {
    pub id: usize,
    pub length: Tu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: usize,
    /// One entry per station.
    pub processing: Vec<Tu>,
    pub failure_prob: f64,
    pub risk: RiskClass,
    /// Positions needed after a failure before the vehicle can be reinserted.
    pub ready_offset: usize,
    pub is_ev: bool,
}

/// A vehicle that failed in an earlier horizon and still waits for reinsertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OldFailedVehicle {
    pub id: usize,
    pub processing: Vec<Tu>,
    /// Earliest reinsertion position in the current horizon.
    pub ready_offset: usize,
    /// Days since the originally planned horizon.
    pub wait_days: u32,
    /// Spare days the vehicle had when it failed; `wait_days == slack_days`
    /// means it is due today.
    pub slack_days: u32,
}

impl OldFailedVehicle {
    pub fn is_due(&self) -> bool {
        self.wait_days == self.slack_days
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub stations: Vec<Station>,
    pub vehicles: Vec<Vehicle>,
    pub cycle: Tu,
    pub f_max: usize,
    pub lambda: usize,
    pub lead_time: u32,
    pub old_pool: Vec<OldFailedVehicle>,
}

impl Instance {
    /// Number of first-stage positions, `|T| = |V|`.
    #[inline]
    pub fn horizon(&self) -> usize {
        self.vehicles.len()
    }

    #[inline]
    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    #[inline]
    pub fn n_units(&self) -> usize {
        self.vehicles.len() + self.old_pool.len()
    }

    #[inline]
    pub fn old_unit(&self, pool_index: usize) -> usize {
        self.vehicles.len() + pool_index
    }

    #[inline]
    pub fn is_old_unit(&self, unit: usize) -> bool {
        unit >= self.vehicles.len()
    }

    pub fn unit_id(&self, unit: usize) -> usize {
        match unit.checked_sub(self.vehicles.len()) {
            None => self.vehicles[unit].id,
            Some(j) => self.old_pool[j].id,
        }
    }

    pub fn unit_processing(&self, unit: usize) -> &[Tu] {
        match unit.checked_sub(self.vehicles.len()) {
            None => &self.vehicles[unit].processing,
            Some(j) => &self.old_pool[j].processing,
        }
    }

    pub fn unit_ready_offset(&self, unit: usize) -> usize {
        match unit.checked_sub(self.vehicles.len()) {
            None => self.vehicles[unit].ready_offset,
            Some(j) => self.old_pool[j].ready_offset,
        }
    }

    /// Waiting days `g`; vehicles failing in the current horizon have waited 0.
    pub fn unit_wait_days(&self, unit: usize) -> u32 {
        match unit.checked_sub(self.vehicles.len()) {
            None => 0,
            Some(j) => self.old_pool[j].wait_days,
        }
    }

    /// Reinsertion penalty `(g + 1)^2` charged when the unit is not reinserted.
    pub fn skip_penalty(&self, unit: usize) -> i64 {
        let g = self.unit_wait_days(unit) as i64;
        (g + 1) * (g + 1)
    }

    pub fn unit_is_due(&self, unit: usize) -> bool {
        match unit.checked_sub(self.vehicles.len()) {
            None => false,
            Some(j) => self.old_pool[j].is_due(),
        }
    }

    /// Finds the unit carrying a given external id.
    pub fn unit_by_id(&self, id: usize) -> Option<usize> {
        self.vehicles
            .iter()
            .position(|v| v.id == id)
            .or_else(|| self.old_pool.iter().position(|o| o.id == id).map(|j| self.old_unit(j)))
    }
}

/// One realization of the random failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    /// `exists[v] == false` means vehicle `v` fails.
    pub exists: Vec<bool>,
    /// Indices into `old_pool` of the previously failed vehicles present.
    pub old_present: Vec<usize>,
    failed: Vec<usize>,
}

impl Scenario {
    pub fn new(exists: Vec<bool>, mut old_present: Vec<usize>) -> Self {
        old_present.sort_unstable();
        old_present.dedup();
        let n = exists.len();
        let failed = exists
            .iter()
            .enumerate()
            .filter(|(_, &e)| !e)
            .map(|(v, _)| v)
            .chain(old_present.iter().map(|&j| n + j))
            .collect();
        Scenario {
            exists,
            old_present,
            failed,
        }
    }

    /// The failure-free scenario over `n` vehicles.
    pub fn nominal(n: usize) -> Self {
        Scenario::new(vec![true; n], Vec::new())
    }

    /// Failed units: new failures by vehicle index, then old vehicles by pool
    /// index. Reinsertion plans are aligned with this order.
    #[inline]
    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    #[inline]
    pub fn n_new_failures(&self) -> usize {
        self.failed.len() - self.old_present.len()
    }

    /// Length of the final sequence, `|T| + |F_old|`.
    #[inline]
    pub fn final_len(&self) -> usize {
        self.exists.len() + self.old_present.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    /// Left for a later horizon (dummy position `|T|+1`).
    Skip,
    /// Reinserted at first-stage position `t` in `1..=|T|`.
    InsertAt(usize),
}

impl Decision {
    #[inline]
    pub fn target(self) -> Option<usize> {
        match self {
            Decision::Skip => None,
            Decision::InsertAt(t) => Some(t),
        }
    }

    #[inline]
    pub fn is_skip(self) -> bool {
        matches!(self, Decision::Skip)
    }

    /// Chromosome gene value: 0 for skip, the position otherwise.
    pub fn gene_value(self) -> usize {
        self.target().unwrap_or(0)
    }

    pub fn from_gene_value(value: usize) -> Self {
        if value == 0 {
            Decision::Skip
        } else {
            Decision::InsertAt(value)
        }
    }
}

/// Second-stage decisions of one scenario, aligned with [`Scenario::failed`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ReinsertionPlan {
    pub decisions: Vec<Decision>,
}

impl ReinsertionPlan {
    pub fn new(decisions: Vec<Decision>) -> Self {
        ReinsertionPlan { decisions }
    }

    pub fn all_skip(scenario: &Scenario) -> Self {
        ReinsertionPlan::new(vec![Decision::Skip; scenario.failed().len()])
    }

    pub fn skip_count(&self) -> usize {
        self.decisions.iter().filter(|d| d.is_skip()).count()
    }

    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.decisions.iter().filter_map(|d| d.target())
    }
}

/// The two objectives: mean work overload and mean reinsertion penalty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectivePoint {
    pub wo: f64,
    pub re: f64,
}

impl ObjectivePoint {
    pub fn new(wo: f64, re: f64) -> Self {
        ObjectivePoint { wo, re }
    }

    /// `<=` in both objectives.
    #[inline]
    pub fn weakly_dominates(&self, other: &ObjectivePoint) -> bool {
        self.wo <= other.wo && self.re <= other.re
    }

    /// `<=` in both objectives and `<` in at least one.
    #[inline]
    pub fn dominates(&self, other: &ObjectivePoint) -> bool {
        self.weakly_dominates(other) && (self.wo < other.wo || self.re < other.re)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Vehicle indices in sequence order (position `t` is `first_stage[t-1]`).
    pub first_stage: Vec<usize>,
    /// One plan per sampled scenario.
    pub plans: Vec<ReinsertionPlan>,
    pub objectives: ObjectivePoint,
    /// Number of violated lambda windows summed over scenarios.
    pub violation_degree: usize,
}

impl Solution {
    /// An unevaluated solution; objectives are zero until evaluated.
    pub fn new(first_stage: Vec<usize>, plans: Vec<ReinsertionPlan>) -> Self {
        Solution {
            first_stage,
            plans,
            objectives: ObjectivePoint::default(),
            violation_degree: 0,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation_degree == 0
    }

    /// Inverse permutation, 1-based: `positions[v]` is the position of vehicle `v`.
    pub fn positions(&self) -> Vec<usize> {
        first_stage_positions(&self.first_stage)
    }
}

pub fn first_stage_positions(first_stage: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; first_stage.len()];
    for (i, &v) in first_stage.iter().enumerate() {
        pos[v] = i + 1;
    }
    pos
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeqEntry {
    pub unit: usize,
    /// Not reinserted; carries the cycle time at every station.
    pub neutral: bool,
}

/// Post-reinsertion order of one scenario, `|T| + |F_old|` entries long.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FinalSequence {
    pub entries: Vec<SeqEntry>,
}

impl FinalSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Units in order, ignoring the neutral flag.
    pub fn units(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.unit).collect()
    }
}

/// Checks every type invariant and reports one line per breach.
pub fn validate_instance(instance: &Instance) -> Vec<String> {
    let mut out = Vec::new();
    let k = instance.n_stations();
    let c = instance.cycle;

    if c <= Tu::ZERO {
        out.push(format!("cycle time {c} must be positive"));
    }
    if instance.stations.is_empty() {
        out.push("instance has no stations".to_string());
    }
    for s in &instance.stations {
        if s.length < c {
            out.push(format!(
                "station {}: length {} is shorter than cycle {}",
                s.id, s.length, c
            ));
        }
    }
    if instance.lambda < 1 {
        out.push(format!("lambda {} must be at least 1", instance.lambda));
    }
    if instance.old_pool.len() != instance.f_max {
        out.push(format!(
            "old_pool size {} differs from f_max {}",
            instance.old_pool.len(),
            instance.f_max
        ));
    }

    let mut ids = HashSet::new();
    for v in &instance.vehicles {
        if !ids.insert(v.id) {
            out.push(format!("vehicle {}: duplicate id", v.id));
        }
        if v.processing.len() != k {
            out.push(format!(
                "vehicle {}: {} processing times for {} stations",
                v.id,
                v.processing.len(),
                k
            ));
        }
        if v.processing.iter().any(|&p| p < Tu::ZERO) {
            out.push(format!("vehicle {}: negative processing time", v.id));
        }
        if !(0.0..=1.0).contains(&v.failure_prob) {
            out.push(format!(
                "vehicle {}: failure probability {} outside [0,1]",
                v.id, v.failure_prob
            ));
        }
    }
    for o in &instance.old_pool {
        if !ids.insert(o.id) {
            out.push(format!("old vehicle {}: duplicate id", o.id));
        }
        if o.processing.len() != k {
            out.push(format!(
                "old vehicle {}: {} processing times for {} stations",
                o.id,
                o.processing.len(),
                k
            ));
        }
        if o.processing.iter().any(|&p| p < Tu::ZERO) {
            out.push(format!("old vehicle {}: negative processing time", o.id));
        }
        if !(1 <= o.wait_days && o.wait_days <= o.slack_days && o.slack_days <= instance.lead_time) {
            out.push(format!(
                "old vehicle {}: requires 1 <= g ({}) <= d ({}) <= lead time ({})",
                o.id, o.wait_days, o.slack_days, instance.lead_time
            ));
        }
    }
    out
}

/// Checks the scenario against an instance: mask length, only high-risk
/// vehicles failing, and old vehicles within the pool.
pub fn validate_scenario(instance: &Instance, scenario: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    if scenario.exists.len() != instance.horizon() {
        out.push(format!(
            "scenario mask has {} entries for {} vehicles",
            scenario.exists.len(),
            instance.horizon()
        ));
        return out;
    }
    for (v, &e) in scenario.exists.iter().enumerate() {
        if !e && instance.vehicles[v].risk == RiskClass::Low {
            out.push(format!("low-risk vehicle {} fails", instance.vehicles[v].id));
        }
    }
    if scenario.old_present.len() > instance.f_max {
        out.push(format!(
            "{} old vehicles present, f_max is {}",
            scenario.old_present.len(),
            instance.f_max
        ));
    }
    if let Some(&j) = scenario.old_present.iter().find(|&&j| j >= instance.old_pool.len()) {
        out.push(format!("old pool index {j} out of range"));
    }
    out
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn well_formed_instance_has_no_violations() {
        let inst = with_old(line(&[97.0, 90.0, 100.0]), vec![(95.0, 0, 2, 5)]);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn short_station_is_reported() {
        let mut inst = line(&[97.0]);
        inst.stations[0].length = tu(90.0);
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("station 1"), "{v:?}");
    }

    #[test]
    fn pool_size_mismatch_is_reported() {
        let mut inst = with_old(line(&[97.0, 97.0]), vec![(97.0, 0, 1, 1), (97.0, 0, 1, 2)]);
        inst.old_pool.pop();
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("old_pool size"), "{v:?}");
    }

    #[test]
    fn wait_days_ordering_is_checked() {
        let inst = with_old(line(&[97.0]), vec![(97.0, 0, 5, 3)]);
        assert_eq!(validate_instance(&inst).len(), 1);
    }

    #[test]
    fn scenario_failed_order() {
        let s = Scenario::new(vec![true, false, true, false], vec![1, 0]);
        assert_eq!(s.failed(), &[1, 3, 4, 5]);
        assert_eq!(s.n_new_failures(), 2);
        assert_eq!(s.final_len(), 6);
    }

    #[test]
    fn domination() {
        let a = ObjectivePoint::new(1.0, 2.0);
        let b = ObjectivePoint::new(1.0, 3.0);
        assert!(a.dominates(&b));
        assert!(!b.dominates(&a));
        assert!(a.weakly_dominates(&a));
        assert!(!a.dominates(&a));
    }
}
