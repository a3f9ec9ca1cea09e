//! NSGA-II and its hybrid with local search (LS-NSGA-II).
//!
//! A chromosome has two parts: the first-stage permutation and, for every
//! scenario, one gene `(vehicle id, value)` per failed vehicle where value 0
//! means skip and `t >= 1` means reinsertion at position `t`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::archive::{update_external_population, ParetoArchive};
use crate::error::{contract, Error, Result};
use crate::evaluator::Evaluator;
use crate::feasibility::{enhance_with, random_plan, sample_target};
use crate::instances::ScenarioSample;
use crate::model::{first_stage_positions, Decision, Instance, ObjectivePoint, ReinsertionPlan, Scenario, Solution};
use crate::search::improve::{one_scenario_pass, second_stage_pass, Incumbent};
use crate::search::{greedy, Budget, OperatorWeights, Stopwatch};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chromosome {
    /// Vehicle ids in sequence order.
    pub part1: Vec<usize>,
    /// Per scenario, `(vehicle id, value)` genes in failed-vehicle order.
    pub part2: Vec<Vec<(usize, usize)>>,
}

impl Chromosome {
    pub fn from_solution(solution: &Solution, instance: &Instance, sample: &ScenarioSample) -> Self {
        Chromosome {
            part1: solution.first_stage.iter().map(|&v| instance.vehicles[v].id).collect(),
            part2: sample
                .scenarios
                .iter()
                .zip(&solution.plans)
                .map(|(sc, plan)| {
                    sc.failed()
                        .iter()
                        .zip(&plan.decisions)
                        .map(|(&u, d)| (instance.unit_id(u), d.gene_value()))
                        .collect()
                })
                .collect(),
        }
    }

    /// Unevaluated solution with the same decisions.
    pub fn to_solution(&self, instance: &Instance, sample: &ScenarioSample) -> Result<Solution> {
        let first_stage = self
            .part1
            .iter()
            .map(|&id| {
                instance
                    .unit_by_id(id)
                    .filter(|&u| !instance.is_old_unit(u))
                    .ok_or_else(|| contract(format!("unknown vehicle id {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if self.part2.len() != sample.len() {
            return Err(contract("chromosome and sample differ in scenario count"));
        }
        let mut plans = Vec::with_capacity(sample.len());
        for (sc, genes) in sample.scenarios.iter().zip(&self.part2) {
            if genes.len() != sc.failed().len()
                || genes
                    .iter()
                    .zip(sc.failed())
                    .any(|(&(id, _), &u)| id != instance.unit_id(u))
            {
                return Err(contract("genes do not match the failed vehicles of the scenario"));
            }
            plans.push(ReinsertionPlan::new(
                genes.iter().map(|&(_, v)| Decision::from_gene_value(v)).collect(),
            ));
        }
        Ok(Solution::new(first_stage, plans))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EaConfig {
    pub population: usize,
    pub mutation_prob: f64,
    /// Second-stage improvement effort per child and scenario (LS-NSGA-II).
    pub tau_s: Budget,
    pub budget: Budget,
    /// Share of the budget spent improving initial first stages on the
    /// failure-free problem (LS-NSGA-II).
    pub one_scenario_share: f64,
    pub seed: u64,
}

impl EaConfig {
    pub fn nsga2(budget: Budget, seed: u64) -> Self {
        EaConfig {
            population: 40,
            mutation_prob: 0.1,
            tau_s: match budget {
                Budget::Iterations(_) => Budget::Iterations(5),
                Budget::Seconds(_) => Budget::Seconds(0.05),
            },
            budget,
            one_scenario_share: 0.05,
            seed,
        }
    }

    pub fn ls_nsga2(budget: Budget, seed: u64) -> Self {
        EaConfig {
            population: 16,
            ..Self::nsga2(budget, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 4 || self.population % 2 != 0 {
            return Err(Error::Config(format!(
                "population must be even and at least 4, got {}",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::Config("mutation probability must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.one_scenario_share) {
            return Err(Error::Config("one_scenario_share must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Child keeps `parent1[..cut]`, then the remaining entries in `parent2` order.
pub fn pmx_single_point(parent1: &[usize], parent2: &[usize], cut: usize) -> Result<Vec<usize>> {
    let n = parent1.len();
    if parent2.len() != n || cut == 0 || cut >= n {
        return Err(contract(format!("cut {cut} invalid for parents of length {n}")));
    }
    let max = parent1.iter().copied().max().unwrap_or(0);
    let mut taken = vec![false; max + 1];
    let mut child = Vec::with_capacity(n);
    for &v in &parent1[..cut] {
        taken[v] = true;
        child.push(v);
    }
    for &v in parent2 {
        if v > max || !taken[v] {
            child.push(v);
        }
    }
    if child.len() != n {
        return Err(contract("parents are not permutations of the same set"));
    }
    Ok(child)
}

/// Inherits equal skip/insert decisions, draws unequal ones from a fair coin,
/// gives every reinsertion a fresh random target and repairs the result.
pub fn uniform_reinsertion_crossover<R: Rng + ?Sized>(
    plan1: &ReinsertionPlan,
    plan2: &ReinsertionPlan,
    scenario: &Scenario,
    first_stage: &[usize],
    instance: &Instance,
    rng: &mut R,
) -> ReinsertionPlan {
    let positions = first_stage_positions(first_stage);
    crossover_with(plan1, plan2, scenario, &positions, instance, rng)
}

fn crossover_with<R: Rng + ?Sized>(
    plan1: &ReinsertionPlan,
    plan2: &ReinsertionPlan,
    scenario: &Scenario,
    positions: &[usize],
    instance: &Instance,
    rng: &mut R,
) -> ReinsertionPlan {
    let insert: Vec<bool> = plan1
        .decisions
        .iter()
        .zip(&plan2.decisions)
        .map(|(a, b)| {
            if a.is_skip() == b.is_skip() {
                !a.is_skip()
            } else {
                let donor = if rng.random_bool(0.5) { a } else { b };
                !donor.is_skip()
            }
        })
        .collect();
    let mut d = vec![Decision::Skip; insert.len()];
    for g in 0..d.len() {
        if insert[g] {
            if let Some(t) = sample_target(instance, positions, scenario, &d, g, None, rng) {
                d[g] = Decision::InsertAt(t);
            }
        }
    }
    enhance_with(&ReinsertionPlan::new(d), scenario, positions, instance, None, rng)
}

/// Reverses a random block of at least two entries.
pub fn mutate_first_stage<R: Rng + ?Sized>(seq: &mut [usize], rng: &mut R) {
    let n = seq.len();
    if n < 2 {
        return;
    }
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    seq[i.min(j)..=i.max(j)].reverse();
}

/// Flips gene `gene`: skip becomes a reinsertion at a random ready,
/// lambda-free position (if there is one), a reinsertion becomes a skip. The
/// plan is repaired afterwards.
pub fn mutate_gene<R: Rng + ?Sized>(
    plan: &ReinsertionPlan,
    gene: usize,
    scenario: &Scenario,
    first_stage: &[usize],
    instance: &Instance,
    rng: &mut R,
) -> ReinsertionPlan {
    let positions = first_stage_positions(first_stage);
    mutate_gene_with(plan, gene, scenario, &positions, instance, rng)
}

fn mutate_gene_with<R: Rng + ?Sized>(
    plan: &ReinsertionPlan,
    gene: usize,
    scenario: &Scenario,
    positions: &[usize],
    instance: &Instance,
    rng: &mut R,
) -> ReinsertionPlan {
    let mut d = plan.decisions.clone();
    d[gene] = match d[gene] {
        Decision::Skip => match sample_target(instance, positions, scenario, &d, gene, None, rng) {
            Some(t) => Decision::InsertAt(t),
            None => Decision::Skip,
        },
        Decision::InsertAt(_) => Decision::Skip,
    };
    enhance_with(&ReinsertionPlan::new(d), scenario, positions, instance, None, rng)
}

/// With probability `mutation_prob`, flips one random gene of one random
/// scenario that has failed vehicles. Returns whether a gene was picked.
pub fn mutate_second_stage<R: Rng + ?Sized>(
    solution: &mut Solution,
    sample: &ScenarioSample,
    instance: &Instance,
    mutation_prob: f64,
    rng: &mut R,
) -> bool {
    if mutation_prob <= 0.0 || !rng.random_bool(mutation_prob.min(1.0)) {
        return false;
    }
    let with_genes: Vec<usize> = (0..sample.len())
        .filter(|&w| !sample.scenarios[w].failed().is_empty())
        .collect();
    if with_genes.is_empty() {
        return false;
    }
    let w = with_genes[rng.random_range(0..with_genes.len())];
    let sc = &sample.scenarios[w];
    let gene = rng.random_range(0..sc.failed().len());
    let positions = solution.positions();
    solution.plans[w] = mutate_gene_with(&solution.plans[w], gene, sc, &positions, instance, rng);
    true
}

/// Feasible beats infeasible, lower violation degree beats higher, and
/// otherwise Pareto dominance decides.
pub fn constrained_dominates(a: &Solution, b: &Solution) -> bool {
    constrained_dominates_points((&a.objectives, a.violation_degree), (&b.objectives, b.violation_degree))
}

pub fn constrained_dominates_points(a: (&ObjectivePoint, usize), b: (&ObjectivePoint, usize)) -> bool {
    match a.1.cmp(&b.1) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.0.dominates(b.0),
    }
}

/// Partitions `0..items.len()` into fronts under `dominates`; front 0 holds
/// the elements nobody dominates. Indices within a front are increasing.
pub fn fast_nondominated_sort_by<T>(items: &[T], dominates: impl Fn(&T, &T) -> bool) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&items[i], &items[j]) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates(&items[j], &items[i]) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

pub fn fast_nondominated_sort(population: &[Solution]) -> Vec<Vec<usize>> {
    fast_nondominated_sort_by(population, constrained_dominates)
}

/// Crowding distance of each point of one front. Boundary points of each
/// objective get infinity; interior points add the gap between their
/// neighbors divided by the objective's range (zero range adds nothing).
pub fn crowding_distance(front: &[ObjectivePoint]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let objectives: [fn(&ObjectivePoint) -> f64; 2] = [|p| p.wo, |p| p.re];
    for f in objectives {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| f(&front[a]).total_cmp(&f(&front[b])).then(a.cmp(&b)));
        let lo = f(&front[idx[0]]);
        let hi = f(&front[idx[n - 1]]);
        dist[idx[0]] = f64::INFINITY;
        dist[idx[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            dist[idx[k]] += (f(&front[idx[k + 1]]) - f(&front[idx[k - 1]])) / range;
        }
    }
    dist
}

/// Picks `size` members of `pool`: whole fronts in rank order, the last one
/// cut by decreasing crowding distance (index order on ties).
fn select(pool: Vec<Solution>, size: usize) -> Vec<Solution> {
    let fronts = fast_nondominated_sort(&pool);
    let mut keep: Vec<usize> = Vec::with_capacity(size);
    for front in fronts {
        if keep.len() + front.len() <= size {
            keep.extend(front);
            continue;
        }
        let pts: Vec<ObjectivePoint> = front.iter().map(|&i| pool[i].objectives).collect();
        let cd = crowding_distance(&pts);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| cd[b].total_cmp(&cd[a]).then(a.cmp(&b)));
        keep.extend(order.into_iter().take(size - keep.len()).map(|k| front[k]));
        break;
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Solution>> = pool.into_iter().map(Some).collect();
    keep.into_iter()
        .map(|i| slots[i].take().expect("indices are unique"))
        .collect()
}

struct Run<'a> {
    ev: Evaluator<'a>,
    config: &'a EaConfig,
    rng: ChaCha8Rng,
    sw: Stopwatch,
    local_search: bool,
    ep: ParetoArchive,
}

impl<'a> Run<'a> {
    /// Evaluates a child (one iteration) and, in the hybrid, improves each of
    /// its second stages.
    fn finish(&mut self, sol: Solution) -> Solution {
        self.sw.tick();
        let mut inc = Incumbent::new(&self.ev, sol);
        if self.local_search {
            for w in 0..self.ev.n_scenarios() {
                let mut child = self.sw.child(self.config.tau_s);
                second_stage_pass(&self.ev, &mut inc, w, &mut child, &mut self.rng);
                self.sw.absorb(&child);
            }
        }
        inc.sol
    }

    fn initial(&mut self) -> Vec<Solution> {
        let instance = self.ev.instance();
        let sample = self.ev.sample();
        let p = self.config.population;
        let mut firsts: Vec<Vec<usize>> = Vec::with_capacity(p);
        firsts.push(greedy::utilization_greedy(instance));
        for _ in 1..p {
            firsts.push(greedy::naive_greedy(instance, &mut self.rng));
        }
        if self.local_search {
            let share = self.config.budget.fraction(self.config.one_scenario_share / p as f64);
            let weights = OperatorWeights::default();
            for fs in &mut firsts {
                let mut child = self.sw.child(share);
                *fs = one_scenario_pass(instance, fs, &mut child, &weights, &mut self.rng);
                self.sw.absorb(&child);
            }
        }
        let mut pop = Vec::with_capacity(p);
        for (k, fs) in firsts.into_iter().enumerate() {
            // first individual skips everything it may, second reinserts
            // everything, the rest are random
            let insert_prob = match k {
                0 => 0.0,
                1 => 1.0,
                _ => self.rng.random::<f64>(),
            };
            let positions = first_stage_positions(&fs);
            let plans = sample
                .scenarios
                .iter()
                .map(|sc| random_plan(instance, sc, &positions, insert_prob, None, &mut self.rng))
                .collect();
            let sol = self.finish(Solution::new(fs, plans));
            pop.push(sol);
        }
        pop
    }

    fn child(&mut self, pop: &[Solution]) -> Solution {
        let instance = self.ev.instance();
        let sample = self.ev.sample();
        let p = pop.len();
        let a = self.rng.random_range(0..p);
        let b = (a + self.rng.random_range(1..p)) % p;
        let (pa, pb) = (&pop[a], &pop[b]);
        let n = instance.horizon();
        let mut fs = if n >= 2 {
            let cut = self.rng.random_range(1..n);
            pmx_single_point(&pa.first_stage, &pb.first_stage, cut).expect("parents are permutations")
        } else {
            pa.first_stage.clone()
        };
        if self.rng.random_bool(self.config.mutation_prob) {
            mutate_first_stage(&mut fs, &mut self.rng);
        }
        let positions = first_stage_positions(&fs);
        let plans = sample
            .scenarios
            .iter()
            .enumerate()
            .map(|(w, sc)| crossover_with(&pa.plans[w], &pb.plans[w], sc, &positions, instance, &mut self.rng))
            .collect();
        let mut sol = Solution::new(fs, plans);
        mutate_second_stage(&mut sol, sample, instance, self.config.mutation_prob, &mut self.rng);
        self.finish(sol)
    }
}

fn run(instance: &Instance, sample: &ScenarioSample, config: &EaConfig, local_search: bool) -> Result<ParetoArchive> {
    config.validate()?;
    let mut run = Run {
        ev: Evaluator::new(instance, sample),
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        sw: Stopwatch::new(config.budget),
        local_search,
        ep: ParetoArchive::new(),
    };
    let mut pop = run.initial();
    update_external_population(&mut run.ep, &pop);
    while !run.sw.exhausted() {
        let mut children = Vec::with_capacity(pop.len());
        while children.len() < pop.len() && !run.sw.exhausted() {
            children.push(run.child(&pop));
        }
        update_external_population(&mut run.ep, &children);
        pop.extend(children);
        pop = select(pop, config.population);
    }
    if local_search {
        return Ok(run.ep);
    }
    let mut front = ParetoArchive::new();
    for i in &fast_nondominated_sort(&pop)[0] {
        front.insert(&pop[*i]);
    }
    Ok(front)
}

/// NSGA-II; returns the feasible members of the final first front.
pub fn nsga2(instance: &Instance, sample: &ScenarioSample, config: &EaConfig) -> Result<ParetoArchive> {
    run(instance, sample, config, false)
}

/// NSGA-II with one-scenario improvement of the initial first stages,
/// second-stage improvement of every child, and an external population of
/// all non-dominated feasible solutions seen.
pub fn ls_nsga2(instance: &Instance, sample: &ScenarioSample, config: &EaConfig) -> Result<ParetoArchive> {
    run(instance, sample, config, true)
}

/// Runs NSGA-II and returns the final population (for invariant checks).
#[doc(hidden)]
pub fn nsga2_population_trace(
    instance: &Instance,
    sample: &ScenarioSample,
    config: &EaConfig,
) -> Result<Vec<Vec<Solution>>> {
    config.validate()?;
    let mut run = Run {
        ev: Evaluator::new(instance, sample),
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        sw: Stopwatch::new(config.budget),
        local_search: false,
        ep: ParetoArchive::new(),
    };
    let mut pop = run.initial();
    let mut trace = vec![pop.clone()];
    while !run.sw.exhausted() {
        let mut children = Vec::with_capacity(pop.len());
        while children.len() < pop.len() && !run.sw.exhausted() {
            children.push(run.child(&pop));
        }
        pop.extend(children);
        pop = select(pop, config.population);
        trace.push(pop.clone());
    }
    Ok(trace)
}
