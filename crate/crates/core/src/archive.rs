//! External population of mutually non-dominated feasible solutions, and the
//! text encoding of solutions used by archive files.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Decision, Instance, ObjectivePoint, ReinsertionPlan, Scenario, Solution};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    members: Vec<Solution>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn points(&self) -> Vec<ObjectivePoint> {
        self.members.iter().map(|s| s.objectives).collect()
    }

    /// Offers one evaluated solution. Infeasible solutions and solutions
    /// weakly dominated by a member (equal objectives included) are refused;
    /// members dominated by an accepted solution are dropped.
    pub fn insert(&mut self, candidate: &Solution) -> bool {
        if !candidate.is_feasible() {
            return false;
        }
        let p = candidate.objectives;
        if self.members.iter().any(|m| m.objectives.weakly_dominates(&p)) {
            return false;
        }
        self.members.retain(|m| !p.dominates(&m.objectives));
        self.members.push(candidate.clone());
        true
    }

    /// Members ordered by increasing work overload.
    pub fn into_sorted(mut self) -> Vec<Solution> {
        self.members.sort_by(|a, b| {
            a.objectives
                .wo
                .total_cmp(&b.objectives.wo)
                .then(a.objectives.re.total_cmp(&b.objectives.re))
        });
        self.members
    }
}

/// Adds every feasible, non-dominated candidate to `ep`. Returns how many
/// were accepted.
pub fn update_external_population<'a>(
    ep: &mut ParetoArchive,
    candidates: impl IntoIterator<Item = &'a Solution>,
) -> usize {
    candidates.into_iter().filter(|c| ep.insert(c)).count()
}

/// Space-separated vehicle ids in sequence order.
pub fn encode_first_stage(instance: &Instance, first_stage: &[usize]) -> String {
    first_stage
        .iter()
        .map(|&v| instance.vehicles[v].id.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn decode_first_stage(instance: &Instance, text: &str) -> Result<Vec<usize>> {
    let index: HashMap<usize, usize> = instance.vehicles.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
    let mut seen = vec![false; instance.horizon()];
    let mut out = Vec::with_capacity(instance.horizon());
    for tok in text.split_whitespace() {
        let id: usize = tok
            .parse()
            .map_err(|_| Error::Config(format!("bad vehicle id `{tok}` in first stage")))?;
        let v = *index
            .get(&id)
            .ok_or_else(|| Error::Config(format!("unknown vehicle id {id} in first stage")))?;
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::Config(format!("vehicle {id} repeated in first stage")));
        }
        out.push(v);
    }
    if out.len() != instance.horizon() {
        return Err(Error::Config(format!(
            "first stage lists {} of {} vehicles",
            out.len(),
            instance.horizon()
        )));
    }
    Ok(out)
}

/// Scenarios separated by `|`, genes as `id:pos` (`pos` 0 for skip).
pub fn encode_plans(instance: &Instance, scenarios: &[Scenario], plans: &[ReinsertionPlan]) -> String {
    scenarios
        .iter()
        .zip(plans)
        .map(|(sc, plan)| {
            sc.failed()
                .iter()
                .zip(&plan.decisions)
                .map(|(&u, d)| format!("{}:{}", instance.unit_id(u), d.gene_value()))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("|")
}

pub fn decode_plans(instance: &Instance, scenarios: &[Scenario], text: &str) -> Result<Vec<ReinsertionPlan>> {
    let parts: Vec<&str> = if scenarios.is_empty() && text.is_empty() {
        Vec::new()
    } else {
        text.split('|').collect()
    };
    if parts.len() != scenarios.len() {
        return Err(Error::Config(format!(
            "{} plans for {} scenarios",
            parts.len(),
            scenarios.len()
        )));
    }
    scenarios
        .iter()
        .zip(parts)
        .map(|(sc, part)| {
            let genes: Vec<&str> = part.split_whitespace().collect();
            if genes.len() != sc.failed().len() {
                return Err(Error::Config(format!(
                    "plan has {} genes for {} failed vehicles",
                    genes.len(),
                    sc.failed().len()
                )));
            }
            let mut decisions = Vec::with_capacity(genes.len());
            for (&u, gene) in sc.failed().iter().zip(genes) {
                let (id, pos) = gene
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("gene `{gene}` is not id:pos")))?;
                let parsed = (id.parse::<usize>(), pos.parse::<usize>());
                let (Ok(id), Ok(pos)) = parsed else {
                    return Err(Error::Config(format!("gene `{gene}` is not id:pos")));
                };
                if id != instance.unit_id(u) {
                    return Err(Error::Config(format!(
                        "gene for vehicle {id} where vehicle {} failed",
                        instance.unit_id(u)
                    )));
                }
                decisions.push(Decision::from_gene_value(pos));
            }
            Ok(ReinsertionPlan::new(decisions))
        })
        .collect()
}
