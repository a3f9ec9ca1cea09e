//! One entry point for every solution method.

use std::fmt;
use std::str::FromStr;

use crate::archive::ParetoArchive;
use crate::error::{Error, Result};
use crate::evolutionary::{ls_nsga2, nsga2, EaConfig};
use crate::instances::ScenarioSample;
use crate::model::Instance;
use crate::search::{stmls, Budget, StmlsConfig};
use crate::simulator::{baseline_first_stage, Baseline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Stmls,
    Nsga2,
    LsNsga2,
    /// First stage for the failure-free problem, evaluated without failures.
    OneScenario,
    /// First stage for the sampled failures with reinsertion disabled.
    Ff,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Stmls,
        Algorithm::Nsga2,
        Algorithm::LsNsga2,
        Algorithm::OneScenario,
        Algorithm::Ff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Stmls => "stmls",
            Algorithm::Nsga2 => "nsga2",
            Algorithm::LsNsga2 => "lsnsga2",
            Algorithm::OneScenario => "onescenario",
            Algorithm::Ff => "ff",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Runs `algorithm` with its default settings. The one-scenario baseline is
/// evaluated on the failure-free scenario, everything else on `sample`.
pub fn run_algorithm(
    algorithm: Algorithm,
    instance: &Instance,
    sample: &ScenarioSample,
    budget: Budget,
    seed: u64,
) -> Result<ParetoArchive> {
    match algorithm {
        Algorithm::Stmls => stmls(instance, sample, &StmlsConfig::with_budget(budget, seed)),
        Algorithm::Nsga2 => nsga2(instance, sample, &EaConfig::nsga2(budget, seed)),
        Algorithm::LsNsga2 => ls_nsga2(instance, sample, &EaConfig::ls_nsga2(budget, seed)),
        Algorithm::OneScenario | Algorithm::Ff => {
            let baseline = if algorithm == Algorithm::Ff {
                Baseline::FailuresOnly
            } else {
                Baseline::OneScenario
            };
            let sol = baseline_first_stage(baseline, instance, sample, budget, seed)?;
            let mut archive = ParetoArchive::new();
            archive.insert(&sol);
            Ok(archive)
        }
    }
}
