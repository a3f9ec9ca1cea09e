//! Mixed-model sequencing with stochastic vehicle failures and integrated
//! reinsertion.
//!
//! A first-stage launch sequence is fixed before failures are known; for each
//! sampled failure scenario a second-stage plan decides which failed vehicles
//! return to the line and where. Two objectives are minimized: the mean work
//! overload over the sample and the mean penalty of vehicles left for a later
//! horizon.

pub mod archive;
pub mod error;
pub mod evaluator;
pub mod evolutionary;
pub mod feasibility;
pub mod instances;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod search;
pub mod simulator;
pub mod solve;
pub mod tu;

pub use archive::{update_external_population, ParetoArchive};
pub use error::{Error, Result};
pub use evaluator::{build_final_sequence, evaluate, station_overload, Evaluator};
pub use evolutionary::{ls_nsga2, nsga2, Chromosome, EaConfig};
pub use feasibility::{check_plan, enhance, violation_degree, FeasibilityReport};
pub use instances::{generate_instance, sample_scenarios, GeneratorConfig, ScenarioSample};
pub use metrics::{css, eaf_surface, heuristic_ideal, mid, nns, normalize, sns, NormalizationBounds};
pub use model::{
    Decision, FinalSequence, Instance, ObjectivePoint, OldFailedVehicle, ReinsertionPlan, RiskClass, Scenario,
    Solution, Station, Vehicle,
};
pub use oracle::{enumerate_pareto, reference_overload, OracleFront};
pub use search::{stmls, Budget, StmlsConfig};
pub use simulator::{run_simulation_suite, simulate_dynamic, SimConfig, SimEntry, SimOutcome, SimRow};
pub use solve::{run_algorithm, Algorithm};
pub use tu::Tu;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/feasibility.md")]
    mod feasibility {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/evolutionary.md")]
    mod evolutionary {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
