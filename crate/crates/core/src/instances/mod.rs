//! Industry-inspired instance generation, failure-scenario sampling and the
//! text file formats.

mod io;

pub use io::{format_instance, format_sample};
pub use io::{load_instance, load_sample, parse_instance, parse_sample, write_instance, write_sample};

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Triangular};

use crate::error::{Error, Result};
use crate::model::{Instance, OldFailedVehicle, RiskClass, Scenario, Station, Vehicle};
use crate::tu::Tu;

/// Processing time (min, mean, max) per station of the reference line.
pub const PROCESSING_TABLE: [(f64, f64, f64); 5] = [
    (42.6, 94.1, 117.2),
    (7.9, 84.3, 197.9),
    (57.8, 96.2, 113.3),
    (26.9, 96.9, 109.7),
    (57.8, 96.2, 114.3),
];

/// Share of the station-1 range, from the bottom, that non-EVs draw from.
const NON_EV_SPAN: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_vehicles: usize,
    pub n_stations: usize,
    pub cycle: Tu,
    pub station_length: Tu,
    /// Length of station 1, the battery loading station.
    pub battery_length: Tu,
    pub ev_ratio_range: (f64, f64),
    pub highrisk_ratio_range: (f64, f64),
    pub highrisk_prob_range: (f64, f64),
    pub lowrisk_prob_range: (f64, f64),
    pub fmax_fraction: f64,
    /// Overrides `floor(fmax_fraction * n_vehicles)`.
    pub fmax: Option<usize>,
    pub lambda: usize,
    pub lead_time: u32,
    /// Ready offsets of current vehicles; default `[10, |V|-10]`.
    pub ready_new_range: Option<(usize, usize)>,
    /// Ready offsets of old vehicles; default `[0, |V|-10]`.
    pub ready_old_range: Option<(usize, usize)>,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_vehicles: 200,
            n_stations: 5,
            cycle: Tu::from_tenths(970),
            station_length: Tu::from_tenths(1200),
            battery_length: Tu::from_tenths(2400),
            ev_ratio_range: (0.25, 0.33),
            highrisk_ratio_range: (0.03, 0.05),
            highrisk_prob_range: (0.2, 0.35),
            lowrisk_prob_range: (0.0, 0.01),
            fmax_fraction: 0.05,
            fmax: None,
            lambda: 10,
            lead_time: 9,
            ready_new_range: None,
            ready_old_range: None,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn new(n_vehicles: usize, seed: u64) -> Self {
        GeneratorConfig {
            n_vehicles,
            seed,
            ..Default::default()
        }
    }

    pub fn f_max(&self) -> usize {
        self.fmax
            .unwrap_or_else(|| (self.fmax_fraction * self.n_vehicles as f64 + 1e-9).floor() as usize)
    }

    /// For lines shorter than 20 vehicles the reference ranges are empty, so
    /// they shrink to `[1, |V|/2]` and `[0, |V|/2]`.
    pub fn ready_new(&self) -> (usize, usize) {
        let n = self.n_vehicles;
        self.ready_new_range
            .unwrap_or(if n >= 20 { (10, n - 10) } else { (1, (n / 2).max(1)) })
    }

    pub fn ready_old(&self) -> (usize, usize) {
        let n = self.n_vehicles;
        self.ready_old_range
            .unwrap_or(if n >= 20 { (0, n - 10) } else { (0, n / 2) })
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let prob_range = |name: &str, r: (f64, f64), errs: &mut Vec<String>| {
            if !(0.0 <= r.0 && r.0 <= r.1 && r.1 <= 1.0) {
                errs.push(format!("{name} must satisfy 0 <= lo <= hi <= 1, got {r:?}"));
            }
        };
        if self.n_vehicles == 0 {
            errs.push("n_vehicles must be positive".to_string());
        }
        if self.n_stations == 0 {
            errs.push("n_stations must be positive".to_string());
        }
        if self.cycle <= Tu::ZERO {
            errs.push("cycle must be positive".to_string());
        }
        if self.station_length < self.cycle || self.battery_length < self.cycle {
            errs.push("station lengths must be at least the cycle time".to_string());
        }
        prob_range("ev_ratio_range", self.ev_ratio_range, &mut errs);
        prob_range("highrisk_ratio_range", self.highrisk_ratio_range, &mut errs);
        prob_range("highrisk_prob_range", self.highrisk_prob_range, &mut errs);
        prob_range("lowrisk_prob_range", self.lowrisk_prob_range, &mut errs);
        if !(self.fmax_fraction >= 0.0) {
            errs.push("fmax_fraction must be non-negative".to_string());
        }
        if self.lambda == 0 {
            errs.push("lambda must be at least 1".to_string());
        }
        if self.lead_time == 0 {
            errs.push("lead time must be at least 1 day".to_string());
        }
        for (name, r) in [
            ("ready_new_range", self.ready_new()),
            ("ready_old_range", self.ready_old()),
        ] {
            if r.0 > r.1 {
                errs.push(format!("{name} is empty: {r:?}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn round_to(x: f64, digits: i32) -> f64 {
    let m = 10f64.powi(digits);
    (x * m).round() / m
}

/// Triangular law with the given bounds whose mode reproduces `mean` when
/// possible and is clamped into `[min, max]` otherwise.
fn table_distribution((min, mean, max): (f64, f64, f64)) -> Triangular<f64> {
    let mode = (3.0 * mean - min - max).clamp(min, max);
    Triangular::new(min, max, mode).expect("table rows are ordered")
}

fn draw_times<R: Rng + ?Sized>(cfg: &GeneratorConfig, is_ev: bool, rng: &mut R) -> Vec<Tu> {
    (0..cfg.n_stations)
        .map(|k| {
            let row = PROCESSING_TABLE[k % PROCESSING_TABLE.len()];
            let (min, _, max) = row;
            let x = if k == 0 {
                let span = max - min;
                if is_ev {
                    rng.random_range(min + span * 2.0 / 3.0..=max)
                } else {
                    let top = min + span * NON_EV_SPAN;
                    Triangular::new(min, top, top).expect("ordered").sample(rng)
                }
            } else {
                table_distribution(row).sample(rng)
            };
            Tu::from_f64(x.clamp(min, max))
        })
        .collect()
}

/// Generates an instance; a pure function of the configuration (seed included).
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_vehicles;

    let stations = (0..cfg.n_stations)
        .map(|k| Station {
            id: k + 1,
            length: if k == 0 { cfg.battery_length } else { cfg.station_length },
        })
        .collect();

    let n_ev = (uniform(&mut rng, cfg.ev_ratio_range) * n as f64).round() as usize;
    let mut is_ev = vec![false; n];
    for i in sample_indices(&mut rng, n, n_ev.min(n)) {
        is_ev[i] = true;
    }
    let n_high = (uniform(&mut rng, cfg.highrisk_ratio_range) * n as f64).round() as usize;
    let mut high = vec![false; n];
    for i in sample_indices(&mut rng, n, n_high.min(n)) {
        high[i] = true;
    }

    let ready_new = cfg.ready_new();
    let vehicles = (0..n)
        .map(|i| {
            let processing = draw_times(cfg, is_ev[i], &mut rng);
            let (risk, range) = if high[i] {
                (RiskClass::High, cfg.highrisk_prob_range)
            } else {
                (RiskClass::Low, cfg.lowrisk_prob_range)
            };
            let failure_prob = round_to(uniform(&mut rng, range), 4);
            let ready_offset = rng.random_range(ready_new.0..=ready_new.1);
            Vehicle {
                id: i + 1,
                processing,
                failure_prob,
                risk,
                ready_offset,
                is_ev: is_ev[i],
            }
        })
        .collect();

    let ready_old = cfg.ready_old();
    let ev_share = uniform(&mut rng, cfg.ev_ratio_range);
    let old_pool = (0..cfg.f_max())
        .map(|j| {
            let ev = rng.random_bool(ev_share);
            let processing = draw_times(cfg, ev, &mut rng);
            let wait_days = rng.random_range(1..=cfg.lead_time);
            let slack_days = rng.random_range(wait_days..=cfg.lead_time);
            let ready_offset = rng.random_range(ready_old.0..=ready_old.1);
            OldFailedVehicle {
                id: n + j + 1,
                processing,
                ready_offset,
                wait_days,
                slack_days,
            }
        })
        .collect();

    Ok(Instance {
        stations,
        vehicles,
        cycle: cfg.cycle,
        f_max: cfg.f_max(),
        lambda: cfg.lambda,
        lead_time: cfg.lead_time,
        old_pool,
    })
}

/// `N` i.i.d. failure realizations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioSample {
    pub scenarios: Vec<Scenario>,
    pub seed: u64,
}

impl ScenarioSample {
    pub fn new(scenarios: Vec<Scenario>, seed: u64) -> Self {
        ScenarioSample { scenarios, seed }
    }

    /// The one-scenario problem: nothing fails, no old vehicles.
    pub fn nominal(instance: &Instance) -> Self {
        ScenarioSample::new(vec![Scenario::nominal(instance.horizon())], 0)
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn max_failed(&self) -> usize {
        self.scenarios.iter().map(|s| s.failed().len()).max().unwrap_or(0)
    }
}

/// Draws `n` scenarios. High-risk vehicles fail independently with their
/// probability, low-risk vehicles never fail, and `|F_old|` is uniform on
/// `0..=f_max` with members drawn without replacement from the pool.
pub fn sample_scenarios(instance: &Instance, n: usize, seed: u64) -> Result<ScenarioSample> {
    if n == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = instance.old_pool.len();
    let scenarios = (0..n)
        .map(|_| {
            let exists = instance
                .vehicles
                .iter()
                .map(|v| v.risk == RiskClass::Low || rng.random::<f64>() >= v.failure_prob)
                .collect();
            let count = rng.random_range(0..=instance.f_max.min(pool));
            let old = sample_indices(&mut rng, pool, count).into_vec();
            Scenario::new(exists, old)
        })
        .collect();
    Ok(ScenarioSample::new(scenarios, seed))
}

/// Probability of the failure pattern and old-vehicle count of `scenario`:
/// `1/(f_max+1) * prod_v f_v^(1-e_v) (1-f_v)^e_v`.
pub fn scenario_probability(instance: &Instance, scenario: &Scenario) -> f64 {
    let mut p = 1.0 / (instance.f_max as f64 + 1.0);
    for (v, &e) in instance.vehicles.iter().zip(&scenario.exists) {
        p *= if e { 1.0 - v.failure_prob } else { v.failure_prob };
    }
    p
}
