//! `mmsr`: generate instances, solve them, score archives and simulate
//! dynamic reinsertion.

mod archive_file;
mod fmt;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use mmsr::instances::{load_instance, write_instance};
use mmsr::metrics::{css, dedup_points, eaf_surface, heuristic_ideal, mid, nns, sns, NormalizationBounds};
use mmsr::simulator::{run_simulation_suite, SimConfig, SimEntry};
use mmsr::{
    generate_instance, run_algorithm, sample_scenarios, Algorithm, Budget, GeneratorConfig, ScenarioSample, Tu,
};

use archive_file::{read_archive, write_archive, ArchiveRow};
use fmt::sig6;

#[derive(Parser)]
#[command(
    name = "mmsr",
    version,
    about = "Mixed-model sequencing with failures and reinsertion"
)]
struct Cli {
    /// Worker threads for independent runs.
    #[arg(long, global = true, env = "MMSR_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Generate(GenerateArgs),
    /// Solve an instance and write the non-dominated archive.
    Solve(SolveArgs),
    /// Compare archives: NNS/MID/SNS, pairwise coverage and attainment surfaces.
    Metrics(MetricsArgs),
    /// Replay archived first stages under dynamic reinsertion.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    vehicles: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    stations: usize,
    /// Cycle time in TU.
    #[arg(long, default_value_t = 97.0)]
    cycle: f64,
    /// Length of stations 2 and up in TU.
    #[arg(long, default_value_t = 120.0)]
    length: f64,
    #[arg(long, default_value_t = 10)]
    lambda: usize,
    /// Maximum skips per scenario; defaults to 5% of the vehicles.
    #[arg(long)]
    fmax: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// stmls, nsga2, lsnsga2, onescenario or ff.
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = 100)]
    sample_n: usize,
    /// `<n>it` or `<x>s`.
    #[arg(long, default_value = "600s")]
    budget: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent runs with seeds `seed, seed+1, ...`; with more than one,
    /// run k is written next to `--out` as `<stem>.run<k>.csv`.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    archives: String,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated attainment levels in (0, 1].
    #[arg(long, default_value = "0.5")]
    eaf_levels: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    archives: String,
    #[arg(long, default_value_t = 50)]
    test_n: usize,
    /// Comma-separated overload thresholds in TU.
    #[arg(long, default_value = "0,3,5,10,15,30")]
    thresholds: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Io(String),
}

impl From<mmsr::Error> for CliError {
    fn from(e: mmsr::Error) -> Self {
        match e {
            mmsr::Error::Io(_) | mmsr::Error::Parse { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        // a second initialization only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let res = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Metrics(a) => metrics(a),
        Command::Simulate(a) => simulate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let cfg = GeneratorConfig {
        n_stations: a.stations,
        cycle: Tu::from_f64(a.cycle),
        station_length: Tu::from_f64(a.length),
        lambda: a.lambda,
        fmax: a.fmax,
        ..GeneratorConfig::new(a.vehicles, a.seed)
    };
    let instance = generate_instance(&cfg)?;
    write_instance(&instance, &a.out)?;
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn solve(a: SolveArgs) -> CliResult<()> {
    let algo: Algorithm = a.algo.parse()?;
    let budget: Budget = a.budget.parse()?;
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let instance = load_instance(&a.instance)?;
    let sample = sample_scenarios(&instance, a.sample_n, a.seed)?;
    let nominal = ScenarioSample::nominal(&instance);
    let eval_sample = if algo == Algorithm::OneScenario {
        &nominal
    } else {
        &sample
    };
    let name = stem(&a.instance);
    let results: Vec<CliResult<(usize, Vec<ArchiveRow>)>> = (0..a.runs)
        .into_par_iter()
        .map(|run| {
            let archive = run_algorithm(algo, &instance, &sample, budget, a.seed + run as u64)?;
            let rows = ArchiveRow::from_archive(&name, algo.name(), run, archive, &instance, eval_sample);
            Ok((run, rows))
        })
        .collect();
    for r in results {
        let (run, rows) = r?;
        let path = if a.runs == 1 {
            a.out.clone()
        } else {
            a.out.with_file_name(format!("{}.run{run}.csv", stem(&a.out)))
        };
        write_archive(&path, &rows)?;
    }
    Ok(())
}

fn expand(pattern: &str) -> CliResult<Vec<PathBuf>> {
    let paths = glob::glob(pattern).map_err(|e| CliError::Usage(format!("bad glob `{pattern}`: {e}")))?;
    let mut out = Vec::new();
    for p in paths {
        out.push(p.map_err(|e| CliError::Io(e.to_string()))?);
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::Usage(format!("no archive matches `{pattern}`")));
    }
    Ok(out)
}

fn parse_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad {what} `{s}`")))
        })
        .collect()
}

struct Loaded {
    instance: String,
    algorithm: String,
    run: usize,
    points: Vec<mmsr::ObjectivePoint>,
}

fn metrics(a: MetricsArgs) -> CliResult<()> {
    let levels = parse_list(&a.eaf_levels, "attainment level")?;
    let mut loaded = Vec::new();
    for path in expand(&a.archives)? {
        let rows = read_archive(&path)?;
        let Some(first) = rows.first() else {
            return Err(CliError::Io(format!("{} holds no solutions", path.display())));
        };
        loaded.push(Loaded {
            instance: first.instance.clone(),
            algorithm: first.algorithm.clone(),
            run: first.run,
            points: rows.iter().map(|r| r.point()).collect(),
        });
    }
    fs::create_dir_all(&a.out)?;
    let mut by_instance: BTreeMap<&str, Vec<&Loaded>> = BTreeMap::new();
    for l in &loaded {
        by_instance.entry(&l.instance).or_default().push(l);
    }

    let mut summary = csv::Writer::from_path(a.out.join("metrics.csv"))?;
    summary.write_record(["instance", "algorithm", "run", "nns", "mid", "sns"])?;
    let mut cover = csv::Writer::from_path(a.out.join("css.csv"))?;
    cover.write_record(["instance", "x_algorithm", "x_run", "y_algorithm", "y_run", "css"])?;
    let mut eaf = csv::Writer::from_path(a.out.join("eaf.csv"))?;
    eaf.write_record(["instance", "algorithm", "level", "x", "y"])?;

    for (inst, group) in &by_instance {
        let fronts: Vec<&[mmsr::ObjectivePoint]> = group.iter().map(|l| l.points.as_slice()).collect();
        let bounds = NormalizationBounds::from_fronts(fronts.iter().copied()).expect("archives are non-empty");
        let ideal = bounds.apply(&heuristic_ideal(fronts.iter().copied()).expect("archives are non-empty"));
        let normalized: Vec<Vec<mmsr::ObjectivePoint>> = group
            .iter()
            .map(|l| dedup_points(&mmsr::normalize(&l.points, &bounds)))
            .collect();
        for (l, pts) in group.iter().zip(&normalized) {
            summary.write_record([
                inst.to_string(),
                l.algorithm.clone(),
                l.run.to_string(),
                nns(&l.points).to_string(),
                sig6(mid(pts, &ideal)?),
                sig6(sns(pts, &ideal)?),
            ])?;
        }
        for (lx, px) in group.iter().zip(&normalized) {
            for (ly, py) in group.iter().zip(&normalized) {
                cover.write_record([
                    inst.to_string(),
                    lx.algorithm.clone(),
                    lx.run.to_string(),
                    ly.algorithm.clone(),
                    ly.run.to_string(),
                    sig6(css(px, py)?),
                ])?;
            }
        }
        let mut by_algo: BTreeMap<&str, Vec<Vec<mmsr::ObjectivePoint>>> = BTreeMap::new();
        for l in group {
            by_algo.entry(&l.algorithm).or_default().push(l.points.clone());
        }
        for (algo, runs) in by_algo {
            for &level in &levels {
                for p in eaf_surface(&runs, level)? {
                    eaf.write_record([inst.to_string(), algo.to_string(), sig6(level), sig6(p.wo), sig6(p.re)])?;
                }
            }
        }
    }
    summary.flush()?;
    cover.flush()?;
    eaf.flush()?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let thresholds = parse_list(&a.thresholds, "threshold")?;
    let instance = load_instance(&a.instance)?;
    let mut entries = Vec::new();
    for path in expand(&a.archives)? {
        let rows = read_archive(&path)?;
        let Some(first) = rows.first() else {
            return Err(CliError::Io(format!("{} holds no solutions", path.display())));
        };
        let first_stages = rows
            .iter()
            .map(|r| mmsr::archive::decode_first_stage(&instance, &r.first_stage))
            .collect::<mmsr::Result<Vec<_>>>()
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        entries.push(SimEntry {
            variant: first.algorithm.clone(),
            instance: &instance,
            first_stages,
        });
    }
    let cfg = SimConfig {
        thresholds,
        n_test_scenarios: a.test_n,
        seed: a.seed,
    };
    let rows = run_simulation_suite(&entries, &cfg)?;
    let mut w = csv::Writer::from_path(&a.out)?;
    w.write_record(["variant", "threshold", "mean_obj_wo", "mean_obj_re"])?;
    for r in rows {
        w.write_record([r.variant, sig6(r.threshold), sig6(r.mean_obj_wo), sig6(r.mean_obj_re)])?;
    }
    w.flush()?;
    Ok(())
}
