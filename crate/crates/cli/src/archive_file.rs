//! Archive CSV: one row per non-dominated solution.

use std::path::Path;

use mmsr::archive::{encode_first_stage, encode_plans};
use mmsr::{Instance, ObjectivePoint, ParetoArchive, ScenarioSample};

use crate::fmt::sig6;
use crate::CliError;

pub const HEADER: [&str; 7] = ["instance", "algorithm", "run", "wo", "re", "first_stage", "plans"];

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveRow {
    pub instance: String,
    pub algorithm: String,
    pub run: usize,
    pub wo: f64,
    pub re: f64,
    pub first_stage: String,
    pub plans: String,
}

impl ArchiveRow {
    pub fn from_archive(
        instance_name: &str,
        algorithm: &str,
        run: usize,
        archive: ParetoArchive,
        instance: &Instance,
        sample: &ScenarioSample,
    ) -> Vec<ArchiveRow> {
        archive
            .into_sorted()
            .into_iter()
            .map(|s| ArchiveRow {
                instance: instance_name.to_string(),
                algorithm: algorithm.to_string(),
                run,
                wo: s.objectives.wo,
                re: s.objectives.re,
                first_stage: encode_first_stage(instance, &s.first_stage),
                plans: encode_plans(instance, &sample.scenarios, &s.plans),
            })
            .collect()
    }

    pub fn point(&self) -> ObjectivePoint {
        ObjectivePoint::new(self.wo, self.re)
    }
}

pub fn write_archive(path: &Path, rows: &[ArchiveRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.algorithm.clone(),
            r.run.to_string(),
            sig6(r.wo),
            sig6(r.re),
            r.first_stage.clone(),
            r.plans.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_archive(path: &Path) -> Result<Vec<ArchiveRow>, CliError> {
    let bad = |msg: String| CliError::Io(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(HEADER) {
        return Err(bad("unexpected header".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64, CliError> {
            rec[k]
                .parse()
                .map_err(|_| bad(format!("row {}: bad {}", i + 2, HEADER[k])))
        };
        out.push(ArchiveRow {
            instance: rec[0].to_string(),
            algorithm: rec[1].to_string(),
            run: rec[2].parse().map_err(|_| bad(format!("row {}: bad run", i + 2)))?,
            wo: num(3)?,
            re: num(4)?,
            first_stage: rec[5].to_string(),
            plans: rec[6].to_string(),
        });
    }
    Ok(out)
}
