//! Line-oriented text formats for instances (`MMSR v1`) and scenario samples
//! (`SAMPLE v1`). Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::ScenarioSample;
use crate::error::{Error, Result};
use crate::model::{Instance, OldFailedVehicle, RiskClass, Scenario, Station, Vehicle};
use crate::tu::Tu;

pub fn format_instance(instance: &Instance) -> String {
    let mut s = String::new();
    let tus = |p: &[Tu]| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(s, "MMSR v1").unwrap();
    writeln!(s, "cycle {}", instance.cycle).unwrap();
    writeln!(s, "lambda {}", instance.lambda).unwrap();
    writeln!(s, "fmax {}", instance.f_max).unwrap();
    writeln!(s, "leadtime {}", instance.lead_time).unwrap();
    writeln!(s, "stations {}", instance.stations.len()).unwrap();
    for st in &instance.stations {
        writeln!(s, "station {} {}", st.id, st.length).unwrap();
    }
    writeln!(s, "vehicles {}", instance.vehicles.len()).unwrap();
    for v in &instance.vehicles {
        writeln!(
            s,
            "vehicle {} {} {} {} {} {}",
            v.id,
            u8::from(v.is_ev),
            v.risk.as_str(),
            v.failure_prob,
            v.ready_offset,
            tus(&v.processing)
        )
        .unwrap();
    }
    writeln!(s, "oldpool {}", instance.old_pool.len()).unwrap();
    for o in &instance.old_pool {
        writeln!(
            s,
            "old {} {} {} {} {}",
            o.id,
            o.wait_days,
            o.slack_days,
            o.ready_offset,
            tus(&o.processing)
        )
        .unwrap();
    }
    s
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_instance(instance))?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .map(|(i, l)| (i, l.split_whitespace().collect()));
        Lines {
            inner: Box::new(inner),
            last: 0,
        }
    }

    fn next(&mut self, field: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((n, toks)) => {
                self.last = n;
                Ok((n, toks))
            }
            None => Err(perr(self.last + 1, field, "unexpected end of file")),
        }
    }

    fn keyed(&mut self, key: &str, arity: usize) -> Result<(usize, Vec<&'a str>)> {
        let (n, toks) = self.next(key)?;
        if toks[0] != key {
            return Err(perr(n, key, format!("expected `{key}`, found `{}`", toks[0])));
        }
        if toks.len() != arity + 1 {
            return Err(perr(
                n,
                key,
                format!("expected {arity} values, found {}", toks.len() - 1),
            ));
        }
        Ok((n, toks))
    }

    fn finish(&mut self) -> Result<()> {
        match self.inner.next() {
            Some((n, toks)) => Err(perr(n, toks[0], "unexpected trailing content")),
            None => Ok(()),
        }
    }
}

fn perr(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn num<T: FromStr>(tok: &str, line: usize, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    tok.parse::<T>()
        .map_err(|e| perr(line, field, format!("cannot parse `{tok}`: {e}")))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (n, head) = lines.next("header")?;
    if head != ["MMSR", "v1"] {
        return Err(perr(n, "header", "expected `MMSR v1`"));
    }

    let mut header: HashMap<&str, (usize, &str)> = HashMap::new();
    let (k_line, k) = loop {
        let (n, toks) = lines.next("stations")?;
        let key = toks[0];
        if toks.len() != 2 {
            return Err(perr(n, key, "expected exactly one value"));
        }
        match key {
            "stations" => break (n, num::<usize>(toks[1], n, "stations")?),
            "cycle" | "lambda" | "fmax" | "leadtime" => {
                if header.insert(key, (n, toks[1])).is_some() {
                    return Err(perr(n, key, "duplicate field"));
                }
            }
            other => return Err(perr(n, other, "unknown field")),
        }
    };
    let get = |key: &str| {
        header
            .get(key)
            .copied()
            .ok_or_else(|| perr(k_line, key, format!("missing field `{key}`")))
    };
    let (l, v) = get("cycle")?;
    let cycle: Tu = num(v, l, "cycle")?;
    let (l, v) = get("lambda")?;
    let lambda: usize = num(v, l, "lambda")?;
    let (l, v) = get("fmax")?;
    let f_max: usize = num(v, l, "fmax")?;
    let (l, v) = get("leadtime")?;
    let lead_time: u32 = num(v, l, "leadtime")?;

    let mut stations = Vec::with_capacity(k);
    for _ in 0..k {
        let (n, t) = lines.keyed("station", 2)?;
        stations.push(Station {
            id: num(t[1], n, "station id")?,
            length: num(t[2], n, "station length")?,
        });
    }

    let (n, t) = lines.keyed("vehicles", 1)?;
    let nv: usize = num(t[1], n, "vehicles")?;
    let mut vehicles = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, t) = lines.keyed("vehicle", 5 + k)?;
        let is_ev = match t[2] {
            "0" => false,
            "1" => true,
            x => return Err(perr(n, "ev", format!("expected 0 or 1, found `{x}`"))),
        };
        let risk = match t[3] {
            "low" => RiskClass::Low,
            "high" => RiskClass::High,
            x => return Err(perr(n, "risk", format!("expected low or high, found `{x}`"))),
        };
        vehicles.push(Vehicle {
            id: num(t[1], n, "vehicle id")?,
            is_ev,
            risk,
            failure_prob: num(t[4], n, "fprob")?,
            ready_offset: num(t[5], n, "r")?,
            processing: t[6..]
                .iter()
                .map(|x| num(x, n, "processing time"))
                .collect::<Result<_>>()?,
        });
    }

    let (n, t) = lines.keyed("oldpool", 1)?;
    let m: usize = num(t[1], n, "oldpool")?;
    let mut old_pool = Vec::with_capacity(m);
    for _ in 0..m {
        let (n, t) = lines.keyed("old", 4 + k)?;
        old_pool.push(OldFailedVehicle {
            id: num(t[1], n, "old id")?,
            wait_days: num(t[2], n, "g")?,
            slack_days: num(t[3], n, "d")?,
            ready_offset: num(t[4], n, "r")?,
            processing: t[5..]
                .iter()
                .map(|x| num(x, n, "processing time"))
                .collect::<Result<_>>()?,
        });
    }
    lines.finish()?;

    Ok(Instance {
        stations,
        vehicles,
        cycle,
        f_max,
        lambda,
        lead_time,
        old_pool,
    })
}

pub fn format_sample(sample: &ScenarioSample, instance: &Instance) -> String {
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let mut s = String::new();
    writeln!(s, "SAMPLE v1").unwrap();
    writeln!(s, "n {}", sample.scenarios.len()).unwrap();
    writeln!(s, "seed {}", sample.seed).unwrap();
    for (i, sc) in sample.scenarios.iter().enumerate() {
        let fails = join(
            &mut sc
                .exists
                .iter()
                .enumerate()
                .filter(|(_, &e)| !e)
                .map(|(v, _)| instance.vehicles[v].id),
        );
        let old = join(&mut sc.old_present.iter().copied());
        writeln!(s, "scenario {i} fails:{fails} old:{old}").unwrap();
    }
    s
}

pub fn write_sample(sample: &ScenarioSample, instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_sample(sample, instance))?;
    Ok(())
}

pub fn load_sample(path: impl AsRef<Path>, instance: &Instance) -> Result<ScenarioSample> {
    parse_sample(&fs::read_to_string(path)?, instance)
}

fn list(tok: &str, prefix: &str, line: usize) -> Result<Vec<usize>> {
    let field = prefix.trim_end_matches(':');
    let rest = tok
        .strip_prefix(prefix)
        .ok_or_else(|| perr(line, field, format!("expected `{prefix}...`, found `{tok}`")))?;
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    rest.split(',').map(|x| num(x, line, field)).collect()
}

pub fn parse_sample(text: &str, instance: &Instance) -> Result<ScenarioSample> {
    let mut lines = Lines::new(text);
    let (n, head) = lines.next("header")?;
    if head != ["SAMPLE", "v1"] {
        return Err(perr(n, "header", "expected `SAMPLE v1`"));
    }
    let (n, t) = lines.keyed("n", 1)?;
    let count: usize = num(t[1], n, "n")?;
    let (n, t) = lines.keyed("seed", 1)?;
    let seed: u64 = num(t[1], n, "seed")?;

    let index: HashMap<usize, usize> = instance.vehicles.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
    let mut scenarios = Vec::with_capacity(count);
    for i in 0..count {
        let (n, t) = lines.keyed("scenario", 3)?;
        let idx: usize = num(t[1], n, "scenario")?;
        if idx != i {
            return Err(perr(n, "scenario", format!("expected index {i}, found {idx}")));
        }
        let mut exists = vec![true; instance.horizon()];
        for id in list(t[2], "fails:", n)? {
            let v = *index
                .get(&id)
                .ok_or_else(|| perr(n, "fails", format!("unknown vehicle id {id}")))?;
            exists[v] = false;
        }
        let old = list(t[3], "old:", n)?;
        if let Some(j) = old.iter().find(|&&j| j >= instance.old_pool.len()) {
            return Err(perr(n, "old", format!("pool index {j} out of range")));
        }
        scenarios.push(Scenario::new(exists, old));
    }
    lines.finish()?;
    Ok(ScenarioSample::new(scenarios, seed))
}
