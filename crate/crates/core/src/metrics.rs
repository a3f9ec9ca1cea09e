//! Quality metrics for approximations of a Pareto front.
//!
//! Fronts are compared after normalizing each instance separately to the
//! unit square. MID and SNS measure the mean and spread of the distances to a
//! heuristic ideal point, which is the best value of each objective seen over
//! all runs of all algorithms on the instance.

use crate::error::{Error, Result};
use crate::model::ObjectivePoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationBounds {
    pub wo: (f64, f64),
    pub re: (f64, f64),
}

impl NormalizationBounds {
    /// Per-objective min and max over the union of `fronts`. None if all are
    /// empty.
    pub fn from_fronts<'a>(fronts: impl IntoIterator<Item = &'a [ObjectivePoint]>) -> Option<Self> {
        let mut it = fronts.into_iter().flatten();
        let first = it.next()?;
        let mut b = NormalizationBounds {
            wo: (first.wo, first.wo),
            re: (first.re, first.re),
        };
        for p in it {
            b.wo = (b.wo.0.min(p.wo), b.wo.1.max(p.wo));
            b.re = (b.re.0.min(p.re), b.re.1.max(p.re));
        }
        Some(b)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if ok(self.wo) && ok(self.re) {
            Ok(())
        } else {
            Err(Error::Metric(format!("invalid normalization bounds {self:?}")))
        }
    }

    pub fn apply(&self, p: &ObjectivePoint) -> ObjectivePoint {
        let scale = |v: f64, (lo, hi): (f64, f64)| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        ObjectivePoint::new(scale(p.wo, self.wo), scale(p.re, self.re))
    }
}

pub fn normalize(points: &[ObjectivePoint], bounds: &NormalizationBounds) -> Vec<ObjectivePoint> {
    points.iter().map(|p| bounds.apply(p)).collect()
}

/// Best value of each objective over all given fronts.
pub fn heuristic_ideal<'a>(fronts: impl IntoIterator<Item = &'a [ObjectivePoint]>) -> Option<ObjectivePoint> {
    NormalizationBounds::from_fronts(fronts).map(|b| ObjectivePoint::new(b.wo.0, b.re.0))
}

/// Fraction of `y` weakly dominated by some point of `x`.
pub fn css(x: &[ObjectivePoint], y: &[ObjectivePoint]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::Metric("coverage of an empty front is undefined".into()));
    }
    let covered = y.iter().filter(|q| x.iter().any(|p| p.weakly_dominates(q))).count();
    Ok(covered as f64 / y.len() as f64)
}

fn distances(front: &[ObjectivePoint], ideal: &ObjectivePoint) -> Vec<f64> {
    front.iter().map(|p| (p.wo - ideal.wo).hypot(p.re - ideal.re)).collect()
}

/// Mean distance to the ideal point.
pub fn mid(front: &[ObjectivePoint], ideal: &ObjectivePoint) -> Result<f64> {
    if front.is_empty() {
        return Err(Error::Metric("mid of an empty front".into()));
    }
    let d = distances(front, ideal);
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// Sample standard deviation of the distances to the ideal point; 0 for a
/// single point.
pub fn sns(front: &[ObjectivePoint], ideal: &ObjectivePoint) -> Result<f64> {
    let m = mid(front, ideal)?;
    let n = front.len();
    if n == 1 {
        return Ok(0.0);
    }
    let ss: f64 = distances(front, ideal).iter().map(|d| (d - m).powi(2)).sum();
    Ok((ss / (n - 1) as f64).sqrt())
}

/// Points with identical objective pairs collapsed, in first-seen order.
pub fn dedup_points(front: &[ObjectivePoint]) -> Vec<ObjectivePoint> {
    let mut out: Vec<ObjectivePoint> = Vec::with_capacity(front.len());
    for p in front {
        if !out.contains(p) {
            out.push(*p);
        }
    }
    out
}

pub fn nns(front: &[ObjectivePoint]) -> usize {
    dedup_points(front).len()
}

/// Corner points of the boundary of the region weakly dominated by at least
/// `ceil(level * runs)` of the runs, ordered by increasing `wo` (and so
/// decreasing `re`). Only observed coordinates are considered.
pub fn eaf_surface(runs: &[Vec<ObjectivePoint>], level: f64) -> Result<Vec<ObjectivePoint>> {
    if runs.is_empty() {
        return Err(Error::Metric("attainment surface needs at least one run".into()));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::Metric(format!("attainment level {level} outside (0, 1]")));
    }
    let r = runs.len();
    // guard against 0.5 * 2 = 1.0000000000000002 style rounding
    let k = ((level * r as f64) - 1e-9).ceil().clamp(1.0, r as f64) as usize;
    let mut xs: Vec<f64> = runs.iter().flatten().map(|p| p.wo).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut out: Vec<ObjectivePoint> = Vec::new();
    for &x in &xs {
        // lowest re each run reaches without exceeding wo = x
        let mut reach: Vec<f64> = runs
            .iter()
            .map(|run| {
                run.iter()
                    .filter(|p| p.wo <= x)
                    .map(|p| p.re)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        reach.sort_by(f64::total_cmp);
        let y = reach[k - 1];
        if y.is_finite() && out.last().is_none_or(|last| y < last.re) {
            out.push(ObjectivePoint::new(x, y));
        }
    }
    Ok(out)
}
