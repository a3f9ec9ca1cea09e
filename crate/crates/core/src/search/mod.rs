//! Local search: transformation operators, tabu rules, greedy constructors,
//! the first- and second-stage improvement procedures, and STMLS.

pub mod greedy;
pub mod improve;
pub mod operators;
pub mod stmls;
pub mod tabu;

use std::time::{Duration, Instant};

pub use greedy::{naive_greedy, utilization_greedy};
pub use improve::{improve_first_stage, improve_one_scenario, improve_second_stage};
pub use operators::{apply_operator, Operator, OperatorWeights};
pub use stmls::{stmls, StmlsConfig};
pub use tabu::{tabu_allows, TabuList};

use crate::error::{Error, Result};

/// Search effort, in wall-clock seconds or in iterations. One iteration is
/// one evaluated neighbor (or one evaluated child in the evolutionary
/// algorithms). Iteration budgets make runs reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Iterations(u64),
    Seconds(f64),
}

impl Budget {
    pub fn is_zero(&self) -> bool {
        match *self {
            Budget::Iterations(n) => n == 0,
            Budget::Seconds(s) => s <= 0.0,
        }
    }

    /// A fraction of this budget, never below one iteration unless zero.
    pub fn fraction(&self, f: f64) -> Budget {
        match *self {
            Budget::Iterations(0) => Budget::Iterations(0),
            Budget::Iterations(n) => Budget::Iterations(((n as f64 * f).round() as u64).max(1)),
            Budget::Seconds(s) => Budget::Seconds(s * f),
        }
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Budget::Iterations(n) => write!(f, "{n}it"),
            Budget::Seconds(s) => write!(f, "{s}s"),
        }
    }
}

impl std::str::FromStr for Budget {
    type Err = Error;

    /// Parses `<n>it` or `<x>s`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("budget `{s}` is not of the form <n>it or <x>s"));
        if let Some(n) = s.strip_suffix("it") {
            n.parse().map(Budget::Iterations).map_err(|_| bad())
        } else if let Some(x) = s.strip_suffix('s') {
            match x.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => Ok(Budget::Seconds(v)),
                _ => Err(bad()),
            }
        } else {
            Err(bad())
        }
    }
}

/// Tracks consumption of a [`Budget`]. Sub-budgets are carved out with
/// [`Stopwatch::child`] and charged back with [`Stopwatch::absorb`].
#[derive(Debug, Clone)]
pub struct Stopwatch {
    max_iters: Option<u64>,
    deadline: Option<Instant>,
    used: u64,
}

impl Stopwatch {
    pub fn new(budget: Budget) -> Self {
        match budget {
            Budget::Iterations(n) => Stopwatch {
                max_iters: Some(n),
                deadline: None,
                used: 0,
            },
            Budget::Seconds(s) => Stopwatch {
                max_iters: None,
                deadline: Some(Instant::now() + Duration::from_secs_f64(s.max(0.0))),
                used: 0,
            },
        }
    }

    /// A stopwatch bounded by both `budget` and what is left of `self`.
    pub fn child(&self, budget: Budget) -> Stopwatch {
        let mut sw = Stopwatch::new(budget);
        if let Some(m) = self.max_iters {
            let left = m.saturating_sub(self.used);
            sw.max_iters = Some(sw.max_iters.map_or(left, |x| x.min(left)));
        }
        if let Some(d) = self.deadline {
            sw.deadline = Some(sw.deadline.map_or(d, |x| x.min(d)));
        }
        sw
    }

    pub fn absorb(&mut self, child: &Stopwatch) {
        self.used += child.used;
    }

    pub fn exhausted(&self) -> bool {
        self.max_iters.is_some_and(|m| self.used >= m) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Consumes one iteration; false once the budget is spent.
    pub fn tick(&mut self) -> bool {
        if self.exhausted() {
            return false;
        }
        self.used += 1;
        true
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_budgets() {
        assert_eq!("2000it".parse::<Budget>().unwrap(), Budget::Iterations(2000));
        assert_eq!("1.5s".parse::<Budget>().unwrap(), Budget::Seconds(1.5));
        assert!("12".parse::<Budget>().is_err());
        assert!("-1s".parse::<Budget>().is_err());
        assert!("xit".parse::<Budget>().is_err());
    }

    #[test]
    fn iteration_accounting() {
        let mut sw = Stopwatch::new(Budget::Iterations(10));
        for _ in 0..4 {
            assert!(sw.tick());
        }
        let mut child = sw.child(Budget::Iterations(100));
        let mut n = 0;
        while child.tick() {
            n += 1;
        }
        assert_eq!(n, 6);
        sw.absorb(&child);
        assert!(sw.exhausted());
        assert!(!sw.tick());
    }

    #[test]
    fn zero_budget() {
        assert!(!Stopwatch::new(Budget::Iterations(0)).tick());
        assert!(Budget::Iterations(0).fraction(0.05).is_zero());
        assert_eq!(Budget::Iterations(100).fraction(0.05), Budget::Iterations(5));
    }
}
