//! Convergence traces and the log formats the optimizers print.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub elite_fitness: f64,
}

/// Elite fitness per iteration, starting with iteration 0 (the initial
/// population), plus the seed and an echo of the optimizer settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub seed: u64,
    pub config: serde_json::Value,
    pub entries: Vec<TraceEntry>,
}

impl ConvergenceTrace {
    pub fn new(seed: u64, config: serde_json::Value) -> Self {
        Self {
            seed,
            config,
            entries: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, iteration: usize, elite_fitness: f64) {
        debug_assert!(self.entries.last().is_none_or(|e| e.iteration < iteration));
        self.entries.push(TraceEntry {
            iteration,
            elite_fitness,
        });
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    /// True when the elite never got worse and iterations strictly increase.
    pub fn is_non_increasing(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[0].iteration < w[1].iteration && !(w[1].elite_fitness > w[0].elite_fitness))
    }

    /// `At iteration {i}\tthe elite fitness is {g}` every `every` iterations.
    pub fn elite_log_lines(&self, every: usize) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.iteration > 0 && e.iteration % every.max(1) == 0)
            .map(|e| {
                format!(
                    "At iteration {}\tthe elite fitness is {}",
                    e.iteration, e.elite_fitness
                )
            })
            .collect()
    }

    /// `Iteration# {i}\t{g}` for every iteration after the initial one.
    pub fn iteration_log_lines(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.iteration > 0)
            .map(|e| format!("Iteration# {}\t{}", e.iteration, e.elite_fitness))
            .collect()
    }
}

/// Result of one optimizer run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub best_vector: Vec<f64>,
    pub best_fitness: f64,
    pub trace: ConvergenceTrace,
    /// Candidates discarded because the objective returned a non-finite value.
    pub rejected: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_formats() {
        let mut t = ConvergenceTrace::new(1, serde_json::Value::Null);
        t.record(0, 2000.0);
        for i in 1..=100 {
            t.record(i, if i < 50 { 1500.0 } else { 1058.4005 });
        }
        assert_eq!(
            t.elite_log_lines(50),
            vec![
                "At iteration 50\tthe elite fitness is 1058.4005",
                "At iteration 100\tthe elite fitness is 1058.4005"
            ]
        );
        assert_eq!(t.iteration_log_lines()[0], "Iteration# 1\t1500");
        assert_eq!(t.iteration_log_lines().len(), 100);
        assert!(t.is_non_increasing());
        t.record(101, 2000.0);
        assert!(!t.is_non_increasing());
    }
}
