//! Run artifacts: the resolved config, the result, its metrics and trace,
//! serialized as JSON.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, RunConfig};
use crate::error::{Error, Result};
use crate::pattern_metrics::LobeReport;
use crate::trace::{ConvergenceTrace, RunOutcome};
use crate::{ahcoa, baselines};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wall-clock data; the only part of an artifact that varies between runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub tool_version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub best_vector: Vec<f64>,
    pub best_fitness: f64,
    pub rejected: usize,
    /// Lobe metrics of the best design, for synthesis runs.
    pub metrics: Option<LobeReport>,
    pub trace: ConvergenceTrace,
    pub timing: Timing,
}

/// Runs the configured optimizer and checks that the stored best fitness
/// matches a fresh evaluation of the best vector exactly.
pub fn execute(config: &RunConfig) -> Result<RunArtifact> {
    let config = config.resolved();
    let (objective, spec) = config.objective()?;
    let start = Instant::now();
    let outcome: RunOutcome = match config.run.algorithm {
        Algorithm::Ahcoa => ahcoa::run(&config.ahcoa, &objective)?,
        Algorithm::Alo => baselines::alo::run(&config.alo, &objective)?,
        Algorithm::Pso => baselines::pso::run(&config.pso, &objective)?,
    };
    let wall_clock_s = start.elapsed().as_secs_f64();

    let recomputed = objective.evaluate(&outcome.best_vector);
    if recomputed.to_bits() != outcome.best_fitness.to_bits() {
        return Err(Error::Consistency(format!(
            "stored best fitness {} but best vector evaluates to {recomputed}",
            outcome.best_fitness
        )));
    }
    let metrics = spec.map(|s| s.report(&outcome.best_vector)).transpose()?;
    Ok(RunArtifact {
        tool_version: TOOL_VERSION.to_string(),
        seed: config.run.seed,
        config,
        best_vector: outcome.best_vector,
        best_fitness: outcome.best_fitness,
        rejected: outcome.rejected,
        metrics,
        trace: outcome.trace,
        timing: Timing { wall_clock_s },
    })
}

impl RunArtifact {
    /// Progress log lines in the format of the algorithm that produced the run.
    pub fn log_lines(&self) -> Vec<String> {
        match self.config.run.algorithm {
            Algorithm::Alo => self.trace.iteration_log_lines(),
            Algorithm::Ahcoa | Algorithm::Pso => self.trace.elite_log_lines(50),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("artifact serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid artifact: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Re-evaluates the best vector and re-runs the echoed config; both
    /// must reproduce the stored best fitness bit for bit.
    pub fn verify(&self) -> Result<()> {
        let (objective, _) = self.config.objective()?;
        let value = objective.evaluate(&self.best_vector);
        if value.to_bits() != self.best_fitness.to_bits() {
            return Err(Error::Consistency(format!(
                "best vector evaluates to {value}, artifact stores {}",
                self.best_fitness
            )));
        }
        let replay = execute(&self.config)?;
        if replay.best_fitness.to_bits() != self.best_fitness.to_bits()
            || replay.best_vector != self.best_vector
            || replay.trace != self.trace
        {
            return Err(Error::Consistency(format!(
                "replay reached {}, artifact stores {}",
                replay.best_fitness, self.best_fitness
            )));
        }
        Ok(())
    }
}
