//! Global-best particle swarm optimizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmin, evaluate_all, uniform_point};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::trace::{ConvergenceTrace, RunOutcome};

/// Velocity limit as a fraction of each dimension's width.
pub const VELOCITY_CLAMP: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub population: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Start at rest instead of with uniform velocities inside the clamp.
    pub zero_initial_velocity: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            population: 30,
            max_iterations: 1200,
            seed: 0,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            zero_initial_velocity: false,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("population must be at least 2".into()));
        }
        if !(self.inertia > 0.0 && self.inertia <= 1.0) {
            return Err(Error::Config("inertia must lie in (0, 1]".into()));
        }
        if !(self.cognitive >= 0.0 && self.social >= 0.0) {
            return Err(Error::Config(
                "acceleration coefficients must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

pub fn run(config: &PsoConfig, objective: &Objective) -> Result<RunOutcome> {
    config.validate()?;
    let bounds = objective.bounds();
    let dim = objective.dimension();
    let vmax: Vec<f64> = (0..dim).map(|d| VELOCITY_CLAMP * bounds.width(d)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rejected = 0;

    let mut positions: Vec<Vec<f64>> = (0..config.population)
        .map(|_| uniform_point(&mut rng, bounds))
        .collect();
    let mut velocities: Vec<Vec<f64>> = (0..config.population)
        .map(|_| {
            vmax.iter()
                .map(|&v| {
                    if config.zero_initial_velocity || v == 0.0 {
                        0.0
                    } else {
                        rng.random_range(-v..=v)
                    }
                })
                .collect()
        })
        .collect();
    let mut best_positions = positions.clone();
    let mut best_fitness = evaluate_all(objective, &positions, &mut rejected);
    let g = argmin(&best_fitness);
    let mut gbest = best_positions[g].clone();
    let mut gbest_fitness = best_fitness[g];

    let mut trace = ConvergenceTrace::new(
        config.seed,
        serde_json::to_value(config).expect("config serializes"),
    );
    trace.record(0, gbest_fitness);

    for t in 1..=config.max_iterations {
        let coefficients: Vec<Vec<(f64, f64)>> = (0..config.population)
            .map(|_| {
                (0..dim)
                    .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
                    .collect()
            })
            .collect();
        for (i, r) in coefficients.iter().enumerate() {
            let (x, v) = (&mut positions[i], &mut velocities[i]);
            for d in 0..dim {
                let (r1, r2) = r[d];
                let next = config.inertia * v[d]
                    + config.cognitive * r1 * (best_positions[i][d] - x[d])
                    + config.social * r2 * (gbest[d] - x[d]);
                v[d] = next.clamp(-vmax[d], vmax[d]);
                x[d] += v[d];
            }
            bounds.clamp(x);
        }
        let values = evaluate_all(objective, &positions, &mut rejected);
        for (i, value) in values.into_iter().enumerate() {
            if value < best_fitness[i] {
                best_fitness[i] = value;
                best_positions[i].clone_from(&positions[i]);
            }
        }
        let g = argmin(&best_fitness);
        if best_fitness[g] < gbest_fitness {
            gbest_fitness = best_fitness[g];
            gbest.clone_from(&best_positions[g]);
        }
        trace.record(t, gbest_fitness);
    }

    Ok(RunOutcome {
        best_vector: gbest,
        best_fitness: gbest_fitness,
        trace,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{bowl_objective, Bounds};
    use proptest::prelude::*;

    fn bowl(dim: usize, half_width: f64) -> Objective {
        bowl_objective(
            Bounds::uniform(dim, -half_width, half_width).unwrap(),
            vec![0.0; dim],
        )
        .unwrap()
    }

    #[test]
    fn frozen_swarm() {
        let config = PsoConfig {
            inertia: 1.0,
            cognitive: 0.0,
            social: 0.0,
            zero_initial_velocity: true,
            max_iterations: 50,
            seed: 3,
            ..Default::default()
        };
        let out = run(&config, &bowl(3, 10.0)).unwrap();
        let first = out.trace.entries[0].elite_fitness;
        assert!(out.trace.entries.iter().all(|e| e.elite_fitness == first));
    }

    #[test]
    fn bowl_five_dim_regression() {
        let config = PsoConfig {
            population: 30,
            max_iterations: 200,
            seed: 9,
            ..Default::default()
        };
        let out = run(&config, &bowl(5, 10.0)).unwrap();
        assert!(out.best_fitness <= 1e-3, "{}", out.best_fitness);
        assert!((out.best_fitness / 3.184620239990571e-15 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let config = PsoConfig {
            max_iterations: 80,
            seed: 21,
            ..Default::default()
        };
        let a = run(&config, &bowl(4, 5.0)).unwrap();
        let b = run(&config, &bowl(4, 5.0)).unwrap();
        assert_eq!(a.best_fitness.to_bits(), b.best_fitness.to_bits());
        assert_eq!(a.best_vector, b.best_vector);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn config_validation() {
        for bad in [
            PsoConfig {
                inertia: 0.0,
                ..Default::default()
            },
            PsoConfig {
                inertia: 1.5,
                ..Default::default()
            },
            PsoConfig {
                cognitive: -1.0,
                ..Default::default()
            },
            PsoConfig {
                population: 1,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    proptest! {
        #[test]
        fn gbest_never_worsens(seed in 0u64..10_000, dim in 1usize..5, pop in 2usize..12) {
            let config = PsoConfig { population: pop, max_iterations: 30, seed, ..Default::default() };
            let out = run(&config, &bowl(dim, 20.0)).unwrap();
            prop_assert!(out.trace.is_non_increasing());
            prop_assert!(out.best_fitness <= out.trace.entries[0].elite_fitness);
        }
    }
}
