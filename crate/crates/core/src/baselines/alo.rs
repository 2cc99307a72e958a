//! Ant lion optimizer.
//!
//! Each iteration every ant picks an antlion by roulette wheel and takes two
//! bounded random walks, one around that antlion and one around the elite;
//! the ant lands on the mean of the two walk positions. Walk bounds shrink
//! as iterations proceed. Antlions are then replaced by the best of the
//! merged antlion and ant populations, and the elite is the best antlion ever
//! seen.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate_all, uniform_point};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::trace::{ConvergenceTrace, RunOutcome};

/// Beyond `threshold` (a fraction of the run), walk bounds are divided by
/// `1 + 10^exponent · t/T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkStep {
    pub threshold: f64,
    pub exponent: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AloConfig {
    pub population: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Thresholds in increasing order; the last one passed applies.
    pub shrink_schedule: Vec<ShrinkStep>,
}

impl Default for AloConfig {
    fn default() -> Self {
        let steps = [(0.1, 2), (0.5, 3), (0.75, 4), (0.9, 5), (0.95, 6)];
        Self {
            population: 25,
            max_iterations: 1200,
            seed: 0,
            shrink_schedule: steps
                .iter()
                .map(|&(threshold, exponent)| ShrinkStep {
                    threshold,
                    exponent,
                })
                .collect(),
        }
    }
}

impl AloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("population must be at least 2".into()));
        }
        let ordered = self
            .shrink_schedule
            .windows(2)
            .all(|w| w[0].threshold < w[1].threshold);
        if !ordered
            || self
                .shrink_schedule
                .iter()
                .any(|s| !(0.0..1.0).contains(&s.threshold))
        {
            return Err(Error::Config(
                "shrink thresholds must increase within [0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Walk-bound divisor at iteration `t` of `total`.
    pub fn shrink_ratio(&self, t: usize, total: usize) -> f64 {
        let frac = t as f64 / total.max(1) as f64;
        self.shrink_schedule
            .iter()
            .rev()
            .find(|s| frac > s.threshold)
            .map_or(1.0, |s| 1.0 + 10f64.powi(s.exponent) * frac)
    }
}

/// Random bits for one walk: `steps` ±1 moves, one bit each.
struct WalkBits {
    lower_flip: bool,
    upper_flip: bool,
    words: Vec<Vec<u64>>,
}

fn draw_walk(rng: &mut ChaCha8Rng, dim: usize, steps: usize) -> WalkBits {
    let lower_flip = rng.random::<bool>();
    let upper_flip = rng.random::<bool>();
    let words = (0..dim)
        .map(|_| {
            (0..steps.div_ceil(64))
                .map(|_| rng.random::<u64>())
                .collect()
        })
        .collect();
    WalkBits {
        lower_flip,
        upper_flip,
        words,
    }
}

/// Position at step `t` of a `steps`-long ±1 walk, min-max normalized onto
/// the interval from `c` to `d`.
pub(crate) fn walk_position(words: &[u64], steps: usize, t: usize, c: f64, d: f64) -> f64 {
    let (mut x, mut lo, mut hi, mut at_t) = (0i64, 0i64, 0i64, 0i64);
    for k in 0..steps {
        let bit = (words[k / 64] >> (k % 64)) & 1;
        x += if bit == 1 { 1 } else { -1 };
        lo = lo.min(x);
        hi = hi.max(x);
        if k + 1 == t {
            at_t = x;
        }
    }
    if hi == lo {
        return c;
    }
    (at_t - lo) as f64 * (d - c) / (hi - lo) as f64 + c
}

/// Walk around `centre` for every dimension at iteration `t`.
fn walk_around(
    centre: &[f64],
    bits: &WalkBits,
    objective: &Objective,
    ratio: f64,
    steps: usize,
    t: usize,
) -> Vec<f64> {
    let bounds = objective.bounds();
    (0..centre.len())
        .map(|j| {
            let lb = bounds.lower()[j] / ratio;
            let ub = bounds.upper()[j] / ratio;
            let c = if bits.lower_flip { -lb } else { lb } + centre[j];
            let d = if bits.upper_flip { -ub } else { ub } + centre[j];
            walk_position(&bits.words[j], steps, t, c, d)
        })
        .collect()
}

/// Roulette wheel over weights `1 / (1 + f - f_min)`; `u` in `[0, 1)`.
fn roulette(fitness: &[f64], u: f64) -> usize {
    let best = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = fitness
        .iter()
        .map(|&f| {
            if f.is_finite() {
                1.0 / (1.0 + f - best)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return 0;
    }
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

pub fn run(config: &AloConfig, objective: &Objective) -> Result<RunOutcome> {
    config.validate()?;
    let bounds = objective.bounds();
    let dim = objective.dimension();
    let total = config.max_iterations;
    let n = config.population;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rejected = 0;

    let mut antlions: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(&mut rng, bounds)).collect();
    let mut fitness = evaluate_all(objective, &antlions, &mut rejected);
    sort_population(&mut antlions, &mut fitness);
    let mut elite = antlions[0].clone();
    let mut elite_fitness = fitness[0];

    let mut trace = ConvergenceTrace::new(
        config.seed,
        serde_json::to_value(config).expect("config serializes"),
    );
    trace.record(0, elite_fitness);

    for t in 1..=total {
        let draws: Vec<(f64, WalkBits, WalkBits)> = (0..n)
            .map(|_| {
                let u = rng.random::<f64>();
                let around_antlion = draw_walk(&mut rng, dim, total);
                let around_elite = draw_walk(&mut rng, dim, total);
                (u, around_antlion, around_elite)
            })
            .collect();
        let ratio = config.shrink_ratio(t, total);
        let ants: Vec<Vec<f64>> = draws
            .iter()
            .map(|(u, ra, re)| {
                let chosen = &antlions[roulette(&fitness, *u)];
                let a = walk_around(chosen, ra, objective, ratio, total, t);
                let e = walk_around(&elite, re, objective, ratio, total, t);
                let mut ant: Vec<f64> = a.iter().zip(&e).map(|(x, y)| 0.5 * (x + y)).collect();
                bounds.clamp(&mut ant);
                ant
            })
            .collect();
        let ant_fitness = evaluate_all(objective, &ants, &mut rejected);

        antlions.extend(ants);
        fitness.extend(ant_fitness);
        sort_population(&mut antlions, &mut fitness);
        antlions.truncate(n);
        fitness.truncate(n);
        if fitness[0] < elite_fitness {
            elite = antlions[0].clone();
            elite_fitness = fitness[0];
        } else {
            antlions[0] = elite.clone();
            fitness[0] = elite_fitness;
        }
        trace.record(t, elite_fitness);
    }

    Ok(RunOutcome {
        best_vector: elite,
        best_fitness: elite_fitness,
        trace,
        rejected,
    })
}

/// Stable sort by fitness, ascending.
fn sort_population(points: &mut Vec<Vec<f64>>, fitness: &mut Vec<f64>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
    *points = order
        .iter()
        .map(|&i| std::mem::take(&mut points[i]))
        .collect();
    *fitness = order.iter().map(|&i| fitness[i]).collect();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{bowl_objective, Bounds};
    use proptest::prelude::*;

    fn bowl(dim: usize) -> Objective {
        bowl_objective(Bounds::uniform(dim, -100.0, 100.0).unwrap(), vec![0.0; dim]).unwrap()
    }

    #[test]
    fn short_run_plateaus() {
        let config = AloConfig {
            population: 10,
            max_iterations: 15,
            seed: 5,
            ..Default::default()
        };
        let out = run(&config, &bowl(2)).unwrap();
        assert!(out.trace.is_non_increasing());
        let lines = out.trace.iteration_log_lines();
        assert_eq!(lines.len(), 15);
        assert!(lines[0].starts_with("Iteration# 1\t"));
        let values: Vec<f64> = out.trace.entries.iter().map(|e| e.elite_fitness).collect();
        assert!(values.windows(2).any(|w| w[0] == w[1]), "{values:?}");
        assert!(values.last() < values.first());
    }

    #[test]
    fn deterministic() {
        let config = AloConfig {
            max_iterations: 60,
            seed: 8,
            ..Default::default()
        };
        let a = run(&config, &bowl(3)).unwrap();
        let b = run(&config, &bowl(3)).unwrap();
        assert_eq!(a.best_fitness.to_bits(), b.best_fitness.to_bits());
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn zero_iterations_is_best_initial() {
        let config = AloConfig {
            max_iterations: 0,
            seed: 2,
            ..Default::default()
        };
        let obj = bowl(2);
        let out = run(&config, &obj).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let best = (0..config.population)
            .map(|_| obj.evaluate(&uniform_point(&mut rng, obj.bounds())))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.best_fitness, best);
        assert_eq!(out.trace.entries.len(), 1);
    }

    #[test]
    fn converges_on_bowl() {
        let config = AloConfig {
            population: 20,
            max_iterations: 300,
            seed: 4,
            ..Default::default()
        };
        let out = run(&config, &bowl(2)).unwrap();
        assert!(out.best_fitness < 1e-3, "{}", out.best_fitness);
    }

    #[test]
    fn shrink_schedule() {
        let c = AloConfig::default();
        assert_eq!(c.shrink_ratio(10, 100), 1.0);
        assert_eq!(c.shrink_ratio(20, 100), 1.0 + 100.0 * 0.2);
        assert_eq!(c.shrink_ratio(60, 100), 1.0 + 1000.0 * 0.6);
        assert_eq!(c.shrink_ratio(100, 100), 1.0 + 1e6);
        let bad = AloConfig {
            shrink_schedule: vec![
                ShrinkStep {
                    threshold: 0.5,
                    exponent: 2,
                },
                ShrinkStep {
                    threshold: 0.1,
                    exponent: 3,
                },
            ],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn roulette_prefers_fitter() {
        let f = [0.0, 1.0, 3.0];
        // weights 1, 1/2, 1/4 of total 1.75
        assert_eq!(roulette(&f, 0.0), 0);
        assert_eq!(roulette(&f, 0.5), 0);
        assert_eq!(roulette(&f, 0.6), 1);
        assert_eq!(roulette(&f, 0.9), 2);
        assert_eq!(roulette(&[f64::INFINITY, 2.0], 0.99), 1);
    }

    proptest! {
        #[test]
        fn walks_stay_within_bounds(
            words in proptest::collection::vec(any::<u64>(), 1..4),
            t_frac in 0.0f64..=1.0,
            c in -100.0f64..100.0,
            d in -100.0f64..100.0,
        ) {
            let steps = words.len() * 64 - 7;
            let t = ((steps as f64) * t_frac) as usize;
            let x = walk_position(&words, steps, t, c, d);
            let (lo, hi) = (c.min(d), c.max(d));
            let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
            prop_assert!(x >= lo - tol && x <= hi + tol, "{x} not in [{lo}, {hi}]");
        }

        #[test]
        fn elitism(seed in 0u64..10_000, dim in 1usize..4, pop in 2usize..10) {
            let config = AloConfig { population: pop, max_iterations: 30, seed, ..Default::default() };
            let out = run(&config, &bowl(dim)).unwrap();
            prop_assert!(out.trace.is_non_increasing());
            prop_assert_eq!(out.best_fitness, out.trace.last().unwrap().elite_fitness);
        }
    }
}
