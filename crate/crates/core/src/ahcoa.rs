//! Ant hill colonization optimizer.
//!
//! A population of hills is improved by greedy perturbation. Each iteration,
//! every hill draws a signed step per dimension, packs the step magnitudes
//! into layers of capacity `budget` with next-fit (dimension 0 first), and
//! shrinks the steps of layer `ℓ` by `(1/3)^ℓ`, the pyramid/cone volume
//! ratio: inner layers move less. A candidate replaces its hill only if it
//! is strictly better, and the best hill ever seen is kept as the elite. The
//! step scale contracts by `contraction` every `epoch_length` iterations.
//!
//! All random draws for an iteration happen in one sequential pass (hill
//! order, then dimension order) before any evaluation, so evaluations run in
//! parallel without affecting results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::packing::{next_fit, PackingInstance, PackingSolution};
use crate::trace::{ConvergenceTrace, RunOutcome};

/// Volume ratio of a pyramid or cone to the prism or cylinder around it.
pub const LAYER_SHRINK: f64 = 1.0 / 3.0;

/// Solid shapes making up a hill's layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LayerShape {
    RectangularSolid {
        length: f64,
        width: f64,
        height: f64,
    },
    Prism {
        base_area: f64,
        height: f64,
    },
    Pyramid {
        base_area: f64,
        height: f64,
    },
    Cone {
        radius: f64,
        height: f64,
    },
}

pub fn layer_volume(shape: LayerShape) -> Result<f64> {
    let dims: &[f64] = match &shape {
        LayerShape::RectangularSolid {
            length,
            width,
            height,
        } => &[*length, *width, *height],
        LayerShape::Prism { base_area, height } | LayerShape::Pyramid { base_area, height } => {
            &[*base_area, *height]
        }
        LayerShape::Cone { radius, height } => &[*radius, *height],
    };
    if dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::Domain(format!(
            "shape dimensions must be positive: {shape:?}"
        )));
    }
    Ok(match shape {
        LayerShape::RectangularSolid {
            length,
            width,
            height,
        } => length * width * height,
        LayerShape::Prism { base_area, height } => base_area * height,
        LayerShape::Pyramid { base_area, height } => base_area * height / 3.0,
        LayerShape::Cone { radius, height } => {
            std::f64::consts::PI * radius * radius * height / 3.0
        }
    })
}

/// Layer partition of a hill's dimensions from one construction pass.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerPlan {
    /// Packed sizes (step magnitudes after rescaling to the budget).
    pub sizes: PackingInstance,
    pub layers: PackingSolution,
}

impl LayerPlan {
    /// Layer index of every dimension.
    pub fn depths(&self) -> Vec<usize> {
        self.layers
            .assignment(self.sizes.len())
            .expect("next-fit assigns every dimension once")
    }
}

/// Packs step magnitudes into layers of capacity `budget`, in dimension
/// order. Magnitudes are scaled down uniformly when the largest exceeds the
/// budget, so every dimension fits.
pub fn construct_layers(magnitudes: &[f64], budget: f64) -> Result<LayerPlan> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::Config(format!(
            "layer budget must be positive, got {budget}"
        )));
    }
    let max = magnitudes.iter().copied().fold(0.0_f64, f64::max);
    let scale = if max > budget { budget / max } else { 1.0 };
    let sizes: Vec<f64> = magnitudes.iter().map(|m| (m * scale).min(budget)).collect();
    let sizes = PackingInstance::with_zero_sizes(sizes, budget)?;
    let layers = next_fit(&sizes)?;
    Ok(LayerPlan { sizes, layers })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AhcoaConfig {
    pub population: usize,
    pub max_iterations: usize,
    /// Layer capacity for step packing.
    pub budget: f64,
    /// Iterations between step-scale contractions.
    pub epoch_length: usize,
    /// Step-scale multiplier applied at the end of every epoch.
    pub contraction: f64,
    /// Initial step scale as a fraction of each dimension's width.
    pub initial_scale: f64,
    pub seed: u64,
}

impl Default for AhcoaConfig {
    fn default() -> Self {
        Self {
            population: 25,
            max_iterations: 1200,
            budget: 1.0,
            epoch_length: 25,
            contraction: 0.85,
            initial_scale: 0.25,
            seed: 0,
        }
    }
}

impl AhcoaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("population must be at least 2".into()));
        }
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::Config("budget must be positive".into()));
        }
        if self.epoch_length == 0 {
            return Err(Error::Config("epoch length must be positive".into()));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(Error::Config("contraction must lie in (0, 1)".into()));
        }
        if !(self.initial_scale.is_finite() && self.initial_scale > 0.0) {
            return Err(Error::Config("initial scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hill {
    pub vector: Vec<f64>,
    pub fitness: f64,
    /// Layers from the most recent construction pass, if any.
    pub plan: Option<LayerPlan>,
}

/// Optimizer state: exclusively owned by the iteration loop.
#[derive(Clone, Debug)]
pub struct Colony {
    config: AhcoaConfig,
    hills: Vec<Hill>,
    elite: Hill,
    iteration: usize,
    scale: Vec<f64>,
    rng: ChaCha8Rng,
    rejected: usize,
    trace: ConvergenceTrace,
}

struct Draw {
    magnitude: f64,
    negative: bool,
}

fn fitness_or_reject(value: f64, rejected: &mut usize) -> f64 {
    if value.is_finite() {
        value
    } else {
        *rejected += 1;
        f64::INFINITY
    }
}

impl Colony {
    /// Uniform random population inside the objective's bounds.
    pub fn new(config: AhcoaConfig, objective: &Objective) -> Result<Self> {
        config.validate()?;
        let bounds = objective.bounds();
        let dim = objective.dimension();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let vectors: Vec<Vec<f64>> = (0..config.population)
            .map(|_| {
                (0..dim)
                    .map(|d| rng.random_range(bounds.lower()[d]..=bounds.upper()[d]))
                    .collect()
            })
            .collect();
        let values: Vec<f64> = vectors.par_iter().map(|v| objective.evaluate(v)).collect();
        let mut rejected = 0;
        let hills: Vec<Hill> = vectors
            .into_iter()
            .zip(values)
            .map(|(vector, value)| Hill {
                vector,
                fitness: fitness_or_reject(value, &mut rejected),
                plan: None,
            })
            .collect();
        let elite = best_of(&hills).clone();
        let scale = (0..dim)
            .map(|d| config.initial_scale * bounds.width(d))
            .collect();
        let mut trace = ConvergenceTrace::new(
            config.seed,
            serde_json::to_value(&config).expect("config serializes"),
        );
        trace.record(0, elite.fitness);
        Ok(Self {
            config,
            hills,
            elite,
            iteration: 0,
            scale,
            rng,
            rejected,
            trace,
        })
    }

    pub fn config(&self) -> &AhcoaConfig {
        &self.config
    }

    pub fn hills(&self) -> &[Hill] {
        &self.hills
    }

    pub fn elite(&self) -> &Hill {
        &self.elite
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Current per-dimension step scale.
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn trace(&self) -> &ConvergenceTrace {
        &self.trace
    }

    /// One construction pass over every hill.
    pub fn step(&mut self, objective: &Objective) -> Result<()> {
        let dim = objective.dimension();
        if dim != self.scale.len() {
            return Err(Error::Config(format!(
                "objective has {dim} variables, colony was built for {}",
                self.scale.len()
            )));
        }
        let draws: Vec<Vec<Draw>> = (0..self.hills.len())
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let z: f64 = self.rng.sample(StandardNormal);
                        let negative = self.rng.random::<bool>();
                        Draw {
                            magnitude: z.abs(),
                            negative,
                        }
                    })
                    .collect()
            })
            .collect();

        let mut plans = Vec::with_capacity(self.hills.len());
        let mut candidates = Vec::with_capacity(self.hills.len());
        for (hill, draw) in self.hills.iter().zip(&draws) {
            let magnitudes: Vec<f64> = draw.iter().map(|d| d.magnitude).collect();
            let plan = construct_layers(&magnitudes, self.config.budget)?;
            let depths = plan.depths();
            let mut candidate = hill.vector.clone();
            for (d, x) in candidate.iter_mut().enumerate() {
                let shrink = LAYER_SHRINK.powi(depths[d] as i32);
                let step = draw[d].magnitude * self.scale[d] * shrink;
                *x += if draw[d].negative { -step } else { step };
            }
            objective.bounds().clamp(&mut candidate);
            plans.push(plan);
            candidates.push(candidate);
        }

        let values: Vec<f64> = candidates
            .par_iter()
            .map(|c| objective.evaluate(c))
            .collect();

        for ((hill, candidate), (value, plan)) in self
            .hills
            .iter_mut()
            .zip(candidates)
            .zip(values.into_iter().zip(plans))
        {
            hill.plan = Some(plan);
            if !value.is_finite() {
                self.rejected += 1;
                continue;
            }
            if value < hill.fitness {
                hill.vector = candidate;
                hill.fitness = value;
            }
        }
        let best = best_of(&self.hills);
        if best.fitness < self.elite.fitness {
            self.elite = best.clone();
        }

        self.iteration += 1;
        if self.iteration.is_multiple_of(self.config.epoch_length) {
            for s in &mut self.scale {
                *s *= self.config.contraction;
            }
        }
        self.trace.record(self.iteration, self.elite.fitness);
        Ok(())
    }

    pub fn into_outcome(self) -> RunOutcome {
        RunOutcome {
            best_vector: self.elite.vector,
            best_fitness: self.elite.fitness,
            trace: self.trace,
            rejected: self.rejected,
        }
    }
}

/// First hill with the lowest fitness.
fn best_of(hills: &[Hill]) -> &Hill {
    hills
        .iter()
        .reduce(|best, h| if h.fitness < best.fitness { h } else { best })
        .expect("population is non-empty")
}

/// Runs `config.max_iterations` steps from a seeded initial population.
pub fn run(config: &AhcoaConfig, objective: &Objective) -> Result<RunOutcome> {
    let mut colony = Colony::new(config.clone(), objective)?;
    for _ in 0..config.max_iterations {
        colony.step(objective)?;
    }
    Ok(colony.into_outcome())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{bowl_objective, tangential_bowl_objective, Bounds};
    use crate::packing::validate;
    use proptest::prelude::*;

    fn bowl(dim: usize, lo: f64, hi: f64) -> Objective {
        bowl_objective(Bounds::uniform(dim, lo, hi).unwrap(), vec![0.0; dim]).unwrap()
    }

    #[test]
    fn volumes() {
        let pyr = layer_volume(LayerShape::Pyramid {
            base_area: 3.0,
            height: 2.0,
        })
        .unwrap();
        assert!((pyr - 2.0).abs() < 1e-15);
        let cone = layer_volume(LayerShape::Cone {
            radius: 1.0,
            height: 3.0,
        })
        .unwrap();
        assert!((cone - std::f64::consts::PI).abs() < 1e-15);
        let prism = layer_volume(LayerShape::Prism {
            base_area: 3.0,
            height: 2.0,
        })
        .unwrap();
        assert_eq!(prism, 3.0 * pyr);
        let solid = layer_volume(LayerShape::RectangularSolid {
            length: 2.0,
            width: 3.0,
            height: 4.0,
        })
        .unwrap();
        assert_eq!(solid, 24.0);
        assert!(layer_volume(LayerShape::Cone {
            radius: 0.0,
            height: 1.0
        })
        .is_err());
        assert!(layer_volume(LayerShape::Prism {
            base_area: 1.0,
            height: -1.0
        })
        .is_err());
    }

    #[test]
    fn layer_construction_examples() {
        let plan = construct_layers(&[0.5, 0.5, 0.5, 0.5], 1.0).unwrap();
        assert_eq!(plan.layers.bins, vec![vec![0, 1], vec![2, 3]]);
        let plan = construct_layers(&[0.0; 4], 1.0).unwrap();
        assert_eq!(plan.layers.bins, vec![vec![0, 1, 2, 3]]);
        let plan = construct_layers(&[0.6, 0.5, 0.6, 0.5], 1.0).unwrap();
        assert_eq!(plan.layers.used_bins, 4);
        assert_eq!(plan.depths(), vec![0, 1, 2, 3]);
        // rescaled: [3, 1.5] -> [1, 0.5]
        let plan = construct_layers(&[3.0, 1.5], 1.0).unwrap();
        assert_eq!(plan.sizes.sizes(), &[1.0, 0.5]);
        assert_eq!(plan.layers.used_bins, 2);
    }

    #[test]
    fn converged_elite_is_kept() {
        let obj = bowl(3, -5.0, 5.0);
        let config = AhcoaConfig {
            population: 4,
            seed: 3,
            ..Default::default()
        };
        let mut colony = Colony::new(config, &obj).unwrap();
        colony.elite = Hill {
            vector: vec![0.0; 3],
            fitness: 0.0,
            plan: None,
        };
        for _ in 0..20 {
            colony.step(&obj).unwrap();
            assert_eq!(colony.elite().vector, vec![0.0; 3]);
            assert_eq!(colony.elite().fitness, 0.0);
        }
    }

    #[test]
    fn single_step_does_not_worsen_elite() {
        let obj = bowl(1, -10.0, 10.0);
        let config = AhcoaConfig {
            population: 4,
            seed: 7,
            ..Default::default()
        };
        let mut colony = Colony::new(config, &obj).unwrap();
        let before = colony.elite().fitness;
        colony.step(&obj).unwrap();
        assert!(colony.elite().fitness <= before);
    }

    #[test]
    fn bowl_five_dim_regression() {
        let obj = bowl(5, -1.0, 1.0);
        let config = AhcoaConfig {
            population: 20,
            max_iterations: 200,
            seed: 42,
            ..Default::default()
        };
        let out = run(&config, &obj).unwrap();
        assert!(out.best_fitness <= 1e-2, "{}", out.best_fitness);
        assert!((out.best_fitness / 0.003542628992495365 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tangential_bowl_regression() {
        let obj = tangential_bowl_objective(Bounds::uniform(2, -500.0, 500.0).unwrap()).unwrap();
        let out = run(
            &AhcoaConfig {
                seed: 3,
                ..Default::default()
            },
            &obj,
        )
        .unwrap();
        let initial = out.trace.entries[0].elite_fitness;
        assert!((1e2..=1e4).contains(&initial), "{initial}");
        assert!(out.best_fitness <= 1e-3);
        assert!((initial / 4111.236675417624 - 1.0).abs() < 1e-9);
        assert!((out.best_fitness / 4.00327065909467e-6 - 1.0).abs() < 1e-9);
        assert_eq!(out.trace.elite_log_lines(50).len(), 24);
    }

    #[test]
    fn zero_iterations_returns_best_initial() {
        let obj = bowl(3, -5.0, 5.0);
        let config = AhcoaConfig {
            max_iterations: 0,
            seed: 1,
            ..Default::default()
        };
        let out = run(&config, &obj).unwrap();
        let colony = Colony::new(config, &obj).unwrap();
        let best = colony
            .hills()
            .iter()
            .map(|h| h.fitness)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.best_fitness, best);
        assert_eq!(out.trace.entries.len(), 1);
    }

    #[test]
    fn runs_are_deterministic() {
        let obj = tangential_bowl_objective(Bounds::uniform(2, -500.0, 500.0).unwrap()).unwrap();
        let config = AhcoaConfig {
            max_iterations: 150,
            seed: 11,
            ..Default::default()
        };
        let a = run(&config, &obj).unwrap();
        let b = run(&config, &obj).unwrap();
        assert_eq!(a.best_fitness.to_bits(), b.best_fitness.to_bits());
        assert_eq!(a.best_vector, b.best_vector);
        assert_eq!(a.trace, b.trace);
        let c = run(&AhcoaConfig { seed: 12, ..config }, &obj).unwrap();
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn non_finite_candidates_are_rejected() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let obj = Objective::new("holey", bounds, |v| {
            if v[0] > 0.5 {
                f64::NAN
            } else {
                v[0] * v[0] + v[1] * v[1]
            }
        });
        let out = run(
            &AhcoaConfig {
                max_iterations: 50,
                seed: 5,
                ..Default::default()
            },
            &obj,
        )
        .unwrap();
        assert!(out.rejected > 0);
        assert!(out.best_fitness.is_finite());
        assert!(out.best_vector[0] <= 0.5);
    }

    #[test]
    fn layers_are_valid_packings_and_evaluations_stay_in_bounds() {
        use std::sync::atomic::{AtomicBool, Ordering};
        use std::sync::Arc;
        let bounds = Bounds::new(vec![-1.0, 0.0, 5.0, -3.0], vec![1.0, 2.0, 6.0, 3.0]).unwrap();
        let check = bounds.clone();
        let escaped = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&escaped);
        let obj = Objective::new("instrumented", bounds, move |v| {
            if !check.contains(v) {
                flag.store(true, Ordering::SeqCst);
            }
            v.iter().map(|x| (x - 10.0).powi(2)).sum()
        });
        let config = AhcoaConfig {
            population: 6,
            seed: 9,
            ..Default::default()
        };
        let mut colony = Colony::new(config.clone(), &obj).unwrap();
        for _ in 0..60 {
            colony.step(&obj).unwrap();
            for hill in colony.hills() {
                let plan = hill.plan.as_ref().unwrap();
                assert!(plan.sizes.capacity() == config.budget);
                assert!(validate(&plan.sizes, &plan.layers).is_valid());
                assert_eq!(plan.sizes.len(), 4);
            }
        }
        assert!(!escaped.load(Ordering::SeqCst));
        assert!(colony.trace().is_non_increasing());
    }

    #[test]
    fn config_validation() {
        let obj = bowl(2, -1.0, 1.0);
        for bad in [
            AhcoaConfig {
                population: 1,
                ..Default::default()
            },
            AhcoaConfig {
                contraction: 1.0,
                ..Default::default()
            },
            AhcoaConfig {
                epoch_length: 0,
                ..Default::default()
            },
            AhcoaConfig {
                budget: 0.0,
                ..Default::default()
            },
        ] {
            assert!(Colony::new(bad, &obj).is_err());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn trace_never_increases(seed in 0u64..10_000, dim in 1usize..5, pop in 2usize..12) {
            let obj = bowl(dim, -20.0, 20.0);
            let config = AhcoaConfig { population: pop, max_iterations: 40, seed, ..Default::default() };
            let out = run(&config, &obj).unwrap();
            prop_assert!(out.trace.is_non_increasing());
            prop_assert_eq!(out.trace.entries.len(), 41);
            prop_assert_eq!(out.best_fitness, out.trace.last().unwrap().elite_fitness);
        }

        #[test]
        fn volumetric_identities(b in 1e-3f64..1e3, h in 1e-3f64..1e3, r in 1e-3f64..1e3) {
            let prism = layer_volume(LayerShape::Prism { base_area: b, height: h }).unwrap();
            let pyr = layer_volume(LayerShape::Pyramid { base_area: b, height: h }).unwrap();
            prop_assert!(((pyr - prism / 3.0) / pyr).abs() <= 1e-12);
            let cone = layer_volume(LayerShape::Cone { radius: r, height: h }).unwrap();
            let cylinder = std::f64::consts::PI * r * r * h;
            prop_assert!(((cone - cylinder / 3.0) / cone).abs() <= 1e-12);
        }
    }
}
