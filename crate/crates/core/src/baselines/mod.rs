//! Baseline optimizers for comparison against AHCOA.

pub mod alo;
pub mod pso;

use rand::Rng;
use rayon::prelude::*;

use crate::objectives::{Bounds, Objective};

pub use alo::AloConfig;
pub use pso::PsoConfig;

fn uniform_point<R: Rng>(rng: &mut R, bounds: &Bounds) -> Vec<f64> {
    (0..bounds.dimension())
        .map(|d| rng.random_range(bounds.lower()[d]..=bounds.upper()[d]))
        .collect()
}

/// Evaluates in parallel; non-finite values become `+inf` and are counted.
fn evaluate_all(objective: &Objective, points: &[Vec<f64>], rejected: &mut usize) -> Vec<f64> {
    let values: Vec<f64> = points.par_iter().map(|p| objective.evaluate(p)).collect();
    values
        .into_iter()
        .map(|v| {
            if v.is_finite() {
                v
            } else {
                *rejected += 1;
                f64::INFINITY
            }
        })
        .collect()
}

/// Index of the first minimum.
fn argmin(values: &[f64]) -> usize {
    (0..values.len()).fold(0, |best, i| if values[i] < values[best] { i } else { best })
}
