//! Fitness functions. Every objective is minimized over a bounded box.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::array_model::{
    pattern, AngleGrid, ArrayGeometry, Excitation, RadiationPattern, DEFAULT_FLOOR_DB,
};
use crate::error::{Error, Result};
use crate::pattern_metrics::{analyze, LobeKind, LobeReport};

/// Cost assigned to decision vectors that do not decode to a usable array.
pub const INFEASIBLE_COST: f64 = 1e6;

/// Per-variable `[lo, hi]` intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Config(
                "lower and upper bounds differ in length".into(),
            ));
        }
        if lower.is_empty() {
            return Err(Error::Config(
                "bounds must cover at least one variable".into(),
            ));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "variable {i}: need lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval for every variable.
    pub fn uniform(dimension: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dimension], vec![hi; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn clamp(&self, v: &mut [f64]) {
        for ((x, lo), hi) in v.iter_mut().zip(&self.lower).zip(&self.upper) {
            *x = x.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.dimension()
            && v.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((x, lo), hi)| lo <= x && x <= hi)
    }
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A deterministic scalar function on a bounded box; lower is better.
#[derive(Clone)]
pub struct Objective {
    name: String,
    bounds: Bounds,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("bounds", &self.bounds)
            .finish_non_exhaustive()
    }
}

impl Objective {
    pub fn new<F>(name: impl Into<String>, bounds: Bounds, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            bounds,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn evaluate(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dimension());
        (self.eval)(v)
    }

    /// Same function and name over different bounds.
    pub fn with_bounds(&self, bounds: Bounds) -> Result<Self> {
        if bounds.dimension() != self.dimension() {
            return Err(Error::Config(format!(
                "bounds have {} variables, objective has {}",
                bounds.dimension(),
                self.dimension()
            )));
        }
        Ok(Self {
            name: self.name.clone(),
            bounds,
            eval: Arc::clone(&self.eval),
        })
    }
}

/// `Σ (vᵢ − cᵢ)²`.
pub fn bowl(v: &[f64], center: &[f64]) -> f64 {
    v.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum()
}

pub fn bowl_objective(bounds: Bounds, center: Vec<f64>) -> Result<Objective> {
    if center.len() != bounds.dimension() {
        return Err(Error::Config(
            "bowl center dimension does not match bounds".into(),
        ));
    }
    Ok(Objective::new("bowl", bounds, move |v| bowl(v, &center)))
}

/// Minimizer of [`tangential_bowl`].
pub const TANGENTIAL_BOWL_CENTER: [f64; 2] = [-27.0, 50.0];

/// Two-dimensional bowl centred at (−27, 50); its minimum value is 0.
pub fn tangential_bowl(v: &[f64]) -> f64 {
    bowl(v, &TANGENTIAL_BOWL_CENTER)
}

pub fn tangential_bowl_objective(bounds: Bounds) -> Result<Objective> {
    if bounds.dimension() != 2 {
        return Err(Error::Config("tangential bowl is two-dimensional".into()));
    }
    Ok(Objective::new("tangential-bowl", bounds, tangential_bowl))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    /// Symmetric amplitude taper on a uniformly spaced array.
    Amplitude,
    /// Free positive-half element positions, uniform excitation.
    Position,
}

/// Weights of the side-lobe cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    /// Multiplier on the summed per-lobe excess over the target.
    pub lobe_excess: f64,
    /// dB of penalty per degree of FNBW above the cap.
    pub fnbw_per_deg: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            lobe_excess: 0.1,
            fnbw_per_deg: 1.0,
        }
    }
}

/// Minimum element separation enforced by position-mode repair, in λ.
pub const MIN_SEPARATION: f64 = 0.25;

/// An array-synthesis problem.
///
/// In amplitude mode the decision vector holds `⌈M/2⌉` amplitudes: for odd
/// `M` the center element first, then the symmetric pairs from the center
/// outward. In position mode it holds the `⌊M/2⌋` positive-half positions
/// (any order; they are sorted and repaired on decode) and
/// `spacing_or_aperture` is the total aperture.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisSpec {
    pub mode: SynthesisMode,
    pub element_count: usize,
    pub spacing_or_aperture: f64,
    pub target_sll_db: f64,
    pub fnbw_cap_deg: Option<f64>,
    pub grid: AngleGrid,
    pub floor_db: f64,
    pub bounds: Bounds,
    pub weights: CostWeights,
}

impl SynthesisSpec {
    /// Amplitude synthesis with amplitudes bounded to `[0, 1]`.
    pub fn amplitude(element_count: usize, spacing: f64, target_sll_db: f64) -> Result<Self> {
        let dim = element_count.div_ceil(2).max(1);
        let spec = Self {
            mode: SynthesisMode::Amplitude,
            element_count,
            spacing_or_aperture: spacing,
            target_sll_db,
            fnbw_cap_deg: None,
            grid: AngleGrid::default(),
            floor_db: DEFAULT_FLOOR_DB,
            bounds: Bounds::uniform(dim, 0.0, 1.0)?,
            weights: CostWeights::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Position synthesis within `aperture`; positions bounded to
    /// `[0, aperture/2]`.
    pub fn position(element_count: usize, aperture: f64, target_sll_db: f64) -> Result<Self> {
        let dim = (element_count / 2).max(1);
        let spec = Self {
            mode: SynthesisMode::Position,
            element_count,
            spacing_or_aperture: aperture,
            target_sll_db,
            fnbw_cap_deg: None,
            grid: AngleGrid::default(),
            floor_db: DEFAULT_FLOOR_DB,
            bounds: Bounds::uniform(dim, 0.0, aperture / 2.0)?,
            weights: CostWeights::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dimension(&self) -> usize {
        match self.mode {
            SynthesisMode::Amplitude => self.element_count.div_ceil(2),
            SynthesisMode::Position => self.element_count / 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.element_count < 2 {
            return Err(Error::Config("synthesis needs at least 2 elements".into()));
        }
        if !(self.spacing_or_aperture.is_finite() && self.spacing_or_aperture > 0.0) {
            return Err(Error::Config("spacing/aperture must be positive".into()));
        }
        if self.bounds.dimension() != self.dimension() {
            return Err(Error::Config(format!(
                "bounds cover {} variables, {:?} mode with {} elements needs {}",
                self.bounds.dimension(),
                self.mode,
                self.element_count,
                self.dimension()
            )));
        }
        if self.mode == SynthesisMode::Amplitude && self.bounds.lower().iter().any(|&lo| lo < 0.0) {
            return Err(Error::Config(
                "amplitude bounds must be non-negative".into(),
            ));
        }
        if self.mode == SynthesisMode::Position {
            let half = self.spacing_or_aperture / 2.0;
            let needed = self.half_start() + MIN_SEPARATION * (self.dimension() - 1) as f64;
            if needed > half {
                return Err(Error::Config(format!(
                    "aperture {} too small for {} elements at {MIN_SEPARATION} λ separation",
                    self.spacing_or_aperture, self.element_count
                )));
            }
        }
        if !(self.floor_db < -3.0) {
            return Err(Error::Config(format!(
                "floor must be below -3 dB, got {}",
                self.floor_db
            )));
        }
        if !self.target_sll_db.is_finite() {
            return Err(Error::Config("target SLL must be finite".into()));
        }
        if let Some(cap) = self.fnbw_cap_deg {
            if !(cap > 0.0) {
                return Err(Error::Config("FNBW cap must be positive".into()));
            }
        }
        Ok(())
    }

    fn has_center(&self) -> bool {
        self.element_count % 2 == 1
    }

    /// Smallest allowed positive-half position.
    fn half_start(&self) -> f64 {
        if self.has_center() {
            MIN_SEPARATION
        } else {
            MIN_SEPARATION / 2.0
        }
    }

    /// Decodes a decision vector into half-axis positions, pair amplitudes
    /// (inner to outer) and the center amplitude. `None` when infeasible.
    fn decode_half(&self, v: &[f64]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        if v.len() != self.dimension() || v.iter().any(|x| !x.is_finite()) {
            return None;
        }
        match self.mode {
            SynthesisMode::Amplitude => {
                let s = self.spacing_or_aperture;
                let (center, pairs) = if self.has_center() {
                    (v[0].max(0.0), &v[1..])
                } else {
                    (0.0, v)
                };
                let positions = (0..pairs.len())
                    .map(|p| {
                        if self.has_center() {
                            (p + 1) as f64 * s
                        } else {
                            (p as f64 + 0.5) * s
                        }
                    })
                    .collect();
                let amps: Vec<f64> = pairs.iter().map(|a| a.max(0.0)).collect();
                if center <= 0.0 && amps.iter().all(|&a| a <= 0.0) {
                    return None;
                }
                Some((positions, amps, center))
            }
            SynthesisMode::Position => {
                let positions = repair_positions(
                    v,
                    self.half_start(),
                    MIN_SEPARATION,
                    self.spacing_or_aperture / 2.0,
                )?;
                let amps = vec![1.0; positions.len()];
                Some((positions, amps, if self.has_center() { 1.0 } else { 0.0 }))
            }
        }
    }

    /// Array geometry and excitation for a decision vector.
    pub fn decode(&self, v: &[f64]) -> Option<(ArrayGeometry, Excitation)> {
        let (positions, amps, center) = self.decode_half(v)?;
        let geometry = ArrayGeometry::symmetric(positions, self.has_center()).ok()?;
        let mut full: Vec<f64> = amps.iter().rev().copied().collect();
        if self.has_center() {
            full.push(center);
        }
        full.extend_from_slice(&amps);
        let excitation = Excitation::real(full).ok()?;
        Some((geometry, excitation))
    }

    /// Pattern of a decision vector through the general array-factor path.
    pub fn pattern(&self, v: &[f64]) -> Result<RadiationPattern> {
        let (g, e) = self.decode(v).ok_or_else(|| {
            Error::Domain("decision vector does not decode to a feasible array".into())
        })?;
        pattern(&g, &e, &self.grid, self.floor_db)
    }

    /// Lobe metrics of a decision vector.
    pub fn report(&self, v: &[f64]) -> Result<LobeReport> {
        analyze(&self.pattern(v)?, self.floor_db)
    }

    /// Cost of a finished lobe report.
    pub fn cost_of(&self, report: &LobeReport) -> f64 {
        let target = self.target_sll_db;
        let peak_term = report.peak_sll_db.map_or(0.0, |p| (p - target).max(0.0));
        let lobe_sum: f64 = report
            .lobes
            .iter()
            .filter(|l| l.kind != LobeKind::Main)
            .map(|l| (l.peak_db - target).max(0.0))
            .sum();
        let fnbw_term = self
            .fnbw_cap_deg
            .map_or(0.0, |cap| (report.fnbw_deg.unwrap_or(180.0) - cap).max(0.0));
        peak_term + self.weights.lobe_excess * lobe_sum + self.weights.fnbw_per_deg * fnbw_term
    }
}

/// Sorts, pushes each position to keep `min_sep` from its inner neighbour
/// (and `start` from the origin), then clamps to `limit`. `None` if the
/// result is not strictly increasing.
fn repair_positions(v: &[f64], start: f64, min_sep: f64, limit: f64) -> Option<Vec<f64>> {
    let mut x: Vec<f64> = v.to_vec();
    x.sort_by(f64::total_cmp);
    let mut floor = start;
    for p in x.iter_mut() {
        *p = p.max(floor);
        floor = *p + min_sep;
    }
    for p in x.iter_mut() {
        *p = p.min(limit);
    }
    let ordered = x.first().is_none_or(|&f| f > 0.0) && x.windows(2).all(|w| w[1] > w[0]);
    ordered.then_some(x)
}

/// |AF| of a symmetric zero-phase array: `|c + Σ 2aₚ·cos(2π·xₚ·u)|`.
fn symmetric_magnitudes(positions: &[f64], amps: &[f64], center: f64, cosines: &[f64]) -> Vec<f64> {
    cosines
        .iter()
        .map(|&u| {
            let s: f64 = positions
                .iter()
                .zip(amps)
                .map(|(x, a)| 2.0 * a * (2.0 * PI * x * u).cos())
                .sum();
            (center + s).abs()
        })
        .collect()
}

/// Side-lobe cost for a synthesis problem:
///
/// ```text
/// max(SLL − target, 0) + w₁·Σ_non-main max(peak − target, 0) + w₂·max(FNBW − cap, 0)
/// ```
///
/// Infeasible vectors score [`INFEASIBLE_COST`].
pub fn sll_cost(spec: &SynthesisSpec) -> Result<Objective> {
    spec.validate()?;
    let spec = spec.clone();
    let angles = spec.grid.angles();
    let cosines: Vec<f64> = angles.iter().map(|t| t.to_radians().cos()).collect();

    // Amplitude mode has fixed positions: tabulate 2·cos(2π·xₚ·u) once.
    let table: Option<Vec<f64>> = (spec.mode == SynthesisMode::Amplitude).then(|| {
        let ones = vec![1.0; spec.dimension()];
        let (positions, _, _) = spec.decode_half(&ones).expect("unit taper decodes");
        cosines
            .iter()
            .flat_map(|&u| {
                positions
                    .iter()
                    .map(move |x| 2.0 * (2.0 * PI * x * u).cos())
            })
            .collect()
    });

    let name = match spec.mode {
        SynthesisMode::Amplitude => "sll-amplitude",
        SynthesisMode::Position => "sll-position",
    };
    let bounds = spec.bounds.clone();
    Ok(Objective::new(name, bounds, move |v| {
        let Some((positions, amps, center)) = spec.decode_half(v) else {
            return INFEASIBLE_COST;
        };
        let magnitude = match &table {
            Some(table) => {
                let pairs = positions.len();
                table
                    .chunks_exact(pairs.max(1))
                    .take(cosines.len())
                    .map(|row| {
                        let s: f64 = row.iter().zip(&amps).map(|(b, a)| b * a).sum();
                        (center + if pairs == 0 { 0.0 } else { s }).abs()
                    })
                    .collect()
            }
            None => symmetric_magnitudes(&positions, &amps, center, &cosines),
        };
        let report = RadiationPattern::from_magnitudes(angles.clone(), magnitude, spec.floor_db)
            .and_then(|p| analyze(&p, spec.floor_db));
        match report {
            Ok(r) => spec.cost_of(&r),
            Err(_) => INFEASIBLE_COST,
        }
    }))
}
