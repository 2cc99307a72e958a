//! Far-field model of a linear array on the x-axis.
//!
//! Positions are in wavelengths (λ = 1), angles are zenith angles θ in
//! degrees measured from the array axis, and every element is isotropic, so
//! the pattern is the array factor alone:
//!
//! ```text
//! AF(θ) = Σₙ aₙ · exp(i(2π·xₙ·cosθ + φₙ))
//! ```

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default angular sampling step in degrees.
pub const DEFAULT_STEP_DEG: f64 = 0.05;
/// Default dB floor for normalized patterns.
pub const DEFAULT_FLOOR_DB: f64 = -60.0;

/// Header of the pattern CSV export.
pub const PATTERN_CSV_HEADER: [&str; 3] = ["theta_deg", "af_mag", "af_db"];

/// Element positions of a linear array, in wavelengths.
///
/// In symmetric mode only the positive half-axis is stored; every stored
/// position `x` stands for the pair `±x`, and an optional element sits at the
/// origin. Explicit mode stores every element as given.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<f64>,
    symmetric: bool,
    center_element: bool,
}

impl ArrayGeometry {
    /// Centered uniform array: `(m − (M−1)/2)·spacing` for `m = 0..M`.
    ///
    /// Stored in symmetric mode; odd counts get a center element.
    pub fn uniform(count: usize, spacing: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("element count must be at least 1".into()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Domain(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let center = count % 2 == 1;
        let half = count / 2;
        let positions = (0..half)
            .map(|p| {
                // distance of pair p (0 = innermost) from the origin
                if center {
                    (p + 1) as f64 * spacing
                } else {
                    (p as f64 + 0.5) * spacing
                }
            })
            .collect();
        Self::symmetric(positions, center)
    }

    /// Symmetric array from its positive-half positions.
    pub fn symmetric(half_positions: Vec<f64>, center_element: bool) -> Result<Self> {
        check_increasing(&half_positions)?;
        if let Some(&x) = half_positions.first() {
            if x <= 0.0 {
                return Err(Error::Config(format!(
                    "symmetric positions must be > 0, got {x}"
                )));
            }
        }
        if half_positions.is_empty() && !center_element {
            return Err(Error::Config("array has no elements".into()));
        }
        Ok(Self {
            positions: half_positions,
            symmetric: true,
            center_element,
        })
    }

    /// Array with every element position given explicitly.
    pub fn explicit(positions: Vec<f64>) -> Result<Self> {
        check_increasing(&positions)?;
        if positions.is_empty() {
            return Err(Error::Config("array has no elements".into()));
        }
        Ok(Self {
            positions,
            symmetric: false,
            center_element: false,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn has_center_element(&self) -> bool {
        self.center_element
    }

    /// Positions as stored (positive half in symmetric mode).
    pub fn stored_positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn element_count(&self) -> usize {
        if self.symmetric {
            2 * self.positions.len() + usize::from(self.center_element)
        } else {
            self.positions.len()
        }
    }

    /// All element positions in ascending order; excitations index this list.
    pub fn element_positions(&self) -> Vec<f64> {
        if !self.symmetric {
            return self.positions.clone();
        }
        let mut all = Vec::with_capacity(self.element_count());
        all.extend(self.positions.iter().rev().map(|x| -x));
        if self.center_element {
            all.push(0.0);
        }
        all.extend_from_slice(&self.positions);
        all
    }

    /// Distance between the outermost elements, in wavelengths.
    pub fn aperture(&self) -> f64 {
        let all = self.element_positions();
        match (all.first(), all.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

fn check_increasing(positions: &[f64]) -> Result<()> {
    if let Some(x) = positions.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite element position {x}")));
    }
    if positions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "element positions must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Per-element amplitude and phase (radians).
#[derive(Clone, Debug, PartialEq)]
pub struct Excitation {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl Excitation {
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::Config(format!(
                "{} amplitudes but {} phases",
                amplitudes.len(),
                phases.len()
            )));
        }
        if let Some(a) = amplitudes.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::Domain(format!(
                "amplitudes must be finite and non-negative, got {a}"
            )));
        }
        if let Some(p) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("non-finite phase {p}")));
        }
        if !amplitudes.iter().any(|&a| a > 0.0) {
            return Err(Error::Config(
                "at least one amplitude must be positive".into(),
            ));
        }
        Ok(Self { amplitudes, phases })
    }

    /// Zero-phase excitation with the given amplitudes.
    pub fn real(amplitudes: Vec<f64>) -> Result<Self> {
        let phases = vec![0.0; amplitudes.len()];
        Self::new(amplitudes, phases)
    }

    /// Unit amplitudes, zero phases.
    pub fn uniform(count: usize) -> Self {
        Self {
            amplitudes: vec![1.0; count],
            phases: vec![0.0; count],
        }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitudes multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.amplitudes.iter().map(|a| a * factor).collect(),
            self.phases.clone(),
        )
    }
}

/// Zenith-angle sampling grid, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleGrid {
    start_deg: f64,
    end_deg: f64,
    step_deg: f64,
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self {
            start_deg: 0.0,
            end_deg: 180.0,
            step_deg: DEFAULT_STEP_DEG,
        }
    }
}

impl AngleGrid {
    pub fn new(start_deg: f64, end_deg: f64, step_deg: f64) -> Result<Self> {
        if !(start_deg.is_finite() && end_deg.is_finite() && step_deg.is_finite()) {
            return Err(Error::Domain("grid bounds must be finite".into()));
        }
        if !(0.0 <= start_deg && start_deg < end_deg && end_deg <= 180.0) {
            return Err(Error::Config(format!(
                "grid needs 0 <= start < end <= 180, got [{start_deg}, {end_deg}]"
            )));
        }
        if step_deg <= 0.0 {
            return Err(Error::Config(format!(
                "grid step must be positive, got {step_deg}"
            )));
        }
        Ok(Self {
            start_deg,
            end_deg,
            step_deg,
        })
    }

    /// Full 0..180° grid with the given step.
    pub fn full(step_deg: f64) -> Result<Self> {
        Self::new(0.0, 180.0, step_deg)
    }

    pub fn start_deg(&self) -> f64 {
        self.start_deg
    }

    pub fn end_deg(&self) -> f64 {
        self.end_deg
    }

    pub fn step_deg(&self) -> f64 {
        self.step_deg
    }

    fn intervals(&self) -> usize {
        // tolerate spans that are an integer number of steps up to rounding
        ((self.end_deg - self.start_deg) / self.step_deg - 1e-9)
            .ceil()
            .max(1.0) as usize
    }

    pub fn len(&self) -> usize {
        self.intervals() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample angles; the last one is exactly `end_deg`.
    pub fn angles(&self) -> Vec<f64> {
        let n = self.intervals();
        let mut out: Vec<f64> = (0..n)
            .map(|i| self.start_deg + i as f64 * self.step_deg)
            .collect();
        out.push(self.end_deg);
        out
    }
}

/// Sampled far-field magnitude, normalized to a 0 dB peak.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiationPattern {
    angles_deg: Vec<f64>,
    magnitude: Vec<f64>,
    db: Vec<f64>,
}

impl RadiationPattern {
    /// Normalizes raw magnitudes; values below `floor_db` are clamped to it.
    pub fn from_magnitudes(
        angles_deg: Vec<f64>,
        magnitude: Vec<f64>,
        floor_db: f64,
    ) -> Result<Self> {
        if angles_deg.len() != magnitude.len() {
            return Err(Error::Config("angle and magnitude lengths differ".into()));
        }
        if !(floor_db < 0.0) {
            return Err(Error::Config(format!(
                "floor must be negative, got {floor_db}"
            )));
        }
        if magnitude.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Domain(
                "magnitudes must be finite and non-negative".into(),
            ));
        }
        let peak = magnitude.iter().copied().fold(0.0_f64, f64::max);
        if peak <= 0.0 {
            return Err(Error::DegeneratePattern);
        }
        let db = magnitude
            .iter()
            .map(|&m| {
                let v = 20.0 * (m / peak).log10();
                if v < floor_db {
                    floor_db
                } else {
                    v
                }
            })
            .collect();
        Ok(Self {
            angles_deg,
            magnitude,
            db,
        })
    }

    /// Rebuilds a pattern from stored columns (e.g. a CSV export) without
    /// recomputing the dB values.
    pub fn from_parts(angles_deg: Vec<f64>, magnitude: Vec<f64>, db: Vec<f64>) -> Result<Self> {
        if angles_deg.len() != magnitude.len() || angles_deg.len() != db.len() {
            return Err(Error::Config(
                "pattern columns have different lengths".into(),
            ));
        }
        if angles_deg.is_empty() {
            return Err(Error::Config("pattern is empty".into()));
        }
        if angles_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "pattern angles must be strictly increasing".into(),
            ));
        }
        if magnitude
            .iter()
            .chain(&db)
            .chain(&angles_deg)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Domain("pattern contains non-finite values".into()));
        }
        let max_db = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max_db.abs() > 1e-9 {
            return Err(Error::Config(format!(
                "pattern is not normalized: max dB is {max_db}"
            )));
        }
        Ok(Self {
            angles_deg,
            magnitude,
            db,
        })
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn db(&self) -> &[f64] {
        &self.db
    }

    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    /// Writes `theta_deg,af_mag,af_db` rows with shortest round-trip decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(PATTERN_CSV_HEADER).map_err(csv_to_io)?;
        for i in 0..self.len() {
            w.write_record([
                self.angles_deg[i].to_string(),
                self.magnitude[i].to_string(),
                self.db[i].to_string(),
            ])
            .map_err(csv_to_io)?;
        }
        w.flush()
    }

    /// Parses a pattern CSV; `source` names the input in error messages.
    pub fn read_csv<R: Read>(reader: R, source: &Path) -> Result<Self> {
        let parse_err = |line: u64, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = r
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if headers.iter().map(str::trim).ne(PATTERN_CSV_HEADER) {
            return Err(parse_err(
                1,
                format!("expected header {}", PATTERN_CSV_HEADER.join(",")),
            ));
        }
        let (mut angles, mut mags, mut dbs) = (Vec::new(), Vec::new(), Vec::new());
        for record in r.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let mut fields = [0.0; 3];
            for (k, slot) in fields.iter_mut().enumerate() {
                let raw = record.get(k).unwrap_or("").trim();
                *slot = raw.parse::<f64>().map_err(|_| {
                    parse_err(
                        line,
                        format!("column {}: not a number: {raw:?}", PATTERN_CSV_HEADER[k]),
                    )
                })?;
            }
            angles.push(fields[0]);
            mags.push(fields[1]);
            dbs.push(fields[2]);
        }
        Self::from_parts(angles, mags, dbs).map_err(|e| parse_err(0, e.to_string()))
    }
}

fn csv_to_io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn check_excitation(geometry: &ArrayGeometry, excitation: &Excitation) -> Result<()> {
    if geometry.element_count() != excitation.len() {
        return Err(Error::Config(format!(
            "excitation has {} entries for {} elements",
            excitation.len(),
            geometry.element_count()
        )));
    }
    Ok(())
}

fn af_sum(positions: &[f64], excitation: &Excitation, cos_theta: f64) -> Complex64 {
    positions
        .iter()
        .zip(excitation.amplitudes())
        .zip(excitation.phases())
        .map(|((&x, &a), &phi)| Complex64::from_polar(a, 2.0 * PI * x * cos_theta + phi))
        .sum()
}

/// Complex array factor at zenith angle `theta_deg`.
pub fn array_factor(
    geometry: &ArrayGeometry,
    excitation: &Excitation,
    theta_deg: f64,
) -> Result<Complex64> {
    check_excitation(geometry, excitation)?;
    if !theta_deg.is_finite() {
        return Err(Error::Domain(format!("non-finite angle {theta_deg}")));
    }
    if !(0.0..=180.0).contains(&theta_deg) {
        return Err(Error::Domain(format!("angle {theta_deg} outside [0, 180]")));
    }
    let positions = geometry.element_positions();
    Ok(af_sum(&positions, excitation, theta_deg.to_radians().cos()))
}

/// Samples |AF| on `grid` and normalizes it to a 0 dB peak.
pub fn pattern(
    geometry: &ArrayGeometry,
    excitation: &Excitation,
    grid: &AngleGrid,
    floor_db: f64,
) -> Result<RadiationPattern> {
    check_excitation(geometry, excitation)?;
    let positions = geometry.element_positions();
    let angles = grid.angles();
    let magnitude = angles
        .iter()
        .map(|t| af_sum(&positions, excitation, t.to_radians().cos()).norm())
        .collect();
    RadiationPattern::from_magnitudes(angles, magnitude, floor_db)
}

/// Far-field boundary `2·D²/λ`.
pub fn fraunhofer_distance(aperture_d: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    if !(aperture_d.is_finite() && aperture_d >= 0.0) {
        return Err(Error::Domain(format!(
            "aperture must be non-negative, got {aperture_d}"
        )));
    }
    Ok(2.0 * aperture_d * aperture_d / wavelength)
}

/// Closed-form null directions of a uniformly excited, uniformly spaced array.
///
/// Nulls sit where `ψ = 2π·spacing·cosθ = 2πk/M` for nonzero `k` that is not
/// a multiple of `M`. Returned in degrees, ascending; endpoint nulls
/// (θ = 0° or 180°) are included.
pub fn uniform_null_angles(element_count: usize, spacing: f64) -> Result<Vec<f64>> {
    if element_count < 2 {
        return Err(Error::Config("need at least 2 elements".into()));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::Domain(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    let m = element_count as f64;
    let mut nulls = Vec::new();
    for k in 1usize.. {
        let mut ratio = k as f64 / (m * spacing);
        if (ratio - 1.0).abs() < 1e-9 {
            ratio = 1.0;
        }
        if ratio > 1.0 {
            break;
        }
        if k % element_count == 0 {
            continue;
        }
        let theta = ratio.acos().to_degrees();
        nulls.push(theta);
        nulls.push(180.0 - theta);
    }
    nulls.sort_by(f64::total_cmp);
    nulls.dedup();
    Ok(nulls)
}
