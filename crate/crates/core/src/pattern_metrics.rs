//! Lobe extraction and beam metrics over a sampled [`RadiationPattern`].
//!
//! The main lobe runs from the global maximum down to the first minimum on
//! each side (clipped to the dB floor). Outside it, a lobe is a maximal run
//! of samples strictly above the floor that holds at least one local
//! maximum. Inside a run, neighbouring maxima are split into separate lobes
//! only when the minimum between them lies at least [`SPLIT_DIP_DB`] below
//! both; shallower dips are merged. Non-main lobes within
//! [`GRATING_THRESHOLD_DB`] of the main peak are grating lobes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array_model::RadiationPattern;
use crate::error::{Error, Result};

/// Minimum dip between two maxima for them to count as separate lobes.
pub const SPLIT_DIP_DB: f64 = 3.0;
/// Non-main lobes at or above this level are grating lobes.
pub const GRATING_THRESHOLD_DB: f64 = -1.0;
/// A grid-edge sample this far below the peak (relative magnitude) is a null.
const EDGE_NULL_RATIO: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LobeKind {
    Main,
    Side,
    Grating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub peak_angle_deg: f64,
    pub peak_db: f64,
    pub left_bound_deg: f64,
    pub right_bound_deg: f64,
    pub kind: LobeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LobeReport {
    pub lobes: Vec<Lobe>,
    pub side_lobe_count: usize,
    pub grating_count: usize,
    pub peak_sll_db: Option<f64>,
    pub fnbw_deg: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
struct RawLobe {
    left: usize,
    right: usize,
    peak: usize,
}

fn check_resolution(pattern: &RadiationPattern) -> Result<()> {
    if pattern.len() < 3 {
        return Err(Error::Resolution {
            samples: pattern.len(),
        });
    }
    Ok(())
}

/// Local maxima of `db[lo..=hi]`, plateau-aware, with the outside of the
/// range treated as −∞. Returns the middle index of each maximal plateau.
fn run_maxima(db: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = lo;
    for i in lo + 1..=hi + 1 {
        if i > hi || db[i] != db[start] {
            groups.push((start, i - 1));
            start = i;
        }
    }
    let mut peaks = Vec::new();
    for (g, &(a, b)) in groups.iter().enumerate() {
        let v = db[a];
        let left_ok = g == 0 || db[groups[g - 1].0] < v;
        let right_ok = g + 1 == groups.len() || db[groups[g + 1].0] < v;
        if left_ok && right_ok {
            peaks.push((a + b) / 2);
        }
    }
    peaks
}

fn argmin(db: &[f64], lo: usize, hi: usize) -> usize {
    (lo..=hi).fold(lo, |best, i| if db[i] < db[best] { i } else { best })
}

/// Lobes within `db[lo..=hi]`.
fn raw_lobes(db: &[f64], lo: usize, hi: usize, floor_db: f64) -> Vec<RawLobe> {
    let mut lobes = Vec::new();
    let mut i = lo;
    while i <= hi {
        if db[i] <= floor_db {
            i += 1;
            continue;
        }
        let lo = i;
        while i < hi && db[i + 1] > floor_db {
            i += 1;
        }
        let hi = i;
        i += 1;

        let peaks = run_maxima(db, lo, hi);
        let Some(&first) = peaks.first() else {
            continue;
        };
        let mut current = RawLobe {
            left: lo,
            right: hi,
            peak: first,
        };
        let mut last_peak = first;
        for &next in &peaks[1..] {
            let valley = argmin(db, last_peak, next);
            let dip = db[valley];
            if dip <= db[current.peak] - SPLIT_DIP_DB && dip <= db[next] - SPLIT_DIP_DB {
                current.right = valley;
                lobes.push(current);
                current = RawLobe {
                    left: valley,
                    right: hi,
                    peak: next,
                };
            } else if db[next] > db[current.peak] {
                current.peak = next;
            }
            last_peak = next;
        }
        lobes.push(current);
    }
    lobes
}

/// Index reached by walking from `from` while the samples do not rise.
fn descend(db: &[f64], from: usize, leftward: bool) -> usize {
    let mut i = from;
    if leftward {
        while i > 0 && db[i - 1] <= db[i] {
            i -= 1;
        }
    } else {
        while i + 1 < db.len() && db[i + 1] <= db[i] {
            i += 1;
        }
    }
    i
}

/// Index of the main-lobe peak: the global maximum, ties broken toward
/// broadside.
fn main_peak_index(pattern: &RadiationPattern) -> usize {
    let db = pattern.db();
    let angles = pattern.angles_deg();
    let max = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..db.len())
        .filter(|&i| db[i] >= max - 1e-9)
        .min_by(|&a, &b| {
            (angles[a] - 90.0)
                .abs()
                .total_cmp(&(angles[b] - 90.0).abs())
        })
        .unwrap_or(0)
}

/// Splits the pattern into classified lobes, in angular order.
pub fn find_lobes(pattern: &RadiationPattern, floor_db: f64) -> Result<Vec<Lobe>> {
    check_resolution(pattern)?;
    if !(floor_db < -SPLIT_DIP_DB) {
        return Err(Error::Config(format!(
            "lobe floor must be below -{SPLIT_DIP_DB} dB, got {floor_db}"
        )));
    }
    let db = pattern.db();
    let angles = pattern.angles_deg();
    let peak = main_peak_index(pattern);
    let (first_left, first_right) = (descend(db, peak, true), descend(db, peak, false));
    let mut left = peak;
    while left > first_left && db[left - 1] > floor_db {
        left -= 1;
    }
    let mut right = peak;
    while right < first_right && db[right + 1] > floor_db {
        right += 1;
    }
    // side lobes bordering a first minimum share it as their bound
    let mut raw = Vec::new();
    if first_left > 0 {
        raw.extend(raw_lobes(db, 0, first_left - 1, floor_db));
        if let Some(last) = raw.last_mut().filter(|l| l.right + 1 == first_left) {
            last.right = first_left;
        }
    }
    let main_lobe = Some(raw.len());
    raw.push(RawLobe { left, right, peak });
    if first_right + 1 < db.len() {
        let mut outer = raw_lobes(db, first_right + 1, db.len() - 1, floor_db);
        if let Some(first) = outer.first_mut().filter(|l| l.left == first_right + 1) {
            first.left = first_right;
        }
        raw.extend(outer);
    }

    Ok(raw
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let peak_db = db[l.peak];
            let kind = if Some(k) == main_lobe {
                LobeKind::Main
            } else if peak_db >= GRATING_THRESHOLD_DB {
                LobeKind::Grating
            } else {
                LobeKind::Side
            };
            Lobe {
                peak_angle_deg: angles[l.peak],
                peak_db,
                left_bound_deg: angles[l.left],
                right_bound_deg: angles[l.right],
                kind,
            }
        })
        .collect())
}

/// Number of non-main lobes, grating lobes included.
pub fn count_side_lobes(pattern: &RadiationPattern, floor_db: f64) -> Result<usize> {
    Ok(find_lobes(pattern, floor_db)?
        .iter()
        .filter(|l| l.kind != LobeKind::Main)
        .count())
}

/// Highest non-main lobe peak in dB, if there is any non-main lobe.
pub fn peak_sll(pattern: &RadiationPattern, floor_db: f64) -> Result<Option<f64>> {
    Ok(peak_sll_of(&find_lobes(pattern, floor_db)?))
}

fn peak_sll_of(lobes: &[Lobe]) -> Option<f64> {
    lobes
        .iter()
        .filter(|l| l.kind != LobeKind::Main)
        .map(|l| l.peak_db)
        .reduce(f64::max)
}

/// Sub-sample position of a power minimum at `i` via a parabola through
/// `i-1, i, i+1`.
fn refine_minimum(pattern: &RadiationPattern, i: usize) -> f64 {
    let angles = pattern.angles_deg();
    let m = pattern.magnitude();
    let (p0, p1, p2) = (m[i - 1].powi(2), m[i].powi(2), m[i + 1].powi(2));
    let denom = p0 - 2.0 * p1 + p2;
    if denom <= 0.0 {
        return angles[i];
    }
    let offset = (0.5 * (p0 - p2) / denom).clamp(-1.0, 1.0);
    if offset < 0.0 {
        angles[i] + offset * (angles[i] - angles[i - 1])
    } else {
        angles[i] + offset * (angles[i + 1] - angles[i])
    }
}

/// First minimum walking from `peak` in direction `step` (±1), as an angle.
fn first_minimum(pattern: &RadiationPattern, peak: usize, leftward: bool) -> Option<f64> {
    let m = pattern.magnitude();
    let n = m.len();
    let max = m.iter().copied().fold(0.0_f64, f64::max);
    let mut i = peak;
    loop {
        let next = if leftward {
            i.checked_sub(1)
        } else {
            (i + 1 < n).then_some(i + 1)
        };
        match next {
            Some(j) if m[j] <= m[i] => i = j,
            Some(_) => return Some(refine_minimum(pattern, i)),
            None => {
                // ran into the grid edge while descending
                let inner = if leftward { i + 1 } else { i.wrapping_sub(1) };
                let descending = inner < n && m[i] < m[inner];
                return (descending && m[i] <= EDGE_NULL_RATIO * max)
                    .then(|| pattern.angles_deg()[i]);
            }
        }
    }
}

/// First-null beamwidth in degrees: the separation of the first minima on
/// either side of the main-lobe peak. Absent when either side has none.
pub fn fnbw(pattern: &RadiationPattern) -> Result<Option<f64>> {
    check_resolution(pattern)?;
    let peak = main_peak_index(pattern);
    let left = first_minimum(pattern, peak, true);
    let right = first_minimum(pattern, peak, false);
    Ok(match (left, right) {
        (Some(l), Some(r)) if r > l => Some(r - l),
        _ => None,
    })
}

/// All metrics of a pattern in one pass.
pub fn analyze(pattern: &RadiationPattern, floor_db: f64) -> Result<LobeReport> {
    let lobes = find_lobes(pattern, floor_db)?;
    let side_lobe_count = lobes.iter().filter(|l| l.kind != LobeKind::Main).count();
    let grating_count = lobes.iter().filter(|l| l.kind == LobeKind::Grating).count();
    let peak_sll_db = peak_sll_of(&lobes);
    let fnbw_deg = fnbw(pattern)?;
    Ok(LobeReport {
        lobes,
        side_lobe_count,
        grating_count,
        peak_sll_db,
        fnbw_deg,
    })
}

/// Flat metrics record, serialized as `key=value` lines:
///
/// ```text
/// elements=10
/// spacing=0.5
/// side_lobe_count=8
/// peak_sll_db=-12.97...
/// fnbw_deg=23.07...
/// grating_count=0
/// ```
///
/// Absent values are written as `none`. Numbers use shortest round-trip
/// decimals, so parsing a record reproduces it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub elements: Option<usize>,
    pub spacing: Option<f64>,
    pub side_lobe_count: usize,
    pub peak_sll_db: Option<f64>,
    pub fnbw_deg: Option<f64>,
    pub grating_count: usize,
}

impl MetricsRecord {
    pub fn from_report(report: &LobeReport, elements: Option<usize>, spacing: Option<f64>) -> Self {
        Self {
            elements,
            spacing,
            side_lobe_count: report.side_lobe_count,
            peak_sll_db: report.peak_sll_db,
            fnbw_deg: report.fnbw_deg,
            grating_count: report.grating_count,
        }
    }
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

impl fmt::Display for MetricsRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "elements={}", opt(&self.elements))?;
        writeln!(f, "spacing={}", opt(&self.spacing))?;
        writeln!(f, "side_lobe_count={}", self.side_lobe_count)?;
        writeln!(f, "peak_sll_db={}", opt(&self.peak_sll_db))?;
        writeln!(f, "fnbw_deg={}", opt(&self.fnbw_deg))?;
        writeln!(f, "grating_count={}", self.grating_count)
    }
}

impl FromStr for MetricsRecord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        fn field<T: FromStr>(key: &str, raw: &str) -> Result<Option<T>> {
            if raw == "none" {
                return Ok(None);
            }
            raw.parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("{key}: cannot parse {raw:?}")))
        }
        let mut rec = MetricsRecord {
            elements: None,
            spacing: None,
            side_lobe_count: 0,
            peak_sll_db: None,
            fnbw_deg: None,
            grating_count: 0,
        };
        for line in s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {line:?}")))?;
            let (key, raw) = (key.trim(), raw.trim());
            match key {
                "elements" => rec.elements = field(key, raw)?,
                "spacing" => rec.spacing = field(key, raw)?,
                "side_lobe_count" => rec.side_lobe_count = field(key, raw)?.unwrap_or(0),
                "peak_sll_db" => rec.peak_sll_db = field(key, raw)?,
                "fnbw_deg" => rec.fnbw_deg = field(key, raw)?,
                "grating_count" => rec.grating_count = field(key, raw)?.unwrap_or(0),
                other => return Err(Error::Config(format!("unknown metrics key {other:?}"))),
            }
        }
        Ok(rec)
    }
}
