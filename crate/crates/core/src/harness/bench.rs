//! Experiment suites: side-lobe counts and FNBW of uniform arrays next to
//! the published values, and next-fit against optimal packing.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::{pattern, AngleGrid, ArrayGeometry, Excitation, DEFAULT_FLOOR_DB};
use crate::error::{Error, Result};
use crate::packing::{next_fit, optimal_packing, PackingInstance};
use crate::pattern_metrics::analyze;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Computed,
    PaperReported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub label: String,
    pub element_count: usize,
    pub spacing: f64,
    pub side_lobe_count: Option<usize>,
    pub fnbw_deg: Option<f64>,
    pub peak_sll_db: Option<f64>,
    pub source: Source,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingRow {
    pub items: usize,
    pub instances: u64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Instances where next-fit used more than twice the optimum.
    pub bound_violations: u64,
}

/// Reported side-lobe counts: (table, elements, d/λ, count).
pub const REPORTED_LOBES: [(&str, usize, f64, Option<usize>); 10] = [
    ("ahcoa-table", 10, 1.1, Some(18)),
    ("ahcoa-table", 10, 0.6, Some(10)),
    ("ahcoa-table", 10, 0.5, Some(8)),
    ("ahcoa-table", 11, 0.5, Some(11)),
    ("ahcoa-table", 11, 0.3, Some(6)),
    ("ahcoa-table", 10, 0.1, None),
    ("alo-table", 10, 0.5, Some(10)),
    ("alo-table", 20, 0.5, Some(18)),
    ("alo-table", 30, 0.5, Some(26)),
    ("alo-table", 40, 0.5, Some(36)),
];

/// Reported first-null beamwidths of optimized arrays at d/λ = 0.5.
pub const REPORTED_FNBW: [(usize, f64); 4] = [(10, 42.22), (20, 22.16), (30, 18.1), (40, 11.08)];

fn uniform_row(label: &str, elements: usize, spacing: f64) -> Result<BenchRow> {
    let geometry = ArrayGeometry::uniform(elements, spacing)?;
    let p = pattern(
        &geometry,
        &Excitation::uniform(elements),
        &AngleGrid::default(),
        DEFAULT_FLOOR_DB,
    )?;
    let report = analyze(&p, DEFAULT_FLOOR_DB)?;
    Ok(BenchRow {
        label: label.to_string(),
        element_count: elements,
        spacing,
        side_lobe_count: Some(report.side_lobe_count),
        fnbw_deg: report.fnbw_deg,
        peak_sll_db: report.peak_sll_db,
        source: Source::Computed,
        note: "uniform excitation".to_string(),
    })
}

/// Analytic FNBW of a uniform broadside array, when its first nulls exist.
pub fn uniform_fnbw_formula(elements: usize, spacing: f64) -> Option<f64> {
    let r = 1.0 / (elements as f64 * spacing);
    (r <= 1.0).then(|| 2.0 * (90.0 - r.acos().to_degrees()))
}

pub fn paper_lobes() -> Result<Vec<BenchRow>> {
    let computed: Vec<BenchRow> = REPORTED_LOBES
        .par_iter()
        .map(|&(label, m, s, _)| uniform_row(label, m, s))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (row, &(label, m, s, reported)) in computed.into_iter().zip(&REPORTED_LOBES) {
        let counted = row.side_lobe_count;
        rows.push(row);
        let Some(reported) = reported else {
            continue;
        };
        let note = if Some(reported) == counted {
            "matches computed".to_string()
        } else {
            format!(
                "mismatch: computed {}",
                counted.map_or("none".into(), |c| c.to_string())
            )
        };
        rows.push(BenchRow {
            label: label.to_string(),
            element_count: m,
            spacing: s,
            side_lobe_count: Some(reported),
            fnbw_deg: None,
            peak_sll_db: None,
            source: Source::PaperReported,
            note,
        });
    }
    Ok(rows)
}

pub fn paper_fnbw() -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &(m, reported) in &REPORTED_FNBW {
        let mut row = uniform_row("fnbw", m, 0.5)?;
        if let Some(f) = uniform_fnbw_formula(m, 0.5) {
            row.note = format!("uniform excitation; analytic {f:.4}");
        }
        rows.push(row);
        rows.push(BenchRow {
            label: "fnbw".to_string(),
            element_count: m,
            spacing: 0.5,
            side_lobe_count: None,
            fnbw_deg: Some(reported),
            peak_sll_db: None,
            source: Source::PaperReported,
            note: "optimized geometry, not published".to_string(),
        });
    }
    Ok(rows)
}

/// Item sizes of the exhaustive packing sweep, in tenths of the capacity.
pub const PACKING_SIZES: usize = 9;

fn packing_sizes(tenths: &[u8]) -> Vec<f64> {
    tenths.iter().map(|&t| f64::from(t) / 10.0).collect()
}

/// Compares next-fit with the optimum on every sequence of 1..=`max_items`
/// items drawn from {0.1, …, 0.9} with capacity 1. The optimum is computed
/// once per multiset.
pub fn packing_sweep(max_items: usize) -> Result<Vec<PackingRow>> {
    (1..=max_items).map(packing_sweep_for).collect()
}

fn packing_sweep_for(n: usize) -> Result<PackingRow> {
    let mut optimum: HashMap<[u8; PACKING_SIZES], usize> = HashMap::new();
    let mut counts = [0u8; PACKING_SIZES];
    multisets(n, 0, &mut counts, &mut |counts| {
        let tenths: Vec<u8> = (0..PACKING_SIZES)
            .flat_map(|k| std::iter::repeat_n(k as u8 + 1, counts[k] as usize))
            .collect();
        let instance = PackingInstance::new(packing_sizes(&tenths), 1.0)?;
        optimum.insert(*counts, optimal_packing(&instance)?.used_bins);
        Ok(())
    })?;

    let total = (PACKING_SIZES as u64).pow(n as u32);
    let (max_ratio, sum_ratio, violations) = (0..total)
        .into_par_iter()
        .map(|code| -> Result<(f64, f64, u64)> {
            let mut tenths = vec![0u8; n];
            let mut counts = [0u8; PACKING_SIZES];
            let mut c = code;
            for t in tenths.iter_mut() {
                let k = (c % PACKING_SIZES as u64) as usize;
                c /= PACKING_SIZES as u64;
                *t = k as u8 + 1;
                counts[k] += 1;
            }
            let nf = next_fit(&PackingInstance::new(packing_sizes(&tenths), 1.0)?)?.used_bins;
            let opt = optimum[&counts];
            let ratio = nf as f64 / opt as f64;
            Ok((ratio, ratio, u64::from(nf > 2 * opt)))
        })
        .try_reduce(
            || (0.0, 0.0, 0),
            |a, b| Ok((a.0.max(b.0), a.1 + b.1, a.2 + b.2)),
        )?;
    Ok(PackingRow {
        items: n,
        instances: total,
        max_ratio,
        mean_ratio: sum_ratio / total as f64,
        bound_violations: violations,
    })
}

fn multisets(
    remaining: usize,
    k: usize,
    counts: &mut [u8; PACKING_SIZES],
    visit: &mut impl FnMut(&[u8; PACKING_SIZES]) -> Result<()>,
) -> Result<()> {
    if k + 1 == PACKING_SIZES {
        counts[k] = remaining as u8;
        visit(counts)?;
        counts[k] = 0;
        return Ok(());
    }
    for c in 0..=remaining {
        counts[k] = c as u8;
        multisets(remaining - c, k + 1, counts, visit)?;
    }
    counts[k] = 0;
    Ok(())
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row).map_err(|e| Error::Io {
            path: "<bench output>".into(),
            source: std::io::Error::other(e),
        })?;
    }
    out.flush().map_err(|e| Error::io("<bench output>", e))
}
