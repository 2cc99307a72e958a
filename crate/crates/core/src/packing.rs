//! One-dimensional bin packing: next-fit, an exhaustive optimum for small
//! instances, and a constraint checker.
//!
//! Capacity is checked as `load ≤ B` (with a relative tolerance of
//! [`CAPACITY_TOLERANCE`] so exact fills like 0.34 + 0.33 + 0.33 fit).

use std::fmt;

use crate::error::{Error, Result};

/// Relative slack on the capacity check to absorb float rounding.
pub const CAPACITY_TOLERANCE: f64 = 1e-9;
/// Largest instance [`optimal_packing`] will search.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct PackingInstance {
    sizes: Vec<f64>,
    capacity: f64,
}

impl PackingInstance {
    /// Item sizes must be positive and finite; oversize items are reported
    /// by the packing routines, not here.
    pub fn new(sizes: Vec<f64>, capacity: f64) -> Result<Self> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::Domain(format!(
                "capacity must be positive, got {capacity}"
            )));
        }
        if let Some(s) = sizes.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::Domain(format!(
                "item sizes must be positive, got {s}"
            )));
        }
        Ok(Self { sizes, capacity })
    }

    /// Like [`PackingInstance::new`] but admits zero-size items; used for
    /// layer construction, where a dimension may get a zero step.
    pub(crate) fn with_zero_sizes(sizes: Vec<f64>, capacity: f64) -> Result<Self> {
        if let Some(s) = sizes.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::Domain(format!(
                "item sizes must be non-negative, got {s}"
            )));
        }
        let positive: Vec<f64> = sizes.iter().map(|s| s.max(f64::MIN_POSITIVE)).collect();
        Self::new(positive, capacity)?;
        Ok(Self { sizes, capacity })
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    fn fits(&self, load: f64, size: f64) -> bool {
        load + size <= self.capacity * (1.0 + CAPACITY_TOLERANCE)
    }

    fn check_items(&self) -> Result<()> {
        for (index, &size) in self.sizes.iter().enumerate() {
            if !self.fits(0.0, size) {
                return Err(Error::InfeasibleItem {
                    index,
                    size,
                    capacity: self.capacity,
                });
            }
        }
        Ok(())
    }

    /// Volume lower bound `⌈Σ s(i) / B⌉` on the number of bins.
    pub fn volume_bound(&self) -> usize {
        let total: f64 = self.sizes.iter().sum();
        (total / self.capacity - CAPACITY_TOLERANCE).ceil().max(0.0) as usize
    }
}

/// Items per bin (the `x_ij` incidence), with the recorded loads.
///
/// Produced solutions index bins contiguously from 0 and never leave a bin
/// empty, so `used_bins == bins.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct PackingSolution {
    pub bins: Vec<Vec<usize>>,
    pub bin_loads: Vec<f64>,
    pub used_bins: usize,
}

impl PackingSolution {
    fn from_assignment(instance: &PackingInstance, assignment: &[usize]) -> Self {
        let k = assignment.iter().map(|b| b + 1).max().unwrap_or(0);
        let mut bins = vec![Vec::new(); k];
        let mut bin_loads = vec![0.0; k];
        for (item, &bin) in assignment.iter().enumerate() {
            bins[bin].push(item);
            bin_loads[bin] += instance.sizes[item];
        }
        Self {
            bins,
            bin_loads,
            used_bins: k,
        }
    }

    /// Item → bin map, or `None` if some item is not in exactly one bin.
    pub fn assignment(&self, item_count: usize) -> Option<Vec<usize>> {
        let mut out = vec![usize::MAX; item_count];
        for (b, items) in self.bins.iter().enumerate() {
            for &i in items {
                if i >= item_count || out[i] != usize::MAX {
                    return None;
                }
                out[i] = b;
            }
        }
        out.iter().all(|&b| b != usize::MAX).then_some(out)
    }
}

/// Single pass in item order; opens a new bin whenever the current one
/// cannot take the next item.
pub fn next_fit(instance: &PackingInstance) -> Result<PackingSolution> {
    instance.check_items()?;
    let mut bins: Vec<Vec<usize>> = Vec::new();
    let mut bin_loads: Vec<f64> = Vec::new();
    for (item, &size) in instance.sizes.iter().enumerate() {
        match bin_loads.last_mut() {
            Some(load) if instance.fits(*load, size) => {
                *load += size;
                bins.last_mut().expect("bin exists").push(item);
            }
            _ => {
                bins.push(vec![item]);
                bin_loads.push(size);
            }
        }
    }
    let used_bins = bins.len();
    Ok(PackingSolution {
        bins,
        bin_loads,
        used_bins,
    })
}

struct Search<'a> {
    instance: &'a PackingInstance,
    suffix_volume: Vec<f64>,
    assignment: Vec<usize>,
    loads: Vec<f64>,
    best_k: usize,
    best: Option<Vec<usize>>,
}

impl Search<'_> {
    // Items are placed in index order, each into an open bin or the next new
    // one, so every assignment is visited once in canonical (restricted
    // growth) form and in lexicographic order.
    fn descend(&mut self, item: usize) {
        let open = self.loads.len();
        if item == self.instance.len() {
            if open < self.best_k {
                self.best_k = open;
                self.best = Some(self.assignment.clone());
            }
            return;
        }
        let free: f64 = self.loads.iter().map(|l| self.instance.capacity - l).sum();
        let overflow = (self.suffix_volume[item] - free).max(0.0);
        let extra = (overflow / self.instance.capacity - CAPACITY_TOLERANCE)
            .ceil()
            .max(0.0) as usize;
        if open + extra >= self.best_k {
            return;
        }
        let size = self.instance.sizes[item];
        for bin in 0..=open {
            if bin == open {
                if open + 1 >= self.best_k {
                    break;
                }
                self.loads.push(size);
            } else if self.instance.fits(self.loads[bin], size) {
                self.loads[bin] += size;
            } else {
                continue;
            }
            self.assignment.push(bin);
            self.descend(item + 1);
            self.assignment.pop();
            if bin == open {
                self.loads.pop();
            } else {
                self.loads[bin] -= size;
            }
        }
    }
}

/// Minimum-bin packing by exhaustive search; among optimal packings the
/// lexicographically smallest item → bin assignment is returned.
pub fn optimal_packing(instance: &PackingInstance) -> Result<PackingSolution> {
    if instance.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::SizeLimit {
            items: instance.len(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let upper = next_fit(instance)?.used_bins;
    let mut suffix_volume = vec![0.0; instance.len() + 1];
    for i in (0..instance.len()).rev() {
        suffix_volume[i] = suffix_volume[i + 1] + instance.sizes[i];
    }
    let mut search = Search {
        instance,
        suffix_volume,
        assignment: Vec::with_capacity(instance.len()),
        loads: Vec::new(),
        best_k: upper + 1,
        best: None,
    };
    search.descend(0);
    let best = search.best.expect("next-fit bound guarantees a solution");
    Ok(PackingSolution::from_assignment(instance, &best))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Unassigned {
        item: usize,
    },
    MultiplyAssigned {
        item: usize,
    },
    UnknownItem {
        item: usize,
        bin: usize,
    },
    CapacityExceeded {
        bin: usize,
        load: f64,
        capacity: f64,
    },
    LoadMismatch {
        bin: usize,
        recorded: f64,
        actual: f64,
    },
    EmptyBin {
        bin: usize,
    },
    BinCountMismatch {
        recorded: usize,
        actual: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unassigned { item } => write!(f, "item {item} unassigned"),
            Violation::MultiplyAssigned { item } => write!(f, "item {item} multiply assigned"),
            Violation::UnknownItem { item, bin } => write!(f, "unknown item {item} in bin {bin}"),
            Violation::CapacityExceeded {
                bin,
                load,
                capacity,
            } => {
                write!(f, "capacity exceeded bin {bin} (load {load} > {capacity})")
            }
            Violation::LoadMismatch {
                bin,
                recorded,
                actual,
            } => write!(
                f,
                "bin {bin} records load {recorded}, items sum to {actual}"
            ),
            Violation::EmptyBin { bin } => write!(f, "bin {bin} is empty"),
            Violation::BinCountMismatch { recorded, actual } => {
                write!(f, "solution records {recorded} bins but uses {actual}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks single assignment, per-bin capacity, recorded loads and the bin
/// count. Reports every violation found.
pub fn validate(instance: &PackingInstance, solution: &PackingSolution) -> Validation {
    let n = instance.len();
    let mut violations = Vec::new();
    let mut seen = vec![0usize; n];
    for (bin, items) in solution.bins.iter().enumerate() {
        let mut actual = 0.0;
        for &item in items {
            if item >= n {
                violations.push(Violation::UnknownItem { item, bin });
                continue;
            }
            seen[item] += 1;
            actual += instance.sizes[item];
        }
        if items.is_empty() {
            violations.push(Violation::EmptyBin { bin });
        }
        if !instance.fits(actual, 0.0) {
            violations.push(Violation::CapacityExceeded {
                bin,
                load: actual,
                capacity: instance.capacity,
            });
        }
        match solution.bin_loads.get(bin) {
            Some(&recorded)
                if (recorded - actual).abs() <= CAPACITY_TOLERANCE * instance.capacity => {}
            recorded => violations.push(Violation::LoadMismatch {
                bin,
                recorded: recorded.copied().unwrap_or(f64::NAN),
                actual,
            }),
        }
    }
    for (item, &count) in seen.iter().enumerate() {
        match count {
            0 => violations.push(Violation::Unassigned { item }),
            1 => {}
            _ => violations.push(Violation::MultiplyAssigned { item }),
        }
    }
    let nonempty = solution.bins.iter().filter(|b| !b.is_empty()).count();
    if solution.used_bins != nonempty || solution.bin_loads.len() != solution.bins.len() {
        violations.push(Violation::BinCountMismatch {
            recorded: solution.used_bins,
            actual: nonempty,
        });
    }
    Validation { violations }
}
