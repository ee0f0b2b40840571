//! Simulation budget management: stop evaluating a parameter combination
//! early once its running mean cost is worse than a percentile of the mean
//! costs of all combinations seen so far.
//!
//! The first `init_iterations` combinations always run every replication and
//! no decision is taken before `min_replications` replications. After the
//! initialization phase the percentile starts at `ub` and tightens by
//! `percentile_step` per finished combination until it reaches `lb`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbmSettings {
    pub lb: f64,
    pub ub: f64,
    pub percentile_step: f64,
    pub init_iterations: u32,
    pub replications_per_iteration: u32,
    pub min_replications: u32,
}

impl Default for SbmSettings {
    fn default() -> Self {
        SbmPreset::S4.settings()
    }
}

impl SbmSettings {
    pub fn with_bounds(lb: f64, ub: f64) -> Self {
        SbmSettings {
            lb,
            ub,
            percentile_step: 0.01,
            init_iterations: 5,
            replications_per_iteration: 20,
            min_replications: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lb > 0.0 && self.lb <= self.ub && self.ub <= 1.0) {
            return Err(Error::param(format!(
                "SBM bounds must satisfy 0 < lb <= ub <= 1, got lb {} ub {}",
                self.lb, self.ub
            )));
        }
        if !(self.percentile_step > 0.0) {
            return Err(Error::param("percentile_step must be positive"));
        }
        if self.min_replications == 0 {
            return Err(Error::param("min_replications must be at least 1"));
        }
        Ok(())
    }

    /// Percentile in force once `iterations_done` iterations have finished.
    pub fn percentile_after(&self, iterations_done: u32) -> f64 {
        let steps = iterations_done.saturating_sub(self.init_iterations) as f64;
        (self.ub - self.percentile_step * steps).max(self.lb)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SbmPreset {
    S1,
    S2,
    S3,
    S4,
}

impl SbmPreset {
    pub const ALL: [SbmPreset; 4] = [SbmPreset::S1, SbmPreset::S2, SbmPreset::S3, SbmPreset::S4];

    pub fn settings(self) -> SbmSettings {
        match self {
            SbmPreset::S1 => SbmSettings::with_bounds(0.05, 0.4),
            SbmPreset::S2 => SbmSettings::with_bounds(0.1, 0.5),
            SbmPreset::S3 => SbmSettings::with_bounds(0.02, 0.8),
            SbmPreset::S4 => SbmSettings::with_bounds(0.02, 0.2),
        }
    }
}

impl fmt::Display for SbmPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SbmPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" => Ok(SbmPreset::S1),
            "S2" => Ok(SbmPreset::S2),
            "S3" => Ok(SbmPreset::S3),
            "S4" => Ok(SbmPreset::S4),
            other => Err(Error::param(format!("unknown SBM preset `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetState {
    /// Realized mean cost of every finished iteration, skipped or not.
    pub iteration_means: Vec<f64>,
    pub iterations_done: u32,
    pub current_percentile: f64,
    pub replications_used: u64,
    // Kept sorted so threshold lookups stay O(log n).
    sorted_means: Vec<f64>,
}

impl BudgetState {
    pub fn new(settings: &SbmSettings) -> Self {
        BudgetState {
            iteration_means: Vec::new(),
            iterations_done: 0,
            current_percentile: settings.ub,
            replications_used: 0,
            sorted_means: Vec::new(),
        }
    }

    /// Current skip threshold, if any iteration has finished.
    pub fn threshold(&self) -> Option<f64> {
        nearest_rank(&self.sorted_means, self.current_percentile)
    }
}

/// Nearest-rank percentile: the ⌈p·n⌉-th smallest value (1-based).
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("percentile of an empty sequence"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param(format!("percentile must lie in (0, 1], got {p}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(nearest_rank(&sorted, p).expect("non-empty"))
}

fn nearest_rank(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    // Guard the ceiling against products like 0.2 * 10 = 2.0000000000000004.
    let rank = ((p * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    Some(sorted[rank - 1])
}

/// Whether to drop the remaining replications of the running iteration.
///
/// `iteration_index` and `replication_index` are 1-based; `running_mean` is
/// the mean over the `replication_index` replications finished so far.
pub fn should_skip(
    state: &BudgetState,
    settings: &SbmSettings,
    iteration_index: u32,
    replication_index: u32,
    running_mean: f64,
) -> bool {
    if iteration_index <= settings.init_iterations || replication_index < settings.min_replications {
        return false;
    }
    match state.threshold() {
        Some(threshold) => running_mean > threshold,
        None => false,
    }
}

pub fn finish_iteration(state: &mut BudgetState, settings: &SbmSettings, realized_mean: f64) {
    state.iteration_means.push(realized_mean);
    let pos = state.sorted_means.partition_point(|&m| m <= realized_mean);
    state.sorted_means.insert(pos, realized_mean);
    state.iterations_done += 1;
    state.current_percentile = settings.percentile_after(state.iterations_done);
}
