//! Time-weighted inventory levels and the overall cost per time unit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Time;

/// Cost per lot unit per time unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostRates {
    pub wip_rate: f64,
    pub fgi_rate: f64,
    /// Charged per unit per time unit of lateness.
    pub tardiness_rate: f64,
}

impl Default for CostRates {
    fn default() -> Self {
        CostRates {
            wip_rate: 0.5,
            fgi_rate: 1.0,
            tardiness_rate: 19.0,
        }
    }
}

impl CostRates {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.wip_rate && self.wip_rate < self.fgi_rate && self.fgi_rate < self.tardiness_rate) {
            return Err(Error::param(format!(
                "cost rates must satisfy 0 <= wip < fgi < tardiness, got {self:?}"
            )));
        }
        Ok(())
    }
}

pub fn overall_cost(avg_wip: f64, avg_fgi: f64, avg_backorder: f64, rates: &CostRates) -> Result<f64> {
    if avg_wip < 0.0 || avg_fgi < 0.0 || avg_backorder < 0.0 {
        return Err(Error::Contract(format!(
            "negative average level (wip {avg_wip}, fgi {avg_fgi}, backorder {avg_backorder})"
        )));
    }
    Ok(rates.wip_rate * avg_wip + rates.fgi_rate * avg_fgi + rates.tardiness_rate * avg_backorder)
}

/// Integrates a piecewise-constant level over `[warmup_end, ..)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelIntegrator {
    level: f64,
    last_change: Time,
    warmup_end: Time,
    integral: f64,
}

impl LevelIntegrator {
    pub fn new(warmup_end: Time) -> Self {
        LevelIntegrator {
            level: 0.0,
            last_change: 0.0,
            warmup_end,
            integral: 0.0,
        }
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn last_change(&self) -> Time {
        self.last_change
    }

    /// Accrues the current level up to `t`, then applies `delta`.
    pub fn record(&mut self, t: Time, delta: f64) -> Result<()> {
        self.advance(t)?;
        let next = self.level + delta;
        if next < 0.0 {
            return Err(Error::Accounting(format!(
                "level would drop to {next} at t = {t}"
            )));
        }
        self.level = next;
        Ok(())
    }

    /// Accrues the current level up to `t` without changing it.
    pub fn advance(&mut self, t: Time) -> Result<()> {
        if t < self.last_change {
            return Err(Error::Accounting(format!(
                "time went backwards: {t} < {}",
                self.last_change
            )));
        }
        if t > self.warmup_end {
            self.integral += self.level * (t - self.last_change.max(self.warmup_end));
        }
        self.last_change = t;
        Ok(())
    }

    /// Time average over `[warmup_end, horizon]`; zero for an empty span.
    pub fn average(&self, horizon: Time) -> f64 {
        let span = horizon - self.warmup_end;
        if span > 0.0 {
            self.integral / span
        } else {
            0.0
        }
    }
}
