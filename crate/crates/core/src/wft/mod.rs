//! ρ-approximate wave-front tracking.

mod engine;
mod front;
mod history;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use engine::{
    discretize_initial_datum, next_event, resolve_interaction, run, run_monitored, Event, Monitor,
    Resolution,
};
pub use front::{Front, FrontConfiguration, FrontKind};
pub use history::{
    configuration_at, sample_solution, History, InteractionRecord, InteractionRegion,
    InterfacePath, Segment, SegmentRow, WaveSummary,
};

/// Order in which simultaneous events at distinct places are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LeftToRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Rarefaction splitting size and speed accuracy.
    pub rho: f64,
    pub t_final: f64,
    pub max_interactions: usize,
    pub tie_break: TieBreak,
    /// Adjacent fronts whose speeds differ by less than this never meet.
    pub speed_tolerance: f64,
    /// Crossings closer in time than this are handled as one event.
    pub time_tolerance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            rho: 1e-3,
            t_final: 1.0,
            max_interactions: 1_000_000,
            tie_break: TieBreak::LeftToRight,
            speed_tolerance: 1e-12,
            time_tolerance: 1e-12,
        }
    }
}

impl SimConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            out.push(format!("sim.rho must be positive (got {})", self.rho));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            out.push(format!(
                "sim.t_final must be positive (got {})",
                self.t_final
            ));
        }
        if self.max_interactions == 0 {
            out.push("sim.max_interactions must be at least 1".into());
        }
        if !(self.speed_tolerance >= 0.0) {
            out.push(format!(
                "sim.speed_tolerance must be nonnegative (got {})",
                self.speed_tolerance
            ));
        }
        if !(self.time_tolerance >= 0.0) {
            out.push(format!(
                "sim.time_tolerance must be nonnegative (got {})",
                self.time_tolerance
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v.join("; ")))
        }
    }
}
