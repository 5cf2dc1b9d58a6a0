//! Quantities measured on configurations and completed runs.

mod audit;
mod glimm;
mod lipschitz;
mod residual;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wft::History;

pub use audit::{
    glimm_monitor, glimm_series, glimm_wtv_equivalence, interaction_constant_audit, CategoryAudit,
    Equivalence, GlimmPoint, GlimmSeries, InteractionAudit, AUDIT_FLOOR,
};
pub use glimm::{
    glimm, weighted_tv, weighted_tv_fronts, weighted_tv_profile, GlimmBreakdown, GlimmWeights,
    WeightedTv,
};
pub use lipschitz::{
    lipschitz_time_moduli, trace, trace_l1_difference, traces, uniform_pairs, uniform_times,
    LipschitzModuli, TraceSample, TraceSeries,
};
pub use residual::{
    energy, entropy_residual, residuals, run_window, weak_residual, Residuals, TestGrid, Window,
};

/// What [`diagnose`] computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub weights: GlimmWeights,
    /// Monotonicity tolerance relative to `|Υ(0)|`.
    pub glimm_rel_tol: f64,
    /// Cap on the stored Glimm points.
    pub glimm_points: usize,
    pub grid: TestGrid,
    /// Number of time steps for the Lipschitz pairs and the traces.
    pub time_samples: usize,
    /// Signed offsets from the interface.
    pub trace_offsets: Vec<f64>,
    /// Sample count for the Glimm/WTV ratio.
    pub equivalence_samples: usize,
    /// Skips the weak and entropy residuals.
    pub skip_residuals: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            weights: GlimmWeights::default(),
            glimm_rel_tol: 1e-12,
            glimm_points: 2000,
            grid: TestGrid::default(),
            time_samples: 50,
            trace_offsets: vec![-0.1, -0.05, 0.05, 0.1],
            equivalence_samples: 20,
            skip_residuals: false,
        }
    }
}

impl DiagnosticsConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.weights.violations();
        out.extend(self.grid.violations());
        if !(self.glimm_rel_tol >= 0.0) {
            out.push("diagnostics.glimm_rel_tol must be nonnegative".into());
        }
        if self.time_samples == 0 {
            out.push("diagnostics.time_samples must be at least 1".into());
        }
        if self
            .trace_offsets
            .iter()
            .any(|o| *o == 0.0 || !o.is_finite())
        {
            out.push("diagnostics.trace_offsets must be finite and nonzero".into());
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub glimm_series: Option<GlimmSeries>,
    pub equivalence: Option<Equivalence>,
    pub interaction_audit: Option<InteractionAudit>,
    pub residuals: Option<Residuals>,
    pub lipschitz: LipschitzModuli,
    pub traces: Vec<TraceSeries>,
}

/// Runs every diagnostic on a completed run. Parts that do not apply (no
/// monitor, no interactions, no interface) are left empty.
pub fn diagnose(history: &History, cfg: &DiagnosticsConfig) -> Result<DiagnosticsReport> {
    cfg.validate()?;
    let glimm_series = glimm_series(history, cfg.glimm_rel_tol, cfg.glimm_points).ok();
    let equivalence = glimm_wtv_equivalence(history, &cfg.weights, cfg.equivalence_samples).ok();
    let interaction_audit = interaction_constant_audit(&history.records).ok();
    let residuals = if cfg.skip_residuals {
        None
    } else {
        Some(residuals(history, &cfg.grid)?)
    };
    let lipschitz =
        lipschitz_time_moduli(history, &uniform_pairs(history.t_end, cfg.time_samples))?;
    let traces = if history.interface_paths.is_empty() || cfg.trace_offsets.is_empty() {
        Vec::new()
    } else {
        traces(
            history,
            &cfg.trace_offsets,
            &uniform_times(history.t_end, cfg.time_samples),
        )?
    };
    Ok(DiagnosticsReport {
        glimm_series,
        equivalence,
        interaction_audit,
        residuals,
        lipschitz,
        traces,
    })
}
