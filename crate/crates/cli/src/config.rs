//! Run configuration: TOML in, validated [`RunConfig`] out.

use std::fs;
use std::path::{Path, PathBuf};

use congestion_core::diagnostics::{DiagnosticsConfig, GlimmWeights};
use congestion_core::limit::{RhoRule, SweepConfig};
use congestion_core::scenarios::{build_datum, PerturbationSpec, ScenarioSpec};
use congestion_core::{ClassifierThresholds, EosParams, SimConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{} is invalid:\n  - {}", path.display(), violations.join("\n  - "))]
    Invalid {
        path: PathBuf,
        violations: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Artifact {
    Csv,
    Json,
    Svg,
}

/// Which artifact kinds to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Emit {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg: false,
        }
    }
}

impl Emit {
    pub fn from_list(list: &[Artifact]) -> Self {
        Self {
            csv: list.contains(&Artifact::Csv),
            json: list.contains(&Artifact::Json),
            svg: list.contains(&Artifact::Svg),
        }
    }

    /// Parses a comma separated list such as `csv,json,svg`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut list = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            list.push(match part {
                "csv" => Artifact::Csv,
                "json" => Artifact::Json,
                "svg" => Artifact::Svg,
                other => {
                    return Err(format!(
                        "unknown artifact kind `{other}` (expected csv, json or svg)"
                    ))
                }
            });
        }
        Ok(Self::from_list(&list))
    }
}

fn default_delta0() -> f64 {
    0.1
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_emit() -> Vec<Artifact> {
    vec![Artifact::Csv, Artifact::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Strictly decreasing.
    pub eps_values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default = "default_dir")]
    dir: PathBuf,
    #[serde(default = "default_emit")]
    emit: Vec<Artifact>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            emit: default_emit(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    eos: EosParams,
    thresholds: Option<ClassifierThresholds>,
    scenario: ScenarioSpec,
    #[serde(default)]
    perturbation: PerturbationSpec,
    #[serde(default)]
    sim: SimConfig,
    #[serde(default)]
    rho_rule: RhoRule,
    #[serde(default)]
    weights: GlimmWeights,
    #[serde(default)]
    diagnostics: DiagnosticsConfig,
    #[serde(default = "default_delta0")]
    delta0: f64,
    sweep: Option<SweepSection>,
    #[serde(default)]
    output: OutputSection,
}

/// A parsed and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub eos: EosParams,
    pub thresholds: ClassifierThresholds,
    pub scenario: ScenarioSpec,
    pub perturbation: PerturbationSpec,
    /// `sim.rho` is used only when `explicit_rho` is set.
    pub sim: SimConfig,
    pub explicit_rho: bool,
    pub rho_rule: RhoRule,
    pub weights: GlimmWeights,
    /// Carries `weights` as well.
    pub diagnostics: DiagnosticsConfig,
    /// Half-width of the interface speed band.
    pub delta0: f64,
    pub sweep: Option<SweepSection>,
    pub output: PathBuf,
    pub emit: Emit,
}

/// Free band up to 0.9 κ, congested band from 1.1 κ.
pub fn default_thresholds(kappa: f64) -> ClassifierThresholds {
    ClassifierThresholds {
        pf_lo: 1e-3 * kappa,
        pf_hi: 0.9 * kappa,
        pc_lo: 1.1 * kappa,
        pc_hi: 1e3 * kappa,
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Top-level and flattened tables report unknown keys at the table start;
/// point at the key itself when it can be found.
fn unknown_key_line(text: &str, message: &str, from: usize) -> Option<usize> {
    let key = message.strip_prefix("unknown field `")?.split('`').next()?;
    let first = line_column(text, from).0;
    text.lines().enumerate().skip(first - 1).find_map(|(k, l)| {
        let rest = l.trim_start().strip_prefix(key)?;
        rest.trim_start().starts_with(['=', '.']).then_some(k + 1)
    })
}

fn has_key(table: &toml::Table, section: &str, key: &str) -> bool {
    table
        .get(section)
        .and_then(|v| v.as_table())
        .is_some_and(|t| t.contains_key(key))
}

impl RunConfig {
    /// Parses TOML text; `path` is only used in messages.
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let parse_err = |e: toml::de::Error| {
            let start = e.span().map_or(0, |s| s.start);
            let (line, column) = unknown_key_line(text, e.message(), start)
                .map_or_else(|| line_column(text, start), |l| (l, 1));
            ConfigError::Parse {
                path: path.to_path_buf(),
                line,
                column,
                message: e.message().to_string(),
            }
        };
        let table: toml::Table = toml::from_str(text).map_err(parse_err)?;
        let file: FileConfig = toml::from_str(text).map_err(parse_err)?;

        let mut diagnostics = file.diagnostics;
        diagnostics.weights = file.weights;
        let cfg = RunConfig {
            thresholds: file
                .thresholds
                .unwrap_or_else(|| default_thresholds(file.eos.kappa)),
            eos: file.eos,
            scenario: file.scenario,
            perturbation: file.perturbation,
            sim: file.sim,
            explicit_rho: has_key(&table, "sim", "rho"),
            rho_rule: file.rho_rule,
            weights: file.weights,
            diagnostics,
            delta0: file.delta0,
            sweep: file.sweep,
            output: file.output.dir,
            emit: Emit::from_list(&file.output.emit),
        };
        let mut violations = cfg.violations();
        if has_key(&table, "diagnostics", "weights") {
            violations.insert(
                0,
                "diagnostics.weights: set the Glimm weights in the [weights] table".into(),
            );
        }
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid {
                path: path.to_path_buf(),
                violations,
            })
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    /// The ε values this configuration runs: the sweep list, or `eos.eps`.
    pub fn eps_values(&self) -> Vec<f64> {
        match &self.sweep {
            Some(s) => s.eps_values.clone(),
            None => vec![self.eos.eps],
        }
    }

    pub fn rho(&self, eps: f64) -> f64 {
        if self.explicit_rho {
            self.sim.rho
        } else {
            self.rho_rule.rho(eps, self.scenario.delta)
        }
    }

    /// The same settings in the form used by the sweep harness.
    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            eps_values: self.eps_values(),
            rho_rule: if self.explicit_rho {
                RhoRule::Fixed { rho: self.sim.rho }
            } else {
                self.rho_rule
            },
            scenario: self.scenario.clone(),
            perturbation: self.perturbation.clone(),
            t_final: self.sim.t_final,
            eos: self.eos,
            sim: self.sim,
            diagnostics: self.diagnostics.clone(),
        }
    }

    /// Every violated invariant, one message each.
    pub fn violations(&self) -> Vec<String> {
        let kappa = self.eos.kappa;
        let mut out = self.eos.violations();
        out.extend(self.thresholds.violations(kappa));
        out.extend(self.scenario.violations(kappa));
        out.extend(self.perturbation.violations());
        out.extend(self.sim.violations());
        out.extend(self.diagnostics.violations());
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            out.push(format!("delta0 must be positive (got {})", self.delta0));
        }
        if self.sweep.is_none() && self.eos.eps == 0.0 {
            out.push("eos.eps must be positive for a run".into());
        }
        // the harness repeats the eos, sim and diagnostics checks
        out.extend(
            self.sweep_config()
                .violations()
                .into_iter()
                .filter(|v| v.starts_with("sweep.eps_values") || v.starts_with("sweep.rho_rule")),
        );
        if self.explicit_rho && self.sweep.as_ref().is_some_and(|s| s.eps_values.len() > 1) {
            out.push(
                "sim.rho: a fixed rho does not shrink with eps; drop it and use rho_rule".into(),
            );
        }
        out.extend(output_violations(&self.output));
        if out.is_empty() {
            // data that cannot be built (budget, ordering) is a configuration error too
            for eps in self.eps_values() {
                if let Err(e) =
                    build_datum(&self.scenario, &self.perturbation, &self.eos.with_eps(eps))
                {
                    out.push(format!("scenario at eps = {eps:e}: {e}"));
                }
            }
        }
        out
    }
}

fn output_violations(dir: &Path) -> Vec<String> {
    let mut probe = dir;
    loop {
        if probe.exists() {
            break;
        }
        match probe.parent() {
            Some(p) if !p.as_os_str().is_empty() => probe = p,
            _ => return Vec::new(),
        }
    }
    match fs::metadata(probe) {
        Ok(m) if !m.is_dir() => vec![format!(
            "output.dir: {} is not a directory",
            probe.display()
        )],
        Ok(m) if m.permissions().readonly() => {
            vec![format!("output.dir: {} is read-only", probe.display())]
        }
        Ok(_) => Vec::new(),
        Err(e) => vec![format!("output.dir: {}: {e}", probe.display())],
    }
}
