//! Runs and sweeps, and the artifacts they leave behind.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use congestion_core::diagnostics::{diagnose, glimm_monitor, DiagnosticsReport};
use congestion_core::eos::classify;
use congestion_core::limit::{convergence_report, ConvergenceReport, SweepEntry, SweepRun};
use congestion_core::scenarios::{
    build_datum, build_single_interface_limit, BudgetReport, ScenarioKind,
};
use congestion_core::wft::{run_monitored, History, SimConfig};
use congestion_core::{Datum, Error as CoreError, StateClass};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::RunConfig;
use crate::svg::xt_diagram;

/// Bumped whenever a JSON layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("cannot serialize {}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("the configuration has no [sweep] table")]
    NoSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Build,
    Run,
    Diagnose,
}

/// What survived a failed attempt.
#[derive(Debug, Clone)]
pub struct Failure {
    pub stage: Stage,
    pub error: CoreError,
    pub datum: Option<Datum>,
    pub history: Option<History>,
}

#[derive(Debug, Clone)]
pub struct Attempt {
    pub eps: f64,
    pub rho: f64,
    pub result: Result<SweepRun, Failure>,
}

impl Attempt {
    pub fn history(&self) -> Option<&History> {
        match &self.result {
            Ok(r) => Some(&r.history),
            Err(f) => f.history.as_ref(),
        }
    }

    pub fn diagnostics(&self) -> Option<&DiagnosticsReport> {
        self.result.as_ref().ok().map(|r| &r.diagnostics)
    }

    fn into_entry(self) -> SweepEntry {
        SweepEntry {
            eps: self.eps,
            rho: self.rho,
            outcome: self.result.map_err(|f| f.error),
        }
    }
}

/// Builds, runs (with the Glimm monitor) and diagnoses one ε, keeping
/// whatever was produced before a failure.
pub fn attempt(cfg: &RunConfig, eps: f64) -> Attempt {
    let rho = cfg.rho(eps);
    let eos = cfg.eos.with_eps(eps);
    let fail = |stage, error, datum, history| Attempt {
        eps,
        rho,
        result: Err(Failure {
            stage,
            error,
            datum,
            history,
        }),
    };
    let built = match build_datum(&cfg.scenario, &cfg.perturbation, &eos) {
        Ok(b) => b,
        Err(e) => return fail(Stage::Build, e, None, None),
    };
    let sim = SimConfig { rho, ..cfg.sim };
    let monitor = glimm_monitor(cfg.weights);
    let history = match run_monitored(&built.datum, &sim, &eos, Some(&monitor)) {
        Ok(h) => h,
        Err(e) => return fail(Stage::Run, e, Some(built.datum), None),
    };
    if !history.complete {
        let e = CoreError::InsufficientData(format!(
            "stopped at t = {} after {} interactions (sim.max_interactions)",
            history.t_end,
            history.records.len()
        ));
        return fail(Stage::Run, e, Some(built.datum), Some(history));
    }
    match diagnose(&history, &cfg.diagnostics) {
        Ok(diagnostics) => Attempt {
            eps,
            rho,
            result: Ok(SweepRun {
                eps,
                rho,
                datum: built.datum,
                budget: built.budget,
                history,
                diagnostics,
            }),
        },
        Err(e) => fail(Stage::Diagnose, e, Some(built.datum), Some(history)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlimmCheck {
    pub verdict: Verdict,
    pub initial: Option<f64>,
    pub max_increase: Option<f64>,
    pub tolerance: Option<f64>,
    pub violations: Option<usize>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandCheck {
    pub verdict: Verdict,
    pub lambda_bar: Option<f64>,
    pub delta0: f64,
    pub min_slope: Option<f64>,
    pub max_slope: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassCounts {
    pub free: usize,
    pub congested: usize,
    pub intermediate: usize,
}

/// Contents of a per-run `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub kind: &'static str,
    pub eps: f64,
    pub rho: f64,
    pub seed: u64,
    pub complete: bool,
    /// Some artifacts are missing or describe an unfinished run.
    pub partial: bool,
    pub failed_stage: Option<Stage>,
    pub error: Option<String>,
    pub t_end: Option<f64>,
    pub interactions: usize,
    pub segments: usize,
    pub glimm: GlimmCheck,
    pub speed_band: BandCheck,
    pub budget: Option<BudgetReport>,
    /// Classification of the initial states.
    pub initial_states: ClassCounts,
}

/// Limit interface speed of a single-interface scenario.
pub fn lambda_bar(cfg: &RunConfig) -> Option<f64> {
    match &cfg.scenario.kind {
        ScenarioKind::SingleInterface(s) => build_single_interface_limit(s, &cfg.eos.with_eps(0.0))
            .ok()
            .map(|l| l.lambda_bar),
        _ => None,
    }
}

fn glimm_check(a: &Attempt) -> GlimmCheck {
    let unavailable = |note: &str| GlimmCheck {
        verdict: Verdict::Unavailable,
        initial: None,
        max_increase: None,
        tolerance: None,
        violations: None,
        note: Some(note.into()),
    };
    let Some(d) = a.diagnostics() else {
        return unavailable("run did not complete");
    };
    match &d.glimm_series {
        Some(g) => GlimmCheck {
            verdict: if g.monotone {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            initial: Some(g.initial),
            max_increase: Some(g.max_increase),
            tolerance: Some(g.tolerance),
            violations: Some(g.violations),
            note: None,
        },
        None => unavailable("run was not monitored"),
    }
}

fn band_check(a: &Attempt, lambda_bar: Option<f64>, delta0: f64) -> BandCheck {
    let mut check = BandCheck {
        verdict: Verdict::Unavailable,
        lambda_bar,
        delta0,
        min_slope: None,
        max_slope: None,
        note: None,
    };
    let Some(lb) = lambda_bar else {
        check.note = Some("defined for single-interface scenarios".into());
        return check;
    };
    let Some(path) = a.history().and_then(|h| h.interface_paths.first()) else {
        check.note = Some("no interface trajectory".into());
        return check;
    };
    let slopes = path.slopes();
    if slopes.is_empty() {
        check.note = Some("interface trajectory has no duration".into());
        return check;
    }
    let lo = slopes.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    check.min_slope = Some(lo);
    check.max_slope = Some(hi);
    let inside = lo >= lb - delta0 && hi <= lb + delta0;
    check.verdict = if inside { Verdict::Pass } else { Verdict::Fail };
    if a.result.is_err() {
        check.note = Some("trajectory of an unfinished run".into());
    }
    check
}

fn class_counts(datum: Option<&Datum>, cfg: &RunConfig) -> ClassCounts {
    let mut c = ClassCounts::default();
    for s in datum.map_or(&[][..], |d| &d.profile.states[..]) {
        match classify(s.p, &cfg.thresholds) {
            StateClass::Free => c.free += 1,
            StateClass::Congested => c.congested += 1,
            StateClass::Intermediate => c.intermediate += 1,
        }
    }
    c
}

pub fn run_report(a: &Attempt, cfg: &RunConfig) -> RunReport {
    let history = a.history();
    let (datum, budget, failed_stage, error) = match &a.result {
        Ok(r) => (Some(&r.datum), Some(r.budget.clone()), None, None),
        Err(f) => (
            f.datum.as_ref(),
            None,
            Some(f.stage),
            Some(f.error.to_string()),
        ),
    };
    RunReport {
        schema_version: SCHEMA_VERSION,
        kind: "run",
        eps: a.eps,
        rho: a.rho,
        seed: cfg.scenario.seed,
        complete: a.result.is_ok(),
        partial: a.result.is_err(),
        failed_stage,
        error,
        t_end: history.map(|h| h.t_end),
        interactions: history.map_or(0, |h| h.records.len()),
        segments: history.map_or(0, |h| h.segments.len()),
        glimm: glimm_check(a),
        speed_band: band_check(a, lambda_bar(cfg), cfg.delta0),
        budget,
        initial_states: class_counts(datum, cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct DiagnosticsFile<'a> {
    schema_version: u32,
    eps: f64,
    rho: f64,
    diagnostics: Option<&'a DiagnosticsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRunSummary {
    pub eps: f64,
    pub rho: f64,
    pub dir: String,
    pub complete: bool,
    pub error: Option<String>,
}

/// Contents of the top-level `report.json` of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub kind: &'static str,
    pub seed: u64,
    pub complete: bool,
    pub partial: bool,
    pub runs: Vec<SweepRunSummary>,
    /// Pass only if every run completed and kept the functional monotone.
    pub glimm: Verdict,
    /// Pass only if every slope of every run lies in the band.
    pub speed_band: Verdict,
    pub lambda_bar: Option<f64>,
    pub delta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ConvergenceFile<'a> {
    schema_version: u32,
    convergence: &'a ConvergenceReport,
}

/// Everything `execute` produced, for callers that want more than files.
#[derive(Debug)]
pub struct Outcome {
    pub dir: PathBuf,
    /// One per ε (a single entry for a plain run).
    pub entries: Vec<SweepEntry>,
    pub reports: Vec<RunReport>,
    pub sweep: Option<SweepReport>,
    pub convergence: Option<ConvergenceReport>,
}

impl Outcome {
    /// True when some run failed; artifacts were still written.
    pub fn failed(&self) -> bool {
        self.reports.iter().any(|r| !r.complete)
    }
}

fn create_dir(dir: &Path) -> Result<(), ExecError> {
    fs::create_dir_all(dir).map_err(|source| ExecError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExecError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| ExecError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| ExecError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One row per front segment; floats in shortest round-trip form.
pub fn write_fronts_csv(path: &Path, history: &History) -> Result<(), ExecError> {
    let csv_err = |source| ExecError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(|source| ExecError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in history.rows() {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ExecError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_run_artifacts(
    dir: &Path,
    a: &Attempt,
    report: &RunReport,
    cfg: &RunConfig,
) -> Result<(), ExecError> {
    create_dir(dir)?;
    if let Some(h) = a.history() {
        if cfg.emit.csv {
            write_fronts_csv(&dir.join("fronts.csv"), h)?;
        }
        if cfg.emit.svg {
            let title = format!("eps = {:e}, rho = {:e}", a.eps, a.rho);
            let path = dir.join("xt.svg");
            let mut f = BufWriter::new(File::create(&path).map_err(|source| ExecError::Io {
                path: path.clone(),
                source,
            })?);
            f.write_all(xt_diagram(h, &title).as_bytes())
                .and_then(|_| f.flush())
                .map_err(|source| ExecError::Io { path, source })?;
        }
    }
    if cfg.emit.json {
        write_json(
            &dir.join("diagnostics.json"),
            &DiagnosticsFile {
                schema_version: SCHEMA_VERSION,
                eps: a.eps,
                rho: a.rho,
                diagnostics: a.diagnostics(),
            },
        )?;
    }
    // the verdicts are always written
    write_json(&dir.join("report.json"), report)
}

/// Subdirectory of one sweep run.
pub fn eps_dir_name(eps: f64) -> String {
    format!("eps_{eps:e}")
}

/// A single run at `eos.eps`, written straight into the output directory.
pub fn execute_run(cfg: &RunConfig) -> Result<Outcome, ExecError> {
    let a = attempt(cfg, cfg.eos.eps);
    if let Err(f) = &a.result {
        log::error!("run failed while {:?}: {}", f.stage, f.error);
    }
    let report = run_report(&a, cfg);
    write_run_artifacts(&cfg.output, &a, &report, cfg)?;
    Ok(Outcome {
        dir: cfg.output.clone(),
        entries: vec![a.into_entry()],
        reports: vec![report],
        sweep: None,
        convergence: None,
    })
}

/// Every ε of the sweep, one subdirectory each, plus `convergence.json` and a
/// summary `report.json` at the top.
pub fn execute_sweep(cfg: &RunConfig) -> Result<Outcome, ExecError> {
    if cfg.sweep.is_none() {
        return Err(ExecError::NoSweep);
    }
    let attempts: Vec<Attempt> = cfg
        .eps_values()
        .par_iter()
        .map(|&eps| attempt(cfg, eps))
        .collect();
    create_dir(&cfg.output)?;
    let mut reports = Vec::with_capacity(attempts.len());
    let mut runs = Vec::with_capacity(attempts.len());
    for a in &attempts {
        if let Err(f) = &a.result {
            log::error!(
                "run at eps = {:e} failed while {:?}: {}",
                a.eps,
                f.stage,
                f.error
            );
        }
        let report = run_report(a, cfg);
        let name = eps_dir_name(a.eps);
        write_run_artifacts(&cfg.output.join(&name), a, &report, cfg)?;
        runs.push(SweepRunSummary {
            eps: a.eps,
            rho: a.rho,
            dir: name,
            complete: report.complete,
            error: report.error.clone(),
        });
        reports.push(report);
    }
    let entries: Vec<SweepEntry> = attempts.into_iter().map(Attempt::into_entry).collect();
    let convergence = convergence_report(&cfg.sweep_config(), &entries, cfg.delta0);
    let complete = reports.iter().all(|r| r.complete);
    let glimm = if !complete {
        Verdict::Unavailable
    } else if reports.iter().all(|r| r.glimm.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let speed_band = match convergence.slopes_in_band {
        _ if !complete => Verdict::Unavailable,
        Some(true) => Verdict::Pass,
        Some(false) => Verdict::Fail,
        None => Verdict::Unavailable,
    };
    let sweep = SweepReport {
        schema_version: SCHEMA_VERSION,
        kind: "sweep",
        seed: cfg.scenario.seed,
        complete,
        partial: !complete,
        runs,
        glimm,
        speed_band,
        lambda_bar: convergence.lambda_bar,
        delta0: cfg.delta0,
    };
    if cfg.emit.json {
        write_json(
            &cfg.output.join("convergence.json"),
            &ConvergenceFile {
                schema_version: SCHEMA_VERSION,
                convergence: &convergence,
            },
        )?;
    }
    write_json(&cfg.output.join("report.json"), &sweep)?;
    Ok(Outcome {
        dir: cfg.output.clone(),
        entries,
        reports,
        sweep: Some(sweep),
        convergence: Some(convergence),
    })
}

/// Sweep when the configuration has a `[sweep]` table, single run otherwise.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, ExecError> {
    if cfg.sweep.is_some() {
        execute_sweep(cfg)
    } else {
        execute_run(cfg)
    }
}
