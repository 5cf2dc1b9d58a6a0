//! ε-sweeps, convergence measurements and the hard-congestion limit rebuilt
//! from free-side traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    diagnose, glimm_monitor, trace, uniform_times, weighted_tv_fronts, DiagnosticsConfig,
    DiagnosticsReport, TraceSeries,
};
use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::profile::Datum;
use crate::scenarios::{
    build_datum, in_function, BudgetReport, PerturbationSpec, ScenarioKind, ScenarioSpec,
};
use crate::wft::{
    configuration_at, run_monitored, sample_solution, History, InteractionRegion, InterfacePath,
    SimConfig,
};

/// How the front-tracking accuracy follows ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoRule {
    /// `ρ = factor · ε · δ`.
    Proportional { factor: f64 },
    /// One `ρ` for every ε; only valid for a single-ε sweep.
    Fixed { rho: f64 },
}

impl Default for RhoRule {
    fn default() -> Self {
        RhoRule::Proportional { factor: 0.1 }
    }
}

impl RhoRule {
    pub fn rho(&self, eps: f64, delta: f64) -> f64 {
        match *self {
            RhoRule::Proportional { factor } => factor * eps * delta,
            RhoRule::Fixed { rho } => rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Strictly decreasing.
    pub eps_values: Vec<f64>,
    pub rho_rule: RhoRule,
    pub scenario: ScenarioSpec,
    pub perturbation: PerturbationSpec,
    pub t_final: f64,
    /// Base law; `eps` is replaced per run.
    pub eos: EosParams,
    /// Base settings; `rho` and `t_final` are replaced per run.
    pub sim: SimConfig,
    pub diagnostics: DiagnosticsConfig,
}

impl SweepConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.eps_values.is_empty() {
            out.push("sweep.eps_values must not be empty".into());
        }
        if self.eps_values.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            out.push("sweep.eps_values must be positive".into());
        }
        if self.eps_values.windows(2).any(|w| !(w[1] < w[0])) {
            out.push("sweep.eps_values must be strictly decreasing".into());
        }
        match self.rho_rule {
            RhoRule::Proportional { factor } if !(factor > 0.0 && factor.is_finite()) => out.push(
                format!("sweep.rho_rule.factor must be positive (got {factor})"),
            ),
            RhoRule::Fixed { rho } if !(rho > 0.0 && rho.is_finite()) => {
                out.push(format!("sweep.rho_rule.rho must be positive (got {rho})"))
            }
            RhoRule::Fixed { .. } if self.eps_values.len() > 1 => out.push(
                "sweep.rho_rule: a fixed rho does not shrink with eps; use a proportional rule"
                    .into(),
            ),
            _ => {}
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            out.push(format!(
                "sweep.t_final must be positive (got {})",
                self.t_final
            ));
        }
        out.extend(self.diagnostics.violations());
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

    pub fn rho(&self, eps: f64) -> f64 {
        self.rho_rule.rho(eps, self.scenario.delta)
    }
}

/// One completed run of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub eps: f64,
    pub rho: f64,
    pub datum: Datum,
    pub budget: BudgetReport,
    pub history: History,
    pub diagnostics: DiagnosticsReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub eps: f64,
    pub rho: f64,
    pub outcome: Result<SweepRun>,
}

/// Builds, runs (with the Glimm monitor) and diagnoses one ε.
pub fn run_single(cfg: &SweepConfig, eps: f64, rho: f64) -> Result<SweepRun> {
    let eos = cfg.eos.with_eps(eps);
    eos.validate()?;
    let built = build_datum(&cfg.scenario, &cfg.perturbation, &eos)?;
    let sim = SimConfig {
        rho,
        t_final: cfg.t_final,
        ..cfg.sim
    };
    let monitor = glimm_monitor(cfg.diagnostics.weights);
    let history = run_monitored(&built.datum, &sim, &eos, Some(&monitor))?;
    let diagnostics = diagnose(&history, &cfg.diagnostics)?;
    Ok(SweepRun {
        eps,
        rho,
        datum: built.datum,
        budget: built.budget,
        history,
        diagnostics,
    })
}

/// Runs every ε independently (in parallel); a failing run is reported in
/// its entry and does not stop the others.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepEntry>> {
    cfg.validate()?;
    Ok(cfg
        .eps_values
        .par_iter()
        .map(|&eps| {
            let rho = cfg.rho(eps);
            let outcome = run_single(cfg, eps, rho);
            if let Err(e) = &outcome {
                log::warn!("sweep run at eps = {eps:e} failed: {e}");
            }
            SweepEntry { eps, rho, outcome }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum TvScaling {
    Fitted {
        exponent: f64,
        residual: f64,
        points: usize,
    },
    /// Every congested variation is zero.
    ExactZero,
    Insufficient {
        points: usize,
    },
}

/// Least-squares slope of `log tv` against `log eps`. Needs at least four
/// points with nonzero variation; `residual` is the RMS of the fit.
pub fn fit_tv_scaling(eps: &[f64], tv: &[f64]) -> TvScaling {
    if !tv.is_empty() && tv.iter().all(|v| *v == 0.0) {
        return TvScaling::ExactZero;
    }
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(tv)
        .filter(|(e, v)| **e > 0.0 && **v > 0.0)
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    let n = pts.len();
    if n < 4 {
        return TvScaling::Insufficient { points: n };
    }
    let (slope, intercept) = least_squares(&pts);
    let residual = (pts
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    TvScaling::Fitted {
        exponent: slope,
        residual,
        points: n,
    }
}

/// Slope and intercept of the least-squares line through `pts`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `sup_t TV(u, congested side)` over `samples + 1` equally spaced times.
pub fn congested_velocity_variation(history: &History, samples: usize) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for t in uniform_times(history.t_end, samples) {
        let c = configuration_at(history, t)?;
        sup = sup.max(weighted_tv_fronts(&c.fronts, &history.eos).tv_u_congested);
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceDistance {
    pub eps_a: f64,
    pub eps_b: f64,
    /// `sup_t |x̄_a(t) - x̄_b(t)|` on the window.
    pub sup_distance: f64,
    /// `∫ |ẋ̄_a - ẋ̄_b| dt` on the window.
    pub slope_l1: f64,
}

fn merged_breaks(a: &InterfacePath, b: &InterfacePath, t_end: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = a
        .points
        .iter()
        .chain(&b.points)
        .map(|p| p.0)
        .filter(|t| *t > 0.0 && *t < t_end)
        .collect();
    ts.push(0.0);
    ts.push(t_end);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Distances between consecutive interface paths on `[0, t_end]`. Both
/// paths are piecewise linear, so the sup is attained at a breakpoint and
/// the slope integral is a finite sum.
pub fn interface_convergence(
    paths: &[(f64, &InterfacePath)],
    t_end: f64,
) -> Vec<InterfaceDistance> {
    paths
        .windows(2)
        .map(|w| {
            let ((ea, a), (eb, b)) = (w[0], w[1]);
            if !(t_end > 0.0) {
                return InterfaceDistance {
                    eps_a: ea,
                    eps_b: eb,
                    sup_distance: (a.position(0.0) - b.position(0.0)).abs(),
                    slope_l1: 0.0,
                };
            }
            let ts = merged_breaks(a, b, t_end);
            let sup_distance = ts
                .iter()
                .map(|&t| (a.position(t) - b.position(t)).abs())
                .fold(0.0, f64::max);
            let slope_l1 = ts
                .windows(2)
                .filter(|s| s[1] > s[0])
                .map(|s| {
                    let m = 0.5 * (s[0] + s[1]);
                    let sa = a.slope_at(m).unwrap_or(0.0);
                    let sb = b.slope_at(m).unwrap_or(0.0);
                    (sa - sb).abs() * (s[1] - s[0])
                })
                .sum();
            InterfaceDistance {
                eps_a: ea,
                eps_b: eb,
                sup_distance,
                slope_l1,
            }
        })
        .collect()
}

/// Single-interface limit: constant congested velocity, interface and
/// congested pressure from the free trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleLimit {
    pub u_c: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub slopes: Vec<f64>,
    pub p_c: Vec<f64>,
}

/// Two non-interacting interfaces: congested pressure affine between
/// `p_c1` and `p_c2`, common congested velocity `u_c(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLimit {
    pub times: Vec<f64>,
    pub positions: [Vec<f64>; 2],
    pub slopes: [Vec<f64>; 2],
    pub p_c1: Vec<f64>,
    pub p_c2: Vec<f64>,
    pub u_c: Vec<f64>,
}

impl TwoLimit {
    /// Congested pressure at sample `k` and position `x`.
    pub fn pressure(&self, k: usize, x: f64) -> f64 {
        let (x1, x2) = (self.positions[0][k], self.positions[1][k]);
        ((x2 - x) * self.p_c1[k] + (x - x1) * self.p_c2[k]) / (x2 - x1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum LimitSolution {
    Single(SingleLimit),
    Two(TwoLimit),
}

fn limit_excess(p: f64, eos: &EosParams) -> Result<f64> {
    let t = eos.with_eps(0.0).specific_volume(p)? - 1.0;
    if !(t > 0.0) {
        return Err(Error::Degenerate(format!(
            "free trace pressure {p} gives tau = 1"
        )));
    }
    Ok(t)
}

fn integrate_positions(times: &[f64], slopes: &[f64], x0: f64) -> Vec<f64> {
    let mut x = vec![x0];
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        x.push(x[k - 1] + 0.5 * dt * (slopes[k] + slopes[k - 1]));
    }
    x
}

pub fn reconstruct_single(
    free: &TraceSeries,
    x0: f64,
    u_c: f64,
    eos: &EosParams,
) -> Result<SingleLimit> {
    let mut slopes = Vec::with_capacity(free.samples.len());
    let mut p_c = Vec::with_capacity(free.samples.len());
    for s in &free.samples {
        let a = limit_excess(s.p, eos)?;
        slopes.push((u_c - s.u) / a);
        p_c.push(s.p + (u_c - s.u).powi(2) / a);
    }
    let times = free.times();
    let positions = integrate_positions(&times, &slopes, x0);
    Ok(SingleLimit {
        u_c,
        times,
        positions,
        slopes,
        p_c,
    })
}

/// `left` samples the free state left of the first interface, `right` the
/// one right of the second; both on the same times. `u_c` follows
/// `u_c' = -(p_c2 - p_c1) / (x̄2 - x̄1)`, stepped with the trapezoidal rule
/// (Heun predictor).
pub fn reconstruct_two(
    left: &TraceSeries,
    right: &TraceSeries,
    x_start: [f64; 2],
    u_c0: f64,
    eos: &EosParams,
) -> Result<TwoLimit> {
    if left.samples.len() != right.samples.len() {
        return Err(Error::InvalidParams(
            "traces must share their sample times".into(),
        ));
    }
    let n = left.samples.len();
    let rates = |k: usize, u: f64, x1: f64, x2: f64| -> Result<(f64, f64, f64, f64, f64)> {
        let (l, r) = (&left.samples[k], &right.samples[k]);
        let (al, ar) = (limit_excess(l.p, eos)?, limit_excess(r.p, eos)?);
        let pc1 = l.p + (u - l.u).powi(2) / al;
        let pc2 = r.p + (u - r.u).powi(2) / ar;
        let s1 = (u - l.u) / al;
        let s2 = (u - r.u) / ar;
        let du = -(pc2 - pc1) / (x2 - x1);
        Ok((s1, s2, pc1, pc2, du))
    };
    let mut out = TwoLimit {
        times: left.times(),
        positions: [vec![x_start[0]], vec![x_start[1]]],
        slopes: [Vec::new(), Vec::new()],
        p_c1: Vec::new(),
        p_c2: Vec::new(),
        u_c: vec![u_c0],
    };
    for k in 0..n {
        let (x1, x2, u) = (out.positions[0][k], out.positions[1][k], out.u_c[k]);
        let (s1, s2, pc1, pc2, du) = rates(k, u, x1, x2)?;
        out.slopes[0].push(s1);
        out.slopes[1].push(s2);
        out.p_c1.push(pc1);
        out.p_c2.push(pc2);
        if k + 1 == n {
            break;
        }
        let dt = out.times[k + 1] - out.times[k];
        let (px1, px2, pu) = (x1 + dt * s1, x2 + dt * s2, u + dt * du);
        let (t1, t2, _, _, tdu) = rates(k + 1, pu, px1, px2)?;
        out.positions[0].push(x1 + 0.5 * dt * (s1 + t1));
        out.positions[1].push(x2 + 0.5 * dt * (s2 + t2));
        out.u_c.push(u + 0.5 * dt * (du + tdu));
    }
    Ok(out)
}

/// One trace selects the single-interface case, two traces the
/// two-interface case.
pub fn reconstruct_hard_limit(
    traces: &[&TraceSeries],
    positions: &[f64],
    u_c0: f64,
    eos: &EosParams,
) -> Result<LimitSolution> {
    match (traces, positions) {
        ([free], [x0, ..]) => Ok(LimitSolution::Single(reconstruct_single(
            free, *x0, u_c0, eos,
        )?)),
        ([l, r], [x1, x2, ..]) => Ok(LimitSolution::Two(reconstruct_two(
            l,
            r,
            [*x1, *x2],
            u_c0,
            eos,
        )?)),
        _ => Err(Error::InvalidParams(
            "reconstruction needs one or two traces with their positions".into(),
        )),
    }
}

/// Interface-anchored distances between two runs at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchoredDistance {
    pub eps_a: f64,
    pub eps_b: f64,
    pub free_p: f64,
    pub free_u: f64,
    pub congested_u: f64,
}

/// L¹ distances of the two solutions recentred on their interfaces, over
/// `width` on each side.
pub fn anchored_distance(a: &History, b: &History, t: f64, width: f64) -> Result<AnchoredDistance> {
    let (pa, pb) = (
        a.interface_paths
            .first()
            .ok_or_else(|| Error::InsufficientData("run has no interface".into()))?,
        b.interface_paths
            .first()
            .ok_or_else(|| Error::InsufficientData("run has no interface".into()))?,
    );
    let sa = sample_solution(a, t)?.shifted(pa.position(t));
    let sb = sample_solution(b, t)?.shifted(pb.position(t));
    let fp = |s: &crate::riemann::State| s.p;
    let fu = |s: &crate::riemann::State| s.u;
    Ok(AnchoredDistance {
        eps_a: a.eos.eps,
        eps_b: b.eos.eps,
        free_p: sa.l1_distance(&sb, &fp, 0.0, width),
        free_u: sa.l1_distance(&sb, &fu, 0.0, width),
        congested_u: sa.l1_distance(&sb, &fu, -width, 0.0),
    })
}

/// Time of the first interface-interface collision and the pressure of the
/// state right of the leftmost front it emits.
pub fn middle_pressure_after_collision(history: &History) -> Result<Option<(f64, f64)>> {
    let Some(rec) = history
        .records
        .iter()
        .find(|r| r.region == InteractionRegion::Interfaces)
    else {
        return Ok(None);
    };
    let c = configuration_at(history, rec.time)?;
    Ok(c.fronts
        .iter()
        .find(|f| {
            f.t0 == rec.time && (f.x0 - rec.position).abs() <= 1e-9 * (1.0 + rec.position.abs())
        })
        .map(|f| (rec.time, f.right.p)))
}

/// Width of the part of the initial datum that is not constant (at least 1).
pub fn domain_width(datum: &Datum) -> f64 {
    let b = &datum.profile.breakpoints;
    match (b.first(), b.last()) {
        (Some(lo), Some(hi)) => (hi - lo).max(1.0),
        _ => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionCheck {
    pub eps: f64,
    pub offset: f64,
    /// Reconstructed `p_c(0)` against the In-function value.
    pub p_c0: f64,
    pub p_in: f64,
    pub p_c0_error: f64,
    /// Fraction of sample times where the reconstructed slope lies within
    /// `δ₀` of the measured one.
    pub slope_agreement: f64,
    pub max_slope_error: f64,
    /// Largest slope change when the offset is halved.
    pub offset_sensitivity: f64,
}

/// Compares the limit rebuilt from a run's free trace with the run itself.
pub fn check_reconstruction(
    run: &SweepRun,
    samples: usize,
    delta0: f64,
) -> Result<ReconstructionCheck> {
    let h = &run.history;
    let path = h
        .interface_paths
        .first()
        .ok_or_else(|| Error::InsufficientData("run has no interface".into()))?;
    let limit_eos = h.eos.with_eps(0.0);
    let limit_datum = in_function(&run.datum, &limit_eos)?;
    let k = run.datum.interfaces[0];
    let u_c0 = run.datum.profile.states[k].u;
    let x0 = run.datum.profile.breakpoints[k];
    let offset = 0.05 * domain_width(&run.datum);
    let times = uniform_times(h.t_end, samples);
    let near = reconstruct_single(&trace(h, offset, &times)?, x0, u_c0, &limit_eos)?;
    let nearer = reconstruct_single(&trace(h, 0.5 * offset, &times)?, x0, u_c0, &limit_eos)?;
    let mut within = 0;
    let mut max_err: f64 = 0.0;
    for (j, &t) in times.iter().enumerate() {
        let measured = path.slope_at(t).unwrap_or(f64::NAN);
        let err = (near.slopes[j] - measured).abs();
        max_err = max_err.max(err);
        if err <= delta0 {
            within += 1;
        }
    }
    let sensitivity = near
        .slopes
        .iter()
        .zip(&nearer.slopes)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let p_in = limit_datum.profile.states[0].p;
    Ok(ReconstructionCheck {
        eps: run.eps,
        offset,
        p_c0: near.p_c[0],
        p_in,
        p_c0_error: (near.p_c[0] - p_in).abs(),
        slope_agreement: within as f64 / times.len() as f64,
        max_slope_error: max_err,
        offset_sensitivity: sensitivity,
    })
}

/// Everything measured across a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub eps: Vec<f64>,
    pub rho: Vec<f64>,
    pub failures: Vec<(f64, String)>,
    pub interactions: Vec<usize>,
    pub glimm_monotone: Vec<bool>,
    /// `sup_t TV(u, congested side)` per run.
    pub tv_u_congested: Vec<f64>,
    pub tv_scaling: TvScaling,
    pub lambda_bar: Option<f64>,
    pub delta0: f64,
    /// Smallest and largest interface slope per run.
    pub slope_ranges: Vec<(f64, f64)>,
    /// Every slope of every run within `λ̄₂ ± δ₀`.
    pub slopes_in_band: Option<bool>,
    pub interface_distances: Vec<InterfaceDistance>,
    pub trace_distances: Vec<AnchoredDistance>,
    /// `max_t |u(t, x̄(t) - offset) - u_c(0)|` per run.
    pub velocity_drift: Vec<f64>,
    pub reconstruction: Option<ReconstructionCheck>,
}

pub fn convergence_report(
    cfg: &SweepConfig,
    entries: &[SweepEntry],
    delta0: f64,
) -> ConvergenceReport {
    let mut failures = Vec::new();
    let runs: Vec<&SweepRun> = entries
        .iter()
        .filter_map(|e| match &e.outcome {
            Ok(r) => Some(r),
            Err(err) => {
                failures.push((e.eps, err.to_string()));
                None
            }
        })
        .collect();
    let samples = cfg.diagnostics.time_samples;
    let eps: Vec<f64> = runs.iter().map(|r| r.eps).collect();
    let tv: Vec<f64> = runs
        .iter()
        .map(|r| congested_velocity_variation(&r.history, samples).unwrap_or(f64::NAN))
        .collect();
    let lambda_bar = match &cfg.scenario.kind {
        ScenarioKind::SingleInterface(s) => {
            crate::scenarios::build_single_interface_limit(s, &cfg.eos.with_eps(0.0))
                .ok()
                .map(|l| l.lambda_bar)
        }
        _ => None,
    };
    let slope_ranges: Vec<(f64, f64)> = runs
        .iter()
        .map(|r| {
            r.history
                .interface_paths
                .first()
                .map_or((f64::NAN, f64::NAN), |p| {
                    p.slopes()
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                            (lo.min(s.2), hi.max(s.2))
                        })
                })
        })
        .collect();
    let slopes_in_band = lambda_bar.map(|lb| {
        slope_ranges
            .iter()
            .all(|(lo, hi)| *lo >= lb - delta0 && *hi <= lb + delta0)
    });
    let t_end = runs
        .iter()
        .map(|r| r.history.t_end)
        .fold(f64::INFINITY, f64::min);
    let paths: Vec<(f64, &InterfacePath)> = runs
        .iter()
        .filter_map(|r| r.history.interface_paths.first().map(|p| (r.eps, p)))
        .collect();
    let interface_distances = if t_end.is_finite() {
        interface_convergence(&paths, t_end)
    } else {
        Vec::new()
    };
    let trace_distances = runs
        .windows(2)
        .filter_map(|w| {
            let width = domain_width(&w[0].datum);
            anchored_distance(&w[0].history, &w[1].history, t_end, width).ok()
        })
        .collect();
    let velocity_drift = runs
        .iter()
        .map(|r| {
            let k = r.datum.interfaces.first().copied().unwrap_or(0);
            let u_c0 = r.datum.profile.states[k].u;
            let off = -0.05 * domain_width(&r.datum);
            trace(&r.history, off, &uniform_times(r.history.t_end, samples))
                .map(|tr| {
                    tr.samples
                        .iter()
                        .map(|s| (s.u - u_c0).abs())
                        .fold(0.0, f64::max)
                })
                .unwrap_or(f64::NAN)
        })
        .collect();
    let reconstruction = match (&cfg.scenario.kind, runs.last()) {
        (ScenarioKind::SingleInterface(_), Some(r)) => {
            check_reconstruction(r, samples, delta0).ok()
        }
        _ => None,
    };
    ConvergenceReport {
        rho: runs.iter().map(|r| r.rho).collect(),
        failures,
        interactions: runs.iter().map(|r| r.history.records.len()).collect(),
        glimm_monotone: runs
            .iter()
            .map(|r| {
                r.diagnostics
                    .glimm_series
                    .as_ref()
                    .is_some_and(|g| g.monotone)
            })
            .collect(),
        tv_scaling: fit_tv_scaling(&eps, &tv),
        tv_u_congested: tv,
        eps,
        lambda_bar,
        delta0,
        slope_ranges,
        slopes_in_band,
        interface_distances,
        trace_distances,
        velocity_drift,
        reconstruction,
    }
}
