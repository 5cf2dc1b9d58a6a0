//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Runs the shipped configs in `configs/` through the
//! same entry points as the binary.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use congestion_cli::execute::{execute, Outcome};
use congestion_cli::RunConfig;
use congestion_core::diagnostics::{
    weak_residual, CategoryAudit, GlimmWeights, InteractionAudit, TestGrid,
};
use congestion_core::limit::{least_squares, middle_pressure_after_collision, SweepRun, TvScaling};
use congestion_core::scenarios::build_datum;
use congestion_core::wft::{run, InteractionRegion, SimConfig};
use congestion_core::EosParams;
use oracle::Law;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type CategoryOf = fn(&InteractionAudit) -> CategoryAudit;

// criterion 1: p in [1e-3, 1e3], eps in [1e-6, 1e-1]
const ROUND_TRIP_SAMPLES: usize = 10_000;
const ROUND_TRIP_TOL: f64 = 1e-10;
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(1);
// criterion 2
const SCALING_PRESSURE: f64 = 10.0;
const SCALING_EPS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
const SCALING_REL_TOL: f64 = 0.02;
// criterion 3
const RIEMANN_PER_COMBO: usize = 1000;
const RIEMANN_MIN_PROBLEMS: usize = 3000;
const MIDDLE_PRESSURE_TOL: f64 = 1e-8;
const RH_TOL: f64 = 1e-10;
const RIEMANN_BUDGET: Duration = Duration::from_secs(30);
// criterion 4
const REFERENCE_RESIDUAL_TOL: f64 = 1e-10;
// criterion 5
const GLIMM_SWEEP: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
const GLIMM_REL_TOL: f64 = 1e-12;
const GLIMM_BUDGET: Duration = Duration::from_secs(120);
// criterion 6
const DELTA0: f64 = 0.1;
// criterion 7
const FLATTENING_EXPONENT: f64 = 0.25;
const FLATTENING_REL_TOL: f64 = 0.25;
// criterion 8
const IN_FUNCTION_TOL: f64 = 1e-10;
const SLOPE_AGREEMENT: f64 = 0.95;
// criterion 9
const REFINEMENT_EPS: f64 = 1e-2;
const REFINEMENT_LEVELS: usize = 4;
const REFINEMENT_ORDER: f64 = 0.8;
// criterion 10
const COLLISION_TIME_TOL: f64 = 1e-10;
// criterion 11
const AUDIT_SPREAD: f64 = 2.0;

type Verdict = Result<String, String>;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"))
}

fn load(name: &str, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::from_path(&config_path(name)).unwrap_or_else(|e| panic!("{e}"));
    cfg.output = out.join(name);
    cfg
}

/// Configs run once by their criterion and again by the determinism check.
struct Context {
    first: tempfile::TempDir,
    outcomes: BTreeMap<&'static str, Outcome>,
    glimm_time: Duration,
}

impl Context {
    fn execute(&mut self, name: &'static str) -> Result<&Outcome, String> {
        if !self.outcomes.contains_key(name) {
            let cfg = load(name, self.first.path());
            let start = Instant::now();
            let outcome = execute(&cfg).map_err(|e| format!("{name}: {e}"))?;
            if name == "glimm_sweep" {
                self.glimm_time = start.elapsed();
            }
            if outcome.failed() {
                let errors: Vec<_> = outcome
                    .reports
                    .iter()
                    .filter_map(|r| r.error.clone())
                    .collect();
                return Err(format!("{name}: runs failed: {errors:?}"));
            }
            self.outcomes.insert(name, outcome);
        }
        Ok(&self.outcomes[name])
    }
}

fn runs(outcome: &Outcome) -> Vec<&SweepRun> {
    outcome
        .entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().ok())
        .collect()
}

fn eos_round_trip(_: &mut Context) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..ROUND_TRIP_SAMPLES {
        let p = 10f64.powf(rng.gen_range(-3.0..3.0));
        let eps = 10f64.powf(rng.gen_range(-6.0..-1.0));
        let eos = EosParams::new(1.0, eps, 2.0, 2.0).unwrap();
        let tau = eos
            .specific_volume(p)
            .map_err(|e| format!("T({p}) at eps {eps}: {e}"))?;
        let back = eos.pressure(tau).map_err(|e| e.to_string())?;
        worst = worst.max((back - p).abs() / p.max(1.0));
    }
    let took = start.elapsed();
    let detail =
        format!("max relative error {worst:.2e} over {ROUND_TRIP_SAMPLES} samples in {took:.2?}");
    if worst <= ROUND_TRIP_TOL && took < ROUND_TRIP_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn volume_derivative_scaling(_: &mut Context) -> Verdict {
    let mut pts = Vec::new();
    let mut worst_oracle: f64 = 0.0;
    for eps in SCALING_EPS {
        let eos = EosParams::new(1.0, eps, 2.0, 2.0).unwrap();
        let d = eos
            .specific_volume_deriv(SCALING_PRESSURE)
            .map_err(|e| e.to_string())?;
        let law = Law {
            kappa: 1.0,
            eps,
            gi: 2.0,
            gc: 2.0,
        };
        let brute = -1.0 / law.neg_dp(law.tau(SCALING_PRESSURE));
        worst_oracle = worst_oracle.max(((d - brute) / brute).abs());
        pts.push((eps.ln(), d.abs().ln()));
    }
    let (slope, _) = least_squares(&pts);
    let target = 1.0 / 2.0;
    let detail = format!(
        "slope {slope:.4} vs 1/gamma_c = {target} at p = {SCALING_PRESSURE} (brute-force agreement {worst_oracle:.1e})"
    );
    if ((slope - target) / target).abs() <= SCALING_REL_TOL && worst_oracle <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn riemann_against_brute_force(_: &mut Context) -> Verdict {
    let start = Instant::now();
    let c = oracle::campaign::run(RIEMANN_PER_COMBO, 7);
    let took = start.elapsed();
    let detail = format!(
        "{} problems, {} shocks: worst |dp_m| {:.1e}, worst RH {:.1e}, {} Lax failures, {} errors, {took:.1?}",
        c.problems, c.shocks, c.worst_pressure, c.worst_rh, c.lax_failures, c.error_count
    );
    let ok = c.problems >= RIEMANN_MIN_PROBLEMS
        && c.error_count == 0
        && c.worst_pressure <= MIDDLE_PRESSURE_TOL
        && c.worst_rh <= RH_TOL
        && c.lax_failures == 0
        && took < RIEMANN_BUDGET;
    if ok {
        Ok(detail)
    } else {
        Err(format!("{detail} {:?}", c.errors))
    }
}

fn exact_reference_run(ctx: &mut Context) -> Verdict {
    let outcome = ctx.execute("reference")?;
    let run = runs(outcome)[0];
    let h = &run.history;
    let r = run
        .diagnostics
        .residuals
        .as_ref()
        .ok_or("residuals were skipped")?;
    let rows = fs::read_to_string(outcome.dir.join("fronts.csv"))
        .map_err(|e| e.to_string())?
        .lines()
        .count()
        - 1;
    let detail = format!(
        "{} interactions, {} segments ({rows} csv rows), weak residuals {:.1e} / {:.1e}",
        h.records.len(),
        h.segments.len(),
        r.weak_tau,
        r.weak_u
    );
    let straight = h.interface_paths.len() == 1 && h.interface_paths[0].slopes().len() == 1;
    if h.records.is_empty()
        && h.segments.len() == 1
        && rows == 1
        && straight
        && r.weak_tau <= REFERENCE_RESIDUAL_TOL
        && r.weak_u <= REFERENCE_RESIDUAL_TOL
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn glimm_monotonicity(ctx: &mut Context) -> Verdict {
    let cfg = load("glimm_sweep", ctx.first.path());
    if cfg.eps_values() != GLIMM_SWEEP
        || cfg.weights != GlimmWeights::default()
        || cfg.diagnostics.glimm_rel_tol != GLIMM_REL_TOL
        || cfg.scenario.delta != 0.05
    {
        return Err("glimm_sweep.toml does not match the criterion's setup".into());
    }
    let outcome = ctx.execute("glimm_sweep")?;
    let mut parts = Vec::new();
    let mut ok = true;
    for r in runs(outcome) {
        let g = r
            .diagnostics
            .glimm_series
            .as_ref()
            .ok_or("run was not monitored")?;
        ok &= g.monotone;
        parts.push(format!(
            "{:e}: {} events, max rise {:.1e}",
            r.eps,
            g.interactions,
            g.max_increase.max(0.0)
        ));
    }
    ok &= runs(outcome).len() == GLIMM_SWEEP.len();
    let detail = format!("{} in {:.1?}", parts.join("; "), ctx.glimm_time);
    if ok && ctx.glimm_time < GLIMM_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn interface_speed_band(ctx: &mut Context) -> Verdict {
    let outcome = ctx.execute("glimm_sweep")?;
    let c = outcome
        .convergence
        .as_ref()
        .ok_or("no convergence report")?;
    let lb = c.lambda_bar.ok_or("no limit speed")?;
    let lo = c
        .slope_ranges
        .iter()
        .map(|r| r.0)
        .fold(f64::INFINITY, f64::min);
    let hi = c
        .slope_ranges
        .iter()
        .map(|r| r.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let detail = format!("slopes in [{lo:.4}, {hi:.4}], band {lb:.4} +- {DELTA0}");
    if lo >= lb - DELTA0
        && hi <= lb + DELTA0
        && c.slopes_in_band == Some(true)
        && outcome.sweep.as_ref().is_some()
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn congested_velocity_flattening(ctx: &mut Context) -> Verdict {
    let outcome = ctx.execute("velocity_flattening")?;
    let c = outcome
        .convergence
        .as_ref()
        .ok_or("no convergence report")?;
    let tv: Vec<String> = c
        .tv_u_congested
        .iter()
        .map(|v| format!("{v:.2e}"))
        .collect();
    match c.tv_scaling {
        TvScaling::Fitted {
            exponent, residual, ..
        } => {
            let detail = format!("exponent {exponent:.4} (residual {residual:.1e}) vs {FLATTENING_EXPONENT}, TV {tv:?}");
            if ((exponent - FLATTENING_EXPONENT) / FLATTENING_EXPONENT).abs() <= FLATTENING_REL_TOL
            {
                Ok(detail)
            } else {
                Err(detail)
            }
        }
        other => Err(format!("no fit: {other:?}")),
    }
}

fn limit_reconstruction(ctx: &mut Context) -> Verdict {
    let outcome = ctx.execute("glimm_sweep")?;
    let c = outcome
        .convergence
        .as_ref()
        .ok_or("no convergence report")?;
    let r = c.reconstruction.as_ref().ok_or("no reconstruction")?;
    let detail = format!(
        "eps {:e}: p_c(0) {:.12} vs In-function {:.12} (error {:.1e}); slope within {DELTA0} on {:.1}% of samples (max error {:.3})",
        r.eps,
        r.p_c0,
        r.p_in,
        r.p_c0_error,
        100.0 * r.slope_agreement,
        r.max_slope_error
    );
    if r.eps == GLIMM_SWEEP[GLIMM_SWEEP.len() - 1]
        && r.p_c0_error <= IN_FUNCTION_TOL
        && r.slope_agreement >= SLOPE_AGREEMENT
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rho_refinement(ctx: &mut Context) -> Verdict {
    let cfg = load("glimm_sweep", ctx.first.path());
    let eos = cfg.eos.with_eps(REFINEMENT_EPS);
    let built = build_datum(&cfg.scenario, &cfg.perturbation, &eos).map_err(|e| e.to_string())?;
    let mut pts = Vec::new();
    let mut parts = Vec::new();
    for k in 0..REFINEMENT_LEVELS {
        let rho = cfg.rho(REFINEMENT_EPS) / 2f64.powi(k as i32);
        let sim = SimConfig {
            rho,
            t_final: cfg.sim.t_final,
            ..cfg.sim
        };
        let h = run(&built.datum, &sim, &eos).map_err(|e| e.to_string())?;
        let (a, b) = weak_residual(&h, &TestGrid::default());
        let r = a.max(b);
        parts.push(format!("{rho:.2e}: {r:.2e}"));
        pts.push((rho.ln(), r.ln()));
    }
    let decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
    let (order, _) = least_squares(&pts);
    let detail = format!("order {order:.3}; {}", parts.join(", "));
    if decreasing && order >= REFINEMENT_ORDER {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn two_interfaces(ctx: &mut Context) -> Verdict {
    let apart = ctx.execute("two_noninteracting")?;
    let run0 = runs(apart)[0];
    let h = &run0.history;
    if !h.records.is_empty() || h.interface_paths.len() != 2 {
        return Err(format!(
            "separating interfaces: {} interactions",
            h.records.len()
        ));
    }
    let (s0, s1) = (h.interface_paths[0].slopes(), h.interface_paths[1].slopes());
    let (a, b) = (s0[0].2, s1[0].2);
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(format!("separating interfaces move at {a} and {b}"));
    }
    let meeting = ctx.execute("two_interacting")?;
    let mut worst_time: f64 = 0.0;
    let mut pressures = Vec::new();
    for r in runs(meeting) {
        let e = r.history.eos;
        let law = Law {
            kappa: e.kappa,
            eps: e.eps,
            gi: e.gamma_i,
            gc: e.gamma_c,
        };
        let s = &r.datum.profile.states;
        let x = &r.datum.profile.breakpoints;
        let speed = |l: f64, rr: f64| (-(rr - l) / (law.tau(rr) - law.tau(l))).sqrt();
        let t_star = (x[1] - x[0]) / (speed(s[0].p, s[1].p) + speed(s[1].p, s[2].p));
        let first = r
            .history
            .records
            .iter()
            .find(|rec| rec.region == InteractionRegion::Interfaces);
        let Some(rec) = first else {
            return Err(format!("eps {:e}: no collision", r.eps));
        };
        worst_time = worst_time.max((rec.time - t_star).abs());
        let (_, pm) = middle_pressure_after_collision(&r.history)
            .map_err(|e| e.to_string())?
            .ok_or("no middle state")?;
        pressures.push((r.eps, pm));
    }
    let increasing = pressures.windows(2).all(|w| w[1].1 > w[0].1);
    let list: Vec<String> = pressures
        .iter()
        .map(|(e, p)| format!("{e:e}: {p:.3}"))
        .collect();
    let detail = format!(
        "apart: no interactions, speeds {a:.4} < {b:.4}; collision time error {worst_time:.1e}; middle pressure {}",
        list.join(", ")
    );
    if worst_time <= COLLISION_TIME_TOL && increasing && pressures.len() >= 2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn interaction_audit(ctx: &mut Context) -> Verdict {
    let outcome = ctx.execute("glimm_sweep")?;
    let audits: Vec<_> = runs(outcome)
        .iter()
        .filter_map(|r| r.diagnostics.interaction_audit)
        .collect();
    if audits.len() != GLIMM_SWEEP.len() {
        return Err("missing audits".into());
    }
    let mut ok = true;
    let mut parts = Vec::new();
    let categories: [(&str, CategoryOf); 4] = [
        ("free", |a| a.free),
        ("congested", |a| a.congested),
        ("interface/free", |a| a.interface_from_free),
        ("interface/congested", |a| a.interface_from_congested),
    ];
    for (name, get) in categories {
        let ratios: Vec<f64> = audits
            .iter()
            .map(get)
            .filter(|c| c.events > 0)
            .map(|c| c.max_ratio)
            .collect();
        if ratios.is_empty() {
            parts.push(format!("{name}: no events"));
            continue;
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        ok &= hi.is_finite() && spread < AUDIT_SPREAD;
        parts.push(format!(
            "{name}: {lo:.3}..{hi:.3} over {} runs (x{spread:.2})",
            ratios.len()
        ));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).into_iter().flatten().flatten() {
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(ctx: &mut Context) -> Verdict {
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let names: Vec<&'static str> = ctx.outcomes.keys().copied().collect();
    let (mut files, mut bytes) = (0, 0);
    for name in &names {
        let cfg = load(name, second.path());
        execute(&cfg).map_err(|e| e.to_string())?;
        let (a, b) = (ctx.first.path().join(name), second.path().join(name));
        let (fa, fb) = (files_under(&a), files_under(&b));
        if fa != fb || fa.is_empty() {
            return Err(format!("{name}: artifact lists differ"));
        }
        for f in &fa {
            let (x, y) = (fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
            if x != y {
                return Err(format!("{name}: {} differs", f.display()));
            }
            files += 1;
            bytes += x.len();
        }
    }
    Ok(format!(
        "{} configs rerun, {files} files ({:.1} MB) byte-identical",
        names.len(),
        bytes as f64 / 1e6
    ))
}

type Criterion = fn(&mut Context) -> Verdict;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 12] = [
        ("EOS round trip", eos_round_trip),
        ("T' congested scaling", volume_derivative_scaling),
        ("Riemann solver vs brute force", riemann_against_brute_force),
        ("exact reference run", exact_reference_run),
        ("Glimm monotonicity", glimm_monotonicity),
        ("interface speed band", interface_speed_band),
        (
            "congested velocity flattening",
            congested_velocity_flattening,
        ),
        ("limit reconstruction", limit_reconstruction),
        ("rho refinement", rho_refinement),
        ("two-interface scenarios", two_interfaces),
        ("interaction-constant audit", interaction_audit),
        ("determinism", determinism),
    ];
    let mut ctx = Context {
        first: tempfile::tempdir().expect("temporary directory"),
        outcomes: BTreeMap::new(),
        glimm_time: Duration::ZERO,
    };
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(&mut ctx)))
            .unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2}. {name}: {detail} [{:.1?}]", k + 1, took);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
