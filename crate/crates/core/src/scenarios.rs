//! Reference data with one to three interfaces, locus-aligned perturbations
//! and the redefinition of congested initial data for the limit system.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{weighted_tv_profile, WeightedTv};
use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::profile::{Datum, Profile};
use crate::riemann::{
    backward_state, forward_state, shock_speed, solve_riemann, State, WaveFamily, WaveKind,
};
use crate::roots::{bisect, newton_bisect, RootOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleInterfaceSpec {
    /// Congested pressure left of the interface.
    pub p01: f64,
    /// Free pressure right of the interface; give this or `delta_u`.
    #[serde(default)]
    pub p02: Option<f64>,
    /// Velocity jump `u02 - u01` across the interface.
    #[serde(default)]
    pub delta_u: Option<f64>,
    #[serde(default)]
    pub u01: f64,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoNonInteractingSpec {
    pub p10: f64,
    pub p30: f64,
    pub u10: f64,
    pub u30: f64,
    /// Distance between the two interfaces, centred on the origin.
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoInteractingSpec {
    pub p_left: f64,
    pub u_left: f64,
    pub p_right: f64,
    pub u_right: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeInterfacesSpec {
    #[serde(flatten)]
    pub interacting: TwoInteractingSpec,
    /// Free pressure right of the third interface.
    pub p_far: f64,
    /// Distance from the second to the third interface.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleInterface(SingleInterfaceSpec),
    TwoNonInteracting(TwoNonInteractingSpec),
    TwoInteracting(TwoInteractingSpec),
    ThreeInterfaces(ThreeInterfacesSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub kind: ScenarioKind,
    /// Perturbation budget.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_delta() -> f64 {
    0.05
}

impl ScenarioSpec {
    pub fn single(p01: f64, p02: f64) -> Self {
        Self {
            kind: ScenarioKind::SingleInterface(SingleInterfaceSpec {
                p01,
                p02: Some(p02),
                delta_u: None,
                u01: 0.0,
                x0: 0.0,
            }),
            delta: default_delta(),
            seed: 0,
        }
    }

    pub fn violations(&self, kappa: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            out.push(format!(
                "scenario.delta must be positive (got {})",
                self.delta
            ));
        }
        match &self.kind {
            ScenarioKind::SingleInterface(s) => {
                match (s.p02, s.delta_u) {
                    (Some(_), Some(_)) | (None, None) => {
                        out.push("scenario: give exactly one of p02 and delta_u".into())
                    }
                    (Some(p02), None) if !(p02 > 0.0 && p02 < kappa) => {
                        out.push(format!("scenario.p02 must lie in (0, kappa) (got {p02})"))
                    }
                    (None, Some(du)) if !(du < 0.0) => {
                        out.push(format!("scenario.delta_u must be negative (got {du})"))
                    }
                    _ => {}
                }
                if !(s.p01 > kappa) {
                    out.push(format!("scenario.p01 must exceed kappa (got {})", s.p01));
                }
            }
            ScenarioKind::TwoNonInteracting(s) => {
                if !(s.p10 > 0.0 && s.p10 < kappa && s.p30 > 0.0 && s.p30 < kappa) {
                    out.push("scenario: p10 and p30 must be free pressures in (0, kappa)".into());
                }
                if !(s.u10 > s.u30) {
                    out.push("scenario: u10 must exceed u30".into());
                }
                if !(s.separation > 0.0) {
                    out.push("scenario.separation must be positive".into());
                }
            }
            ScenarioKind::TwoInteracting(s) => interacting_violations(s, kappa, &mut out),
            ScenarioKind::ThreeInterfaces(s) => {
                interacting_violations(&s.interacting, kappa, &mut out);
                if !(s.p_far > 0.0 && s.p_far < kappa) {
                    out.push("scenario.p_far must be a free pressure in (0, kappa)".into());
                }
                if !(s.gap > 0.0) {
                    out.push("scenario.gap must be positive".into());
                }
            }
        }
        out
    }
}

fn interacting_violations(s: &TwoInteractingSpec, kappa: f64, out: &mut Vec<String>) {
    if !(s.p_left > kappa && s.p_right > kappa) {
        out.push("scenario: p_left and p_right must be congested (above kappa)".into());
    }
    if !(s.u_left > s.u_right) {
        out.push("scenario: u_left must exceed u_right".into());
    }
    if !(s.separation > 0.0) {
        out.push("scenario.separation must be positive".into());
    }
}

/// The single-interface reference solution of the limit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitReference {
    pub left: State,
    pub right: State,
    pub x0: f64,
    /// Interface speed.
    pub lambda_bar: f64,
}

impl LimitReference {
    pub fn delta_u(&self) -> f64 {
        self.right.u - self.left.u
    }

    pub fn profile(&self) -> Profile {
        Profile {
            breakpoints: vec![self.x0],
            states: vec![self.left, self.right],
        }
    }
}

fn tau_iso(p: f64, eos: &EosParams) -> f64 {
    (eos.kappa / p).powf(1.0 / eos.gamma_i)
}

/// Limit-law reference: a congested state travelling into a free one.
pub fn build_single_interface_limit(
    spec: &SingleInterfaceSpec,
    eos: &EosParams,
) -> Result<LimitReference> {
    let k = eos.kappa;
    if !(spec.p01 > k) {
        return Err(Error::Ordering(format!(
            "p01 = {} must exceed kappa = {k}",
            spec.p01
        )));
    }
    let (p02, du) = match (spec.p02, spec.delta_u) {
        (Some(p02), None) => {
            if !(p02 > 0.0 && p02 < k) {
                return Err(Error::Ordering(format!(
                    "p02 = {p02} must lie in (0, kappa)"
                )));
            }
            (p02, -((spec.p01 - p02) * (tau_iso(p02, eos) - 1.0)).sqrt())
        }
        (None, Some(du)) => {
            if !(du < 0.0) {
                return Err(Error::Ordering(format!(
                    "velocity jump {du} must be negative"
                )));
            }
            // (p01 - p)(T(p) - 1) decreases from +inf to 0 on (0, kappa)
            let g = |p: f64| (spec.p01 - p) * (tau_iso(p, eos) - 1.0) - du * du;
            let mut lo = 0.5 * k;
            while g(lo) < 0.0 {
                lo *= 0.5;
                if lo < 1e-300 {
                    return Err(Error::NoConvergence {
                        iterations: 1000,
                        context: "free reference pressure",
                    });
                }
            }
            (bisect(g, lo, k, 1e-15, 400)?, du)
        }
        _ => {
            return Err(Error::InvalidParams(
                "give exactly one of p02 and delta_u".into(),
            ));
        }
    };
    let left = State::new(spec.p01, spec.u01);
    let right = State::new(p02, spec.u01 + du);
    Ok(LimitReference {
        left,
        right,
        x0: spec.x0,
        lambda_bar: -du / (tau_iso(p02, eos) - 1.0),
    })
}

/// ε-level reference: same pressures and left velocity, with the free
/// velocity adjusted so that the jump is an exact 2-shock.
pub fn build_single_interface_eps(reference: &LimitReference, eos: &EosParams) -> Result<Datum> {
    if !(eos.eps > 0.0) {
        return Err(Error::InvalidParams(
            "the approximate reference needs eps > 0".into(),
        ));
    }
    let right = forward_state(reference.left, reference.right.p, WaveFamily::Two, eos)?;
    Datum::new(
        Profile::new(vec![reference.x0], vec![reference.left, right])?,
        vec![0],
    )
}

/// Middle congested state of the two-interface limit reference.
pub fn two_noninteracting_limit(spec: &TwoNonInteractingSpec, eos: &EosParams) -> Result<State> {
    let a = tau_iso(spec.p10, eos) - 1.0;
    let b = tau_iso(spec.p30, eos) - 1.0;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Degenerate(
            "outer states must be strictly free".into(),
        ));
    }
    let h = |u: f64| spec.p10 + (u - spec.u10).powi(2) / a - spec.p30 - (spec.u30 - u).powi(2) / b;
    let u = bisect(h, spec.u30, spec.u10, 1e-15, 400)?;
    let p = spec.p10 + (u - spec.u10).powi(2) / a;
    if !(p > eos.kappa) {
        return Err(Error::NoIntersection {
            left: State::new(spec.p10, spec.u10),
            right: State::new(spec.p30, spec.u30),
            reason: "limit middle state is not congested",
        });
    }
    Ok(State::new(p, u))
}

/// Free | congested | free, a 1-shock followed by a 2-shock.
pub fn build_two_noninteracting(spec: &TwoNonInteractingSpec, eos: &EosParams) -> Result<Datum> {
    let l = State::new(spec.p10, spec.u10);
    let r = State::new(spec.p30, spec.u30);
    let fan = solve_riemann(l, r, eos)?;
    let shocks = fan.waves.len() == 2 && fan.waves.iter().all(|w| w.kind == WaveKind::Shock);
    if !shocks || !(fan.middle.p > eos.kappa) {
        return Err(Error::NoIntersection {
            left: l,
            right: r,
            reason: "the loci do not meet in the congested region through two shocks",
        });
    }
    let h = 0.5 * spec.separation;
    Datum::new(
        Profile::new(vec![-h, h], vec![l, fan.middle, r])?,
        vec![0, 1],
    )
}

/// Congested | free | congested, a 2-shock followed by a 1-shock.
pub fn build_two_interacting(spec: &TwoInteractingSpec, eos: &EosParams) -> Result<Datum> {
    let l = State::new(spec.p_left, spec.u_left);
    let r = State::new(spec.p_right, spec.u_right);
    let du = spec.u_left - spec.u_right;
    if !(du > 0.0) {
        return Err(Error::Ordering("u_left must exceed u_right".into()));
    }
    let top = spec.p_left.min(spec.p_right);
    let jump = |pm: f64| -> Result<f64> {
        let tm = eos.specific_volume(pm)?;
        let a = ((tm - eos.specific_volume(spec.p_left)?) * (spec.p_left - pm))
            .max(0.0)
            .sqrt();
        let b = ((tm - eos.specific_volume(spec.p_right)?) * (spec.p_right - pm))
            .max(0.0)
            .sqrt();
        Ok(a + b)
    };
    let g = |pm: f64| jump(pm).map_or(f64::NAN, |v| v - du);
    if g(top) > 0.0 {
        return Err(Error::NoIntersection {
            left: l,
            right: r,
            reason: "velocity difference too small for a free middle state",
        });
    }
    let mut lo = 0.5 * top;
    while g(lo) < 0.0 {
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::NoIntersection {
                left: l,
                right: r,
                reason: "middle state would be vacuum",
            });
        }
    }
    let pm = newton_bisect(
        |p| (g(p), f64::NAN),
        lo,
        top,
        None,
        RootOptions {
            xtol: 1e-15,
            context: "free middle pressure",
            ..Default::default()
        },
    )?;
    if !(pm < eos.kappa) {
        return Err(Error::NoIntersection {
            left: l,
            right: r,
            reason: "middle state is not free",
        });
    }
    let m = forward_state(l, pm, WaveFamily::Two, eos)?;
    // close the chain exactly on the 1-shock side
    let r_exact = forward_state(m, spec.p_right, WaveFamily::One, eos)?;
    let h = 0.5 * spec.separation;
    Datum::new(Profile::new(vec![-h, h], vec![l, m, r_exact])?, vec![0, 1])
}

/// Two interacting interfaces followed by a third 2-shock into a free state.
pub fn build_three_interfaces(spec: &ThreeInterfacesSpec, eos: &EosParams) -> Result<Datum> {
    let two = build_two_interacting(&spec.interacting, eos)?;
    let r = two.profile.rightmost();
    let far = forward_state(r, spec.p_far, WaveFamily::Two, eos)?;
    let mut bps = two.profile.breakpoints.clone();
    let mut states = two.profile.states.clone();
    bps.push(bps[1] + spec.gap);
    states.push(far);
    Datum::new(Profile::new(bps, states)?, vec![0, 1, 2])
}

/// Builds the ε-level datum of any scenario.
pub fn build_reference(spec: &ScenarioSpec, eos: &EosParams) -> Result<Datum> {
    match &spec.kind {
        ScenarioKind::SingleInterface(s) => {
            let lim = build_single_interface_limit(s, &eos.with_eps(0.0))?;
            build_single_interface_eps(&lim, eos)
        }
        ScenarioKind::TwoNonInteracting(s) => build_two_noninteracting(s, eos),
        ScenarioKind::TwoInteracting(s) => build_two_interacting(s, eos),
        ScenarioKind::ThreeInterfaces(s) => build_three_interfaces(s, eos),
    }
}

/// Redefines the congested part of a limit datum: every state left of the
/// first interface becomes `(p_c, u_c)` with `u_c` the velocity just left of
/// the interface and `p_c` given by the jump relation with the free trace.
pub fn in_function(datum: &Datum, eos: &EosParams) -> Result<Datum> {
    let k = *datum
        .interfaces
        .first()
        .ok_or_else(|| Error::InvalidParams("datum has no interface".into()))?;
    let pr = &datum.profile;
    let uc = pr.states[k].u;
    let free = pr.states[k + 1];
    let t = tau_iso(free.p, eos).max(1.0);
    if !(free.p < eos.kappa) || t - 1.0 <= 0.0 {
        return Err(Error::Degenerate(format!(
            "free trace pressure {} has no room below the congestion threshold",
            free.p
        )));
    }
    let pc = free.p + (uc - free.u).powi(2) / (t - 1.0);
    let mut states = vec![State::new(pc, uc)];
    states.extend_from_slice(&pr.states[k + 1..]);
    let bps = pr.breakpoints[k..].to_vec();
    let interfaces = datum.interfaces.iter().map(|&j| j - k).collect();
    Datum::new(Profile::new(bps, states)?, interfaces)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrengthUnit {
    /// `p_right - p_left`.
    #[default]
    Pressure,
    /// `u_right - u_left`.
    Velocity,
    /// `(u_right - u_left) / ε^{1/(2γc)}`.
    ScaledVelocity,
}

/// One simple wave inserted at distance `offset` from the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub offset: f64,
    pub family: u8,
    pub strength: f64,
    #[serde(default)]
    pub unit: StrengthUnit,
}

/// An arbitrary jump, allowed only with `allow_raw_jumps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawJump {
    /// Signed position relative to the interface.
    pub offset: f64,
    pub dp: f64,
    pub du: f64,
}

/// Seeded generator of locus-aligned waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomPerturbation {
    pub free_count: usize,
    pub congested_count: usize,
    /// Largest free pressure strength.
    pub free_strength: f64,
    /// Largest congested strength in scaled-velocity units.
    pub congested_strength: f64,
    pub offset_min: f64,
    pub offset_max: f64,
}

impl Default for RandomPerturbation {
    fn default() -> Self {
        Self {
            free_count: 2,
            congested_count: 2,
            free_strength: 2e-3,
            congested_strength: 2e-3,
            offset_min: 0.1,
            offset_max: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSpec {
    pub free_side: Vec<WaveSpec>,
    pub congested_side: Vec<WaveSpec>,
    pub random: Option<RandomPerturbation>,
    pub allow_raw_jumps: bool,
    pub raw: Vec<RawJump>,
}

impl PerturbationSpec {
    pub fn is_empty(&self) -> bool {
        self.free_side.is_empty()
            && self.congested_side.is_empty()
            && self.random.is_none()
            && self.raw.is_empty()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (side, list) in [
            ("free_side", &self.free_side),
            ("congested_side", &self.congested_side),
        ] {
            for (k, w) in list.iter().enumerate() {
                if !(w.offset > 0.0) {
                    out.push(format!("perturbation.{side}[{k}].offset must be positive"));
                }
                if w.family != 1 && w.family != 2 {
                    out.push(format!("perturbation.{side}[{k}].family must be 1 or 2"));
                }
                if !w.strength.is_finite() || w.strength == 0.0 {
                    out.push(format!("perturbation.{side}[{k}].strength must be nonzero"));
                }
            }
        }
        if !self.raw.is_empty() && !self.allow_raw_jumps {
            out.push("perturbation.raw needs allow_raw_jumps = true".into());
        }
        if let Some(r) = &self.random {
            if !(r.offset_min > 0.0 && r.offset_max > r.offset_min) {
                out.push(
                    "perturbation.random offsets must satisfy 0 < offset_min < offset_max".into(),
                );
            }
        }
        out
    }

    /// Waves drawn by the random generator (empty without one).
    pub fn random_waves(&self, seed: u64) -> (Vec<WaveSpec>, Vec<WaveSpec>) {
        let Some(r) = self.random else {
            return (Vec::new(), Vec::new());
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |count: usize, amp: f64, unit: StrengthUnit| -> Vec<WaveSpec> {
            (0..count)
                .map(|_| WaveSpec {
                    offset: rng.gen_range(r.offset_min..r.offset_max),
                    family: rng.gen_range(1..=2),
                    strength: amp
                        * rng.gen_range(0.1..1.0)
                        * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                    unit,
                })
                .collect()
        };
        let free = draw(r.free_count, r.free_strength, StrengthUnit::Pressure);
        let cong = draw(
            r.congested_count,
            r.congested_strength,
            StrengthUnit::ScaledVelocity,
        );
        (free, cong)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub weighted_tv: WeightedTv,
    pub delta: f64,
    /// Largest distance (sup norm in `p` and `u`) of a state from its side's
    /// reference state.
    pub box_congested: f64,
    pub box_free: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbed {
    pub datum: Datum,
    pub budget: BudgetReport,
}

fn family_of(code: u8) -> Result<WaveFamily> {
    match code {
        1 => Ok(WaveFamily::One),
        2 => Ok(WaveFamily::Two),
        _ => Err(Error::InvalidParams(format!(
            "wave family must be 1 or 2 (got {code})"
        ))),
    }
}

/// Pressure of the far state of a simple wave with the requested velocity
/// jump. `outward_right` selects whether `anchor` is the left (free side) or
/// the right (congested side) state of the wave.
fn pressure_for_velocity_jump(
    anchor: State,
    family: WaveFamily,
    du: f64,
    outward_right: bool,
    eos: &EosParams,
) -> Result<f64> {
    let jump = |p: f64| -> f64 {
        if outward_right {
            forward_state(anchor, p, family, eos).map_or(f64::NAN, |s| s.u - anchor.u)
        } else {
            backward_state(anchor, p, family, eos).map_or(f64::NAN, |s| anchor.u - s.u)
        }
    };
    let g = |p: f64| (jump(p) - du, f64::NAN);
    newton_bisect(
        g,
        anchor.p * 1e-3,
        anchor.p * 1e3,
        None,
        RootOptions {
            xtol: 1e-15,
            log_bisection: true,
            context: "perturbation strength",
            ..Default::default()
        },
    )
}

/// Inserts the requested simple waves on both sides of the (first) interface
/// and checks that the result stays within the perturbation budget.
pub fn perturb(
    reference: &Datum,
    spec: &PerturbationSpec,
    delta: f64,
    seed: u64,
    eos: &EosParams,
) -> Result<Perturbed> {
    let v = spec.violations();
    if !v.is_empty() {
        return Err(Error::InvalidParams(v.join("; ")));
    }
    let pr = &reference.profile;
    if reference.interfaces.len() != 1 || pr.breakpoints.len() != 1 {
        if spec.is_empty() {
            let budget = budget_report(reference, delta, eos);
            return Ok(Perturbed {
                datum: reference.clone(),
                budget,
            });
        }
        return Err(Error::InvalidParams(
            "perturbations are defined around a single-interface reference".into(),
        ));
    }
    let x0 = pr.breakpoints[0];
    let (rnd_free, rnd_cong) = spec.random_waves(seed);
    let mut free: Vec<WaveSpec> = spec.free_side.iter().copied().chain(rnd_free).collect();
    let mut cong: Vec<WaveSpec> = spec
        .congested_side
        .iter()
        .copied()
        .chain(rnd_cong)
        .collect();
    free.sort_by(|a, b| a.offset.total_cmp(&b.offset));
    cong.sort_by(|a, b| a.offset.total_cmp(&b.offset));
    let scale = eos.velocity_scale();

    let to_du = |w: &WaveSpec| match w.unit {
        StrengthUnit::Velocity => Some(w.strength),
        StrengthUnit::ScaledVelocity => Some(w.strength * scale),
        StrengthUnit::Pressure => None,
    };

    // free side, built outward to the right
    let mut right_states = Vec::new();
    let mut right_x = Vec::new();
    let mut s = pr.states[1];
    for w in &free {
        let fam = family_of(w.family)?;
        let p = match to_du(w) {
            Some(du) => pressure_for_velocity_jump(s, fam, du, true, eos)?,
            None => s.p + w.strength,
        };
        s = forward_state(s, p, fam, eos)?;
        right_states.push(s);
        right_x.push(x0 + w.offset);
    }
    // congested side, built outward to the left
    let mut left_states = Vec::new();
    let mut left_x = Vec::new();
    let mut s = pr.states[0];
    for w in &cong {
        let fam = family_of(w.family)?;
        let p = match to_du(w) {
            Some(du) => pressure_for_velocity_jump(s, fam, du, false, eos)?,
            None => s.p - w.strength,
        };
        s = backward_state(s, p, fam, eos)?;
        left_states.push(s);
        left_x.push(x0 - w.offset);
    }

    let mut bps: Vec<f64> = left_x.iter().rev().copied().collect();
    let mut states: Vec<State> = left_states.iter().rev().copied().collect();
    states.push(pr.states[0]);
    let iface = bps.len();
    bps.push(x0);
    states.push(pr.states[1]);
    bps.extend(right_x);
    states.extend(right_states);
    if bps.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Ordering(
            "perturbation offsets must be distinct".into(),
        ));
    }
    let mut profile = Profile::new(bps, states)?;

    if spec.allow_raw_jumps && !spec.raw.is_empty() {
        profile = apply_raw(&profile, x0, &spec.raw)?;
    }
    let iface = profile
        .breakpoints
        .iter()
        .position(|&x| x == x0)
        .unwrap_or(iface);
    let datum = Datum::new(profile, vec![iface])?;
    let budget = budget_report(&datum, delta, eos);
    check_budget(&budget)?;
    Ok(Perturbed { datum, budget })
}

// Adds (dp, du) to every state beyond each raw jump, away from the interface.
fn apply_raw(profile: &Profile, x0: f64, raw: &[RawJump]) -> Result<Profile> {
    let mut bps = profile.breakpoints.clone();
    let mut extra: Vec<f64> = raw.iter().map(|r| x0 + r.offset).collect();
    bps.append(&mut extra);
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut states = Vec::with_capacity(bps.len() + 1);
    let probe = |k: usize| -> f64 {
        match k {
            0 => bps[0] - 1.0,
            k if k == bps.len() => bps[k - 1] + 1.0,
            k => 0.5 * (bps[k - 1] + bps[k]),
        }
    };
    for k in 0..=bps.len() {
        let x = probe(k);
        let mut s = profile.state_at(x);
        for r in raw {
            let at = x0 + r.offset;
            let beyond = if r.offset > 0.0 { x > at } else { x < at };
            if beyond {
                let sign = if r.offset > 0.0 { 1.0 } else { -1.0 };
                s.p += sign * r.dp;
                s.u += sign * r.du;
            }
        }
        states.push(s);
    }
    Profile::new(bps, states)
}

/// Weighted total variation and box distances of a single-interface datum.
pub fn budget_report(datum: &Datum, delta: f64, eos: &EosParams) -> BudgetReport {
    let pr = &datum.profile;
    let k = datum.interfaces.first().copied().unwrap_or(0);
    let wtv = weighted_tv_profile(pr, k, eos);
    let (lref, rref) = (pr.states[k], pr.states[k + 1]);
    let dist = |s: &State, r: &State| (s.p - r.p).abs().max((s.u - r.u).abs());
    let box_congested = pr.states[..=k]
        .iter()
        .map(|s| dist(s, &lref))
        .fold(0.0, f64::max);
    let box_free = pr.states[k + 1..]
        .iter()
        .map(|s| dist(s, &rref))
        .fold(0.0, f64::max);
    BudgetReport {
        weighted_tv: wtv,
        delta,
        box_congested,
        box_free,
    }
}

fn check_budget(b: &BudgetReport) -> Result<()> {
    let w = &b.weighted_tv;
    if !(w.total < b.delta) {
        let terms = [
            ("TV(p) on the congested side", w.tv_p_congested),
            ("TV(p) on the free side", w.tv_p_free),
            (
                "weighted TV(u) on the congested side",
                w.u_weight * w.tv_u_congested,
            ),
            ("TV(u) on the free side", w.tv_u_free),
        ];
        let worst = terms.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        return Err(Error::BudgetExceeded {
            term: format!("weighted total variation (largest term: {})", worst.0),
            value: w.total,
            limit: b.delta,
        });
    }
    if !(b.box_congested < b.delta) {
        return Err(Error::BudgetExceeded {
            term: "congested states outside the reference box".into(),
            value: b.box_congested,
            limit: b.delta,
        });
    }
    if !(b.box_free < b.delta) {
        return Err(Error::BudgetExceeded {
            term: "free states outside the reference box".into(),
            value: b.box_free,
            limit: b.delta,
        });
    }
    Ok(())
}

/// Reference plus perturbation, as used by runs and sweeps.
pub fn build_datum(
    spec: &ScenarioSpec,
    perturbation: &PerturbationSpec,
    eos: &EosParams,
) -> Result<Perturbed> {
    let reference = build_reference(spec, eos)?;
    perturb(&reference, perturbation, spec.delta, spec.seed, eos)
}

/// Interface speed of the ε-level single-interface reference.
pub fn reference_speed(datum: &Datum, eos: &EosParams) -> Result<f64> {
    let k = datum.interfaces[0];
    shock_speed(datum.profile.states[k], datum.profile.states[k + 1], eos)
}

/// Draws `n` offsets uniformly; exposed for property tests.
pub fn sample_offsets(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::rh_residual;

    fn eos(eps: f64) -> EosParams {
        EosParams::new(1.0, eps, 2.0, 2.0).unwrap()
    }

    fn spec() -> SingleInterfaceSpec {
        SingleInterfaceSpec {
            p01: 1.5,
            p02: Some(0.5),
            delta_u: None,
            u01: 0.0,
            x0: 0.0,
        }
    }

    #[test]
    fn limit_reference_values() {
        let r = build_single_interface_limit(&spec(), &eos(0.0)).unwrap();
        assert!((r.delta_u() + 0.643_594).abs() < 1e-6);
        assert!((r.lambda_bar - 1.553_774).abs() < 1e-6);
        assert!(rh_residual(r.left, r.right, &eos(0.0)).unwrap().abs() < 1e-15);
        let by_du = SingleInterfaceSpec {
            p02: None,
            delta_u: Some(r.delta_u()),
            ..spec()
        };
        let r2 = build_single_interface_limit(&by_du, &eos(0.0)).unwrap();
        assert!((r2.right.p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn limit_reference_rejects_bad_orderings() {
        let bad = SingleInterfaceSpec {
            p02: Some(1.2),
            ..spec()
        };
        assert!(matches!(
            build_single_interface_limit(&bad, &eos(0.0)),
            Err(Error::Ordering(_))
        ));
        let bad = SingleInterfaceSpec { p01: 0.9, ..spec() };
        assert!(build_single_interface_limit(&bad, &eos(0.0)).is_err());
    }

    #[test]
    fn free_pressure_near_threshold() {
        let mut prev_du = f64::INFINITY;
        for &p02 in &[0.9, 0.99, 0.999, 0.9999] {
            let s = SingleInterfaceSpec {
                p02: Some(p02),
                ..spec()
            };
            let r = build_single_interface_limit(&s, &eos(0.0)).unwrap();
            assert!(r.lambda_bar > 0.0 && r.lambda_bar.is_finite());
            assert!(r.delta_u().abs() < prev_du);
            prev_du = r.delta_u().abs();
        }
        assert!(prev_du < 1e-2);
        let at_kappa = SingleInterfaceSpec {
            p02: Some(1.0),
            ..spec()
        };
        assert!(build_single_interface_limit(&at_kappa, &eos(0.0)).is_err());
    }

    #[test]
    fn eps_reference_converges_to_limit() {
        let lim = build_single_interface_limit(&spec(), &eos(0.0)).unwrap();
        let mut prev = f64::INFINITY;
        for &e in &[1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let d = build_single_interface_eps(&lim, &eos(e)).unwrap();
            let r = d.profile.states[1];
            assert!(rh_residual(d.profile.states[0], r, &eos(e)).unwrap().abs() < 1e-10);
            let gap = (r.u - lim.right.u).abs();
            assert!(gap < prev, "eps {e}: {gap} after {prev}");
            prev = gap;
        }
    }

    #[test]
    fn in_function_closes_reference_algebra() {
        let e0 = eos(0.0);
        let lim = build_single_interface_limit(&spec(), &e0).unwrap();
        let d = Datum::new(lim.profile(), vec![0]).unwrap();
        let out = in_function(&d, &e0).unwrap();
        assert!((out.profile.states[0].p - 1.5).abs() < 1e-12);
        assert_eq!(out.profile.states[0].u, 0.0);
        let again = in_function(&out, &e0).unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn in_function_collapses_congested_side() {
        let e0 = eos(0.0);
        let pr = Profile::new(
            vec![-1.0, 0.0, 0.5],
            vec![
                State::new(1.3, 0.1),
                State::new(1.6, 0.1),
                State::new(0.5, -0.5),
                State::new(0.55, -0.5),
            ],
        )
        .unwrap();
        let d = Datum::new(pr, vec![1]).unwrap();
        let out = in_function(&d, &e0).unwrap();
        assert_eq!(out.profile.breakpoints, vec![0.0, 0.5]);
        assert_eq!(out.profile.states[0].u, 0.1);
        let expect = 0.5 + 0.36 / (2f64.sqrt() - 1.0);
        assert!((out.profile.states[0].p - expect).abs() < 1e-12);
        assert_eq!(in_function(&out, &e0).unwrap(), out);
    }

    #[test]
    fn budget_arithmetic() {
        let e = eos(1e-2);
        let lim = build_single_interface_limit(&spec(), &eos(0.0)).unwrap();
        let reference = build_single_interface_eps(&lim, &e).unwrap();
        let empty = perturb(&reference, &PerturbationSpec::default(), 0.05, 0, &e).unwrap();
        assert_eq!(empty.datum, reference);
        assert_eq!(empty.budget.weighted_tv.total, 0.0);

        let delta = 0.05;
        let ok = PerturbationSpec {
            congested_side: vec![WaveSpec {
                offset: 0.3,
                family: 1,
                strength: e.velocity_scale() * delta / 4.0,
                unit: StrengthUnit::Velocity,
            }],
            ..Default::default()
        };
        let p = perturb(&reference, &ok, delta, 0, &e).unwrap();
        let w = &p.budget.weighted_tv;
        assert!((w.tv_u_congested - e.velocity_scale() * delta / 4.0).abs() < 1e-12);
        assert!(w.total < delta);

        let too_big = PerturbationSpec {
            congested_side: vec![WaveSpec {
                offset: 0.3,
                family: 1,
                strength: delta,
                unit: StrengthUnit::Velocity,
            }],
            ..Default::default()
        };
        match perturb(&reference, &too_big, delta, 0, &e) {
            Err(Error::BudgetExceeded { term, .. }) => assert!(term.contains("weighted"), "{term}"),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn perturbation_waves_are_simple() {
        let e = eos(1e-2);
        let lim = build_single_interface_limit(&spec(), &eos(0.0)).unwrap();
        let reference = build_single_interface_eps(&lim, &e).unwrap();
        let spec = PerturbationSpec {
            free_side: vec![
                WaveSpec {
                    offset: 0.3,
                    family: 2,
                    strength: 4e-3,
                    unit: StrengthUnit::Pressure,
                },
                WaveSpec {
                    offset: 0.6,
                    family: 1,
                    strength: 4e-3,
                    unit: StrengthUnit::Pressure,
                },
            ],
            congested_side: vec![
                WaveSpec {
                    offset: 0.3,
                    family: 1,
                    strength: -5e-3,
                    unit: StrengthUnit::Pressure,
                },
                WaveSpec {
                    offset: 0.6,
                    family: 2,
                    strength: -5e-3,
                    unit: StrengthUnit::Pressure,
                },
            ],
            ..Default::default()
        };
        let p = perturb(&reference, &spec, 0.05, 0, &e).unwrap();
        let pr = &p.datum.profile;
        assert_eq!(pr.breakpoints, vec![-0.6, -0.3, 0.0, 0.3, 0.6]);
        assert_eq!(p.datum.interfaces, vec![2]);
        for (k, (_, l, r)) in pr.jumps().enumerate() {
            let fan = solve_riemann(l, r, &e).unwrap();
            assert_eq!(fan.waves.len(), 1, "jump {k}");
        }
        assert!((pr.states[2].p - pr.states[1].p + 5e-3).abs() < 1e-14);
    }

    #[test]
    fn two_interface_builders() {
        let e = eos(1e-2);
        let s = TwoNonInteractingSpec {
            p10: 0.5,
            p30: 0.5,
            u10: 0.6,
            u30: -0.6,
            separation: 1.0,
        };
        let d = build_two_noninteracting(&s, &e).unwrap();
        let m = d.profile.states[1];
        assert!(m.p > 1.0 && m.u.abs() < 1e-12);
        let lim = two_noninteracting_limit(&s, &eos(0.0)).unwrap();
        assert!(lim.p > 1.0 && lim.u.abs() < 1e-12);

        let t = TwoInteractingSpec {
            p_left: 1.5,
            u_left: 0.6,
            p_right: 1.5,
            u_right: -0.6,
            separation: 1.0,
        };
        let d = build_two_interacting(&t, &e).unwrap();
        let m = d.profile.states[1];
        assert!(m.p < 1.0 && (m.p - 0.53).abs() < 0.03, "{m:?}");
        assert!((d.profile.states[2].u + 0.6).abs() < 1e-10);

        let three = ThreeInterfacesSpec {
            interacting: t,
            p_far: 0.5,
            gap: 1.0,
        };
        let d3 = build_three_interfaces(&three, &e).unwrap();
        assert_eq!(d3.interfaces, vec![0, 1, 2]);
    }

    #[test]
    fn random_waves_are_seeded() {
        let spec = PerturbationSpec {
            random: Some(RandomPerturbation::default()),
            ..Default::default()
        };
        assert_eq!(spec.random_waves(3), spec.random_waves(3));
        assert_ne!(spec.random_waves(3), spec.random_waves(4));
    }
}
