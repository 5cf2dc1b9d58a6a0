//! Lax curves, the exact Riemann solver and jump admissibility checks.
//!
//! Everything is expressed through the signed curve function
//!
//! ```text
//! Φ(p; b) =  sqrt((T(b) - T(p)) (p - b))    p ≥ b   (Hugoniot branch)
//! Φ(p; b) = -∫_p^b sqrt(-T'(ξ)) dξ          p < b   (integral-curve branch)
//! ```
//!
//! which is increasing in `p`. The forward 1-curve from `U_l` is
//! `u = u_l - Φ(p; p_l)`, the forward 2-curve is `u = u_l - Φ(p_l; p)`, and the
//! backward 2-curve ending at `U_r` is `u = u_r + Φ(p; p_r)`.

use serde::{Deserialize, Serialize};

use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::roots::{newton_bisect, RootOptions};

/// Waves whose pressure strength is below this are discarded.
pub const NEGLIGIBLE_STRENGTH: f64 = 1e-12;

/// Relative pressure jump below which a shock moves at the characteristic
/// speed of its mean state.
pub const SPEED_CANCELLATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub p: f64,
    pub u: f64,
}

impl State {
    pub const fn new(p: f64, u: f64) -> Self {
        Self { p, u }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WaveFamily {
    One,
    Two,
}

impl WaveFamily {
    pub fn index(self) -> u8 {
        match self {
            WaveFamily::One => 1,
            WaveFamily::Two => 2,
        }
    }

    /// Sign of the characteristic speed of this family.
    pub fn sign(self) -> f64 {
        match self {
            WaveFamily::One => -1.0,
            WaveFamily::Two => 1.0,
        }
    }

    /// Characteristic speed of the family at pressure `p`.
    pub fn lambda(self, p: f64, eos: &EosParams) -> Result<f64> {
        Ok(self.sign() * eos.sound_speed(p)?)
    }

    /// Kind implied by the strength sign.
    pub fn kind_of(self, strength: f64) -> WaveKind {
        let compressive = match self {
            WaveFamily::One => strength > 0.0,
            WaveFamily::Two => strength < 0.0,
        };
        if compressive {
            WaveKind::Shock
        } else {
            WaveKind::Rarefaction
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub family: WaveFamily,
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    /// `p_right - p_left`.
    pub strength: f64,
    pub speed_lo: f64,
    pub speed_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFan {
    pub waves: Vec<Wave>,
    pub middle: State,
}

// T'(p) given τ = T(p); the limit law is flat above κ.
pub(crate) fn dtau(eos: &EosParams, p: f64, tau: f64) -> f64 {
    if eos.eps > 0.0 {
        1.0 / eos.dp_raw(tau)
    } else if p < eos.kappa {
        -tau / (eos.gamma_i * p)
    } else {
        0.0
    }
}

/// `∫_{tau_lo}^{tau_hi} sqrt(-P'(τ)) dτ` (signed by the order of the limits).
pub(crate) fn sound_integral(eos: &EosParams, tau_lo: f64, tau_hi: f64) -> f64 {
    if tau_lo == tau_hi {
        return 0.0;
    }
    if eos.eps == 0.0 {
        let a = 0.5 * (1.0 - eos.gamma_i);
        let g = |t: f64| (eos.kappa * eos.gamma_i).sqrt() * t.powf(a) / a;
        return g(tau_hi) - g(tau_lo);
    }
    let (ya, yb) = ((tau_lo - 1.0).ln(), (tau_hi - 1.0).ln());
    let f = |y: f64| {
        let s = y.exp();
        (-eos.dp_raw(1.0 + s)).sqrt() * s
    };
    integrate(f, ya, yb, 1e-13, 1e-13).0
}

/// `∫_a^b sqrt(-T'(ξ)) dξ`, the velocity change across a rarefaction
/// between pressures `a` and `b`.
pub fn rarefaction_integral(a: f64, b: f64, eos: &EosParams) -> Result<f64> {
    let ta = eos.specific_volume(a)?;
    let tb = eos.specific_volume(b)?;
    Ok(sound_integral(eos, tb, ta))
}

/// Pressure with its specific volume, computed once.
#[derive(Debug, Clone, Copy)]
struct Point {
    p: f64,
    tau: f64,
}

impl Point {
    fn new(p: f64, eos: &EosParams) -> Result<Self> {
        Ok(Self {
            p,
            tau: eos.specific_volume(p)?,
        })
    }
}

// Φ(p; b) and dΦ/dp.
fn phi(eos: &EosParams, x: Point, b: Point) -> (f64, f64) {
    if x.p >= b.p {
        let a = (b.tau - x.tau) * (x.p - b.p);
        if a <= 0.0 {
            return (0.0, (-dtau(eos, b.p, b.tau)).sqrt());
        }
        let v = a.sqrt();
        let da = -dtau(eos, x.p, x.tau) * (x.p - b.p) + (b.tau - x.tau);
        (v, da / (2.0 * v))
    } else {
        (
            -sound_integral(eos, b.tau, x.tau),
            (-dtau(eos, x.p, x.tau)).sqrt(),
        )
    }
}

/// `Φ(p; b)` as described in the module docs.
pub fn curve_function(p: f64, base: f64, eos: &EosParams) -> Result<f64> {
    Ok(phi(eos, Point::new(p, eos)?, Point::new(base, eos)?).0)
}

/// Velocity on the forward Lax curve of `family` through `left` at pressure `p`.
pub fn lax_curve_velocity(left: State, p: f64, family: WaveFamily, eos: &EosParams) -> Result<f64> {
    if p == left.p {
        return Ok(left.u);
    }
    let x = Point::new(p, eos)?;
    let l = Point::new(left.p, eos)?;
    Ok(match family {
        WaveFamily::One => left.u - phi(eos, x, l).0,
        WaveFamily::Two => left.u - phi(eos, l, x).0,
    })
}

/// State at pressure `p` reached from `left` along the forward `family` curve.
pub fn forward_state(left: State, p: f64, family: WaveFamily, eos: &EosParams) -> Result<State> {
    Ok(State::new(p, lax_curve_velocity(left, p, family, eos)?))
}

/// State at pressure `p` from which `right` is reached along the `family`
/// curve, i.e. the left state of a simple wave ending at `right`.
pub fn backward_state(right: State, p: f64, family: WaveFamily, eos: &EosParams) -> Result<State> {
    if p == right.p {
        return Ok(right);
    }
    let x = Point::new(p, eos)?;
    let r = Point::new(right.p, eos)?;
    let u = match family {
        WaveFamily::One => right.u + phi(eos, r, x).0,
        WaveFamily::Two => right.u + phi(eos, x, r).0,
    };
    Ok(State::new(p, u))
}

/// `(u_r - u_l)² + (p_r - p_l)(T(p_r) - T(p_l))`, zero on the Hugoniot locus.
pub fn rh_residual(left: State, right: State, eos: &EosParams) -> Result<f64> {
    let dt = eos.specific_volume(right.p)? - eos.specific_volume(left.p)?;
    let du = right.u - left.u;
    Ok(du * du + (right.p - left.p) * dt)
}

/// Rankine–Hugoniot speed `-(u_r - u_l)/(T(p_r) - T(p_l))`.
pub fn shock_speed(left: State, right: State, eos: &EosParams) -> Result<f64> {
    let dt = eos.specific_volume(right.p)? - eos.specific_volume(left.p)?;
    if dt.abs() < 1e-14 {
        return Err(Error::Degenerate(format!(
            "specific-volume jump {dt:e} too small for a shock speed between {left:?} and {right:?}"
        )));
    }
    Ok(-(right.u - left.u) / dt)
}

/// Jump speed used for shock fronts.
///
/// Both `-Δu/Δτ` and `Δp/Δu` equal the shock speed on the Hugoniot locus; the
/// one with the larger denominator is taken because `Δτ` vanishes much faster
/// than `Δu` for congested jumps. Jumps below [`SPEED_CANCELLATION`] use the
/// characteristic speed instead.
pub(crate) fn jump_speed(
    left: State,
    right: State,
    tau_l: f64,
    tau_r: f64,
    family: WaveFamily,
    eos: &EosParams,
) -> f64 {
    // Differences this small are mostly rounding; the averaged eigenvalue is
    // then the characteristic speed of the mean state to O(Δp).
    if (right.p - left.p).abs() <= SPEED_CANCELLATION * left.p.max(right.p) {
        return family.sign() * eos.sound_speed_at_tau(0.5 * (tau_l + tau_r));
    }
    let du = right.u - left.u;
    let dt = tau_r - tau_l;
    if du != 0.0 && du.abs() >= dt.abs() {
        (right.p - left.p) / du
    } else if dt != 0.0 {
        -du / dt
    } else {
        family.sign() * eos.sound_speed_at_tau(0.5 * (tau_l + tau_r))
    }
}

/// Entropy admissibility: `λ_k(left) > speed > λ_k(right)` for shocks.
pub fn check_lax(wave: &Wave, eos: &EosParams) -> bool {
    if wave.kind == WaveKind::Rarefaction || wave.strength.abs() <= NEGLIGIBLE_STRENGTH {
        return true;
    }
    let (Ok(ll), Ok(lr)) = (
        wave.family.lambda(wave.left.p, eos),
        wave.family.lambda(wave.right.p, eos),
    ) else {
        return false;
    };
    ll > wave.speed_lo && wave.speed_lo > lr
}

fn make_wave(family: WaveFamily, left: State, right: State, eos: &EosParams) -> Result<Wave> {
    let strength = right.p - left.p;
    let kind = family.kind_of(strength);
    let tl = eos.specific_volume(left.p)?;
    let tr = eos.specific_volume(right.p)?;
    let (lo, hi) = match kind {
        WaveKind::Shock => {
            let s = jump_speed(left, right, tl, tr, family, eos);
            (s, s)
        }
        WaveKind::Rarefaction => (
            family.sign() * eos.sound_speed_at_tau(tl),
            family.sign() * eos.sound_speed_at_tau(tr),
        ),
    };
    Ok(Wave {
        family,
        kind,
        left,
        right,
        strength,
        speed_lo: lo,
        speed_hi: hi,
    })
}

/// Builds the simple wave of `family` joining `left` to `right`; the states
/// are taken as given.
pub fn simple_wave(family: WaveFamily, left: State, right: State, eos: &EosParams) -> Result<Wave> {
    make_wave(family, left, right, eos)
}

/// Middle pressure of the Riemann problem `(left, right)`.
pub fn middle_pressure(left: State, right: State, eos: &EosParams) -> Result<f64> {
    let l = Point::new(left.p, eos)?;
    let r = Point::new(right.p, eos)?;
    let du = right.u - left.u;
    let f = |p: f64| -> (f64, f64) {
        let x = match Point::new(p, eos) {
            Ok(x) => x,
            Err(_) => return (f64::NAN, f64::NAN),
        };
        let (a, da) = phi(eos, x, l);
        let (b, db) = phi(eos, x, r);
        (a + b + du, da + db)
    };
    let mut lo = 0.1 * left.p.min(right.p);
    let mut hi = 10.0 * left.p.max(right.p);
    let mut steps = 0;
    while f(lo).0 > 0.0 {
        lo *= 0.1;
        steps += 1;
        if steps > 30 {
            return Err(Error::NoIntersection {
                left,
                right,
                reason: "rarefaction curves do not meet above vacuum",
            });
        }
    }
    steps = 0;
    while f(hi).0 < 0.0 {
        hi *= 10.0;
        steps += 1;
        if steps > 30 {
            return Err(Error::NoIntersection {
                left,
                right,
                reason: "shock curves do not meet",
            });
        }
    }
    let guess = 0.5 * (left.p + right.p);
    newton_bisect(
        f,
        lo,
        hi,
        Some(guess),
        RootOptions {
            xtol: 1e-15,
            log_bisection: true,
            context: "Riemann middle pressure",
            ..Default::default()
        },
    )
}

/// Exact solution of the Riemann problem with data `left | right`.
///
/// Waves weaker than [`NEGLIGIBLE_STRENGTH`] are removed and the remaining
/// wave then joins the two data directly. If both are negligible but the data
/// differ, the stronger one is kept so that the state chain stays exact.
pub fn solve_riemann(left: State, right: State, eos: &EosParams) -> Result<WaveFan> {
    if left == right {
        return Ok(WaveFan {
            waves: Vec::new(),
            middle: left,
        });
    }
    let pm = middle_pressure(left, right, eos)?;
    let mid = forward_state(left, pm, WaveFamily::One, eos)?;
    let s1 = pm - left.p;
    let s2 = right.p - pm;
    let keep1 = s1.abs() >= NEGLIGIBLE_STRENGTH;
    let keep2 = s2.abs() >= NEGLIGIBLE_STRENGTH;
    let waves = match (keep1, keep2) {
        (true, true) => vec![
            make_wave(WaveFamily::One, left, mid, eos)?,
            make_wave(WaveFamily::Two, mid, right, eos)?,
        ],
        (true, false) => vec![make_wave(WaveFamily::One, left, right, eos)?],
        (false, true) => vec![make_wave(WaveFamily::Two, left, right, eos)?],
        (false, false) => {
            let family = if s1.abs() >= s2.abs() {
                WaveFamily::One
            } else {
                WaveFamily::Two
            };
            vec![make_wave(family, left, right, eos)?]
        }
    };
    let middle = match (keep1, keep2) {
        (true, true) => mid,
        (true, false) => right,
        _ => left,
    };
    Ok(WaveFan { waves, middle })
}
