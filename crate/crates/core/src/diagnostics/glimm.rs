use serde::{Deserialize, Serialize};

use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::riemann::{State, WaveFamily};
use crate::wft::{Front, FrontConfiguration, FrontKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlimmWeights {
    pub k_c: f64,
    pub k_if: f64,
    pub k_ff: f64,
    pub k_cc: f64,
}

impl Default for GlimmWeights {
    fn default() -> Self {
        Self {
            k_c: 2.0,
            k_if: 10.0,
            k_ff: 5.0,
            k_cc: 5.0,
        }
    }
}

impl GlimmWeights {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("k_c", self.k_c),
            ("k_if", self.k_if),
            ("k_ff", self.k_ff),
            ("k_cc", self.k_cc),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("weights.{name} must be positive (got {v})"));
            }
        }
        if !(self.k_c > 1.0) {
            out.push(format!("weights.k_c must exceed 1 (got {})", self.k_c));
        }
        if !(self.k_if > self.k_c) {
            out.push(format!(
                "weights.k_if must exceed k_c (got {} <= {})",
                self.k_if, self.k_c
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

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlimmBreakdown {
    /// Signed strength of the interface.
    pub interface_strength: f64,
    pub linear_free: f64,
    pub linear_congested: f64,
    pub q_if: f64,
    pub q_ff: f64,
    pub q_cc: f64,
    pub total: f64,
}

/// Sum of `|σ_α σ_β|` over approaching pairs `α` left of `β`: a 2-wave
/// followed by a 1-wave, or two waves of one family of which at least one is
/// a shock.
fn approaching_sum<'a>(fronts: impl Iterator<Item = &'a Front>) -> f64 {
    let (mut one_all, mut one_shock, mut two_all, mut two_shock) = (0.0, 0.0, 0.0, 0.0);
    let mut q = 0.0;
    for f in fronts {
        let s = f.strength.abs();
        let shock = f.kind == FrontKind::Shock;
        match f.family {
            WaveFamily::One => {
                q += s * (two_all + if shock { one_all } else { one_shock });
                one_all += s;
                if shock {
                    one_shock += s;
                }
            }
            WaveFamily::Two => {
                q += s * if shock { two_all } else { two_shock };
                two_all += s;
                if shock {
                    two_shock += s;
                }
            }
        }
    }
    q
}

/// Glimm functional of a configuration, split around its first interface.
/// Without an interface every front counts as free.
pub fn glimm(config: &FrontConfiguration, weights: &GlimmWeights) -> GlimmBreakdown {
    let k = config.first_interface();
    let (cong, iface, free): (&[Front], Option<&Front>, &[Front]) = match k {
        Some(k) => (
            &config.fronts[..k],
            Some(&config.fronts[k]),
            &config.fronts[k + 1..],
        ),
        None => (&[], None, &config.fronts[..]),
    };
    let sigma_bar = iface.map_or(0.0, |f| f.strength);
    let linear_free: f64 = free.iter().map(|f| f.strength.abs()).sum();
    let linear_congested: f64 = cong.iter().map(|f| f.strength.abs()).sum();
    let q_if = sigma_bar.abs() * linear_free;
    let q_ff = approaching_sum(free.iter());
    let q_cc = approaching_sum(cong.iter());
    let total = sigma_bar
        + linear_free
        + weights.k_c * linear_congested
        + weights.k_if * q_if
        + weights.k_ff * q_ff
        + weights.k_cc * q_cc;
    GlimmBreakdown {
        interface_strength: sigma_bar,
        linear_free,
        linear_congested,
        q_if,
        q_ff,
        q_cc,
        total,
    }
}

/// Weighted total variation with the interface jump reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedTv {
    pub tv_p_congested: f64,
    pub tv_p_free: f64,
    pub tv_u_congested: f64,
    pub tv_u_free: f64,
    /// `ε^{-1/(2γc)}`.
    pub u_weight: f64,
    pub interface_dp: f64,
    pub interface_du: f64,
    pub total: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Congested,
    Interface,
    Free,
}

fn accumulate(jumps: impl Iterator<Item = (Side, State, State)>, eos: &EosParams) -> WeightedTv {
    let mut w = WeightedTv {
        tv_p_congested: 0.0,
        tv_p_free: 0.0,
        tv_u_congested: 0.0,
        tv_u_free: 0.0,
        u_weight: if eos.eps > 0.0 {
            1.0 / eos.velocity_scale()
        } else {
            0.0
        },
        interface_dp: 0.0,
        interface_du: 0.0,
        total: 0.0,
    };
    for (side, l, r) in jumps {
        let (dp, du) = (r.p - l.p, r.u - l.u);
        match side {
            Side::Congested => {
                w.tv_p_congested += dp.abs();
                w.tv_u_congested += du.abs();
            }
            Side::Free => {
                w.tv_p_free += dp.abs();
                w.tv_u_free += du.abs();
            }
            Side::Interface => {
                w.interface_dp += dp;
                w.interface_du += du;
            }
        }
    }
    w.total = w.tv_p_congested + w.tv_p_free + w.u_weight * w.tv_u_congested + w.tv_u_free;
    w
}

/// Weighted TV of a profile whose interface is breakpoint `interface_index`.
pub fn weighted_tv_profile(
    profile: &Profile,
    interface_index: usize,
    eos: &EosParams,
) -> WeightedTv {
    let jumps = profile.breakpoints.iter().enumerate().map(|(k, _)| {
        let side = match k.cmp(&interface_index) {
            std::cmp::Ordering::Less => Side::Congested,
            std::cmp::Ordering::Equal => Side::Interface,
            std::cmp::Ordering::Greater => Side::Free,
        };
        (side, profile.states[k], profile.states[k + 1])
    });
    accumulate(jumps, eos)
}

/// Weighted TV of a profile with the interface at `interface` (the
/// breakpoint nearest to it).
pub fn weighted_tv(profile: &Profile, interface: f64, eos: &EosParams) -> WeightedTv {
    let k = profile
        .breakpoints
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - interface).abs().total_cmp(&(b.1 - interface).abs()))
        .map_or(usize::MAX, |(k, _)| k);
    weighted_tv_profile(profile, k, eos)
}

/// Weighted TV of a front list, split at its first flagged front.
pub fn weighted_tv_fronts<'a>(
    fronts: impl IntoIterator<Item = &'a Front>,
    eos: &EosParams,
) -> WeightedTv {
    let fronts: Vec<&Front> = fronts.into_iter().collect();
    let k = fronts.iter().position(|f| f.is_interface());
    let jumps = fronts.iter().enumerate().map(|(j, f)| {
        let side = match k {
            Some(k) if j < k => Side::Congested,
            Some(k) if j == k => Side::Interface,
            _ => Side::Free,
        };
        (side, f.left, f.right)
    });
    accumulate(jumps, eos)
}
