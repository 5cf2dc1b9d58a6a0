use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::riemann::State;
use crate::wft::{sample_solution, History, InterfacePath};

/// Empirical time-Lipschitz constants, each the sup over the sampled pairs
/// of an L¹ difference divided by `t - s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzModuli {
    /// `‖u(t) - u(s)‖` over the whole line.
    pub u_line: f64,
    /// `‖p(t) - p(s)‖` on the free side.
    pub p_free: f64,
    /// `ε^{1/(2γc)} ‖p(t) - p(s)‖` on the congested side.
    pub p_congested_scaled: f64,
    /// `ε^{-1/(2γc)} ‖τ(t) - τ(s)‖` on the congested side.
    pub tau_congested_scaled: f64,
    pub pairs: usize,
}

/// Consecutive pairs of `n + 1` equally spaced times in `[0, t_end]`.
pub fn uniform_pairs(t_end: f64, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(1);
    (0..n)
        .map(|k| {
            (
                t_end * k as f64 / n as f64,
                t_end * (k + 1) as f64 / n as f64,
            )
        })
        .collect()
}

/// Spatial extent holding every front of the run.
fn support(history: &History) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &history.segments {
        lo = lo.min(s.x0().min(s.x1()));
        hi = hi.max(s.x0().max(s.x1()));
    }
    if lo.is_finite() {
        (lo - 1.0, hi + 1.0)
    } else {
        (-1.0, 1.0)
    }
}

fn first_path(history: &History) -> Option<&InterfacePath> {
    history.interface_paths.first()
}

/// Without an interface the congested side is empty. The strip swept by
/// the interface between `s` and `t` is left out of both sides.
pub fn lipschitz_time_moduli(history: &History, pairs: &[(f64, f64)]) -> Result<LipschitzModuli> {
    let eos = history.eos;
    let scale = if eos.eps > 0.0 {
        eos.velocity_scale()
    } else {
        0.0
    };
    let (lo, hi) = support(history);
    let tau = |s: &State| eos.specific_volume(s.p).unwrap_or(f64::NAN);
    let fp = |s: &State| s.p;
    let fu = |s: &State| s.u;
    let mut m = LipschitzModuli {
        u_line: 0.0,
        p_free: 0.0,
        p_congested_scaled: 0.0,
        tau_congested_scaled: 0.0,
        pairs: 0,
    };
    for &(s, t) in pairs {
        if !(t > s) {
            continue;
        }
        let a = sample_solution(history, s)?;
        let b = sample_solution(history, t)?;
        let dt = t - s;
        m.u_line = m.u_line.max(a.l1_distance(&b, &fu, lo, hi) / dt);
        let (left, right) = match first_path(history) {
            Some(path) => {
                let (xs, xt) = (path.position(s), path.position(t));
                (xs.min(xt), xs.max(xt))
            }
            None => (lo, lo),
        };
        m.p_free = m.p_free.max(a.l1_distance(&b, &fp, right, hi) / dt);
        if left > lo {
            let dp = a.l1_distance(&b, &fp, lo, left);
            let dtau = a.l1_distance(&b, &tau, lo, left);
            m.p_congested_scaled = m.p_congested_scaled.max(scale * dp / dt);
            if scale > 0.0 {
                m.tau_congested_scaled = m.tau_congested_scaled.max(dtau / scale / dt);
            }
        }
        m.pairs += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub p: f64,
    pub u: f64,
    pub tau: f64,
}

/// Solution sampled along `x̄(t) + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub offset: f64,
    pub samples: Vec<TraceSample>,
    /// Total variation in time of each component.
    pub tv_p: f64,
    pub tv_u: f64,
    pub tv_tau: f64,
    /// `tv_u / ε^{1/(2γc)}`, the quantity kept bounded on the congested side.
    pub tv_u_scaled: f64,
}

impl TraceSeries {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

/// `n + 1` equally spaced times in `[0, t_end]`.
pub fn uniform_times(t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

/// Traces at several offsets from the first interface, sharing one
/// solution sample per time.
pub fn traces(history: &History, offsets: &[f64], times: &[f64]) -> Result<Vec<TraceSeries>> {
    if offsets.iter().any(|o| *o == 0.0 || !o.is_finite()) {
        return Err(Error::InvalidParams("trace offsets must be nonzero".into()));
    }
    let path = first_path(history)
        .ok_or_else(|| Error::InsufficientData("run has no interface".into()))?;
    let eos = history.eos;
    let mut out: Vec<Vec<TraceSample>> = vec![Vec::with_capacity(times.len()); offsets.len()];
    for &t in times {
        let prof: Profile = sample_solution(history, t)?;
        let xb = path.position(t);
        for (k, &off) in offsets.iter().enumerate() {
            let s = prof.state_at(xb + off);
            out[k].push(TraceSample {
                t,
                p: s.p,
                u: s.u,
                tau: eos.specific_volume(s.p)?,
            });
        }
    }
    let scale = if eos.eps > 0.0 {
        eos.velocity_scale()
    } else {
        1.0
    };
    Ok(offsets
        .iter()
        .zip(out)
        .map(|(&offset, samples)| {
            let tv = |f: fn(&TraceSample) -> f64| {
                samples
                    .windows(2)
                    .map(|w| (f(&w[1]) - f(&w[0])).abs())
                    .sum::<f64>()
            };
            let tv_u = tv(|s| s.u);
            TraceSeries {
                offset,
                tv_p: tv(|s| s.p),
                tv_u,
                tv_tau: tv(|s| s.tau),
                tv_u_scaled: tv_u / scale,
                samples,
            }
        })
        .collect())
}

pub fn trace(history: &History, offset: f64, times: &[f64]) -> Result<TraceSeries> {
    Ok(traces(history, &[offset], times)?.remove(0))
}

/// `∫ |f(a(t)) - f(b(t))| dt` over the common sample times (trapezoidal).
pub fn trace_l1_difference(a: &TraceSeries, b: &TraceSeries, f: fn(&TraceSample) -> f64) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| {
            let d0 = (f(w[0].0) - f(w[0].1)).abs();
            let d1 = (f(w[1].0) - f(w[1].1)).abs();
            0.5 * (d0 + d1) * (w[1].0.t - w[0].0.t)
        })
        .sum()
}
