use serde::{Deserialize, Serialize};

use super::glimm::{glimm, weighted_tv_fronts, GlimmWeights};
use crate::error::{Error, Result};
use crate::riemann::WaveFamily;
use crate::wft::{configuration_at, History, InteractionRecord, InteractionRegion, WaveSummary};

/// Products below this are too small to divide by.
pub const AUDIT_FLOOR: f64 = 1e-20;

/// Round-off allowance, in units of `f64::EPSILON * p`, on the strengths
/// leaving a Riemann solve. The solver reproduces known middle pressures to
/// about 30 ulps, so a defect smaller than this is not resolved.
pub const RESOLUTION_ULPS: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlimmPoint {
    pub time: f64,
    pub before: f64,
    pub after: f64,
}

/// Values of the Glimm functional across the interactions of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlimmSeries {
    pub initial: f64,
    pub last: f64,
    /// Largest `after - before` over all interactions.
    pub max_increase: f64,
    pub violations: usize,
    pub tolerance: f64,
    pub monotone: bool,
    pub interactions: usize,
    /// Possibly thinned copy of the per-interaction values.
    pub points: Vec<GlimmPoint>,
}

/// Monitor closure for [`crate::wft::run_monitored`].
pub fn glimm_monitor(weights: GlimmWeights) -> impl Fn(&crate::wft::FrontConfiguration) -> f64 {
    move |c| glimm(c, &weights).total
}

/// Audits the monitored Glimm values of a run: an interaction violates
/// monotonicity when it raises the functional by more than
/// `rel_tol * |Υ(0)|`. At most `max_points` points are kept (the worst one
/// always is).
pub fn glimm_series(history: &History, rel_tol: f64, max_points: usize) -> Result<GlimmSeries> {
    if history.glimm_initial.is_nan() {
        return Err(Error::InsufficientData("run was not monitored".into()));
    }
    let tolerance = rel_tol * history.glimm_initial.abs().max(f64::MIN_POSITIVE);
    let mut max_increase = f64::NEG_INFINITY;
    let mut worst = None;
    let mut violations = 0;
    for (k, r) in history.records.iter().enumerate() {
        let d = r.glimm_after - r.glimm_before;
        if d > max_increase {
            max_increase = d;
            worst = Some(k);
        }
        if d > tolerance {
            violations += 1;
        }
    }
    let n = history.records.len();
    let stride = if max_points == 0 {
        usize::MAX
    } else {
        n.div_ceil(max_points).max(1)
    };
    let points = history
        .records
        .iter()
        .enumerate()
        .filter(|(k, _)| k % stride == 0 || Some(*k) == worst)
        .map(|(_, r)| GlimmPoint {
            time: r.time,
            before: r.glimm_before,
            after: r.glimm_after,
        })
        .collect();
    Ok(GlimmSeries {
        initial: history.glimm_initial,
        last: history
            .records
            .last()
            .map_or(history.glimm_initial, |r| r.glimm_after),
        max_increase: if n == 0 { 0.0 } else { max_increase },
        violations,
        tolerance,
        monotone: violations == 0,
        interactions: n,
        points,
    })
}

/// Ratio of the small-wave part of the functional (`Υ - σ̄`) to the
/// weighted total variation, sampled at `samples + 1` equally spaced times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

pub fn glimm_wtv_equivalence(
    history: &History,
    weights: &GlimmWeights,
    samples: usize,
) -> Result<Equivalence> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut used = 0;
    for k in 0..=samples {
        let t = history.t_end * k as f64 / samples.max(1) as f64;
        let c = configuration_at(history, t)?;
        let g = glimm(&c, weights);
        let w = weighted_tv_fronts(&c.fronts, &history.eos).total;
        if w > 0.0 {
            let r = (g.total - g.interface_strength) / w;
            lo = lo.min(r);
            hi = hi.max(r);
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::InsufficientData(
            "weighted total variation vanishes at every sample".into(),
        ));
    }
    Ok(Equivalence {
        min_ratio: lo,
        max_ratio: hi,
        samples: used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryAudit {
    pub events: usize,
    /// Events whose denominator fell below [`AUDIT_FLOOR`].
    pub skipped: usize,
    /// Events whose denominator is below the round-off level of the
    /// pressures involved, so the ratio would measure rounding only.
    pub unresolved: usize,
    pub max_ratio: f64,
}

impl CategoryAudit {
    fn push(&mut self, num: f64, den: f64, resolution: f64) {
        if den < AUDIT_FLOOR {
            self.skipped += 1;
            return;
        }
        if den < resolution {
            self.unresolved += 1;
            return;
        }
        self.events += 1;
        self.max_ratio = self.max_ratio.max(num / den);
    }
}

/// Empirical constants of the interaction estimates, by kind of event.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InteractionAudit {
    pub free: CategoryAudit,
    pub congested: CategoryAudit,
    pub interface_from_free: CategoryAudit,
    pub interface_from_congested: CategoryAudit,
    /// Events with more than two incoming waves or two interfaces.
    pub other: usize,
    /// Largest total strength emitted into the free side by an interface
    /// event coming from the free side.
    pub free_side_reflection: f64,
}

fn family_sums<'a>(waves: impl Iterator<Item = &'a WaveSummary>) -> (f64, f64) {
    waves
        .filter(|w| !w.is_interface)
        .fold((0.0, 0.0), |(a, b), w| match w.family {
            WaveFamily::One => (a + w.strength, b),
            WaveFamily::Two => (a, b + w.strength),
        })
}

/// Audits every interaction record. Two-wave events use
/// `(|σ1⁺ - σ1_in| + |σ2⁺ - σ2_in|) / |σ'σ''|` with incoming strengths summed
/// per family; interface events use `(|σ1⁺| + |σ̄⁺ - σ̄|) / |σ_in|`.
/// Events whose denominator is below the pressure round-off level are
/// counted as unresolved rather than measured.
pub fn interaction_constant_audit(records: &[InteractionRecord]) -> Result<InteractionAudit> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no interactions to audit".into()));
    }
    let mut audit = InteractionAudit::default();
    for r in records {
        let resolution = RESOLUTION_ULPS * f64::EPSILON * r.pressure_scale;
        let small: Vec<&WaveSummary> = r.incoming.iter().filter(|w| !w.is_interface).collect();
        let iface_in: Vec<&WaveSummary> = r.incoming.iter().filter(|w| w.is_interface).collect();
        match (r.region, small.len(), iface_in.len()) {
            (InteractionRegion::Free | InteractionRegion::Congested, 2, 0) => {
                let (i1, i2) = family_sums(r.incoming.iter());
                let (o1, o2) = family_sums(r.outgoing.iter());
                let num = (o1 - i1).abs() + (o2 - i2).abs();
                let den = (small[0].strength * small[1].strength).abs();
                let cat = if r.region == InteractionRegion::Free {
                    &mut audit.free
                } else {
                    &mut audit.congested
                };
                cat.push(num, den, resolution);
            }
            (
                InteractionRegion::InterfaceFromFree | InteractionRegion::InterfaceFromCongested,
                1,
                1,
            ) => {
                let bar_in = iface_in[0].strength;
                let k = r.outgoing.iter().position(|w| w.is_interface);
                let bar_out = k.map_or(0.0, |k| r.outgoing[k].strength);
                let (congested_side, free_side) = match k {
                    Some(k) => r.outgoing.split_at(k),
                    None => (&r.outgoing[..], &[][..]),
                };
                let reflected: f64 = congested_side.iter().map(|w| w.strength).sum();
                let num = reflected.abs() + (bar_out - bar_in).abs();
                let den = small[0].strength.abs();
                if r.region == InteractionRegion::InterfaceFromFree {
                    let leak = free_side
                        .iter()
                        .skip(1)
                        .fold(0.0, |a, w| a + w.strength.abs());
                    audit.free_side_reflection = audit.free_side_reflection.max(leak);
                    audit.interface_from_free.push(num, den, resolution);
                } else {
                    audit.interface_from_congested.push(num, den, resolution);
                }
            }
            _ => audit.other += 1,
        }
    }
    Ok(audit)
}
