use std::collections::HashMap;

use log::{debug, info};

use super::front::{Front, FrontConfiguration, FrontKind};
use super::history::{
    History, InteractionRecord, InteractionRegion, InterfacePath, Segment, WaveSummary,
};
use super::SimConfig;
use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::profile::Datum;
use crate::riemann::{solve_riemann, sound_integral, State, Wave, WaveFamily, WaveKind};

/// Observer evaluated on the configuration after every interaction, used to
/// record the Glimm functional.
pub type Monitor<'a> = &'a dyn Fn(&FrontConfiguration) -> f64;

/// Consecutive fronts `first..=last` meeting at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub first: usize,
    pub last: usize,
    pub ids: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub removed: Vec<Front>,
    pub added: Vec<Front>,
    pub record: InteractionRecord,
}

const MAX_PIECES: usize = 1_000_000;

/// States `p_0 = p_l, ..., p_n = p_r` along a rarefaction, fine enough that
/// consecutive pressures and characteristic speeds differ by at most `rho`.
fn rarefaction_pieces(wave: &Wave, rho: f64, eos: &EosParams) -> Result<Vec<State>> {
    let (pl, pr) = (wave.left.p, wave.right.p);
    let sigma = pr - pl;
    let n = (sigma.abs() / rho).ceil();
    if n > MAX_PIECES as f64 {
        return Err(Error::Degenerate(format!(
            "rarefaction of strength {sigma:e} needs more than {MAX_PIECES} pieces at rho = {rho:e}"
        )));
    }
    let n = (n as usize).max(1);
    let ps: Vec<f64> = (0..=n)
        .map(|k| match k {
            0 => pl,
            k if k == n => pr,
            k => pl + sigma * (k as f64 / n as f64),
        })
        .collect();
    let taus = ps
        .iter()
        .map(|&p| eos.specific_volume(p))
        .collect::<Result<Vec<f64>>>()?;
    let mut states = Vec::with_capacity(n + 1);
    states.push(wave.left);
    let mut u = wave.left.u;
    for k in 1..n {
        u += sound_integral(eos, taus[k - 1], taus[k]).abs();
        states.push(State::new(ps[k], u));
    }
    states.push(wave.right);
    Ok(states)
}

#[allow(clippy::too_many_arguments)]
fn new_front(
    next_id: &mut u64,
    wave_family: WaveFamily,
    kind: FrontKind,
    t: f64,
    x: f64,
    speed: f64,
    left: State,
    right: State,
) -> Front {
    let id = *next_id;
    *next_id += 1;
    Front {
        id,
        family: wave_family,
        kind,
        interface: None,
        t0: t,
        x0: x,
        speed,
        left,
        right,
        strength: right.p - left.p,
    }
}

/// Fronts for one wave of a Riemann fan. Rarefactions are split unless
/// `merge` is set, in which case a single jump travels with the
/// characteristic speed of its right state.
fn emit_wave(
    wave: &Wave,
    merge: bool,
    t: f64,
    x: f64,
    rho: f64,
    eos: &EosParams,
    next_id: &mut u64,
) -> Result<Vec<Front>> {
    match wave.kind {
        WaveKind::Shock => Ok(vec![new_front(
            next_id,
            wave.family,
            FrontKind::Shock,
            t,
            x,
            wave.speed_lo,
            wave.left,
            wave.right,
        )]),
        WaveKind::Rarefaction if merge => Ok(vec![new_front(
            next_id,
            wave.family,
            FrontKind::RarefactionPiece,
            t,
            x,
            wave.speed_hi,
            wave.left,
            wave.right,
        )]),
        WaveKind::Rarefaction => {
            let states = rarefaction_pieces(wave, rho, eos)?;
            let sign = wave.family.sign();
            states
                .windows(2)
                .map(|w| {
                    let speed = sign * eos.sound_speed(w[1].p)?;
                    Ok(new_front(
                        next_id,
                        wave.family,
                        FrontKind::RarefactionPiece,
                        t,
                        x,
                        speed,
                        w[0],
                        w[1],
                    ))
                })
                .collect()
        }
    }
}

fn require_soft(eos: &EosParams) -> Result<()> {
    eos.validate()?;
    if eos.eps <= 0.0 {
        return Err(Error::InvalidParams(
            "front tracking needs eps > 0 (the limit law is not strictly hyperbolic)".into(),
        ));
    }
    Ok(())
}

/// Solves the Riemann problem at every jump of the datum and splits the
/// rarefactions into pieces.
pub fn discretize_initial_datum(
    datum: &Datum,
    sim: &SimConfig,
    eos: &EosParams,
) -> Result<FrontConfiguration> {
    require_soft(eos)?;
    sim.validate()?;
    let profile = &datum.profile;
    let mut config = FrontConfiguration::empty(profile.leftmost());
    for (k, &x) in profile.breakpoints.iter().enumerate() {
        let (l, r) = (profile.states[k], profile.states[k + 1]);
        if l == r {
            continue;
        }
        let fan = solve_riemann(l, r, eos).map_err(|e| Error::AtJump {
            position: x,
            source: Box::new(e),
        })?;
        let label = datum
            .interfaces
            .iter()
            .position(|&j| j == k)
            .map(|j| j as u32);
        let mut fronts = Vec::new();
        for w in &fan.waves {
            fronts.extend(
                emit_wave(w, false, 0.0, x, sim.rho, eos, &mut config.next_id).map_err(|e| {
                    Error::AtJump {
                        position: x,
                        source: Box::new(e),
                    }
                })?,
            );
        }
        if let Some(label) = label {
            let strongest = fronts
                .iter_mut()
                .filter(|f| f.kind == FrontKind::Shock)
                .max_by(|a, b| a.strength.abs().total_cmp(&b.strength.abs()));
            match strongest {
                Some(f) => f.interface = Some(label),
                None => {
                    return Err(Error::AtJump {
                        position: x,
                        source: Box::new(Error::Degenerate(
                            "interface jump does not produce a shock".into(),
                        )),
                    })
                }
            }
        }
        config.fronts.extend(fronts);
    }
    Ok(config)
}

fn crossing_time(a: &Front, b: &Front) -> f64 {
    (b.x0 - a.x0 + a.speed * a.t0 - b.speed * b.t0) / (a.speed - b.speed)
}

/// Earliest crossing of adjacent approaching fronts, with every crossing
/// chained to it within `time_tolerance` folded into one event. Simultaneous
/// events at different places are returned leftmost first.
pub fn next_event(config: &FrontConfiguration, sim: &SimConfig) -> Option<Event> {
    let fronts = &config.fronts;
    if fronts.len() < 2 {
        return None;
    }
    let times: Vec<f64> = fronts
        .windows(2)
        .map(|w| {
            if w[0].speed - w[1].speed > sim.speed_tolerance {
                crossing_time(&w[0], &w[1]).max(config.time)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let tmin = times.iter().copied().fold(f64::INFINITY, f64::min);
    if !tmin.is_finite() || tmin > sim.t_final {
        return None;
    }
    let cutoff = tmin + sim.time_tolerance;
    let first = times.iter().position(|&t| t <= cutoff)?;
    let mut last = first + 1;
    let mut time = times[first];
    while last < times.len() && times[last] <= cutoff {
        time = time.min(times[last]);
        last += 1;
    }
    Some(Event {
        time,
        first,
        last,
        ids: fronts[first..=last].iter().map(|f| f.id).collect(),
    })
}

fn classify_event(
    config: &FrontConfiguration,
    first: usize,
    last: usize,
    eos: &EosParams,
) -> InteractionRegion {
    let cluster = &config.fronts[first..=last];
    let flagged: Vec<usize> = cluster
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_interface())
        .map(|(k, _)| k)
        .collect();
    match flagged.as_slice() {
        [] => {
            if cluster[0].left.p >= eos.kappa {
                InteractionRegion::Congested
            } else {
                InteractionRegion::Free
            }
        }
        [k] => {
            let from_left = *k > 0;
            let from_right = *k + 1 < cluster.len();
            match (from_left, from_right) {
                (true, true) => InteractionRegion::InterfaceBothSides,
                (true, false) => InteractionRegion::InterfaceFromCongested,
                _ => InteractionRegion::InterfaceFromFree,
            }
        }
        _ => InteractionRegion::Interfaces,
    }
}

/// Replaces the fronts of `event` by the solution of the Riemann problem
/// between their outer states.
pub fn resolve_interaction(
    config: &mut FrontConfiguration,
    event: &Event,
    sim: &SimConfig,
    eos: &EosParams,
) -> Result<Resolution> {
    let t = event.time;
    let (first, last) = (event.first, event.last);
    let cluster: Vec<Front> = config.fronts[first..=last].to_vec();
    let x = cluster.iter().map(|f| f.position(t)).sum::<f64>() / cluster.len() as f64;
    let region = classify_event(config, first, last, eos);
    let left = cluster[0].left;
    let right = cluster[cluster.len() - 1].right;
    let wrap = |e: Error| Error::Interaction {
        time: t,
        position: x,
        source: Box::new(e),
    };

    let fan = solve_riemann(left, right, eos).map_err(wrap)?;
    let mut added = Vec::new();
    for w in &fan.waves {
        let merge = cluster
            .iter()
            .any(|f| f.family == w.family && f.kind == FrontKind::RarefactionPiece);
        added.extend(emit_wave(w, merge, t, x, sim.rho, eos, &mut config.next_id).map_err(wrap)?);
    }

    // each incoming interface passes its label to the outgoing shock of its family
    let mut labels: Vec<(u32, WaveFamily)> = cluster
        .iter()
        .filter_map(|f| f.interface.map(|l| (l, f.family)))
        .collect();
    labels.sort();
    for (label, family) in labels {
        let target = added
            .iter_mut()
            .filter(|f| f.family == family && f.kind == FrontKind::Shock && f.interface.is_none())
            .max_by(|a, b| a.strength.abs().total_cmp(&b.strength.abs()));
        match target {
            Some(f) => f.interface = Some(label),
            None => debug!("interface {label} ends at t = {t}, x = {x}"),
        }
    }

    let record = InteractionRecord {
        time: t,
        position: x,
        region,
        incoming: cluster.iter().map(WaveSummary::from).collect(),
        outgoing: added.iter().map(WaveSummary::from).collect(),
        pressure_scale: cluster
            .iter()
            .map(|f| f.left.p.max(f.right.p))
            .fold(0.0, f64::max),
        glimm_before: f64::NAN,
        glimm_after: f64::NAN,
    };
    config.time = t;
    config.fronts.splice(first..=last, added.iter().copied());
    Ok(Resolution {
        removed: cluster,
        added,
        record,
    })
}

/// Runs the front-tracking scheme from `datum` up to `sim.t_final`.
pub fn run(datum: &Datum, sim: &SimConfig, eos: &EosParams) -> Result<History> {
    run_monitored(datum, sim, eos, None)
}

/// As [`run`], evaluating `monitor` before the first and after every
/// interaction; the values are stored in the interaction records.
pub fn run_monitored(
    datum: &Datum,
    sim: &SimConfig,
    eos: &EosParams,
    monitor: Option<Monitor>,
) -> Result<History> {
    let mut config = discretize_initial_datum(datum, sim, eos)?;
    let initial = config.clone();
    let mut segments: Vec<Segment> = Vec::with_capacity(config.fronts.len());
    let mut open: HashMap<u64, usize> = HashMap::new();
    let open_segment = |f: &Front, segments: &mut Vec<Segment>, open: &mut HashMap<u64, usize>| {
        open.insert(f.id, segments.len());
        segments.push(Segment {
            front: *f,
            t1: f64::NAN,
            terminated: false,
        });
    };
    for f in &config.fronts {
        open_segment(f, &mut segments, &mut open);
    }
    let mut paths: Vec<InterfacePath> = (0..datum.interfaces.len() as u32)
        .filter_map(|label| {
            config.interface_index(label).map(|k| InterfacePath {
                label,
                points: vec![(0.0, config.fronts[k].x0)],
            })
        })
        .collect();

    let evaluate = |c: &FrontConfiguration| monitor.map_or(f64::NAN, |m| m(c));
    let glimm_initial = evaluate(&config);
    let mut glimm = glimm_initial;
    let mut records = Vec::new();
    let mut complete = true;

    while let Some(event) = next_event(&config, sim) {
        if records.len() >= sim.max_interactions {
            complete = false;
            break;
        }
        let Resolution {
            removed,
            added,
            mut record,
        } = resolve_interaction(&mut config, &event, sim, eos)?;
        for f in &removed {
            if let Some(k) = open.remove(&f.id) {
                segments[k].t1 = event.time;
                segments[k].terminated = true;
            }
            if let Some(label) = f.interface {
                if let Some(path) = paths.iter_mut().find(|p| p.label == label) {
                    path.points.push((event.time, record.position));
                }
            }
        }
        for f in &added {
            open_segment(f, &mut segments, &mut open);
        }
        let after = evaluate(&config);
        record.glimm_before = glimm;
        record.glimm_after = after;
        glimm = after;
        records.push(record);
    }

    let t_end = if complete { sim.t_final } else { config.time };
    config.time = t_end;
    for k in open.into_values() {
        segments[k].t1 = t_end;
    }
    for path in &mut paths {
        if let Some(k) = config.interface_index(path.label) {
            let x = config.fronts[k].position(t_end);
            if path.end_time() < t_end {
                path.points.push((t_end, x));
            }
        }
    }
    if !complete {
        log::warn!(
            "interaction cap {} reached at t = {}",
            sim.max_interactions,
            config.time
        );
    }
    info!(
        "run finished: {} interactions, {} segments, t_end = {t_end}",
        records.len(),
        segments.len()
    );
    Ok(History {
        eos: *eos,
        sim: *sim,
        initial,
        segments,
        records,
        interface_paths: paths,
        glimm_initial,
        t_end,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;
    use crate::riemann::{backward_state, forward_state};
    use crate::wft::sample_solution;

    fn eos() -> EosParams {
        EosParams::new(1.0, 0.1, 2.0, 2.0).unwrap()
    }

    fn shock(id: u64, x0: f64, speed: f64, l: State, r: State) -> Front {
        Front {
            id,
            family: WaveFamily::Two,
            kind: FrontKind::Shock,
            interface: None,
            t0: 0.0,
            x0,
            speed,
            left: l,
            right: r,
            strength: r.p - l.p,
        }
    }

    #[test]
    fn constant_datum_has_no_fronts() {
        let d = Datum::new(Profile::constant(State::new(0.5, 0.1)), vec![]).unwrap();
        let c = discretize_initial_datum(&d, &SimConfig::default(), &eos()).unwrap();
        assert!(c.fronts.is_empty());
    }

    #[test]
    fn rarefaction_is_split_in_equal_steps() {
        let e = eos();
        let sim = SimConfig {
            rho: 0.02,
            ..Default::default()
        };
        let l = State::new(0.5, 0.0);
        let r = forward_state(l, 0.47, WaveFamily::One, &e).unwrap();
        let d = Datum::new(Profile::new(vec![0.0], vec![l, r]).unwrap(), vec![]).unwrap();
        let c = discretize_initial_datum(&d, &sim, &e).unwrap();
        assert_eq!(c.fronts.len(), 2);
        let total: f64 = c.fronts.iter().map(|f| f.strength).sum();
        assert!((total + 0.03).abs() < 1e-15);
        for f in &c.fronts {
            assert!(f.strength < 0.0 && f.strength >= -0.02);
            assert!((f.strength + 0.015).abs() < 1e-15);
            assert_eq!(f.kind, FrontKind::RarefactionPiece);
            assert_eq!(f.speed, -e.sound_speed(f.right.p).unwrap());
        }
        c.check().unwrap();
        assert!(c.fronts.windows(2).all(|w| w[0].speed < w[1].speed));
    }

    #[test]
    fn kinematic_collision_time() {
        let s = State::new(1.0, 0.0);
        let config = FrontConfiguration {
            time: 0.0,
            fronts: vec![shock(0, 0.0, 2.0, s, s), shock(1, 1.0, 1.0, s, s)],
            leftmost_state: s,
            next_id: 2,
        };
        let ev = next_event(&config, &SimConfig::default()).unwrap();
        assert_eq!(ev.time, 1.0);
        assert_eq!((ev.first, ev.last), (0, 1));
        let parallel = FrontConfiguration {
            fronts: vec![shock(0, 0.0, 1.0, s, s), shock(1, 1.0, 1.0, s, s)],
            ..config
        };
        assert!(next_event(&parallel, &SimConfig::default()).is_none());
    }

    #[test]
    fn coincident_crossings_form_one_event() {
        let s = State::new(1.0, 0.0);
        // all three lines pass through (t, x) = (1, 1)
        let config = FrontConfiguration {
            time: 0.0,
            fronts: vec![
                shock(0, -1.0, 2.0, s, s),
                shock(1, 0.0, 1.0, s, s),
                shock(2, 2.0, -1.0, s, s),
                shock(3, 5.0, 0.5, s, s),
            ],
            leftmost_state: s,
            next_id: 4,
        };
        let ev = next_event(&config, &SimConfig::default()).unwrap();
        assert_eq!((ev.first, ev.last), (0, 2));
        assert!((ev.time - 1.0).abs() < 1e-15);
    }

    #[test]
    fn head_on_interaction_keeps_outer_states() {
        let e = eos();
        let sim = SimConfig {
            rho: 1e-3,
            t_final: 5.0,
            ..Default::default()
        };
        let m = State::new(0.5, 0.0);
        let l = backward_state(m, 0.52, WaveFamily::Two, &e).unwrap();
        let r = forward_state(m, 0.52, WaveFamily::One, &e).unwrap();
        let d = Datum::new(Profile::new(vec![0.0, 1.0], vec![l, m, r]).unwrap(), vec![]).unwrap();
        let h = run(&d, &sim, &e).unwrap();
        assert_eq!(h.records.len(), 1);
        let rec = &h.records[0];
        assert_eq!(rec.outgoing.len(), 2);
        assert_eq!(rec.region, InteractionRegion::Free);
        let end = sample_solution(&h, 5.0).unwrap();
        assert_eq!(end.leftmost(), l);
        assert_eq!(end.rightmost(), r);
        // outgoing strengths close to incoming ones
        let d1 = (rec.outgoing[0].strength - rec.incoming[1].strength).abs();
        let d2 = (rec.outgoing[1].strength - rec.incoming[0].strength).abs();
        assert!(d1 + d2 < 10.0 * 0.02 * 0.02, "{d1} {d2}");
    }

    #[test]
    fn same_family_rarefaction_is_not_resplit() {
        let e = eos();
        let sim = SimConfig {
            rho: 1e-3,
            t_final: 10.0,
            ..Default::default()
        };
        // a 1-rarefaction piece crossing a 2-shock from the right
        let m = State::new(0.5, 0.0);
        let l = backward_state(m, 0.52, WaveFamily::Two, &e).unwrap();
        let r = forward_state(m, 0.5 - 5e-4, WaveFamily::One, &e).unwrap();
        let d = Datum::new(Profile::new(vec![0.0, 0.5], vec![l, m, r]).unwrap(), vec![]).unwrap();
        let h = run(&d, &sim, &e).unwrap();
        assert_eq!(h.records.len(), 1);
        let out = &h.records[0].outgoing;
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].kind, FrontKind::RarefactionPiece);
    }

    #[test]
    fn sampling_reproduces_datum_and_checks_range() {
        let e = eos();
        let sim = SimConfig {
            rho: 0.01,
            ..Default::default()
        };
        let l = State::new(1.5, 0.0);
        let r = forward_state(l, 0.5, WaveFamily::Two, &e).unwrap();
        let d = Datum::new(Profile::new(vec![0.0], vec![l, r]).unwrap(), vec![0]).unwrap();
        let h = run(&d, &sim, &e).unwrap();
        assert!(h.records.is_empty());
        assert_eq!(h.segments.len(), 1);
        assert!(h.segments[0].front.is_interface());
        let p0 = sample_solution(&h, 0.0).unwrap();
        assert_eq!(p0, d.profile);
        assert!(sample_solution(&h, 1.5).is_err());
        let path = &h.interface_paths[0];
        assert_eq!(path.points.len(), 2);
        assert_eq!(path.slopes().len(), 1);
    }
}
