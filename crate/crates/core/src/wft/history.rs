use serde::{Deserialize, Serialize};

use super::front::{Front, FrontConfiguration, FrontKind};
use super::SimConfig;
use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::riemann::{State, WaveFamily};

/// Where an interaction took place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionRegion {
    Free,
    Congested,
    InterfaceFromFree,
    InterfaceFromCongested,
    InterfaceBothSides,
    Interfaces,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSummary {
    pub family: WaveFamily,
    pub kind: FrontKind,
    pub strength: f64,
    pub is_interface: bool,
}

impl From<&Front> for WaveSummary {
    fn from(f: &Front) -> Self {
        Self {
            family: f.family,
            kind: f.kind,
            strength: f.strength,
            is_interface: f.is_interface(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub time: f64,
    pub position: f64,
    pub region: InteractionRegion,
    pub incoming: Vec<WaveSummary>,
    pub outgoing: Vec<WaveSummary>,
    /// Largest pressure among the incoming states.
    pub pressure_scale: f64,
    /// NaN when the run was not monitored.
    pub glimm_before: f64,
    pub glimm_after: f64,
}

/// The life of one front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub front: Front,
    pub t1: f64,
    /// Ended in an interaction rather than at the end of the run.
    pub terminated: bool,
}

impl Segment {
    pub fn t0(&self) -> f64 {
        self.front.t0
    }

    pub fn x0(&self) -> f64 {
        self.front.x0
    }

    pub fn x1(&self) -> f64 {
        self.front.position(self.t1)
    }

    pub fn row(&self) -> SegmentRow {
        let f = &self.front;
        SegmentRow {
            id: f.id,
            family: f.family.index(),
            kind: f.kind.as_str().to_string(),
            t0: f.t0,
            x0: f.x0,
            t1: self.t1,
            x1: self.x1(),
            p_left: f.left.p,
            u_left: f.left.u,
            p_right: f.right.p,
            u_right: f.right.u,
            strength: f.strength,
            is_interface: f.is_interface(),
        }
    }
}

/// Flat form of a segment, one row of the trajectory table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRow {
    pub id: u64,
    pub family: u8,
    pub kind: String,
    pub t0: f64,
    pub x0: f64,
    pub t1: f64,
    pub x1: f64,
    pub p_left: f64,
    pub u_left: f64,
    pub p_right: f64,
    pub u_right: f64,
    pub strength: f64,
    pub is_interface: bool,
}

/// Piecewise-linear trajectory of one interface, as `(t, x)` breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfacePath {
    pub label: u32,
    pub points: Vec<(f64, f64)>,
}

impl InterfacePath {
    pub fn start_time(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.0)
    }

    pub fn end_time(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.0)
    }

    /// Linear interpolation, clamped to the path's time span.
    pub fn position(&self, t: f64) -> f64 {
        let pts = &self.points;
        if pts.is_empty() {
            return f64::NAN;
        }
        if t <= pts[0].0 {
            return pts[0].1;
        }
        let k = pts.partition_point(|p| p.0 <= t);
        if k >= pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (t0, x0) = pts[k - 1];
        let (t1, x1) = pts[k];
        if t1 == t0 {
            x1
        } else {
            x0 + (x1 - x0) * (t - t0) / (t1 - t0)
        }
    }

    /// `(t_start, t_end, slope)` for every piece of positive duration.
    pub fn slopes(&self) -> Vec<(f64, f64, f64)> {
        self.points
            .windows(2)
            .filter(|w| w[1].0 > w[0].0)
            .map(|w| (w[0].0, w[1].0, (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
            .collect()
    }

    /// Slope in effect at time `t`.
    pub fn slope_at(&self, t: f64) -> Option<f64> {
        let s = self.slopes();
        s.iter()
            .find(|(a, b, _)| t >= *a && t < *b)
            .or_else(|| s.last().filter(|(_, b, _)| t == *b))
            .map(|x| x.2)
    }
}

/// Everything produced by one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub eos: EosParams,
    pub sim: SimConfig,
    pub initial: FrontConfiguration,
    pub segments: Vec<Segment>,
    pub records: Vec<InteractionRecord>,
    pub interface_paths: Vec<InterfacePath>,
    /// Glimm functional of the initial configuration (NaN if unmonitored).
    pub glimm_initial: f64,
    /// Last time reached.
    pub t_end: f64,
    /// False if the run stopped on the interaction cap.
    pub complete: bool,
}

impl History {
    pub fn leftmost_state(&self) -> State {
        self.initial.leftmost_state
    }

    pub fn interface_path(&self, label: u32) -> Option<&InterfacePath> {
        self.interface_paths.iter().find(|p| p.label == label)
    }

    pub fn rows(&self) -> Vec<SegmentRow> {
        self.segments.iter().map(Segment::row).collect()
    }

    /// Segments alive at time `t`, in spatial order.
    pub fn alive_at(&self, t: f64) -> Vec<&Segment> {
        let mut alive: Vec<&Segment> = self
            .segments
            .iter()
            .filter(|s| s.front.t0 <= t && (t < s.t1 || (!s.terminated && t == s.t1)))
            .collect();
        alive.sort_by(|a, b| {
            a.front
                .position(t)
                .total_cmp(&b.front.position(t))
                .then(a.front.speed.total_cmp(&b.front.speed))
        });
        alive
    }
}

/// Front configuration alive at time `t`, rebuilt from the segments.
pub fn configuration_at(history: &History, t: f64) -> Result<FrontConfiguration> {
    if !(t >= 0.0 && t <= history.t_end) {
        return Err(Error::OutOfRange {
            time: t,
            t_final: history.t_end,
        });
    }
    let fronts: Vec<Front> = history.alive_at(t).into_iter().map(|s| s.front).collect();
    let mut config = FrontConfiguration::empty(history.leftmost_state());
    config.time = t;
    config.next_id = fronts.iter().map(|f| f.id + 1).max().unwrap_or(0);
    config.fronts = fronts;
    Ok(config)
}

/// Exact solution of the front-tracking approximation at time `t`.
pub fn sample_solution(history: &History, t: f64) -> Result<Profile> {
    if !(t >= 0.0 && t <= history.t_end) {
        return Err(Error::OutOfRange {
            time: t,
            t_final: history.t_end,
        });
    }
    let alive = history.alive_at(t);
    let mut states = Vec::with_capacity(alive.len() + 1);
    states.push(history.leftmost_state());
    let mut breakpoints = Vec::with_capacity(alive.len());
    for s in alive {
        debug_assert_eq!(s.front.left, *states.last().unwrap());
        breakpoints.push(s.front.position(t));
        states.push(s.front.right);
    }
    // rounding can leave fronts born at one point a few ulps out of order
    for k in 1..breakpoints.len() {
        if breakpoints[k] < breakpoints[k - 1] {
            breakpoints[k] = breakpoints[k - 1];
        }
    }
    Ok(Profile {
        breakpoints,
        states,
    })
}
