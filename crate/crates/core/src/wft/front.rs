use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::riemann::{State, WaveFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrontKind {
    Shock,
    RarefactionPiece,
}

impl FrontKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontKind::Shock => "shock",
            FrontKind::RarefactionPiece => "rarefaction",
        }
    }
}

/// A discontinuity travelling on the straight line `x0 + speed (t - t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub id: u64,
    pub family: WaveFamily,
    pub kind: FrontKind,
    /// Interface label, if this front is one of the large interfaces.
    pub interface: Option<u32>,
    pub t0: f64,
    pub x0: f64,
    pub speed: f64,
    pub left: State,
    pub right: State,
    pub strength: f64,
}

impl Front {
    pub fn position(&self, t: f64) -> f64 {
        self.x0 + self.speed * (t - self.t0)
    }

    pub fn is_interface(&self) -> bool {
        self.interface.is_some()
    }
}

/// All fronts alive at `time`, ordered by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontConfiguration {
    pub time: f64,
    pub fronts: Vec<Front>,
    pub leftmost_state: State,
    pub(crate) next_id: u64,
}

impl FrontConfiguration {
    pub fn empty(state: State) -> Self {
        Self {
            time: 0.0,
            fronts: Vec::new(),
            leftmost_state: state,
            next_id: 0,
        }
    }

    pub fn rightmost_state(&self) -> State {
        self.fronts.last().map_or(self.leftmost_state, |f| f.right)
    }

    pub fn positions(&self) -> Vec<f64> {
        self.fronts.iter().map(|f| f.position(self.time)).collect()
    }

    /// Index of the front carrying interface label `label`.
    pub fn interface_index(&self, label: u32) -> Option<usize> {
        self.fronts.iter().position(|f| f.interface == Some(label))
    }

    /// Index of the first flagged interface front.
    pub fn first_interface(&self) -> Option<usize> {
        self.fronts
            .iter()
            .enumerate()
            .filter_map(|(k, f)| f.interface.map(|l| (l, k)))
            .min()
            .map(|(_, k)| k)
    }

    /// The piecewise-constant solution at the configuration time.
    pub fn profile(&self) -> Profile {
        let mut states = Vec::with_capacity(self.fronts.len() + 1);
        states.push(self.leftmost_state);
        states.extend(self.fronts.iter().map(|f| f.right));
        Profile {
            breakpoints: self.positions(),
            states,
        }
    }

    /// Checks that side states chain exactly and positions are sorted.
    pub fn check(&self) -> Result<()> {
        let mut prev_state = self.leftmost_state;
        let mut prev_x = f64::NEG_INFINITY;
        for f in &self.fronts {
            if f.left != prev_state {
                return Err(Error::Ordering(format!(
                    "front {} left state {:?} does not match {:?}",
                    f.id, f.left, prev_state
                )));
            }
            let x = f.position(self.time);
            // tolerate rounding between fronts born at the same point
            if x < prev_x - 1e-9 * (1.0 + x.abs()) {
                return Err(Error::Ordering(format!(
                    "front {} at x = {x} lies left of its neighbour at {prev_x}",
                    f.id
                )));
            }
            prev_state = f.right;
            prev_x = prev_x.max(x);
        }
        Ok(())
    }
}
