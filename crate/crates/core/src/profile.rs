//! Piecewise-constant `(p, u)` profiles on the real line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riemann::State;

/// `states[k]` holds on `(breakpoints[k-1], breakpoints[k])`, with the first
/// and last states extending to `∓∞`. Breakpoints are nondecreasing; repeated
/// breakpoints carry zero-width cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub breakpoints: Vec<f64>,
    pub states: Vec<State>,
}

/// Scalar extracted from a state (and its specific volume).
pub type Component<'a> = &'a dyn Fn(&State) -> f64;

impl Profile {
    pub fn new(breakpoints: Vec<f64>, states: Vec<State>) -> Result<Self> {
        if states.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidParams(format!(
                "profile needs one more state than breakpoints ({} states, {} breakpoints)",
                states.len(),
                breakpoints.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] <= w[1]))
            || breakpoints.iter().any(|x| !x.is_finite())
        {
            return Err(Error::Ordering(
                "profile breakpoints must be finite and nondecreasing".into(),
            ));
        }
        if let Some(s) = states
            .iter()
            .find(|s| !(s.p > 0.0 && s.p.is_finite() && s.u.is_finite()))
        {
            return Err(Error::Domain(format!(
                "profile state {s:?} is not admissible"
            )));
        }
        Ok(Self {
            breakpoints,
            states,
        })
    }

    pub fn constant(state: State) -> Self {
        Self {
            breakpoints: Vec::new(),
            states: vec![state],
        }
    }

    pub fn leftmost(&self) -> State {
        self.states[0]
    }

    pub fn rightmost(&self) -> State {
        *self.states.last().expect("profile has at least one state")
    }

    /// State at `x`; at a breakpoint the right-hand value is returned.
    pub fn state_at(&self, x: f64) -> State {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        self.states[k]
    }

    /// Value just left of `x`.
    pub fn state_left_of(&self, x: f64) -> State {
        let k = self.breakpoints.partition_point(|&b| b < x);
        self.states[k]
    }

    /// Jumps as `(position, left, right)`, skipping repeated states.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, State, State)> + '_ {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(k, &x)| (x, self.states[k], self.states[k + 1]))
            .filter(|(_, l, r)| l != r)
    }

    /// Total variation of `f` over jumps located in `[lo, hi]`, optionally
    /// ignoring the jumps located exactly at `exclude`.
    pub fn total_variation(&self, f: Component, lo: f64, hi: f64, exclude: Option<f64>) -> f64 {
        self.jumps()
            .filter(|(x, _, _)| *x >= lo && *x <= hi && Some(*x) != exclude)
            .map(|(_, l, r)| (f(&r) - f(&l)).abs())
            .sum()
    }

    /// `∫_lo^hi |f(self) - f(other)| dx`, exact for piecewise-constant data.
    pub fn l1_distance(&self, other: &Profile, f: Component, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .filter(|&x| x > lo && x < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                (f(&self.state_at(m)) - f(&other.state_at(m))).abs() * (w[1] - w[0])
            })
            .sum()
    }

    /// Copy with every breakpoint shifted by `-shift`.
    pub fn shifted(&self, shift: f64) -> Profile {
        Profile {
            breakpoints: self.breakpoints.iter().map(|x| x - shift).collect(),
            states: self.states.clone(),
        }
    }
}

/// An initial profile together with the indices of the breakpoints that are
/// interfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Datum {
    pub profile: Profile,
    pub interfaces: Vec<usize>,
}

impl Datum {
    pub fn new(profile: Profile, interfaces: Vec<usize>) -> Result<Self> {
        if let Some(&k) = interfaces.iter().find(|&&k| k >= profile.breakpoints.len()) {
            return Err(Error::InvalidParams(format!(
                "interface index {k} has no breakpoint"
            )));
        }
        Ok(Self {
            profile,
            interfaces,
        })
    }

    /// Positions of the interface breakpoints.
    pub fn interface_positions(&self) -> Vec<f64> {
        self.interfaces
            .iter()
            .map(|&k| self.profile.breakpoints[k])
            .collect()
    }
}
