use serde::{Deserialize, Serialize};

use crate::eos::EosParams;
use crate::error::Result;
use crate::riemann::State;
use crate::wft::{History, Segment};

/// Space-time box carrying the test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

/// Tensor grid of `nt × nx` hat functions. The hats sit on the interior
/// nodes of a uniform grid over the window, so each one vanishes on the
/// window boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestGrid {
    pub nt: usize,
    pub nx: usize,
    /// Computed from the run when absent.
    pub window: Option<Window>,
}

impl Default for TestGrid {
    fn default() -> Self {
        Self {
            nt: 32,
            nx: 32,
            window: None,
        }
    }
}

impl TestGrid {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.nt == 0 || self.nx == 0 {
            out.push("diagnostics.grid needs at least one hat per axis".into());
        }
        if let Some(w) = self.window {
            if !(w.t1 > w.t0 && w.x1 > w.x0) {
                out.push("diagnostics.grid.window must have positive extent".into());
            }
        }
        out
    }
}

/// Space-time extent of a run: all segment endpoints, padded by 5%.
pub fn run_window(history: &History) -> Window {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &history.segments {
        for x in [s.x0(), s.x1()] {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1.0);
    Window {
        t0: 0.0,
        t1: history.t_end,
        x0: lo - pad,
        x1: hi + pad,
    }
}

struct Axis {
    a: f64,
    h: f64,
    n: usize,
}

impl Axis {
    fn new(a: f64, b: f64, n: usize) -> Self {
        Self {
            a,
            h: (b - a) / (n + 1) as f64,
            n,
        }
    }

    fn node(&self, k: usize) -> f64 {
        self.a + k as f64 * self.h
    }

    /// Value of hat `k` (1-based, centred on node `k`) at `y`.
    fn hat(&self, k: usize, y: f64) -> f64 {
        (1.0 - ((y - self.node(k)) / self.h).abs()).max(0.0)
    }

    /// Cell index containing `y`, clamped to `0..=n`.
    fn cell(&self, y: f64) -> usize {
        (((y - self.a) / self.h).floor().max(0.0) as usize).min(self.n)
    }
}

/// `∬ A φ_t + B φ_x` for every hat, with a piecewise-constant solution whose
/// jumps are the run's segments. By the divergence theorem this is
/// `Σ_fronts ∫ φ(t, x(t)) (ẋ [A] - [B]) dt`; along each front the integrand
/// is piecewise quadratic between grid crossings, so Simpson's rule on those
/// pieces is exact.
fn hat_integrals<const K: usize>(
    segments: &[Segment],
    grid: &TestGrid,
    window: Window,
    jump: impl Fn(&Segment) -> [f64; K],
) -> Vec<[f64; K]> {
    let ta = Axis::new(window.t0, window.t1, grid.nt);
    let xa = Axis::new(window.x0, window.x1, grid.nx);
    let mut acc = vec![[0.0; K]; grid.nt * grid.nx];
    let mut cuts = Vec::new();
    for seg in segments {
        let f = &seg.front;
        let (a, b) = (seg.t0().max(window.t0), seg.t1.min(window.t1));
        if !(b > a) {
            continue;
        }
        let r = jump(seg);
        if r.iter().all(|v| *v == 0.0) {
            continue;
        }
        cuts.clear();
        cuts.push(a);
        cuts.push(b);
        for k in ta.cell(a) + 1..=ta.cell(b) {
            let t = ta.node(k);
            if t > a && t < b {
                cuts.push(t);
            }
        }
        if f.speed != 0.0 {
            let (xa0, xb0) = (f.position(a), f.position(b));
            let (lo, hi) = (xa0.min(xb0), xa0.max(xb0));
            for k in xa.cell(lo) + 1..=xa.cell(hi) {
                let t = f.t0 + (xa.node(k) - f.x0) / f.speed;
                if t > a && t < b {
                    cuts.push(t);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            if !(s1 > s0) {
                continue;
            }
            let sm = 0.5 * (s0 + s1);
            let xm = f.position(sm);
            if xm <= window.x0 || xm >= window.x1 {
                continue;
            }
            let (ct, cx) = (ta.cell(sm), xa.cell(xm));
            let weight = (s1 - s0) / 6.0;
            for i in [ct, ct + 1] {
                if i == 0 || i > ta.n {
                    continue;
                }
                for j in [cx, cx + 1] {
                    if j == 0 || j > xa.n {
                        continue;
                    }
                    let phi = |s: f64| ta.hat(i, s) * xa.hat(j, f.position(s));
                    let q = weight * (phi(s0) + 4.0 * phi(sm) + phi(s1));
                    let slot = &mut acc[(i - 1) * xa.n + (j - 1)];
                    for c in 0..K {
                        slot[c] += q * r[c];
                    }
                }
            }
        }
    }
    acc
}

fn tau(eos: &EosParams, s: &State) -> f64 {
    eos.specific_volume(s.p).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max |∬ τ φ_t - u φ_x|` over the hats.
    pub weak_tau: f64,
    /// `max |∬ u φ_t + p φ_x|` over the hats.
    pub weak_u: f64,
    /// `min ∬ η φ_t + q φ_x` over the hats; negative values flag entropy
    /// production of the wrong sign.
    pub entropy: f64,
    pub window: Window,
    pub nt: usize,
    pub nx: usize,
}

fn resolve_window(history: &History, grid: &TestGrid) -> Window {
    grid.window.unwrap_or_else(|| run_window(history))
}

/// Largest weak-form residuals of the two conservation laws.
pub fn weak_residual(history: &History, grid: &TestGrid) -> (f64, f64) {
    let eos = history.eos;
    let window = resolve_window(history, grid);
    let acc = hat_integrals(&history.segments, grid, window, |s| {
        let f = &s.front;
        let (tl, tr) = (tau(&eos, &f.left), tau(&eos, &f.right));
        let du = f.right.u - f.left.u;
        let dp = f.right.p - f.left.p;
        [f.speed * (tr - tl) + du, f.speed * du - dp]
    });
    acc.iter().fold((0.0, 0.0), |(a, b), r| {
        (f64::max(a, r[0].abs()), f64::max(b, r[1].abs()))
    })
}

/// Energy `u²/2 + Π(τ)`.
pub fn energy(eos: &EosParams, s: &State) -> f64 {
    0.5 * s.u * s.u + eos.energy_potential(tau(eos, s))
}

/// Most negative entropy integral over the (nonnegative) hats.
pub fn entropy_residual(history: &History, grid: &TestGrid) -> f64 {
    let eos = history.eos;
    let window = resolve_window(history, grid);
    let acc = hat_integrals(&history.segments, grid, window, |s| {
        let f = &s.front;
        let d_eta = energy(&eos, &f.right) - energy(&eos, &f.left);
        let d_q = f.right.p * f.right.u - f.left.p * f.left.u;
        [f.speed * d_eta - d_q]
    });
    acc.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min)
}

pub fn residuals(history: &History, grid: &TestGrid) -> Result<Residuals> {
    let (weak_tau, weak_u) = weak_residual(history, grid);
    Ok(Residuals {
        weak_tau,
        weak_u,
        entropy: entropy_residual(history, grid),
        window: resolve_window(history, grid),
        nt: grid.nt,
        nx: grid.nx,
    })
}
