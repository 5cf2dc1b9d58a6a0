//! Random Riemann problems checked against the brute-force law. The target
//! middle pressure is drawn first and the right velocity built from it, so
//! every band combination of left, middle and right states is exercised.

use congestion_core::riemann::{solve_riemann, State, WaveFamily, WaveKind};
use congestion_core::EosParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Law;

#[derive(Debug, Clone, Copy)]
pub enum Band {
    Free,
    Congested,
}

pub fn draw(rng: &mut ChaCha8Rng, band: Band) -> f64 {
    match band {
        Band::Free => rng.gen_range(0.05_f64.ln()..0.9_f64.ln()).exp(),
        Band::Congested => rng.gen_range(1.1_f64.ln()..8.0_f64.ln()).exp(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct Campaign {
    pub problems: usize,
    pub shocks: usize,
    pub worst_pressure: f64,
    pub worst_rh: f64,
    pub lax_failures: usize,
    /// Solver errors and endpoint mismatches, first few only.
    pub errors: Vec<String>,
    pub error_count: usize,
}

impl Campaign {
    fn fail(&mut self, msg: String) {
        self.error_count += 1;
        if self.errors.len() < 5 {
            self.errors.push(msg);
        }
    }
}

/// `per_combo` problems for each of the four (left, right) band pairs.
pub fn run(per_combo: usize, seed: u64) -> Campaign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let combos = [
        (Band::Free, Band::Free),
        (Band::Free, Band::Congested),
        (Band::Congested, Band::Free),
        (Band::Congested, Band::Congested),
    ];
    let mut out = Campaign::default();
    for (a, b) in combos {
        for _ in 0..per_combo {
            let eps = 10f64.powf(rng.gen_range(-4.0..-1.0));
            let eos = EosParams::new(1.0, eps, 2.0, 2.0).unwrap();
            let law = Law {
                kappa: 1.0,
                eps,
                gi: 2.0,
                gc: 2.0,
            };
            let (pl, pr) = (draw(&mut rng, a), draw(&mut rng, b));
            let pm_band = if rng.gen_bool(0.5) {
                Band::Free
            } else {
                Band::Congested
            };
            let target = draw(&mut rng, pm_band);
            let ul = rng.gen_range(-1.0..1.0);
            let ur = ul - law.phi(target, pl) - law.phi(target, pr);
            let brute = law.middle_pressure(pl, ul, pr, ur);
            if (brute - target).abs() > 1e-9 * target {
                out.fail(format!("oracle drift: {brute} vs {target}"));
            }
            out.problems += 1;
            let (l, r) = (State::new(pl, ul), State::new(pr, ur));
            let fan = match solve_riemann(l, r, &eos) {
                Ok(f) => f,
                Err(e) => {
                    out.fail(format!("eps {eps}: {l:?} | {r:?}: {e}"));
                    continue;
                }
            };
            let pm = if fan.waves.len() == 2 {
                fan.waves[0].right.p
            } else {
                fan.middle.p
            };
            out.worst_pressure = out.worst_pressure.max((pm - brute).abs());
            if fan.waves.first().map(|w| w.left) != Some(l)
                || fan.waves.last().map(|w| w.right) != Some(r)
            {
                out.fail(format!("eps {eps}: fan does not join {l:?} to {r:?}"));
            }
            for w in fan.waves.iter().filter(|w| w.kind == WaveKind::Shock) {
                out.shocks += 1;
                let (tl, tr) = (law.tau(w.left.p), law.tau(w.right.p));
                let du = w.right.u - w.left.u;
                let rh = du * du + (w.right.p - w.left.p) * (tr - tl);
                out.worst_rh = out.worst_rh.max(rh.abs());
                let sign = match w.family {
                    WaveFamily::One => -1.0,
                    WaveFamily::Two => 1.0,
                };
                let (ll, lr) = (sign * law.sound(w.left.p), sign * law.sound(w.right.p));
                if !(ll > w.speed_lo && w.speed_lo > lr) {
                    out.lax_failures += 1;
                }
            }
        }
    }
    out
}
