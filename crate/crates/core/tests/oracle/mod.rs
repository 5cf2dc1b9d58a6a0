//! Brute-force reference for the pressure law and the Riemann problem,
//! written without any of the library's numerics: bisection everywhere and
//! composite Gauss-Legendre quadrature with nodes computed on the spot.

#![allow(dead_code)]

pub mod campaign;

#[derive(Debug, Clone, Copy)]
pub struct Law {
    pub kappa: f64,
    pub eps: f64,
    pub gi: f64,
    pub gc: f64,
}

impl Law {
    pub fn p(&self, tau: f64) -> f64 {
        self.kappa * tau.powf(-self.gi) + self.eps * (tau - 1.0).powf(-self.gc)
    }

    /// `-P'(τ)`.
    pub fn neg_dp(&self, tau: f64) -> f64 {
        self.kappa * self.gi * tau.powf(-self.gi - 1.0)
            + self.eps * self.gc * (tau - 1.0).powf(-self.gc - 1.0)
    }

    /// Inverse by bisection on `ln(τ - 1)`.
    pub fn tau(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = (-700.0_f64, 700.0_f64);
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.p(1.0 + mid.exp()) > p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        1.0 + (0.5 * (lo + hi)).exp()
    }

    pub fn sound(&self, p: f64) -> f64 {
        self.neg_dp(self.tau(p)).sqrt()
    }

    /// `∫_{τa}^{τb} sqrt(-P'(τ)) dτ`, in `y = ln(τ - 1)`.
    pub fn sound_integral(&self, ta: f64, tb: f64) -> f64 {
        let (ya, yb) = ((ta - 1.0).ln(), (tb - 1.0).ln());
        gauss(
            |y| {
                let s = y.exp();
                self.neg_dp(1.0 + s).sqrt() * s
            },
            ya,
            yb,
            64,
        )
    }

    /// Velocity drop along the curve through base pressure `b`: the shock
    /// branch for `p ≥ b`, the rarefaction branch below.
    pub fn phi(&self, p: f64, b: f64) -> f64 {
        let (tp, tb) = (self.tau(p), self.tau(b));
        if p >= b {
            ((tb - tp) * (p - b)).max(0.0).sqrt()
        } else {
            -self.sound_integral(tb, tp)
        }
    }

    /// Middle pressure by bisection in `ln p`.
    pub fn middle_pressure(&self, pl: f64, ul: f64, pr: f64, ur: f64) -> f64 {
        let g = |p: f64| self.phi(p, pl) + self.phi(p, pr) + ur - ul;
        let (mut lo, mut hi) = ((pl.min(pr) * 1e-6).ln(), (pl.max(pr) * 1e6).ln());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if g(mid.exp()) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the `n`-point rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite 16-point Gauss-Legendre over `panels` equal panels.
pub fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let m = a + (k as f64 + 0.5) * h;
            rule.iter()
                .map(|(x, w)| w * f(m + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}
