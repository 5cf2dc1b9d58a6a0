//! Singular equation of state and its inverse.
//!
//! The pressure law is `P(τ) = κ/τ^γi + ε/(τ-1)^γc` for `τ > 1`. Its inverse
//! `T(p)` (specific volume as a function of pressure) has no closed form and is
//! computed by a bracketed Newton iteration in the variable `s = τ - 1`, which
//! keeps full relative precision near the asymptote `τ → 1⁺`.
//!
//! With `eps == 0` the same type describes the saturated limit law
//! `T(p) = (κ/p)^{1/γi}` below `κ` and `T(p) = 1` above.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{newton_bisect, RootOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EosParams {
    pub kappa: f64,
    pub eps: f64,
    pub gamma_i: f64,
    pub gamma_c: f64,
}

impl Default for EosParams {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            eps: 1e-2,
            gamma_i: 2.0,
            gamma_c: 2.0,
        }
    }
}

impl EosParams {
    pub fn new(kappa: f64, eps: f64, gamma_i: f64, gamma_c: f64) -> Result<Self> {
        let params = Self {
            kappa,
            eps,
            gamma_i,
            gamma_c,
        };
        params.validate()?;
        Ok(params)
    }

    /// All violated invariants, one message each.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            out.push(format!("eos.kappa must be positive (got {})", self.kappa));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            out.push(format!("eos.eps must be nonnegative (got {})", self.eps));
        }
        if !(self.gamma_i > 1.0 && self.gamma_i.is_finite()) {
            out.push(format!("eos.gamma_i must exceed 1 (got {})", self.gamma_i));
        }
        if !(self.gamma_c > 1.0 && self.gamma_c.is_finite()) {
            out.push(format!("eos.gamma_c must exceed 1 (got {})", self.gamma_c));
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

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..*self }
    }

    /// `eps == 0`: the saturated (hard congestion) law.
    pub fn is_limit(&self) -> bool {
        self.eps == 0.0
    }

    /// `ε^{1/(2γc)}`, the size of velocity jumps across congested waves of unit
    /// pressure strength.
    pub fn velocity_scale(&self) -> f64 {
        self.eps.powf(0.5 / self.gamma_c)
    }

    #[inline]
    pub(crate) fn p_raw(&self, tau: f64) -> f64 {
        let iso = self.kappa * tau.powf(-self.gamma_i);
        if self.eps > 0.0 {
            iso + self.eps * (tau - 1.0).powf(-self.gamma_c)
        } else {
            iso
        }
    }

    #[inline]
    pub(crate) fn dp_raw(&self, tau: f64) -> f64 {
        let iso = -self.kappa * self.gamma_i * tau.powf(-self.gamma_i - 1.0);
        if self.eps > 0.0 {
            iso - self.eps * self.gamma_c * (tau - 1.0).powf(-self.gamma_c - 1.0)
        } else {
            iso
        }
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        let ok = if self.eps > 0.0 {
            tau > 1.0
        } else {
            tau >= 1.0
        };
        if ok && tau.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "specific volume {tau} outside the domain of the pressure law (eps = {})",
                self.eps
            )))
        }
    }

    /// `P_ε(τ)`.
    pub fn pressure(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        Ok(self.p_raw(tau))
    }

    /// `P_ε'(τ)`, always negative.
    pub fn pressure_deriv(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        Ok(self.dp_raw(tau))
    }

    /// `T_ε(p)`, the inverse of [`pressure`](Self::pressure).
    pub fn specific_volume(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!(
                "pressure must be positive (got {p})"
            )));
        }
        if self.eps == 0.0 {
            return Ok(if p < self.kappa {
                (self.kappa / p).powf(1.0 / self.gamma_i)
            } else {
                1.0
            });
        }
        let (k, e, gi, gc) = (self.kappa, self.eps, self.gamma_i, self.gamma_c);
        let g = |s: f64| {
            let v = k * (1.0 + s).powf(-gi) + e * s.powf(-gc) - p;
            let d = -k * gi * (1.0 + s).powf(-gi - 1.0) - e * gc * s.powf(-gc - 1.0);
            (v, d)
        };
        // Each term alone matching p (resp. p/2) bounds the root from below (resp. above).
        let lo = (e / p).powf(1.0 / gc).max((k / p).powf(1.0 / gi) - 1.0);
        let mut hi = (2.0 * e / p)
            .powf(1.0 / gc)
            .max((2.0 * k / p).powf(1.0 / gi) - 1.0);
        let mut grow = 0;
        while g(hi).0 > 0.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 2000 {
                return Err(Error::NoConvergence {
                    iterations: grow,
                    context: "specific volume bracket",
                });
            }
        }
        let opts = RootOptions {
            xtol: 1e-15,
            log_bisection: true,
            context: "specific volume",
            ..Default::default()
        };
        let s = newton_bisect(g, lo, hi, Some(lo), opts)?;
        Ok(1.0 + s)
    }

    /// `T_ε'(p) = 1 / P_ε'(T_ε(p))`.
    pub fn specific_volume_deriv(&self, p: f64) -> Result<f64> {
        if self.eps == 0.0 {
            if p > 0.0 && p < self.kappa {
                let t = (self.kappa / p).powf(1.0 / self.gamma_i);
                return Ok(-t / (self.gamma_i * p));
            }
            return Err(Error::Domain(format!(
                "limit law has no derivative at p = {p} >= kappa = {}",
                self.kappa
            )));
        }
        let tau = self.specific_volume(p)?;
        Ok(1.0 / self.dp_raw(tau))
    }

    /// Characteristic speed `sqrt(-1/T'(p))` (the positive eigenvalue).
    pub fn sound_speed(&self, p: f64) -> Result<f64> {
        if self.eps == 0.0 {
            return Ok((-1.0 / self.specific_volume_deriv(p)?).sqrt());
        }
        let tau = self.specific_volume(p)?;
        Ok((-self.dp_raw(tau)).sqrt())
    }

    /// Sound speed for a specific volume already known.
    pub(crate) fn sound_speed_at_tau(&self, tau: f64) -> f64 {
        (-self.dp_raw(tau)).sqrt()
    }

    /// `(λ₁, λ₂) = (-c, c)`.
    pub fn eigenvalues(&self, p: f64) -> Result<(f64, f64)> {
        let c = self.sound_speed(p)?;
        Ok((-c, c))
    }

    /// Internal-energy potential `Π(τ)` with `Π' = -P` and `Π(2) = 0`.
    pub fn energy_potential(&self, tau: f64) -> f64 {
        let prim = |t: f64| {
            let mut v = self.kappa * t.powf(1.0 - self.gamma_i) / (1.0 - self.gamma_i);
            if self.eps > 0.0 {
                v += self.eps * (t - 1.0).powf(1.0 - self.gamma_c) / (1.0 - self.gamma_c);
            }
            v
        };
        prim(2.0) - prim(tau)
    }
}

/// Free-function forms of the main operations.
pub fn pressure(tau: f64, params: &EosParams) -> Result<f64> {
    params.pressure(tau)
}

pub fn specific_volume(p: f64, params: &EosParams) -> Result<f64> {
    params.specific_volume(p)
}

pub fn specific_volume_deriv(p: f64, params: &EosParams) -> Result<f64> {
    params.specific_volume_deriv(p)
}

pub fn eigenvalues(p: f64, params: &EosParams) -> Result<(f64, f64)> {
    params.eigenvalues(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    Free,
    Congested,
    Intermediate,
}

/// Pressure bands used to label states as free or congested. The bands do not
/// depend on ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierThresholds {
    pub pf_lo: f64,
    pub pf_hi: f64,
    pub pc_lo: f64,
    pub pc_hi: f64,
}

impl ClassifierThresholds {
    /// Bands of half-width `half_width` around a free and a congested
    /// reference pressure, clipped so that they stay on their side of `kappa`.
    pub fn around(p_free: f64, p_congested: f64, half_width: f64, kappa: f64) -> Self {
        let pf_lo = (p_free - half_width).max(0.5 * p_free);
        let pf_hi = (p_free + half_width)
            .min(0.5 * (p_free.max(pf_lo) + kappa))
            .max(p_free);
        let pc_lo = (p_congested - half_width)
            .max(0.5 * (kappa + p_congested))
            .min(p_congested);
        let pc_hi = p_congested + half_width;
        Self {
            pf_lo,
            pf_hi,
            pc_lo,
            pc_hi,
        }
    }

    pub fn violations(&self, kappa: f64) -> Vec<String> {
        let mut out = Vec::new();
        let ordered = [self.pf_lo, self.pf_hi, kappa, self.pc_lo, self.pc_hi];
        if self.pf_lo <= 0.0 {
            out.push(format!(
                "thresholds.pf_lo must be positive (got {})",
                self.pf_lo
            ));
        }
        let names = ["pf_lo", "pf_hi", "kappa", "pc_lo", "pc_hi"];
        for i in 0..4 {
            if !(ordered[i] < ordered[i + 1]) {
                out.push(format!(
                    "thresholds must satisfy pf_lo < pf_hi < kappa < pc_lo < pc_hi: {} = {} is not below {} = {}",
                    names[i],
                    ordered[i],
                    names[i + 1],
                    ordered[i + 1]
                ));
            }
        }
        out
    }

    pub fn validate(&self, kappa: f64) -> Result<()> {
        let v = self.violations(kappa);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v.join("; ")))
        }
    }
}

pub fn classify(p: f64, thresholds: &ClassifierThresholds) -> StateClass {
    if p >= thresholds.pf_lo && p <= thresholds.pf_hi {
        StateClass::Free
    } else if p >= thresholds.pc_lo && p <= thresholds.pc_hi {
        StateClass::Congested
    } else {
        StateClass::Intermediate
    }
}
