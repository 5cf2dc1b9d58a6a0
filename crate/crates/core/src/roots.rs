//! Bracketed scalar root finding.
//!
//! Everything in this crate that inverts a monotone function goes through
//! [`newton_bisect`]: Newton steps are accepted only while they stay inside
//! the current sign-change bracket, otherwise the bracket is bisected. For
//! positive quantities spanning many decades the bisection can be taken in
//! log-space so that a bracket like `[1e-9, 1e3]` shrinks in a few steps.

use crate::error::{Error, Result};

/// Iteration cap shared by all bracketed solves.
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Relative step size at which the iteration stops.
    pub xtol: f64,
    pub max_iter: usize,
    /// Bisect geometrically when both bracket ends are positive.
    pub log_bisection: bool,
    pub context: &'static str,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-14,
            max_iter: MAX_ITERATIONS,
            log_bisection: false,
            context: "root",
        }
    }
}

fn midpoint(a: f64, b: f64, log: bool) -> f64 {
    if log && a > 0.0 && b > 0.0 && (a / b > 4.0 || b / a > 4.0) {
        (a * b).sqrt()
    } else {
        0.5 * (a + b)
    }
}

/// Finds a root of `f` inside the bracket `[a, b]`.
///
/// `f` returns the value and the derivative. The bracket must contain a sign
/// change; the ends may be given in either order.
pub fn newton_bisect<F>(
    mut f: F,
    a: f64,
    b: f64,
    guess: Option<f64>,
    opts: RootOptions,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (fa, _) = f(a);
    if fa == 0.0 {
        return Ok(a);
    }
    let (fb, _) = f(b);
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::Domain(format!(
            "{}: root not bracketed (f({a:e}) = {fa:e}, f({b:e}) = {fb:e})",
            opts.context
        )));
    }
    // `neg` always holds the end where f < 0.
    let (mut neg, mut pos) = if fa < 0.0 { (a, b) } else { (b, a) };
    let lo = neg.min(pos);
    let hi = neg.max(pos);
    let mut x = match guess {
        Some(g) if g > lo && g < hi => g,
        _ => midpoint(lo, hi, opts.log_bisection),
    };

    for _ in 0..opts.max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let (lo, hi) = (neg.min(pos), neg.max(pos));
        let scale = x.abs().max(f64::MIN_POSITIVE);
        if hi - lo <= opts.xtol * scale {
            return Ok(x);
        }

        let newton = x - fx / dfx;
        let next = if dfx.is_finite() && dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            midpoint(lo, hi, opts.log_bisection)
        };
        if (next - x).abs() <= opts.xtol * scale {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        context: opts.context,
    })
}

/// Plain bisection on a sign change, without derivative information.
pub fn bisect<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Domain(format!(
            "bisect: no sign change on [{a:e}, {b:e}]"
        )));
    }
    let (mut neg, mut pos) = if fa < 0.0 { (a, b) } else { (b, a) };
    for _ in 0..max_iter {
        let mid = 0.5 * (neg + pos);
        if (pos - neg).abs() <= xtol * mid.abs().max(f64::MIN_POSITIVE) || mid == neg || mid == pos
        {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            neg = mid;
        } else {
            pos = mid;
        }
    }
    Ok(0.5 * (neg + pos))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_finds_sqrt_two() {
        let r = newton_bisect(
            |x| (x * x - 2.0, 2.0 * x),
            0.0,
            2.0,
            None,
            RootOptions::default(),
        )
        .unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_survives_bad_derivative() {
        // derivative reported as zero everywhere: pure bisection
        let r = newton_bisect(
            |x| (x.powi(3) - 8.0, 0.0),
            10.0,
            0.0,
            None,
            RootOptions::default(),
        )
        .unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_bisection_handles_wide_brackets() {
        let opts = RootOptions {
            log_bisection: true,
            ..Default::default()
        };
        let r = newton_bisect(|x| (x.ln() + 20.0, f64::NAN), 1e-30, 1e3, None, opts).unwrap();
        assert!((r / (-20f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbracketed_is_an_error() {
        assert!(newton_bisect(
            |x| (x * x + 1.0, 2.0 * x),
            -1.0,
            1.0,
            None,
            RootOptions::default()
        )
        .is_err());
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn bisection_matches_known_root() {
        let r = bisect(|x| x.cos() - x, 0.0, 1.0, 1e-15, 200).unwrap();
        assert!((r - 0.739_085_133_215_160_6).abs() < 1e-14);
    }
}
