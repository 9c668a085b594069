//! Safeguarded scalar root-finding. Every one-dimensional subproblem in the
//! solvers (deadline bisection, bandwidth-price bisection, the per-device
//! SNR inversions) reduces to one of these routines.

use crate::error::{Error, Result};

/// Relative bracket width at which bisection stops; a handful of ulps.
pub const MACHINE_REL: f64 = 4.0 * f64::EPSILON;

/// Bisection on a monotone (decreasing or increasing) function until the
/// bracket shrinks to `rel_tol` relative width or `max_iter` halvings.
///
/// `lo` and `hi` must bracket the root: `f(lo)` and `f(hi)` have opposite
/// signs (zero counts as either side). Returns the midpoint of the final
/// bracket.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracketing(format!(
            "no sign change on [{lo:.6e}, {hi:.6e}]: f = ({flo:.6e}, {fhi:.6e})"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at machine resolution
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Newton iteration safeguarded by a maintained bracket: steps that leave the
/// bracket, or shrink it too slowly, fall back to bisection.
///
/// `f_df` returns `(f(x), f'(x))`; `f` must be increasing on `[lo, hi]` with
/// `f(lo) <= 0 <= f(hi)`.
pub fn newton_bisect<F: FnMut(f64) -> (f64, f64)>(
    mut f_df: F,
    mut lo: f64,
    mut hi: f64,
    mut x: f64,
    rel_tol: f64,
    max_iter: usize,
) -> f64 {
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..max_iter {
        let (fx, dfx) = f_df(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let width = hi - lo;
        if width <= rel_tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            return 0.5 * (lo + hi);
        }
        let newton = x - fx / dfx;
        x = if dfx > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    0.5 * (lo + hi)
}

/// `(1+S)·ln(1+S) − S`, the ∂B-stationarity kernel of the bandwidth search.
/// Strictly increasing on S >= 0 with value 0 at S = 0.
pub fn curvature_gap(s: f64) -> f64 {
    if s < 1e-3 {
        // Series around 0: S²/2 − S³/6 + S⁴/12 − S⁵/20.
        let s2 = s * s;
        s2 * (0.5 - s / 6.0 + s2 / 12.0 - s2 * s / 20.0)
    } else {
        (1.0 + s) * s.ln_1p() - s
    }
}

/// Derivative of [`curvature_gap`], `ln(1+S)`.
fn curvature_gap_prime(s: f64) -> f64 {
    s.ln_1p()
}

/// Inverse of [`curvature_gap`]: the unique S >= 0 with
/// `(1+S)·ln(1+S) − S = y`.
pub fn invert_curvature_gap(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    // Bracket by doubling from a small-y asymptote S ≈ sqrt(2y).
    let mut hi = (2.0 * y).sqrt().max(1e-12);
    while curvature_gap(hi) < y {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let lo = 0.0;
    newton_bisect(
        |s| (curvature_gap(s) - y, curvature_gap_prime(s)),
        lo,
        hi,
        hi * 0.5,
        1e-14,
        200,
    )
}

/// `ln(1+S) − S/(1+S)`, the natural-log marginal-rate kernel: `∂r/∂B` equals
/// this divided by ln 2. Strictly increasing on S >= 0, value 0 at S = 0.
pub fn rate_margin(s: f64) -> f64 {
    if s < 1e-3 {
        // Series: S²/2 − 2S³/3 + 3S⁴/4 − 4S⁵/5.
        let s2 = s * s;
        s2 * (0.5 - 2.0 * s / 3.0 + 0.75 * s2 - 0.8 * s2 * s)
    } else {
        s.ln_1p() - s / (1.0 + s)
    }
}

fn rate_margin_prime(s: f64) -> f64 {
    let t = 1.0 + s;
    s / (t * t)
}

/// Inverse of [`rate_margin`].
pub fn invert_rate_margin(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let mut hi = (2.0 * y).sqrt().max(1e-12);
    while rate_margin(hi) < y {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    newton_bisect(
        |s| (rate_margin(s) - y, rate_margin_prime(s)),
        0.0,
        hi,
        hi * 0.5,
        1e-14,
        200,
    )
}

/// Solves `S / ln(1+S) = m` for S > 0, given m > 1. Used to find the SNR at
/// which a device must run at full power to still meet its rate floor.
pub fn invert_spectral_stretch(m: f64) -> Result<f64> {
    if !(m > 1.0) {
        return Err(Error::Bracketing(format!(
            "spectral stretch m = {m:.6e} must exceed 1"
        )));
    }
    let stretch = |s: f64| {
        if s < 1e-8 {
            // S/ln(1+S) → 1 + S/2 as S → 0.
            1.0 + 0.5 * s
        } else {
            s / s.ln_1p()
        }
    };
    let mut hi = 2.0 * (m - 1.0).max(1e-9);
    while stretch(hi) < m {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(hi);
        }
    }
    bisect(|s| stretch(s) - m, 0.0, hi, 1e-14, 300)
}
