use super::{Bracket, SolverTolerances};
use crate::error::{CapacityError, Result};

/// Plain bisection on a sign-changing bracket.
///
/// Stops when the bracket is narrower than `tol.root_tol` or when the
/// midpoint can no longer be separated from the endpoints in floating point.
pub fn bisect<F>(mut f: F, bracket: Bracket, tol: &SolverTolerances) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(CapacityError::Solver(format!(
            "function is NaN at bracket end ({lo}, {hi})"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(CapacityError::Bracket { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol.root_tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(CapacityError::Solver(format!("function is NaN at {mid}")));
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= tol.root_tol {
        return Ok(0.5 * (lo + hi));
    }
    Err(CapacityError::Convergence {
        iterations: tol.max_iter,
        detail: format!("bisection bracket [{lo}, {hi}] still wider than {}", tol.root_tol),
    })
}

/// Bracketed root finder: Illinois false position with a bisection safeguard.
///
/// `f` may return an infinite value to signal a sign without a usable
/// magnitude; such points always trigger a bisection step. Terminates when the
/// bracket is narrower than `xtol`, when `|f| <= ftol`, or errors after
/// `max_iter` evaluations.
pub fn find_root<F>(mut f: F, bracket: Bracket, xtol: f64, ftol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(CapacityError::Solver(format!(
            "function is NaN at bracket end ({a}, {b})"
        )));
    }
    if fa == 0.0 || fa.abs() <= ftol {
        return Ok(a);
    }
    if fb == 0.0 || fb.abs() <= ftol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(CapacityError::Bracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    // Unscaled values are kept for choosing the best endpoint at the end.
    let (mut ra, mut rb) = (fa, fb);
    let mut side = 0i8;
    let mut width_two_ago = f64::INFINITY;
    let mut width_prev = b - a;
    let mut force_bisect = false;
    for _ in 0..max_iter {
        if b - a <= xtol {
            break;
        }
        let mut c = f64::NAN;
        if !force_bisect && fa.is_finite() && fb.is_finite() {
            c = (a * fb - b * fa) / (fb - fa);
        }
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
            if !(c > a && c < b) {
                break;
            }
        }
        let fc = f(c);
        if fc.is_nan() {
            return Err(CapacityError::Solver(format!("function is NaN at {c}")));
        }
        if fc == 0.0 || fc.abs() <= ftol {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            rb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            ra = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        let width = b - a;
        force_bisect = width > 0.5 * width_two_ago;
        width_two_ago = width_prev;
        width_prev = width;
    }
    if b - a <= xtol || !(0.5 * (a + b) > a && 0.5 * (a + b) < b) {
        return Ok(if ra.abs() <= rb.abs() { a } else { b });
    }
    Err(CapacityError::Convergence {
        iterations: max_iter,
        detail: format!("root bracket [{a}, {b}] still wider than {xtol}"),
    })
}
