//! Adaptive Simpson quadrature on a finite interval.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrates `h` over `[a, b]` to an absolute tolerance `tol`.
///
/// The first two levels are always subdivided so that a lucky agreement of
/// coarse estimates cannot end the recursion early.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(h: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let fa = eval(h, a)?;
    let fb = eval(h, b)?;
    let m = 0.5 * (a + b);
    let fm = eval(h, m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(h, a, b, fa, fm, fb, whole, tol, 0)
}

fn eval<F: Fn(f64) -> f64>(h: &F, x: f64) -> Result<f64> {
    let y = h(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFiniteIntegrand { at: x })
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    h: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(h, lm)?;
    let frm = eval(h, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= 2 && (delta.abs() <= 15.0 * tol || depth >= MAX_DEPTH || m <= a || m >= b) {
        return Ok(left + right + delta / 15.0);
    }
    let l = recurse(h, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
    let r = recurse(h, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_function() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-11).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn kinked_integrand() {
        let v = adaptive_simpson(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-11).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
    }

    #[test]
    fn non_finite_is_reported() {
        let err = adaptive_simpson(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { at } if at == 0.0));
    }
}
