//! One-dimensional quadrature used for density-mode jump measures and
//! deterministic integrands.

use crate::error::{Error, Result};

/// Absolute tolerance used for jump-measure moments.
pub const MOMENT_ABS_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure(format!("non-finite limits [{a}, {b}]")));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    // Pre-split into panels so narrow features are not missed by the first estimate.
    const PANELS: usize = 16;
    let width = (hi - lo) / PANELS as f64;
    let mut total = 0.0;
    for k in 0..PANELS {
        let x0 = lo + width * k as f64;
        let x1 = if k + 1 == PANELS { hi } else { x0 + width };
        let fa = f(x0);
        let fb = f(x1);
        let m = 0.5 * (x0 + x1);
        let fm = f(m);
        let whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_step(&f, x0, x1, fa, fm, fb, whole, tol / PANELS as f64, MAX_DEPTH)?;
    }
    if !total.is_finite() {
        return Err(Error::QuadratureFailure("integrand produced a non-finite value".into()));
    }
    Ok(sign * total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
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
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !(m > a && m < b) {
        return Err(Error::QuadratureFailure(format!("no convergence on [{a}, {b}] (estimate change {delta:e})")));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Integral of `f` over `(0, scale]` for integrands that are integrable but
/// possibly singular at the origin, via `x = scale * exp(-u)`.
pub fn integrate_towards_zero<F: Fn(f64) -> f64>(f: F, scale: f64, tol: f64) -> Result<f64> {
    const U_MAX: f64 = 700.0;
    adaptive_simpson(
        |u| {
            let x = scale * (-u).exp();
            if x == 0.0 {
                0.0
            } else {
                f(x) * x
            }
        },
        0.0,
        U_MAX,
        tol,
    )
}

/// Composite midpoint rule with `n` cells.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, -1.0, 3.0, 1e-12).unwrap();
        assert!((v - (20.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-12).unwrap();
        let b = adaptive_simpson(f64::exp, 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(a, -b);
        assert!((a - (std::f64::consts::E - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn singular_origin() {
        // int_0^1 x^{-1/2} dx = 2
        let v = integrate_towards_zero(|x| x.powf(-0.5), 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn non_finite_integrand_fails() {
        assert!(adaptive_simpson(|x| 1.0 / x, 0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn midpoint_linear_exact() {
        let v = midpoint(|x| 3.0 * x + 1.0, 0.0, 2.0, 7);
        assert!((v - 8.0).abs() < 1e-12);
    }
}
