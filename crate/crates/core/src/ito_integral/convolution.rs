//! Moment bound for the mixed convolution
//! `int_0^t int G_{t-s}(x - y) Phi(s, y) ds L(dy)`.
//!
//! Both catalog fields are constant in time, so
//! `Psi(y) = Phi(y) g(x - y)` with `g(w) = int_0^t G_u(w) du`, and `g` is
//! available in closed form for every catalog kernel. The stochastic
//! integral of `Psi` is then exact per realization. Only the right-hand side
//! needs two-dimensional quadrature.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::combinatorics::moment_from_cumulants;
use crate::combinatorics::CumulantVector;
use crate::error::{Error, Result};
use crate::ito_integral::bounds::RosenthalConstant;
use crate::ito_integral::process::Coefficient;
use crate::ito_integral::seminorm::check_even;
use crate::levy_measure::LevyMeasureModel;
use crate::mc::McSettings;
use crate::noise_sim::{sample_prm, PointRealization};
use crate::quadrature::adaptive_simpson;
use crate::sets::Interval;

/// Heat-kernel support is cut at this many standard deviations.
const HEAT_CUTOFF_SIGMAS: f64 = 12.0;
/// Relative change between grid doublings accepted by the rhs quadrature.
pub const QUADRATURE_REL_TOL: f64 = 1e-3;
const MIN_GRID: usize = 32;
const MAX_GRID: usize = 4096;

/// Space-time kernels `G_t(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `1_{[lo, hi]}(x)`, constant in time.
    Indicator {
        lo: f64,
        hi: f64,
    },
    /// `(2 pi t)^{-1/2} exp(-x^2 / (2t))`.
    Heat,
    Zero,
}

impl Kernel {
    pub fn eval(&self, t: f64, w: f64) -> f64 {
        match *self {
            Kernel::Indicator { lo, hi } => f64::from(lo <= w && w <= hi),
            Kernel::Heat => (-(w * w) / (2.0 * t)).exp() / (2.0 * PI * t).sqrt(),
            Kernel::Zero => 0.0,
        }
    }

    /// Spatial support at time `t`.
    pub fn support(&self, t: f64) -> Option<(f64, f64)> {
        match *self {
            Kernel::Indicator { lo, hi } => (hi > lo).then_some((lo, hi)),
            Kernel::Heat => {
                let r = HEAT_CUTOFF_SIGMAS * t.sqrt();
                (r > 0.0).then_some((-r, r))
            }
            Kernel::Zero => None,
        }
    }

    /// `nu_t = int_0^t int |G_u(w)|^p dw du`.
    pub fn nu(&self, t: f64, p: usize) -> Result<f64> {
        let pf = p as f64;
        match *self {
            Kernel::Indicator { lo, hi } => Ok(t * (hi - lo).max(0.0)),
            Kernel::Zero => Ok(0.0),
            Kernel::Heat => {
                // int |G_u|^p dw = (2 pi u)^{(1-p)/2} p^{-1/2}
                let e = (1.0 - pf) / 2.0;
                if e <= -1.0 {
                    return Err(Error::InfiniteNuT(format!("heat kernel: int_0^t u^{{{e}}} du diverges for p = {p}")));
                }
                Ok((2.0 * PI).powf(e) / pf.sqrt() * t.powf(e + 1.0) / (e + 1.0))
            }
        }
    }

    /// `g(w) = int_0^t G_u(w) du`.
    pub fn time_integral(&self, t: f64, w: f64) -> f64 {
        match *self {
            Kernel::Indicator { lo, hi } => t * f64::from(lo <= w && w <= hi),
            Kernel::Heat => {
                let a = w.abs();
                (2.0 * t / PI).sqrt() * (-(w * w) / (2.0 * t)).exp() - a * libm::erfc(a / (2.0 * t).sqrt())
            }
            Kernel::Zero => 0.0,
        }
    }
}

/// Random fields constant in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Const(f64),
    /// `Y 1_{y > from}` with `Y` measurable at `from`.
    Random {
        coefficient: Coefficient,
        from: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionSpec {
    pub kernel: Kernel,
    pub field: Field,
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm35Result {
    pub p: usize,
    pub nu_t: f64,
    pub c_p_pow_p: f64,
    pub b_tp_pow_p: f64,
    /// `int_0^t int (G^2 + |G|^p)` over the support of the field.
    pub kernel_integral: f64,
    pub quadrature_delta: f64,
    /// Estimate of `E|Phi|^p` (exact for constant fields).
    pub field_moment: f64,
    pub lhs: f64,
    pub lhs_se: f64,
    pub exact_lhs: bool,
    pub rhs: f64,
    pub rhs_se: f64,
    pub pass: bool,
}

impl ConvolutionSpec {
    fn lower_cutoff(&self) -> f64 {
        match &self.field {
            Field::Const(_) => f64::NEG_INFINITY,
            Field::Random { from, .. } => *from,
        }
    }

    /// Locations `y` where `Psi(y)` can be nonzero, as `(y_lo, y_hi]`.
    fn region(&self) -> Option<Interval> {
        let (w_lo, w_hi) = self.kernel.support(self.t)?;
        let lo = (self.x - w_hi).max(self.lower_cutoff());
        let hi = self.x - w_lo;
        (hi > lo).then_some(Interval { lo, hi })
    }

    fn g(&self, y: f64) -> f64 {
        self.kernel.time_integral(self.t, self.x - y)
    }

    /// `int_region g(x - y)^n dy`, split at `y = x` where the heat profile
    /// has a kink.
    fn g_power_integral(&self, region: &Interval, n: i32) -> Result<f64> {
        let f = |y: f64| self.g(y).powi(n);
        let scale = f(self.x).abs().max(f(region.lo).abs()).max(f(region.hi).abs()).max(1e-300);
        let tol = 1e-13 * scale * region.len().max(1.0);
        if region.lo < self.x && self.x < region.hi {
            Ok(adaptive_simpson(f, region.lo, self.x, tol)? + adaptive_simpson(f, self.x, region.hi, tol)?)
        } else {
            adaptive_simpson(f, region.lo, region.hi, tol)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite() && self.x.is_finite()) {
            return Err(Error::ConfigParse(format!(
                "convolution needs t > 0 and finite x, got t = {}, x = {}",
                self.t, self.x
            )));
        }
        if let Field::Random { coefficient, from } = &self.field {
            let horizon = coefficient.horizon();
            if horizon > *from {
                return Err(Error::HorizonViolation { index: 0, horizon, left_end: *from });
            }
            if !coefficient.bound().is_finite() {
                return Err(Error::UnboundedCoefficient { index: 0 });
            }
        }
        Ok(())
    }

    /// `int_0^t int (G_u^2 + |G_u|^p)(w) 1_{x - w > from} dw du` on a graded
    /// midpoint grid (`u = t v^2`), doubled until the relative change drops
    /// below [`QUADRATURE_REL_TOL`]. Returns the refined value and the last
    /// change.
    pub fn kernel_integral(&self, p: usize) -> Result<(f64, f64)> {
        let w_cap = self.x - self.lower_cutoff();
        let grid = |n: usize| -> f64 {
            let mut total = 0.0;
            for i in 0..n {
                let v = (i as f64 + 0.5) / n as f64;
                let u = self.t * v * v;
                let Some((lo, hi)) = self.kernel.support(u) else { continue };
                let hi = hi.min(w_cap);
                if hi <= lo {
                    continue;
                }
                let h = (hi - lo) / n as f64;
                let mut inner = 0.0;
                for j in 0..n {
                    let g = self.kernel.eval(u, lo + (j as f64 + 0.5) * h);
                    inner += g * g + g.abs().powi(p as i32);
                }
                total += inner * h * 2.0 * self.t * v / n as f64;
            }
            total
        };
        let mut n = MIN_GRID;
        let mut prev = grid(n);
        while n < MAX_GRID {
            n *= 2;
            let next = grid(n);
            let delta = (next - prev).abs();
            if delta <= QUADRATURE_REL_TOL * next.abs() {
                return Ok((next, delta));
            }
            prev = next;
        }
        Err(Error::QuadratureFailure(format!("kernel integral still changing at a {MAX_GRID} x {MAX_GRID} grid")))
    }

    /// `I(Psi)` on one realization, scaled so that the field factor is 1.
    fn unit_integral(&self, r: &PointRealization, region: &Interval, compensator: f64) -> f64 {
        let jumps: f64 = r.points().filter(|&(y, _)| region.contains(y)).map(|(y, z)| self.g(y) * z).sum();
        jumps - compensator
    }
}

/// `B_{t,p}^p = 2^{p-1} C_p^p (t^{p/2} nu_t^{p/2 - 1} + t^{p-1})`.
pub fn b_tp_pow_p(c_p_pow_p: f64, t: f64, nu_t: f64, p: usize) -> f64 {
    let pf = p as f64;
    2f64.powf(pf - 1.0) * c_p_pow_p * (t.powf(pf / 2.0) * nu_t.powf(pf / 2.0 - 1.0) + t.powf(pf - 1.0))
}

pub fn bound_thm35(
    model: &Arc<LevyMeasureModel>,
    spec: &ConvolutionSpec,
    p: usize,
    constant: &RosenthalConstant,
    mc: &McSettings,
) -> Result<Thm35Result> {
    check_even(p)?;
    spec.validate()?;
    let nu_t = spec.kernel.nu(spec.t, p)?;
    let c_p_pow_p = constant.c_p_pow_p(model, p)?;
    let b = b_tp_pow_p(c_p_pow_p, spec.t, nu_t, p);
    let region = spec.region();
    let (kernel_integral, quadrature_delta) = match region {
        Some(_) => spec.kernel_integral(p)?,
        None => (0.0, 0.0),
    };
    let bound = b * (kernel_integral + quadrature_delta);

    let (lhs, lhs_se, field_moment, field_se, exact_lhs) = match (&spec.field, &region) {
        (_, None) => (0.0, 0.0, 0.0, 0.0, true),
        (Field::Const(c), Some(region)) => {
            let mut kappa = std::collections::BTreeMap::new();
            for n in 2..=p {
                let integral = spec.g_power_integral(region, n as i32)?;
                kappa.insert(n, model.signed_moment(n)? * c.powi(n as i32) * integral);
            }
            let moment = moment_from_cumulants(&CumulantVector::new(kappa)?, p)?;
            (moment, 0.0, c.abs().powi(p as i32), 0.0, true)
        }
        (Field::Random { coefficient, .. }, Some(region)) => {
            let compensator = model.mean_jump_rate() * spec.g_power_integral(region, 1)?;
            let mut window = region.lo.abs().max(region.hi.abs());
            if let Some(reach) = coefficient.reach() {
                window = window.max(reach.abs()).max(coefficient.horizon().abs());
            }
            let out = mc.try_run(2, false, |seed, row| {
                let r = sample_prm(model, window, seed);
                let y = coefficient.eval(&r)?;
                row[0] = (y * spec.unit_integral(&r, region, compensator)).powi(p as i32);
                row[1] = y.abs().powi(p as i32);
                Ok(())
            })?;
            let (l, f) = (out.dim(0), out.dim(1));
            (l.mean(), l.std_error(), f.mean(), f.std_error(), false)
        }
    };
    let rhs = bound * field_moment;
    let rhs_se = bound * field_se;
    Ok(Thm35Result {
        p,
        nu_t,
        c_p_pow_p,
        b_tp_pow_p: b,
        kernel_integral,
        quadrature_delta,
        field_moment,
        lhs,
        lhs_se,
        exact_lhs,
        rhs,
        rhs_se,
        pass: lhs <= rhs + mc.se_multiplier * lhs_se.hypot(rhs_se),
    })
}
