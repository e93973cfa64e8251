//! Predictable simple processes `sum_i Y_i 1_{(b_{i-1}, b_i]}`.
//!
//! Coefficients come from a closed catalog whose measurability horizon is
//! computable from the description alone, so predictability is a syntactic
//! check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_measure::JumpSet;
use crate::noise_sim::PointRealization;
use crate::sets::{Interval, IntervalSet};

/// Clamp level used when a description omits one.
pub const DEFAULT_CLAMP: f64 = 1e6;

fn default_clamp() -> f64 {
    DEFAULT_CLAMP
}

/// Catalog of bounded coefficient functionals of the noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Const(f64),
    /// `clamp(L(A), -bound, bound)`.
    ClampNoise {
        set: IntervalSet,
        #[serde(default = "default_clamp")]
        bound: f64,
    },
    /// `clamp(Nhat((lo, hi] x B), -bound, bound)`.
    ClampCount {
        interval: [f64; 2],
        jumps: JumpSet,
        #[serde(default = "default_clamp")]
        bound: f64,
    },
    /// `sum_k coeffs[k] * arg^k`.
    Poly {
        arg: Box<Coefficient>,
        coeffs: Vec<f64>,
    },
    Product(Vec<Coefficient>),
    Sum(Vec<Coefficient>),
}

impl Coefficient {
    pub fn clamp_noise(lo: f64, hi: f64, bound: f64) -> Result<Self> {
        Ok(Coefficient::ClampNoise { set: IntervalSet::interval(lo, hi)?, bound })
    }

    pub fn scaled(self, c: f64) -> Self {
        match self {
            Coefficient::Const(v) => Coefficient::Const(c * v),
            other => Coefficient::Product(vec![Coefficient::Const(c), other]),
        }
    }

    /// Location up to which the coefficient reads the noise
    /// (`-inf` for deterministic coefficients).
    pub fn horizon(&self) -> f64 {
        match self {
            Coefficient::Const(_) => f64::NEG_INFINITY,
            Coefficient::ClampNoise { set, .. } => set.hull().map_or(f64::NEG_INFINITY, |h| h.1),
            Coefficient::ClampCount { interval: [lo, hi], .. } => {
                if hi > lo {
                    *hi
                } else {
                    f64::NEG_INFINITY
                }
            }
            Coefficient::Poly { arg, .. } => arg.horizon(),
            Coefficient::Product(cs) | Coefficient::Sum(cs) => {
                cs.iter().map(Coefficient::horizon).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Leftmost location read, if any.
    pub fn reach(&self) -> Option<f64> {
        match self {
            Coefficient::Const(_) => None,
            Coefficient::ClampNoise { set, .. } => set.hull().map(|h| h.0),
            Coefficient::ClampCount { interval: [lo, hi], .. } => (hi > lo).then_some(*lo),
            Coefficient::Poly { arg, .. } => arg.reach(),
            Coefficient::Product(cs) | Coefficient::Sum(cs) => {
                cs.iter().filter_map(Coefficient::reach).reduce(f64::min)
            }
        }
    }

    /// Almost-sure bound on `|Y|`.
    pub fn bound(&self) -> f64 {
        match self {
            Coefficient::Const(v) => v.abs(),
            Coefficient::ClampNoise { bound, .. } | Coefficient::ClampCount { bound, .. } => bound.abs(),
            Coefficient::Poly { arg, coeffs } => {
                let m = arg.bound();
                coeffs.iter().enumerate().map(|(k, c)| c.abs() * m.powi(k as i32)).sum()
            }
            Coefficient::Product(cs) => cs.iter().map(Coefficient::bound).product(),
            Coefficient::Sum(cs) => cs.iter().map(Coefficient::bound).sum(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.horizon() == f64::NEG_INFINITY
    }

    pub fn eval(&self, r: &PointRealization) -> Result<f64> {
        Ok(match self {
            Coefficient::Const(v) => *v,
            Coefficient::ClampNoise { set, bound } => r.eval_l_set(set)?.clamp(-bound, *bound),
            Coefficient::ClampCount { interval: [lo, hi], jumps, bound } => {
                let iv = Interval::new(*lo, *hi)?;
                r.compensated_count(&iv, jumps)?.clamp(-bound, *bound)
            }
            Coefficient::Poly { arg, coeffs } => {
                let v = arg.eval(r)?;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c)
            }
            Coefficient::Product(cs) => {
                let mut p = 1.0;
                for c in cs {
                    p *= c.eval(r)?;
                }
                p
            }
            Coefficient::Sum(cs) => {
                let mut s = 0.0;
                for c in cs {
                    s += c.eval(r)?;
                }
                s
            }
        })
    }
}

/// Unchecked description of a simple process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleProcessSpec {
    pub breakpoints: Vec<f64>,
    pub coefficients: Vec<Coefficient>,
}

/// A validated predictable simple process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SimpleProcessSpec", into = "SimpleProcessSpec")]
pub struct SimpleProcess {
    breakpoints: Vec<f64>,
    coefficients: Vec<Coefficient>,
}

impl TryFrom<SimpleProcessSpec> for SimpleProcess {
    type Error = Error;
    fn try_from(spec: SimpleProcessSpec) -> Result<Self> {
        validate_simple(spec)
    }
}

impl From<SimpleProcess> for SimpleProcessSpec {
    fn from(p: SimpleProcess) -> Self {
        SimpleProcessSpec { breakpoints: p.breakpoints, coefficients: p.coefficients }
    }
}

/// Checks breakpoints, boundedness and predictability (`horizon(Y_i) <= b_{i-1}`).
pub fn validate_simple(spec: SimpleProcessSpec) -> Result<SimpleProcess> {
    let SimpleProcessSpec { breakpoints, coefficients } = spec;
    if breakpoints.is_empty() && coefficients.is_empty() {
        return Ok(SimpleProcess::zero());
    }
    if breakpoints.len() != coefficients.len() + 1 {
        return Err(Error::ConfigParse(format!(
            "{} breakpoints for {} coefficients",
            breakpoints.len(),
            coefficients.len()
        )));
    }
    if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingBreakpoints);
    }
    for (index, (c, &left_end)) in coefficients.iter().zip(&breakpoints).enumerate() {
        if !c.bound().is_finite() {
            return Err(Error::UnboundedCoefficient { index });
        }
        let horizon = c.horizon();
        if horizon > left_end {
            return Err(Error::HorizonViolation { index, horizon, left_end });
        }
    }
    Ok(SimpleProcess { breakpoints, coefficients })
}

impl SimpleProcess {
    pub fn new(breakpoints: Vec<f64>, coefficients: Vec<Coefficient>) -> Result<Self> {
        validate_simple(SimpleProcessSpec { breakpoints, coefficients })
    }

    pub fn zero() -> Self {
        Self { breakpoints: Vec::new(), coefficients: Vec::new() }
    }

    /// `c * 1_{(a, b]}`.
    pub fn constant(c: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![Coefficient::Const(c)])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_deterministic(&self) -> bool {
        self.coefficients.iter().all(Coefficient::is_deterministic)
    }

    /// `(A_i, Y_i)` pairs with `A_i = (b_{i-1}, b_i]`.
    pub fn cells(&self) -> impl Iterator<Item = (Interval, &Coefficient)> + '_ {
        self.breakpoints.windows(2).zip(&self.coefficients).map(|(w, c)| (Interval { lo: w[0], hi: w[1] }, c))
    }

    /// Half-width of the smallest symmetric window holding the support and
    /// every location the coefficients read.
    pub fn required_window(&self) -> f64 {
        let mut w: f64 = 0.0;
        if let (Some(a), Some(b)) = (self.breakpoints.first(), self.breakpoints.last()) {
            w = w.max(a.abs()).max(b.abs());
        }
        for c in &self.coefficients {
            if let Some(r) = c.reach() {
                w = w.max(r.abs());
            }
            let h = c.horizon();
            if h.is_finite() {
                w = w.max(h.abs());
            }
        }
        w
    }

    /// Coefficient values on one realization.
    pub fn values(&self, r: &PointRealization) -> Result<Vec<f64>> {
        self.coefficients.iter().map(|c| c.eval(r)).collect()
    }

    /// `X(x)` on one realization.
    pub fn value_at(&self, r: &PointRealization, x: f64) -> Result<f64> {
        for (iv, c) in self.cells() {
            if iv.contains(x) {
                return c.eval(r);
            }
        }
        Ok(0.0)
    }

    fn check_window(&self, r: &PointRealization, k: f64) -> Result<()> {
        if k > r.window() {
            return Err(Error::WindowExceeded { what: format!("integration range K = {k}"), window: r.window() });
        }
        Ok(())
    }

    /// `I_K(X) = sum_i Y_i L((b_{i-1}, b_i] cap [-K, K])`.
    pub fn eval_i_k(&self, r: &PointRealization, k: f64) -> Result<f64> {
        self.check_window(r, k)?;
        let mut total = 0.0;
        for (iv, c) in self.cells() {
            let clipped = iv.intersect(-k, k);
            if clipped.is_empty() {
                continue;
            }
            total += c.eval(r)? * r.noise_of(&clipped);
        }
        Ok(total)
    }

    /// Martingale increments `Y_i L(A_i)` (no window clipping).
    pub fn increments(&self, r: &PointRealization) -> Result<Vec<f64>> {
        self.check_window(r, self.required_window())?;
        self.cells().map(|(iv, c)| Ok(c.eval(r)? * r.noise_of(&iv))).collect()
    }

    /// `int_{-K}^{K} |X|^p dx` given the coefficient values.
    pub fn abs_pow_integral(&self, values: &[f64], p: f64, k: f64) -> f64 {
        self.cells().zip(values).map(|((iv, _), v)| v.abs().powf(p) * iv.intersect(-k, k).len()).sum()
    }

    /// `X 1_{[-K, K]}`.
    pub fn restricted(&self, k: f64) -> SimpleProcess {
        let mut bps = Vec::new();
        let mut cs = Vec::new();
        for (iv, c) in self.cells() {
            let clipped = iv.intersect(-k, k);
            if clipped.is_empty() {
                continue;
            }
            if bps.last() != Some(&clipped.lo) {
                if !bps.is_empty() {
                    cs.push(Coefficient::Const(0.0));
                }
                bps.push(clipped.lo);
            }
            bps.push(clipped.hi);
            cs.push(c.clone());
        }
        SimpleProcess { breakpoints: bps, coefficients: cs }
    }

    /// Same process with cells split at the given points.
    pub fn refined(&self, cuts: &[f64]) -> SimpleProcess {
        let mut bps = Vec::new();
        let mut cs = Vec::new();
        for (iv, c) in self.cells() {
            let mut inner: Vec<f64> = cuts.iter().copied().filter(|&x| x > iv.lo && x < iv.hi).collect();
            inner.sort_by(f64::total_cmp);
            inner.dedup();
            if bps.is_empty() {
                bps.push(iv.lo);
            }
            for x in inner.into_iter().chain(std::iter::once(iv.hi)) {
                bps.push(x);
                cs.push(c.clone());
            }
        }
        SimpleProcess { breakpoints: bps, coefficients: cs }
    }

    /// `a X + b Y` on the common refinement of both breakpoint sets.
    pub fn linear_combination(a: f64, x: &SimpleProcess, b: f64, y: &SimpleProcess) -> SimpleProcess {
        let mut bps: Vec<f64> = x.breakpoints.iter().chain(&y.breakpoints).copied().collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let coefficient_on = |p: &SimpleProcess, lo: f64| -> Option<Coefficient> {
            p.cells().find(|(iv, _)| iv.lo <= lo && lo < iv.hi).map(|(_, c)| c.clone())
        };
        let mut cs = Vec::with_capacity(bps.len().saturating_sub(1));
        for w in bps.windows(2) {
            let mut terms = Vec::new();
            if let Some(c) = coefficient_on(x, w[0]) {
                terms.push(c.scaled(a));
            }
            if let Some(c) = coefficient_on(y, w[0]) {
                terms.push(c.scaled(b));
            }
            cs.push(match terms.len() {
                0 => Coefficient::Const(0.0),
                1 => terms.pop().expect("one term"),
                _ => Coefficient::Sum(terms),
            });
        }
        if cs.is_empty() {
            return SimpleProcess::zero();
        }
        SimpleProcess { breakpoints: bps, coefficients: cs }
    }
}

/// `sum |Y_i|^p |A_i|^{p/2} <= (sum |Y_i|^2 |A_i|)^{p/2}` on one realization.
pub fn power_sum_inequality(values: &[f64], lengths: &[f64], p: f64) -> (f64, f64, bool) {
    let lhs: f64 = values.iter().zip(lengths).map(|(y, a)| y.abs().powf(p) * a.powf(p / 2.0)).sum();
    let rhs: f64 = values.iter().zip(lengths).map(|(y, a)| y * y * a).sum::<f64>().powf(p / 2.0);
    (lhs, rhs, lhs <= rhs * (1.0 + 1e-12))
}
