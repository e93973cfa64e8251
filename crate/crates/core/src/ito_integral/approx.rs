//! Approximation of grid-declared predictable processes by simple ones,
//! freezing each process at the left end of every mesh cell.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ito_integral::process::{Coefficient, SimpleProcess};
use crate::ito_integral::seminorm::root_of_mean;
use crate::ito_integral::tail::SmoothFn;
use crate::levy_measure::LevyMeasureModel;
use crate::mc::McSettings;
use crate::noise_sim::{sample_prm, PointRealization};
use crate::quadrature::adaptive_simpson;
use crate::sets::{Interval, IntervalSet};

/// Predictable processes evaluable at any location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridProcess {
    Smooth(SmoothFn),
    /// `X(x) = clamp(L((x - lag - width, x - lag]), bound)`; predictable for `lag >= 0`.
    MovingWindow {
        width: f64,
        lag: f64,
        bound: f64,
    },
    Simple(SimpleProcess),
}

impl GridProcess {
    fn moving_window_at(width: f64, lag: f64, bound: f64, x: f64) -> Result<Coefficient> {
        Coefficient::clamp_noise(x - lag - width, x - lag, bound)
    }

    /// `X(x)` on one realization.
    pub fn eval(&self, r: &PointRealization, x: f64) -> Result<f64> {
        match self {
            GridProcess::Smooth(phi) => Ok(phi.eval(x)),
            GridProcess::MovingWindow { width, lag, bound } => Self::moving_window_at(*width, *lag, *bound, x)?.eval(r),
            GridProcess::Simple(s) => s.value_at(r, x),
        }
    }

    /// Left-most location read when evaluating on `[lo, hi]`.
    fn reach(&self, lo: f64) -> f64 {
        match self {
            GridProcess::MovingWindow { width, lag, .. } => lo - lag - width,
            GridProcess::Simple(s) => s
                .breakpoints()
                .first()
                .copied()
                .unwrap_or(lo)
                .min(s.coefficients().iter().filter_map(Coefficient::reach).fold(lo, f64::min)),
            GridProcess::Smooth(_) => lo,
        }
    }
}

/// `2^level` equal cells covering `[-k, k]`.
pub fn dyadic_mesh(k: f64, level: u32) -> Vec<f64> {
    let n = 1usize << level;
    (0..=n).map(|i| -k + 2.0 * k * i as f64 / n as f64).collect()
}

/// The simple process equal to `X(a+)` on each mesh cell `(a, b]`.
pub fn approximate_by_simple(process: &GridProcess, mesh: &[f64]) -> Result<SimpleProcess> {
    if mesh.len() < 2 {
        return Ok(SimpleProcess::zero());
    }
    let coefficients = mesh
        .windows(2)
        .map(|w| {
            let a = w[0];
            Ok(match process {
                GridProcess::Smooth(phi) => Coefficient::Const(phi.eval(a)),
                GridProcess::MovingWindow { width, lag, bound } => {
                    GridProcess::moving_window_at(*width, *lag, *bound, a)?
                }
                GridProcess::Simple(s) => s
                    .cells()
                    .find(|(iv, _)| iv.lo <= a && a < iv.hi)
                    .map_or(Coefficient::Const(0.0), |(_, c)| c.clone()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SimpleProcess::new(mesh.to_vec(), coefficients)
}

/// Estimate of `[X_m - X]_{K,2}` (both parts coincide for `p = 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationError {
    pub cells: usize,
    pub error: f64,
    pub se: f64,
    pub exact: bool,
}

/// `int_{(a, b] cap [-k, k]} (X_m - X)^2` for the moving window on one
/// realization. Between consecutive points entering or leaving the window
/// the process is constant, so the integral is a finite sum.
fn moving_window_sq_error(r: &PointRealization, width: f64, lag: f64, bound: f64, mesh: &[f64], k: f64) -> Result<f64> {
    let switch: Vec<f64> = r.points().flat_map(|(x, _)| [x + lag, x + lag + width]).collect();
    let mut total = 0.0;
    for w in mesh.windows(2) {
        let cell = Interval { lo: w[0], hi: w[1] }.intersect(-k, k);
        if cell.is_empty() {
            continue;
        }
        let frozen = GridProcess::moving_window_at(width, lag, bound, w[0])?.eval(r)?;
        let mut cuts: Vec<f64> = switch.iter().copied().filter(|&s| s > cell.lo && s < cell.hi).collect();
        cuts.push(cell.lo);
        cuts.push(cell.hi);
        cuts.sort_by(f64::total_cmp);
        for piece in cuts.windows(2) {
            if piece[1] <= piece[0] {
                continue;
            }
            // Right-continuity in `x` of `L((x - lag - width, x - lag])`
            // is irrelevant on a Lebesgue integral; evaluate inside.
            let mid = 0.5 * (piece[0] + piece[1]);
            let set = IntervalSet::interval(mid - lag - width, mid - lag)?;
            let v = r.eval_l_set(&set)?.clamp(-bound, bound);
            total += (v - frozen).powi(2) * (piece[1] - piece[0]);
        }
    }
    Ok(total)
}

pub fn approximation_error(
    model: &Arc<LevyMeasureModel>,
    process: &GridProcess,
    mesh: &[f64],
    k: f64,
    mc: &McSettings,
) -> Result<ApproximationError> {
    let cells = mesh.len().saturating_sub(1);
    let approx = approximate_by_simple(process, mesh)?;
    match process {
        GridProcess::Smooth(phi) => {
            let mut sq = 0.0;
            for (iv, c) in approx.cells() {
                let Coefficient::Const(v) = c else { unreachable!("smooth processes freeze to constants") };
                let cell = iv.intersect(-k, k);
                if !cell.is_empty() {
                    sq += adaptive_simpson(|x| (v - phi.eval(x)).powi(2), cell.lo, cell.hi, 1e-16)?;
                }
            }
            Ok(ApproximationError { cells, error: 2.0 * sq.sqrt(), se: 0.0, exact: true })
        }
        GridProcess::MovingWindow { width, lag, bound } => {
            if *lag < 0.0 || *width < 0.0 {
                return Err(Error::HorizonViolation { index: 0, horizon: mesh[0] - lag, left_end: mesh[0] });
            }
            let lo = mesh.first().copied().unwrap_or(0.0);
            let hi = mesh.last().copied().unwrap_or(0.0);
            let window = process.reach(lo).abs().max(hi.abs()).max(lo.abs());
            let out = mc.try_run(1, false, |seed, row| {
                let r = sample_prm(model, window, seed);
                row[0] = moving_window_sq_error(&r, *width, *lag, *bound, mesh, k)?;
                Ok(())
            })?;
            let (v, se) = root_of_mean(out.dim(0), 2.0);
            Ok(ApproximationError { cells, error: 2.0 * v, se: 2.0 * se, exact: false })
        }
        GridProcess::Simple(x) => {
            let diff = SimpleProcess::linear_combination(1.0, &approx, -1.0, x);
            if diff.is_deterministic() {
                let values = diff.values(&PointRealization::from_points(model, 0.0, &[])?)?;
                let sq = diff.abs_pow_integral(&values, 2.0, k);
                return Ok(ApproximationError { cells, error: 2.0 * sq.sqrt(), se: 0.0, exact: true });
            }
            let window = diff.required_window();
            let out = mc.try_run(1, false, |seed, row| {
                let v = diff.values(&sample_prm(model, window, seed))?;
                row[0] = diff.abs_pow_integral(&v, 2.0, k);
                Ok(())
            })?;
            let (v, se) = root_of_mean(out.dim(0), 2.0);
            Ok(ApproximationError { cells, error: 2.0 * v, se: 2.0 * se, exact: out.dim(0).is_constant() })
        }
    }
}

/// Errors on dyadic meshes of `[-k, k]` at the given levels.
pub fn approximation_errors(
    model: &Arc<LevyMeasureModel>,
    process: &GridProcess,
    k: f64,
    levels: &[u32],
    mc: &McSettings,
) -> Result<Vec<ApproximationError>> {
    levels.iter().map(|&l| approximation_error(model, process, &dyadic_mesh(k, l), k, mc)).collect()
}
