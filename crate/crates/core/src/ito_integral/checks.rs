//! Statistical properties of `I_K` on simple processes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ito_integral::process::{power_sum_inequality, SimpleProcess};
use crate::levy_measure::LevyMeasureModel;
use crate::mc::McSettings;
use crate::noise_sim::sample_prm;
use crate::sets::Interval;
use crate::stats::{mean_test, MeanTest};

/// Clamp level of the prefix probes used by [`martingale_check`].
pub const PROBE_CLAMP: f64 = 2.0;

/// Window used by the centering, isometry and martingale checks.
pub fn sample_window(x: &SimpleProcess, k: f64) -> f64 {
    // One unit of room to the left of the first breakpoint for the probes.
    let probe = x.breakpoints().first().map_or(0.0, |b| (b - 1.0).abs());
    x.required_window().max(k).max(probe)
}

/// `E[I_K(X)] = 0`.
pub fn centering_check(model: &Arc<LevyMeasureModel>, x: &SimpleProcess, k: f64, mc: &McSettings) -> Result<MeanTest> {
    let window = sample_window(x, k);
    let out = mc.try_run(1, false, |seed, row| {
        row[0] = x.eval_i_k(&sample_prm(model, window, seed), k)?;
        Ok(())
    })?;
    mean_test(out.dim(0), 0.0, mc.se_multiplier)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    /// Estimate of `E|I_K(X)|^2`.
    pub second_moment: f64,
    pub second_moment_se: f64,
    /// `m_2 E int_{-K}^{K} |X|^2`.
    pub target: f64,
    pub target_exact: bool,
    /// Paired test of `I_K(X)^2 - m_2 int |X|^2` against 0.
    pub test: MeanTest,
}

/// `E|I_K(X)|^2 = m_2 E int_{-K}^{K} |X|^2`.
pub fn isometry_check(
    model: &Arc<LevyMeasureModel>,
    x: &SimpleProcess,
    k: f64,
    mc: &McSettings,
) -> Result<IsometryReport> {
    let window = sample_window(x, k);
    let m2 = model.m2();
    let out = mc.try_run(3, false, |seed, row| {
        let r = sample_prm(model, window, seed);
        let i = x.eval_i_k(&r, k)?;
        let t = m2 * x.abs_pow_integral(&x.values(&r)?, 2.0, k);
        row[0] = i * i;
        row[1] = t;
        row[2] = i * i - t;
        Ok(())
    })?;
    let target_exact = x.is_deterministic();
    Ok(IsometryReport {
        second_moment: out.dim(0).mean(),
        second_moment_se: out.dim(0).std_error(),
        target: out.dim(1).mean(),
        target_exact,
        test: mean_test(out.dim(2), 0.0, mc.se_multiplier)?,
    })
}

/// For every cell `k`, tests `E[Y_k L(A_k) g_k] = 0` where
/// `g_k = clamp(L((b_{k-1} - 1, b_{k-1}]), 2)` is a bounded functional of
/// the noise up to the left end of the cell.
pub fn martingale_check(model: &Arc<LevyMeasureModel>, x: &SimpleProcess, mc: &McSettings) -> Result<Vec<MeanTest>> {
    let n = x.coefficients().len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let window = sample_window(x, 0.0);
    let probes: Vec<Interval> = x.breakpoints()[..n].iter().map(|&b| Interval { lo: b - 1.0, hi: b }).collect();
    let out = mc.try_run(n, false, |seed, row| {
        let r = sample_prm(model, window, seed);
        for ((slot, inc), probe) in row.iter_mut().zip(x.increments(&r)?).zip(&probes) {
            *slot = inc * r.noise_of(probe).clamp(-PROBE_CLAMP, PROBE_CLAMP);
        }
        Ok(())
    })?;
    out.stats.iter().map(|s| mean_test(s, 0.0, mc.se_multiplier)).collect()
}

/// Checks `sum |Y_i|^p |A_i|^{p/2} <= (sum Y_i^2 |A_i|)^{p/2}` on `draws`
/// realizations and returns the number of violations.
pub fn power_sum_check(model: &Arc<LevyMeasureModel>, x: &SimpleProcess, p: f64, draws: u64, key: u64) -> Result<u64> {
    let window = x.required_window();
    let lengths: Vec<f64> = x.cells().map(|(iv, _)| iv.len()).collect();
    let mut violations = 0;
    for i in 0..draws {
        let values = x.values(&sample_prm(model, window, crate::rng::SeedToken::new(key, i)))?;
        if !power_sum_inequality(&values, &lengths, p).2 {
            violations += 1;
        }
    }
    Ok(violations)
}
