use serde::{Deserialize, Serialize};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ito_integral::process::SimpleProcess;
use crate::levy_measure::LevyMeasureModel;
use crate::mc::McSettings;
use crate::noise_sim::{sample_prm, PointRealization};
use crate::stats::MeanVar;

/// Estimate of `[X]_{K,p} = ||X||_{L^p(Omega; L^2)} + ||X||_{L^p(Omega x [-K, K])}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    /// `None` stands for the whole line.
    pub k: Option<f64>,
    pub p: usize,
    pub value_l2_part: f64,
    pub value_lp_part: f64,
    pub se_l2_part: f64,
    pub se_lp_part: f64,
    pub n_samples: u64,
    pub exact: bool,
}

impl SeminormEstimate {
    pub fn value(&self) -> f64 {
        self.value_l2_part + self.value_lp_part
    }

    /// Conservative standard error of the sum (the two parts are estimated
    /// from the same draws and are positively correlated).
    pub fn std_error(&self) -> f64 {
        self.se_l2_part + self.se_lp_part
    }
}

pub(crate) fn check_even(p: usize) -> Result<()> {
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::OddMomentOrder(p));
    }
    Ok(())
}

/// `(E V)^{1/p}` and its delta-method standard error from samples of `V`.
pub(crate) fn root_of_mean(acc: &MeanVar, p: f64) -> (f64, f64) {
    let m = acc.mean().max(0.0);
    let value = m.powf(1.0 / p);
    let se = if m > 0.0 { acc.std_error() * value / (p * m) } else { 0.0 };
    (value, se)
}

/// Seminorm of a simple process: exact when every coefficient is
/// deterministic, Monte Carlo over realizations otherwise. The per-draw
/// integrals `sum Y_i^2 |A_i|` and `sum |Y_i|^p |A_i|` are exact.
pub fn estimate_seminorm(
    model: &Arc<LevyMeasureModel>,
    x: &SimpleProcess,
    k: Option<f64>,
    p: usize,
    mc: &McSettings,
) -> Result<SeminormEstimate> {
    check_even(p)?;
    let kk = k.unwrap_or(f64::INFINITY);
    let pf = p as f64;
    if x.is_deterministic() {
        let values = x.values(&PointRealization::from_points(model, 0.0, &[])?)?;
        return Ok(SeminormEstimate {
            k,
            p,
            value_l2_part: x.abs_pow_integral(&values, 2.0, kk).sqrt(),
            value_lp_part: x.abs_pow_integral(&values, pf, kk).powf(1.0 / pf),
            se_l2_part: 0.0,
            se_lp_part: 0.0,
            n_samples: 0,
            exact: true,
        });
    }
    let window = x.required_window();
    let out = mc.try_run(2, false, |seed, row| {
        let v = x.values(&sample_prm(model, window, seed))?;
        row[0] = x.abs_pow_integral(&v, 2.0, kk).powf(pf / 2.0);
        row[1] = x.abs_pow_integral(&v, pf, kk);
        Ok(())
    })?;
    let (l2, se_l2) = root_of_mean(out.dim(0), pf);
    let (lp, se_lp) = root_of_mean(out.dim(1), pf);
    Ok(SeminormEstimate {
        k,
        p,
        value_l2_part: l2,
        value_lp_part: lp,
        se_l2_part: se_l2,
        se_lp_part: se_lp,
        n_samples: mc.samples,
        exact: false,
    })
}
