use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_measure::LevyMeasureModel;
use crate::mc::McSettings;
use crate::noise_sim::{sample_prm, PointRealization};
use crate::quadrature::adaptive_simpson;
use crate::stats::{mean_test, MeanTest};

/// Deterministic integrands with unbounded support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothFn {
    /// `amplitude * exp(-rate x^2)`.
    Gaussian { amplitude: f64, rate: f64 },
}

impl SmoothFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SmoothFn::Gaussian { amplitude, rate } => amplitude * (-rate * x * x).exp(),
        }
    }

    /// `int_a^b phi^n dx`.
    pub fn power_integral(&self, a: f64, b: f64, n: i32) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        adaptive_simpson(|x| self.eval(x).powi(n), a, b, 1e-14)
    }

    /// `int_{K < |x| <= K'} phi^n dx`.
    pub fn annulus_integral(&self, k: f64, k_prime: f64, n: i32) -> Result<f64> {
        Ok(self.power_integral(-k_prime, -k, n)? + self.power_integral(k, k_prime, n)?)
    }

    /// `I_K(phi) = sum_{|x_i| <= K} phi(x_i) z_i - m~_1 int_{-K}^{K} phi`,
    /// exact on each realization.
    pub fn eval_i_k(&self, r: &PointRealization, k: f64) -> Result<f64> {
        if k > r.window() {
            return Err(Error::WindowExceeded { what: format!("integration range K = {k}"), window: r.window() });
        }
        let jumps: f64 = r.points().filter(|&(x, _)| x.abs() <= k).map(|(x, z)| self.eval(x) * z).sum();
        Ok(jumps - r.model().mean_jump_rate() * self.power_integral(-k, k, 1)?)
    }
}

/// One row of the Cauchy-tail table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: f64,
    pub k_prime: f64,
    /// `m_2 int_{K < |x| <= K'} phi^2`.
    pub theory: f64,
    /// Test of `E|I_{K'} - I_K|^2` against `theory`.
    pub test: MeanTest,
}

/// Monte Carlo second moment of `I_{K'}(phi) - I_K(phi)` for each `K`,
/// compared with the exact tail `m_2 int_{K < |x| <= K'} phi^2`.
pub fn tail_convergence(
    model: &Arc<LevyMeasureModel>,
    phi: &SmoothFn,
    ks: &[f64],
    k_prime: f64,
    mc: &McSettings,
) -> Result<Vec<TailRow>> {
    if let Some(&k) = ks.iter().find(|&&k| !(k >= 0.0 && k <= k_prime)) {
        return Err(Error::InvalidInterval(k, k_prime));
    }
    let m1 = model.mean_jump_rate();
    let compensators =
        ks.iter().map(|&k| Ok(m1 * phi.annulus_integral(k, k_prime, 1)?)).collect::<Result<Vec<f64>>>()?;
    let out = mc.run(ks.len(), false, |seed, row| {
        let r = sample_prm(model, k_prime, seed);
        for ((slot, &k), comp) in row.iter_mut().zip(ks).zip(&compensators) {
            let jumps: f64 = r.points().filter(|&(x, _)| x.abs() > k).map(|(x, z)| phi.eval(x) * z).sum();
            *slot = (jumps - comp).powi(2);
        }
    });
    ks.iter()
        .enumerate()
        .map(|(i, &k)| {
            let theory = model.m2() * phi.annulus_integral(k, k_prime, 2)?;
            Ok(TailRow { k, k_prime, theory, test: mean_test(out.dim(i), theory, mc.se_multiplier)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ito_integral::process::SimpleProcess;

    #[test]
    fn gaussian_tail_matches() {
        let m = Arc::new(LevyMeasureModel::unit_atom());
        let phi = SmoothFn::Gaussian { amplitude: 1.0, rate: 1.0 };
        let rows = tail_convergence(&m, &phi, &[0.5, 1.0, 2.0], 8.0, &McSettings::new(50_000, 2)).unwrap();
        for row in &rows {
            assert!(row.test.pass, "{row:?}");
        }
        assert!(rows.windows(2).all(|w| w[0].theory > w[1].theory));
    }

    #[test]
    fn difference_is_the_annulus_integral() {
        let m = Arc::new(LevyMeasureModel::unit_atom());
        let phi = SmoothFn::Gaussian { amplitude: 2.0, rate: 0.5 };
        let r = sample_prm(&m, 8.0, 17);
        let direct = phi.eval_i_k(&r, 8.0).unwrap() - phi.eval_i_k(&r, 1.0).unwrap();
        let annulus: f64 = r.points().filter(|&(x, _)| x.abs() > 1.0).map(|(x, z)| phi.eval(x) * z).sum::<f64>()
            - phi.annulus_integral(1.0, 8.0, 1).unwrap();
        assert!((direct - annulus).abs() < 1e-10);
    }

    #[test]
    fn compact_support_has_no_tail() {
        let m = Arc::new(LevyMeasureModel::unit_atom());
        let x = SimpleProcess::new(
            vec![-1.0, 0.0, 1.0],
            vec![
                crate::ito_integral::process::Coefficient::Const(2.0),
                crate::ito_integral::process::Coefficient::clamp_noise(-1.0, 0.0, 10.0).unwrap(),
            ],
        )
        .unwrap();
        for s in 0..50 {
            let r = sample_prm(&m, 4.0, s);
            for k in [1.0, 2.0, 3.0] {
                assert_eq!(x.eval_i_k(&r, 4.0).unwrap(), x.eval_i_k(&r, k).unwrap());
            }
            assert_eq!(SimpleProcess::zero().eval_i_k(&r, 4.0).unwrap(), 0.0);
        }
    }
}
