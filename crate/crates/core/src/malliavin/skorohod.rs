//! Skorohod integral of predictable integrands `V(x, z) = Phi(x) z` and the
//! duality `E<DF, V> = E[F delta(V)]`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ito_integral::process::SimpleProcess;
use crate::levy_measure::LevyMeasureModel;
use crate::malliavin::chaos::ChaosFunctional;
use crate::malliavin::kernel::{compensated_counts, Slice, StepKernel};
use crate::mc::McSettings;
use crate::noise_sim::{sample_prm, PointRealization};
use crate::stats::{mean_test, MeanTest};

/// `delta(V_Phi)` for a predictable simple `Phi`, which equals `I(Phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkorohodIntegral {
    phi: SimpleProcess,
}

/// Wraps a validated simple process; predictability was checked when it
/// was built, which is exactly what makes `delta(V_Phi)` explicit.
pub fn skorohod_predictable(phi: &SimpleProcess) -> SkorohodIntegral {
    SkorohodIntegral { phi: phi.clone() }
}

impl SkorohodIntegral {
    pub fn integrand(&self) -> &SimpleProcess {
        &self.phi
    }

    pub fn required_window(&self) -> f64 {
        self.phi.required_window()
    }

    pub fn eval(&self, r: &PointRealization) -> Result<f64> {
        let k = self.required_window();
        if k > r.window() {
            return Err(Error::WindowExceeded { what: "integrand support".into(), window: r.window() });
        }
        self.phi.eval_i_k(r, k)
    }
}

/// `<DF, V_Phi>_H = int int D_{x,z}F Phi(x) z dx nu(dz)` on one realization.
///
/// On cell `F_c = A_c x B_c` of a kernel of order `n` the derivative is the
/// constant `n I_{n-1}(f_n(., F_c))`, so the inner product is
/// `sum_c D_c (int_{A_c} Phi) (int_{B_c} z nu(dz))`.
pub fn derivative_inner_product(
    model: &LevyMeasureModel,
    f: &ChaosFunctional,
    phi: &SimpleProcess,
    r: &PointRealization,
) -> Result<f64> {
    let phi_values = phi.values(r)?;
    let mut total = 0.0;
    for k in &f.kernels {
        let counts = compensated_counts(r, k.cells())?;
        for (c, cell) in k.cells().iter().enumerate() {
            let weight: f64 =
                phi.cells().zip(&phi_values).map(|((iv, _), v)| v * iv.intersect(cell.lo, cell.hi).len()).sum();
            if weight == 0.0 {
                continue;
            }
            let d = derivative_on_cell(k, c, &counts);
            total += d * weight * model.first_moment_of(&cell.jumps)?;
        }
    }
    Ok(total)
}

fn derivative_on_cell(k: &StepKernel, c: usize, counts: &[f64]) -> f64 {
    let n = k.order() as f64;
    match k.slice(c) {
        Slice::Scalar(b) => n * b,
        Slice::Kernel(s) => n * s.contract(counts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// Estimate of `E<DF, V_Phi>_H`.
    pub inner: f64,
    pub inner_se: f64,
    /// Estimate of `E[F delta(V_Phi)]`.
    pub product: f64,
    pub product_se: f64,
    /// Paired test of the difference against 0.
    pub gap: MeanTest,
}

pub fn duality_gap(
    model: &Arc<LevyMeasureModel>,
    f: &ChaosFunctional,
    phi: &SimpleProcess,
    mc: &McSettings,
) -> Result<DualityReport> {
    let delta = skorohod_predictable(phi);
    let window = f.reach().max(delta.required_window());
    let out = mc.try_run(3, false, |seed, row| {
        let r = sample_prm(model, window, seed);
        let inner = derivative_inner_product(model, f, phi, &r)?;
        let product = f.eval(&r)? * delta.eval(&r)?;
        row[0] = inner;
        row[1] = product;
        row[2] = inner - product;
        Ok(())
    })?;
    Ok(DualityReport {
        inner: out.dim(0).mean(),
        inner_se: out.dim(0).std_error(),
        product: out.dim(1).mean(),
        product_se: out.dim(1).std_error(),
        gap: mean_test(out.dim(2), 0.0, mc.se_multiplier)?,
    })
}
