use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::combinatorics::exact_moment;
use crate::error::{Error, Result};
use crate::harness::config::{Category, CheckKind, CheckSpec, ExperimentConfig};
use crate::ito_integral::approx::approximation_errors;
use crate::ito_integral::bounds::{bound_lemma31, bound_thm34};
use crate::ito_integral::checks::{centering_check, isometry_check, martingale_check, sample_window};
use crate::ito_integral::convolution::bound_thm35;
use crate::ito_integral::tail::tail_convergence;
use crate::levy_measure::LevyMeasureModel;
use crate::malliavin::{
    chaos_isometry_check, derivative_inner_product, derivative_oracle_check, duality_gap, eval_multiple_integral,
    malliavin_derivative, orthogonality_check, projection_check, skorohod_predictable, ChaosFunctional,
};
use crate::mc::{Execution, McSettings};
use crate::noise_sim::{char_function_gap, sample_prm};
use crate::rng::derive_key;
use crate::stats::{mean_test, MeanTest};

/// Summary line of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: String,
    /// Left side of an inequality.
    pub lhs: Option<f64>,
    /// Right side of an inequality.
    pub rhs: Option<f64>,
    /// Target of an equality.
    pub target: Option<f64>,
    pub estimate: Option<f64>,
    pub se: Option<f64>,
    pub z: Option<f64>,
    pub pass: bool,
    /// Check-specific tables.
    pub details: Value,
}

impl CheckResult {
    fn new(kind: &str) -> Self {
        CheckResult {
            name: String::new(),
            kind: kind.to_string(),
            lhs: None,
            rhs: None,
            target: None,
            estimate: None,
            se: None,
            z: None,
            pass: false,
            details: Value::Null,
        }
    }

    fn from_test(kind: &str, target: f64, t: &MeanTest) -> Self {
        CheckResult {
            target: Some(target),
            estimate: Some(t.estimate),
            se: Some(t.std_error),
            z: Some(t.z),
            pass: t.pass,
            ..Self::new(kind)
        }
    }

    fn with_details(self, details: Value) -> Self {
        Self { details, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub version: String,
    pub samples: u64,
    /// Seconds; the only field that varies between identical runs.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub checks: Vec<CheckResult>,
    pub environment: Environment,
    pub pass: bool,
}

impl ExperimentReport {
    /// Copy with the wall time zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.environment.wall_time = 0.0;
        r
    }
}

/// Raw per-sample values of a check's primary statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDump {
    pub check: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Everything a check needs besides its own parameters.
struct Context<'a> {
    config: &'a ExperimentConfig,
    model: Arc<LevyMeasureModel>,
    mc: McSettings,
}

impl<'a> Context<'a> {
    fn new(config: &'a ExperimentConfig, check: &CheckSpec, index: usize, exec: Execution) -> Result<Self> {
        let spec = check.measure.as_ref().unwrap_or(&config.measure);
        let model = Arc::new(LevyMeasureModel::validate(spec)?);
        let mc = McSettings {
            samples: config.samples_for(check),
            key: derive_key(config.seed, index as u64),
            exec,
            se_multiplier: config.tolerance.se_multiplier,
        };
        Ok(Self { config, model, mc })
    }

    fn heavy(&self) -> McSettings {
        McSettings { se_multiplier: self.config.tolerance.heavy_se_multiplier, ..self.mc }
    }
}

fn hull_window(phi: &crate::sets::StepFunction) -> f64 {
    phi.hull().map_or(0.0, |(a, b)| a.abs().max(b.abs()))
}

fn worst<'t>(tests: impl IntoIterator<Item = &'t MeanTest>) -> Option<&'t MeanTest> {
    tests.into_iter().max_by(|a, b| a.z.abs().total_cmp(&b.z.abs()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn run_check(ctx: &Context<'_>, kind: &CheckKind) -> Result<CheckResult> {
    let config = ctx.config;
    let model = &ctx.model;
    let mc = &ctx.mc;
    let name = kind.kind_name();
    Ok(match kind {
        CheckKind::CharGap { set, thetas } => {
            let rep = char_function_gap(model, set, thetas, mc.samples, mc.key, mc.exec)?;
            let rhs = config.tolerance.gap_constant / (mc.samples as f64).sqrt();
            CheckResult { lhs: Some(rep.sup_gap), rhs: Some(rhs), pass: rep.sup_gap < rhs, ..CheckResult::new(name) }
                .with_details(to_value(&rep.rows))
        }
        CheckKind::Moment { phi, p } => {
            let target = exact_moment(model, phi, *p)?;
            let window = hull_window(phi);
            let heavy = ctx.heavy();
            let out = heavy.try_run(1, false, |seed, row| {
                row[0] = sample_prm(model, window, seed).eval_l_phi(phi)?.powi(*p as i32);
                Ok(())
            })?;
            let t = mean_test(out.dim(0), target, heavy.se_multiplier)?;
            CheckResult::from_test(name, target, &t)
        }
        CheckKind::Interpolation { p } => {
            let rows = model.interpolation_check(*p)?;
            let tightest = rows.iter().max_by(|a, b| (a.m_r / a.bound).total_cmp(&(b.m_r / b.bound))).copied();
            CheckResult {
                lhs: tightest.map(|r| r.m_r),
                rhs: tightest.map(|r| r.bound),
                pass: rows.iter().all(|r| r.pass),
                ..CheckResult::new(name)
            }
            .with_details(to_value(&rows))
        }
        CheckKind::LinearBound { phi, p } => {
            let r = bound_lemma31(model, phi, *p)?;
            CheckResult { lhs: Some(r.exact_moment), rhs: Some(r.rhs), pass: r.pass, ..CheckResult::new(name) }
                .with_details(to_value(&r))
        }
        CheckKind::IntegralBound { process, p } => {
            let x = process.resolve(&config.processes)?;
            let r = bound_thm34(model, &x, *p, &config.rosenthal, mc)?;
            CheckResult {
                lhs: Some(r.lhs),
                rhs: Some(r.rhs),
                se: Some(r.lhs_se.hypot(r.rhs_se)),
                pass: r.pass,
                ..CheckResult::new(name)
            }
            .with_details(to_value(&r))
        }
        CheckKind::ConvolutionBound { convolution, p } => {
            let r = bound_thm35(model, convolution, *p, &config.rosenthal, mc)?;
            CheckResult {
                lhs: Some(r.lhs),
                rhs: Some(r.rhs),
                se: Some(r.lhs_se.hypot(r.rhs_se)),
                pass: r.pass,
                ..CheckResult::new(name)
            }
            .with_details(to_value(&r))
        }
        CheckKind::Isometry { process, k } => {
            let x = process.resolve(&config.processes)?;
            let r = isometry_check(model, &x, *k, mc)?;
            CheckResult {
                estimate: Some(r.second_moment),
                target: Some(r.target),
                se: Some(r.test.std_error),
                z: Some(r.test.z),
                pass: r.test.pass,
                ..CheckResult::new(name)
            }
            .with_details(to_value(&r))
        }
        CheckKind::Centering { process, k } => {
            let x = process.resolve(&config.processes)?;
            CheckResult::from_test(name, 0.0, &centering_check(model, &x, *k, mc)?)
        }
        CheckKind::Martingale { process } => {
            let x = process.resolve(&config.processes)?;
            let tests = martingale_check(model, &x, mc)?;
            let mut r = match worst(&tests) {
                Some(t) => CheckResult::from_test(name, 0.0, t),
                None => CheckResult { target: Some(0.0), ..CheckResult::new(name) },
            };
            r.pass = tests.iter().all(|t| t.pass);
            r.with_details(to_value(&tests))
        }
        CheckKind::Tail { phi, ks, k_prime } => {
            let rows = tail_convergence(model, phi, ks, *k_prime, mc)?;
            let w = rows.iter().max_by(|a, b| a.test.z.abs().total_cmp(&b.test.z.abs()));
            let mut r = match w {
                Some(row) => CheckResult::from_test(name, row.theory, &row.test),
                None => CheckResult::new(name),
            };
            r.pass = rows.iter().all(|row| row.test.pass);
            r.with_details(to_value(&rows))
        }
        CheckKind::Approximation { process, k, levels } => {
            let rows = approximation_errors(model, process, *k, levels, mc)?;
            // Each refinement must not increase the error beyond noise.
            let pass = rows.windows(2).all(|w| w[1].error <= w[0].error + mc.se_multiplier * w[0].se.hypot(w[1].se));
            let last = rows.last();
            CheckResult {
                lhs: last.map(|r| r.error),
                rhs: rows.first().map(|r| r.error),
                se: last.map(|r| r.se),
                pass,
                ..CheckResult::new(name)
            }
            .with_details(to_value(&rows))
        }
        CheckKind::DerivativeOracle { functional, probes, realizations, rel_tol } => {
            let f = functional.resolve(&config.functionals)?;
            let r = derivative_oracle_check(model, &f, probes, *realizations, mc.key, *rel_tol)?;
            CheckResult {
                lhs: Some(r.max_abs_diff),
                rhs: Some(*rel_tol),
                pass: r.mismatches == 0,
                ..CheckResult::new(name)
            }
            .with_details(to_value(&r))
        }
        CheckKind::VanishingDerivative { functional, y, probes } => {
            let f = functional.resolve(&config.functionals)?;
            vanishing_derivative(name, &f, *y, probes)?
        }
        CheckKind::Projection { kernel, y, probe } => {
            let h = kernel.resolve(&config.kernels)?;
            let r = projection_check(model, &h, *y, probe, mc)?;
            let mut c = CheckResult::from_test(name, 0.0, &r.orthogonality);
            c.lhs = Some(r.projected_second_moment);
            c.rhs = Some(r.full_second_moment);
            c.pass = r.orthogonality.pass && r.contraction_pass;
            c.with_details(to_value(&r))
        }
        CheckKind::ChaosIsometry { kernel } => {
            let h = kernel.resolve(&config.kernels)?;
            let r = chaos_isometry_check(model, &h, mc)?;
            CheckResult::from_test(name, r.target, &r.test).with_details(to_value(&r))
        }
        CheckKind::Orthogonality { f, g } => {
            let (f, g) = (f.resolve(&config.kernels)?, g.resolve(&config.kernels)?);
            CheckResult::from_test(name, 0.0, &orthogonality_check(model, &f, &g, mc)?)
        }
        CheckKind::Duality { functional, process } => {
            let f = functional.resolve(&config.functionals)?;
            let x = process.resolve(&config.processes)?;
            let r = duality_gap(model, &f, &x, mc)?;
            let mut c = CheckResult::from_test(name, 0.0, &r.gap);
            c.lhs = Some(r.inner);
            c.rhs = Some(r.product);
            c.with_details(to_value(&r))
        }
    })
}

fn vanishing_derivative(name: &str, f: &ChaosFunctional, y: f64, probes: &[(f64, f64)]) -> Result<CheckResult> {
    let outside = f.kernels.iter().flat_map(|k| k.cells()).find(|c| c.hi > y);
    if let Some(c) = outside {
        return Err(Error::InvalidKernel(format!("cell ({}, {}] extends right of y = {y}", c.lo, c.hi)));
    }
    let mut nonzero = 0usize;
    for &(x, z) in probes.iter().filter(|p| p.0 > y) {
        let d = malliavin_derivative(f, x, z);
        if d.c0 != 0.0 || d.kernels.iter().any(|k| !k.is_zero()) {
            nonzero += 1;
        }
    }
    Ok(CheckResult { lhs: Some(nonzero as f64), rhs: Some(0.0), pass: nonzero == 0, ..CheckResult::new(name) })
}

/// Per-sample values behind a check, regenerated from the same seeds the
/// check itself used. Checks without a natural per-sample statistic give
/// `None`.
/// Column names and rows of one sample dump.
type SampleTable = (Vec<String>, Vec<Vec<f64>>);

fn sample_rows(ctx: &Context<'_>, kind: &CheckKind) -> Result<Option<SampleTable>> {
    let config = ctx.config;
    let model = &ctx.model;
    let mc = &ctx.mc;
    let cols = |names: &[&str]| names.iter().map(ToString::to_string).collect::<Vec<_>>();
    let rows = |out: crate::mc::McOutput| out.rows.unwrap_or_default();
    Ok(match kind {
        CheckKind::CharGap { set, .. } => {
            let window = set.hull().map_or(0.0, |(lo, hi)| lo.abs().max(hi.abs()));
            let out = mc.try_run(1, true, |seed, row| {
                row[0] = sample_prm(model, window, seed).eval_l_set(set)?;
                Ok(())
            })?;
            Some((cols(&["l"]), rows(out)))
        }
        CheckKind::Moment { phi, .. } => {
            let window = hull_window(phi);
            let out = ctx.heavy().try_run(1, true, |seed, row| {
                row[0] = sample_prm(model, window, seed).eval_l_phi(phi)?;
                Ok(())
            })?;
            Some((cols(&["l_phi"]), rows(out)))
        }
        CheckKind::Isometry { process, k } | CheckKind::Centering { process, k } => {
            let x = process.resolve(&config.processes)?;
            let window = sample_window(&x, *k);
            let out = mc.try_run(1, true, |seed, row| {
                row[0] = x.eval_i_k(&sample_prm(model, window, seed), *k)?;
                Ok(())
            })?;
            Some((cols(&["i_k"]), rows(out)))
        }
        CheckKind::IntegralBound { process, .. } => {
            let x = process.resolve(&config.processes)?;
            if x.is_deterministic() {
                return Ok(None);
            }
            let window = x.required_window();
            let out = mc.try_run(1, true, |seed, row| {
                row[0] = x.eval_i_k(&sample_prm(model, window, seed), window)?;
                Ok(())
            })?;
            Some((cols(&["i"]), rows(out)))
        }
        CheckKind::ChaosIsometry { kernel } => {
            let h = kernel.resolve(&config.kernels)?;
            let window = h.reach();
            let out = mc.try_run(1, true, |seed, row| {
                row[0] = eval_multiple_integral(&sample_prm(model, window, seed), &h)?;
                Ok(())
            })?;
            Some((cols(&["i_n"]), rows(out)))
        }
        CheckKind::Orthogonality { f, g } => {
            let (f, g) = (f.resolve(&config.kernels)?, g.resolve(&config.kernels)?);
            let window = f.reach().max(g.reach());
            let out = mc.try_run(2, true, |seed, row| {
                let r = sample_prm(model, window, seed);
                row[0] = eval_multiple_integral(&r, &f)?;
                row[1] = eval_multiple_integral(&r, &g)?;
                Ok(())
            })?;
            Some((cols(&["i_m", "i_n"]), rows(out)))
        }
        CheckKind::Duality { functional, process } => {
            let f = functional.resolve(&config.functionals)?;
            let x = process.resolve(&config.processes)?;
            let delta = skorohod_predictable(&x);
            let window = f.reach().max(delta.required_window());
            let out = mc.try_run(3, true, |seed, row| {
                let r = sample_prm(model, window, seed);
                row[0] = derivative_inner_product(model, &f, &x, &r)?;
                row[1] = f.eval(&r)?;
                row[2] = delta.eval(&r)?;
                Ok(())
            })?;
            Some((cols(&["inner", "f", "delta"]), rows(out)))
        }
        _ => None,
    })
}

/// Runs every check of `config` (or only those of one category) in order.
pub fn run(config: &ExperimentConfig, filter: Option<Category>, exec: Execution) -> Result<ExperimentReport> {
    run_with_samples(config, filter, exec, false).map(|(r, _)| r)
}

/// As [`run`], optionally regenerating per-sample rows for the CSV dump.
pub fn run_with_samples(
    config: &ExperimentConfig,
    filter: Option<Category>,
    exec: Execution,
    dump: bool,
) -> Result<(ExperimentReport, Vec<SampleDump>)> {
    config.validate()?;
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut dumps = Vec::new();
    for (index, check) in config.checks.iter().enumerate() {
        if filter.is_some_and(|c| c != check.kind.category()) {
            continue;
        }
        let name = check.display_name(index);
        let wrap = |e: Error| Error::InCheck { check: name.clone(), source: Box::new(e) };
        let ctx = Context::new(config, check, index, exec).map_err(wrap)?;
        let mut result = run_check(&ctx, &check.kind).map_err(wrap)?;
        result.name = name.clone();
        checks.push(result);
        if dump {
            if let Some((columns, rows)) = sample_rows(&ctx, &check.kind).map_err(wrap)? {
                dumps.push(SampleDump { check: name.clone(), columns, rows });
            }
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = ExperimentReport {
        checks,
        environment: Environment {
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            samples: config.samples,
            wall_time: start.elapsed().as_secs_f64(),
        },
        pass,
    };
    Ok((report, dumps))
}

/// Summary of `n` draws of the point process on the config window.
pub fn simulate(config: &ExperimentConfig, n: u64) -> Result<Vec<Value>> {
    let model = Arc::new(LevyMeasureModel::validate(&config.measure)?);
    let key = derive_key(config.seed, u64::MAX);
    Ok((0..n)
        .map(|i| {
            let r = sample_prm(&model, config.window, crate::rng::SeedToken::new(key, i));
            let points: Vec<[f64; 2]> = r.points().map(|(x, z)| [x, z]).collect();
            json!({ "sample": i, "points": points })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(checks: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"measure": {{"atoms": [[1.0, 1.0]]}}, "samples": 20000, "seed": 7, "checks": [{checks}]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn empty_config_passes() {
        let r = run(&config(""), None, Execution::Parallel).unwrap();
        assert!(r.pass && r.checks.is_empty());
    }

    #[test]
    fn char_gap_at_zero() {
        let r =
            run(&config(r#"{"kind": "char_gap", "set": [[0.0, 1.0]], "thetas": [0.0]}"#), None, Execution::Parallel)
                .unwrap();
        assert_eq!(r.checks[0].lhs, Some(0.0));
        assert!(r.pass);
    }

    #[test]
    fn moment_check() {
        let r =
            run(&config(r#"{"kind": "moment", "phi": [[0.0, 1.0, 1.0]], "p": 6}"#), None, Execution::Parallel).unwrap();
        assert_eq!(r.checks[0].target, Some(41.0));
        assert!(r.pass, "{:?}", r.checks[0]);
    }

    #[test]
    fn filter_and_errors() {
        let c =
            config(r#"{"kind": "interpolation", "p": 4}, {"kind": "linear_bound", "phi": [[0.0, 1.0, 1.0]], "p": 5}"#);
        let moments = run(&c, Some(Category::Moments), Execution::Sequential).unwrap();
        assert_eq!(moments.checks.len(), 1);
        let err = run(&c, None, Execution::Sequential).unwrap_err();
        assert_eq!(err, Error::InCheck { check: "linear_bound#1".into(), source: Box::new(Error::OddMomentOrder(5)) });
    }

    #[test]
    fn dump_rows_match_estimates() {
        let c = config(
            r#"{"kind": "centering", "process": {"breakpoints": [0.0, 1.0], "coefficients": [{"const": 2.0}]}, "k": 1.0}"#,
        );
        let (report, dumps) = run_with_samples(&c, None, Execution::Parallel, true).unwrap();
        assert_eq!(dumps[0].rows.len(), 20000);
        let mean: f64 = dumps[0].rows.iter().map(|r| r[0]).sum::<f64>() / 20000.0;
        assert!((mean - report.checks[0].estimate.unwrap()).abs() < 1e-12);
    }
}
