//! Experiment configuration: a JSON document naming a jump measure, a
//! sample budget, a master seed, named catalog entries and a list of checks.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ito_integral::approx::GridProcess;
use crate::ito_integral::bounds::RosenthalConstant;
use crate::ito_integral::convolution::ConvolutionSpec;
use crate::ito_integral::process::{Coefficient, SimpleProcess};
use crate::ito_integral::tail::SmoothFn;
use crate::levy_measure::MeasureSpec;
use crate::malliavin::{ChaosFunctional, StepKernel};
use crate::sets::{IntervalSet, StepFunction};
use crate::stats::MIN_SAMPLES;

/// Acceptance gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    /// Gate for equalities and inequalities, in standard errors.
    pub se_multiplier: f64,
    /// Gate for heavy-tailed `p`-th moment targets.
    pub heavy_se_multiplier: f64,
    pub min_samples: u64,
    /// Characteristic-function gap must stay below `gap_constant / sqrt(n)`.
    pub gap_constant: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { se_multiplier: 3.0, heavy_se_multiplier: 4.0, min_samples: MIN_SAMPLES as u64, gap_constant: 5.0 }
    }
}

/// An inline value or the name of a catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CatalogRef<T> {
    Named(String),
    Inline(T),
}

impl<T: Clone> CatalogRef<T> {
    pub fn resolve(&self, catalog: &BTreeMap<String, T>) -> Result<T> {
        match self {
            CatalogRef::Inline(v) => Ok(v.clone()),
            CatalogRef::Named(name) => {
                catalog.get(name).cloned().ok_or_else(|| Error::UnknownCatalogEntry(name.clone()))
            }
        }
    }
}

fn default_thetas() -> Vec<f64> {
    (0..41).map(|i| -std::f64::consts::PI + std::f64::consts::PI * i as f64 / 20.0).collect()
}

fn default_k_prime() -> f64 {
    8.0
}

fn default_realizations() -> u64 {
    40
}

/// One check and its parameters, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckKind {
    /// Empirical vs closed-form characteristic function of `L(A)`.
    CharGap {
        set: IntervalSet,
        #[serde(default = "default_thetas")]
        thetas: Vec<f64>,
    },
    /// Monte Carlo `E[L(phi)^p]` against the cumulant formula.
    Moment { phi: StepFunction, p: usize },
    /// `m_r <= m_p^theta m_2^{1 - theta}` for `2 <= r <= p`.
    Interpolation { p: usize },
    /// `E|L(phi)|^p <= C_p^* (...)`, exact.
    LinearBound { phi: StepFunction, p: usize },
    /// `||I(X)||_p <= C_p [X]_p`.
    IntegralBound { process: CatalogRef<SimpleProcess>, p: usize },
    /// Space-time convolution bound.
    ConvolutionBound { convolution: ConvolutionSpec, p: usize },
    /// `E|I_K(X)|^2 = m_2 E int |X|^2`.
    Isometry { process: CatalogRef<SimpleProcess>, k: f64 },
    /// `E[I_K(X)] = 0`.
    Centering { process: CatalogRef<SimpleProcess>, k: f64 },
    /// Increments orthogonal to bounded functionals of the past.
    Martingale { process: CatalogRef<SimpleProcess> },
    /// `E|I_{K'} - I_K|^2 = m_2 int_{K < |x| <= K'} phi^2`.
    Tail {
        phi: SmoothFn,
        ks: Vec<f64>,
        #[serde(default = "default_k_prime")]
        k_prime: f64,
    },
    /// Freeze approximations on refining dyadic meshes.
    Approximation { process: GridProcess, k: f64, levels: Vec<u32> },
    /// Slice derivative against the add-one-cost operator.
    DerivativeOracle {
        functional: CatalogRef<ChaosFunctional>,
        probes: Vec<(f64, f64)>,
        #[serde(default = "default_realizations")]
        realizations: u64,
        /// 0 demands bitwise equality.
        #[serde(default)]
        rel_tol: f64,
    },
    /// Derivative vanishes right of the support.
    VanishingDerivative { functional: CatalogRef<ChaosFunctional>, y: f64, probes: Vec<(f64, f64)> },
    /// `E[I_k(h) | F_y] = I_k(h^y)`.
    Projection { kernel: CatalogRef<StepKernel>, y: f64, probe: Coefficient },
    /// `E|I_n(f)|^2 = n! ||f~||^2`.
    ChaosIsometry { kernel: CatalogRef<StepKernel> },
    /// `E[I_m(f) I_n(g)] = 0`.
    Orthogonality { f: CatalogRef<StepKernel>, g: CatalogRef<StepKernel> },
    /// `E<DF, V_Phi> = E[F delta(V_Phi)]`.
    Duality { functional: CatalogRef<ChaosFunctional>, process: CatalogRef<SimpleProcess> },
}

/// Names accepted in the `kind` field.
pub const CHECK_KINDS: &[&str] = &[
    "char_gap",
    "moment",
    "interpolation",
    "linear_bound",
    "integral_bound",
    "convolution_bound",
    "isometry",
    "centering",
    "martingale",
    "tail",
    "approximation",
    "derivative_oracle",
    "vanishing_derivative",
    "projection",
    "chaos_isometry",
    "orthogonality",
    "duality",
];

/// Which CLI subcommand runs a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Moments,
    Bounds,
    Convolution,
    Malliavin,
}

impl CheckKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            CheckKind::CharGap { .. } => "char_gap",
            CheckKind::Moment { .. } => "moment",
            CheckKind::Interpolation { .. } => "interpolation",
            CheckKind::LinearBound { .. } => "linear_bound",
            CheckKind::IntegralBound { .. } => "integral_bound",
            CheckKind::ConvolutionBound { .. } => "convolution_bound",
            CheckKind::Isometry { .. } => "isometry",
            CheckKind::Centering { .. } => "centering",
            CheckKind::Martingale { .. } => "martingale",
            CheckKind::Tail { .. } => "tail",
            CheckKind::Approximation { .. } => "approximation",
            CheckKind::DerivativeOracle { .. } => "derivative_oracle",
            CheckKind::VanishingDerivative { .. } => "vanishing_derivative",
            CheckKind::Projection { .. } => "projection",
            CheckKind::ChaosIsometry { .. } => "chaos_isometry",
            CheckKind::Orthogonality { .. } => "orthogonality",
            CheckKind::Duality { .. } => "duality",
        }
    }

    pub fn category(&self) -> Category {
        match self {
            CheckKind::CharGap { .. } | CheckKind::Moment { .. } | CheckKind::Interpolation { .. } => Category::Moments,
            CheckKind::ConvolutionBound { .. } => Category::Convolution,
            CheckKind::DerivativeOracle { .. }
            | CheckKind::VanishingDerivative { .. }
            | CheckKind::Projection { .. }
            | CheckKind::ChaosIsometry { .. }
            | CheckKind::Orthogonality { .. }
            | CheckKind::Duality { .. } => Category::Malliavin,
            _ => Category::Bounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Overrides the experiment sample count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Overrides the experiment jump measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(flatten)]
    pub kind: CheckKind,
}

impl CheckSpec {
    pub fn display_name(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("{}#{index}", self.kind.kind_name()))
    }
}

fn default_window() -> f64 {
    2.0
}

fn default_samples() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub measure: MeasureSpec,
    /// Half-width of the window used by `simulate`.
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerance: Tolerance,
    #[serde(default)]
    pub rosenthal: RosenthalConstant,
    #[serde(default)]
    pub processes: BTreeMap<String, SimpleProcess>,
    #[serde(default)]
    pub functionals: BTreeMap<String, ChaosFunctional>,
    #[serde(default)]
    pub kernels: BTreeMap<String, StepKernel>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::ConfigParse(format!("invalid JSON: {e}")))?;
        if let Some(checks) = value.get("checks").and_then(|c| c.as_array()) {
            for (i, check) in checks.iter().enumerate() {
                let kind = check
                    .get("kind")
                    .and_then(|k| k.as_str())
                    .ok_or_else(|| Error::ConfigParse(format!("check {i} has no string `kind`")))?;
                if !CHECK_KINDS.contains(&kind) {
                    return Err(Error::UnknownCheck(kind.to_string()));
                }
            }
        }
        let config: ExperimentConfig = serde_json::from_value(value).map_err(|e| Error::ConfigParse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn samples_for(&self, check: &CheckSpec) -> u64 {
        check.samples.unwrap_or(self.samples)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerance;
        if !(t.se_multiplier >= 1.0 && t.heavy_se_multiplier >= 1.0) {
            return Err(Error::ConfigParse("SE multipliers must be at least 1".into()));
        }
        if t.min_samples < MIN_SAMPLES as u64 {
            return Err(Error::ConfigParse(format!("min_samples must be at least {MIN_SAMPLES}")));
        }
        if !(self.window >= 0.0 && self.window.is_finite()) {
            return Err(Error::ConfigParse(format!("window {} must be finite and non-negative", self.window)));
        }
        if !(self.rosenthal.b_p > 0.0 && self.rosenthal.b_p.is_finite()) {
            return Err(Error::ConfigParse(format!("rosenthal.b_p = {} must be positive", self.rosenthal.b_p)));
        }
        for check in &self.checks {
            let n = self.samples_for(check);
            if n < t.min_samples {
                return Err(Error::TooFewSamples { min: t.min_samples as usize, got: n as usize });
            }
            self.check_refs(&check.kind)?;
        }
        Ok(())
    }

    fn check_refs(&self, kind: &CheckKind) -> Result<()> {
        match kind {
            CheckKind::IntegralBound { process, .. }
            | CheckKind::Isometry { process, .. }
            | CheckKind::Centering { process, .. }
            | CheckKind::Martingale { process } => process.resolve(&self.processes).map(drop),
            CheckKind::DerivativeOracle { functional, .. } | CheckKind::VanishingDerivative { functional, .. } => {
                functional.resolve(&self.functionals).map(drop)
            }
            CheckKind::Duality { functional, process } => {
                functional.resolve(&self.functionals)?;
                process.resolve(&self.processes).map(drop)
            }
            CheckKind::Projection { kernel, .. } | CheckKind::ChaosIsometry { kernel } => {
                kernel.resolve(&self.kernels).map(drop)
            }
            CheckKind::Orthogonality { f, g } => {
                f.resolve(&self.kernels)?;
                g.resolve(&self.kernels).map(drop)
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = ExperimentConfig::from_json(r#"{"measure": {"atoms": [[1.0, 1.0]]}}"#).unwrap();
        assert_eq!(c.samples, 100_000);
        assert!(c.checks.is_empty());
        assert_eq!(c.tolerance.se_multiplier, 3.0);
    }

    #[test]
    fn check_parsing() {
        let text = r#"{
            "measure": {"atoms": [[1.0, 1.0]]},
            "processes": {"unit": {"breakpoints": [0.0, 1.0], "coefficients": [{"const": 1.0}]}},
            "checks": [
                {"kind": "char_gap", "set": [[0.0, 1.0]], "thetas": [0.0]},
                {"kind": "integral_bound", "process": "unit", "p": 4, "name": "bound"},
                {"kind": "moment", "phi": [[0.0, 1.0, 1.0]], "p": 6, "samples": 2000}
            ]
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.checks.len(), 3);
        assert_eq!(c.checks[1].display_name(1), "bound");
        assert_eq!(c.checks[2].display_name(2), "moment#2");
        assert_eq!(c.samples_for(&c.checks[2]), 2000);
    }

    #[test]
    fn config_errors() {
        let unknown = r#"{"measure": {"atoms": [[1.0, 1.0]]}, "checks": [{"kind": "nope"}]}"#;
        assert_eq!(ExperimentConfig::from_json(unknown).unwrap_err(), Error::UnknownCheck("nope".into()));
        let missing = r#"{"measure": {"atoms": [[1.0, 1.0]]}, "checks": [{"kind": "martingale", "process": "ghost"}]}"#;
        assert_eq!(ExperimentConfig::from_json(missing).unwrap_err(), Error::UnknownCatalogEntry("ghost".into()));
        let few =
            r#"{"measure": {"atoms": [[1.0, 1.0]]}, "samples": 10, "checks": [{"kind": "interpolation", "p": 4}]}"#;
        assert!(matches!(ExperimentConfig::from_json(few).unwrap_err(), Error::TooFewSamples { .. }));
        assert!(matches!(ExperimentConfig::from_json("{").unwrap_err(), Error::ConfigParse(_)));
        let gate = r#"{"measure": {"atoms": [[1.0, 1.0]]}, "tolerance": {"se_multiplier": 0.5}}"#;
        assert!(matches!(ExperimentConfig::from_json(gate).unwrap_err(), Error::ConfigParse(_)));
    }
}
