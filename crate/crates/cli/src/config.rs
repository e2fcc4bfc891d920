//! Configuration file schema: one JSON document drives every subcommand.
//!
//! ```json
//! {
//!   "model": {
//!     "omega": 1.0, "m": 0.0, "e": 0.0,
//!     "potential": {"family": "logarithmic", "mu2": 1.0, "g": 1.0}
//!   },
//!   "checker": {"phi_lo": 0.0, "phi_max": 1000.0, "samples": 512, "tol": 1e-9},
//!   "solver": {"r_max": 8.0, "grid": 2049, "nodes": 0, "bracket": [1e-3, 1e3], "tol": 0.05},
//!   "verify": {"alphas": [0.0, 0.5, 1.0, 1.5], "tol": 1e-4},
//!   "scan": {
//!     "axes": [{"param": "omega", "range": [0.3, 0.9], "steps": 7}],
//!     "ops": ["classify", "solve"],
//!     "output": "scan"
//!   }
//! }
//! ```
//!
//! Only `model` is mandatory; every other section falls back to the defaults
//! spelled out below. Potential families and their keys: `power_law`
//! (gamma, p), `quartic` (mu2, g), `logarithmic` (mu2, g), `polynomial`
//! (coeffs as [power, coefficient] pairs).

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use kgm_core::nogo::{DEFAULT_PHI_MAX, DEFAULT_SAMPLES, DEFAULT_TOL};
use kgm_core::potentials::Potential;
use kgm_core::{GaugedOptions, ModelConfig, PhiRange, ShootOptions};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    #[serde(default)]
    pub checker: CheckerConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanRequest>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckerConfig {
    pub phi_lo: f64,
    pub phi_max: f64,
    pub samples: usize,
    pub tol: f64,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig { phi_lo: 0.0, phi_max: DEFAULT_PHI_MAX, samples: DEFAULT_SAMPLES, tol: DEFAULT_TOL }
    }
}

impl CheckerConfig {
    pub fn range(&self) -> Result<PhiRange> {
        PhiRange::new(self.phi_lo, self.phi_max)
            .with_context(|| "checker.phi_lo / checker.phi_max")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Outer radius; derived from the model's decay rate when omitted.
    pub r_max: Option<f64>,
    pub grid: usize,
    pub nodes: usize,
    pub bracket: (f64, f64),
    /// Residual bound for the shooting solver.
    pub tol: f64,
    /// Residual target for the gauged Newton solver.
    pub newton_tol: f64,
    pub max_newton_iterations: usize,
    pub min_continuation_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let shoot = ShootOptions::default();
        let gauged = GaugedOptions::default();
        SolverConfig {
            r_max: None,
            grid: shoot.n,
            nodes: shoot.nodes,
            bracket: shoot.bracket,
            tol: shoot.tol,
            newton_tol: gauged.tol,
            max_newton_iterations: gauged.max_iterations,
            min_continuation_step: gauged.min_continuation_step,
        }
    }
}

impl SolverConfig {
    pub fn resolve_r_max(&self, model: &ModelConfig) -> Result<f64> {
        if let Some(r) = self.r_max {
            return Ok(r);
        }
        kgm_core::suggest_r_max(model, kgm_core::natural_width(model)).with_context(|| {
            "solver.r_max: no decay-rate estimate exists for this model \
             (marginal m = omega); set it explicitly"
        })
    }

    pub fn shoot_options(&self, model: &ModelConfig) -> Result<ShootOptions> {
        Ok(ShootOptions {
            r_max: self.resolve_r_max(model)?,
            n: self.grid,
            nodes: self.nodes,
            bracket: self.bracket,
            tol: self.tol,
            ..Default::default()
        })
    }

    pub fn gauged_options(&self, model: &ModelConfig) -> Result<GaugedOptions> {
        let r_max = self.resolve_r_max(model)?;
        Ok(GaugedOptions {
            r_max,
            n: self.grid,
            tol: self.newton_tol,
            max_iterations: self.max_newton_iterations,
            min_continuation_step: self.min_continuation_step,
            seed_options: Some(ShootOptions {
                r_max,
                n: self.grid,
                nodes: self.nodes,
                bracket: self.bracket,
                tol: 1.0,
                ..Default::default()
            }),
            ..Default::default()
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Exponents at which the single-parameter identity is checked.
    pub alphas: Vec<f64>,
    /// (alpha, beta) pairs for the stationarity oracle.
    pub pairs: Vec<(f64, f64)>,
    /// Bound on the normalized identity residuals.
    pub tol: f64,
    /// Bound on |dS/dlambda| relative to the action scale.
    pub stationarity_tol: f64,
    /// Scaling factors for the exported action curve.
    pub lambdas: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            alphas: vec![0.0, 0.5, 1.0, 1.5],
            pairs: vec![(1.5, 0.0), (0.5, 2.0), (0.0, 3.0)],
            tol: 1e-4,
            stationarity_tol: 1e-3,
            lambdas: vec![0.5, 0.8, 1.0, 1.25, 2.0],
        }
    }
}

/// One scan axis: a named model parameter stepped over a closed range.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanAxis {
    pub param: AxisParam,
    pub range: (f64, f64),
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    Omega,
    M,
    E,
    Gamma,
    P,
    G,
    Mu2,
}

impl AxisParam {
    pub fn name(&self) -> &'static str {
        match self {
            AxisParam::Omega => "omega",
            AxisParam::M => "m",
            AxisParam::E => "e",
            AxisParam::Gamma => "gamma",
            AxisParam::P => "p",
            AxisParam::G => "g",
            AxisParam::Mu2 => "mu2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOp {
    Classify,
    Solve,
    Verify,
}

/// A parameter sweep: up to two axes, the operations to run per grid point,
/// and the output stem for the CSV/JSON files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRequest {
    pub axes: Vec<ScanAxis>,
    pub ops: Vec<ScanOp>,
    #[serde(default = "default_scan_output")]
    pub output: String,
}

fn default_scan_output() -> String {
    "scan".to_string()
}

impl ScanAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.range.0];
        }
        (0..self.steps)
            .map(|i| {
                self.range.0
                    + (self.range.1 - self.range.0) * i as f64 / (self.steps - 1) as f64
            })
            .collect()
    }
}

/// Applies an axis value to the model, rejecting parameters the potential
/// family does not have.
pub fn patch_model(model: &ModelConfig, param: AxisParam, value: f64) -> Result<ModelConfig> {
    let pot = model.potential().clone();
    let (omega, m, e) = (model.omega(), model.m(), model.e());
    let built = match param {
        AxisParam::Omega => ModelConfig::new(value, m, e, pot),
        AxisParam::M => ModelConfig::new(omega, value, e, pot),
        AxisParam::E => ModelConfig::new(omega, m, value, pot),
        AxisParam::Gamma => match pot {
            Potential::PowerLaw { p, .. } => {
                ModelConfig::new(omega, m, e, Potential::PowerLaw { gamma: value, p })
            }
            other => bail!("axis 'gamma' applies to power_law potentials, not {other:?}"),
        },
        AxisParam::P => match pot {
            Potential::PowerLaw { gamma, .. } => {
                ModelConfig::new(omega, m, e, Potential::PowerLaw { gamma, p: value })
            }
            other => bail!("axis 'p' applies to power_law potentials, not {other:?}"),
        },
        AxisParam::G => match pot {
            Potential::Quartic { mu2, .. } => {
                ModelConfig::new(omega, m, e, Potential::Quartic { mu2, g: value })
            }
            Potential::Logarithmic { mu2, .. } => {
                ModelConfig::new(omega, m, e, Potential::Logarithmic { mu2, g: value })
            }
            other => bail!("axis 'g' applies to quartic/logarithmic potentials, not {other:?}"),
        },
        AxisParam::Mu2 => match pot {
            Potential::Quartic { g, .. } => {
                ModelConfig::new(omega, m, e, Potential::Quartic { mu2: value, g })
            }
            Potential::Logarithmic { g, .. } => {
                ModelConfig::new(omega, m, e, Potential::Logarithmic { mu2: value, g })
            }
            other => bail!("axis 'mu2' applies to quartic/logarithmic potentials, not {other:?}"),
        },
    };
    built.map_err(Into::into)
}

impl Config {
    /// Parses and validates a configuration document; errors carry the JSON
    /// line/column or the offending field. The model is normalized (omega
    /// mapped to |omega|) on the way in.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg: Config = serde_json::from_str(text).context("config parse error")?;
        cfg.model = cfg.model.normalized().context("model validation failed")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Config::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model
            .clone()
            .normalized()
            .context("model validation failed")?;
        self.checker.range()?;
        if self.checker.samples < 16 {
            bail!("checker.samples must be at least 16");
        }
        if !(self.checker.tol > 0.0) {
            bail!("checker.tol must be positive");
        }
        if let Some(scan) = &self.scan {
            if scan.axes.len() > 2 {
                bail!("scan supports at most two axes, got {}", scan.axes.len());
            }
            if scan.ops.is_empty() {
                bail!("scan.ops must name at least one operation");
            }
            for axis in &scan.axes {
                if axis.steps < 1 {
                    bail!("scan axis '{}' needs steps >= 1", axis.param.name());
                }
                // Surface family mismatches at validation time.
                patch_model(&self.model, axis.param, axis.range.0)
                    .with_context(|| format!("scan axis '{}'", axis.param.name()))?;
            }
        }
        Ok(())
    }

    /// Canonical serialized form: parse(canonical(c)) == c.
    pub fn canonical(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn hash(&self) -> String {
        kgm_core::profile::canonical_hash(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "model": {"omega": 1.0, "m": 0.0, "e": 0.0,
                  "potential": {"family": "logarithmic", "mu2": 1.0, "g": 1.0}},
        "solver": {"r_max": 8.0, "grid": 1024}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = Config::parse(SAMPLE).unwrap();
        assert_eq!(cfg.checker.samples, DEFAULT_SAMPLES);
        assert_eq!(cfg.solver.grid, 1024);
        assert!(cfg.scan.is_none());
    }

    #[test]
    fn round_trip_is_idempotent_after_normalization() {
        let cfg = Config::parse(SAMPLE).unwrap();
        let once = cfg.canonical();
        let twice = Config::parse(&once).unwrap().canonical();
        assert_eq!(once, twice);
        assert_eq!(cfg.hash(), Config::parse(&once).unwrap().hash());
    }

    #[test]
    fn rejects_missing_model_fields() {
        let bad = r#"{"model": {"m": 0.0, "e": 0.0,
            "potential": {"family": "quartic", "mu2": 1.0, "g": 1.0}}}"#;
        let err = Config::parse(bad).unwrap_err().to_string();
        assert!(err.contains("config parse error"), "{err}");
    }

    #[test]
    fn rejects_axis_family_mismatch() {
        let bad = r#"{
            "model": {"omega": 1.0, "m": 0.0, "e": 0.0,
                      "potential": {"family": "quartic", "mu2": 1.0, "g": 1.0}},
            "scan": {"axes": [{"param": "p", "range": [2.0, 4.0], "steps": 3}],
                     "ops": ["classify"]}
        }"#;
        assert!(Config::parse(bad).is_err());
    }

    #[test]
    fn axis_values_inclusive() {
        let axis = ScanAxis { param: AxisParam::P, range: (1.0, 3.0), steps: 5 };
        assert_eq!(axis.values(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let single = ScanAxis { param: AxisParam::P, range: (1.5, 9.0), steps: 1 };
        assert_eq!(single.values(), vec![1.5]);
    }
}
