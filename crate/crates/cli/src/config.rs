//! Serializable experiment descriptions and their validation.
//!
//! Every run is fully described by an [`ExperimentConfig`]; the JSON output
//! echoes it under `"config"` and `--config FILE` replays it.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gutmanlab_core::classifiers::{ClassifierSpec, ThresholdMode};
use gutmanlab_core::simulation::MultiRule;
use gutmanlab_core::{Distribution, Probability, Sequence};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Divergence(DivergenceConfig),
    Exponent(ExponentConfig),
    Threshold(ThresholdConfig),
    Classify(ClassifyConfig),
    SimulateBinary(SimulateBinaryConfig),
    SimulateMulti(SimulateMultiConfig),
    Exact(ExactConfig),
    MaxType1(MaxType1Config),
    WeakConvergence(WeakConvergenceConfig),
    ReproduceFig1(Fig1Config),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Divergence(_) => "divergence",
            Command::Exponent(_) => "exponent",
            Command::Threshold(_) => "threshold",
            Command::Classify(_) => "classify",
            Command::SimulateBinary(_) => "simulate-binary",
            Command::SimulateMulti(_) => "simulate-multi",
            Command::Exact(_) => "exact",
            Command::MaxType1(_) => "max-type1",
            Command::WeakConvergence(_) => "weak-convergence",
            Command::ReproduceFig1(_) => "reproduce-fig1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Gjs,
    Kl,
    Dispersion,
    ThirdMoment,
    Renyi(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceConfig {
    pub distributions: Vec<Distribution>,
    pub alpha: f64,
    pub quantities: Vec<Quantity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    /// Two-distribution program.
    F,
    /// Three-distribution program.
    K,
    /// Lattice-restricted two-distribution program; needs `n`.
    Fn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    pub kind: ExponentKind,
    pub distributions: Vec<Distribution>,
    pub alpha: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

/// How a threshold is obtained: an explicit value, or a mode plus targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdChoice {
    pub mode: ThresholdMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilon: Vec<Probability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl ThresholdChoice {
    pub fn spec(&self, m: usize, alpha: f64, alphabet_size: usize) -> ClassifierSpec {
        ClassifierSpec {
            m,
            alpha,
            alphabet_size,
            threshold_mode: self.mode,
            epsilon: self.epsilon.clone(),
            explicit_lambda: self.lambda.map(|l| vec![l]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub distributions: Vec<Distribution>,
    pub alpha: f64,
    pub n: u64,
    pub threshold: ThresholdChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ClassifyRule {
    GutmanBinary,
    Unnikrishnan,
    GutmanMulti,
    BinaryReject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub rule: ClassifyRule,
    pub training: Vec<Sequence>,
    pub test: Sequence,
    pub alphabet_size: usize,
    pub alpha: f64,
    /// One threshold, or two for `binary_reject`.
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBinaryConfig {
    pub distributions: Vec<Distribution>,
    pub alpha: f64,
    pub n: u64,
    pub threshold: ThresholdChoice,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateMultiConfig {
    pub distributions: Vec<Distribution>,
    pub alpha: f64,
    pub n: u64,
    pub threshold: ThresholdChoice,
    pub rule: MultiRule,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    pub distributions: Vec<Distribution>,
    pub alpha: f64,
    pub n: u64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxType1Config {
    pub alpha: f64,
    pub n: u64,
    pub lambda: f64,
    pub grid_step: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakConvergenceConfig {
    pub distribution: Distribution,
    pub alpha: f64,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Panel {
    /// Type-II error against n at the second-order threshold.
    A,
    /// Log of the worst-case type-I error against n.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Config {
    pub panel: Panel,
    pub n_grid: NGrid,
    pub trials: u64,
    pub seed: u64,
    /// Bernoulli grid spacing for the worst-case search (panel b).
    pub grid_step: f64,
}

/// Inclusive arithmetic grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NGrid {
    pub start: u64,
    pub stop: u64,
    pub step: u64,
}

impl NGrid {
    pub fn values(&self) -> Vec<u64> {
        (self.start..=self.stop).step_by(self.step as usize).collect()
    }
}

impl FromStr for NGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad n-grid entry {t:?}: {e}"));
        let grid = match parts.as_slice() {
            [single] => {
                let v = num(single)?;
                NGrid { start: v, stop: v, step: 1 }
            }
            [a, b, c] => NGrid { start: num(a)?, stop: num(b)?, step: num(c)? },
            _ => return Err(format!("n-grid must be N or start:stop:step, got {s:?}")),
        };
        if grid.start == 0 || grid.step == 0 || grid.stop < grid.start {
            return Err(format!("n-grid {s:?} needs 1 ≤ start ≤ stop and step ≥ 1"));
        }
        Ok(grid)
    }
}

impl TryFrom<String> for NGrid {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<NGrid> for String {
    fn from(g: NGrid) -> String {
        g.to_string()
    }
}

impl fmt::Display for NGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("alpha must be positive and finite, got {alpha}")))
    }
}

fn check_positive(name: &str, v: u64) -> Result<(), CliError> {
    if v == 0 {
        Err(bad(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

fn check_finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite, got {v}")))
    }
}

fn check_dists(d: &[Distribution], want: Option<usize>) -> Result<(), CliError> {
    match want {
        Some(k) if d.len() != k => return Err(bad(format!("expected {k} distributions, got {}", d.len()))),
        None if d.len() < 2 => return Err(bad(format!("need at least 2 distributions, got {}", d.len()))),
        _ => {}
    }
    let k = d[0].alphabet_size();
    if let Some(q) = d.iter().find(|q| q.alphabet_size() != k) {
        return Err(bad(format!("alphabet sizes differ: {k} vs {}", q.alphabet_size())));
    }
    Ok(())
}

fn check_threshold(t: &ThresholdChoice, d: &[Distribution], alpha: f64) -> Result<(), CliError> {
    t.spec(d.len(), alpha, d[0].alphabet_size())
        .validate()
        .map_err(|e| bad(e.to_string()))
}

impl ExperimentConfig {
    /// Checks every precondition the dispatched command relies on.
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.command {
            Command::Divergence(c) => {
                check_dists(&c.distributions, Some(2))?;
                check_alpha(c.alpha)?;
                if c.quantities.is_empty() {
                    return Err(bad("no quantities requested"));
                }
                if c.quantities.iter().filter(|q| matches!(q, Quantity::Renyi(_))).count() > 1 {
                    return Err(bad("at most one Rényi order per run"));
                }
                for q in &c.quantities {
                    if let Quantity::Renyi(g) = q {
                        if !(*g > 0.0 && g.is_finite()) {
                            return Err(bad(format!("Rényi order must be positive, got {g}")));
                        }
                    }
                }
            }
            Command::Exponent(c) => {
                let want = if c.kind == ExponentKind::K { 3 } else { 2 };
                check_dists(&c.distributions, Some(want))?;
                check_alpha(c.alpha)?;
                if !(c.lambda >= 0.0 && c.lambda.is_finite()) {
                    return Err(bad(format!("lambda must be nonnegative, got {}", c.lambda)));
                }
                match (c.kind, c.n) {
                    (ExponentKind::Fn, None) => return Err(bad("exponent kind fn needs n")),
                    (ExponentKind::Fn, Some(n)) => check_positive("n", n)?,
                    (_, Some(_)) => return Err(bad("n applies only to exponent kind fn")),
                    _ => {}
                }
            }
            Command::Threshold(c) => {
                check_dists(&c.distributions, None)?;
                check_alpha(c.alpha)?;
                check_positive("n", c.n)?;
                check_threshold(&c.threshold, &c.distributions, c.alpha)?;
            }
            Command::Classify(c) => {
                check_alpha(c.alpha)?;
                if c.alphabet_size < 2 {
                    return Err(bad("alphabet size must be at least 2"));
                }
                let binary = matches!(c.rule, ClassifyRule::GutmanBinary);
                let reject = matches!(c.rule, ClassifyRule::BinaryReject);
                match (binary, reject, c.training.len()) {
                    (true, _, 1) | (_, true, 2) => {}
                    (true, _, k) => return Err(bad(format!("gutman_binary takes 1 training sequence, got {k}"))),
                    (_, true, k) => return Err(bad(format!("binary_reject takes 2 training sequences, got {k}"))),
                    (_, _, k) if k < 2 => return Err(bad(format!("rule needs at least 2 training sequences, got {k}"))),
                    _ => {}
                }
                let lambdas = if reject { 2 } else { 1 };
                if c.lambda.len() != lambdas {
                    return Err(bad(format!("rule takes {lambdas} threshold(s), got {}", c.lambda.len())));
                }
                for &l in &c.lambda {
                    check_finite("lambda", l)?;
                }
                let seqs = c.training.iter().chain(std::iter::once(&c.test));
                for s in seqs {
                    if s.0.is_empty() {
                        return Err(bad("sequences must be nonempty"));
                    }
                    if let Some(x) = s.0.iter().find(|&&x| x >= c.alphabet_size) {
                        return Err(bad(format!("symbol {x} outside alphabet of size {}", c.alphabet_size)));
                    }
                }
            }
            Command::SimulateBinary(c) => {
                check_dists(&c.distributions, Some(2))?;
                check_alpha(c.alpha)?;
                check_positive("n", c.n)?;
                check_positive("trials", c.trials)?;
                check_threshold(&c.threshold, &c.distributions, c.alpha)?;
            }
            Command::SimulateMulti(c) => {
                check_dists(&c.distributions, None)?;
                check_alpha(c.alpha)?;
                check_positive("n", c.n)?;
                check_positive("trials", c.trials)?;
                check_threshold(&c.threshold, &c.distributions, c.alpha)?;
            }
            Command::Exact(c) => {
                check_dists(&c.distributions, Some(2))?;
                check_alpha(c.alpha)?;
                check_positive("n", c.n)?;
                check_finite("lambda", c.lambda)?;
            }
            Command::MaxType1(c) => {
                check_alpha(c.alpha)?;
                check_positive("n", c.n)?;
                check_positive("trials", c.trials)?;
                check_finite("lambda", c.lambda)?;
                if !(c.grid_step > 0.0 && c.grid_step < 0.5) {
                    return Err(bad(format!("grid step must lie in (0, 0.5), got {}", c.grid_step)));
                }
            }
            Command::WeakConvergence(c) => {
                check_alpha(c.alpha)?;
                check_positive("n", c.n)?;
                check_positive("trials", c.trials)?;
            }
            Command::ReproduceFig1(c) => {
                check_positive("trials", c.trials)?;
                if !(c.grid_step > 0.0 && c.grid_step < 0.5) {
                    return Err(bad(format!("grid step must lie in (0, 0.5), got {}", c.grid_step)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_grid_parses_and_prints() {
        let g: NGrid = "1000:5000:200".parse().unwrap();
        assert_eq!(g.values().len(), 21);
        assert_eq!(g.values()[20], 5000);
        assert_eq!(g.to_string(), "1000:5000:200");
        assert_eq!("50".parse::<NGrid>().unwrap().values(), vec![50]);
        assert!("0:10:1".parse::<NGrid>().is_err());
        assert!("10:5:1".parse::<NGrid>().is_err());
        assert!("1:5".parse::<NGrid>().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let ok = r#"{"command":{"exact":{"distributions":[[0.8,0.2],[0.6,0.4]],"alpha":2,"n":5,"lambda":0.1}}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.format, Format::Json);
        cfg.validate().unwrap();
        let extra = ok.replace(r#""n":5"#, r#""n":5,"m":3"#);
        assert!(serde_json::from_str::<ExperimentConfig>(&extra).is_err());
        let top = ok.replacen('{', r#"{"verbose":true,"#, 1);
        assert!(serde_json::from_str::<ExperimentConfig>(&top).is_err());
    }

    #[test]
    fn validation_catches_bad_inputs() {
        let mut cfg = ExperimentConfig {
            command: Command::Exact(ExactConfig {
                distributions: vec![Distribution::bernoulli(0.2).unwrap(), Distribution::uniform(3).unwrap()],
                alpha: 2.0,
                n: 5,
                lambda: 0.1,
            }),
            format: Format::Json,
            out: None,
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        if let Command::Exact(c) = &mut cfg.command {
            c.distributions[1] = Distribution::bernoulli(0.4).unwrap();
            c.alpha = 0.0;
        }
        assert!(cfg.validate().is_err());
    }
}
