//! Experiment configuration, parsed strictly from TOML.

use std::path::Path;

use penif::spec::NAMES;
use penif::{FunctionalSpec, RegressionModel};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    BiasCurve,
    IfSurface,
    ScSurface,
    AsvCurve,
    MseCurve,
    MseConvergence,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::BiasCurve => "bias_curve",
            Self::IfSurface => "if_surface",
            Self::ScSurface => "sc_surface",
            Self::AsvCurve => "asv_curve",
            Self::MseCurve => "mse_curve",
            Self::MseConvergence => "mse_convergence",
            Self::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub beta0: Vec<f64>,
    #[serde(default = "one")]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

/// `from`, `from + step`, … up to and including `to` (within rounding).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        if !(self.from.is_finite() && self.to.is_finite() && self.step > 0.0 && self.to >= self.from) {
            return Err(format!("invalid range {}..{} step {}", self.from, self.to, self.step));
        }
        let count = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err("range has too many points".into());
        }
        Ok((0..count).map(|i| self.from + i as f64 * self.step).collect())
    }
}

/// Square contamination grid `[lo, hi]²` with `points` per axis.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Square {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub beta0: Option<Range>,
    pub lambda: Option<Range>,
    pub contamination: Option<Square>,
    pub n: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_draws")]
    pub n_draws: usize,
    pub model: ModelConfig,
    #[serde(default = "all_functionals")]
    pub functionals: Vec<String>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// λ for the Huber, biweight and sparse LTS entries; defaults to `lambda`.
    pub lambda_robust: Option<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Check ids for the verify experiment; all when absent.
    pub checks: Option<Vec<usize>>,
    #[serde(default)]
    pub grid: Grids,
}

fn default_draws() -> usize {
    100_000
}

fn all_functionals() -> Vec<String> {
    NAMES.iter().map(|s| s.to_string()).collect()
}

fn default_lambda() -> f64 {
    0.1
}

fn default_alpha() -> f64 {
    0.75
}

fn default_replicates() -> usize {
    500
}

fn is_robust(name: &str) -> bool {
    matches!(name, "huber_l1" | "biweight_l1" | "sparse_lts")
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Config = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if self.n_draws == 0 {
            return Err("n_draws must be positive".into());
        }
        self.model()?;
        if self.functionals.is_empty() {
            return Err("functionals must not be empty".into());
        }
        self.specs()?;
        if self.replicates < 2 {
            return Err("replicates must be at least 2".into());
        }
        if let Some(r) = &self.grid.beta0 {
            r.values()?;
        }
        if let Some(r) = &self.grid.lambda {
            r.values()?;
        }
        if let Some(sq) = &self.grid.contamination {
            if !(sq.lo.is_finite() && sq.hi.is_finite() && sq.hi > sq.lo && sq.points >= 1) {
                return Err("contamination grid needs lo < hi and at least one point".into());
            }
        }
        if let Some(n) = &self.grid.n {
            if n.is_empty() || n.iter().any(|v| *v < 2) {
                return Err("grid.n must be non-empty with sizes of at least 2".into());
            }
        }
        if let Some(c) = &self.checks {
            if c.is_empty() || c.iter().any(|i| !(1..=10).contains(i)) {
                return Err("checks must be a non-empty list of ids in 1..=10".into());
            }
        }
        let needs = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(format!("experiment {} requires {what}", self.experiment.name()))
            }
        };
        match self.experiment {
            Experiment::BiasCurve => needs(self.grid.beta0.is_some(), "grid.beta0"),
            Experiment::AsvCurve | Experiment::MseCurve => needs(self.grid.lambda.is_some(), "grid.lambda"),
            Experiment::ScSurface | Experiment::MseConvergence => needs(self.grid.n.is_some(), "grid.n"),
            Experiment::IfSurface | Experiment::Verify => Ok(()),
        }?;
        if matches!(self.experiment, Experiment::IfSurface | Experiment::ScSurface) && self.model.beta0.len() != 1 {
            return Err("surfaces need a single predictor (model.beta0 of length 1)".into());
        }
        if self.experiment == Experiment::MseCurve && self.grid.n.as_ref().is_some_and(|n| n.len() != 1) {
            return Err("mse_curve takes a single sample size in grid.n".into());
        }
        Ok(())
    }

    pub fn model(&self) -> Result<RegressionModel, String> {
        RegressionModel::new(self.model.beta0.clone(), self.model.sigma).map_err(|e| e.to_string())
    }

    pub fn lambda_for(&self, name: &str) -> f64 {
        if is_robust(name) {
            self.lambda_robust.unwrap_or(self.lambda)
        } else {
            self.lambda
        }
    }

    pub fn specs(&self) -> Result<Vec<FunctionalSpec>, String> {
        let mut seen = std::collections::HashSet::new();
        self.functionals
            .iter()
            .map(|name| {
                if !seen.insert(name.as_str()) {
                    return Err(format!("functional '{name}' listed twice"));
                }
                FunctionalSpec::from_name(name, self.lambda_for(name), self.alpha).map_err(|e| e.to_string())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "experiment = \"if_surface\"\n[model]\nbeta0 = [1.5]\n";

    #[test]
    fn defaults_fill_in() {
        let c = Config::parse(MINIMAL).unwrap();
        assert_eq!(c.n_draws, 100_000);
        assert_eq!(c.functionals.len(), 7);
        assert_eq!(c.lambda_for("sparse_lts"), 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse(&format!("{MINIMAL}colour = 1\n")).is_err());
        assert!(Config::parse("experiment = \"if_surface\"\n[model]\nbeta0 = [1.5]\nsd = 2\n").is_err());
        assert!(Config::parse("experiment = \"plot\"\n[model]\nbeta0 = [1.5]\n").is_err());
    }

    #[test]
    fn required_grids_are_checked() {
        let bias = "experiment = \"bias_curve\"\n[model]\nbeta0 = [1.5]\n";
        assert!(Config::parse(bias).unwrap_err().contains("grid.beta0"));
        let ok = format!("{bias}[grid]\nbeta0 = {{ from = -2.0, to = 2.0, step = 0.5 }}\n");
        let c = Config::parse(&ok).unwrap();
        assert_eq!(c.grid.beta0.unwrap().values().unwrap().len(), 9);
    }

    #[test]
    fn bad_functional_names_fail() {
        let c = MINIMAL.to_string();
        let bad = c.replace("[model]", "functionals = [\"lad\"]\n[model]");
        assert!(Config::parse(&bad).unwrap_err().contains("lad"));
    }

    #[test]
    fn range_includes_endpoint() {
        let r = Range { from: 0.0, to: 1.0, step: 0.02 };
        let v = r.values().unwrap();
        assert_eq!(v.len(), 51);
        assert!((v[50] - 1.0).abs() < 1e-12);
    }
}
