//! Run configuration: JSON file, then flag overrides, then per-command defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use treepin_core::math::linspace;
use treepin_core::{DefectKind, DisorderSpec, ModelSpec};

use crate::record::RunRecord;
use crate::CliError;

/// A list of values, a single value, or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Scalar(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Scalar(x) => vec![*x],
            Grid::List(xs) => xs.clone(),
            Grid::Range { start, stop, count } => linspace(*start, *stop, *count),
        }
    }

    /// Parses `x`, `x,y,z` or `start:stop:count`.
    pub fn parse(text: &str) -> Result<Grid, String> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {s:?}: {e}"))
        };
        if let Some((start, rest)) = text.split_once(':') {
            let (stop, count) = rest
                .split_once(':')
                .ok_or_else(|| format!("range must be start:stop:count, got {text:?}"))?;
            let count = count
                .trim()
                .parse::<usize>()
                .map_err(|e| format!("bad count {count:?}: {e}"))?;
            return Ok(Grid::Range {
                start: num(start)?,
                stop: num(stop)?,
                count,
            });
        }
        let xs = text.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        Ok(if xs.len() == 1 {
            Grid::Scalar(xs[0])
        } else {
            Grid::List(xs)
        })
    }

    fn single(&self, name: &str) -> Result<f64, CliError> {
        match self.values().as_slice() {
            [x] => Ok(*x),
            xs => Err(CliError::Config(format!(
                "{name} must be a single value for this command, got {} values",
                xs.len()
            ))),
        }
    }
}

/// Every knob a command reads. Absent fields take the command's default and
/// are filled in before the configuration is recorded, so a recorded
/// configuration replays exactly.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Seeds per case in `oracle-check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<u32>,
}

pub const DEFAULT_SEED: u64 = 0x7265_6570_696e;
pub const DEFAULT_TOL: f64 = 1e-9;

impl RunConfig {
    /// Reads a configuration file, or the configuration embedded in a run record.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let parsed = if value.get("schema_version").is_some() {
            serde_json::from_value::<RunRecord>(value).map(|r| r.config)
        } else {
            serde_json::from_value::<RunConfig>(value)
        };
        parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn model(&self) -> Result<ModelSpec, CliError> {
        let model = self.model.clone().unwrap_or_else(default_model);
        model
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(model)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn beta_grid(&mut self, default: Grid) -> Vec<f64> {
        self.beta.get_or_insert(default).values()
    }

    pub fn beta_single(&mut self, default: f64) -> Result<f64, CliError> {
        self.beta
            .get_or_insert(Grid::Scalar(default))
            .single("beta")
    }

    pub fn u_grid(&mut self, default: Grid) -> Vec<f64> {
        self.u.get_or_insert(default).values()
    }

    pub fn fill_defaults(&mut self) {
        self.seed.get_or_insert(DEFAULT_SEED);
        self.tol.get_or_insert(DEFAULT_TOL);
        if self.model.is_none() {
            self.model = Some(default_model());
        }
    }
}

pub fn default_model() -> ModelSpec {
    ModelSpec {
        d: 2,
        d1: 1,
        bulk: DisorderSpec::Gaussian {
            mu: 0.0,
            sigma: 1.0,
        },
        defect: DefectKind::None,
    }
}

/// Parses `gaussian:mu:sigma`, `bernoulli:p:lo:hi` or `constant:c`.
pub fn parse_disorder(text: &str) -> Result<DisorderSpec, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums = parts[1..]
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| format!("bad number {s:?}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spec = match (parts[0], nums.as_slice()) {
        ("gaussian", [mu, sigma]) => DisorderSpec::gaussian(*mu, *sigma),
        ("bernoulli", [p, lo, hi]) => DisorderSpec::bernoulli(*p, *lo, *hi),
        ("constant", [c]) => DisorderSpec::constant(*c),
        _ => {
            return Err(format!(
                "disorder must be gaussian:MU:SIGMA, bernoulli:P:LO:HI or constant:C, got {text:?}"
            ))
        }
    };
    spec.map_err(|e| e.to_string())
}

/// Parses a defect kind name; the potential is set separately.
pub fn parse_defect(text: &str) -> Result<DefectKind, String> {
    Ok(match text {
        "none" => DefectKind::None,
        "branch_shift" | "branch-shift" => DefectKind::BranchShift { u: 0.0 },
        "subtree_constant" | "subtree-constant" => DefectKind::SubtreeConstant { u: 0.0 },
        "subtree_shift" | "subtree-shift" => DefectKind::SubtreeShift { u: 0.0 },
        _ => {
            return Err(format!(
                "defect must be none, branch_shift, subtree_constant or subtree_shift, got {text:?}"
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(Grid::parse("1.5").unwrap(), Grid::Scalar(1.5));
        assert_eq!(Grid::parse("1,2").unwrap(), Grid::List(vec![1.0, 2.0]));
        assert_eq!(Grid::parse("0:1:3").unwrap().values(), vec![0.0, 0.5, 1.0]);
        assert!(Grid::parse("0:1").is_err());
        assert!(Grid::parse("x").is_err());
    }

    #[test]
    fn grid_json_forms() {
        let g: Grid = serde_json::from_str(r#"{"start": 0, "stop": 2, "count": 5}"#).unwrap();
        assert_eq!(g.values().len(), 5);
        let g: Grid = serde_json::from_str("[0.5, 1]").unwrap();
        assert_eq!(g, Grid::List(vec![0.5, 1.0]));
        let g: Grid = serde_json::from_str("2").unwrap();
        assert_eq!(g, Grid::Scalar(2.0));
    }

    #[test]
    fn config_json() {
        let text = r#"{
            "model": {"d": 3, "d1": 2,
                      "bulk": {"kind": "gaussian", "mu": 0, "sigma": 1},
                      "defect": {"kind": "subtree_constant", "u": 0.5}},
            "beta": [1, 2], "n": 6, "replicas": 10, "seed": 9
        }"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.model().unwrap().u(), 0.5);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn flag_parsers() {
        assert_eq!(
            parse_disorder("bernoulli:0.5:-1:1").unwrap(),
            DisorderSpec::bernoulli(0.5, -1.0, 1.0).unwrap()
        );
        assert!(parse_disorder("gaussian:0").is_err());
        assert!(parse_disorder("gaussian:0:-1").is_err());
        assert!(parse_defect("subtree-shift").is_ok());
        assert!(parse_defect("wall").is_err());
    }
}
