//! Run configuration: JSON config file, CLI flag overrides, and the
//! `PENALIGHT_SEED` environment override for restart jitter.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use penalight::solver::{InitPattern, SolveOptions};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitPatternConfig {
    BangBangThirds,
    Constant { u: f64 },
    Custom { values: Vec<f64> },
}

impl InitPatternConfig {
    pub fn to_solver(&self) -> InitPattern {
        match self {
            InitPatternConfig::BangBangThirds => InitPattern::BangBangThirds,
            InitPatternConfig::Constant { u } => InitPattern::Constant(*u),
            InitPatternConfig::Custom { values } => InitPattern::Custom(values.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EmitKind {
    TrajectoryCsv,
    AdjointCsv,
    ReportTxt,
    ReportJson,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub n_intervals: usize,
    pub rho: f64,
    pub lambda_sweep: Option<Vec<f64>>,
    pub t_init: f64,
    pub init_pattern: InitPatternConfig,
    pub output_dir: PathBuf,
    pub emit: Vec<EmitKind>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "oscillator".to_string(),
            n_intervals: 200,
            rho: 100.0,
            lambda_sweep: None,
            t_init: 3.5,
            init_pattern: InitPatternConfig::BangBangThirds,
            output_dir: PathBuf::from("penalight_out"),
            emit: vec![
                EmitKind::TrajectoryCsv,
                EmitKind::AdjointCsv,
                EmitKind::ReportTxt,
                EmitKind::ReportJson,
            ],
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn emits(&self, kind: EmitKind) -> bool {
        self.emit.contains(&kind)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            n_intervals: self.n_intervals,
            rho: self.rho,
            t_init: self.t_init,
            init_pattern: self.init_pattern.to_solver(),
            seed: self.seed,
            ..SolveOptions::default()
        }
    }

    /// Validate invariants that the solver cannot check by itself.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_intervals == 0 {
            return Err("n_intervals must be at least 1".to_string());
        }
        if self.rho < 0.0 {
            return Err(format!("rho must be >= 0, got {}", self.rho));
        }
        if let Some(lambdas) = &self.lambda_sweep {
            if lambdas.is_empty() {
                return Err("lambda_sweep must not be empty".to_string());
            }
        }
        Ok(())
    }
}

/// File config (when given) under CLI flag overrides, then the environment
/// seed override.
pub fn resolve_config(
    config_path: Option<&std::path::Path>,
    problem: Option<&str>,
    n_intervals: Option<usize>,
    rho: Option<f64>,
    t_init: Option<f64>,
    out: Option<&std::path::Path>,
) -> Result<RunConfig, String> {
    let mut cfg = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| format!("cannot parse config {}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = problem {
        cfg.problem = p.to_string();
    }
    if let Some(n) = n_intervals {
        cfg.n_intervals = n;
    }
    if let Some(r) = rho {
        cfg.rho = r;
    }
    if let Some(t) = t_init {
        cfg.t_init = t;
    }
    if let Some(dir) = out {
        cfg.output_dir = dir.to_path_buf();
    }
    if let Ok(seed) = std::env::var("PENALIGHT_SEED") {
        cfg.seed = seed
            .parse::<u64>()
            .map_err(|_| format!("PENALIGHT_SEED must be an unsigned integer, got '{seed}'"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            problem: "nonsmooth_abs".into(),
            lambda_sweep: Some(vec![0.1, 1.0]),
            init_pattern: InitPatternConfig::Constant { u: 0.25 },
            ..Default::default()
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"problme": "oscillator"}"#);
        assert!(err.is_err());
    }
}
