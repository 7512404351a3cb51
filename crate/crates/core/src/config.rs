//! JSON run configuration.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coins::{BaseCoin, CoinFamily, NonlinearCoinModel};
use crate::dynamics::WalkConfig;
use crate::error::{Error, Result};
use crate::lattice::{LatticeState, Spinor};
use crate::scattering::{DEFAULT_TOL, DEFAULT_T_MAX, FIRST_CHECKPOINT};
use crate::spectral::{DEFAULT_NODES, MIN_NODES};
use crate::wlt::{default_xi_grid, VerifyOptions, DEFAULT_CHECKPOINTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinConfig {
    pub a_re: f64,
    pub a_im: f64,
    pub b_re: f64,
    pub b_im: f64,
    pub family: CoinFamily,
    #[serde(default = "default_m")]
    pub m: u32,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub g: f64,
}

/// One site of the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteAmplitude {
    pub x: i64,
    #[serde(default)]
    pub up_re: f64,
    #[serde(default)]
    pub up_im: f64,
    #[serde(default)]
    pub down_re: f64,
    #[serde(default)]
    pub down_im: f64,
}

/// Grid for the `sweep` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub g: Vec<f64>,
    pub m: Vec<u32>,
    pub family: Vec<CoinFamily>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub coin: CoinConfig,
    pub initial: Vec<SiteAmplitude>,
    /// Horizon for `evolve`.
    #[serde(default)]
    pub horizon: u64,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<u64>,
    #[serde(default = "default_xi_grid")]
    pub xi_grid: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_t_max")]
    pub t_max: u64,
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    /// Write one distribution CSV per step in `evolve`.
    #[serde(default)]
    pub per_step: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_m() -> u32 {
    1
}
fn default_kappa() -> f64 {
    1.0
}
fn default_checkpoints() -> Vec<u64> {
    DEFAULT_CHECKPOINTS.to_vec()
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_t_max() -> u64 {
    DEFAULT_T_MAX
}
fn default_nodes() -> usize {
    DEFAULT_NODES
}

/// Parses and validates a configuration, reporting every violation found.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    /// A linear walk with the Hadamard-like coin from `δ0 ⊗ (1, 0)`.
    pub fn hadamard_example() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        RunConfig {
            coin: CoinConfig {
                a_re: h,
                a_im: 0.0,
                b_re: h,
                b_im: 0.0,
                family: CoinFamily::Linear,
                m: 1,
                kappa: 1.0,
                g: 0.0,
            },
            initial: vec![SiteAmplitude {
                x: 0,
                up_re: 1.0,
                up_im: 0.0,
                down_re: 0.0,
                down_im: 0.0,
            }],
            horizon: 1,
            checkpoints: default_checkpoints(),
            xi_grid: default_xi_grid(),
            tol: DEFAULT_TOL,
            t_max: DEFAULT_T_MAX,
            n_nodes: DEFAULT_NODES,
            per_step: false,
            out_dir: None,
            sweep: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let c = &self.coin;
        if let Err(e) = self.base_coin() {
            errors.push(e.to_string());
        }
        if c.m < 1 {
            errors.push(format!("coin.m must be >= 1, got {}", c.m));
        }
        if !(c.kappa.is_finite() && c.kappa >= 0.0) {
            errors.push(format!("coin.kappa must be finite and >= 0, got {}", c.kappa));
        }
        if !(c.g.is_finite() && c.g >= 0.0) {
            errors.push(format!("coin.g must be finite and >= 0, got {}", c.g));
        }

        if self.initial.is_empty() {
            errors.push("initial state has no sites".into());
        } else {
            let mut seen = BTreeSet::new();
            for s in &self.initial {
                if !seen.insert(s.x) {
                    errors.push(format!("initial site x = {} appears more than once", s.x));
                }
                if ![s.up_re, s.up_im, s.down_re, s.down_im].iter().all(|v| v.is_finite()) {
                    errors.push(format!("initial site x = {} has non-finite amplitude", s.x));
                }
            }
            let norm = self.initial_state().norm_l2();
            if !((norm - 1.0).abs() <= 1e-9) {
                errors.push(format!("initial state is not normalized: norm = {norm}"));
            }
        }

        if self.checkpoints.is_empty() || self.checkpoints.contains(&0) {
            errors.push("checkpoints must be nonempty and all >= 1".into());
        }
        if self.xi_grid.is_empty() || !self.xi_grid.iter().all(|x| x.is_finite()) {
            errors.push("xi_grid must be nonempty and finite".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            errors.push(format!("tol must be > 0, got {}", self.tol));
        }
        if !self.t_max.is_power_of_two() || self.t_max < FIRST_CHECKPOINT {
            errors.push(format!(
                "t_max must be a power of two >= {FIRST_CHECKPOINT}, got {}",
                self.t_max
            ));
        }
        if self.n_nodes < MIN_NODES {
            errors.push(format!("n_nodes must be >= {MIN_NODES}, got {}", self.n_nodes));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.g.is_empty() || sweep.m.is_empty() || sweep.family.is_empty() {
                errors.push("sweep axes g, m and family must be nonempty".into());
            }
            if !sweep.g.iter().all(|g| g.is_finite() && *g >= 0.0) {
                errors.push("sweep.g values must be finite and >= 0".into());
            }
            if sweep.m.contains(&0) {
                errors.push("sweep.m values must be >= 1".into());
            }
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn base_coin(&self) -> Result<BaseCoin> {
        let c = &self.coin;
        BaseCoin::new(Complex64::new(c.a_re, c.a_im), Complex64::new(c.b_re, c.b_im))
    }

    pub fn model(&self) -> Result<NonlinearCoinModel> {
        let c = &self.coin;
        NonlinearCoinModel::new(self.base_coin()?, c.family, c.m, c.kappa, c.g)
    }

    pub fn initial_state(&self) -> LatticeState {
        LatticeState::from_sites(
            self.initial
                .iter()
                .map(|s| (s.x, Spinor::from_parts(s.up_re, s.up_im, s.down_re, s.down_im))),
        )
    }

    pub fn walk_config(&self) -> Result<WalkConfig> {
        WalkConfig::new(self.model()?, self.initial_state(), self.horizon)
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            checkpoints: self.checkpoints.clone(),
            xi_grid: self.xi_grid.clone(),
            tol: self.tol,
            t_max: self.t_max,
            n_nodes: self.n_nodes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "coin": {"a_re": 0.7071067811865476, "a_im": 0.0, "b_re": 0.7071067811865476, "b_im": 0.0,
                 "family": "linear", "m": 1, "kappa": 0.0, "g": 0.0},
        "initial": [{"x": 0, "up_re": 1.0}]
    }"#;

    #[test]
    fn minimal_linear_config_is_valid() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.checkpoints, vec![256, 512, 1024, 2048, 4096]);
        assert_eq!(cfg.xi_grid.len(), 21);
        assert!(cfg.model().unwrap().is_linear());
    }

    #[test]
    fn degenerate_coin_is_a_validation_error() {
        let text = MINIMAL
            .replace("\"a_re\": 0.7071067811865476", "\"a_re\": 1.0")
            .replace("\"b_re\": 0.7071067811865476", "\"b_re\": 0.0");
        match parse_config(&text) {
            Err(Error::Validation(v)) => assert!(v.iter().any(|m| m.contains("DegenerateCoin"))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_all_violations() {
        let text = MINIMAL
            .replace("\"up_re\": 1.0", "\"up_re\": 2.0")
            .replace("\"m\": 1", "\"m\": 0");
        let text = text.replacen('{', "{\"t_max\": 1000, ", 1);
        match parse_config(&text) {
            Err(Error::Validation(v)) => {
                assert_eq!(v.len(), 3, "{v:?}");
                assert!(v.iter().any(|m| m.contains("norm = 2")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_keys_and_bad_json() {
        let text = MINIMAL.replacen('{', "{\"bogus\": 1, ", 1);
        assert!(matches!(parse_config(&text), Err(Error::Parse(_))));
        assert!(matches!(parse_config("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn duplicate_sites_rejected() {
        let mut cfg = RunConfig::hadamard_example();
        cfg.initial.push(cfg.initial[0].clone());
        assert!(matches!(cfg.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn example_round_trips() {
        let cfg = RunConfig::hadamard_example();
        assert_eq!(parse_config(&cfg.to_json()).unwrap(), cfg);
    }
}
