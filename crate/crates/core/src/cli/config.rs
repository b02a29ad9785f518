//! Run configuration: a TOML document whose sections are all optional.
//! Missing values are filled per subcommand and the resolved document is
//! what gets hashed and embedded in the report.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::Model;
use crate::planted::DEFAULT_ENUMERATION_CAP;
use crate::sq::BoundGrids;
use crate::vstat::ThresholdConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: Option<String>,
    pub subcommand: Option<String>,
    pub model: Option<ModelCfg>,
    pub sos: Option<SosCfg>,
    pub sq: Option<SqCfg>,
    pub seeds: Option<Vec<u64>>,
    pub caps: Option<CapsCfg>,
    pub calibration: Option<CalibrationCfg>,
    pub coefficients: Option<CoefficientCfg>,
    pub ribbon: Option<RibbonCfg>,
    pub counts: Option<CountsCfg>,
    pub bounds: Option<BoundGrids>,
    pub vstat: Option<ThresholdConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCfg {
    pub n: usize,
    pub k: usize,
    pub t: usize,
}

impl ModelCfg {
    pub fn model(&self) -> Result<Model> {
        Model::new(self.n, self.k, self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosCfg {
    pub d: usize,
    pub tau: usize,
    /// Overrides the `epsilon` implied by `kt = n^{1/2 - epsilon}` in the window flags.
    pub epsilon: Option<f64>,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub exact_certify: bool,
    #[serde(default = "default_rest")]
    pub constraint_rest: usize,
}

fn default_rest() -> usize {
    2
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqCfg {
    pub ell: Option<usize>,
    /// Used to derive `l` when `ell` is absent.
    pub delta: Option<f64>,
    pub num_subsets: Option<usize>,
    /// Proceed with a flag instead of failing when `l` leaves the window.
    pub allow_outside_window: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsCfg {
    pub enumeration: Option<u64>,
    pub pair_budget: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationCfg {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub tau: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientCfg {
    pub max_monomial: usize,
    pub max_vertices: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RibbonCfg {
    pub triples: usize,
    pub max_vertices: usize,
    pub labels: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsCfg {
    pub max_n: usize,
    pub max_m: u64,
    pub histograms: Vec<[usize; 3]>,
}

/// Parses a config file; errors carry the TOML line and field.
pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

impl RunConfig {
    pub fn enumeration_cap(&self) -> u64 {
        self.caps.and_then(|c| c.enumeration).unwrap_or(DEFAULT_ENUMERATION_CAP)
    }

    pub fn pair_budget(&self) -> u64 {
        self.caps.and_then(|c| c.pair_budget).unwrap_or(1 << 24)
    }

    pub fn seeds_or(&self, default: impl FnOnce() -> Vec<u64>) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(default)
    }

    pub fn first_seed(&self) -> u64 {
        self.seeds.as_ref().and_then(|s| s.first().copied()).unwrap_or(1)
    }

    pub fn model_or(&mut self, n: usize, k: usize, t: usize) -> Result<Model> {
        self.model.get_or_insert(ModelCfg { n, k, t }).model()
    }

    pub fn sos_or(&mut self, d: usize, tau: usize) -> SosCfg {
        self.sos
            .get_or_insert(SosCfg {
                d,
                tau,
                epsilon: None,
                tolerance: None,
                exact_certify: false,
                constraint_rest: default_rest(),
            })
            .clone()
    }

    /// Fills the cap table so the resolved document records the caps used.
    pub fn resolve_caps(&mut self) {
        let caps = CapsCfg {
            enumeration: Some(self.enumeration_cap()),
            pair_budget: Some(self.pair_budget()),
        };
        self.caps = Some(caps);
    }
}
