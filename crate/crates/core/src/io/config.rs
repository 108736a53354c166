//! Run configuration, read from JSON and overridden by command-line flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bilevel::ParamGrid;
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, TrainingSet};
use crate::regularizers::{ExtendedParam, FamilySpec};
use crate::solvers::SolverConfig;

use super::{demos, signal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub domain: Domain,
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<Grid>> {
        Grid::new(self.domain, self.points)
    }
}

/// Where the training pairs come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DataSpec {
    Files {
        clean: Vec<PathBuf>,
        noisy: Vec<PathBuf>,
    },
    Builtin {
        builtin: String,
    },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Files {
            clean: Vec::new(),
            noisy: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilySpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub param_grid: Option<ParamGrid>,
    #[serde(default = "default_refine")]
    pub refine_iters: usize,
    /// Parameter for `solve` and `eval`.
    #[serde(default)]
    pub param: Option<ExtendedParam>,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_refine() -> usize {
    20
}

impl RunConfig {
    pub fn new(family: FamilySpec) -> Self {
        RunConfig {
            family,
            grid: None,
            solver: SolverConfig::default(),
            param_grid: None,
            refine_iters: default_refine(),
            param: None,
            data: DataSpec::default(),
            out: None,
            seed: 0,
            threads: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks everything that can be checked without touching the data.
    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        self.solver.validate()?;
        if let Some(g) = &self.grid {
            g.build()?;
        }
        if let Some(pg) = &self.param_grid {
            pg.validate(&self.family)?;
        }
        if let Some(p) = self.param {
            self.family.check_param(p)?;
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        match &self.data {
            DataSpec::Files { clean, noisy } if !clean.is_empty() && clean.len() != noisy.len() => Err(Error::Config(format!(
                "{} clean but {} noisy files",
                clean.len(),
                noisy.len()
            ))),
            DataSpec::Builtin { builtin } => demos::builtin_dataset(builtin).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn param_grid(&self) -> ParamGrid {
        self.param_grid.unwrap_or_else(|| ParamGrid::default_for(&self.family))
    }

    /// The effective solver settings; the run seed drives multi-start solvers.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            seed: self.seed,
            ..self.solver.clone()
        }
    }

    /// Loads the training pairs, on the configured grid if one is given.
    pub fn training(&self) -> Result<TrainingSet> {
        match &self.data {
            DataSpec::Builtin { builtin } => demos::builtin_dataset(builtin),
            DataSpec::Files { clean, noisy } => {
                if clean.is_empty() {
                    return Err(Error::Config("no training data: give clean and noisy files".into()));
                }
                let mut grid = self.grid.as_ref().map(GridSpec::build).transpose()?;
                let mut pairs = Vec::with_capacity(clean.len());
                for (c, n) in clean.iter().zip(noisy) {
                    let uc = signal::read_signal(c, grid.as_ref())?;
                    grid.get_or_insert_with(|| uc.grid().clone());
                    let un = signal::read_signal(n, grid.as_ref())?;
                    pairs.push((uc, un));
                }
                TrainingSet::new(pairs)
            }
        }
    }

    /// Noisy signals only (for `solve`); clean files are optional there.
    pub fn noisy_signals(&self) -> Result<Vec<crate::grid::GridSignal>> {
        match &self.data {
            DataSpec::Files { clean, noisy } if clean.is_empty() => {
                if noisy.is_empty() {
                    return Err(Error::Config("no noisy data given".into()));
                }
                let mut grid = self.grid.as_ref().map(GridSpec::build).transpose()?;
                let mut out = Vec::new();
                for n in noisy {
                    let u = signal::read_signal(n, grid.as_ref())?;
                    grid.get_or_insert_with(|| u.grid().clone());
                    out.push(u);
                }
                Ok(out)
            }
            _ => Ok(self.training()?.noisy().cloned().collect()),
        }
    }

    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex_digest(self.canonical_json()?.as_bytes()))
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let ok = r#"{"family": {"family": "weight", "base": {"kind": "tv"}},
                     "grid": {"domain": {"kind": "interval", "a": 0, "b": 1}, "points": 16},
                     "param_grid": {"transform": "log", "lo": 0.01, "hi": 1, "count": 5},
                     "solver": {"tol": 1e-8},
                     "data": {"builtin": "remark-2.3"}}"#;
        let c = RunConfig::from_json(ok).unwrap();
        c.validate().unwrap();
        assert_eq!(c.solver.tol, 1e-8);
        assert_eq!(c.refine_iters, 20);
        assert!(RunConfig::from_json(&ok.replace("\"solver\"", "\"solvr\"")).is_err());
        assert!(RunConfig::from_json(&ok.replace("\"tol\"", "\"tolerance\"")).is_err());
        assert!(RunConfig::from_json(&ok.replace("\"points\": 16", "\"points\": 16, \"x\": 1")).is_err());
        let bad_grid = ok.replace("\"lo\": 0.01", "\"lo\": -1");
        assert!(RunConfig::from_json(&bad_grid).unwrap().validate().is_err());
        let bad_data = ok.replace("remark-2.3", "nope");
        assert!(RunConfig::from_json(&bad_data).unwrap().validate().is_err());
    }

    #[test]
    fn hash_is_stable() {
        let c = RunConfig::new(FamilySpec::Weight { base: crate::regularizers::BaseRegularizer::Tv });
        assert_eq!(c.hash().unwrap(), c.clone().hash().unwrap());
        assert_eq!(c.hash().unwrap().len(), 64);
    }
}
