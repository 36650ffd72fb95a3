use std::path::{Path, PathBuf};

use clap::ValueEnum;
use gsee_core::bounds::GridSpec;
use gsee_core::planner::PlanInputs;
use gsee_core::sim::{eigendecompose, DenseHamiltonian, SpectrumSpec};
use gsee_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Plan,
    Spectrum,
    Gsee,
    Qpe,
    Bounds,
    Sweep,
}

/// On-disk experiment config. Relative paths resolve against the config's directory.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub spectrum_path: Option<PathBuf>,
    #[serde(default)]
    pub hamiltonian: Option<DenseHamiltonian>,
    #[serde(default)]
    pub hamiltonian_path: Option<PathBuf>,
    #[serde(default)]
    pub inputs: Option<PlanInputs>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub runs: Option<u64>,
    #[serde(default)]
    pub alpha_list: Option<Vec<f64>>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub bounds: Option<GridSpec>,
}

/// Config after flags and defaults are applied; echoed to config-echo.json.
#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub mode: Mode,
    pub spectrum: Option<SpectrumSpec>,
    pub inputs: Option<PlanInputs>,
    pub seed: u64,
    pub runs: u64,
    pub alpha_list: Vec<f64>,
    pub out: PathBuf,
    pub threads: usize,
    pub bounds: Option<GridSpec>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<(ExperimentConfig, PathBuf)> {
    let text = read(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

impl ExperimentConfig {
    pub fn spectrum(&self, base: &Path) -> Result<Option<SpectrumSpec>> {
        let sources = [
            self.spectrum.is_some(),
            self.spectrum_path.is_some(),
            self.hamiltonian.is_some(),
            self.hamiltonian_path.is_some(),
        ];
        if sources.iter().filter(|&&b| b).count() > 1 {
            return Err(Error::Invalid("give exactly one spectrum source".into()));
        }
        if let Some(s) = &self.spectrum {
            let mut s = s.clone();
            s.validate()?;
            return Ok(Some(s));
        }
        if let Some(p) = &self.spectrum_path {
            return SpectrumSpec::from_json(&read(&base.join(p))?).map(Some);
        }
        let h = match (&self.hamiltonian, &self.hamiltonian_path) {
            (Some(h), _) => h.clone(),
            (None, Some(p)) => serde_json::from_str(&read(&base.join(p))?)?,
            (None, None) => return Ok(None),
        };
        Ok(Some(eigendecompose(&h)?.spectrum))
    }
}
