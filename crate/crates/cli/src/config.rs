//! Run configuration, read from a TOML file.
//!
//! ```toml
//! [potential]
//! kind = "harmonic_plus_one"
//!
//! [interaction]
//! shape = "step"
//! amplitude = 2.0
//! range = 1.0
//!
//! [sweep]
//! n = [10000, 1000000]
//! beta = [0.40]
//!
//! [tolerance]
//! rel = 1e-11
//! ```

use std::path::{Path, PathBuf};

use fermitrap_core::numerics::Tolerance;
use fermitrap_core::potentials::{make_potential, Potential, PotentialSpec};
use fermitrap_core::scattering::InteractionSpec;
use fermitrap_core::spectra::{Trap1d, WeylTrap};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Tf,
    Scatter,
    Semiclass,
    Spectra,
    Husimi,
    Predict,
    Boxes,
    Budget,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Tf => "tf",
            Command::Scatter => "scatter",
            Command::Semiclass => "semiclass",
            Command::Spectra => "spectra",
            Command::Husimi => "husimi",
            Command::Predict => "predict",
            Command::Boxes => "boxes",
            Command::Budget => "budget",
            Command::VerifyAll => "verify-all",
        }
    }
}

/// Sweep lists. An absent list takes the command's default; an empty one
/// is rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweeps {
    pub n: Option<Vec<u64>>,
    pub beta: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub amplitude: Option<Vec<f64>>,
    pub p_f: Option<Vec<f64>>,
    pub g: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectraConfig {
    /// ℏ and truncation of the printed oscillator catalog.
    pub hbar: f64,
    pub lambda_max: f64,
    pub offset: f64,
    pub weyl_trap: WeylTrap,
    /// Λ for the Weyl scan; 48^{1/3} when absent.
    pub weyl_lambda: Option<f64>,
    /// N values for the free ground-state density sweep.
    pub free_density_n: Vec<u64>,
}

impl Default for SpectraConfig {
    fn default() -> Self {
        SpectraConfig {
            hbar: 1.0,
            lambda_max: 11.5,
            offset: 0.0,
            weyl_trap: WeylTrap::Harmonic3d { offset: 0.0 },
            weyl_lambda: None,
            free_density_n: vec![100, 1000, 10_000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HusimiConfig {
    pub trap: Trap1d,
    pub hbar: Vec<f64>,
    pub fill: usize,
    pub p_f: f64,
    /// Catalog truncation; must leave at least `fill` levels.
    pub lambda_max: f64,
}

impl Default for HusimiConfig {
    fn default() -> Self {
        HusimiConfig {
            trap: Trap1d::harmonic(),
            hbar: vec![0.05, 0.025],
            fill: 10,
            p_f: 0.5,
            lambda_max: 1.2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub potential: Option<PotentialSpec>,
    pub interaction: Option<InteractionSpec>,
    #[serde(default)]
    pub sweep: Sweeps,
    #[serde(default)]
    pub tolerance: Tolerance,
    #[serde(default)]
    pub spectra: SpectraConfig,
    #[serde(default)]
    pub husimi: HusimiConfig,
    /// Explicit ε for the error budget; the default rule applies when absent.
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub json: bool,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.tolerance.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(cfg)
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        let spec = self
            .potential
            .as_ref()
            .ok_or_else(|| config_err("missing [potential] section"))?;
        make_potential(spec).map_err(|e| config_err(e.to_string()))
    }

    pub fn interaction(&self) -> Result<InteractionSpec, CliError> {
        let spec = self
            .interaction
            .clone()
            .ok_or_else(|| config_err("missing [interaction] section"))?;
        spec.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(spec)
    }

    /// Checks everything `command` needs before any computation starts.
    pub fn validate_for(&self, command: Command) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(config_err(format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        let s = &self.sweep;
        for (name, empty) in [
            ("n", s.n.as_ref().is_some_and(|v| v.is_empty())),
            ("beta", s.beta.as_ref().is_some_and(|v| v.is_empty())),
            ("lambda", s.lambda.as_ref().is_some_and(|v| v.is_empty())),
            ("amplitude", s.amplitude.as_ref().is_some_and(|v| v.is_empty())),
            ("p_f", s.p_f.as_ref().is_some_and(|v| v.is_empty())),
            ("g", s.g.as_ref().is_some_and(|v| v.is_empty())),
        ] {
            if empty {
                return Err(config_err(format!("sweep list `{name}` is empty")));
            }
        }
        if s.n.as_ref().is_some_and(|v| v.iter().any(|&n| n < 1)) {
            return Err(config_err("sweep list `n` must hold positive integers"));
        }
        match command {
            Command::Tf | Command::Semiclass => {
                self.potential()?;
            }
            Command::Scatter => {
                self.interaction()?;
            }
            Command::Predict | Command::Boxes => {
                self.potential()?;
                self.interaction()?;
            }
            Command::Spectra => {
                let sp = &self.spectra;
                if !(sp.hbar > 0.0) || !(sp.lambda_max > sp.offset) {
                    return Err(config_err("[spectra] needs hbar > 0 and lambda_max > offset"));
                }
                if sp.free_density_n.is_empty() {
                    return Err(config_err("[spectra] free_density_n is empty"));
                }
                if let WeylTrap::Fd1d { trap } = &sp.weyl_trap {
                    trap.validate().map_err(|e| config_err(e.to_string()))?;
                }
            }
            Command::Husimi => {
                let h = &self.husimi;
                h.trap.validate().map_err(|e| config_err(e.to_string()))?;
                if h.hbar.is_empty() || h.hbar.iter().any(|x| !(*x > 0.0)) {
                    return Err(config_err("[husimi] hbar must be a nonempty list of positive values"));
                }
                if h.fill < 1 {
                    return Err(config_err("[husimi] fill must be at least 1"));
                }
            }
            Command::Budget | Command::VerifyAll => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_example() {
        let cfg = RunConfig::from_toml(
            r#"
            command = "tf"
            [potential]
            kind = "power_plus_one"
            s = 3.0
            [interaction]
            shape = "step"
            amplitude = 2.0
            [sweep]
            n = [1000, 100000]
            [tolerance]
            rel = 1e-9
            "#,
        )
        .unwrap();
        assert_eq!(cfg.command, Some(Command::Tf));
        assert_eq!(cfg.interaction().unwrap().range, 1.0);
        assert_eq!(cfg.tolerance.rel, 1e-9);
        assert_eq!(cfg.tolerance.max_refinements, Tolerance::default().max_refinements);
        cfg.validate_for(Command::Tf).unwrap();
        assert!(cfg.validate_for(Command::Budget).is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_empty_lists() {
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        let cfg = RunConfig::from_toml("[sweep]\nn = []").unwrap();
        assert!(cfg.validate_for(Command::Budget).is_err());
        assert!(RunConfig::from_toml("[tolerance]\nabs = -1.0").is_err());
    }

    #[test]
    fn missing_potential_is_a_config_error() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert!(matches!(cfg.validate_for(Command::Tf), Err(CliError::Config(_))));
        cfg.validate_for(Command::VerifyAll).unwrap();
    }
}
