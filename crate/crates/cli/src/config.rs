//! JSON run configuration. Every field is optional; command-line flags
//! override the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rotwave::waves::Discretization;
use rotwave::{FluidParams, Problem, VorticitySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub vorticity: VorticitySpec,
    pub disc: Discretization,
    /// Output directory.
    pub output: PathBuf,
    pub laminar: LaminarOpts,
    pub dispersion: DispersionOpts,
    pub bifurcate: BifurcateOpts,
    pub branch: BranchOpts,
    pub fields: FieldsOpts,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamsConfig::default(),
            vorticity: VorticitySpec::Zero,
            disc: Discretization::default(),
            output: PathBuf::from("out"),
            laminar: LaminarOpts::default(),
            dispersion: DispersionOpts::default(),
            bifurcate: BifurcateOpts::default(),
            branch: BranchOpts::default(),
            fields: FieldsOpts::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub p0: f64,
    pub g: f64,
    pub sigma: f64,
    pub r: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            p0: -1.0,
            g: 9.8,
            sigma: 0.07,
            r: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaminarOpts {
    /// Defaults to 2Γ_M + 1.
    pub lambda: Option<f64>,
    pub points: usize,
}

impl Default for LaminarOpts {
    fn default() -> Self {
        LaminarOpts { lambda: None, points: 257 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionOpts {
    /// Defaults to λ₀ + 0.01·max(1, λ₀).
    pub lambda_min: Option<f64>,
    /// Defaults to λ₀ + 10·max(1, λ₀).
    pub lambda_max: Option<f64>,
    pub samples: usize,
}

impl Default for DispersionOpts {
    fn default() -> Self {
        DispersionOpts {
            lambda_min: None,
            lambda_max: None,
            samples: 40,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BifurcateOpts {
    /// Defaults to N + 4.
    pub n_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchOpts {
    /// Defaults to the minimal wavenumber N.
    pub n: Option<u32>,
    pub s: Vec<f64>,
}

impl Default for BranchOpts {
    fn default() -> Self {
        BranchOpts {
            n: None,
            s: vec![0.001, 0.01],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldsOpts {
    /// Defaults to the minimal wavenumber N.
    pub n: Option<u32>,
    pub s: f64,
    /// Wave speed c added to u − c in the CSV column `u`.
    pub wave_speed: f64,
}

impl Default for FieldsOpts {
    fn default() -> Self {
        FieldsOpts {
            n: None,
            s: 0.01,
            wave_speed: 0.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn problem(&self) -> Result<Problem, rotwave::Error> {
        let p = &self.params;
        Problem::new(FluidParams::new(p.p0, p.g, p.sigma, p.r)?, self.vorticity.clone())
    }
}
