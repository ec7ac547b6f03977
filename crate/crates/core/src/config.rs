//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, ScalingParams};
use crate::kinetic::BoundaryKernel;
use crate::moments::maxwellian_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    /// `rho0 = 1 + 0.1 sin^2(pi x)`, a compactly supported velocity bump,
    /// `n0 = 1`, `v0 = 0` on the unit interval (rescaled to the domain).
    LocalMaxwellianWave,
    /// `rho = n = 1`, `u = v = 0`.
    Equilibrium,
    /// Fields `rho, u, n, v` read from a binary state file.
    Custom { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryChoice {
    Specular,
    Diffuse { wall_temperature: f64 },
    /// Incoming Maxwellian with the given density and temperature.
    Dirichlet { density: f64, temperature: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    Coupled,
    LimitDirect,
    LimitPicard,
}

fn default_x_hi() -> f64 {
    1.0
}
fn default_v_max() -> f64 {
    8.0
}
fn default_cfl() -> f64 {
    0.4
}
fn default_gamma() -> f64 {
    2.0
}
fn default_samples() -> usize {
    32
}
fn default_picard_iterations() -> usize {
    10
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_leak_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nx: usize,
    pub nv: usize,
    #[serde(default)]
    pub x_lo: f64,
    #[serde(default = "default_x_hi")]
    pub x_hi: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    pub eps_list: Vec<f64>,
    pub t_final: f64,
    /// Fixed time step; derived from `cfl` when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub initial_profile: InitialProfile,
    #[serde(default = "BoundaryChoice::default_specular")]
    pub boundary: BoundaryChoice,
    #[serde(default = "SolverMode::default_coupled")]
    pub solver_mode: SolverMode,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Number of uniform sampling intervals over `[0, t_final]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub vel_floor: Option<f64>,
    #[serde(default)]
    pub chi_lambda: Option<f64>,
    #[serde(default = "default_picard_iterations")]
    pub picard_iterations: usize,
    /// Largest mass allowed in the outermost velocity cells before a run is
    /// flagged.
    #[serde(default = "default_leak_tolerance")]
    pub leak_tolerance: f64,
}

impl BoundaryChoice {
    fn default_specular() -> Self {
        BoundaryChoice::Specular
    }
}

impl SolverMode {
    fn default_coupled() -> Self {
        SolverMode::Coupled
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text)?;
        // custom profile paths are relative to the config file
        if let InitialProfile::Custom { path: p } = &mut cfg.initial_profile {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.eps_list.is_empty() || self.eps_list.iter().any(|&e| !(e > 0.0)) {
            return bad("eps_list must be nonempty and positive".into());
        }
        if self.eps_list.windows(2).any(|w| !(w[0] > w[1])) {
            return bad("eps_list must be sorted in strictly descending order".into());
        }
        if !(self.t_final > 0.0) {
            return bad(format!("t_final={} must be positive", self.t_final));
        }
        if !(self.gamma > 1.0) {
            return bad(format!("gamma={} must exceed 1", self.gamma));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl={} must lie in (0, 1]", self.cfl));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad(format!("dt={dt} must be positive"));
            }
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        self.grid()?;
        self.scaling(self.eps_list[0])?;
        Ok(())
    }

    pub fn grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::new(self.nx, self.nv, self.x_lo, self.x_hi, self.v_max)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn scaling(&self, eps: f64) -> Result<ScalingParams> {
        ScalingParams::with_regularization(
            eps,
            self.vel_floor.unwrap_or(ScalingParams::DEFAULT_VEL_FLOOR),
            self.chi_lambda.unwrap_or(f64::INFINITY),
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn boundary_kernel(&self, grid: &PhaseGrid) -> Result<BoundaryKernel> {
        let k = match &self.boundary {
            BoundaryChoice::Specular => Ok(BoundaryKernel::Specular),
            BoundaryChoice::Diffuse { wall_temperature } => {
                BoundaryKernel::diffuse(grid, *wall_temperature)
            }
            BoundaryChoice::Dirichlet {
                density,
                temperature,
            } => {
                if !(*temperature > 0.0 && *density >= 0.0) {
                    return Err(Error::Config(
                        "Dirichlet wall needs density >= 0 and temperature > 0".into(),
                    ));
                }
                let norm = density * maxwellian_norm(grid.dim) / temperature.sqrt();
                let g = (0..grid.nv)
                    .map(|j| norm * (-grid.xi(j).powi(2) / (2.0 * temperature)).exp())
                    .collect();
                BoundaryKernel::dirichlet(grid, g)
            }
        };
        k.map_err(|e| Error::Config(e.to_string()))
    }
}
