//! The JSON run configuration shared by every subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vscreg::harness::{add_noise_exact, DeltaGrid, Phantom, PsiSettings, SweepConfig};
use vscreg::{AlphaMaxVariant, LinearMap64, Penalty64, SearchSettings64, Signal64, SolverSettings64};

use crate::CliError;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSection {
    pub name: Phantom,
    pub dimension: usize,
    #[serde(default = "one")]
    pub grid_spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiSection {
    pub tau_lower: f64,
    pub tau_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub noise_fill: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub delta_max: f64,
    pub factor: f64,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub noise_fill: f64,
}

/// Full configuration document. `data` (measured right-hand side) and
/// `truth` (known exact solution) are optional; with a `phantom` section
/// the exact data are generated as `T phi_true` and, if a `noise` section
/// is present, perturbed by noise of norm `noise_fill * delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: LinearMap64,
    pub penalty: Penalty64,
    #[serde(default)]
    pub phantom: Option<PhantomSection>,
    #[serde(default)]
    pub data: Option<Signal64>,
    #[serde(default)]
    pub truth: Option<Signal64>,
    #[serde(default)]
    pub radii: Option<RadiiSection>,
    #[serde(default)]
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub solver: SolverSettings64,
    #[serde(default)]
    pub search: SearchSettings64,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub psi: PsiSettings<f64>,
    #[serde(default)]
    pub alpha_max_variant: AlphaMaxVariant,
}

/// Parses a config, reporting the JSON path of the offending key on error.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.into_inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        let (n_in, n_out) = (self.operator.in_dim(), self.operator.out_dim());
        if let Some(d) = &self.data {
            if d.len() != n_out {
                return Err(CliError::Config(format!("data has length {}, operator maps to {n_out}", d.len())));
            }
        }
        if let Some(t) = &self.truth {
            if t.len() != n_in {
                return Err(CliError::Config(format!("truth has length {}, operator acts on {n_in}", t.len())));
            }
        }
        if let Some(p) = &self.phantom {
            if p.dimension != n_in {
                return Err(CliError::Config(format!(
                    "phantom.dimension is {}, operator acts on {n_in}",
                    p.dimension
                )));
            }
            if self.truth.is_some() {
                return Err(CliError::Config("give at most one of `phantom` and `truth`".into()));
            }
        }
        if let Some(n) = &self.noise {
            if !(n.delta.is_finite() && n.delta > 0.0) {
                return Err(CliError::Config(format!("noise.delta must be positive, got {}", n.delta)));
            }
            if !(n.noise_fill > 0.0 && n.noise_fill <= 1.0) {
                return Err(CliError::Config(format!("noise.noise_fill must lie in (0, 1], got {}", n.noise_fill)));
            }
        }
        self.solver.validate().map_err(|e| CliError::Config(format!("solver: {e}")))?;
        self.search.validate().map_err(|e| CliError::Config(format!("search: {e}")))?;
        Ok(())
    }

    /// Known exact solution, from `truth` or the phantom.
    pub fn phi_true(&self) -> Result<Option<Signal64>, CliError> {
        if let Some(t) = &self.truth {
            return Ok(Some(t.clone()));
        }
        match &self.phantom {
            Some(p) => Ok(Some(p.name.generate(p.dimension, p.grid_spacing).map_err(CliError::from_config)?)),
            None => Ok(None),
        }
    }

    /// Right-hand side for `solve` and `mdp`.
    pub fn measured_data(&self) -> Result<Signal64, CliError> {
        if let Some(d) = &self.data {
            return Ok(d.clone());
        }
        let phi = self
            .phi_true()?
            .ok_or_else(|| CliError::Config("config needs `data`, `truth` or `phantom`".into()))?;
        let exact = self.operator.apply(&phi).map_err(CliError::from_config)?;
        match &self.noise {
            Some(n) => add_noise_exact(&exact, n.noise_fill * n.delta, n.seed).map_err(CliError::from_config),
            None => Ok(exact),
        }
    }

    /// The sweep description, or a config error naming the missing section.
    pub fn sweep_config(&self) -> Result<SweepConfig<f64>, CliError> {
        let sweep = self.sweep.ok_or_else(|| CliError::Config("missing `sweep` section".into()))?;
        let phantom = self
            .phantom
            .as_ref()
            .ok_or_else(|| CliError::Config("sweep needs a `phantom` section".into()))?;
        let radii = self.radii.ok_or_else(|| CliError::Config("sweep needs a `radii` section".into()))?;
        Ok(SweepConfig {
            operator: self.operator.clone(),
            penalty: self.penalty,
            phantom: phantom.name,
            dimension: phantom.dimension,
            grid_spacing: phantom.grid_spacing,
            tau_lower: radii.tau_lower,
            tau_upper: radii.tau_upper,
            delta_grid: DeltaGrid {
                delta_max: sweep.delta_max,
                factor: sweep.factor,
                count: sweep.count,
            },
            seed: sweep.seed,
            noise_fill: sweep.noise_fill,
            solver: self.solver,
            search: self.search,
            psi: self.psi,
            alpha_max_variant: self.alpha_max_variant,
        })
    }
}
