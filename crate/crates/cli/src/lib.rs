//! Command implementations behind the `vscreg` binary.
//!
//! Every command returns an [`Exit`] status; errors carry their own exit
//! code through [`CliError::exit`].

pub mod config;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vscreg::harness::output::{read_report_json, write_report_dir};
use vscreg::harness::{run_sweep, verify_report, Tallies};
use vscreg::mdp::{compute_alpha_bounds, consequence_check, select_alpha_mdp, ConsequenceCheck, Probe};
use vscreg::solver::minimize_tikhonov;
use vscreg::vsc::vsc_constants;
use vscreg::{AlphaBounds64, DiscrepancyRadii, IndexFunction64, VariationalProblem};

pub use config::{load_config, parse_config, RunConfig};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    ConfigError = 1,
    ComputationFailure = 2,
    NoAdmissibleAlpha = 3,
    FlagsFailed = 4,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Compute(vscreg::Error),
    #[error("{0}")]
    NoAdmissibleAlpha(vscreg::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(_) => Exit::ConfigError,
            CliError::Compute(_) | CliError::Output(_) => Exit::ComputationFailure,
            CliError::NoAdmissibleAlpha(_) => Exit::NoAdmissibleAlpha,
        }
    }

    pub(crate) fn from_config(e: vscreg::Error) -> Self {
        CliError::Config(e.to_string())
    }

    fn from_compute(e: vscreg::Error) -> Self {
        match e {
            vscreg::Error::NoAdmissibleAlpha { .. } => CliError::NoAdmissibleAlpha(e),
            vscreg::Error::Config(m) => CliError::Config(m),
            other => CliError::Compute(other),
        }
    }
}

fn write_json<S: Serialize>(value: &S, out: &Path) -> Result<(), CliError> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    std::fs::write(out, text).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))
}

/// Output of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOutput {
    pub phi: Vec<f64>,
    pub grid_spacing: f64,
    pub alpha: f64,
    pub objective: f64,
    pub residual_norm: f64,
    pub penalty_value: f64,
    pub optimality_defect: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn cmd_solve(config_path: &Path, alpha: f64, out: &Path) -> Result<Exit, CliError> {
    let cfg = load_config(config_path)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(CliError::Config(format!("alpha must be positive, got {alpha}")));
    }
    let data = cfg.measured_data()?;
    let problem = VariationalProblem::new(&cfg.operator, &data, cfg.penalty, alpha).map_err(CliError::from_config)?;
    let sol = minimize_tikhonov(&problem, &cfg.solver, None).map_err(CliError::from_compute)?;
    write_json(
        &SolveOutput {
            grid_spacing: sol.phi.grid_spacing(),
            phi: sol.phi.values().to_vec(),
            alpha,
            objective: sol.objective_value,
            residual_norm: sol.residual_norm,
            penalty_value: sol.penalty_value,
            optimality_defect: sol.optimality_defect,
            iterations: sol.iterations,
            converged: sol.converged,
        },
        out,
    )?;
    if sol.converged {
        Ok(Exit::Success)
    } else {
        log::error!(
            "solver stopped after {} iterations with defect {:e}",
            sol.iterations,
            sol.optimality_defect
        );
        Ok(Exit::ComputationFailure)
    }
}

/// Output of `mdp`. `bounds` and `consequences` need a known exact
/// solution and are null otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpOutput {
    pub alpha: f64,
    pub residual_norm: f64,
    pub window: (f64, f64),
    pub window_hit: bool,
    pub bracket: (f64, f64),
    pub evaluations: usize,
    pub monotonicity_violations: usize,
    pub probes: Vec<Probe<f64>>,
    pub phi: Vec<f64>,
    pub objective: f64,
    pub optimality_defect: f64,
    pub psi: IndexFunction64,
    pub bounds: Option<AlphaBounds64>,
    pub consequences: Option<ConsequenceCheck<f64>>,
}

pub fn cmd_mdp(config_path: &Path, out: &Path) -> Result<Exit, CliError> {
    let cfg = load_config(config_path)?;
    let radii_cfg = cfg.radii.ok_or_else(|| CliError::Config("mdp needs a `radii` section".into()))?;
    let noise = cfg.noise.ok_or_else(|| CliError::Config("mdp needs a `noise` section with `delta`".into()))?;
    let radii =
        DiscrepancyRadii::new(radii_cfg.tau_lower, radii_cfg.tau_upper, noise.delta).map_err(CliError::from_config)?;
    let data = cfg.measured_data()?;
    let res = select_alpha_mdp(&cfg.operator, &data, cfg.penalty, &radii, &cfg.search, &cfg.solver)
        .map_err(CliError::from_compute)?;

    // without a sweep there is nothing to fit; the identity is the default
    let psi = match cfg.psi.override_psi {
        Some(p) => p,
        None => IndexFunction64::power(1.0, 1.0).expect("valid index function"),
    };
    let (bounds, consequences) = match cfg.phi_true()? {
        Some(phi_true) => {
            let sigma = vsc_constants(&radii).map_err(CliError::from_config)?.sigma_tilde;
            let j_true = cfg.penalty.eval(&phi_true);
            let b = compute_alpha_bounds(&radii, sigma, &psi, j_true).map_err(CliError::from_compute)?;
            let c = consequence_check(&res.solution.phi, &cfg.operator, &phi_true, &radii)
                .map_err(CliError::from_config)?;
            (Some(b), Some(c))
        }
        None => (None, None),
    };
    write_json(
        &MdpOutput {
            alpha: res.alpha,
            residual_norm: res.solution.residual_norm,
            window: radii.window(),
            window_hit: res.window_hit,
            bracket: res.bracket,
            evaluations: res.evaluations,
            monotonicity_violations: res.monotonicity_violations,
            probes: res.probes.clone(),
            phi: res.solution.phi.values().to_vec(),
            objective: res.solution.objective_value,
            optimality_defect: res.solution.optimality_defect,
            psi,
            bounds,
            consequences,
        },
        out,
    )?;
    Ok(Exit::Success)
}

/// Fixed-width pass/total table for a sweep's tallies.
pub fn format_tally_table(t: &Tallies) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "records: {} ok, {} failed", t.records_ok, t.records_failed);
    let _ = writeln!(s, "{:<22} {:>6} {:>6}", "flag", "passed", "total");
    for f in &t.checklist {
        let mark = if f.all_passed() { "" } else { "  FAIL" };
        let _ = writeln!(s, "{:<22} {:>6} {:>6}{mark}", f.name, f.passed, f.total);
    }
    let _ = writeln!(s, "auxiliary (not part of the exit status)");
    for f in &t.auxiliary {
        let _ = writeln!(s, "  {:<20} {:>6} {:>6}", f.name, f.passed, f.total);
    }
    s
}

pub fn cmd_sweep(config_path: &Path, out_dir: &Path) -> Result<Exit, CliError> {
    let cfg = load_config(config_path)?;
    let sweep = cfg.sweep_config()?;
    vscreg::harness::make_instance(&sweep).map_err(CliError::from_config)?;
    let report = run_sweep(&sweep).map_err(|e| match e {
        vscreg::Error::Config(m) => CliError::Config(m),
        other => CliError::Compute(other),
    })?;
    write_report_dir(&report, out_dir).map_err(|e| CliError::Output(e.to_string()))?;
    print!("{}", format_tally_table(&report.tallies));
    if report.tallies.checklist_all_passed() {
        Ok(Exit::Success)
    } else {
        Ok(Exit::FlagsFailed)
    }
}

pub fn cmd_verify(report_path: &Path) -> Result<Exit, CliError> {
    let report = read_report_json::<f64>(report_path).map_err(|e| CliError::Config(e.to_string()))?;
    let outcome = verify_report(&report).map_err(|e| match e {
        vscreg::Error::Config(m) => CliError::Config(m),
        other => CliError::Compute(other),
    })?;
    print!("{}", format_tally_table(&outcome.tallies));
    if !outcome.mismatched.is_empty() {
        log::error!("stored flags differ from recomputed ones on records {:?}", outcome.mismatched);
        return Ok(Exit::ComputationFailure);
    }
    if outcome.tallies.checklist_all_passed() {
        Ok(Exit::Success)
    } else {
        Ok(Exit::FlagsFailed)
    }
}
