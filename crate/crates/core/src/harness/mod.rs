//! Noise-sweep experiments: for each noise level on a geometric grid, inject
//! noise of known norm, pick `alpha` by the discrepancy principle, and
//! evaluate every error quantity and inequality on the result.

pub mod noise;
pub mod output;
pub mod phantom;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{LinearMap, Signal};
use crate::mdp::{
    compute_alpha_bounds, select_alpha_mdp, validate_taus, AlphaBounds, AlphaMaxVariant,
    DiscrepancyRadii, SearchSettings,
};
use crate::penalties::Penalty;
use crate::scalar::Scalar;
use crate::solver::{SolverSettings, VariationalProblem};
use crate::vsc::{
    check_theorems, fit_index_power, fit_loglog, vsc_constants, IndexFunction, LogLogFit, RecordQuantities,
    TheoremChecklist, CHECKLIST_FLAGS,
};

pub use noise::{add_noise_exact, add_noise_exact_stream};
pub use phantom::Phantom;

/// Floor applied to the J-difference before taking logs.
pub const JDIFF_LOG_FLOOR: f64 = 1e-16;
/// Slack for the `F(phi_alpha) <= F(phi_true)` flag.
pub const MINIMIZER_TOLERANCE: f64 = 1e-8;

/// `delta_k = delta_max * factor^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DeltaGrid<T> {
    pub delta_max: T,
    pub factor: T,
    pub count: usize,
}

impl<T: Scalar> DeltaGrid<T> {
    pub fn deltas(&self) -> Vec<T> {
        let mut d = self.delta_max;
        (0..self.count)
            .map(|_| {
                let cur = d;
                d *= self.factor;
                cur
            })
            .collect()
    }
}

/// Which per-record quantity the index function is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiTarget {
    #[default]
    BregmanFwd,
    BregmanRev,
    BregmanSym,
    VscPairing,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PsiSettings<T> {
    pub target: PsiTarget,
    /// Use this index function instead of fitting one.
    #[serde(rename = "override")]
    pub override_psi: Option<IndexFunction<T>>,
}

fn one<T: Scalar>() -> T {
    T::one()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SweepConfig<T> {
    pub operator: LinearMap<T>,
    pub penalty: Penalty<T>,
    pub phantom: Phantom,
    pub dimension: usize,
    #[serde(default = "one")]
    pub grid_spacing: T,
    pub tau_lower: T,
    pub tau_upper: T,
    pub delta_grid: DeltaGrid<T>,
    pub seed: u64,
    /// Noise norm as a fraction of `delta`.
    #[serde(default = "one")]
    pub noise_fill: T,
    #[serde(default)]
    pub solver: SolverSettings<T>,
    #[serde(default)]
    pub search: SearchSettings<T>,
    #[serde(default)]
    pub psi: PsiSettings<T>,
    #[serde(default)]
    pub alpha_max_variant: AlphaMaxVariant,
}

/// Ground truth of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Instance<T> {
    pub phi_true: Signal<T>,
    pub f_true: Signal<T>,
    pub j_true: T,
}

impl<T: Scalar> SweepConfig<T> {
    /// Structural checks that need no forward solve.
    pub fn validate_shape(&self) -> Result<()> {
        if self.delta_grid.count < 3 {
            return Err(Error::Config(format!(
                "delta_grid.count must be at least 3, got {}",
                self.delta_grid.count
            )));
        }
        let factor = self.delta_grid.factor;
        if !(factor > T::zero() && factor < T::one()) {
            return Err(Error::Config(format!("delta_grid.factor must lie in (0, 1), got {factor}")));
        }
        let dmax = self.delta_grid.delta_max;
        if !(dmax.is_finite() && dmax > T::zero()) {
            return Err(Error::Config(format!("delta_grid.delta_max must be positive, got {dmax}")));
        }
        if !(self.noise_fill > T::zero() && self.noise_fill <= T::one()) {
            return Err(Error::Config(format!("noise_fill must lie in (0, 1], got {}", self.noise_fill)));
        }
        if self.operator.in_dim() != self.dimension {
            return Err(Error::Config(format!(
                "operator acts on dimension {}, phantom has dimension {}",
                self.operator.in_dim(),
                self.dimension
            )));
        }
        validate_taus(self.tau_lower, self.tau_upper).map_err(|e| Error::Config(e.to_string()))?;
        self.solver.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.search.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn deltas(&self) -> Vec<T> {
        self.delta_grid.deltas()
    }
}

/// Builds `phi_true`, `f_true = T phi_true` and `J(phi_true)`, and checks
/// that the noise grid stays below `||f_true||`.
pub fn make_instance<T: Scalar>(config: &SweepConfig<T>) -> Result<Instance<T>> {
    config.validate_shape()?;
    let phi_true = config.phantom.generate(config.dimension, config.grid_spacing)?;
    let f_true = config.operator.apply(&phi_true)?;
    let norm = f_true.norm();
    if config.delta_grid.delta_max >= norm {
        return Err(Error::Config(format!(
            "delta_grid.delta_max {} must be below ||f_true|| = {}",
            config.delta_grid.delta_max, norm
        )));
    }
    Ok(Instance {
        j_true: config.penalty.eval(&phi_true),
        phi_true,
        f_true,
    })
}

/// Record-level flags that are reported but are not part of the checklist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxiliaryFlags {
    /// Residual inside `[tau_lower delta, tau_upper delta]`.
    pub window: bool,
    /// `||T phi_alpha - T phi_true|| <= (tau_upper + 1) delta`.
    pub mdp_upper: bool,
    /// `(tau_lower - 1) delta <= ||T phi_alpha - T phi_true||`.
    pub mdp_lower: bool,
    pub new_lower_le_alpha: bool,
    pub hm_lower_le_alpha: bool,
    pub alpha_le_alpha_max: bool,
    /// `(sigma/4) J_true delta^2 <= Psi(delta)`.
    pub index_lower_le_psi: bool,
    /// `||phi_alpha - phi_true|| <= D(phi_alpha, phi_true)`.
    pub stabilization: bool,
    /// `F_alpha(phi_alpha) <= F_alpha(phi_true)`.
    pub minimizer: bool,
    /// `vsc_inequality` holds wherever `vsc_condition` does.
    pub vsc_implication: bool,
}

pub const AUXILIARY_FLAGS: [&str; 10] = [
    "window",
    "mdp_upper",
    "mdp_lower",
    "new_lower_le_alpha",
    "hm_lower_le_alpha",
    "alpha_le_alpha_max",
    "index_lower_le_psi",
    "stabilization",
    "minimizer",
    "vsc_implication",
];

impl AuxiliaryFlags {
    pub fn values(&self) -> [bool; 10] {
        [
            self.window,
            self.mdp_upper,
            self.mdp_lower,
            self.new_lower_le_alpha,
            self.hm_lower_le_alpha,
            self.alpha_le_alpha_max,
            self.index_lower_le_psi,
            self.stabilization,
            self.minimizer,
            self.vsc_implication,
        ]
    }
}

/// A successfully solved noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SweepRecord<T> {
    pub delta: T,
    pub alpha: T,
    pub residual_norm: T,
    #[serde(rename = "J_reg")]
    pub j_reg: T,
    #[serde(rename = "J_true")]
    pub j_true: T,
    pub jdiff: T,
    pub bregman_fwd: T,
    pub bregman_rev: T,
    pub bregman_sym: T,
    /// `||phi_alpha - phi_true||`.
    pub total_error: T,
    /// `||T phi_alpha - T phi_true||`.
    pub image_error: T,
    /// `<p_true, phi_true - phi_alpha>`.
    pub pairing: T,
    pub objective_value: T,
    pub objective_at_truth: T,
    pub solver_iterations: usize,
    pub optimality_defect: T,
    pub mdp_evaluations: usize,
    pub monotonicity_violations: usize,
    pub bounds: AlphaBounds<T>,
    pub checklist: TheoremChecklist<T>,
    pub auxiliary: AuxiliaryFlags,
    pub phi_reg: Signal<T>,
}

impl<T: Scalar> SweepRecord<T> {
    pub fn quantities(&self) -> RecordQuantities<T> {
        RecordQuantities {
            delta: self.delta,
            alpha: self.alpha,
            j_reg: self.j_reg,
            j_true: self.j_true,
            image_error: self.image_error,
            bregman_fwd: Some(self.bregman_fwd),
            bregman_rev: Some(self.bregman_rev),
            bregman_sym: Some(self.bregman_sym),
            pairing: Some(self.pairing),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case", bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum SweepEntry<T> {
    Ok(Box<SweepRecord<T>>),
    Failed { delta: T, reason: String },
}

impl<T: Scalar> SweepEntry<T> {
    pub fn delta(&self) -> T {
        match self {
            SweepEntry::Ok(r) => r.delta,
            SweepEntry::Failed { delta, .. } => *delta,
        }
    }

    pub fn record(&self) -> Option<&SweepRecord<T>> {
        match self {
            SweepEntry::Ok(r) => Some(r),
            SweepEntry::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiSource {
    Fit,
    Override,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FittedPsi<T> {
    pub psi: IndexFunction<T>,
    pub source: PsiSource,
    pub target: PsiTarget,
    /// RMS log-space residual; absent for overrides.
    pub residual: Option<T>,
    pub raw_kappa: Option<T>,
    pub clamped: bool,
}

/// Log-log slopes against `delta`; a series with fewer than three positive
/// values has no fit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RateSummary<T> {
    pub bregman_fwd: Option<LogLogFit<T>>,
    pub bregman_rev: Option<LogLogFit<T>>,
    pub bregman_sym: Option<LogLogFit<T>>,
    /// J-difference clipped below at [`JDIFF_LOG_FLOOR`].
    pub jdiff: Option<LogLogFit<T>>,
    pub jdiff_abs: Option<LogLogFit<T>>,
    pub total_error: Option<LogLogFit<T>>,
    pub image_error: Option<LogLogFit<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagTally {
    pub name: String,
    pub passed: usize,
    pub total: usize,
}

impl FlagTally {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    /// Fraction of records on which the flag holds (1 for no records).
    pub fn pass_rate(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.passed as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub records_ok: usize,
    pub records_failed: usize,
    pub checklist: Vec<FlagTally>,
    pub auxiliary: Vec<FlagTally>,
}

impl Tallies {
    pub fn from_records<T: Scalar>(entries: &[SweepEntry<T>]) -> Self {
        let ok: Vec<&SweepRecord<T>> = entries.iter().filter_map(SweepEntry::record).collect();
        let tally = |name: &str, pass: &dyn Fn(&SweepRecord<T>) -> bool| FlagTally {
            name: name.to_string(),
            passed: ok.iter().filter(|r| pass(r)).count(),
            total: ok.len(),
        };
        let checklist = CHECKLIST_FLAGS
            .iter()
            .enumerate()
            .map(|(i, name)| tally(name, &|r| r.checklist.checks()[i].1.holds))
            .collect();
        let auxiliary = AUXILIARY_FLAGS
            .iter()
            .enumerate()
            .map(|(i, name)| tally(name, &|r| r.auxiliary.values()[i]))
            .collect();
        Tallies {
            records_ok: ok.len(),
            records_failed: entries.len() - ok.len(),
            checklist,
            auxiliary,
        }
    }

    pub fn checklist_all_passed(&self) -> bool {
        self.checklist.iter().all(FlagTally::all_passed)
    }

    pub fn get(&self, name: &str) -> Option<&FlagTally> {
        self.checklist.iter().chain(&self.auxiliary).find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SweepReport<T> {
    pub config: SweepConfig<T>,
    pub records: Vec<SweepEntry<T>>,
    pub fitted_psi: FittedPsi<T>,
    pub rate_summary: RateSummary<T>,
    pub tallies: Tallies,
}

impl<T: Scalar> SweepReport<T> {
    pub fn ok_records(&self) -> impl Iterator<Item = &SweepRecord<T>> {
        self.records.iter().filter_map(SweepEntry::record)
    }
}

/// Everything about one noise level that does not depend on the index
/// function.
struct Measurement<T> {
    delta: T,
    alpha: T,
    residual_norm: T,
    quantities: RecordQuantities<T>,
    total_error: T,
    objective_value: T,
    objective_at_truth: T,
    solver_iterations: usize,
    optimality_defect: T,
    mdp_evaluations: usize,
    monotonicity_violations: usize,
    window: bool,
    phi_reg: Signal<T>,
}

fn measure<T: Scalar>(config: &SweepConfig<T>, instance: &Instance<T>, k: usize, delta: T) -> Result<Measurement<T>> {
    let op = &config.operator;
    let penalty = config.penalty;
    let data = add_noise_exact_stream(&instance.f_true, config.noise_fill * delta, config.seed, k as u64)?;
    let radii = DiscrepancyRadii::new(config.tau_lower, config.tau_upper, delta)?;
    let mdp = select_alpha_mdp(op, &data, penalty, &radii, &config.search, &config.solver)?;
    let sol = &mdp.solution;
    let phi_true = &instance.phi_true;
    let p_true = penalty.subgradient(phi_true);
    let p_reg = penalty.subgradient(&sol.phi);
    let quantities = RecordQuantities::compute(op, &penalty, phi_true, &sol.phi, &p_true, &p_reg, delta, mdp.alpha)?;
    let problem = VariationalProblem::new(op, &data, penalty, mdp.alpha)?;
    Ok(Measurement {
        delta,
        alpha: mdp.alpha,
        residual_norm: sol.residual_norm,
        quantities,
        total_error: sol.phi.distance(phi_true),
        objective_value: sol.objective_value,
        objective_at_truth: problem.objective(phi_true)?,
        solver_iterations: sol.iterations,
        optimality_defect: sol.optimality_defect,
        mdp_evaluations: mdp.evaluations,
        monotonicity_violations: mdp.monotonicity_violations,
        window: radii.contains(sol.residual_norm),
        phi_reg: sol.phi.clone(),
    })
}

fn psi_points<T: Scalar>(target: PsiTarget, ms: &[&Measurement<T>]) -> Vec<(T, T)> {
    ms.iter()
        .map(|m| {
            let q = &m.quantities;
            let v = match target {
                PsiTarget::BregmanFwd => q.bregman_fwd,
                PsiTarget::BregmanRev => q.bregman_rev,
                PsiTarget::BregmanSym => q.bregman_sym,
                PsiTarget::VscPairing => q.pairing,
            };
            (m.delta, v.unwrap_or(T::zero()))
        })
        .collect()
}

fn resolve_psi<T: Scalar>(settings: &PsiSettings<T>, ms: &[&Measurement<T>]) -> Result<FittedPsi<T>> {
    if let Some(psi) = settings.override_psi {
        return Ok(FittedPsi {
            psi,
            source: PsiSource::Override,
            target: settings.target,
            residual: None,
            raw_kappa: None,
            clamped: false,
        });
    }
    let fit = fit_index_power(&psi_points(settings.target, ms))?;
    Ok(FittedPsi {
        psi: fit.psi,
        source: PsiSource::Fit,
        target: settings.target,
        residual: Some(fit.residual),
        raw_kappa: Some(fit.raw_kappa),
        clamped: fit.clamped,
    })
}

/// Index-function dependent part of a record.
pub struct Evaluation<T> {
    pub bounds: AlphaBounds<T>,
    pub checklist: TheoremChecklist<T>,
    pub auxiliary: AuxiliaryFlags,
}

/// Bounds, checklist and auxiliary flags for one record's quantities.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_record<T: Scalar>(
    config: &SweepConfig<T>,
    psi: &IndexFunction<T>,
    q: &RecordQuantities<T>,
    residual_norm: T,
    total_error: T,
    objective_value: T,
    objective_at_truth: T,
) -> Result<Evaluation<T>> {
    let radii = DiscrepancyRadii::new(config.tau_lower, config.tau_upper, q.delta)?;
    let constants = vsc_constants(&radii)?;
    let bounds = compute_alpha_bounds(&radii, constants.sigma_tilde, psi, q.j_true)?;
    let checklist = check_theorems(q, &constants, psi, &radii)?;
    let tol = T::lit(crate::mdp::CONSEQUENCE_TOLERANCE);
    let upper = (radii.tau_upper + T::one()) * radii.delta;
    let lower = (radii.tau_lower - T::one()) * radii.delta;
    let fwd = q.bregman_fwd.ok_or(Error::IncompleteRecord("bregman_fwd"))?;
    let auxiliary = AuxiliaryFlags {
        window: radii.contains(residual_norm),
        mdp_upper: q.image_error <= upper + tol,
        mdp_lower: lower <= q.image_error + tol,
        new_lower_le_alpha: bounds.new_lower <= q.alpha,
        hm_lower_le_alpha: bounds.hm_lower <= q.alpha,
        alpha_le_alpha_max: q.alpha <= bounds.alpha_max_for(config.alpha_max_variant),
        index_lower_le_psi: bounds.index_lower_at_delta <= psi.eval(q.delta)?,
        stabilization: total_error <= fwd,
        minimizer: objective_value <= objective_at_truth + T::lit(MINIMIZER_TOLERANCE),
        vsc_implication: !checklist.vsc_condition.holds || checklist.vsc_inequality.holds,
    };
    Ok(Evaluation {
        bounds,
        checklist,
        auxiliary,
    })
}

/// Runs the sweep. Noise levels are processed in parallel; each draws its
/// noise from its own generator stream, so the report does not depend on
/// scheduling.
pub fn run_sweep<T: Scalar>(config: &SweepConfig<T>) -> Result<SweepReport<T>> {
    let instance = make_instance(config)?;
    let deltas = config.deltas();
    let first: Vec<Result<Measurement<T>>> = deltas
        .par_iter()
        .enumerate()
        .map(|(k, &delta)| measure(config, &instance, k, delta))
        .collect();

    if let Some(Err(e)) = first.first().filter(|_| first.iter().all(|r| r.is_err())) {
        return Err(e.clone());
    }
    for (delta, r) in deltas.iter().zip(&first) {
        if let Err(e) = r {
            warn!("noise level {delta} failed: {e}");
        }
    }
    let ok: Vec<&Measurement<T>> = first.iter().filter_map(|r| r.as_ref().ok()).collect();
    let fitted_psi = resolve_psi(&config.psi, &ok)?;

    let mut records = Vec::with_capacity(first.len());
    for (delta, r) in deltas.iter().zip(first) {
        let entry = match r {
            Err(e) => SweepEntry::Failed {
                delta: *delta,
                reason: e.to_string(),
            },
            Ok(m) => {
                let q = m.quantities;
                let ev = evaluate_record(
                    config,
                    &fitted_psi.psi,
                    &q,
                    m.residual_norm,
                    m.total_error,
                    m.objective_value,
                    m.objective_at_truth,
                )?;
                SweepEntry::Ok(Box::new(SweepRecord {
                    delta: m.delta,
                    alpha: m.alpha,
                    residual_norm: m.residual_norm,
                    j_reg: q.j_reg,
                    j_true: q.j_true,
                    jdiff: q.jdiff(),
                    bregman_fwd: q.bregman_fwd.unwrap_or(T::nan()),
                    bregman_rev: q.bregman_rev.unwrap_or(T::nan()),
                    bregman_sym: q.bregman_sym.unwrap_or(T::nan()),
                    total_error: m.total_error,
                    image_error: q.image_error,
                    pairing: q.pairing.unwrap_or(T::nan()),
                    objective_value: m.objective_value,
                    objective_at_truth: m.objective_at_truth,
                    solver_iterations: m.solver_iterations,
                    optimality_defect: m.optimality_defect,
                    mdp_evaluations: m.mdp_evaluations,
                    monotonicity_violations: m.monotonicity_violations,
                    bounds: ev.bounds,
                    checklist: ev.checklist,
                    auxiliary: AuxiliaryFlags {
                        window: m.window,
                        ..ev.auxiliary
                    },
                    phi_reg: m.phi_reg,
                }))
            }
        };
        records.push(entry);
    }

    let ok_records: Vec<&SweepRecord<T>> = records.iter().filter_map(SweepEntry::record).collect();
    let rate_summary = fit_rates(&ok_records).unwrap_or_else(|e| {
        warn!("rate fit skipped: {e}");
        RateSummary::default()
    });
    let tallies = Tallies::from_records(&records);
    Ok(SweepReport {
        config: config.clone(),
        records,
        fitted_psi,
        rate_summary,
        tallies,
    })
}

/// Log-log slopes of the error quantities against `delta`.
pub fn fit_rates<T: Scalar>(records: &[&SweepRecord<T>]) -> Result<RateSummary<T>> {
    if records.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: records.len(),
        });
    }
    let deltas: Vec<T> = records.iter().map(|r| r.delta).collect();
    if deltas.iter().all(|d| *d == deltas[0]) {
        return Err(Error::InsufficientData {
            needed: 3,
            found: 1,
        });
    }
    let series = |f: &dyn Fn(&SweepRecord<T>) -> T| -> Option<LogLogFit<T>> {
        let pts: Vec<(T, T)> = records.iter().map(|r| (r.delta, f(r))).collect();
        fit_loglog(&pts).ok()
    };
    let floor = T::lit(JDIFF_LOG_FLOOR);
    Ok(RateSummary {
        bregman_fwd: series(&|r| r.bregman_fwd),
        bregman_rev: series(&|r| r.bregman_rev),
        bregman_sym: series(&|r| r.bregman_sym),
        jdiff: series(&|r| r.jdiff.max(floor)),
        jdiff_abs: series(&|r| r.jdiff.abs()),
        total_error: series(&|r| r.total_error),
        image_error: series(&|r| r.image_error),
    })
}

/// Result of re-deriving a stored report's checklist.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub tallies: Tallies,
    /// Records whose stored flags differ from the recomputed ones.
    pub mismatched: Vec<usize>,
}

/// Recomputes every record's quantities from the stored regularized
/// solution and the instance implied by the config, then re-runs the
/// checklist with the stored index function.
pub fn verify_report<T: Scalar>(report: &SweepReport<T>) -> Result<VerifyOutcome> {
    let config = &report.config;
    let instance = make_instance(config)?;
    let penalty = config.penalty;
    let psi = report.fitted_psi.psi;
    let p_true = penalty.subgradient(&instance.phi_true);
    let mut mismatched = Vec::new();
    let mut entries = Vec::with_capacity(report.records.len());
    for (i, entry) in report.records.iter().enumerate() {
        let Some(r) = entry.record() else {
            entries.push(entry.clone());
            continue;
        };
        if r.phi_reg.len() != instance.phi_true.len() {
            return Err(Error::DimensionMismatch {
                expected: instance.phi_true.len(),
                found: r.phi_reg.len(),
            });
        }
        let p_reg = penalty.subgradient(&r.phi_reg);
        let q = RecordQuantities::compute(
            &config.operator,
            &penalty,
            &instance.phi_true,
            &r.phi_reg,
            &p_true,
            &p_reg,
            r.delta,
            r.alpha,
        )?;
        let ev = evaluate_record(
            config,
            &psi,
            &q,
            r.residual_norm,
            r.phi_reg.distance(&instance.phi_true),
            r.objective_value,
            r.objective_at_truth,
        )?;
        let stored: Vec<bool> = r.checklist.checks().iter().map(|(_, c)| c.holds).collect();
        let fresh: Vec<bool> = ev.checklist.checks().iter().map(|(_, c)| c.holds).collect();
        if stored != fresh {
            mismatched.push(i);
        }
        let mut rec = r.clone();
        rec.checklist = ev.checklist;
        rec.bounds = ev.bounds;
        rec.auxiliary = AuxiliaryFlags {
            window: r.auxiliary.window,
            ..ev.auxiliary
        };
        entries.push(SweepEntry::Ok(Box::new(rec)));
    }
    Ok(VerifyOutcome {
        tallies: Tallies::from_records(&entries),
        mismatched,
    })
}
