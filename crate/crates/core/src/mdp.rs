//! Morozov's discrepancy principle and the regularization-parameter bounds
//! that accompany it.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{LinearMap, Signal};
use crate::penalties::Penalty;
use crate::scalar::Scalar;
use crate::solver::{minimize_tikhonov, RegularizedSolution, SolverSettings, VariationalProblem};
use crate::vsc::IndexFunction;

/// Tolerance used by [`mdp_consequence_check`].
pub const CONSEQUENCE_TOLERANCE: f64 = 1e-10;

/// Discrepancy window radii and the noise level they scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DiscrepancyRadii<T> {
    pub tau_lower: T,
    pub tau_upper: T,
    pub delta: T,
}

impl<T: Scalar> DiscrepancyRadii<T> {
    pub fn new(tau_lower: T, tau_upper: T, delta: T) -> Result<Self> {
        validate_taus(tau_lower, tau_upper)?;
        if !(delta.is_finite() && delta > T::zero()) {
            return Err(Error::InvalidNoiseLevel(delta.to_f64_lossy()));
        }
        Ok(Self {
            tau_lower,
            tau_upper,
            delta,
        })
    }

    pub fn window(&self) -> (T, T) {
        (self.tau_lower * self.delta, self.tau_upper * self.delta)
    }

    pub fn contains(&self, residual: T) -> bool {
        let (lo, hi) = self.window();
        lo <= residual && residual <= hi
    }
}

/// Checks `1 < tau_lower <= tau_upper < inf`.
pub fn validate_taus<T: Scalar>(tau_lower: T, tau_upper: T) -> Result<()> {
    if tau_lower.is_finite() && tau_upper.is_finite() && tau_lower > T::one() && tau_lower <= tau_upper {
        Ok(())
    } else {
        Err(Error::InvalidRadii {
            tau_lower: tau_lower.to_f64_lossy(),
            tau_upper: tau_upper.to_f64_lossy(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SearchSettings<T> {
    /// First probe; `None` starts at `delta^2`.
    pub alpha0: Option<T>,
    pub expansion: T,
    /// Bisection stops once `(hi - lo) / lo` falls to this value.
    pub bracket_tol: T,
    pub max_probes: usize,
}

impl<T: Scalar> Default for SearchSettings<T> {
    fn default() -> Self {
        Self {
            alpha0: None,
            expansion: T::lit(10.0),
            bracket_tol: T::lit(1e-3),
            max_probes: 60,
        }
    }
}

impl<T: Scalar> SearchSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha0 {
            if !(a.is_finite() && a > T::zero()) {
                return Err(Error::InvalidParameter(format!("alpha0 must be positive, got {a}")));
            }
        }
        if !(self.expansion.is_finite() && self.expansion > T::one()) {
            return Err(Error::InvalidParameter("expansion must exceed 1".into()));
        }
        if !(self.bracket_tol.is_finite() && self.bracket_tol > T::zero()) {
            return Err(Error::InvalidParameter("bracket_tol must be positive".into()));
        }
        if self.max_probes < 2 {
            return Err(Error::InvalidParameter("max_probes must be at least 2".into()));
        }
        Ok(())
    }
}

/// One evaluated candidate of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Probe<T> {
    pub alpha: T,
    pub residual_norm: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct MdpResult<T> {
    pub alpha: T,
    pub solution: RegularizedSolution<T>,
    pub bracket: (T, T),
    pub evaluations: usize,
    pub probes: Vec<Probe<T>>,
    /// Adjacent probe pairs (sorted by alpha) whose residual drops by more
    /// than `10 * tol`.
    pub monotonicity_violations: usize,
    /// False when the bracket collapsed without a probe inside the window;
    /// `alpha` is then the probe closest to it.
    pub window_hit: bool,
}

struct Search<'p, 'a, T> {
    base: VariationalProblem<'a, T>,
    radii: &'p DiscrepancyRadii<T>,
    solver: &'p SolverSettings<T>,
    probes: Vec<Probe<T>>,
    best: Option<(T, RegularizedSolution<T>)>,
    last_phi: Option<Signal<T>>,
}

impl<T: Scalar> Search<'_, '_, T> {
    fn distance_to_window(&self, r: T) -> T {
        let (lo, hi) = self.radii.window();
        if r < lo {
            lo - r
        } else if r > hi {
            r - hi
        } else {
            T::zero()
        }
    }

    fn probe(&mut self, alpha: T) -> Result<T> {
        let problem = self.base.with_alpha(alpha)?;
        let sol = minimize_tikhonov(&problem, self.solver, self.last_phi.as_ref())?.into_converged(alpha)?;
        let r = sol.residual_norm;
        debug!("mdp probe alpha={:e} residual={:e}", alpha.to_f64_lossy(), r.to_f64_lossy());
        self.probes.push(Probe { alpha, residual_norm: r });
        self.last_phi = Some(sol.phi.clone());
        let better = match &self.best {
            None => true,
            Some((_, b)) => self.distance_to_window(r) < self.distance_to_window(b.residual_norm),
        };
        if better {
            self.best = Some((alpha, sol));
        }
        Ok(r)
    }

    fn finish(self, bracket: (T, T), window_hit: bool) -> MdpResult<T> {
        let mut sorted = self.probes.clone();
        sorted.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).expect("finite alpha"));
        let slack = T::lit(10.0) * self.solver.tol;
        let violations = sorted
            .windows(2)
            .filter(|w| w[1].residual_norm < w[0].residual_norm - slack)
            .count();
        if violations > 0 {
            warn!("discrepancy not monotone in alpha at {violations} probe pair(s)");
        }
        let (alpha, solution) = self.best.expect("at least one probe");
        MdpResult {
            alpha,
            solution,
            bracket,
            evaluations: self.probes.len(),
            probes: self.probes,
            monotonicity_violations: violations,
            window_hit,
        }
    }

    fn no_admissible(&self) -> Error {
        let (lo, hi) = self.radii.window();
        let smallest = self
            .probes
            .iter()
            .min_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap())
            .copied();
        let largest = self
            .probes
            .iter()
            .max_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap())
            .copied();
        let f = |p: Option<Probe<T>>| p.map_or((f64::NAN, f64::NAN), |p| (p.alpha.to_f64_lossy(), p.residual_norm.to_f64_lossy()));
        let (alpha_small, residual_small) = f(smallest);
        let (alpha_large, residual_large) = f(largest);
        Error::NoAdmissibleAlpha {
            window_low: lo.to_f64_lossy(),
            window_high: hi.to_f64_lossy(),
            alpha_small,
            residual_small,
            alpha_large,
            residual_large,
        }
    }
}

/// Selects `alpha` whose regularized residual lies in
/// `[tau_lower delta, tau_upper delta]`.
///
/// The search expands geometrically from `alpha0` until the window is
/// bracketed, then bisects in `log alpha`. Every probe is warm-started from
/// the previous one.
pub fn select_alpha_mdp<T: Scalar>(
    op: &LinearMap<T>,
    data: &Signal<T>,
    penalty: Penalty<T>,
    radii: &DiscrepancyRadii<T>,
    search: &SearchSettings<T>,
    solver: &SolverSettings<T>,
) -> Result<MdpResult<T>> {
    search.validate()?;
    let data_norm = data.norm();
    let (lo, hi) = radii.window();
    if radii.delta >= data_norm {
        return Err(Error::NoAdmissibleAlpha {
            window_low: lo.to_f64_lossy(),
            window_high: hi.to_f64_lossy(),
            alpha_small: f64::NAN,
            residual_small: f64::NAN,
            alpha_large: f64::INFINITY,
            residual_large: data_norm.to_f64_lossy(),
        });
    }
    let alpha0 = search.alpha0.unwrap_or(radii.delta * radii.delta);
    let mut s = Search {
        base: VariationalProblem::new(op, data, penalty, alpha0)?,
        radii,
        solver,
        probes: Vec::new(),
        best: None,
        last_phi: None,
    };

    let mut alpha = alpha0;
    let mut r = s.probe(alpha)?;
    if radii.contains(r) {
        return Ok(s.finish((alpha, alpha), true));
    }
    // residual grows with alpha: too small a residual means alpha must grow
    let grow = r < lo;
    let (mut a_lo, mut a_hi) = (alpha, alpha);
    loop {
        if s.probes.len() >= search.max_probes {
            return Err(s.no_admissible());
        }
        alpha = if grow { alpha * search.expansion } else { alpha / search.expansion };
        if !(alpha.is_finite() && alpha > T::zero()) {
            return Err(s.no_admissible());
        }
        r = s.probe(alpha)?;
        if radii.contains(r) {
            return Ok(s.finish((alpha, alpha), true));
        }
        if grow && r > hi {
            a_hi = alpha;
            break;
        }
        if !grow && r < lo {
            a_lo = alpha;
            break;
        }
        if grow {
            a_lo = alpha;
        } else {
            a_hi = alpha;
        }
    }

    while (a_hi - a_lo) / a_lo > search.bracket_tol && s.probes.len() < search.max_probes {
        let mid = (a_lo * a_hi).sqrt();
        r = s.probe(mid)?;
        if radii.contains(r) {
            return Ok(s.finish((a_lo, a_hi), true));
        }
        if r < lo {
            a_lo = mid;
        } else {
            a_hi = mid;
        }
    }
    if lo < hi {
        warn!("discrepancy window [{:e}, {:e}] not hit; returning closest probe", lo.to_f64_lossy(), hi.to_f64_lossy());
    }
    Ok(s.finish((a_lo, a_hi), false))
}

/// Outcome of the two triangle-inequality consequences of the
/// discrepancy principle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ConsequenceCheck<T> {
    pub upper_ok: bool,
    pub lower_ok: bool,
    /// `||T phi_alpha - T phi_true||`.
    pub image_error: T,
    /// `(tau_lower - 1) delta`.
    pub lower_bound: T,
    /// `(tau_upper + 1) delta`.
    pub upper_bound: T,
}

pub fn mdp_consequence_check<T: Scalar>(
    result: &MdpResult<T>,
    op: &LinearMap<T>,
    phi_true: &Signal<T>,
    radii: &DiscrepancyRadii<T>,
) -> Result<ConsequenceCheck<T>> {
    consequence_check(&result.solution.phi, op, phi_true, radii)
}

/// [`mdp_consequence_check`] for a bare regularized solution.
pub fn consequence_check<T: Scalar>(
    phi_reg: &Signal<T>,
    op: &LinearMap<T>,
    phi_true: &Signal<T>,
    radii: &DiscrepancyRadii<T>,
) -> Result<ConsequenceCheck<T>> {
    let image_error = op.apply(&phi_reg.sub(phi_true))?.norm();
    let tol = T::lit(CONSEQUENCE_TOLERANCE);
    let lower_bound = (radii.tau_lower - T::one()) * radii.delta;
    let upper_bound = (radii.tau_upper + T::one()) * radii.delta;
    Ok(ConsequenceCheck {
        upper_ok: image_error <= upper_bound + tol,
        lower_ok: lower_bound <= image_error + tol,
        image_error,
        lower_bound,
        upper_bound,
    })
}

/// Placement of `(tau_lower - 1)` in the upper bound for `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMaxVariant {
    /// `(8/sigma (tau_lower - 1) Psi(delta) + J_true)^-1`.
    #[default]
    Printed,
    /// `(8/sigma (tau_lower - 1)^-1 Psi(delta) + J_true)^-1`.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct AlphaBounds<T> {
    /// `1/4 (tau_lower^2 - 1)/(tau_lower^2 + 1) delta^2 / Psi((tau_lower - 1) delta)`.
    pub hm_lower: T,
    /// `(sigma/4)(tau_lower - 1) delta^2 / Psi(delta)`.
    pub new_lower: T,
    pub alpha_max: T,
    pub alpha_max_corrected: T,
    /// `(sigma/4) J_true delta^2`, compared against `Psi(delta)`.
    pub index_lower_at_delta: T,
}

impl<T: Scalar> AlphaBounds<T> {
    pub fn alpha_max_for(&self, variant: AlphaMaxVariant) -> T {
        match variant {
            AlphaMaxVariant::Printed => self.alpha_max,
            AlphaMaxVariant::Corrected => self.alpha_max_corrected,
        }
    }
}

pub fn compute_alpha_bounds<T: Scalar>(
    radii: &DiscrepancyRadii<T>,
    sigma: T,
    psi: &IndexFunction<T>,
    j_true: T,
) -> Result<AlphaBounds<T>> {
    if !(sigma > T::zero() && sigma <= T::one()) {
        return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1], got {sigma}")));
    }
    if !(j_true.is_finite() && j_true >= T::zero()) {
        return Err(Error::InvalidParameter(format!("J(phi_true) must be non-negative, got {j_true}")));
    }
    let delta = radii.delta;
    let tl = radii.tau_lower;
    let one = T::one();
    let four = T::lit(4.0);
    let eight = T::lit(8.0);
    let psi_delta = psi.eval(delta)?;
    let psi_shifted = psi.eval((tl - one) * delta)?;
    if psi_delta <= T::zero() || psi_shifted <= T::zero() {
        return Err(Error::InvalidIndexFunction("index function vanishes at a positive argument".into()));
    }
    let d2 = delta * delta;
    let tl2 = tl * tl;
    Ok(AlphaBounds {
        hm_lower: (tl2 - one) / (tl2 + one) * d2 / (four * psi_shifted),
        new_lower: sigma / four * (tl - one) * d2 / psi_delta,
        alpha_max: one / (eight / sigma * (tl - one) * psi_delta + j_true),
        alpha_max_corrected: one / (eight / sigma / (tl - one) * psi_delta + j_true),
        index_lower_at_delta: sigma / four * j_true * d2,
    })
}
