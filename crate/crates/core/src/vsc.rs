//! Index functions, the source-condition coefficients derived from the
//! discrepancy radii, and the per-record inequality checklist.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{LinearMap, Signal};
use crate::mdp::{validate_taus, DiscrepancyRadii};
use crate::penalties::{bregman, bregman_symmetric, Penalty, Subgradient};
use crate::scalar::Scalar;

/// Slack below which a checklist inequality counts as violated (negated).
pub const CHECK_TOLERANCE: f64 = 1e-8;
/// Tolerance for [`check_vsc_condition`].
pub const VSC_CONDITION_TOLERANCE: f64 = 1e-10;
/// Exponent floor used when a fit produces a non-positive exponent.
pub const KAPPA_FLOOR: f64 = 1e-3;

/// `sigma_tilde = (tau_lower - 1)/tau_upper` and `C = tau_upper/(tau_lower - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct VscConstants<T> {
    pub sigma_tilde: T,
    #[serde(rename = "C")]
    pub c: T,
}

pub fn vsc_constants<T: Scalar>(radii: &DiscrepancyRadii<T>) -> Result<VscConstants<T>> {
    vsc_constants_from_taus(radii.tau_lower, radii.tau_upper)
}

pub fn vsc_constants_from_taus<T: Scalar>(tau_lower: T, tau_upper: T) -> Result<VscConstants<T>> {
    validate_taus(tau_lower, tau_upper)?;
    let gap = tau_lower - T::one();
    Ok(VscConstants {
        sigma_tilde: gap / tau_upper,
        c: tau_upper / gap,
    })
}

/// Concave power index function `Psi(t) = c t^kappa`, `kappa in (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "PowerRepr<T>",
    into = "PowerRepr<T>",
    bound(serialize = "T: Scalar", deserialize = "T: Scalar")
)]
pub struct IndexFunction<T> {
    c: T,
    kappa: T,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerRepr<T> {
    c: T,
    kappa: T,
}

impl<T: Scalar> TryFrom<PowerRepr<T>> for IndexFunction<T> {
    type Error = Error;

    fn try_from(r: PowerRepr<T>) -> Result<Self> {
        IndexFunction::power(r.c, r.kappa)
    }
}

impl<T: Scalar> From<IndexFunction<T>> for PowerRepr<T> {
    fn from(p: IndexFunction<T>) -> Self {
        PowerRepr { c: p.c, kappa: p.kappa }
    }
}

impl<T: Scalar> IndexFunction<T> {
    pub fn power(c: T, kappa: T) -> Result<Self> {
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::InvalidIndexFunction(format!("coefficient must be positive, got {c}")));
        }
        if !(kappa > T::zero() && kappa <= T::one()) {
            return Err(Error::InvalidIndexFunction(format!("exponent must lie in (0, 1], got {kappa}")));
        }
        Ok(Self { c, kappa })
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn eval(&self, t: T) -> Result<T> {
        if t < T::zero() || t.is_nan() {
            return Err(Error::InvalidParameter(format!("index function argument must be >= 0, got {t}")));
        }
        if t == T::zero() {
            return Ok(T::zero());
        }
        Ok(self.c * t.powf(self.kappa))
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct LogLogFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square residual in log space.
    pub residual: T,
    pub points: usize,
}

/// Fits `log y = intercept + slope log x` over points with `x, y > 0`;
/// other points are skipped.
pub fn fit_loglog<T: Scalar>(points: &[(T, T)]) -> Result<LogLogFit<T>> {
    let logs: Vec<(T, T)> = points
        .iter()
        .filter(|(x, y)| *x > T::zero() && *y > T::zero() && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: logs.len(),
        });
    }
    let n = T::from_usize_lossy(logs.len());
    let mx = logs.iter().map(|p| p.0).sum::<T>() / n;
    let my = logs.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let scale = logs.iter().map(|p| p.0.abs()).fold(T::one(), T::max);
    if sxx <= T::epsilon() * scale * scale * n {
        return Err(Error::InsufficientData {
            needed: 3,
            found: 1,
        });
    }
    let sxy: T = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(LogLogFit {
        slope,
        intercept,
        residual: rms(&logs, slope, intercept),
        points: logs.len(),
    })
}

fn rms<T: Scalar>(logs: &[(T, T)], slope: T, intercept: T) -> T {
    let ss: T = logs
        .iter()
        .map(|(x, y)| {
            let e = *y - intercept - slope * *x;
            e * e
        })
        .sum();
    (ss / T::from_usize_lossy(logs.len())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct IndexFit<T> {
    pub psi: IndexFunction<T>,
    /// RMS log-space residual of the returned `psi` on the data.
    pub residual: T,
    pub raw_kappa: T,
    pub clamped: bool,
}

/// Fits `Psi(delta) = c delta^kappa` to `(delta, value)` pairs.
///
/// A fitted `kappa > 1` is clamped to 1 and `c` refitted with the exponent
/// fixed; `kappa <= 0` is clamped to [`KAPPA_FLOOR`]. Both log a warning.
pub fn fit_index_power<T: Scalar>(points: &[(T, T)]) -> Result<IndexFit<T>> {
    let fit = fit_loglog(points)?;
    let raw_kappa = fit.slope;
    let kappa = if raw_kappa > T::one() {
        T::one()
    } else if raw_kappa <= T::zero() {
        T::lit(KAPPA_FLOOR)
    } else {
        raw_kappa
    };
    let clamped = kappa != raw_kappa;
    let (log_c, residual) = if clamped {
        warn!("fitted index exponent {raw_kappa} outside (0, 1]; clamped to {kappa}");
        let logs: Vec<(T, T)> = points
            .iter()
            .filter(|(x, y)| *x > T::zero() && *y > T::zero() && x.is_finite() && y.is_finite())
            .map(|(x, y)| (x.ln(), y.ln()))
            .collect();
        let n = T::from_usize_lossy(logs.len());
        let log_c = logs.iter().map(|(x, y)| *y - kappa * *x).sum::<T>() / n;
        (log_c, rms(&logs, kappa, log_c))
    } else {
        (fit.intercept, fit.residual)
    };
    Ok(IndexFit {
        psi: IndexFunction::power(log_c.exp(), kappa)?,
        residual,
        raw_kappa,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct VscConditionCheck<T> {
    pub holds: bool,
    pub lhs: T,
    pub rhs: T,
}

/// `<p_true, phi_true - phi_reg> <= C Psi(delta)`.
pub fn check_vsc_condition<T: Scalar>(
    p_true: &Subgradient<T>,
    phi_true: &Signal<T>,
    phi_reg: &Signal<T>,
    constants: &VscConstants<T>,
    psi: &IndexFunction<T>,
    delta: T,
) -> Result<VscConditionCheck<T>> {
    let lhs = p_true.values.dot(&phi_true.sub(phi_reg));
    let rhs = constants.c * psi.eval(delta)?;
    Ok(VscConditionCheck {
        holds: lhs <= rhs + T::lit(VSC_CONDITION_TOLERANCE),
        lhs,
        rhs,
    })
}

/// Scalars a checklist is evaluated on. The subgradient-dependent entries
/// are optional so that partially filled records can be detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RecordQuantities<T> {
    pub delta: T,
    pub alpha: T,
    pub j_reg: T,
    pub j_true: T,
    /// `||T phi_reg - T phi_true||`.
    pub image_error: T,
    /// `D(phi_reg, phi_true)` with the subgradient at `phi_true`.
    pub bregman_fwd: Option<T>,
    /// `D(phi_true, phi_reg)` with the subgradient at `phi_reg`.
    pub bregman_rev: Option<T>,
    pub bregman_sym: Option<T>,
    /// `<p_true, phi_true - phi_reg>`.
    pub pairing: Option<T>,
}

impl<T: Scalar> RecordQuantities<T> {
    /// Evaluates every quantity from the two signals and their subgradients.
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        op: &LinearMap<T>,
        penalty: &Penalty<T>,
        phi_true: &Signal<T>,
        phi_reg: &Signal<T>,
        p_true: &Subgradient<T>,
        p_reg: &Subgradient<T>,
        delta: T,
        alpha: T,
    ) -> Result<Self> {
        let image_error = op.apply(&phi_reg.sub(phi_true))?.norm();
        Ok(Self {
            delta,
            alpha,
            j_reg: penalty.eval(phi_reg),
            j_true: penalty.eval(phi_true),
            image_error,
            bregman_fwd: Some(bregman(penalty, phi_reg, phi_true, p_true)),
            bregman_rev: Some(bregman(penalty, phi_true, phi_reg, p_reg)),
            bregman_sym: Some(bregman_symmetric(phi_reg, phi_true, p_reg, p_true)),
            pairing: Some(p_true.values.dot(&phi_true.sub(phi_reg))),
        })
    }

    pub fn jdiff(&self) -> T {
        self.j_reg - self.j_true
    }
}

/// One inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Check<T> {
    pub lhs: T,
    pub rhs: T,
    pub slack: T,
    pub holds: bool,
}

impl<T: Scalar> Check<T> {
    pub fn new(lhs: T, rhs: T) -> Self {
        let slack = rhs - lhs;
        Self {
            lhs,
            rhs,
            slack,
            holds: slack >= -T::lit(CHECK_TOLERANCE),
        }
    }
}

pub const CHECKLIST_FLAGS: [&str; 8] = [
    "vsc_condition",
    "vsc_inequality",
    "jdiff_psi",
    "jdiff_delta2",
    "bregman_forward",
    "bregman_reverse",
    "bregman_symmetric",
    "reverse_vs_index",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TheoremChecklist<T> {
    /// `<p_true, phi_true - phi_reg> <= C Psi(delta)`.
    pub vsc_condition: Check<T>,
    /// `sigma_tilde D_fwd <= jdiff + Psi(||T phi_reg - T phi_true||)`.
    pub vsc_inequality: Check<T>,
    /// `jdiff <= (2/sigma_tilde)(tau_lower - 1)^-1 Psi(delta)`.
    pub jdiff_psi: Check<T>,
    /// `jdiff <= (1 + tau_upper)^2 delta^2 / alpha`.
    pub jdiff_delta2: Check<T>,
    pub bregman_forward: Check<T>,
    pub bregman_reverse: Check<T>,
    pub bregman_symmetric: Check<T>,
    /// `D_rev <= Psi(delta)`.
    pub reverse_vs_index: Check<T>,
    /// Slack of `vsc_inequality` with `sigma_tilde / 2` on the left.
    pub vsc_inequality_half_sigma_slack: T,
}

impl<T: Scalar> TheoremChecklist<T> {
    pub fn checks(&self) -> [(&'static str, &Check<T>); 8] {
        [
            (CHECKLIST_FLAGS[0], &self.vsc_condition),
            (CHECKLIST_FLAGS[1], &self.vsc_inequality),
            (CHECKLIST_FLAGS[2], &self.jdiff_psi),
            (CHECKLIST_FLAGS[3], &self.jdiff_delta2),
            (CHECKLIST_FLAGS[4], &self.bregman_forward),
            (CHECKLIST_FLAGS[5], &self.bregman_reverse),
            (CHECKLIST_FLAGS[6], &self.bregman_symmetric),
            (CHECKLIST_FLAGS[7], &self.reverse_vs_index),
        ]
    }

    pub fn all_hold(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.holds)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks().iter().filter(|(_, c)| !c.holds).map(|(n, _)| *n).collect()
    }
}

/// Evaluates every inequality of the checklist on one record.
pub fn check_theorems<T: Scalar>(
    record: &RecordQuantities<T>,
    constants: &VscConstants<T>,
    psi: &IndexFunction<T>,
    radii: &DiscrepancyRadii<T>,
) -> Result<TheoremChecklist<T>> {
    let fwd = record.bregman_fwd.ok_or(Error::IncompleteRecord("bregman_fwd"))?;
    let rev = record.bregman_rev.ok_or(Error::IncompleteRecord("bregman_rev"))?;
    let sym = record.bregman_sym.ok_or(Error::IncompleteRecord("bregman_sym"))?;
    let pairing = record.pairing.ok_or(Error::IncompleteRecord("pairing"))?;
    if record.alpha.is_nan() || record.alpha <= T::zero() {
        return Err(Error::InvalidParameter(format!("record alpha must be positive, got {}", record.alpha)));
    }

    let one = T::one();
    let two = T::lit(2.0);
    let st = constants.sigma_tilde;
    let gap = radii.tau_lower - one;
    let tu = radii.tau_upper;
    let delta = record.delta;
    let psi_delta = psi.eval(delta)?;
    let psi_image = psi.eval(record.image_error)?;
    let jdiff = record.jdiff();

    let fwd_coeff = two / st / gap + (tu + one);
    let rev_coeff = (tu + one) + T::lit(4.0) / st * tu * (tu + one) / gap;
    Ok(TheoremChecklist {
        vsc_condition: Check::new(pairing, constants.c * psi_delta),
        vsc_inequality: Check::new(st * fwd, jdiff + psi_image),
        jdiff_psi: Check::new(jdiff, two / st / gap * psi_delta),
        jdiff_delta2: Check::new(jdiff, (one + tu) * (one + tu) * delta * delta / record.alpha),
        bregman_forward: Check::new(fwd, fwd_coeff * psi_delta),
        bregman_reverse: Check::new(rev, rev_coeff * psi_delta),
        bregman_symmetric: Check::new(sym, (fwd_coeff + rev_coeff) * psi_delta),
        reverse_vs_index: Check::new(rev, psi_delta),
        vsc_inequality_half_sigma_slack: jdiff + psi_image - st / two * fwd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants_examples() {
        let k = vsc_constants_from_taus(2.0, 4.0).unwrap();
        assert_eq!(k.sigma_tilde, 0.25);
        assert_eq!(k.c, 4.0);
        let single = vsc_constants_from_taus(2.0, 2.0).unwrap();
        assert_eq!(single.sigma_tilde, 0.5);
        assert!(vsc_constants_from_taus(1.0, 2.0).is_err());
        assert!(vsc_constants_from_taus(0.5, 2.0).is_err());
    }

    #[test]
    fn index_eval_examples() {
        let sqrt = IndexFunction::power(1.0, 0.5).unwrap();
        assert_abs_diff_eq!(sqrt.eval(0.04).unwrap(), 0.2, epsilon = 1e-15);
        assert_eq!(sqrt.eval(0.0).unwrap(), 0.0);
        let lin = IndexFunction::power(0.1, 1.0).unwrap();
        assert_abs_diff_eq!(lin.eval(0.3).unwrap(), 0.03, epsilon = 1e-15);
        assert!(lin.eval(-1.0).is_err());
        assert!(IndexFunction::power(1.0, 1.5).is_err());
        assert!(IndexFunction::power(1.0, 0.0).is_err());
        assert!(IndexFunction::power(0.0, 0.5).is_err());
    }

    #[test]
    fn fit_examples() {
        let pts = [(0.1, 0.0316228), (0.01, 0.01), (0.001, 0.00316228)];
        let fit = fit_index_power(&pts).unwrap();
        assert!(!fit.clamped);
        assert_abs_diff_eq!(fit.psi.c(), 0.1, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.psi.kappa(), 0.5, epsilon = 1e-6);

        let lin: Vec<(f64, f64)> = [0.3, 0.1, 0.02, 0.004].iter().map(|&d| (d, d)).collect();
        let fit = fit_index_power(&lin).unwrap();
        assert_abs_diff_eq!(fit.psi.c(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.psi.kappa(), 1.0, epsilon = 1e-12);
        assert!(!fit.clamped);

        let superlinear: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025].iter().map(|&d: &f64| (d, d.powf(1.5))).collect();
        let fit = fit_index_power(&superlinear).unwrap();
        assert!(fit.clamped);
        assert_eq!(fit.psi.kappa(), 1.0);
        assert_abs_diff_eq!(fit.raw_kappa, 1.5, epsilon = 1e-12);
        // refit intercept is the mean of log(v / delta)
        let mean: f64 = superlinear.iter().map(|(d, v)| (v / d).ln()).sum::<f64>() / 4.0;
        assert_abs_diff_eq!(fit.psi.c(), mean.exp(), epsilon = 1e-14);
    }

    #[test]
    fn decreasing_data_clamps_to_floor() {
        let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&d: &f64| (d, 1.0 / d)).collect();
        let fit = fit_index_power(&pts).unwrap();
        assert!(fit.clamped);
        assert_eq!(fit.psi.kappa(), KAPPA_FLOOR);
    }

    #[test]
    fn fit_rejects_degenerate_data() {
        assert!(matches!(
            fit_index_power(&[(0.1, 0.1), (0.05, 0.05)]),
            Err(Error::InsufficientData { found: 2, .. })
        ));
        assert!(matches!(
            fit_index_power(&[(0.1, 0.1), (0.05, 0.0), (0.02, -1.0), (0.01, 0.01)]),
            Err(Error::InsufficientData { found: 2, .. })
        ));
        assert!(fit_loglog(&[(0.1, 0.1), (0.1, 0.2), (0.1, 0.3)]).is_err());
    }

    fn sig(v: &[f64]) -> Signal<f64> {
        Signal::new(v.to_vec()).unwrap()
    }

    #[test]
    fn vsc_condition_examples() {
        let k = VscConstants { sigma_tilde: 0.25, c: 4.0 };
        let p = Subgradient::user_supplied(sig(&[1.0, 0.0]));
        let truth = sig(&[1.0, 0.0]);
        let reg = sig(&[0.5, 0.0]);
        let psi_02 = IndexFunction::power(2.0, 1.0).unwrap();
        let psi_01 = IndexFunction::power(1.0, 1.0).unwrap();
        let same = check_vsc_condition(&p, &truth, &truth, &k, &psi_02, 0.1).unwrap();
        assert!(same.holds && same.lhs == 0.0);
        let ok = check_vsc_condition(&p, &truth, &reg, &k, &psi_02, 0.1).unwrap();
        assert!(ok.holds);
        assert_abs_diff_eq!(ok.lhs, 0.5);
        assert_abs_diff_eq!(ok.rhs, 0.8, epsilon = 1e-15);
        let bad = check_vsc_condition(&p, &truth, &reg, &k, &psi_01, 0.1).unwrap();
        assert!(!bad.holds);
        assert_abs_diff_eq!(bad.rhs, 0.4, epsilon = 1e-15);
    }

    fn radii(tl: f64, tu: f64, d: f64) -> DiscrepancyRadii<f64> {
        DiscrepancyRadii::new(tl, tu, d).unwrap()
    }

    #[test]
    fn identical_signals_pass_everything() {
        let op = LinearMap::identity(3);
        let phi = sig(&[0.0, 1.0, 0.5]);
        for penalty in [Penalty::Quadratic, Penalty::L1, Penalty::smoothed_tv(0.01).unwrap()] {
            let p = penalty.subgradient(&phi);
            let q = RecordQuantities::compute(&op, &penalty, &phi, &phi, &p, &p, 0.1, 0.05).unwrap();
            let r = radii(2.0, 4.0, 0.1);
            let k = vsc_constants(&r).unwrap();
            let psi = IndexFunction::power(1.0, 1.0).unwrap();
            let list = check_theorems(&q, &k, &psi, &r).unwrap();
            assert!(list.all_hold(), "{:?}", list.failed());
            for (_, c) in list.checks() {
                assert_eq!(c.lhs, 0.0);
            }
        }
    }

    #[test]
    fn jdiff_delta2_example() {
        let q = RecordQuantities {
            delta: 0.1,
            alpha: 0.02,
            j_reg: 1.3,
            j_true: 1.0,
            image_error: 0.1,
            bregman_fwd: Some(0.0),
            bregman_rev: Some(0.0),
            bregman_sym: Some(0.0),
            pairing: Some(0.0),
        };
        let r = radii(1.5, 2.0, 0.1);
        let k = vsc_constants(&r).unwrap();
        let psi = IndexFunction::power(1.0, 1.0).unwrap();
        let list = check_theorems(&q, &k, &psi, &r).unwrap();
        assert_abs_diff_eq!(list.jdiff_delta2.rhs, 4.5, epsilon = 1e-12);
        assert_abs_diff_eq!(list.jdiff_delta2.slack, 4.2, epsilon = 1e-12);
        assert!(list.jdiff_delta2.holds);
    }

    #[test]
    fn missing_subgradient_quantities_rejected() {
        let q = RecordQuantities {
            delta: 0.1,
            alpha: 0.02,
            j_reg: 1.0,
            j_true: 1.0,
            image_error: 0.1,
            bregman_fwd: Some(0.0),
            bregman_rev: None,
            bregman_sym: Some(0.0),
            pairing: Some(0.0),
        };
        let r = radii(1.5, 2.0, 0.1);
        let k = vsc_constants(&r).unwrap();
        let psi = IndexFunction::power(1.0, 1.0).unwrap();
        assert_eq!(
            check_theorems(&q, &k, &psi, &r).unwrap_err(),
            Error::IncompleteRecord("bregman_rev")
        );
    }

    #[test]
    fn index_function_serde_rejects_bad_values() {
        let ok: IndexFunction<f64> = serde_json::from_str(r#"{"c":0.5,"kappa":1.0}"#).unwrap();
        assert_eq!(ok.c(), 0.5);
        assert!(serde_json::from_str::<IndexFunction<f64>>(r#"{"c":0.5,"kappa":2.0}"#).is_err());
        assert!(serde_json::from_str::<IndexFunction<f64>>(r#"{"c":0.5,"kappa":1.0,"x":1}"#).is_err());
    }
}
