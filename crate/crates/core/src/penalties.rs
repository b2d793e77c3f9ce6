//! Convex penalties, subgradient selections, proximal maps and Bregman
//! distances.
//!
//! Gradients and subgradients are taken with respect to the grid-weighted
//! inner product of [`Signal`], so `J(v) >= J(u) + <p, v - u>` holds with the
//! same `<., .>` used everywhere else.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::Signal;
use crate::scalar::Scalar;

/// Floating-point allowance in the subgradient inequality.
pub const SUBGRADIENT_TOLERANCE: f64 = 1e-8;

/// A convex, non-negative penalty functional `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "PenaltyRepr<T>",
    into = "PenaltyRepr<T>",
    bound(serialize = "T: Scalar", deserialize = "T: Scalar")
)]
pub enum Penalty<T> {
    /// `1/2 ||phi||^2`.
    Quadratic,
    /// `sum_i sqrt(|grad phi|_i^2 + beta) h` with forward differences and a
    /// zero difference at the last node.
    SmoothedTv { beta: T },
    /// `||phi||_1 = sum_i |phi_i| h`.
    L1,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PenaltyRepr<T> {
    // braced so that unknown keys are still rejected
    Quadratic {},
    SmoothedTv { beta: T },
    L1 {},
}

impl<T: Scalar> TryFrom<PenaltyRepr<T>> for Penalty<T> {
    type Error = Error;

    fn try_from(r: PenaltyRepr<T>) -> Result<Self> {
        match r {
            PenaltyRepr::Quadratic {} => Ok(Penalty::Quadratic),
            PenaltyRepr::SmoothedTv { beta } => Penalty::smoothed_tv(beta),
            PenaltyRepr::L1 {} => Ok(Penalty::L1),
        }
    }
}

impl<T: Scalar> From<Penalty<T>> for PenaltyRepr<T> {
    fn from(p: Penalty<T>) -> Self {
        match p {
            Penalty::Quadratic => PenaltyRepr::Quadratic {},
            Penalty::SmoothedTv { beta } => PenaltyRepr::SmoothedTv { beta },
            Penalty::L1 => PenaltyRepr::L1 {},
        }
    }
}

/// Where a subgradient came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgradientSource {
    AnalyticGradient,
    /// Sign selection for the l1 norm, with 0 at kinks.
    CanonicalSelection,
    /// `(1/alpha) T*(f - T phi)` read off a solved Tikhonov problem.
    ProxOptimality,
    UserSupplied,
}

/// An element `p` of the subdifferential of `J` at some point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Subgradient<T> {
    pub values: Signal<T>,
    pub source: SubgradientSource,
}

impl<T: Scalar> Subgradient<T> {
    pub fn user_supplied(values: Signal<T>) -> Self {
        Self {
            values,
            source: SubgradientSource::UserSupplied,
        }
    }

    /// Smallest value of `J(v) - J(u) - <p, v - u>` over `samples`.
    pub fn inequality_slack(&self, penalty: &Penalty<T>, u: &Signal<T>, samples: &[Signal<T>]) -> T {
        let ju = penalty.eval(u);
        samples
            .iter()
            .map(|v| penalty.eval(v) - ju - self.values.dot(&v.sub(u)))
            .fold(T::infinity(), T::min)
    }

    /// Whether the subgradient inequality holds on `samples` within
    /// [`SUBGRADIENT_TOLERANCE`].
    pub fn satisfies_inequality(&self, penalty: &Penalty<T>, u: &Signal<T>, samples: &[Signal<T>]) -> bool {
        self.inequality_slack(penalty, u, samples) >= -T::lit(SUBGRADIENT_TOLERANCE)
    }
}

impl<T: Scalar> Penalty<T> {
    pub fn smoothed_tv(beta: T) -> Result<Self> {
        if !(beta.is_finite() && beta > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "smoothed_tv beta must be positive, got {beta}"
            )));
        }
        Ok(Penalty::SmoothedTv { beta })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Penalty::Quadratic => "quadratic",
            Penalty::SmoothedTv { .. } => "smoothed_tv",
            Penalty::L1 => "l1",
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, Penalty::L1)
    }

    pub fn has_prox(&self) -> bool {
        !matches!(self, Penalty::SmoothedTv { .. })
    }

    pub fn eval(&self, phi: &Signal<T>) -> T {
        let h = phi.grid_spacing();
        match *self {
            Penalty::Quadratic => T::lit(0.5) * phi.norm_squared(),
            Penalty::L1 => phi.values().iter().map(|v| v.abs()).sum::<T>() * h,
            Penalty::SmoothedTv { beta } => {
                let s: T = forward_differences(phi)
                    .map(|d| (d * d + beta).sqrt())
                    .sum();
                s * h
            }
        }
    }

    /// Canonical subgradient selection at `phi`.
    pub fn subgradient(&self, phi: &Signal<T>) -> Subgradient<T> {
        match *self {
            Penalty::Quadratic => Subgradient {
                values: phi.clone(),
                source: SubgradientSource::AnalyticGradient,
            },
            Penalty::L1 => Subgradient {
                values: phi.map(|v| {
                    if v > T::zero() {
                        T::one()
                    } else if v < T::zero() {
                        -T::one()
                    } else {
                        T::zero()
                    }
                }),
                source: SubgradientSource::CanonicalSelection,
            },
            Penalty::SmoothedTv { beta } => Subgradient {
                values: tv_gradient(phi, beta),
                source: SubgradientSource::AnalyticGradient,
            },
        }
    }

    /// Gradient of a differentiable penalty; `None` for l1.
    pub fn gradient(&self, phi: &Signal<T>) -> Option<Signal<T>> {
        self.is_differentiable().then(|| self.subgradient(phi).values)
    }

    /// `argmin_u 1/2 ||u - z||^2 + step J(u)`.
    pub fn prox(&self, z: &Signal<T>, step: T) -> Result<Signal<T>> {
        if !(step.is_finite() && step > T::zero()) {
            return Err(Error::InvalidParameter(format!("prox step must be positive, got {step}")));
        }
        match *self {
            Penalty::Quadratic => Ok(z.scale(T::one() / (T::one() + step))),
            Penalty::L1 => Ok(z.map(|v| soft_threshold(v, step))),
            Penalty::SmoothedTv { .. } => Err(Error::UnsupportedProx("smoothed_tv")),
        }
    }
}

pub fn soft_threshold<T: Scalar>(v: T, threshold: T) -> T {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        T::zero()
    }
}

/// `(phi_{i+1} - phi_i) / h`, with 0 appended for the last node.
fn forward_differences<T: Scalar>(phi: &Signal<T>) -> impl Iterator<Item = T> + '_ {
    let h = phi.grid_spacing();
    let v = phi.values();
    v.windows(2)
        .map(move |w| (w[1] - w[0]) / h)
        .chain(std::iter::once(T::zero()))
}

fn tv_gradient<T: Scalar>(phi: &Signal<T>, beta: T) -> Signal<T> {
    let h = phi.grid_spacing();
    // psi'(d) = d / sqrt(d^2 + beta); flux through each edge
    let flux: Vec<T> = forward_differences(phi)
        .map(|d| d / (d * d + beta).sqrt())
        .collect();
    let n = flux.len();
    let grad = (0..n)
        .map(|k| {
            let left = if k > 0 { flux[k - 1] } else { T::zero() };
            (left - flux[k]) / h
        })
        .collect();
    phi.like(grad)
}

/// `D_J(u, u*) = J(u) - J(u*) - <p, u - u*>` with `p` a subgradient at `u*`.
pub fn bregman<T: Scalar>(penalty: &Penalty<T>, u: &Signal<T>, u_star: &Signal<T>, p: &Subgradient<T>) -> T {
    penalty.eval(u) - penalty.eval(u_star) - p.values.dot(&u.sub(u_star))
}

/// `D_J(u, u*) + D_J(u*, u) = <p_u - p_star, u - u*>`.
pub fn bregman_symmetric<T: Scalar>(
    u: &Signal<T>,
    u_star: &Signal<T>,
    p_u: &Subgradient<T>,
    p_star: &Subgradient<T>,
) -> T {
    p_u.values.sub(&p_star.values).dot(&u.sub(u_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sig(v: &[f64]) -> Signal<f64> {
        Signal::new(v.to_vec()).unwrap()
    }

    fn tv() -> Penalty<f64> {
        Penalty::smoothed_tv(0.01).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_abs_diff_eq!(Penalty::Quadratic.eval(&sig(&[1.0, 1.0])), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(Penalty::L1.eval(&sig(&[-2.0, 3.0])), 5.0, epsilon = 1e-15);
        // sqrt(1.01) + sqrt(1.01) + sqrt(0.01), summed by hand
        assert_abs_diff_eq!(tv().eval(&sig(&[0.0, 1.0, 0.0])), 2.10997512, epsilon = 1e-8);
    }

    #[test]
    fn subgradient_examples() {
        let q = Penalty::Quadratic.subgradient(&sig(&[2.0, -1.0]));
        assert_eq!(q.values.values(), &[2.0, -1.0]);
        let l = Penalty::L1.subgradient(&sig(&[0.0, 3.0, -2.0]));
        assert_eq!(l.values.values(), &[0.0, 1.0, -1.0]);
        assert_eq!(l.source, SubgradientSource::CanonicalSelection);
    }

    #[test]
    fn tv_gradient_matches_central_differences() {
        let penalty = tv();
        let phi = sig(&[0.0, 1.0, 0.0]);
        let grad = penalty.subgradient(&phi).values;
        let eps = 1e-6;
        for k in 0..3 {
            let mut plus = phi.values().to_vec();
            let mut minus = phi.values().to_vec();
            plus[k] += eps;
            minus[k] -= eps;
            let fd = (penalty.eval(&sig(&plus)) - penalty.eval(&sig(&minus))) / (2.0 * eps);
            assert_abs_diff_eq!(grad.values()[k], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn tv_gradient_respects_grid_spacing() {
        let penalty = tv();
        let h = 0.1;
        let phi = Signal::with_spacing(vec![0.0, 0.3, 0.2, 0.9], h).unwrap();
        let grad = penalty.subgradient(&phi).values;
        let eps = 1e-7;
        for k in 0..4 {
            let mut plus = phi.values().to_vec();
            let mut minus = phi.values().to_vec();
            plus[k] += eps;
            minus[k] -= eps;
            let jp = penalty.eval(&Signal::with_spacing(plus, h).unwrap());
            let jm = penalty.eval(&Signal::with_spacing(minus, h).unwrap());
            // weighted gradient = euclidean partial / h
            let fd = (jp - jm) / (2.0 * eps) / h;
            assert!((grad.values()[k] - fd).abs() <= 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn prox_examples() {
        let q = Penalty::Quadratic.prox(&sig(&[1.0, 0.0]), 1.0).unwrap();
        assert_eq!(q.values(), &[0.5, 0.0]);
        let l = Penalty::L1.prox(&sig(&[2.0, -0.5]), 1.0).unwrap();
        assert_eq!(l.values(), &[1.0, 0.0]);
        let inside = Penalty::L1.prox(&sig(&[0.3]), 0.5).unwrap();
        assert_eq!(inside.values(), &[0.0]);
        assert_eq!(
            tv().prox(&sig(&[1.0]), 1.0),
            Err(Error::UnsupportedProx("smoothed_tv"))
        );
        assert!(Penalty::L1.prox(&sig(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn bregman_examples() {
        let zero = Subgradient::user_supplied(sig(&[0.0, 0.0]));
        let d = bregman(&Penalty::Quadratic, &sig(&[1.0, 1.0]), &sig(&[0.0, 0.0]), &zero);
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-15);

        let u = sig(&[0.0, 1.0, 0.0]);
        let u_star = sig(&[0.0, 0.0, 0.0]);
        let p = tv().subgradient(&u_star);
        // J(u) - J(0) - <grad J(0), u>, grad J(0) = 0 term by term
        let by_hand = (2.0 * 1.01f64.sqrt() + 0.1) - 3.0 * 0.1 - 0.0;
        assert_abs_diff_eq!(bregman(&tv(), &u, &u_star, &p), by_hand, epsilon = 1e-12);

        for penalty in [Penalty::Quadratic, Penalty::L1, tv()] {
            let x = sig(&[0.4, -1.0, 2.0]);
            let p = penalty.subgradient(&x);
            assert_abs_diff_eq!(bregman(&penalty, &x, &x, &p), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn symmetric_bregman_examples() {
        let u = sig(&[1.0, 1.0]);
        let us = sig(&[0.0, 0.0]);
        let q = Penalty::Quadratic;
        let s = bregman_symmetric(&u, &us, &q.subgradient(&u), &q.subgradient(&us));
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-15);
        assert_eq!(bregman_symmetric(&u, &u, &q.subgradient(&u), &q.subgradient(&u)), 0.0);

        let u = sig(&[1.0, 0.0]);
        let us = sig(&[-1.0, 0.0]);
        let pu = Penalty::L1.subgradient(&u);
        let ps = Penalty::L1.subgradient(&us);
        let sym = bregman_symmetric(&u, &us, &pu, &ps);
        let two_sided = bregman(&Penalty::L1, &u, &us, &ps) + bregman(&Penalty::L1, &us, &u, &pu);
        assert_abs_diff_eq!(sym, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sym, two_sided, epsilon = 1e-15);
    }

    #[test]
    fn penalty_serde_shape() {
        let p: Penalty<f64> = serde_json::from_str(r#"{"kind":"smoothed_tv","beta":0.01}"#).unwrap();
        assert_eq!(p, Penalty::SmoothedTv { beta: 0.01 });
        assert_eq!(serde_json::to_string(&Penalty::<f64>::L1).unwrap(), r#"{"kind":"l1"}"#);
        assert!(serde_json::from_str::<Penalty<f64>>(r#"{"kind":"smoothed_tv","beta":0.0}"#).is_err());
        assert!(serde_json::from_str::<Penalty<f64>>(r#"{"kind":"quadratic","x":1}"#).is_err());
    }
}
