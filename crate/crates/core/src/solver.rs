//! Minimization of `F_alpha(phi) = 1/2 ||T phi - f||^2 + alpha J(phi)`.
//!
//! Penalties with a proximal map are handled by the accelerated proximal
//! gradient method; the smoothed TV penalty is folded into the smooth part
//! and solved by accelerated gradient descent. Both use backtracking on the
//! Lipschitz estimate and a function-value restart that keeps the accepted
//! objective values non-increasing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{LinearMap, Signal};
use crate::penalties::{Penalty, Subgradient, SubgradientSource};
use crate::scalar::Scalar;

/// A Tikhonov problem for fixed data and regularization parameter.
#[derive(Debug, Clone, Copy)]
pub struct VariationalProblem<'a, T> {
    op: &'a LinearMap<T>,
    data: &'a Signal<T>,
    penalty: Penalty<T>,
    alpha: T,
}

impl<'a, T: Scalar> VariationalProblem<'a, T> {
    pub fn new(op: &'a LinearMap<T>, data: &'a Signal<T>, penalty: Penalty<T>, alpha: T) -> Result<Self> {
        if !(alpha.is_finite() && alpha > T::zero()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if data.len() != op.out_dim() {
            return Err(Error::DimensionMismatch {
                expected: op.out_dim(),
                found: data.len(),
            });
        }
        Ok(Self {
            op,
            data,
            penalty,
            alpha,
        })
    }

    /// Same operator, data and penalty with a different `alpha`.
    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        Self::new(self.op, self.data, self.penalty, alpha)
    }

    pub fn op(&self) -> &'a LinearMap<T> {
        self.op
    }

    pub fn data(&self) -> &'a Signal<T> {
        self.data
    }

    pub fn penalty(&self) -> Penalty<T> {
        self.penalty
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `T phi - f`.
    pub fn residual(&self, phi: &Signal<T>) -> Result<Signal<T>> {
        Ok(self.op.apply(phi)?.sub(self.data))
    }

    pub fn objective(&self, phi: &Signal<T>) -> Result<T> {
        let r = self.residual(phi)?;
        Ok(T::lit(0.5) * r.norm_squared() + self.alpha * self.penalty.eval(phi))
    }

    /// Gradient of the data term, `T*(T phi - f)`.
    pub fn data_gradient(&self, phi: &Signal<T>) -> Result<Signal<T>> {
        self.op.apply_adjoint(&self.residual(phi)?)
    }

    /// `(1/alpha) T*(f - T phi)`; a subgradient of `J` at `phi` when `phi`
    /// minimizes `F_alpha`.
    pub fn optimality_subgradient(&self, phi: &Signal<T>) -> Result<Subgradient<T>> {
        let g = self.data_gradient(phi)?;
        Ok(Subgradient {
            values: g.scale(-T::one() / self.alpha),
            source: SubgradientSource::ProxOptimality,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SolverSettings<T> {
    pub tol: T,
    pub max_iter: usize,
    /// Power iterations for the initial `||T||^2` estimate.
    pub power_iterations: usize,
    pub power_seed: u64,
    /// Step shrink factor applied on each failed sufficient-decrease test.
    pub backtrack_factor: T,
}

impl<T: Scalar> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            max_iter: 20_000,
            power_iterations: 20,
            power_seed: 0,
            backtrack_factor: T::lit(0.5),
        }
    }
}

impl<T: Scalar> SolverSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > T::zero()) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.backtrack_factor > T::zero() && self.backtrack_factor < T::one()) {
            return Err(Error::InvalidParameter("backtrack_factor must lie in (0, 1)".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Minimizer returned by [`minimize_tikhonov`]. A solve that hits
/// `max_iter` is still returned, with `converged == false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RegularizedSolution<T> {
    pub phi: Signal<T>,
    pub objective_value: T,
    pub residual_norm: T,
    pub penalty_value: T,
    pub optimality_defect: T,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
}

impl<T: Scalar> RegularizedSolution<T> {
    fn evaluate(problem: &VariationalProblem<'_, T>, phi: Signal<T>, iterations: usize, restarts: usize, tol: T) -> Result<Self> {
        let residual_norm = problem.residual(&phi)?.norm();
        let penalty_value = problem.penalty.eval(&phi);
        let optimality_defect = optimality_defect(problem, &phi)?;
        Ok(Self {
            objective_value: T::lit(0.5) * residual_norm * residual_norm + problem.alpha * penalty_value,
            residual_norm,
            penalty_value,
            optimality_defect,
            iterations,
            restarts,
            converged: optimality_defect <= tol,
            phi,
        })
    }

    /// Turns a non-converged solve into [`Error::SolverFailure`].
    pub fn into_converged(self, alpha: T) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::SolverFailure {
                alpha: alpha.to_f64_lossy(),
                defect: self.optimality_defect.to_f64_lossy(),
                iterations: self.iterations,
            })
        }
    }
}

/// Scalar measure of how far `phi` is from satisfying
/// `(1/alpha) T*(f - T phi) in dJ(phi)`; zero exactly at the minimizer.
///
/// Differentiable penalties use `||p - grad J(phi)|| / (1 + ||grad J(phi)||)`
/// with `p = (1/alpha) T*(f - T phi)`. The l1 penalty uses the fixed-point
/// residual `||phi - prox_J(phi + p, 1)|| / (1 + ||p||)`.
pub fn optimality_defect<T: Scalar>(problem: &VariationalProblem<'_, T>, phi: &Signal<T>) -> Result<T> {
    let p = problem.optimality_subgradient(phi)?.values;
    match problem.penalty.gradient(phi) {
        Some(grad) => Ok(p.sub(&grad).norm() / (T::one() + grad.norm())),
        None => {
            let fixed = problem.penalty.prox(&phi.add(&p), T::one())?;
            Ok(phi.sub(&fixed).norm() / (T::one() + p.norm()))
        }
    }
}

struct Split<'p, 'a, T> {
    problem: &'p VariationalProblem<'a, T>,
}

impl<T: Scalar> Split<'_, '_, T> {
    fn smooth_includes_penalty(&self) -> bool {
        !self.problem.penalty.has_prox()
    }

    fn smooth_value(&self, phi: &Signal<T>) -> Result<T> {
        let data = T::lit(0.5) * self.problem.residual(phi)?.norm_squared();
        if self.smooth_includes_penalty() {
            Ok(data + self.problem.alpha * self.problem.penalty.eval(phi))
        } else {
            Ok(data)
        }
    }

    fn smooth_gradient(&self, phi: &Signal<T>) -> Result<Signal<T>> {
        let g = self.problem.data_gradient(phi)?;
        if self.smooth_includes_penalty() {
            let gj = self.problem.penalty.subgradient(phi).values;
            Ok(g.axpby(T::one(), &gj, self.problem.alpha))
        } else {
            Ok(g)
        }
    }

    fn nonsmooth_value(&self, phi: &Signal<T>) -> T {
        if self.smooth_includes_penalty() {
            T::zero()
        } else {
            self.problem.alpha * self.problem.penalty.eval(phi)
        }
    }

    /// Forward-backward step from `y` with step `1/lipschitz`.
    fn step(&self, y: &Signal<T>, grad: &Signal<T>, lipschitz: T) -> Result<Signal<T>> {
        let forward = y.axpby(T::one(), grad, -T::one() / lipschitz);
        if self.smooth_includes_penalty() {
            Ok(forward)
        } else {
            self.problem.penalty.prox(&forward, self.problem.alpha / lipschitz)
        }
    }
}

/// Minimizes `F_alpha` starting from `warm_start` (zero if `None`).
pub fn minimize_tikhonov<T: Scalar>(
    problem: &VariationalProblem<'_, T>,
    settings: &SolverSettings<T>,
    warm_start: Option<&Signal<T>>,
) -> Result<RegularizedSolution<T>> {
    settings.validate()?;
    let h = problem.data.grid_spacing();
    let mut x = match warm_start {
        Some(w) if w.len() == problem.op.in_dim() => w.clone(),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                expected: problem.op.in_dim(),
                found: w.len(),
            })
        }
        None => Signal::zeros(problem.op.in_dim(), h)?,
    };
    let split = Split { problem };
    let grow = T::one() / settings.backtrack_factor;
    let mut lipschitz = problem
        .op
        .norm_squared_estimate(settings.power_iterations, settings.power_seed, h)
        .max(T::lit(1e-12));

    let mut fx = split.smooth_value(&x)? + split.nonsmooth_value(&x);
    if optimality_defect(problem, &x)? <= settings.tol {
        return RegularizedSolution::evaluate(problem, x, 0, 0, settings.tol);
    }

    let mut y = x.clone();
    let mut y_is_x = true;
    let mut t = T::one();
    let mut restarts = 0;
    let mut iterations = 0;
    let slack_scale = T::lit(16.0) * T::epsilon();

    while iterations < settings.max_iter {
        iterations += 1;
        let fy = split.smooth_value(&y)?;
        let gy = split.smooth_gradient(&y)?;
        let (z, fz) = loop {
            let z = split.step(&y, &gy, lipschitz)?;
            let fz = split.smooth_value(&z)?;
            let d = z.sub(&y);
            let model = fy + gy.dot(&d) + T::lit(0.5) * lipschitz * d.norm_squared();
            if fz <= model + slack_scale * (T::one() + fy.abs()) {
                break (z, fz);
            }
            lipschitz *= grow;
            if !lipschitz.is_finite() {
                return RegularizedSolution::evaluate(problem, x, iterations, restarts, settings.tol);
            }
        };
        let f_new = fz + split.nonsmooth_value(&z);
        if !f_new.is_finite() {
            break;
        }
        // increases below the rounding level of F are not a reason to restart
        if f_new > fx + slack_scale * (T::one() + fx.abs()) {
            if y_is_x {
                // a plain step from the current iterate cannot descend:
                // we are at the floating-point floor
                break;
            }
            restarts += 1;
            t = T::one();
            y = x.clone();
            y_is_x = true;
            continue;
        }
        let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
        let momentum = (t - T::one()) / t_next;
        y = z.axpby(T::one() + momentum, &x, -momentum);
        y_is_x = momentum == T::zero();
        x = z;
        fx = f_new;
        t = t_next;
        if optimality_defect(problem, &x)? <= settings.tol {
            break;
        }
    }
    RegularizedSolution::evaluate(problem, x, iterations, restarts, settings.tol)
}

/// Direct solve of `(T^T T + alpha I) phi = T^T f` for the quadratic
/// penalty.
pub fn closed_form_quadratic<T: Scalar>(op: &LinearMap<T>, data: &Signal<T>, alpha: T) -> Result<Signal<T>> {
    if !(alpha.is_finite() && alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if data.len() != op.out_dim() {
        return Err(Error::DimensionMismatch {
            expected: op.out_dim(),
            found: data.len(),
        });
    }
    let a = op.to_dense();
    let mut normal = a.gram();
    let n = normal.cols();
    let mut rows = normal.to_rows();
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] += alpha;
    }
    normal = crate::linops::DenseMatrix::from_rows(&rows)?;
    debug_assert_eq!(normal.rows(), n);
    let rhs = a.matvec_transposed(data.values());
    let phi = normal.solve_spd(&rhs)?;
    Signal::with_spacing(phi, data.grid_spacing())
}
