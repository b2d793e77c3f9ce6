//! Convex variational regularization for discretized linear inverse problems.
//!
//! The crate minimizes Tikhonov-type functionals
//! `F_alpha(phi) = 1/2 ||T phi - f||^2 + alpha J(phi)` for convex penalties `J`,
//! selects `alpha` with Morozov's discrepancy principle, and checks Bregman
//! distance bounds and convergence rates over noise sweeps.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the sweep
//! harness and command-line tool use.

pub mod error;
pub mod harness;
pub mod linops;
pub mod mdp;
pub mod penalties;
pub mod scalar;
pub mod solver;
pub mod vsc;

pub use error::{Error, Result};
pub use linops::{DenseMatrix, LinearMap, Signal};
pub use mdp::{AlphaBounds, AlphaMaxVariant, DiscrepancyRadii, MdpResult, SearchSettings};
pub use penalties::{Penalty, Subgradient, SubgradientSource};
pub use scalar::Scalar;
pub use solver::{RegularizedSolution, SolverSettings, VariationalProblem};
pub use vsc::{IndexFunction, TheoremChecklist, VscConstants};

pub type Signal64 = Signal<f64>;
pub type LinearMap64 = LinearMap<f64>;
pub type DenseMatrix64 = DenseMatrix<f64>;
pub type Penalty64 = Penalty<f64>;
pub type Subgradient64 = Subgradient<f64>;
pub type VariationalProblem64<'a> = VariationalProblem<'a, f64>;
pub type RegularizedSolution64 = RegularizedSolution<f64>;
pub type SolverSettings64 = SolverSettings<f64>;
pub type DiscrepancyRadii64 = DiscrepancyRadii<f64>;
pub type SearchSettings64 = SearchSettings<f64>;
pub type MdpResult64 = MdpResult<f64>;
pub type AlphaBounds64 = AlphaBounds<f64>;
pub type IndexFunction64 = IndexFunction<f64>;
pub type VscConstants64 = VscConstants<f64>;
pub type TheoremChecklist64 = TheoremChecklist<f64>;

pub type Signal32 = Signal<f32>;
pub type LinearMap32 = LinearMap<f32>;
pub type Penalty32 = Penalty<f32>;
pub type VariationalProblem32<'a> = VariationalProblem<'a, f32>;
