//! Solver library for fuzzy Volterra integral equations of the second kind
//! with piecewise continuous kernels.
//!
//! The unknown is a fuzzy-valued function on an interval; the equation adds a
//! fuzzy forcing to a sum of integrals of crisp kernel pieces against a
//! monotone image of the unknown, each piece active between consecutive delay
//! curves. The solver runs the method of successive approximations on a
//! uniform grid with trapezoid quadrature, checks the contraction condition
//! that guarantees a unique solution, and evaluates both the geometric
//! a-priori error bound and the three-term a-posteriori estimate built from
//! moduli of continuity.
//!
//! Modules:
//! - [`fuzzy`]: parametric fuzzy numbers and their metric space operations
//! - [`calculus`]: fuzzy grid functions, modulus of continuity, trapezoid
//!   integration with its one-panel error bound
//! - [`expr`]: the expression language for kernels, curves and forcing
//! - [`problem`]: problem definition, kernel maxima, contraction constant,
//!   validation
//! - [`solver`]: the successive-approximation iteration and a-priori bounds
//! - [`bounds`]: partial kernel moduli and the a-posteriori estimate
//! - [`catalog`]: built-in benchmark problems with closed-form solutions

pub mod bounds;
pub mod calculus;
pub mod catalog;
pub mod expr;
pub mod fuzzy;
pub mod problem;
pub mod solver;

pub use calculus::{
    fuzzy_trapezoid, modulus_of_continuity, sup_distance, trapezoid_error_bound, CalculusError,
    FuzzyGridFunction, SpaceGrid,
};
pub use expr::{parse, Bindings, EvalError, ExprAst, ExprError};
pub use fuzzy::{FuzzyError, FuzzyNumber, MuGrid};
pub use problem::{
    contraction_constant, kernel_max, validate, KernelPiece, Nonlinearity, ProblemError,
    ProblemSpec, ValidationReport,
};
pub use solver::{
    apply_operator, apriori_bound, residual, solve, SolverConfig, SolverError, SolverReport,
};
pub use bounds::{partial_modulus_s, partial_modulus_t, theorem6_bound, BoundBreakdown, BoundsError};
