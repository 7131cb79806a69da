//! Generalized exponential, trigonometric and hyperbolic functions as power series
//! solutions of `y^(d) = ±x^m y`, with an independent ODE oracle, residual-verified
//! reductions of classical equations, and figure-table generation.
//!
//! ```
//! use gseries_core::{gfn_eval, Family, GFunctionKind, SummationPolicy};
//!
//! let r = gfn_eval(GFunctionKind::new(Family::GenCos, 0.0), 1.0, &SummationPolicy::default()).unwrap();
//! assert!((r.value - 1f64.cos()).abs() < 1e-15);
//! ```

// `!(a > b)` is used on purpose so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dd;
pub mod figures;
pub mod oracle;
pub mod poly;
pub mod reductions;
pub mod series;
pub mod special;
pub mod validation;

pub use figures::{figure_table, FigureSpec, FigureTable};
pub use oracle::{
    count_zeros, find_zeros, integrate, leighton_oscillatory, residual, ODESystem, OracleError,
    Trajectory,
};
pub use poly::{PolyCoeff, PolyError};
pub use reductions::{
    bessel_solution, damped_solution, nonlinear_yyppp_solution, polycoeff_solution,
    riccati_solution, ReducedSolution, ReductionError, Verification,
};
pub use series::{
    antiderivative, derivative, eval, eval_calculus, eval_power_series, make_series,
    to_exact_series, to_power_series, EvalResult, PowerSeries, SeriesError, SeriesSpec, Sign,
    SummationPolicy, Term,
};
pub use special::{gfn, gfn_derivative_eval, gfn_eval, jet, Family, GFunctionKind};
pub use validation::{run_validation, ValidationReport, CHECK_NAMES};
