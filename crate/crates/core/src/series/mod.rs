//! The unified generalized series solving `y^(d) = σ x^m y`.
//!
//! A [`SeriesSpec`] fixes the ODE order `d`, the exponent `m`, the sign `σ` and the
//! branch `k`. Its series is `Σ_j c_j x^(e_j)` with
//!
//! ```text
//! e_0 = k - 1,          c_0 = 1,
//! e_{j+1} = e_j + s,    c_{j+1} = σ c_j / Π_{i=0}^{d-1} (e_{j+1} - i),    s = m + d.
//! ```
//!
//! Differentiating term `j+1` `d` times gives `σ c_j x^(e_j + m)`, so the series
//! satisfies the ODE term by term; the leading term is annihilated because `k - 1 < d`.

mod exact;
mod kernel;
mod power;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exact::{to_exact_series, ExactSeries, ExactTerm};
pub(crate) use kernel::check_antiderivative;
pub use kernel::{eval, eval_calculus};
pub use power::{
    antiderivative, derivative, eval_power_series, to_power_series, PowerSeries, Term,
};

use crate::dd::DoubleDouble;

/// Relative distance to an integer below which a recurrence factor is treated as vanishing.
const POLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("EulerDegenerate: step m + d = 0 for d = {order}, m = {exponent} (Euler-type equation, no power series of this form)")]
    EulerDegenerate { order: u32, exponent: f64 },
    #[error("UndefinedOrder: recurrence factor {factor} vanishes at term j = {term}, factor index i = {index}")]
    UndefinedOrder {
        term: usize,
        index: u32,
        factor: String,
    },
    #[error("invalid series parameters: {0}")]
    InvalidSpec(String),
    #[error("invalid summation policy: {0}")]
    InvalidPolicy(String),
    #[error("DomainError at x = {x}: {reason}")]
    Domain { x: f64, reason: String },
    #[error("NoConvergence at x = {x} after {terms} terms")]
    NoConvergence { x: f64, terms: usize },
    #[error("CancellationLoss at x = {x}: cancellation factor {factor:.3e} exceeds limit (value {value:e})")]
    CancellationLoss { x: f64, factor: f64, value: f64 },
    #[error("Overflow at x = {x}: term {term} is not finite")]
    Overflow { x: f64, term: usize },
    #[error("ExponentMinusOne: term {term} has exponent -1, antiderivative needs a logarithm")]
    ExponentMinusOne { term: usize },
    #[error("truncation length must be at least 1")]
    InvalidTruncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// One member `g^{σ,k}_{d,m}` of the generalized family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSpec {
    ode_order: u32,
    exponent: f64,
    sign: Sign,
    branch: u32,
}

/// Builds and validates a [`SeriesSpec`]. Poles are found analytically here so that
/// evaluation never meets a vanishing denominator.
pub fn make_series(d: u32, m: f64, sign: Sign, k: u32) -> Result<SeriesSpec, SeriesError> {
    if d == 0 {
        return Err(SeriesError::InvalidSpec(
            "ODE order must be at least 1".into(),
        ));
    }
    if k == 0 || k > d {
        return Err(SeriesError::InvalidSpec(format!(
            "branch k = {k} must satisfy 1 <= k <= {d}"
        )));
    }
    if !m.is_finite() {
        return Err(SeriesError::InvalidSpec(format!(
            "exponent m = {m} is not finite"
        )));
    }
    let s = m + f64::from(d);
    if s == 0.0 {
        return Err(SeriesError::EulerDegenerate {
            order: d,
            exponent: m,
        });
    }
    if let Some((term, index)) = find_pole(d, s, k) {
        let a = term as i64 + 1;
        let b = a * i64::from(d) + i64::from(k) - 1 - i64::from(index);
        return Err(SeriesError::UndefinedOrder {
            term,
            index,
            factor: linear_label(a, "m", b),
        });
    }
    Ok(SeriesSpec {
        ode_order: d,
        exponent: m,
        sign,
        branch: k,
    })
}

/// Smallest `(j, i)` with `(k-1) + (j+1) s - i = 0`, if any.
fn find_pole(d: u32, s: f64, k: u32) -> Option<(usize, u32)> {
    let lead = f64::from(k - 1);
    (0..d)
        .filter_map(|i| {
            let t = (f64::from(i) - lead) / s;
            let r = t.round();
            (r >= 1.0 && (t - r).abs() <= POLE_TOLERANCE * r).then_some(((r - 1.0) as usize, i))
        })
        .min()
}

/// Formats `a·var + b` the way a factor would be written by hand, e.g. `(m + 1)`, `(2m - 3)`.
pub(crate) fn linear_label(a: i64, var: &str, b: i64) -> String {
    let lead = match a {
        1 => var.to_string(),
        -1 => format!("-{var}"),
        _ => format!("{a}{var}"),
    };
    match b.cmp(&0) {
        std::cmp::Ordering::Greater => format!("({lead} + {b})"),
        std::cmp::Ordering::Less => format!("({lead} - {})", -b),
        std::cmp::Ordering::Equal => format!("({lead})"),
    }
}

impl SeriesSpec {
    pub fn ode_order(&self) -> u32 {
        self.ode_order
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn branch(&self) -> u32 {
        self.branch
    }

    /// Exponent increment `s = m + d` between consecutive terms.
    pub fn step(&self) -> f64 {
        self.exponent + f64::from(self.ode_order)
    }

    pub fn leading_exponent(&self) -> f64 {
        f64::from(self.branch - 1)
    }

    pub fn term_exponent(&self, j: usize) -> f64 {
        self.leading_exponent() + j as f64 * self.step()
    }

    /// `Π_{i=0}^{d-1} (e - i)` in double-double.
    pub(crate) fn factor_product(&self, e: f64) -> DoubleDouble {
        (0..self.ode_order).fold(DoubleDouble::ONE, |acc, i| acc * (e - f64::from(i)))
    }

    /// Iterator over the coefficients `c_j` in double-double precision.
    pub(crate) fn coefficients(&self) -> impl Iterator<Item = DoubleDouble> + '_ {
        let sigma = self.sign.value();
        let mut c = DoubleDouble::ONE;
        let mut j = 0usize;
        std::iter::from_fn(move || {
            let out = c;
            j += 1;
            c = c * sigma / self.factor_product(self.term_exponent(j));
            Some(out)
        })
    }

    /// Whether every exponent of the series (and of its term-wise calculus) is an integer.
    pub fn has_integer_exponents(&self) -> bool {
        is_integer(self.step())
    }
}

impl fmt::Display for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "g^{{{},{}}}_{{{},{}}}",
            self.sign, self.branch, self.ode_order, self.exponent
        )
    }
}

/// Stopping and conditioning rules for one summation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummationPolicy {
    rel_tol: f64,
    max_terms: usize,
    cancel_limit: f64,
}

impl Default for SummationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-15,
            max_terms: 10_000,
            cancel_limit: 1e12,
        }
    }
}

impl SummationPolicy {
    pub fn new(rel_tol: f64, max_terms: usize, cancel_limit: f64) -> Result<Self, SeriesError> {
        if !(rel_tol > 0.0) {
            return Err(SeriesError::InvalidPolicy(format!(
                "rel_tol = {rel_tol} must be positive"
            )));
        }
        if max_terms < 2 {
            return Err(SeriesError::InvalidPolicy(format!(
                "max_terms = {max_terms} must be >= 2"
            )));
        }
        if !(cancel_limit >= 1.0) {
            return Err(SeriesError::InvalidPolicy(format!(
                "cancel_limit = {cancel_limit} must be >= 1"
            )));
        }
        Ok(Self {
            rel_tol,
            max_terms,
            cancel_limit,
        })
    }

    /// Default tolerances with the cancellation check switched off. Used where only the
    /// sign or a residual of a sum matters, such as root refinement.
    pub fn unchecked() -> Self {
        Self {
            cancel_limit: f64::INFINITY,
            ..Self::default()
        }
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn cancel_limit(&self) -> f64 {
        self.cancel_limit
    }

    pub fn with_max_terms(self, max_terms: usize) -> Result<Self, SeriesError> {
        Self::new(self.rel_tol, max_terms, self.cancel_limit)
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self, SeriesError> {
        Self::new(rel_tol, self.max_terms, self.cancel_limit)
    }

    pub fn with_cancel_limit(self, cancel_limit: f64) -> Result<Self, SeriesError> {
        Self::new(self.rel_tol, self.max_terms, cancel_limit)
    }
}

/// Value of one summation plus the diagnostics needed to judge it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    pub terms_used: usize,
    pub max_term_magnitude: f64,
    /// Largest magnitude among the terms and partial sums, divided by `|value|`.
    pub cancellation_factor: f64,
    pub converged: bool,
}

pub(crate) fn is_integer(v: f64) -> bool {
    v.is_finite() && v.fract() == 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(spec: &SeriesSpec, n: usize) -> Vec<f64> {
        spec.coefficients().take(n).map(|c| c.to_f64()).collect()
    }

    #[test]
    fn exponential_coefficients() {
        let spec = make_series(1, 0.0, Sign::Plus, 1).unwrap();
        assert_eq!(coeffs(&spec, 4), vec![1.0, 1.0, 0.5, 1.0 / 6.0]);
    }

    #[test]
    fn airy_like_cosine_coefficients() {
        let spec = make_series(2, 1.0, Sign::Minus, 1).unwrap();
        let c = coeffs(&spec, 3);
        assert_eq!(c[0], 1.0);
        assert!((c[1] + 1.0 / 6.0).abs() < 1e-17);
        assert!((c[2] - 1.0 / 180.0).abs() < 1e-18);
        assert_eq!(
            (0..3).map(|j| spec.term_exponent(j)).collect::<Vec<_>>(),
            vec![0.0, 3.0, 6.0]
        );
    }

    #[test]
    fn pole_at_first_factor() {
        let err = make_series(2, -1.0, Sign::Minus, 1).unwrap_err();
        assert_eq!(
            err,
            SeriesError::UndefinedOrder {
                term: 0,
                index: 1,
                factor: "(m + 1)".into()
            }
        );
    }

    #[test]
    fn euler_degenerate_cases() {
        assert!(matches!(
            make_series(1, -1.0, Sign::Plus, 1),
            Err(SeriesError::EulerDegenerate { order: 1, .. })
        ));
        assert!(matches!(
            make_series(2, -2.0, Sign::Minus, 2),
            Err(SeriesError::EulerDegenerate { order: 2, .. })
        ));
    }

    #[test]
    fn later_pole_is_found() {
        // d = 2, k = 1, s = 1/3: factor (j+1)/3 - 1 vanishes at j = 2.
        let err = make_series(2, 1.0 / 3.0 - 2.0, Sign::Minus, 1).unwrap_err();
        assert!(matches!(
            err,
            SeriesError::UndefinedOrder {
                term: 2,
                index: 1,
                ..
            }
        ));
    }

    #[test]
    fn third_order_branches() {
        assert!(make_series(3, -4.0, Sign::Plus, 1).is_ok());
        assert!(make_series(3, -4.0, Sign::Plus, 2).is_err());
        assert!(make_series(3, -4.0, Sign::Plus, 3).is_err());
        assert!(make_series(3, 10.0, Sign::Minus, 3).is_ok());
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(
            make_series(0, 1.0, Sign::Plus, 1),
            Err(SeriesError::InvalidSpec(_))
        ));
        assert!(matches!(
            make_series(2, 1.0, Sign::Plus, 3),
            Err(SeriesError::InvalidSpec(_))
        ));
        assert!(matches!(
            make_series(2, f64::NAN, Sign::Plus, 1),
            Err(SeriesError::InvalidSpec(_))
        ));
    }

    #[test]
    fn policy_validation() {
        assert!(SummationPolicy::new(0.0, 10, 1.0).is_err());
        assert!(SummationPolicy::new(1e-10, 1, 1.0).is_err());
        assert!(SummationPolicy::new(1e-10, 2, 0.5).is_err());
        let p = SummationPolicy::default();
        assert_eq!(
            (p.rel_tol(), p.max_terms(), p.cancel_limit()),
            (1e-15, 10_000, 1e12)
        );
    }

    #[test]
    fn labels() {
        assert_eq!(linear_label(1, "m", 1), "(m + 1)");
        assert_eq!(linear_label(2, "m", -3), "(2m - 3)");
        assert_eq!(linear_label(1, "n", 0), "(n)");
    }
}
