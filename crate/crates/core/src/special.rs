//! Named generalized functions `e_n`, `g^n_c`, `g^n_s`, `g^n_hc`, `g^n_hs`.
//!
//! Negative orders use the same five kinds with a negative `n`; the resulting series are
//! the `n -> -n` images of the positive-order ones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::series::{
    eval, eval_calculus, linear_label, make_series, EvalResult, SeriesError, SeriesSpec, Sign,
    SummationPolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    GenExp,
    GenCos,
    GenSin,
    GenCosh,
    GenSinh,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::GenExp,
        Family::GenCos,
        Family::GenSin,
        Family::GenCosh,
        Family::GenSinh,
    ];

    /// `(d, σ, k)` of the family in the general notation.
    pub fn parameters(self) -> (u32, Sign, u32) {
        match self {
            Family::GenExp => (1, Sign::Plus, 1),
            Family::GenCos => (2, Sign::Minus, 1),
            Family::GenSin => (2, Sign::Minus, 2),
            Family::GenCosh => (2, Sign::Plus, 1),
            Family::GenSinh => (2, Sign::Plus, 2),
        }
    }

    /// Short code used on the command line and in table headers.
    pub fn code(self) -> &'static str {
        match self {
            Family::GenExp => "ge",
            Family::GenCos => "gc",
            Family::GenSin => "gs",
            Family::GenCosh => "ghc",
            Family::GenSinh => "ghs",
        }
    }

    /// The family with the same branch and the other sign (trigonometric <-> hyperbolic).
    pub fn sign_flipped(self) -> Option<Family> {
        match self {
            Family::GenExp => None,
            Family::GenCos => Some(Family::GenCosh),
            Family::GenSin => Some(Family::GenSinh),
            Family::GenCosh => Some(Family::GenCos),
            Family::GenSinh => Some(Family::GenSin),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ge" | "exp" => Ok(Family::GenExp),
            "gc" | "cos" => Ok(Family::GenCos),
            "gs" | "sin" => Ok(Family::GenSin),
            "ghc" | "cosh" => Ok(Family::GenCosh),
            "ghs" | "sinh" => Ok(Family::GenSinh),
            other => Err(format!(
                "unknown function kind `{other}` (expected ge, gc, gs, ghc, ghs)"
            )),
        }
    }
}

/// A family together with its order `n` (the exponent multiplying `y`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GFunctionKind {
    pub family: Family,
    pub order: f64,
}

impl GFunctionKind {
    pub fn new(family: Family, order: f64) -> Self {
        Self { family, order }
    }

    /// Column label such as `gc_2` or `ghs_-10`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.family.code(), self.order)
    }
}

impl fmt::Display for GFunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n = {})", self.family.code(), self.order)
    }
}

/// Maps a named function onto its [`SeriesSpec`].
///
/// For the second-order kinds the degenerate step `n = -2` is reported as an undefined
/// order (the displayed denominator `(n - 2)` of the negative-order series vanishes),
/// and negative orders name the vanishing factor in terms of `|n|`.
pub fn gfn(kind: GFunctionKind) -> Result<SeriesSpec, SeriesError> {
    let (d, sign, k) = kind.family.parameters();
    match make_series(d, kind.order, sign, k) {
        Ok(spec) => Ok(spec),
        Err(SeriesError::EulerDegenerate { .. }) if d == 2 => Err(SeriesError::UndefinedOrder {
            term: 0,
            index: k - 1,
            factor: negative_order_label(0, d, k, k - 1),
        }),
        Err(SeriesError::UndefinedOrder { term, index, .. }) if kind.order < 0.0 => {
            Err(SeriesError::UndefinedOrder {
                term,
                index,
                factor: negative_order_label(term, d, k, index),
            })
        }
        Err(e) => Err(e),
    }
}

/// Factor `(k-1) + (j+1)(d - n) - i` written as `-(a n - b)` with `n = |order|`.
fn negative_order_label(term: usize, d: u32, k: u32, index: u32) -> String {
    let a = term as i64 + 1;
    let b = a * i64::from(d) + i64::from(k) - 1 - i64::from(index);
    linear_label(a, "n", -b)
}

pub fn gfn_eval(
    kind: GFunctionKind,
    x: f64,
    policy: &SummationPolicy,
) -> Result<EvalResult, SeriesError> {
    eval(&gfn(kind)?, x, policy)
}

pub fn gfn_derivative_eval(
    kind: GFunctionKind,
    x: f64,
    policy: &SummationPolicy,
) -> Result<EvalResult, SeriesError> {
    eval_calculus(&gfn(kind)?, 1, x, policy)
}

/// Value and the first `N - 1` derivatives of a spec at `x`.
pub fn jet<const N: usize>(
    spec: &SeriesSpec,
    x: f64,
    policy: &SummationPolicy,
) -> Result<[f64; N], SeriesError> {
    let mut out = [0.0; N];
    for (p, slot) in out.iter_mut().enumerate() {
        *slot = eval_calculus(spec, p as i32, x, policy)?.value;
    }
    Ok(out)
}
