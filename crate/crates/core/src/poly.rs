//! Finite power-law sums `Σ A_i x^(p_i)` used as ODE coefficients.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("duplicate exponent {0} in coefficient sum")]
    DuplicateExponent(f64),
    #[error("non-finite coefficient or exponent")]
    NonFinite,
    #[error("cannot parse term `{0}` (expected coeff or coeff:exponent)")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyCoeff {
    /// `(A_i, p_i)` sorted by increasing exponent.
    terms: Vec<(f64, f64)>,
}

impl PolyCoeff {
    pub fn new(mut terms: Vec<(f64, f64)>) -> Result<Self, PolyError> {
        if terms.iter().any(|(a, p)| !a.is_finite() || !p.is_finite()) {
            return Err(PolyError::NonFinite);
        }
        terms.sort_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(w) = terms.windows(2).find(|w| w[0].1 == w[1].1) {
            return Err(PolyError::DuplicateExponent(w[0].1));
        }
        Ok(Self { terms })
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(a: f64) -> Self {
        Self {
            terms: vec![(a, 0.0)],
        }
    }

    pub fn monomial(a: f64, p: f64) -> Self {
        Self {
            terms: vec![(a, p)],
        }
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(a, _)| *a == 0.0)
    }

    /// Term with the largest exponent and nonzero coefficient.
    pub fn dominant(&self) -> Option<(f64, f64)> {
        self.terms.iter().rev().copied().find(|(a, _)| *a != 0.0)
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.terms.iter().any(|(a, p)| *a != 0.0 && *p < 0.0)
    }

    pub fn has_nonnegative_integer_exponents(&self) -> bool {
        self.terms
            .iter()
            .all(|(_, p)| *p >= 0.0 && p.fract() == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|(a, p)| a * pow(x, *p)).sum()
    }

    /// Derivative `Σ A_i p_i x^(p_i - 1)`.
    pub fn derivative(&self) -> PolyCoeff {
        PolyCoeff {
            terms: self
                .terms
                .iter()
                .filter(|(_, p)| *p != 0.0)
                .map(|(a, p)| (a * p, p - 1.0))
                .collect(),
        }
    }

    /// Antiderivative vanishing at 0; `None` when some exponent is `<= -1`.
    pub fn integral_from_zero(&self) -> Option<PolyCoeff> {
        if self.terms.iter().any(|(a, p)| *a != 0.0 && *p <= -1.0) {
            return None;
        }
        Some(PolyCoeff {
            terms: self
                .terms
                .iter()
                .map(|(a, p)| (a / (p + 1.0), p + 1.0))
                .collect(),
        })
    }
}

fn pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

impl fmt::Display for PolyCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(a, p)| format!("{a}:{p}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `A:p,B:q,...`; a bare number is a constant term.
impl FromStr for PolyCoeff {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(PolyCoeff::zero());
        }
        let terms = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                let bad = || PolyError::Parse(part.to_string());
                match part.split_once(':') {
                    Some((a, p)) => Ok((
                        a.trim().parse().map_err(|_| bad())?,
                        p.trim().parse().map_err(|_| bad())?,
                    )),
                    None => Ok((part.parse().map_err(|_| bad())?, 0.0)),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        PolyCoeff::new(terms)
    }
}
