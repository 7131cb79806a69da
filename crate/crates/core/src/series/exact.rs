//! Exact rational materialization of a series.
//!
//! Every finite `f64` is a dyadic rational, so the exponent `m` converts without loss and
//! the whole recurrence can be replayed in `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{SeriesError, SeriesSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactTerm {
    pub coeff: BigRational,
    pub exponent: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSeries {
    terms: Vec<ExactTerm>,
}

impl ExactSeries {
    pub fn terms(&self) -> &[ExactTerm] {
        &self.terms
    }

    pub fn to_f64_terms(&self) -> Vec<(f64, f64)> {
        self.terms
            .iter()
            .map(|t| {
                (
                    t.coeff.to_f64().unwrap_or(f64::NAN),
                    t.exponent.to_f64().unwrap_or(f64::NAN),
                )
            })
            .collect()
    }
}

pub fn to_exact_series(spec: &SeriesSpec, n_terms: usize) -> Result<ExactSeries, SeriesError> {
    if n_terms == 0 {
        return Err(SeriesError::InvalidTruncation);
    }
    let m = BigRational::from_float(spec.exponent())
        .ok_or_else(|| SeriesError::InvalidSpec("exponent is not finite".into()))?;
    let d = BigRational::from_integer(BigInt::from(spec.ode_order()));
    let s = m + &d;
    let lead = BigRational::from_integer(BigInt::from(spec.branch() - 1));
    let sigma = match spec.sign() {
        super::Sign::Plus => BigRational::one(),
        super::Sign::Minus => -BigRational::one(),
    };

    let mut terms = Vec::with_capacity(n_terms);
    let mut coeff = BigRational::one();
    let mut exponent = lead;
    for _ in 0..n_terms {
        terms.push(ExactTerm {
            coeff: coeff.clone(),
            exponent: exponent.clone(),
        });
        exponent = &exponent + &s;
        let mut denom = BigRational::one();
        for i in 0..spec.ode_order() {
            denom *= &exponent - BigRational::from_integer(BigInt::from(i));
        }
        debug_assert!(!denom.is_zero(), "poles are rejected by make_series");
        coeff = coeff * &sigma / denom;
    }
    Ok(ExactSeries { terms })
}
