//! Materialized series `Σ c_j x^(e_j)` with real exponents and term-wise calculus.

use serde::Serialize;

use super::{is_integer, EvalResult, SeriesError, SeriesSpec, SummationPolicy};
use crate::dd::DoubleDouble;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub coeff: f64,
    pub exponent: f64,
}

impl Term {
    pub fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }
}

/// An explicit term list whose exponents are strictly monotone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSeries {
    terms: Vec<Term>,
}

impl PowerSeries {
    pub fn new(terms: Vec<Term>) -> Result<Self, SeriesError> {
        let increasing = terms.windows(2).all(|w| w[1].exponent > w[0].exponent);
        let decreasing = terms.windows(2).all(|w| w[1].exponent < w[0].exponent);
        if !(increasing || decreasing) {
            return Err(SeriesError::InvalidSpec(
                "power series exponents must be strictly monotone".into(),
            ));
        }
        if terms
            .iter()
            .any(|t| !t.coeff.is_finite() || !t.exponent.is_finite())
        {
            return Err(SeriesError::InvalidSpec("non-finite term".into()));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Linear combination `a·self + b·other` of two series sharing their exponent grid
    /// (terms with equal exponents are merged).
    pub fn combine(&self, a: f64, other: &PowerSeries, b: f64) -> Result<PowerSeries, SeriesError> {
        let mut merged: Vec<Term> = self
            .terms
            .iter()
            .map(|t| Term::new(a * t.coeff, t.exponent))
            .chain(
                other
                    .terms
                    .iter()
                    .map(|t| Term::new(b * t.coeff, t.exponent)),
            )
            .collect();
        merged.sort_by(|p, q| p.exponent.total_cmp(&q.exponent));
        let mut out: Vec<Term> = Vec::with_capacity(merged.len());
        for t in merged {
            match out.last_mut() {
                Some(last) if last.exponent == t.exponent => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        PowerSeries::new(out)
    }
}

/// First `n_terms` terms of the series of `spec`.
pub fn to_power_series(spec: &SeriesSpec, n_terms: usize) -> Result<PowerSeries, SeriesError> {
    if n_terms == 0 {
        return Err(SeriesError::InvalidTruncation);
    }
    let terms = spec
        .coefficients()
        .take(n_terms)
        .enumerate()
        .map(|(j, c)| Term::new(c.to_f64(), spec.term_exponent(j)))
        .collect();
    PowerSeries::new(terms)
}

/// Term-wise derivative; constant terms drop out.
pub fn derivative(ps: &PowerSeries) -> PowerSeries {
    PowerSeries {
        terms: ps
            .terms
            .iter()
            .filter(|t| t.exponent != 0.0)
            .map(|t| Term::new(t.coeff * t.exponent, t.exponent - 1.0))
            .collect(),
    }
}

/// Term-wise antiderivative with zero integration constant.
pub fn antiderivative(ps: &PowerSeries) -> Result<PowerSeries, SeriesError> {
    if let Some(term) = ps.terms.iter().position(|t| t.exponent == -1.0) {
        return Err(SeriesError::ExponentMinusOne { term });
    }
    Ok(PowerSeries {
        terms: ps
            .terms
            .iter()
            .map(|t| Term::new(t.coeff / (t.exponent + 1.0), t.exponent + 1.0))
            .collect(),
    })
}

/// Sums an explicit term list with the same kernel and diagnostics as [`super::eval`].
///
/// A finite list is summed in full; `NoConvergence` is raised only when the list is
/// longer than the policy allows and the stopping rule was not met within budget.
pub fn eval_power_series(
    ps: &PowerSeries,
    x: f64,
    policy: &SummationPolicy,
) -> Result<EvalResult, SeriesError> {
    if !x.is_finite() {
        return Err(SeriesError::Domain {
            x,
            reason: "argument is not finite".into(),
        });
    }
    let xd = DoubleDouble::new(x);
    let mut sum = DoubleDouble::ZERO;
    let mut max_abs = 0.0f64;
    let mut prev: Option<f64> = None;
    let mut converged = false;
    let tol = policy.rel_tol();
    let budget = policy.max_terms();
    let mut used = 0;

    for (j, t) in ps.terms.iter().enumerate() {
        if j == budget {
            if converged {
                break;
            }
            return Err(SeriesError::NoConvergence { x, terms: budget });
        }
        let contrib = power_term(xd, t)?;
        if !contrib.is_finite() {
            return Err(SeriesError::Overflow { x, term: j });
        }
        sum = sum + contrib;
        let mag = contrib.hi.abs();
        max_abs = max_abs.max(mag).max(sum.hi.abs());
        let bound = tol * sum.hi.abs();
        if let Some(p) = prev {
            converged = p <= bound && mag <= bound;
        }
        prev = Some(mag);
        used = j + 1;
    }

    let value = sum.to_f64();
    let cancellation_factor = if max_abs == 0.0 {
        0.0
    } else {
        max_abs / value.abs().max(f64::MIN_POSITIVE)
    };
    if cancellation_factor > policy.cancel_limit() {
        return Err(SeriesError::CancellationLoss {
            x,
            factor: cancellation_factor,
            value,
        });
    }
    Ok(EvalResult {
        value,
        terms_used: used,
        max_term_magnitude: max_abs,
        cancellation_factor,
        converged,
    })
}

fn power_term(xd: DoubleDouble, t: &Term) -> Result<DoubleDouble, SeriesError> {
    let x = xd.hi;
    if t.coeff == 0.0 {
        return Ok(DoubleDouble::ZERO);
    }
    if x == 0.0 {
        return match t.exponent {
            e if e > 0.0 => Ok(DoubleDouble::ZERO),
            0.0 => Ok(DoubleDouble::new(t.coeff)),
            e => Err(SeriesError::Domain {
                x,
                reason: format!("term x^{e} is singular at x = 0"),
            }),
        };
    }
    if is_integer(t.exponent) {
        Ok(xd.powi(t.exponent as i64) * t.coeff)
    } else if x > 0.0 {
        Ok(DoubleDouble::new(x.powf(t.exponent)) * t.coeff)
    } else {
        Err(SeriesError::Domain {
            x,
            reason: format!("real power x^{} of a negative argument", t.exponent),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_series, Sign};

    #[test]
    fn exponents_of_generalized_exponential() {
        let n = 3.0;
        let spec = make_series(1, n, Sign::Plus, 1).unwrap();
        let ps = to_power_series(&spec, 4).unwrap();
        let e: Vec<f64> = ps.terms().iter().map(|t| t.exponent).collect();
        assert_eq!(e, vec![0.0, n + 1.0, 2.0 * n + 2.0, 3.0 * n + 3.0]);
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let sin = to_power_series(&make_series(2, 0.0, Sign::Minus, 2).unwrap(), 12).unwrap();
        let cos = to_power_series(&make_series(2, 0.0, Sign::Minus, 1).unwrap(), 12).unwrap();
        let d = derivative(&sin);
        for (a, b) in d.terms().iter().zip(cos.terms()) {
            assert_eq!(a.exponent, b.exponent);
            assert!((a.coeff - b.coeff).abs() <= 4e-16 * b.coeff.abs());
        }
    }

    #[test]
    fn derivative_drops_constant() {
        let ps = PowerSeries::new(vec![Term::new(5.0, 0.0)]).unwrap();
        assert!(derivative(&ps).is_empty());
    }

    #[test]
    fn sine_derivative_at_zero() {
        let sin = to_power_series(&make_series(2, 2.0, Sign::Minus, 2).unwrap(), 8).unwrap();
        let r = eval_power_series(&derivative(&sin), 0.0, &SummationPolicy::default()).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn antiderivative_of_cosine_is_sine() {
        let sin = to_power_series(&make_series(2, 0.0, Sign::Minus, 2).unwrap(), 10).unwrap();
        let cos = to_power_series(&make_series(2, 0.0, Sign::Minus, 1).unwrap(), 10).unwrap();
        let a = antiderivative(&cos).unwrap();
        for (p, q) in a.terms().iter().zip(sin.terms()) {
            assert_eq!(p.exponent, q.exponent);
            assert!((p.coeff - q.coeff).abs() <= 4e-16 * q.coeff.abs());
        }
    }

    #[test]
    fn antiderivative_rejects_reciprocal() {
        let ps = PowerSeries::new(vec![Term::new(1.0, -1.0)]).unwrap();
        assert_eq!(
            antiderivative(&ps),
            Err(SeriesError::ExponentMinusOne { term: 0 })
        );
    }

    #[test]
    fn antiderivative_of_generalized_sine() {
        // ∫ (x - x^(m+3)/((m+2)(m+3)) + x^(2m+5)/((m+2)(m+3)(2m+4)(2m+5)))
        let m = 2.0;
        let sin = to_power_series(&make_series(2, m, Sign::Minus, 2).unwrap(), 3).unwrap();
        let a = antiderivative(&sin).unwrap();
        let expected = [
            (0.5, 2.0),
            (-1.0 / ((m + 2.0) * (m + 3.0) * (m + 4.0)), m + 4.0),
            (
                1.0 / ((m + 2.0) * (m + 3.0) * (2.0 * m + 4.0) * (2.0 * m + 5.0) * (2.0 * m + 6.0)),
                2.0 * m + 6.0,
            ),
        ];
        for (t, (c, e)) in a.terms().iter().zip(expected) {
            assert_eq!(t.exponent, e);
            assert!((t.coeff - c).abs() <= 1e-16 * c.abs());
        }
    }

    #[test]
    fn three_term_truncation_hand_sum() {
        let spec = make_series(2, 1.0, Sign::Minus, 1).unwrap();
        let ps = to_power_series(&spec, 3).unwrap();
        let r = eval_power_series(&ps, 1.0, &SummationPolicy::default()).unwrap();
        assert!((r.value - (1.0 - 1.0 / 6.0 + 1.0 / 180.0)).abs() < 1e-16);
        assert!((r.value - 0.838_888_9).abs() < 1e-7);
        assert!(!r.converged);
    }

    #[test]
    fn single_constant_term() {
        let ps = PowerSeries::new(vec![Term::new(1.0, 0.0)]).unwrap();
        for &x in &[0.0, 1.5, -3.0, 1e6] {
            assert_eq!(
                eval_power_series(&ps, x, &SummationPolicy::default())
                    .unwrap()
                    .value,
                1.0
            );
        }
    }

    #[test]
    fn cosine_derivative_at_pi() {
        let sin = to_power_series(&make_series(2, 0.0, Sign::Minus, 2).unwrap(), 30).unwrap();
        let r = eval_power_series(
            &derivative(&sin),
            std::f64::consts::PI,
            &SummationPolicy::default(),
        )
        .unwrap();
        assert!((r.value + 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(PowerSeries::new(vec![Term::new(1.0, 0.0), Term::new(1.0, 0.0)]).is_err());
        assert!(to_power_series(&make_series(1, 0.0, Sign::Plus, 1).unwrap(), 0).is_err());
    }

    #[test]
    fn budget_exceeded() {
        let spec = make_series(2, 0.0, Sign::Minus, 1).unwrap();
        let ps = to_power_series(&spec, 40).unwrap();
        let p = SummationPolicy::new(1e-15, 5, 1e12).unwrap();
        assert!(matches!(
            eval_power_series(&ps, 3.0, &p),
            Err(SeriesError::NoConvergence { .. })
        ));
    }
}
