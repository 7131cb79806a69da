//! Lazy summation of a [`SeriesSpec`] and of its term-wise derivatives and antiderivatives.
//!
//! The running term `c_j x^(e_j)` is advanced by multiplying with `σ x^s / Π(e_{j+1} - i)`
//! in double-double arithmetic. For integer `s` the power `x^s` is formed exactly, so the
//! only rounding left in each term is the ~1e-32 of the double-double products and the
//! final sum is accurate far past the point where plain `f64` summation would have lost
//! every digit to cancellation.

use super::{is_integer, EvalResult, SeriesError, SeriesSpec, SummationPolicy};
use crate::dd::DoubleDouble;

/// Sums the series of `spec` at `x`.
pub fn eval(
    spec: &SeriesSpec,
    x: f64,
    policy: &SummationPolicy,
) -> Result<EvalResult, SeriesError> {
    eval_calculus(spec, 0, x, policy)
}

/// Sums the `order`-th term-wise derivative of the series (`order < 0` means `|order|`
/// antiderivatives with all integration constants zero).
pub fn eval_calculus(
    spec: &SeriesSpec,
    order: i32,
    x: f64,
    policy: &SummationPolicy,
) -> Result<EvalResult, SeriesError> {
    if !x.is_finite() {
        return Err(SeriesError::Domain {
            x,
            reason: "argument is not finite".into(),
        });
    }
    if order < 0 {
        check_antiderivative(spec, order.unsigned_abs())?;
    }
    let s = spec.step();
    if x < 0.0 && !spec.has_integer_exponents() {
        return Err(SeriesError::Domain {
            x,
            reason: format!("real power with non-integer step {s} of a negative argument"),
        });
    }
    if x == 0.0 {
        if s < 0.0 {
            return Err(SeriesError::Domain {
                x,
                reason: "descending series is singular at x = 0".into(),
            });
        }
        return limit_at_zero(spec, order, x);
    }

    let sigma = spec.sign().value();
    let xd = DoubleDouble::new(x);
    let ratio_power = if spec.has_integer_exponents() {
        xd.powi(s as i64)
    } else {
        DoubleDouble::new(x.powf(s))
    } * sigma;
    let scale = xd.powi(-i64::from(order));

    let mut term = xd.powi(i64::from(spec.branch()) - 1);
    let mut sum = DoubleDouble::ZERO;
    let mut max_abs = 0.0f64;
    let mut prev: Option<f64> = None;
    let tol = policy.rel_tol();

    for j in 0..policy.max_terms() {
        let e = spec.term_exponent(j);
        let contrib = term * calculus_multiplier(e, order) * scale;
        if !contrib.is_finite() {
            return Err(SeriesError::Overflow { x, term: j });
        }
        sum = sum + contrib;
        let mag = contrib.hi.abs();
        max_abs = max_abs.max(mag).max(sum.hi.abs());

        let bound = tol * sum.hi.abs();
        if let Some(p) = prev {
            if p <= bound && mag <= bound && mag <= p {
                return finish(x, sum, j + 1, max_abs, true, policy);
            }
        }
        prev = Some(mag);

        let next = spec.factor_product(spec.term_exponent(j + 1));
        term = term * ratio_power / next;
        if !term.is_finite() {
            return Err(SeriesError::Overflow { x, term: j + 1 });
        }
    }
    Err(SeriesError::NoConvergence {
        x,
        terms: policy.max_terms(),
    })
}

fn finish(
    x: f64,
    sum: DoubleDouble,
    terms_used: usize,
    max_abs: f64,
    converged: bool,
    policy: &SummationPolicy,
) -> Result<EvalResult, SeriesError> {
    let value = sum.to_f64();
    let cancellation_factor = max_abs / value.abs().max(f64::MIN_POSITIVE);
    if cancellation_factor > policy.cancel_limit() {
        return Err(SeriesError::CancellationLoss {
            x,
            factor: cancellation_factor,
            value,
        });
    }
    Ok(EvalResult {
        value,
        terms_used,
        max_term_magnitude: max_abs,
        cancellation_factor,
        converged,
    })
}

/// Multiplier turning `x^e` into its `order`-th term-wise derivative (times `x^-order`).
pub(crate) fn calculus_multiplier(e: f64, order: i32) -> DoubleDouble {
    if order >= 0 {
        (0..order).fold(DoubleDouble::ONE, |acc, l| acc * (e - f64::from(l)))
    } else {
        let denom = (1..=-order).fold(DoubleDouble::ONE, |acc, l| acc * (e + f64::from(l)));
        DoubleDouble::ONE / denom
    }
}

/// Rejects antiderivatives that would integrate some `x^-1`.
pub(crate) fn check_antiderivative(spec: &SeriesSpec, count: u32) -> Result<(), SeriesError> {
    let s = spec.step();
    for l in 1..=count {
        // e_j + l - 1 = -1  <=>  j = -(lead + l) / s
        let t = -(spec.leading_exponent() + f64::from(l)) / s;
        if t >= 0.0 && is_integer(t) {
            return Err(SeriesError::ExponentMinusOne { term: t as usize });
        }
    }
    Ok(())
}

/// Exact value at `x = 0` of an ascending series: only the terms whose shifted exponent
/// is zero survive.
fn limit_at_zero(spec: &SeriesSpec, order: i32, x: f64) -> Result<EvalResult, SeriesError> {
    let mut sum = DoubleDouble::ZERO;
    let mut used = 0;
    for (j, c) in spec.coefficients().enumerate() {
        let e = spec.term_exponent(j);
        let shifted = e - f64::from(order);
        if shifted > 0.0 {
            break;
        }
        used = j + 1;
        let mult = calculus_multiplier(e, order);
        if mult.is_zero() {
            continue;
        }
        if shifted < 0.0 {
            return Err(SeriesError::Domain {
                x,
                reason: format!("term x^{shifted} is singular at x = 0"),
            });
        }
        sum = sum + c * mult;
    }
    let value = sum.to_f64();
    Ok(EvalResult {
        value,
        terms_used: used.max(1),
        max_term_magnitude: value.abs(),
        cancellation_factor: if value == 0.0 { 0.0 } else { 1.0 },
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_series, Sign};
    use std::f64::consts::PI;

    fn policy() -> SummationPolicy {
        SummationPolicy::default()
    }

    #[test]
    fn exponential_of_cube() {
        let spec = make_series(1, 2.0, Sign::Plus, 1).unwrap();
        let r = eval(&spec, 1.0, &policy()).unwrap();
        assert!((r.value - (1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!(r.converged);
        assert!(r.cancellation_factor >= 1.0);
    }

    #[test]
    fn cosine_at_pi() {
        let spec = make_series(2, 0.0, Sign::Minus, 1).unwrap();
        let r = eval(&spec, PI, &policy()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn airy_cosine_at_one() {
        // Partial sums of 1 - x^3/6 + x^6/180 - ... summed by hand until terms < 1e-12.
        let mut t = 1.0f64;
        let mut total = 1.0;
        let mut e = 0.0;
        loop {
            let e1 = e + 3.0;
            t *= -1.0 / (e1 * (e1 - 1.0));
            total += t;
            e = e1;
            if t.abs() < 1e-12 {
                break;
            }
        }
        let spec = make_series(2, 1.0, Sign::Minus, 1).unwrap();
        let r = eval(&spec, 1.0, &policy()).unwrap();
        assert!((r.value - total).abs() < 1e-12);
        assert!((r.value - 0.838_812).abs() < 1e-6);
    }

    #[test]
    fn cancellation_loss_for_high_order_cosine() {
        let spec = make_series(2, 10.0, Sign::Minus, 1).unwrap();
        assert!(eval(&spec, 1.5, &policy()).is_ok());
        let mut hit = None;
        let mut x = 1.0;
        while x < 6.0 {
            if let Err(SeriesError::CancellationLoss { .. }) = eval(&spec, x, &policy()) {
                hit = Some(x);
                break;
            }
            x += 0.01;
        }
        let hit = hit.expect("cancellation loss should occur below x = 6");
        assert!(hit > 2.0 && hit < 4.0, "first loss at {hit}");
    }

    #[test]
    fn values_at_zero() {
        let cos = make_series(2, 0.0, Sign::Minus, 1).unwrap();
        let sin = make_series(2, 0.0, Sign::Minus, 2).unwrap();
        assert_eq!(eval(&cos, 0.0, &policy()).unwrap().value, 1.0);
        assert_eq!(eval(&sin, 0.0, &policy()).unwrap().value, 0.0);
        assert_eq!(eval_calculus(&sin, 1, 0.0, &policy()).unwrap().value, 1.0);
        assert_eq!(eval_calculus(&cos, 2, 0.0, &policy()).unwrap().value, -1.0);
        assert_eq!(eval_calculus(&cos, 1, 0.0, &policy()).unwrap().value, 0.0);
    }

    #[test]
    fn fractional_step_at_zero_singular_derivative() {
        // s = 1/2: second term x^(1/2) has an infinite derivative at 0.
        let spec = make_series(1, -0.5, Sign::Plus, 1).unwrap();
        assert_eq!(eval(&spec, 0.0, &policy()).unwrap().value, 1.0);
        assert!(matches!(
            eval_calculus(&spec, 1, 0.0, &policy()),
            Err(SeriesError::Domain { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        let frac = make_series(2, 0.5, Sign::Minus, 1).unwrap();
        assert!(matches!(
            eval(&frac, -1.0, &policy()),
            Err(SeriesError::Domain { .. })
        ));
        let neg = make_series(2, -4.0, Sign::Minus, 1).unwrap();
        assert!(matches!(
            eval(&neg, 0.0, &policy()),
            Err(SeriesError::Domain { .. })
        ));
        let cos = make_series(2, 0.0, Sign::Minus, 1).unwrap();
        assert!((eval(&cos, -1.0, &policy()).unwrap().value - 1f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn no_convergence_with_tiny_budget() {
        let spec = make_series(2, 0.0, Sign::Minus, 1).unwrap();
        let p = SummationPolicy::new(1e-15, 3, 1e12).unwrap();
        assert!(matches!(
            eval(&spec, 2.0, &p),
            Err(SeriesError::NoConvergence { terms: 3, .. })
        ));
    }

    #[test]
    fn overflow_is_reported() {
        let spec = make_series(1, 10.0, Sign::Plus, 1).unwrap();
        assert!(matches!(
            eval(&spec, 3.0, &policy()),
            Err(SeriesError::Overflow { .. })
        ));
    }

    #[test]
    fn antiderivative_of_sine_is_one_minus_cosine() {
        let sin = make_series(2, 0.0, Sign::Minus, 2).unwrap();
        for &x in &[0.3, 1.0, 2.5] {
            let r = eval_calculus(&sin, -1, x, &policy()).unwrap();
            assert!((r.value - (1.0 - f64::cos(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn antiderivative_log_case_rejected() {
        // d = 1, m = -2: e_1 = -1, integrating it needs a logarithm.
        let spec = make_series(1, -2.0, Sign::Plus, 1).unwrap();
        assert_eq!(
            eval_calculus(&spec, -1, 2.0, &policy()),
            Err(SeriesError::ExponentMinusOne { term: 1 })
        );
    }

    #[test]
    fn descending_series_converges() {
        // g^{-4}_c(x) = x sin(1/x)
        let spec = make_series(2, -4.0, Sign::Minus, 1).unwrap();
        for &x in &[0.5, 1.0, 3.0] {
            let r = eval(&spec, x, &policy()).unwrap();
            assert!((r.value - x * (1.0 / x).sin()).abs() < 1e-14, "x = {x}");
        }
    }
}
