//! Classical equations solved through g-functions, each checked by substituting the
//! produced solution back into the original (unreduced) equation.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::oracle::{find_zeros, OracleError};
use crate::poly::PolyCoeff;
use crate::series::{
    check_antiderivative, eval_calculus, make_series, PowerSeries, SeriesError, SeriesSpec, Sign,
    SummationPolicy, Term,
};

/// Number of Chebyshev nodes in a default verification grid.
pub const GRID_POINTS: usize = 33;

/// Below this `|u| / max(|A|, |B|)` the Riccati solution `u'/u` is treated as a pole.
const POLE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("PoleAtEvaluation at x = {x}: u(x) = {u:e}")]
    PoleAtEvaluation { x: f64, u: f64 },
    #[error("DomainError at x = {x}: {reason}")]
    Domain { x: f64, reason: String },
    #[error("UnsupportedExponent: {0} (only nonnegative integer exponents are supported)")]
    UnsupportedExponent(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// `A g^m_c + B g^m_s`; a branch is only constructed when its weight is nonzero, so an
/// undefined branch does not block the other one.
#[derive(Debug, Clone, PartialEq)]
struct Combination {
    a: f64,
    b: f64,
    cos: Option<SeriesSpec>,
    sin: Option<SeriesSpec>,
}

impl Combination {
    fn new(order: f64, a: f64, b: f64) -> Result<Self, SeriesError> {
        let cos = (a != 0.0)
            .then(|| crate::special::gfn(crate::GFunctionKind::new(crate::Family::GenCos, order)))
            .transpose()?;
        let sin = (b != 0.0)
            .then(|| crate::special::gfn(crate::GFunctionKind::new(crate::Family::GenSin, order)))
            .transpose()?;
        Ok(Self { a, b, cos, sin })
    }

    /// `order`-th term-wise derivative (negative: antiderivative) of the combination.
    fn calculus(&self, order: i32, x: f64, policy: &SummationPolicy) -> Result<f64, SeriesError> {
        let mut v = 0.0;
        if let Some(spec) = &self.cos {
            v += self.a * eval_calculus(spec, order, x, policy)?.value;
        }
        if let Some(spec) = &self.sin {
            v += self.b * eval_calculus(spec, order, x, policy)?.value;
        }
        Ok(v)
    }

    /// Only the leading entry is subject to the cancellation limit; the derivatives feed
    /// chain-rule formulas where an absolute error is what counts, and they pass through
    /// zero inside the interval.
    fn jet<const N: usize>(
        &self,
        first: i32,
        x: f64,
        policy: &SummationPolicy,
    ) -> Result<[f64; N], SeriesError> {
        let relaxed = policy.with_cancel_limit(f64::INFINITY)?;
        let mut out = [0.0; N];
        for (i, slot) in out.iter_mut().enumerate() {
            let p = if i == 0 { policy } else { &relaxed };
            *slot = self.calculus(first + i as i32, x, p)?;
        }
        Ok(out)
    }

    fn weight(&self) -> f64 {
        self.a.abs().max(self.b.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Solver {
    Bessel {
        nu: f64,
        inner: Combination,
    },
    Riccati {
        m: f64,
        u: Combination,
    },
    Damped {
        m: f64,
        r: PolyCoeff,
        r_prime: PolyCoeff,
        r_integral: PolyCoeff,
        u: Combination,
    },
    Nonlinear {
        m: f64,
        c: f64,
        w: Combination,
    },
}

/// Outcome of a residual sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub max_residual: f64,
    pub worst_x: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// A solution of a named equation built from g-functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    description: String,
    components: (f64, f64),
    interval: (f64, f64),
    tolerance: f64,
    policy: SummationPolicy,
    solver: Solver,
}

/// Bessel's equation `x² y'' + x y' + (x² - ν²) y = 0` via
/// `y = (2ν/x)^ν [A g^q_c(r) + B g^q_s(r)]`, `r = (x / 2ν)^(2ν)`, `q = 1/ν - 2`.
pub fn bessel_solution(nu: f64, a: f64, b: f64) -> Result<ReducedSolution, ReductionError> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(ReductionError::InvalidParameter(format!(
            "ν = {nu} must be positive"
        )));
    }
    let q = 1.0 / nu - 2.0;
    Ok(ReducedSolution {
        description: format!(
            "Bessel order {nu}: x = 2ν r^(1/(2ν)), y = u r^(-1/2); u'' + r^{q} u = 0, u = A g^{q}_c + B g^{q}_s"
        ),
        components: (a, b),
        interval: (0.5, 4.0),
        tolerance: 1e-8,
        policy: SummationPolicy::default(),
        solver: Solver::Bessel {
            nu,
            inner: Combination::new(q, a, b)?,
        },
    })
}

/// Riccati equation `y' + y² + x^m = 0` via `y = u'/u`, `u = A g^m_c + B g^m_s`.
///
/// The default verification interval ends short of the first zero of `u`.
pub fn riccati_solution(m: f64, a: f64, b: f64) -> Result<ReducedSolution, ReductionError> {
    if a == 0.0 && b == 0.0 {
        return Err(ReductionError::InvalidParameter(
            "(A, B) must not both vanish".into(),
        ));
    }
    let u = Combination::new(m, a, b)?;
    let start = if m < 0.0 {
        1.0
    } else if a == 0.0 {
        0.1
    } else {
        0.0
    };
    let end = 3.0;
    let policy = SummationPolicy::default();
    let probe = |x: f64| u.calculus(0, x, &SummationPolicy::unchecked());
    let first_zero = find_zeros(probe, (start, end), 600)?
        .into_iter()
        .find(|&z| z > start + 1e-9);
    let interval = match first_zero {
        Some(z) => (start, start + 0.95 * (z - start)),
        None => (start, end),
    };
    Ok(ReducedSolution {
        description: format!("Riccati y' + y^2 + x^{m} = 0: y = u'/u, u'' + x^{m} u = 0"),
        components: (a, b),
        interval,
        tolerance: 1e-8,
        policy,
        solver: Solver::Riccati { m, u },
    })
}

/// `y'' + 2R y' + (R² + R' + x^m) y = 0` via `y = e^(-∫₀ˣ R) [A g^m_c + B g^m_s]`.
pub fn damped_solution(
    r: &PolyCoeff,
    m: f64,
    a: f64,
    b: f64,
) -> Result<ReducedSolution, ReductionError> {
    if let Some(&(_, p)) = r.terms().iter().find(|(_, p)| *p < 0.0 || p.fract() != 0.0) {
        return Err(ReductionError::UnsupportedExponent(p));
    }
    let r_integral = r
        .integral_from_zero()
        .expect("nonnegative exponents integrate termwise");
    Ok(ReducedSolution {
        description: format!("damped: y = exp(-∫R) u with R = {r}, u'' + x^{m} u = 0"),
        components: (a, b),
        interval: (0.0, 2.0),
        tolerance: 1e-8,
        policy: SummationPolicy::default(),
        solver: Solver::Damped {
            m,
            r: r.clone(),
            r_prime: r.derivative(),
            r_integral,
            u: Combination::new(m, a, b)?,
        },
    })
}

/// `y y''' + 3 y' y'' + x^m y y' = 0` via `w = y y'`, `w'' + x^m w = 0`:
/// `y = sqrt(2 W + C)` with `W` the zero-constant antiderivative of `A g^m_c + B g^m_s`.
pub fn nonlinear_yyppp_solution(
    m: f64,
    a: f64,
    b: f64,
    c: f64,
) -> Result<ReducedSolution, ReductionError> {
    let w = Combination::new(m, a, b)?;
    for spec in w.cos.iter().chain(w.sin.iter()) {
        check_antiderivative(spec, 1)?;
    }
    Ok(ReducedSolution {
        description: format!(
            "nonlinear y y''' + 3y'y'' + x^{m} y y' = 0: w = y y', y = sqrt(2∫w + C)"
        ),
        components: (a, b),
        interval: (0.0, 1.5),
        tolerance: 1e-6,
        policy: SummationPolicy::default(),
        solver: Solver::Nonlinear { m, c, w },
    })
}

/// Taylor solution of `y'' + f(x) y = 0` about 0 with integer exponents in `f`;
/// branch 1 has `y(0) = 1, y'(0) = 0`, branch 2 has `y(0) = 0, y'(0) = 1`.
pub fn polycoeff_solution(
    f: &PolyCoeff,
    branch: u32,
    n_terms: usize,
) -> Result<PowerSeries, ReductionError> {
    if let Some(&(_, p)) = f.terms().iter().find(|(_, p)| *p < 0.0 || p.fract() != 0.0) {
        return Err(ReductionError::UnsupportedExponent(p));
    }
    if branch != 1 && branch != 2 {
        return Err(ReductionError::InvalidParameter(format!(
            "branch {branch} must be 1 or 2"
        )));
    }
    if n_terms == 0 {
        return Err(SeriesError::InvalidTruncation.into());
    }
    let mut c = vec![0.0f64; n_terms.max(2)];
    c[(branch - 1) as usize] = 1.0;
    for k in 0..n_terms.saturating_sub(2) {
        let conv: f64 = f
            .terms()
            .iter()
            .filter_map(|&(a, p)| k.checked_sub(p as usize).map(|idx| a * c[idx]))
            .sum();
        c[k + 2] = -conv / ((k + 1) as f64 * (k + 2) as f64);
    }
    c.truncate(n_terms);
    Ok(PowerSeries::new(
        c.into_iter()
            .enumerate()
            .map(|(k, v)| Term::new(v, k as f64))
            .collect(),
    )?)
}

/// `n` first-kind Chebyshev nodes on `[a, b]` in increasing order (endpoints excluded).
pub fn chebyshev_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n)
        .map(|i| {
            let t = ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect();
    xs.reverse();
    xs
}

impl ReducedSolution {
    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn components(&self) -> (f64, f64) {
        self.components
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_interval(mut self, a: f64, b: f64) -> Self {
        self.interval = (a, b);
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_policy(mut self, policy: SummationPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Order of the original equation.
    pub fn equation_order(&self) -> usize {
        match self.solver {
            Solver::Riccati { .. } => 1,
            Solver::Bessel { .. } | Solver::Damped { .. } => 2,
            Solver::Nonlinear { .. } => 3,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ReductionError> {
        Ok(self.jet(x)?[0])
    }

    /// `[y, y', …]` up to the order of the original equation, from term-wise series
    /// derivatives and the chain rule.
    pub fn jet(&self, x: f64) -> Result<Vec<f64>, ReductionError> {
        let p = &self.policy;
        match &self.solver {
            Solver::Bessel { nu, inner } => {
                if !(x > 0.0) {
                    return Err(ReductionError::Domain {
                        x,
                        reason: "Bessel solution is defined for x > 0".into(),
                    });
                }
                let nu = *nu;
                let r = (x / (2.0 * nu)).powf(2.0 * nu);
                let [u, ur, urr] = inner.jet::<3>(0, r, p)?;
                let phi = (2.0 * nu / x).powf(nu);
                let dphi = -nu * phi / x;
                let d2phi = nu * (nu + 1.0) * phi / (x * x);
                let dr = 2.0 * nu * r / x;
                let d2r = 2.0 * nu * (2.0 * nu - 1.0) * r / (x * x);
                let y = phi * u;
                let dy = dphi * u + phi * ur * dr;
                let d2y = d2phi * u + 2.0 * dphi * ur * dr + phi * (urr * dr * dr + ur * d2r);
                Ok(vec![y, dy, d2y])
            }
            Solver::Riccati { u, .. } => {
                let [u0, u1, u2] = u.jet::<3>(0, x, &SummationPolicy::unchecked())?;
                if u0.abs() <= POLE_THRESHOLD * u.weight() {
                    return Err(ReductionError::PoleAtEvaluation { x, u: u0 });
                }
                let y = u1 / u0;
                Ok(vec![y, u2 / u0 - y * y])
            }
            Solver::Damped {
                r,
                r_prime,
                r_integral,
                u,
                ..
            } => {
                let [u0, u1, u2] = u.jet::<3>(0, x, p)?;
                let damp = (-r_integral.eval(x)).exp();
                let (rv, rp) = (r.eval(x), r_prime.eval(x));
                Ok(vec![
                    damp * u0,
                    damp * (u1 - rv * u0),
                    damp * (u2 - 2.0 * rv * u1 - rp * u0 + rv * rv * u0),
                ])
            }
            Solver::Nonlinear { c, w, .. } => {
                let [big_w, w0, w1, w2] = w.jet::<4>(-1, x, p)?;
                let f = 2.0 * big_w + c;
                if !(f > 0.0) {
                    return Err(ReductionError::Domain {
                        x,
                        reason: format!("2W + C = {f:e} is not positive"),
                    });
                }
                let y = f.sqrt();
                let y1 = w0 / y;
                let y2 = (w1 - y1 * y1) / y;
                let y3 = (w2 - 3.0 * y1 * y2) / y;
                Ok(vec![y, y1, y2, y3])
            }
        }
    }

    /// Defect of the original equation at `x`.
    pub fn residual(&self, x: f64) -> Result<f64, ReductionError> {
        let j = self.jet(x)?;
        Ok(match &self.solver {
            Solver::Bessel { nu, .. } => x * x * j[2] + x * j[1] + (x * x - nu * nu) * j[0],
            Solver::Riccati { m, .. } => j[1] + j[0] * j[0] + power(x, *m, x)?,
            Solver::Damped { m, r, r_prime, .. } => {
                let (rv, rp) = (r.eval(x), r_prime.eval(x));
                j[2] + 2.0 * rv * j[1] + (rv * rv + rp + power(x, *m, x)?) * j[0]
            }
            Solver::Nonlinear { m, .. } => {
                j[0] * j[3] + 3.0 * j[1] * j[2] + power(x, *m, x)? * j[0] * j[1]
            }
        })
    }

    pub fn verification_grid(&self) -> Vec<f64> {
        chebyshev_grid(self.interval.0, self.interval.1, GRID_POINTS)
    }

    /// Largest residual of the original equation over the verification grid.
    pub fn verify(&self) -> Result<Verification, ReductionError> {
        let mut worst = (0.0f64, self.interval.0);
        for x in self.verification_grid() {
            let r = self.residual(x)?.abs();
            if !(r <= worst.0) {
                worst = (r, x);
            }
        }
        Ok(Verification {
            max_residual: worst.0,
            worst_x: worst.1,
            tolerance: self.tolerance,
            passed: worst.0 <= self.tolerance,
        })
    }

    /// Largest relative disagreement between the chain-rule derivatives of `jet` and
    /// fourth-order central differences of `eval` at `points`.
    pub fn finite_difference_check(&self, points: &[f64], h: f64) -> Result<f64, ReductionError> {
        let mut worst = 0.0f64;
        for &x in points {
            let j = self.jet(x)?;
            let f = |k: i32| self.eval(x + f64::from(k) * h);
            let (m3, m2, m1, p1, p2, p3) = (f(-3)?, f(-2)?, f(-1)?, f(1)?, f(2)?, f(3)?);
            let fd = [
                (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h),
                (-p2 + 16.0 * p1 - 30.0 * j[0] + 16.0 * m1 - m2) / (12.0 * h * h),
                (-p3 + 8.0 * p2 - 13.0 * p1 + 13.0 * m1 - 8.0 * m2 + m3) / (8.0 * h * h * h),
            ];
            for (k, approx) in fd.iter().enumerate().take(j.len() - 1) {
                let exact = j[k + 1];
                worst = worst.max((approx - exact).abs() / exact.abs().max(1.0));
            }
        }
        Ok(worst)
    }
}

fn power(x: f64, m: f64, at: f64) -> Result<f64, ReductionError> {
    if m == 0.0 {
        return Ok(1.0);
    }
    if m.fract() == 0.0 {
        if x == 0.0 && m < 0.0 {
            return Err(ReductionError::Domain {
                x: at,
                reason: "x^m is singular at 0".into(),
            });
        }
        return Ok(x.powi(m as i32));
    }
    if x < 0.0 {
        return Err(ReductionError::Domain {
            x: at,
            reason: "real power of negative x".into(),
        });
    }
    Ok(x.powf(m))
}

/// `g^m_c` (branch 1) or `g^m_s` (branch 2).
pub fn branch_spec(m: f64, branch: u32) -> Result<SeriesSpec, SeriesError> {
    make_series(2, m, Sign::Minus, branch)
}
