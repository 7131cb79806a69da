//! Independent checks on the series: an adaptive Runge–Kutta integrator for the defining
//! ODEs, residual measurement, sign-change zero counting and Leighton's oscillation test.

use serde::Serialize;
use thiserror::Error;

use crate::poly::PolyCoeff;
use crate::series::{
    derivative, eval_power_series, PowerSeries, SeriesError, SeriesSpec, Sign, SummationPolicy,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("SingularityReached: integration path touches the singular point x = 0 (at x = {x})")]
    SingularityReached { x: f64 },
    #[error("StepUnderflow at x = {x}: step size {h:e} too small")]
    StepUnderflow { x: f64, h: f64 },
    #[error("ConditioningAbort at x = {x}: {source}")]
    ConditioningAbort { x: f64, source: SeriesError },
    #[error("Unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `y^(d) = σ x^m y`, or `y'' + f(x) y = 0` when a coefficient sum is attached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ODESystem {
    order: u32,
    sign: Sign,
    exponent: f64,
    coefficient: Option<PolyCoeff>,
}

impl ODESystem {
    pub fn power_law(order: u32, sign: Sign, exponent: f64) -> Result<Self, OracleError> {
        if order == 0 {
            return Err(OracleError::InvalidInput(
                "ODE order must be at least 1".into(),
            ));
        }
        Ok(Self {
            order,
            sign,
            exponent,
            coefficient: None,
        })
    }

    pub fn from_spec(spec: &SeriesSpec) -> Self {
        Self {
            order: spec.ode_order(),
            sign: spec.sign(),
            exponent: spec.exponent(),
            coefficient: None,
        }
    }

    /// `y'' + f(x) y = 0`.
    pub fn with_coefficient(f: PolyCoeff) -> Self {
        Self {
            order: 2,
            sign: Sign::Minus,
            exponent: 0.0,
            coefficient: Some(f),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    fn singular_at_zero(&self) -> bool {
        match &self.coefficient {
            Some(f) => f.has_negative_exponent(),
            None => self.exponent < 0.0,
        }
    }

    fn real_powers_only(&self) -> bool {
        match &self.coefficient {
            Some(f) => f.terms().iter().any(|(_, p)| p.fract() != 0.0),
            None => self.exponent.fract() != 0.0,
        }
    }

    /// Multiplier `c(x)` in `y^(d) = c(x) y`.
    fn rhs_factor(&self, x: f64) -> f64 {
        match &self.coefficient {
            Some(f) => -f.eval(x),
            None => {
                let p = if self.exponent == 0.0 {
                    1.0
                } else if self.exponent.fract() == 0.0 {
                    x.powi(self.exponent as i32)
                } else {
                    x.powf(self.exponent)
                };
                self.sign.value() * p
            }
        }
    }

    fn rhs(&self, x: f64, y: &[f64], out: &mut [f64]) {
        let d = y.len();
        out[..d - 1].copy_from_slice(&y[1..]);
        out[d - 1] = self.rhs_factor(x) * y[0];
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
struct Segment {
    x0: f64,
    h: f64,
    cont: [Vec<f64>; 5],
}

impl Segment {
    fn state(&self, x: f64) -> Vec<f64> {
        let theta = (x - self.x0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.cont;
        (0..r1.len())
            .map(|i| r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))))
            .collect()
    }
}

/// Dense output of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    nodes: Vec<(f64, Vec<f64>)>,
    segments: Vec<Segment>,
    tolerance: f64,
}

impl Trajectory {
    /// Accepted step endpoints `(x, [y, y', …, y^(d-1)])`.
    pub fn nodes(&self) -> &[(f64, Vec<f64>)] {
        &self.nodes
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    pub fn end(&self) -> &(f64, Vec<f64>) {
        self.nodes
            .last()
            .expect("trajectory has at least the initial node")
    }

    /// State at any `x` covered by the trajectory, from the 4th-order continuous extension.
    pub fn state_at(&self, x: f64) -> Option<Vec<f64>> {
        let (first, last) = (self.nodes[0].0, self.end().0);
        let (lo, hi) = if first <= last {
            (first, last)
        } else {
            (last, first)
        };
        if !(lo..=hi).contains(&x) {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.nodes[0].1.clone());
        }
        let forward = last >= first;
        let idx = self.segments.partition_point(|s| {
            let end = s.x0 + s.h;
            if forward {
                end < x
            } else {
                end > x
            }
        });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        Some(seg.state(x))
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Adaptive Dormand–Prince 5(4) integration from `x0` to `x1` (either direction) with
/// mixed absolute/relative local error `tol`.
pub fn integrate(
    sys: &ODESystem,
    x0: f64,
    y0: &[f64],
    x1: f64,
    tol: f64,
) -> Result<Trajectory, OracleError> {
    let dim = sys.order as usize;
    if y0.len() != dim {
        return Err(OracleError::InvalidInput(format!(
            "initial state has {} entries, ODE order is {dim}",
            y0.len()
        )));
    }
    if !(tol > 0.0) || !x0.is_finite() || !x1.is_finite() {
        return Err(OracleError::InvalidInput(
            "tolerance must be positive and endpoints finite".into(),
        ));
    }
    if sys.singular_at_zero() && (x0 == 0.0 || x1 == 0.0 || (x0 < 0.0) != (x1 < 0.0)) {
        return Err(OracleError::SingularityReached { x: 0.0 });
    }
    if sys.real_powers_only() && (x0 < 0.0 || x1 < 0.0) {
        return Err(OracleError::InvalidInput(
            "real powers of negative x are not supported".into(),
        ));
    }

    let mut nodes = vec![(x0, y0.to_vec())];
    let mut segments = Vec::new();
    if x0 == x1 {
        return Ok(Trajectory {
            nodes,
            segments,
            tolerance: tol,
        });
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();

    let mut x = x0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    sys.rhs(x, &y, &mut k[0]);
    let mut h = initial_step(&y, &k[0], tol, span);
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];

    for _ in 0..MAX_STEPS {
        if (x1 - x) * dir <= 0.0 {
            return Ok(Trajectory {
                nodes,
                segments,
                tolerance: tol,
            });
        }
        let last = h >= (x1 - x).abs();
        let step = if last { x1 - x } else { dir * h };

        for s in 1..7 {
            for i in 0..dim {
                stage[i] = y[i] + step * (0..s).map(|r| A[s][r] * k[r][i]).sum::<f64>();
            }
            sys.rhs(x + C[s] * step, &stage, &mut k[s]);
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }
        // k[6] is f(x + step, y_new) since row 7 of A equals the 5th-order weights.
        let err = error_norm(&y, &y_new, &k, step, tol);

        if err <= 1.0 {
            let cont = continuous_extension(&y, &y_new, &k, step);
            segments.push(Segment {
                x0: x,
                h: step,
                cont,
            });
            x = if last { x1 } else { x + step };
            y.copy_from_slice(&y_new);
            nodes.push((x, y.clone()));
            k[0] = k[6].clone();
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step.abs() * factor;
        } else {
            h = step.abs() * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(OracleError::StepUnderflow { x, h });
        }
        if h < 1e-14 * x.abs().max(1.0) {
            return Err(OracleError::StepUnderflow { x, h });
        }
    }
    Err(OracleError::StepUnderflow { x: x0, h: 0.0 })
}

fn initial_step(y: &[f64], f: &[f64], tol: f64, span: f64) -> f64 {
    let scale = |v: &[f64]| {
        (v.iter()
            .zip(y)
            .map(|(a, b)| (a / (tol + tol * b.abs())).powi(2))
            .sum::<f64>()
            / y.len() as f64)
            .sqrt()
    };
    let (d0, d1) = (scale(y), scale(f));
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span)
}

fn error_norm(y: &[f64], y_new: &[f64], k: &[Vec<f64>], h: f64, tol: f64) -> f64 {
    let n = y.len();
    let sum: f64 = (0..n)
        .map(|i| {
            let e = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
            let sc = tol + tol * y[i].abs().max(y_new[i].abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n as f64).sqrt()
}

fn continuous_extension(y: &[f64], y_new: &[f64], k: &[Vec<f64>], h: f64) -> [Vec<f64>; 5] {
    let n = y.len();
    let r1 = y.to_vec();
    let r2: Vec<f64> = (0..n).map(|i| y_new[i] - y[i]).collect();
    let r3: Vec<f64> = (0..n).map(|i| h * k[0][i] - r2[i]).collect();
    let r4: Vec<f64> = (0..n).map(|i| r2[i] - h * k[6][i] - r3[i]).collect();
    let r5: Vec<f64> = (0..n)
        .map(|i| h * (0..7).map(|s| D[s] * k[s][i]).sum::<f64>())
        .collect();
    [r1, r2, r3, r4, r5]
}

/// Largest defect of a truncated series in its ODE over `xs`, using term-wise derivatives.
pub fn residual(ps: &PowerSeries, sys: &ODESystem, xs: &[f64]) -> Result<f64, OracleError> {
    let policy = SummationPolicy::unchecked();
    let mut highest = ps.clone();
    for _ in 0..sys.order {
        highest = derivative(&highest);
    }
    let mut worst = 0.0f64;
    for &x in xs {
        let y = eval_power_series(ps, x, &policy)?.value;
        let dy = eval_power_series(&highest, x, &policy)?.value;
        let r = dy - sys.rhs_factor(x) * y;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Zeros of `f` inside `[a, b]`, located by sign changes between `samples` cell-centred
/// sample points and refined by bisection to `1e-10`.
///
/// A failure at a sample point aborts; during refinement a `CancellationLoss` still
/// supplies the sign of the computed value.
pub fn find_zeros<F>(f: F, interval: (f64, f64), samples: usize) -> Result<Vec<f64>, OracleError>
where
    F: Fn(f64) -> Result<f64, SeriesError>,
{
    let (a, b) = interval;
    if !(b > a) || samples < 2 {
        return Err(OracleError::InvalidInput(
            "need a < b and at least 2 samples".into(),
        ));
    }
    let h = (b - a) / samples as f64;
    let xs: Vec<f64> = (0..samples).map(|i| a + (i as f64 + 0.5) * h).collect();
    let values = xs
        .iter()
        .map(|&x| f(x).map_err(|source| OracleError::ConditioningAbort { x, source }))
        .collect::<Result<Vec<_>, _>>()?;

    let sign_of = |x: f64| -> Result<f64, OracleError> {
        match f(x) {
            Ok(v) => Ok(v),
            Err(SeriesError::CancellationLoss { value, .. }) => Ok(value),
            Err(source) => Err(OracleError::ConditioningAbort { x, source }),
        }
    };

    let mut zeros = Vec::new();
    for i in 0..samples - 1 {
        let (mut lo, mut hi) = (xs[i], xs[i + 1]);
        let (flo, fhi) = (values[i], values[i + 1]);
        if flo == 0.0 {
            zeros.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() || fhi == 0.0 {
            continue;
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            let fm = sign_of(mid)?;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
            } else if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        zeros.push(0.5 * (lo + hi));
    }
    if values[samples - 1] == 0.0 {
        zeros.push(xs[samples - 1]);
    }
    Ok(zeros)
}

pub fn count_zeros<F>(f: F, interval: (f64, f64), samples: usize) -> Result<usize, OracleError>
where
    F: Fn(f64) -> Result<f64, SeriesError>,
{
    find_zeros(f, interval, samples).map(|z| z.len())
}

/// Leighton's sufficient condition for `(p y')' + q y = 0` to oscillate on `(0, ∞)`:
/// `∫^∞ 1/p = ∞` and `∫^∞ q = ∞`, decided from the dominant power of each sum.
pub fn leighton_oscillatory(p: &PolyCoeff, q: &PolyCoeff) -> Result<bool, OracleError> {
    let (p_sign, p_exp) = tail_behaviour(p, "p")?;
    let (q_sign, q_exp) = tail_behaviour(q, "q")?;
    if p_sign < 0.0 || q_sign < 0.0 {
        return Ok(false);
    }
    // ∫^∞ x^a dx diverges iff a >= -1; for 1/p the dominant power is -p_exp.
    Ok(-p_exp >= -1.0 && q_exp >= -1.0)
}

/// Sign and exponent of the dominant term, after checking that the sum keeps that sign
/// on `(1, ∞)`.
fn tail_behaviour(f: &PolyCoeff, name: &str) -> Result<(f64, f64), OracleError> {
    let (lead, lead_exp) = f
        .dominant()
        .ok_or_else(|| OracleError::Unsupported(format!("{name} is identically zero")))?;
    let rest: f64 = f
        .terms()
        .iter()
        .filter(|(a, e)| *a != 0.0 && *e != lead_exp)
        .map(|(a, _)| a.abs())
        .sum();
    let next_exp = f
        .terms()
        .iter()
        .filter(|(a, e)| *a != 0.0 && *e < lead_exp)
        .map(|(_, e)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    if rest > 0.0 {
        // For x >= 1 every lower term is bounded by |A_i| x^next, so past this point the
        // leading term wins outright.
        let cross = (rest / lead.abs())
            .powf(1.0 / (lead_exp - next_exp))
            .max(1.0)
            * 1.000_001;
        let n = 4096;
        for i in 0..=n {
            let x = 1.0 + (cross - 1.0) * (i as f64 + 0.5) / (n as f64 + 1.0);
            let v = f.eval(x);
            if v == 0.0 || v.signum() != lead.signum() {
                return Err(OracleError::Unsupported(format!(
                    "{name} changes sign on (1, ∞) near x = {x}"
                )));
            }
        }
    }
    Ok((lead.signum(), lead_exp))
}
