//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use gseries_core::reductions::chebyshev_grid;
use gseries_core::{
    bessel_solution, count_zeros, damped_solution, eval, eval_calculus, gfn, gfn_eval, integrate,
    jet, leighton_oscillatory, make_series, nonlinear_yyppp_solution, polycoeff_solution, residual,
    riccati_solution, to_exact_series, Family, GFunctionKind, ODESystem, PolyCoeff,
    ReducedSolution, SeriesError, Sign, SummationPolicy,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

type Check = Result<String, String>;
type Reference = fn(f64) -> f64;
type Criterion = (&'static str, fn() -> Check);

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn kind(f: Family, n: f64) -> GFunctionKind {
    GFunctionKind::new(f, n)
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c1_closed_form() -> Check {
    let start = Instant::now();
    let p = SummationPolicy::default();
    let mut worst = 0.0f64;
    for n in [0.0, 1.0, 2.0, 10.0] {
        for x in grid(0.0, 2.0, 50) {
            let v = gfn_eval(kind(Family::GenExp, n), x, &p)
                .map_err(|e| e.to_string())?
                .value;
            let want = (x.powf(n + 1.0) / (n + 1.0)).exp();
            worst = worst.max(((v - want) / want).abs());
        }
    }
    let t = start.elapsed();
    ensure(
        worst <= 1e-12 && t < Duration::from_secs(1),
        format!("max rel err {worst:.2e} (tol 1e-12), {t:?} (limit 1 s)"),
    )
}

fn c2_order_zero() -> Check {
    let p = SummationPolicy::default();
    let mut worst = 0.0f64;
    let mut used = 0;
    let refs: [(Family, Reference); 4] = [
        (Family::GenCos, f64::cos),
        (Family::GenSin, f64::sin),
        (Family::GenCosh, f64::cosh),
        (Family::GenSinh, f64::sinh),
    ];
    for (f, r) in refs {
        for x in grid(0.0, 10.0, 401) {
            match gfn_eval(kind(f, 0.0), x, &p) {
                Ok(e) if e.cancellation_factor < 1e3 && r(x) != 0.0 => {
                    used += 1;
                    worst = worst.max(((e.value - r(x)) / r(x)).abs());
                }
                Ok(_) | Err(SeriesError::CancellationLoss { .. }) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    ensure(
        worst <= 1e-12,
        format!("max rel err {worst:.2e} over {used} points (tol 1e-12)"),
    )
}

fn c3_coefficients() -> Check {
    // Explicit denominators in n: term j carries the factors for l = 1..j.
    type Factors = fn(i64, i64) -> [i64; 2];
    type Form = (Family, bool, i64, fn(i64) -> i64, Factors);
    let forms: [Form; 9] = [
        (Family::GenExp, false, 0, |n| n + 1, |l, n| [l * (n + 1), 1]),
        (
            Family::GenCos,
            false,
            0,
            |n| n + 2,
            |l, n| [l * n + 2 * l - 1, l * n + 2 * l],
        ),
        (
            Family::GenSin,
            false,
            1,
            |n| n + 2,
            |l, n| [l * n + 2 * l, l * n + 2 * l + 1],
        ),
        (
            Family::GenCosh,
            false,
            0,
            |n| n + 2,
            |l, n| [l * n + 2 * l - 1, l * n + 2 * l],
        ),
        (
            Family::GenSinh,
            false,
            1,
            |n| n + 2,
            |l, n| [l * n + 2 * l, l * n + 2 * l + 1],
        ),
        (
            Family::GenCos,
            true,
            0,
            |n| 2 - n,
            |l, n| [l * n - 2 * l + 1, l * n - 2 * l],
        ),
        (
            Family::GenSin,
            true,
            1,
            |n| 2 - n,
            |l, n| [l * n - 2 * l, l * n - 2 * l - 1],
        ),
        (
            Family::GenCosh,
            true,
            0,
            |n| 2 - n,
            |l, n| [l * n - 2 * l + 1, l * n - 2 * l],
        ),
        (
            Family::GenSinh,
            true,
            1,
            |n| 2 - n,
            |l, n| [l * n - 2 * l, l * n - 2 * l - 1],
        ),
    ];
    let mut compared = 0;
    for (family, negative, lead, step, factors) in forms {
        let cases: Vec<(i64, f64)> = match (family, negative) {
            (Family::GenExp, _) => vec![(1, 1.0), (2, 2.0), (10, 10.0), (-4, -4.0)],
            (_, false) => vec![(1, 1.0), (2, 2.0), (10, 10.0)],
            (_, true) => vec![(4, -4.0)],
        };
        let alternating = matches!(family, Family::GenCos | Family::GenSin);
        for (n, order) in cases {
            let got = to_exact_series(&gfn(kind(family, order)).map_err(|e| e.to_string())?, 4)
                .map_err(|e| e.to_string())?;
            let mut denom = BigInt::one();
            for (j, term) in got.terms().iter().enumerate() {
                let j = j as i64;
                if j > 0 {
                    for f in factors(j, n) {
                        denom *= f;
                    }
                }
                let sign = if alternating && j % 2 == 1 { -1 } else { 1 };
                let coeff = BigRational::new(BigInt::from(sign), denom.clone());
                let exponent = BigRational::from_integer(BigInt::from(lead + j * step(n)));
                if term.coeff != coeff || term.exponent != exponent {
                    return Err(format!(
                        "{}_{order} term {j}: {} x^{} expected {coeff} x^{exponent}",
                        family.code(),
                        term.coeff,
                        term.exponent
                    ));
                }
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} series, first 4 terms equal as exact rationals"
    ))
}

fn c4_wronskian() -> Check {
    let p = SummationPolicy::default();
    let mut worst = 0.0f64;
    for m in [0.0, 1.0, 2.0, 5.0] {
        for s in [Sign::Plus, Sign::Minus] {
            let c = make_series(2, m, s, 1).map_err(|e| e.to_string())?;
            let g = make_series(2, m, s, 2).map_err(|e| e.to_string())?;
            for x in grid(0.0, 2.0, 50) {
                let [c0, c1] = jet::<2>(&c, x, &p).map_err(|e| e.to_string())?;
                let [s0, s1] = jet::<2>(&g, x, &p).map_err(|e| e.to_string())?;
                worst = worst.max((c0 * s1 - s0 * c1 - 1.0).abs());
            }
        }
    }
    ensure(
        worst <= 1e-10,
        format!("max |W - 1| = {worst:.2e} (tol 1e-10)"),
    )
}

fn c5_inversion() -> Check {
    let p = SummationPolicy::default();
    let mut worst = 0.0f64;
    for m in [6.0, 10.0] {
        for x in grid(0.5, 3.0, 40) {
            let a = gfn_eval(kind(Family::GenCos, -m), x, &p)
                .map_err(|e| e.to_string())?
                .value;
            let b = x * gfn_eval(kind(Family::GenSin, m - 4.0), 1.0 / x, &p)
                .map_err(|e| e.to_string())?
                .value;
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    ensure(
        worst <= 1e-10,
        format!("max scaled difference {worst:.2e} (tol 1e-10)"),
    )
}

fn c6_oracle() -> Check {
    let start = Instant::now();
    let p = SummationPolicy::default();
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut undefined = 0;
    for d in 1..=3u32 {
        for m in [0.0, 1.0, 2.0, 10.0, -4.0, -10.0] {
            for s in [Sign::Plus, Sign::Minus] {
                for k in 1..=d {
                    let spec = match make_series(d, m, s, k) {
                        Ok(spec) => spec,
                        Err(SeriesError::UndefinedOrder { .. }) => {
                            undefined += 1;
                            continue;
                        }
                        Err(e) => return Err(e.to_string()),
                    };
                    let x0 = if m < 0.0 { 1.0 } else { 0.0 };
                    let y0: Vec<f64> = (0..d as i32)
                        .map(|q| eval_calculus(&spec, q, x0, &p).map(|r| r.value))
                        .collect::<Result<_, _>>()
                        .map_err(|e| e.to_string())?;
                    // Compare on points where the series sum is well conditioned.
                    let ends: &[f64] = if m < 0.0 { &[0.6, 3.0] } else { &[1.5] };
                    let mut num = 0.0f64;
                    let mut scale = y0[0].abs();
                    for &x1 in ends {
                        let pts: Vec<(f64, f64)> = grid(x0, x1, 16)
                            .into_iter()
                            .skip(1)
                            .map_while(|x| eval(&spec, x, &p).ok().map(|r| (x, r.value)))
                            .collect();
                        let Some(&(last, _)) = pts.last() else {
                            continue;
                        };
                        let traj = integrate(&ODESystem::from_spec(&spec), x0, &y0, last, 1e-12)
                            .map_err(|e| e.to_string())?;
                        for (x, v) in pts {
                            scale = scale.max(v.abs());
                            num = num.max((traj.state_at(x).unwrap()[0] - v).abs());
                        }
                    }
                    worst = worst.max(num / scale);
                    cases += 1;
                }
            }
        }
    }
    let t = start.elapsed();
    ensure(
        worst <= 1e-8 && t < Duration::from_secs(30) && cases >= 60,
        format!("{cases} cases ({undefined} undefined orders skipped), max rel diff {worst:.2e} (tol 1e-8), {t:?} (limit 30 s)"),
    )
}

fn c7_reductions() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut record = |name: String, value: f64, tol: f64| {
        ok &= value <= tol;
        lines.push(format!("{name} {value:.1e}"));
    };
    let max_res = |s: &ReducedSolution| -> Result<f64, String> {
        let mut w = 0.0f64;
        for x in s.verification_grid() {
            w = w.max(s.residual(x).map_err(|e| e.to_string())?.abs());
        }
        Ok(w)
    };
    let e = |e: gseries_core::ReductionError| e.to_string();
    for nu in [1.0 / 3.0, 0.25] {
        let s = bessel_solution(nu, 1.0, -0.5).map_err(e)?;
        record(format!("bessel nu={nu:.3}"), max_res(&s)?, 1e-8);
    }
    let cot = riccati_solution(0.0, 0.0, 1.0).map_err(e)?;
    record("riccati m=0".into(), max_res(&cot)?, 1e-8);
    let mut d = 0.0f64;
    for x in cot.verification_grid() {
        d = d.max((cot.eval(x).map_err(e)? - x.cos() / x.sin()).abs());
    }
    record("cot closed form".into(), d, 1e-10);
    let s = riccati_solution(1.0, 1.0, 1.0).map_err(e)?;
    record("riccati m=1".into(), max_res(&s)?, 1e-8);
    for (name, r) in [
        ("0", PolyCoeff::zero()),
        ("c", PolyCoeff::constant(-0.7)),
        ("x", PolyCoeff::monomial(1.0, 1.0)),
    ] {
        let s = damped_solution(&r, 2.0, 1.0, 0.3).map_err(e)?;
        record(format!("damped R={name}"), max_res(&s)?, 1e-8);
    }
    let f = PolyCoeff::new(vec![(1.0, 2.0), (1.0, 0.0)]).map_err(|e| e.to_string())?;
    for branch in [1, 2] {
        let ps = polycoeff_solution(&f, branch, 80).map_err(e)?;
        let r = residual(
            &ps,
            &ODESystem::with_coefficient(f.clone()),
            &chebyshev_grid(0.0, 2.0, 33),
        )
        .map_err(|e| e.to_string())?;
        record(format!("polycoeff branch {branch}"), r, 1e-8);
    }
    for m in [0.0, 2.0] {
        let s = nonlinear_yyppp_solution(m, 0.5, 1.0, 2.0).map_err(e)?;
        record(format!("nonlinear m={m}"), max_res(&s)?, 1e-6);
    }
    ensure(ok, lines.join(", "))
}

fn c8_taxonomy() -> Check {
    let euler = |r: Result<_, SeriesError>| matches!(r, Err(SeriesError::EulerDegenerate { .. }));
    let undefined =
        |r: Result<_, SeriesError>| matches!(r, Err(SeriesError::UndefinedOrder { .. }));
    let ok = euler(gfn(kind(Family::GenExp, -1.0)))
        && undefined(gfn(kind(Family::GenCos, -1.0)))
        && undefined(gfn(kind(Family::GenCos, -2.0)))
        && undefined(gfn(kind(Family::GenSin, -2.0)))
        && undefined(gfn(kind(Family::GenSin, -3.0)))
        && euler(make_series(2, -2.0, Sign::Minus, 1));
    ensure(
        ok,
        "GenExp -1 Euler; GenCos -1,-2 and GenSin -2,-3 undefined; (d=2, m=-2) Euler".into(),
    )
}

fn c9_oscillation() -> Check {
    let one = PolyCoeff::constant(1.0);
    for n in [-1.0, 0.0, 1.0, 2.0, 10.0] {
        if leighton_oscillatory(&one, &PolyCoeff::monomial(1.0, n)) != Ok(true) {
            return Err(format!("Leighton test not satisfied for q = x^{n}"));
        }
    }
    let p = SummationPolicy::unchecked();
    let mut counts = Vec::new();
    for n in [0.0, 2.0, 4.0] {
        let k = kind(Family::GenCos, n);
        counts.push(
            count_zeros(|x| gfn_eval(k, x, &p).map(|r| r.value), (0.0, 5.0), 4000)
                .map_err(|e| e.to_string())?,
        );
    }
    ensure(
        counts.windows(2).all(|w| w[0] <= w[1]),
        format!("Leighton true for n in {{-1,0,1,2,10}}; zero counts on [0,5] {counts:?}"),
    )
}

fn run_bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gseries"))
        .args(args)
        .output()
        .expect("gseries runs")
}

fn c10_figures() -> Check {
    let p = SummationPolicy::default();
    let mut worst: f64 = 0.0;
    for id in 1..=8 {
        let id_s = id.to_string();
        let a = run_bin(&["figure", &id_s]);
        let b = run_bin(&["figure", &id_s]);
        if !a.status.success() || a.stdout != b.stdout || a.stderr != b.stderr {
            return Err(format!("figure {id} failed or differs between runs"));
        }
        let text = String::from_utf8(a.stdout).map_err(|e| e.to_string())?;
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(String::from)
            .collect();
        let rows: Vec<csv::StringRecord> = rdr
            .records()
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for row in &rows {
            let x: f64 = row[0].parse().map_err(|_| "bad x".to_string())?;
            for (label, cell) in header.iter().zip(row.iter()).skip(1) {
                if cell.is_empty() {
                    continue;
                }
                let (code, n) = label.split_once('_').ok_or("bad label")?;
                let k = kind(
                    code.parse()?,
                    n.parse().map_err(|_| "bad order".to_string())?,
                );
                let direct = gfn_eval(k, x, &p).map_err(|e| e.to_string())?.value;
                if cell.parse::<f64>().ok() != Some(direct) {
                    return Err(format!("figure {id} {label} at {x}: {cell} != {direct:e}"));
                }
            }
        }
        if id == 4 || id == 8 {
            let last = rows.last().ok_or("empty table")?;
            let x: f64 = last[0].parse().map_err(|_| "bad x".to_string())?;
            let target = if id == 4 { 1.0 } else { x };
            for cell in last.iter().skip(1) {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| format!("figure {id} undefined at right end"))?;
                worst = worst.max((v / target - 1.0).abs());
            }
        }
    }
    ensure(
        worst <= 0.01,
        format!("figures 1-8 byte-identical across runs and equal to direct evaluation; right-end deviation {worst:.2e} (tol 1e-2)"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed-form equivalence", c1_closed_form),
        ("order-0 trigonometric/hyperbolic", c2_order_zero),
        ("exact series coefficients", c3_coefficients),
        ("Wronskian", c4_wronskian),
        ("inversion identity", c5_inversion),
        ("oracle agreement", c6_oracle),
        ("reduction residuals", c7_reductions),
        ("error taxonomy", c8_taxonomy),
        ("oscillation", c9_oscillation),
        ("figure data", c10_figures),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("PASS criterion {}: {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {msg}", i + 1);
            }
        }
    }
    let v = run_bin(&["validate"]);
    if v.status.success() {
        println!("PASS validate command exits 0");
    } else {
        failed += 1;
        println!("FAIL validate command exited with {:?}", v.status.code());
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
