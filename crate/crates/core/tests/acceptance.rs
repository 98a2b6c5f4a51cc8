//! Acceptance suite: one PASS/FAIL line per primary criterion. Runs as a
//! plain binary so the lines are always printed; exits nonzero if any
//! criterion fails.

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use scatcub::cubature::{
    approximate_cubature, default_lscf_degree, lscf_integrate, lscf_weights_in,
};
use scatcub::geometry::{halton, Rect};
use scatcub::harness::{
    format_csv, pointwise, run_convergence, ConvergenceRecord, DegreeSweep, ExperimentConfig,
    FunctionSource, Method, MethodFlags, PointSource, RuleSpec,
};
use scatcub::moving::{MovingInterpConfig, MovingInterpolant};
use scatcub::mshep::{build_ms_cover, fit_ms, ms_weights, MsConfig};
use scatcub::poly::{dim, ChebyshevTensor, PolyBasis, ScaledMonomials, DEFAULT_RANK_TOL};
use scatcub::pum::{build_cover, fit_pum, pu_weights, PumConfig};
use scatcub::rbf::{
    default_epsilon_grid, fit_global, fit_loocv, rippa_errors, KernelFamily, KernelSpec,
};
use scatcub::rules::{chebyshev_moments, gauss_legendre_product, scaled_moments, validate_rule};
use scatcub::testfns::{TestFunction, REFERENCE_DEGREE};
use scatcub::{Domain, Point2, PointSet};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        out.detail = format!(
            "{}; {:.1}s (limit {}s)",
            out.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
        out.pass &= took <= limit;
    }
    out
}

fn unit_data(n: usize, f: impl Fn(Point2) -> f64) -> PointSet {
    halton(n, 0).unwrap().sample(f).unwrap()
}

fn random_points(rng: &mut StdRng, rect: &Rect, n: usize) -> Vec<Point2> {
    (0..n)
        .map(|_| {
            Point2::new(
                rng.gen_range(rect.ax..rect.bx),
                rng.gen_range(rect.ay..rect.by),
            )
        })
        .collect()
}

fn rule_exactness() -> Outcome {
    let rects = [
        Rect::unit(),
        Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(),
        Rect::new(-2.0, 3.0, 0.5, 1.5).unwrap(),
        Rect::new(10.0, 10.5, -3.0, -1.0).unwrap(),
    ];
    let mut worst = 0.0f64;
    for r in &rects {
        for n in 1..=30 {
            let rule = gauss_legendre_product(r, n);
            let moments = scaled_moments(r, ScaledMonomials::new(r.center(), r.half_diagonal(), n));
            worst = worst.max(validate_rule(&rule, &moments).max_relative_moment_residual);
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max residual {worst:.2e} over 4 rectangles, n = 1..30"),
    )
}

fn rippa_identity() -> Outcome {
    let specs = [
        (KernelFamily::Ga, 3.0),
        (KernelFamily::Imq, 3.0),
        (KernelFamily::Mq, 3.0),
        (KernelFamily::W2, 0.5),
    ];
    let f = |p: Point2| TestFunction::F1.eval(p);
    let mut worst = 0.0f64;
    for (family, eps) in specs {
        let spec = KernelSpec::new(family, eps).unwrap();
        for n in [20, 40, 60] {
            let data = unit_data(n, f);
            let rule = rippa_errors(&fit_global(&data, spec).unwrap()).unwrap();
            let pts = data.points();
            let vals = data.values().unwrap();
            let brute: Vec<f64> = (0..n)
                .map(|k| {
                    let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
                    let sub = PointSet::with_values(
                        keep.iter().map(|&i| pts[i]).collect(),
                        keep.iter().map(|&i| vals[i]).collect(),
                    )
                    .unwrap();
                    vals[k] - fit_global(&sub, spec).unwrap().eval(pts[k])
                })
                .collect();
            let scale = brute.iter().fold(0.0f64, |a, e| a.max(e.abs()));
            let diff = rule
                .iter()
                .zip(&brute)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            worst = worst.max(diff / scale);
        }
    }
    outcome(
        worst <= 1e-8,
        format!("max relative mismatch {worst:.2e} (GA, IMQ, MQ, W2; N = 20, 40, 60)"),
    )
}

fn ms_exactness_chain() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let unit = Rect::unit();
    let (mut worst_eval, mut worst_int) = (0.0f64, 0.0f64);
    for d in [1usize, 2, 5, 9] {
        let coefs: Vec<f64> = (0..dim(d)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let basis = ScaledMonomials::new(unit.center(), unit.half_diagonal(), d);
        let g = |p: Point2| basis.eval(&coefs, p);
        let interp = fit_ms(
            &unit_data(400, g),
            &MsConfig {
                degree: d,
                ..Default::default()
            },
        )
        .unwrap();
        let tests = random_points(&mut rng, &unit, 200);
        let gmax = tests.iter().fold(1.0f64, |a, &p| a.max(g(p).abs()));
        for &p in &tests {
            worst_eval = worst_eval.max((interp.eval(p) - g(p)).abs() / gmax);
        }
        let exact: f64 = scaled_moments(&unit, basis)
            .values
            .iter()
            .zip(&coefs)
            .map(|(m, c)| m * c)
            .sum();
        for n in [d, d + 3] {
            let q = approximate_cubature(&gauss_legendre_product(&unit, n), &interp)
                .unwrap()
                .value;
            worst_int = worst_int.max((q - exact).abs() / exact.abs());
        }
    }
    outcome(
        worst_eval <= 1e-10 && worst_int <= 1e-9,
        format!("reproduction {worst_eval:.2e} (tol 1e-10), cubature {worst_int:.2e} (tol 1e-9), d = 1, 2, 5, 9"),
    )
}

fn node_interpolation() -> Outcome {
    let f = |p: Point2| TestFunction::F1.eval(p);
    let data = unit_data(400, f);
    let pts = data.points();
    let vals = data.values().unwrap();
    let fmax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let ms = fit_ms(&data, &MsConfig::default()).unwrap();
    let ms_exact = pts.iter().zip(vals).all(|(&p, &v)| ms.eval(p) == v);

    let rbf = fit_loocv(&data, KernelFamily::Mq, &default_epsilon_grid()).unwrap();
    let rbf_res = pts
        .iter()
        .zip(vals)
        .fold(0.0f64, |a, (&p, &v)| a.max((rbf.eval(p) - v).abs()));
    let rbf_ok = rbf_res <= 1e-8 * (1.0 + fmax);

    let pum = fit_pum(&data, &Domain::unit_square(), &PumConfig::default()).unwrap();
    let pum_res = pts.iter().zip(vals).fold(0.0f64, |a, (&p, &v)| {
        a.max((pum.eval(p).unwrap() - v).abs() / (1.0 + v.abs()))
    });
    let pum_ok = pum_res <= 1e-8;

    let g = |p: Point2| 0.3 + p.x * p.y - 2.0 * p.x.powi(3) + p.y.powi(4) * p.x;
    let poly = unit_data(400, g);
    let mov = MovingInterpolant::new(&poly, &Domain::unit_square(), MovingInterpConfig::default())
        .unwrap();
    let mov_res = poly
        .points()
        .iter()
        .map(|&p| (mov.evaluate(p).unwrap().value - g(p)).abs() / (1.0 + g(p).abs()))
        .fold(0.0f64, f64::max);
    let mov_ok = mov_res <= 1e-12;

    outcome(
        ms_exact && rbf_ok && pum_ok && mov_ok,
        format!(
            "mshep exact={ms_exact}; mq residual {rbf_res:.2e}; pum {pum_res:.2e}; moving (degree-5 data) {mov_res:.2e}"
        ),
    )
}

fn partition_of_unity() -> Outcome {
    let data = halton(400, 0).unwrap();
    let unit = Rect::unit();
    let mut rng = StdRng::seed_from_u64(99);
    let tests = random_points(&mut rng, &unit, 10_000);

    let cover = build_cover(&Domain::unit_square(), data.points(), 25, 1.25).unwrap();
    let mut pum_dev = 0.0f64;
    let mut pum_neg = false;
    for &p in &tests {
        let w = pu_weights(&cover, p).unwrap();
        pum_dev = pum_dev.max((w.iter().map(|x| x.1).sum::<f64>() - 1.0).abs());
        pum_neg |= w.iter().any(|x| x.1 < 0.0);
    }

    let ms_cover = build_ms_cover(&data, 9, dim(9), DEFAULT_RANK_TOL).unwrap();
    let mut ms_dev = 0.0f64;
    let mut ms_neg = false;
    for &p in &tests {
        let w = ms_weights(&ms_cover, 2.0, p).unwrap();
        ms_dev = ms_dev.max((w.iter().sum::<f64>() - 1.0).abs());
        ms_neg |= w.iter().any(|&x| x < 0.0);
    }
    outcome(
        pum_dev <= 1e-12 && ms_dev <= 1e-12 && !pum_neg && !ms_neg,
        format!(
            "pum |sum-1| {pum_dev:.1e}, mshep |sum-1| {ms_dev:.1e}, negatives: {}",
            pum_neg || ms_neg
        ),
    )
}

fn experiment(f: TestFunction, method: Method, n: usize, degrees: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(FunctionSource::Test(f), method);
    cfg.points = PointSource::Halton { n, skip: 0 };
    cfg.degrees = degrees.parse().unwrap();
    cfg
}

fn gap_bound() -> Outcome {
    let mut checked = 0;
    let mut worst_slack = f64::INFINITY;
    let mut failures = Vec::new();
    for f in TestFunction::ALL {
        for method in [
            Method::Disc,
            Method::Mq,
            Method::Pum,
            Method::Mshep9,
            Method::Exactf,
        ] {
            let mut cfg = experiment(f, method, 400, "2:4:30");
            if method == Method::Pum {
                cfg.flags = MethodFlags {
                    eps_grid: Some(scatcub::rbf::log_grid(0.5, 20.0, 12)),
                    ..Default::default()
                };
            }
            for rec in run_convergence(&cfg).unwrap() {
                let rule = gauss_legendre_product(&f.rect(), rec.degree);
                let qf = rule.apply(|p| f.eval(p));
                match (rec.integral, rec.node_gap_bound) {
                    (Some(q), Some(bound)) => {
                        let slack = 1e-14 * (rule.weight_l1() + qf.abs());
                        let gap = (qf - q).abs();
                        worst_slack = worst_slack.min(bound + slack - gap);
                        if gap > bound + slack {
                            failures.push(format!("{}/{}/{}", f.name(), rec.method, rec.degree));
                        }
                        checked += 1;
                    }
                    _ => failures.push(format!(
                        "{}/{}/{} missing",
                        f.name(),
                        rec.method,
                        rec.degree
                    )),
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} records, min slack {worst_slack:.2e}, violations {failures:?}"),
    )
}

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn theorem_order() -> Outcome {
    let f = |p: Point2| (p.x + p.y).exp();
    let data = unit_data(6400, f);
    let interp =
        MovingInterpolant::new(&data, &Domain::unit_square(), MovingInterpConfig::default())
            .unwrap();
    let centers: Vec<Point2> = halton(10, 500)
        .unwrap()
        .points()
        .iter()
        .map(|p| Point2::new(0.45 + 0.1 * p.x, 0.45 + 0.1 * p.y))
        .collect();
    let hs = [0.4, 0.2, 0.1, 0.05];
    let mut pass = true;
    let mut parts = Vec::new();
    for d in 1..=3 {
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                centers
                    .iter()
                    .map(|&c| (interp.evaluate_at_radius(c, d, h).unwrap().0 - f(c)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let s = slope(&hs, &errs);
        pass &= s >= d as f64 + 0.5;
        parts.push(format!("d={d} slope {s:.2} (need {:.1})", d as f64 + 0.5));
    }
    outcome(pass, parts.join(", "))
}

fn stall_level(recs: &[ConvergenceRecord]) -> f64 {
    let mut late: Vec<f64> = recs
        .iter()
        .filter(|r| r.degree >= 20)
        .filter_map(|r| r.relative_error)
        .collect();
    late.sort_by(f64::total_cmp);
    let m = late.len();
    if m % 2 == 1 {
        late[m / 2]
    } else {
        0.5 * (late[m / 2 - 1] + late[m / 2])
    }
}

fn tracks(curve: &[ConvergenceRecord], baseline: &[ConvergenceRecord], stall: f64) -> bool {
    curve.iter().zip(baseline).all(|(c, b)| {
        let (ce, be) = (c.relative_error.unwrap(), b.relative_error.unwrap());
        be < 10.0 * stall || (ce / be).abs().log10().abs() <= 1.0
    })
}

fn figure_trends() -> Outcome {
    let mut notes = Vec::new();

    let cfg = MovingInterpConfig::default();
    let p800 = pointwise(
        TestFunction::F1,
        &PointSource::Halton { n: 800, skip: 0 },
        cfg,
    )
    .unwrap();
    let p1600 = pointwise(
        TestFunction::F1,
        &PointSource::Halton { n: 1600, skip: 0 },
        cfg,
    )
    .unwrap();
    let mean = |rows: &[scatcub::harness::PointwiseRow]| {
        rows.iter().map(|r| r.error).sum::<f64>() / rows.len() as f64
    };
    let mut a = mean(&p1600) <= mean(&p800);
    for rows in [&p800, &p1600] {
        let k = rows.len();
        a &= mean(&rows[..20]) >= mean(&rows[k - 20..]);
    }
    notes.push(format!(
        "(a) mean err 800 {:.2e}, 1600 {:.2e}, boundary/interior 1600 {:.2e}/{:.2e}",
        mean(&p800),
        mean(&p1600),
        mean(&p1600[..20]),
        mean(&p1600[p1600.len() - 20..])
    ));

    let mut b = true;
    for f in [TestFunction::F1, TestFunction::F2] {
        let base = run_convergence(&experiment(f, Method::Exactf, 400, "2:2:30")).unwrap();
        for m in [Method::Disc, Method::Mshep9] {
            let c400 = run_convergence(&experiment(f, m, 400, "2:2:30")).unwrap();
            let c800 = run_convergence(&experiment(f, m, 800, "2:2:30")).unwrap();
            let (s400, s800) = (stall_level(&c400), stall_level(&c800));
            let ok = tracks(&c400, &base, s400) && tracks(&c800, &base, s800) && s800 <= s400;
            b &= ok;
            notes.push(format!(
                "(b) {}/{}: stall 400 {s400:.1e}, 800 {s800:.1e}, ok={ok}",
                f.name(),
                m.name()
            ));
        }
    }

    let ls = run_convergence(&experiment(TestFunction::F1, Method::Lscf, 800, "2:2:30")).unwrap();
    let c = ls
        .iter()
        .all(|r| r.integral.is_some() && r.integral == ls[0].integral);
    notes.push(format!("(c) lscf constant over {} degrees: {c}", ls.len()));
    outcome(a && b && c, notes.join("; "))
}

fn lscf() -> Outcome {
    let data = halton(800, 0).unwrap();
    let n = default_lscf_degree(data.len());
    let rect = Rect::unit();
    let basis = ChebyshevTensor::new(rect, n);
    let moments = chebyshev_moments(&basis);
    let w = lscf_weights_in(&data, &basis, &moments).unwrap();
    let residual_ok = w.moment_residual <= 1e-10;

    let v = basis.matrix(data.points());
    let q = v.clone().qr().q();
    let norm = |x: &nalgebra::DVector<f64>| x.norm();
    let w_vec = nalgebra::DVector::from_column_slice(&w.weights);
    let mut rng = StdRng::seed_from_u64(7);
    let mut minimal = true;
    for _ in 0..20 {
        let mut z = nalgebra::DVector::from_fn(data.len(), |_, _| rng.gen_range(-1.0..1.0));
        z -= &q * (q.transpose() * &z);
        minimal &= norm(&w_vec) <= norm(&(&w_vec + z));
    }

    let mut worst = 0.0f64;
    for _ in 0..5 {
        let coefs: Vec<f64> = (0..dim(n)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut row = vec![0.0; dim(n)];
        let vals: Vec<f64> = data
            .points()
            .iter()
            .map(|&p| {
                basis.fill_row(p, &mut row);
                row.iter().zip(&coefs).map(|(a, b)| a * b).sum()
            })
            .collect();
        let exact: f64 = moments.iter().zip(&coefs).map(|(m, c)| m * c).sum();
        worst = worst.max((lscf_integrate(&w, &vals) - exact).abs() / exact.abs());
    }
    outcome(
        residual_ok && minimal && worst <= 1e-9,
        format!(
            "n = {n}: residual {:.2e}, minimal vs 20 feasible = {minimal}, P_n exactness {worst:.2e}",
            w.moment_residual
        ),
    )
}

fn reference_pipeline() -> Outcome {
    let f2 = TestFunction::F2.rule_integral(REFERENCE_DEGREE);
    let exact = (2.0 * 1f64.atan()).powi(2);
    let f2_rel = (f2 - exact).abs() / exact;
    let mut pass = f2_rel <= 1e-12;
    let mut parts = vec![format!("f2 vs (pi/2)^2 {f2_rel:.1e}")];
    for (f, tol) in [
        (TestFunction::F1, 1e-12),
        (TestFunction::F2, 1e-12),
        (TestFunction::F3, 1e-8),
        (TestFunction::F4, 1e-8),
    ] {
        let a = f.rule_integral(60);
        let b = f.rule_integral(80);
        let rel = (a - b).abs() / b.abs();
        pass &= rel <= tol;
        parts.push(format!("{} 60/80 {rel:.1e} (tol {tol:.0e})", f.name()));
    }
    outcome(pass, parts.join(", "))
}

fn determinism() -> Outcome {
    let mut pass = true;
    let mut runs = 0;
    for m in [
        Method::Disc,
        Method::Mq,
        Method::Mshep9,
        Method::Lscf,
        Method::Exactf,
    ] {
        let cfg = experiment(TestFunction::F1, m, 400, "2:4:30");
        let a = format_csv(&run_convergence(&cfg).unwrap());
        let b = format_csv(&run_convergence(&cfg).unwrap());
        pass &= a == b;
        runs += 1;
    }
    let mut cfg = experiment(TestFunction::F2, Method::Pum, 400, "4:8:28");
    cfg.flags.eps_grid = Some(scatcub::rbf::log_grid(0.5, 20.0, 12));
    pass &=
        format_csv(&run_convergence(&cfg).unwrap()) == format_csv(&run_convergence(&cfg).unwrap());
    let _ = (DegreeSweep::default(), RuleSpec::Gauss(None));
    outcome(
        pass,
        format!(
            "{} configurations run twice, CSV bytes identical = {pass}",
            runs + 1
        ),
    )
}

type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("rule exactness", Some(10), rule_exactness),
        ("Rippa identity", Some(30), rippa_identity),
        ("MS exactness chain", None, ms_exactness_chain),
        ("node interpolation", None, node_interpolation),
        ("partition of unity", None, partition_of_unity),
        ("node gap bound", None, gap_bound),
        ("moving interpolation order", Some(60), theorem_order),
        ("figure trends", None, figure_trends),
        ("LS-CF", None, lscf),
        ("reference pipeline", None, reference_pipeline),
        ("determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let out = timed(limit.map(Duration::from_secs), *check);
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
