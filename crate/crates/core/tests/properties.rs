use std::sync::OnceLock;

use approx::assert_relative_eq;
use proptest::prelude::*;

use scatcub::cubature::{approximate_cubature_with_truth, ExactFunction};
use scatcub::geometry::{halton, Rect};
use scatcub::mshep::{build_ms_cover, ms_weights, ShepardCover};
use scatcub::poly::{dim, leja_select, multi_indices, DEFAULT_RANK_TOL};
use scatcub::pum::{build_cover, pu_weights, PumCover};
use scatcub::rules::{format_rule, gauss_legendre_product, parse_rule};
use scatcub::{Domain, Point2, PointSet};

fn data() -> &'static PointSet {
    static DATA: OnceLock<PointSet> = OnceLock::new();
    DATA.get_or_init(|| halton(300, 0).unwrap().sample(|p| p.x + p.y).unwrap())
}

fn pum_cover() -> &'static PumCover {
    static COVER: OnceLock<PumCover> = OnceLock::new();
    COVER.get_or_init(|| build_cover(&Domain::unit_square(), data().points(), 25, 1.25).unwrap())
}

fn ms_cover() -> &'static ShepardCover {
    static COVER: OnceLock<ShepardCover> = OnceLock::new();
    COVER.get_or_init(|| build_ms_cover(data(), 2, dim(2), DEFAULT_RANK_TOL).unwrap())
}

fn unit_point() -> impl Strategy<Value = Point2> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

/// Polynomial of total degree `n` with coefficients in graded order.
fn poly_eval(coefs: &[f64], n: usize, p: Point2) -> f64 {
    multi_indices(n)
        .iter()
        .zip(coefs)
        .map(|((a, b), c)| c * p.x.powi(a as i32) * p.y.powi(b as i32))
        .sum()
}

/// Exact integral of the same polynomial over a rectangle.
fn poly_integral(coefs: &[f64], n: usize, r: &Rect) -> f64 {
    let mono =
        |lo: f64, hi: f64, k: u32| (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k + 1) as f64;
    multi_indices(n)
        .iter()
        .zip(coefs)
        .map(|((a, b), c)| c * mono(r.ax, r.bx, a) * mono(r.ay, r.by, b))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pum_weights_partition_unity(p in unit_point()) {
        let w = pu_weights(pum_cover(), p).unwrap();
        let sum: f64 = w.iter().map(|e| e.1).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|e| e.1 >= 0.0));
    }

    #[test]
    fn ms_weights_partition_unity(p in unit_point(), mu in 2.1..6.0f64) {
        let w = ms_weights(ms_cover(), mu, p).unwrap();
        let sum: f64 = w.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn leja_sequences_are_nested(
        seed in 0usize..1000,
        cx in 0.2..0.8f64,
        cy in 0.2..0.8f64,
        d in 1usize..6,
    ) {
        let cand = halton(120, seed).unwrap();
        let c = Point2::new(cx, cy);
        let hi = leja_select(cand.points(), c, 1.0, d, DEFAULT_RANK_TOL).unwrap();
        let lo = leja_select(cand.points(), c, 1.0, d - 1, DEFAULT_RANK_TOL).unwrap();
        prop_assert_eq!(&hi.selected()[..dim(d - 1)], lo.selected());
    }

    #[test]
    fn gauss_rules_integrate_polynomials(
        n in 0usize..16,
        ax in -2.0..1.0f64,
        w in 0.1..3.0f64,
        ay in -2.0..1.0f64,
        h in 0.1..3.0f64,
        raw in prop::collection::vec(-1.0..1.0f64, dim(15)),
    ) {
        let rect = Rect::new(ax, ax + w, ay, ay + h).unwrap();
        let coefs = &raw[..dim(n)];
        let rule = gauss_legendre_product(&rect, n);
        // Bound on the integral of the absolute polynomial, sum |c| M^|alpha| area.
        let m = [ax, ax + w, ay, ay + h].iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let scale: f64 = multi_indices(n)
            .iter()
            .zip(coefs)
            .map(|((a, b), c)| c.abs() * m.powi((a + b) as i32))
            .sum::<f64>()
            * rect.area();
        let err = (rule.apply(|p| poly_eval(coefs, n, p)) - poly_integral(coefs, n, &rect)).abs();
        prop_assert!(err <= 1e-13 * scale.max(1.0), "err {err} scale {scale}");
        prop_assert!(rule.weights.iter().all(|&v| v > 0.0));
        prop_assert!(rule.nodes.iter().all(|&p| rect.contains(p)));
    }

    #[test]
    fn node_gap_bounds_the_cubature_gap(
        n in 1usize..20,
        amp in -1e-3..1e-3f64,
        k in 1.0..8.0f64,
    ) {
        let rule = gauss_legendre_product(&Rect::unit(), n);
        let f = |p: Point2| (p.x * 3.0).exp() * p.y.cos();
        let psi = ExactFunction(move |p: Point2| f(p) + amp * (k * p.x).sin() * (k * p.y + 0.3).cos());
        let res = approximate_cubature_with_truth(&rule, &psi, Some(&f)).unwrap();
        let gap = (rule.apply(f) - res.value).abs();
        prop_assert!(gap <= res.node_bound.unwrap() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn rule_files_round_trip(n in 0usize..20, ax in -1.0..1.0f64, w in 0.1..2.0f64) {
        let rule = gauss_legendre_product(&Rect::new(ax, ax + w, 0.0, 1.0).unwrap(), n);
        let back = parse_rule(&format_rule(&rule)).unwrap();
        prop_assert_eq!(back.degree, rule.degree);
        prop_assert_eq!(&back.nodes, &rule.nodes);
        prop_assert_eq!(&back.weights, &rule.weights);
    }
}

#[test]
fn rule_weights_sum_to_area() {
    for n in [0, 3, 10, 29] {
        let rect = Rect::new(-0.5, 2.0, 1.0, 1.5).unwrap();
        let rule = gauss_legendre_product(&rect, n);
        assert_relative_eq!(rule.weight_l1(), rect.area(), max_relative = 1e-14);
    }
}
