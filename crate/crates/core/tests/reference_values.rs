//! Worked values checked against independent computations.

use std::f64::consts::PI;

use maxpoly::bounds::{
    bound_report, find_k, impossibility_certificate, ln_q, witness_polynomial, zeta, Side,
};
use maxpoly::experiments::{
    correlation, growth_sweep, linear_fit, loglog_slope, lsq_stability_sweep, runge, DegreeRule,
};
use maxpoly::leastsq::{condition_number_inf, fit, sup_error};
use maxpoly::oracle::{lebesgue_product_form, oracle_b};
use maxpoly::poly::{chebyshev_zeros, lebesgue_function, ChebPoly};
use maxpoly::remez::{compute_b, solve_subinterval, BOptions, RemezOptions, Variant};
use maxpoly::{NodeSet, Preset, WeightSpec};

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

#[test]
fn semicircle_cdf_against_substituted_quadrature() {
    // s = -cos t removes the square-root endpoint behaviour
    let w = WeightSpec::preset(Preset::C2);
    let upper = (-0.5f64).acos();
    let want = simpson(|t| 2.0 / PI * t.sin().powi(2), 0.0, upper, 4000);
    assert!((w.cdf(0.5).unwrap() - want).abs() < 1e-10);
}

#[test]
fn first_node_of_strongly_clustered_weight() {
    let ratios: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&m| (1.0 + NodeSet::preset(Preset::OC, m).unwrap().x(1)) * (m as f64).powi(4))
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(hi / lo < 2.0, "{ratios:?}");
}

#[test]
fn first_node_slope_follows_left_exponent() {
    let ms = [64usize, 128, 256, 512, 1024];
    for (p, beta) in [(Preset::U, 0.0), (Preset::C2, 0.5), (Preset::UC, -0.25)] {
        let gaps: Vec<f64> = ms
            .iter()
            .map(|&m| 1.0 + NodeSet::preset(p, m).unwrap().x(1))
            .collect();
        let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
        let (slope, _) = loglog_slope(&xs, &gaps);
        let want = -1.0 / (1.0 + beta);
        assert!((slope - want).abs() <= 0.1 * want.abs(), "{p}: {slope}");
    }
}

#[test]
fn chebyshev_zeros_match_bisection() {
    let f = |x: f64| (4.0 * x.acos()).cos();
    let mut roots = Vec::new();
    let steps = 4000;
    for i in 0..steps {
        let (mut a, mut b) = (
            -1.0 + 2.0 * i as f64 / steps as f64,
            -1.0 + 2.0 * (i + 1) as f64 / steps as f64,
        );
        if f(a) * f(b) < 0.0 {
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                if f(a) * f(c) <= 0.0 {
                    b = c;
                } else {
                    a = c;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    let z = chebyshev_zeros(4);
    assert_eq!(roots.len(), 4);
    for (r, z) in roots.iter().zip(&z) {
        assert!((r - z).abs() < 1e-12);
    }
}

#[test]
fn three_point_lebesgue_value() {
    let y = [-1.0, 0.0, 1.0];
    let hand =
        |x: f64| (x * (x - 1.0) / 2.0).abs() + (1.0 - x * x).abs() + (x * (x + 1.0) / 2.0).abs();
    assert!((lebesgue_function(&y, 0.5) - 1.25).abs() < 1e-15);
    assert!((lebesgue_function(&y, 0.5) - hand(0.5)).abs() < 1e-15);
}

#[test]
fn equispaced_lebesgue_function_against_product_form() {
    let y: Vec<f64> = (0..10).map(|i| -1.0 + 2.0 * i as f64 / 9.0).collect();
    for x in [0.5 * (y[0] + y[1]), 0.5 * (y[8] + y[9]), 0.123] {
        let a = lebesgue_function(&y, x);
        let b = lebesgue_product_form(&y, x);
        assert!((a - b).abs() < 1e-10 * b);
    }
}

#[test]
fn chebyshev_grid_has_trivial_k() {
    for n in [4, 9, 20] {
        let nodes = NodeSet::preset(Preset::C1, 2 * n).unwrap();
        assert_eq!(find_k(&nodes, n, Side::Minus), 1);
        assert_eq!(ln_q(&nodes, n, 1, Side::Minus), 0.0);
    }
}

#[test]
fn equispaced_q_grows_like_n_squared_over_m() {
    // the proportionality is asymptotic; at M <= 80 K is still tiny
    let ms = [640usize, 1280, 2560];
    let xs: Vec<f64> = ms
        .iter()
        .map(|&m| (m / 2) as f64 * (m / 2) as f64 / m as f64)
        .collect();
    let ys: Vec<f64> = ms
        .iter()
        .map(|&m| {
            bound_report(&NodeSet::preset(Preset::U, m).unwrap(), m / 2)
                .unwrap()
                .ln_lower()
        })
        .collect();
    let (slope, _) = loglog_slope(&xs, &ys);
    assert!((slope - 1.0).abs() <= 0.15, "{slope}");
}

#[test]
fn equispaced_witness_sits_between_q_and_b() {
    let nodes = NodeSet::preset(Preset::U, 30).unwrap();
    let w = witness_polynomial(&nodes, 15, Side::Minus).unwrap();
    let b = compute_b(&nodes, 15, &BOptions::default()).unwrap().b;
    assert!(w.sup.abs().log10() >= w.log10_q - 1e-9);
    assert!(w.sup.abs() <= b * (1.0 + 1e-9));
}

#[test]
fn arcsine_zeta_scaling_is_flat() {
    let vals: Vec<f64> = [100usize, 200, 400, 800, 1600]
        .iter()
        .map(|&m| zeta(&NodeSet::preset(Preset::UC, m).unwrap()) * (m as f64).powf(2.0 / 3.0))
        .collect();
    let (lo, hi) = vals
        .iter()
        .fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi / lo < 1.05, "{vals:?}");
}

#[test]
fn zeta_bound_for_chebyshev_grid() {
    let n = 6;
    assert!(
        bound_report(&NodeSet::preset(Preset::C1, 2 * n).unwrap(), n)
            .unwrap()
            .upper
            .is_none()
    );
    let nodes = NodeSet::preset(Preset::C1, 4 * n).unwrap();
    let upper = bound_report(&nodes, n).unwrap().upper.unwrap();
    assert!((upper - 1.0 / (1.0 - PI / 4.0)).abs() < 1e-12);
    assert!(compute_b(&nodes, n, &BOptions::default()).unwrap().b <= upper);
}

#[test]
fn certificate_arithmetic() {
    let nodes = NodeSet::preset(Preset::U, 20).unwrap();
    let opts = BOptions::default();
    let c = impossibility_certificate(&nodes, 1.0, 2.0, 1.0, 2.0, &opts)
        .unwrap()
        .unwrap();
    assert_eq!(c.n, 18);
    let b = compute_b(&nodes, 18, &opts).unwrap().b;
    assert!((c.kappa_lower - b / 2.0).abs() < 1e-12 * b);
    assert!(impossibility_certificate(&nodes, 0.1, 1.1, 5.0, 3.0, &opts)
        .unwrap()
        .is_none());
}

#[test]
fn certificate_grows_geometrically() {
    let ms: Vec<usize> = (10..=40).step_by(5).collect();
    let logs: Vec<f64> = ms
        .iter()
        .map(|&m| {
            let nodes = NodeSet::preset(Preset::U, m).unwrap();
            impossibility_certificate(&nodes, 1.0, 2.0, 1.0, 2.0, &BOptions::default())
                .unwrap()
                .unwrap()
                .kappa_lower
                .ln()
        })
        .collect();
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let (slope, _) = linear_fit(&xs, &logs);
    assert!(slope > 0.0);
    assert!(correlation(&xs, &logs) > 0.99);
}

#[test]
fn exchange_matches_enumeration_on_small_grid() {
    let nodes = NodeSet::preset(Preset::U, 6).unwrap();
    for m in 0..6 {
        let sol = solve_subinterval(&nodes, 3, m, &RemezOptions::default(), None).unwrap();
        let (a, b) = (nodes.x(m), nodes.x(m + 1));
        for t in [0.25, 0.5, 0.75] {
            let x = a + t * (b - a);
            let want = maxpoly::oracle::oracle_b_point(&nodes, 3, x).unwrap().value;
            assert!((sol.poly.eval(x).abs() - want).abs() < 1e-10 * want);
        }
    }
    let nodes = NodeSet::preset(Preset::C2, 6).unwrap();
    let b = compute_b(&nodes, 3, &BOptions::default()).unwrap().b;
    assert!((b - oracle_b(&nodes, 3).unwrap()).abs() < 1e-9 * b);
}

#[test]
fn square_equispaced_case_is_lebesgue_constant() {
    let nodes = NodeSet::preset(Preset::U, 2).unwrap();
    assert!((compute_b(&nodes, 2, &BOptions::default()).unwrap().b - 1.25).abs() < 1e-12);
}

#[test]
fn first_variant_agrees_on_small_grids() {
    let first = BOptions {
        remez: RemezOptions::with_variant(Variant::First),
        ..BOptions::default()
    };
    for p in Preset::ALL {
        let nodes = NodeSet::preset(p, 20).unwrap();
        let a = compute_b(&nodes, 10, &first).unwrap().b;
        let b = compute_b(&nodes, 10, &BOptions::default()).unwrap().b;
        assert!((a - b).abs() < 1e-9 * b, "{p}");
    }
}

#[test]
fn half_oversampled_growth_rows_are_ordered() {
    for p in [Preset::C2, Preset::U, Preset::UC] {
        let rows = growth_sweep(p, 0.5, &[10, 20, 30, 40, 50], &BOptions::default()).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].log10_b.unwrap() > w[0].log10_b.unwrap(), "{p}");
        }
        for r in &rows {
            let b = r.log10_b.unwrap();
            assert!(r.log10_q <= b + 1e-9);
            if let Some(wit) = r.log10_witness {
                assert!(r.log10_q <= wit + 1e-9 && wit <= b + 1e-9, "{p} M={}", r.m);
            }
        }
    }
}

#[test]
fn strongly_clustered_grid_growth() {
    let opts = BOptions::default();
    let square = NodeSet::preset(Preset::OC, 20).unwrap();
    assert!(compute_b(&square, 20, &opts).unwrap().log10_b > 5.0);
    for m in [40, 80] {
        let nodes = NodeSet::preset(Preset::OC, m).unwrap();
        assert!(compute_b(&nodes, m / 2, &opts).unwrap().b < 3.0);
    }
}

#[test]
fn linear_oversampling_grows_exponentially() {
    let ns: Vec<usize> = (10..=40).step_by(5).collect();
    let logs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            compute_b(
                &NodeSet::preset(Preset::C2, 2 * n).unwrap(),
                n,
                &BOptions::default(),
            )
            .unwrap()
            .log10_b
        })
        .collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let (slope, _) = linear_fit(&xs, &logs);
    assert!(slope > 0.1, "{slope}");
    // the second half grows at least as fast as the first
    assert!(logs[6] - logs[3] >= 0.9 * (logs[3] - logs[0]));
}

#[test]
fn dashed_threshold_rows_are_on_the_bounded_side() {
    // M = (N/3)², (N/2.4)^{3/2} and 1.65 N; within a quarter decade of B = 10
    for (p, m, n) in [
        (Preset::U, 100, 30),
        (Preset::UC, 100, 52),
        (Preset::OC, 66, 40),
    ] {
        let b = compute_b(&NodeSet::preset(p, m).unwrap(), n, &BOptions::default())
            .unwrap()
            .b;
        assert!(b.log10() <= 1.25, "{p}: {b}");
    }
}

#[test]
fn entire_function_error_within_bernstein_bound() {
    // θ = 2, ‖e^x‖ on the ellipse is e^{(θ + 1/θ)/2}
    let theta: f64 = 2.0;
    let norm = ((theta + 1.0 / theta) / 2.0).exp();
    for n in (10..=30).step_by(4) {
        let nodes = NodeSet::preset(Preset::C1, 2 * n).unwrap();
        let samples: Vec<f64> = nodes.points().iter().map(|x| x.exp()).collect();
        let f = fit(&nodes, n, &samples).unwrap();
        let kappa = condition_number_inf(&nodes, n, 40 * n).unwrap().kappa_inf;
        let bound = (1.0 + kappa) * 2.0 / (theta - 1.0) * theta.powi(-(n as i32)) * norm;
        assert!(sup_error(&nodes, &f, f64::exp, 2000) <= bound, "N={n}");
    }
}

#[test]
fn least_squares_error_is_near_best() {
    for (p, m, n) in [
        (Preset::U, 100, 10),
        (Preset::C2, 200, 16),
        (Preset::OC, 60, 20),
    ] {
        let nodes = NodeSet::preset(p, m).unwrap();
        let samples: Vec<f64> = nodes.points().iter().map(|&x| runge(x)).collect();
        let f = fit(&nodes, n, &samples).unwrap();
        let kappa = condition_number_inf(&nodes, n, 20 * m).unwrap().kappa_inf;
        let proxy = ChebPoly::interpolate(n, runge);
        let best = (0..4001)
            .map(|i| -1.0 + 2.0 * i as f64 / 4000.0)
            .map(|x| (runge(x) - proxy.eval(x)).abs())
            .fold(0.0, f64::max);
        assert!(
            sup_error(&nodes, &f, runge, 4001) <= 2.0 * (1.0 + kappa) * best,
            "{p}"
        );
    }
}

#[test]
fn stable_sweeps_converge_root_exponentially() {
    let rows = lsq_stability_sweep(Preset::U, &[64, 144, 256, 400], DegreeRule::Sqrt).unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| (r.m as f64).sqrt()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.err_runge.ln()).collect();
    assert!(correlation(&xs, &ys) < -0.99);
    let rows = lsq_stability_sweep(
        Preset::C2,
        &[64, 216, 512, 1000],
        DegreeRule::Stable { c: 3.0 },
    )
    .unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| (r.m as f64).cbrt()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.err_runge.ln()).collect();
    assert!(correlation(&xs, &ys) < -0.99);
}

#[test]
fn equispaced_interpolation_diverges_for_runge() {
    let rows = lsq_stability_sweep(Preset::U, &[10, 20, 30, 40], DegreeRule::Square).unwrap();
    assert!(rows.windows(2).all(|w| w[1].err_runge > w[0].err_runge));
    assert!(rows[3].err_runge > 1e3);
}
