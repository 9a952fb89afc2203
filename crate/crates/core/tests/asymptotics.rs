mod common;

use std::f64::consts::PI;

use hpexp::asymptotics::*;
use hpexp::curves::ArcLabel;
use hpexp::surface;
use hpexp::Complex64 as C;
use rayon::prelude::*;

const BITS: usize = 256;

fn errors(z: C, target: Target, regime: Regime, ns: &[usize]) -> Vec<f64> {
    let geom = common::geometry();
    ns.par_iter().map(|&n| compare(geom, z, n, target, regime, BITS).expect("comparison").rel_err).collect()
}

#[test]
fn strong_rates_in_region_interiors() {
    let ns = [16, 24, 32, 40];
    let cases = [
        (Target::P, C::new(2.0, 0.0)),
        (Target::P, C::new(-0.5, 0.0)),
        (Target::P, C::new(0.0, 1.2)),
        (Target::Q, C::new(2.0, 1.0)),
        (Target::Q, C::new(0.5, 0.0)),
        (Target::R, C::new(-2.0, -1.0)),
        (Target::R, C::new(0.5, 0.0)),
        (Target::E, C::new(2.0, 1.0)),
        (Target::E, C::new(-0.3, 0.0)),
        (Target::E, C::new(0.0, 1.2)),
    ];
    for (target, z) in cases {
        let errs = errors(z, target, Regime::Strong, &ns);
        let slope = log_log_slope(&ns, &errs);
        assert!((-1.5..=-0.6).contains(&slope), "{target:?} at {z}: slope {slope}, errors {errs:?}");
    }
}

#[test]
fn strong_p_at_two_halves() {
    let errs = errors(C::new(2.0, 0.0), Target::P, Regime::Strong, &[20, 40]);
    assert!(errs[0] <= 0.1);
    let ratio = errs[0] / errs[1];
    assert!((1.4..=2.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn strong_case_selection() {
    let geom = common::geometry();
    // In D_∞ the Q formula carries the minus sign.
    let z = C::new(2.0, 0.0);
    let pd = hpexp::potentials::point_data(geom, z).unwrap();
    let p = strong_asymptotic(geom, z, 10, Target::Q).unwrap();
    let g = hpexp::potentials::g(geom, z, surface::Sheet::Q).unwrap().value;
    let expected = -(10.0 * g).exp() / pd.values.root(surface::Sheet::Q);
    assert!((p.value() / expected - 1.0).norm() < 1e-12);
    // Off-cut requirement for P.
    let on_gamma_p = geom.arc(ArcLabel::GammaP).nodes[60].z;
    assert!(strong_asymptotic(geom, on_gamma_p, 10, Target::P).is_err());
}

#[test]
fn two_term_q_on_the_segment() {
    let errs = errors(C::new(0.0, 0.3), Target::Q, Regime::TwoTerm, &[16, 24, 30, 40]);
    assert!(errs[2] < 0.2, "{errs:?}");
    assert!(errs[3] < errs[0], "{errs:?}");
}

#[test]
fn three_terms_balance_at_ystar() {
    let geom = common::geometry();
    for z in [C::new(0.0, geom.ystar), C::new(0.0, -geom.ystar)] {
        let p = two_term_asymptotic(geom, z, 30, Target::Q).unwrap();
        let mags: Vec<f64> = p.log_terms.iter().map(|l| l.re).collect();
        let spread = mags.iter().cloned().fold(f64::MIN, f64::max) - mags.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread.exp() < 10.0, "{mags:?}");
    }
}

#[test]
fn boundary_form_on_gamma_p() {
    let geom = common::geometry();
    let arc = geom.arc(ArcLabel::GammaP);
    let z = arc.nodes[arc.nodes.len() / 3].z;
    let p = two_term_asymptotic(geom, z, 30, Target::P).unwrap();
    assert_eq!(p.log_terms.len(), 2);
    // Re φ_P = 0 on the cut, so both side terms have the same size up to the amplitudes.
    assert!((p.log_terms[0].re - p.log_terms[1].re).abs() < 3.0);
    let errs = errors(z, Target::P, Regime::TwoTerm, &[24, 40]);
    assert!(errs.iter().all(|&e| e < 0.05), "{errs:?}");
}

#[test]
fn two_term_matches_strong_where_subdominant() {
    let geom = common::geometry();
    for (target, z) in [(Target::P, C::new(-0.5, 0.0)), (Target::Q, C::new(0.0, 1.2)), (Target::E, C::new(0.0, 1.2))] {
        let gap = |n| {
            let a = strong_asymptotic(geom, z, n, target).unwrap();
            let b = two_term_asymptotic(geom, z, n, target).unwrap();
            ((b.log_value - a.log_value).exp() - 1.0).norm()
        };
        let (g20, g40) = (gap(20), gap(40));
        // Exponential decay: the gap roughly squares when n doubles.
        assert!(g40 < g20 * g20.sqrt(), "{target:?}: {g20} {g40}");
    }
}

#[test]
fn region_mismatch_errors() {
    let geom = common::geometry();
    assert!(two_term_asymptotic(geom, C::new(2.0, 1.0), 10, Target::Q).is_err());
    assert!(two_term_asymptotic(geom, C::new(0.5, 0.0), 10, Target::E).is_err());
    assert!(two_term_asymptotic(geom, C::new(0.5, 0.0), 10, Target::P).is_err());
    assert!(airy_local(geom, C::new(0.5, 0.0), 10, Target::P, AIRY_DELTA, BITS).is_err());
    assert!(airy_local(geom, surface::branch_points().z[0] + 0.05, 10, Target::R, AIRY_DELTA, BITS).is_err());
}

fn around_z1(radius: f64, count: usize) -> Vec<C> {
    let z1 = surface::branch_points().z[0];
    (0..count).map(|k| z1 + C::from_polar(radius, 2.0 * PI * (k as f64 + 0.3) / count as f64)).collect()
}

#[test]
fn airy_regime_near_z1() {
    let geom = common::geometry();
    for target in [Target::P, Target::Q, Target::E] {
        let worst = around_z1(0.05, 8)
            .par_iter()
            .map(|&z| compare(geom, z, 30, target, Regime::AiryLocal, BITS).unwrap().rel_err)
            .reduce(|| 0.0, f64::max);
        assert!(worst <= 0.2, "{target:?}: {worst}");
    }
}

#[test]
fn f1_derivative_at_z1() {
    // f_1'(z_1) = (1/2πi) ∮ f_1(z)/(z - z_1)² dz by the trapezoid rule on a circle.
    let geom = common::geometry();
    let radius = 0.02;
    let count = 128;
    let z1 = surface::branch_points().z[0];
    let sum: C = around_z1(radius, count)
        .par_iter()
        .map(|&z| airy_local_data(geom, z, AIRY_DELTA).unwrap().f1 / (z - z1))
        .reduce(|| C::new(0.0, 0.0), |a, b| a + b);
    let derivative = sum / count as f64;
    assert!((derivative - c1()).norm() < 1e-10, "{derivative} vs {}", c1());
}

#[test]
fn f1_is_negative_on_gamma_p() {
    let geom = common::geometry();
    let z1 = surface::branch_points().z[0];
    for node in geom.arc(ArcLabel::GammaP).nodes.iter().filter(|n| (n.z - z1).norm() > 1e-3 && (n.z - z1).norm() < 0.08) {
        let f = airy_local_data(geom, node.z, AIRY_DELTA).unwrap().f1;
        assert!(f.re < 0.0 && f.im.abs() < 1e-6 * f.norm(), "{f} at {}", node.z);
    }
}

#[test]
fn h_functions_do_not_vanish() {
    let geom = common::geometry();
    let mut smallest = f64::INFINITY;
    for r in [0.01, 0.03, 0.06, 0.09] {
        for z in around_z1(r, 24) {
            let d = airy_local_data(geom, z, AIRY_DELTA).unwrap();
            smallest = smallest.min(d.h1.norm()).min(d.h2.norm());
        }
    }
    assert!(smallest > 1e-3, "{smallest}");
}

#[test]
fn airy_and_two_term_cross_over() {
    let geom = common::geometry();
    let n = 40;
    let mut compared = 0;
    for z in around_z1(AIRY_DELTA * 0.999, 16) {
        let Ok(t) = two_term_asymptotic(geom, z, n, Target::P) else { continue };
        let a = airy_local(geom, z, n, Target::P, AIRY_DELTA, BITS).unwrap();
        let mut exact = ExactDiagonal::new(n, BITS).unwrap();
        let log_exact = exact.log_value(Target::P, z, geom).unwrap();
        let bound = 2.0 * a.relative_error(log_exact).max(t.relative_error(log_exact));
        let gap = ((t.log_value - a.log_value).exp() - 1.0).norm();
        assert!(gap <= bound, "{z}: gap {gap}, bound {bound}");
        compared += 1;
    }
    assert!(compared >= 4);
}

#[test]
fn extreme_zero_formula_example() {
    let z1 = surface::branch_points().z[0];
    let expected = z1 + C::from_polar(2f64.powf(-1.0 / 3.0) * 3f64.powf(-5.0 / 12.0), -29.0 * PI / 36.0) * airy_zero(1) * 30f64.powf(-2.0 / 3.0);
    assert!((predicted_extreme_zero(30, 1, Target::P).unwrap() - expected).norm() < 1e-14);
    assert!(predicted_extreme_zero(30, 1, Target::R).is_err());
}

fn d_r_and_d_p_points() -> Vec<C> {
    vec![
        C::new(0.5, 0.0),
        C::new(0.3, 0.0),
        C::new(0.3, 0.4),
        C::new(0.2, -0.3),
        C::new(0.4, 0.1),
        C::new(-0.5, 0.0),
        C::new(-0.3, 0.0),
        C::new(-0.3, 0.4),
        C::new(-0.2, -0.3),
        C::new(-0.4, 0.1),
    ]
}

#[test]
fn algebraic_approximant_tracks_the_exponential() {
    let geom = common::geometry();
    for z in d_r_and_d_p_points() {
        for n in [20, 40] {
            let (m, e) = algebraic_approximant(geom, z, n, BITS).unwrap();
            let scaled = (m.ln() + e as f64 * std::f64::consts::LN_2 - 3.0 * n as f64 * z).exp();
            assert!((scaled - 1.0).norm() <= 1.0 / n as f64, "{z} n={n}: {scaled}");
        }
    }
    assert!(algebraic_approximant(geom, C::new(0.0, 0.3), 10, BITS).is_err());
    assert!(algebraic_approximant(geom, C::new(2.0, 0.0), 10, BITS).is_err());
}

#[test]
fn discriminant_ratio_shrinks() {
    let geom = common::geometry();
    for z in [C::new(0.5, 0.0), C::new(0.3, 0.4), C::new(-0.5, 0.0)] {
        assert!(geom.classify(z).region().is_some());
        let ratio = |n| {
            let d = ExactDiagonal::new(n, BITS).unwrap();
            let [p, q, r] = d.polys(z);
            let (p, q, r) = (p.ln(), q.ln(), r.ln());
            (4f64.ln() + p.re + r.re - 2.0 * q.re).exp()
        };
        let (a, b) = (ratio(20), ratio(24));
        assert!(b <= a / 2.0, "{z}: {a} {b}");
    }
}

#[test]
fn error_rows_serialize() {
    let geom = common::geometry();
    let row = compare(geom, C::new(2.0, 0.0), 8, Target::P, Regime::Strong, BITS).unwrap();
    let rec = row.record();
    assert_eq!(rec[0], "P");
    assert_eq!(rec[1], "strong");
    assert_eq!(ErrorRow::HEADER.len(), rec.len());
    let json = serde_json::to_string(&row).unwrap();
    assert!(json.contains("\"regime\":\"strong\""));
}
