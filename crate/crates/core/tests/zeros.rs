mod common;

use hpexp::asymptotics::{predicted_extreme_zero, Target};
use hpexp::curves::ArcLabel;
use hpexp::exact::{residue_polynomials, RationalPoly};
use hpexp::surface;
use hpexp::zeros::*;
use hpexp::Complex64 as C;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rayon::prelude::*;

#[test]
fn degree_sixty_zero_sets() {
    let geom = common::geometry();
    let triple = residue_polynomials(60).unwrap();
    let results: Vec<_> = [Target::P, Target::Q, Target::R]
        .par_iter()
        .map(|&t| {
            let set = polynomial_zeros(60, t, 256).unwrap();
            let poly = target_poly(&triple, t).unwrap();
            let shift = stability_shift(poly, &set);
            let report = empirical_vs_limit(&set, geom, None).unwrap();
            (t, set, shift, report)
        })
        .collect();
    let q_masses = q_piece_masses(geom);
    for (t, set, shift, report) in results {
        assert_eq!(set.count(), 60, "{t:?}");
        assert!(set.max_residual() <= 2f64.powi(-128), "{t:?}");
        assert!(shift <= 1e-10, "{t:?}: {shift}");
        assert!(report.max_distance <= 0.1, "{t:?}: {}", report.max_distance);
        match t {
            Target::Q => {
                for (piece, (name, mass)) in report.pieces.iter().zip(&q_masses) {
                    assert_eq!(&piece.piece, name);
                    assert!((piece.empirical - mass).abs() <= 0.1, "{piece:?}");
                }
            }
            _ => assert!(report.discrepancy <= 0.15, "{t:?}: {}", report.discrepancy),
        }
    }
}

#[test]
fn discrepancy_shrinks_with_n() {
    let geom = common::geometry();
    for t in [Target::P, Target::Q] {
        let d: Vec<f64> = [20, 40]
            .iter()
            .map(|&n| empirical_vs_limit(&polynomial_zeros(n, t, 256).unwrap(), geom, None).unwrap().discrepancy)
            .collect();
        assert!(d[1] < d[0], "{t:?}: {d:?}");
    }
}

#[test]
fn remainder_zeros_follow_gamma_e() {
    let geom = common::geometry();
    let rect = Rect::new(-2.0, 2.0, -2.0, 2.0).unwrap();
    let set = entire_zeros_in_box(10, rect, 256).unwrap();
    assert!(set.count() > 0);
    let e_arcs: Vec<Vec<C>> = [ArcLabel::GammaE1, ArcLabel::GammaE2, ArcLabel::GammaE3, ArcLabel::GammaE4]
        .iter()
        .map(|&l| geom.arc(l).points())
        .collect();
    for z in set.points() {
        let d = e_arcs.iter().map(|a| hpexp::polyline::distance(a, z)).fold(f64::INFINITY, f64::min);
        assert!(d <= 0.15, "{z}: {d}");
        // Real coefficients: the conjugate is a zero too.
        assert!(set.points().iter().any(|w| (w - z.conj()).norm() < 1e-10), "{z}");
    }
    assert!(set.max_residual() < 1e-10);
    let report = empirical_vs_limit(&set, geom, Some(rect)).unwrap();
    let (empirical, limit) = report.weighted_total.unwrap();
    assert!(empirical > 0.0 && limit > 0.0);
}

#[test]
fn remainder_zero_free_box() {
    // D_P holds no zeros of E_n.
    let set = entire_zeros_in_box(12, Rect::new(-0.5, -0.2, -0.1, 0.1).unwrap(), 256).unwrap();
    assert_eq!(set.count(), 0);
}

#[test]
fn extreme_zeros_approach_the_prediction() {
    let z1 = surface::branch_points().z[0];
    let near = Rect::new(z1.re - 0.2, z1.re + 0.2, z1.im - 0.2, z1.im + 0.2).unwrap();
    for t in [Target::P, Target::Q, Target::E] {
        let errs: Vec<f64> = [24, 48]
            .par_iter()
            .map(|&n| {
                let set = match t {
                    Target::E => entire_zeros_in_box(n, near, 256).unwrap(),
                    _ => polynomial_zeros(n, t, 256).unwrap(),
                };
                (set.nearest(z1).unwrap() - predicted_extreme_zero(n, 1, t).unwrap()).norm()
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((1.4..=2.8).contains(&ratio), "{t:?}: {errs:?}");
    }
}

#[test]
fn csv_rows_expand_multiplicities() {
    let poly = RationalPoly::from_i64(&[0, 0, 1]);
    let set = poly_roots(&poly, 128).unwrap();
    assert_eq!(set.csv_records().len(), 2);
    assert_eq!(set.csv_records()[0][0], "poly");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roots_satisfy_vieta(coeffs in prop::collection::vec(-20i64..=20, 2..9), lead in 1i64..5) {
        let mut c = coeffs;
        c.push(lead);
        let poly = RationalPoly::new(c.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect());
        let d = poly.degree().unwrap();
        let set = poly_roots(&poly, 192).unwrap();
        prop_assert_eq!(set.count(), d);
        let sum: C = set.zeros.iter().map(|z| z.z * z.multiplicity as f64).sum();
        let expected = -(c[d - 1] as f64) / lead as f64;
        let scale = set.points().iter().map(|z| z.norm()).fold(1.0, f64::max);
        // Clustered roots carry error like the root of the separation tolerance.
        prop_assert!((sum - expected).norm() <= 1e-8 * scale * d as f64, "{} vs {}", sum, expected);
    }
}
