mod common;

use hpexp::curves::{ArcLabel, Axis, Ending, Location, Region};
use hpexp::polyline;
use hpexp::potentials::{mu_density, phi};
use hpexp::surface::{branch_points, Sheet};
use hpexp::Complex64 as C;

#[test]
fn gamma_p_joins_z1_to_z2_through_the_left_half_plane() {
    let geom = common::geometry();
    let z = branch_points().z;
    let arc = geom.arc(ArcLabel::GammaP);
    assert!((arc.first() - z[0]).norm() < 1e-6);
    assert!((arc.last() - z[1]).norm() < 1e-6);
    assert!(arc.endpoint_gap < 1e-6);
    assert!(arc.nodes.iter().all(|n| n.z.re < 1e-12));
}

#[test]
fn every_arc_has_vanishing_real_phi() {
    let geom = common::geometry();
    for label in ArcLabel::TRACED {
        let arc = geom.arc(label);
        assert!(arc.max_abs_re_phi() <= 1e-8 * arc.length(), "{}: {:e}", label.name(), arc.max_abs_re_phi());
    }
}

#[test]
fn unbounded_arcs_approach_the_vertical_asymptotes() {
    let geom = common::geometry();
    let edge = std::f64::consts::LN_2 / 3.0;
    for (label, sign) in [(ArcLabel::GammaE1, -1.0), (ArcLabel::GammaE2, -1.0), (ArcLabel::GammaE3, 1.0), (ArcLabel::GammaE4, 1.0)] {
        let arc = geom.arc(label);
        let far = if arc.first().norm() > arc.last().norm() { arc.first() } else { arc.last() };
        assert!((far.norm() - geom.params.truncation_radius).abs() < 1.0);
        assert!((far.re - sign * edge).abs() < 1e-3, "{}: {far}", label.name());
    }
}

#[test]
fn gamma_r_mirrors_gamma_p() {
    let geom = common::geometry();
    let mirrored: Vec<C> = geom.arc(ArcLabel::GammaP).points().iter().map(|z| -z.conj()).collect();
    let h = polyline::hausdorff(&mirrored, &geom.arc(ArcLabel::GammaR).points());
    assert!(h <= 1e-6, "{h:e}");
}

#[test]
fn star_arcs_cross_the_opposite_real_half_axis() {
    let geom = common::geometry();
    let p_star = geom.arc(ArcLabel::GammaPStar);
    let r_star = geom.arc(ArcLabel::GammaRStar);
    assert!(p_star.crossings.iter().any(|c| c.axis == Axis::Real && c.z.re > 0.0));
    assert!(r_star.crossings.iter().any(|c| c.axis == Axis::Real && c.z.re < 0.0));
    assert_eq!(p_star.ending, Ending::Branch(1));
    assert!((p_star.last() - branch_points().z[0]).norm() < 1e-6);
}

#[test]
fn gamma_p_star_avoids_gamma_r() {
    let geom = common::geometry();
    let star = geom.arc(ArcLabel::GammaPStar).points();
    let cut = geom.arc(ArcLabel::GammaR).points();
    let bbox = polyline::BBox::of(&cut);
    assert!(star.windows(2).all(|w| !polyline::segment_crosses(&cut, &bbox, w[0], w[1])));
}

#[test]
fn gamma_q_pieces_join_up() {
    let geom = common::geometry();
    let q = &geom.gamma_q;
    let y = geom.ystar;
    let z = branch_points().z;
    let close = |a: C, b: C| (a - b).norm() < 1e-6;
    assert!(close(q.lower_p.first(), z[1]) && close(q.lower_p.last(), C::new(0.0, -y)));
    assert!(close(q.lower_r.first(), C::new(0.0, -y)) && close(q.lower_r.last(), z[2]));
    assert!(close(q.segment.first(), C::new(0.0, -y)) && close(q.segment.last(), C::new(0.0, y)));
    assert!(close(q.upper_r.first(), z[3]) && close(q.upper_r.last(), C::new(0.0, y)));
    assert!(close(q.upper_p.first(), C::new(0.0, y)) && close(q.upper_p.last(), z[0]));
}

#[test]
fn classification_examples() {
    let geom = common::geometry();
    assert_eq!(geom.classify(C::new(5.0, 0.0)).region(), Some(Region::DInfR));
    assert_eq!(geom.classify(C::new(-5.0, 0.0)).region(), Some(Region::DInfP));
    assert!(phi(geom, C::new(5.0, 0.0), Sheet::R).unwrap().value.re < 0.0);
    let on = geom.classify(C::new(0.0, 0.3));
    assert!(matches!(on.location, Location::OnCurve { arc: ArcLabel::GammaQSegment, .. }));
    assert!(on.in_p_star && on.in_r_star);
    let (p, r) = (phi(geom, C::new(0.0, 0.3), Sheet::P).unwrap(), phi(geom, C::new(0.0, 0.3), Sheet::R).unwrap());
    assert!((p.value.re - r.value.re).abs() < 1e-12);
}

#[test]
fn classification_agrees_with_phi_signs() {
    let geom = common::geometry();
    let samples = common::region_samples(geom, 34, 2.5, 0.01, 7);
    for (region, z) in samples.iter().take(200) {
        let class = geom.classify(*z);
        let p = phi(geom, *z, Sheet::P).unwrap().value.re;
        let r = phi(geom, *z, Sheet::R).unwrap().value.re;
        let p_negative = *region == Region::DInfP || class.in_p_star;
        let r_negative = *region == Region::DInfR || class.in_r_star;
        assert_eq!(p < 0.0, p_negative, "Re φ_P = {p} at {z} ({region:?}, {class:?})");
        assert_eq!(r < 0.0, r_negative, "Re φ_R = {r} at {z} ({region:?}, {class:?})");
        if z.re < 0.0 {
            assert!(p < r, "{z}");
        }
    }
}

#[test]
fn mu_p_mass_from_line_density() {
    let geom = common::geometry();
    let arc = geom.arc(ArcLabel::GammaP);
    let mut mass = 0.0;
    for pair in arc.nodes.windows(2) {
        let mid = (pair[0].z + pair[1].z) * 0.5;
        let dens = mu_density(geom, mid, ArcLabel::GammaP).unwrap();
        mass += dens.line_density().re * (pair[1].t - pair[0].t);
    }
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");
}

#[test]
fn csv_export_columns() {
    let geom = common::geometry();
    let rows = geom.arc(ArcLabel::GammaE3).csv_records();
    assert_eq!(rows[0][0], "gammaE3");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
}
