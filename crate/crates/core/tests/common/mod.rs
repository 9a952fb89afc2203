#![allow(dead_code)]

use std::sync::OnceLock;

use hpexp::curves::{Geometry, Region, TraceParams};
use hpexp::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn geometry() -> &'static Geometry {
    static GEOM: OnceLock<Geometry> = OnceLock::new();
    GEOM.get_or_init(|| Geometry::build(&TraceParams::default()).expect("geometry"))
}

/// Seeded points in `[-half, half]²` at least `margin` away from every curve,
/// `per_region` of each region.
pub fn region_samples(geom: &Geometry, per_region: usize, half: f64, margin: f64, seed: u64) -> Vec<(Region, C)> {
    let regions = [Region::DP, Region::DR, Region::DInfP, Region::DInfR, Region::DInfU, Region::DInfL];
    let mut counts = [0usize; 6];
    let mut out = Vec::new();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut tries = 0;
    while counts.iter().any(|&k| k < per_region) {
        tries += 1;
        assert!(tries < 200_000, "rejection sampling stalled at {counts:?}");
        let z = C::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
        if z.norm() < margin || geom.distance_to_curves(z) < margin {
            continue;
        }
        let Some(region) = geom.classify(z).region() else { continue };
        let slot = regions.iter().position(|&r| r == region).unwrap();
        if counts[slot] < per_region {
            counts[slot] += 1;
            out.push((region, z));
        }
    }
    out
}

/// `∫ log|z - s| dμ(s)` over the given arcs by the midpoint rule on chords.
pub fn log_potential(arcs: &[&hpexp::curves::CurveTrace], z: C) -> f64 {
    let mut acc = 0.0;
    for arc in arcs {
        for pair in arc.nodes.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let mid = (a.z + b.z) * 0.5;
            let mass = (a.difference() + b.difference()) * 0.5 * (b.z - a.z) * C::new(0.0, -1.5 / std::f64::consts::PI);
            acc += (z - mid).norm().ln() * mass.re;
        }
    }
    acc
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Taylor coefficients of `(u + d)^{-m}` in `u`, up to `u^len-1`.
fn inverse_power_series(d: &BigRational, m: usize, len: usize) -> Vec<BigRational> {
    // (u + d)^{-m} = d^{-m} Σ binom(-m, k) (u/d)^k
    let mut out = Vec::with_capacity(len);
    let mut c = BigRational::one() / num_traits::pow(d.clone(), m);
    for k in 0..len {
        out.push(c.clone());
        c = -c * rat((m + k) as i64) / (rat(k as i64 + 1) * d);
    }
    out
}

fn series_mul(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
    (0..len).map(|k| (0..=k).map(|j| &a[j] * &b[k - j]).fold(BigRational::zero(), |s, t| s + t)).collect()
}

/// Residue oracle for indices `(n1, n2, n3)`: `Res_{w=a} e^{zw} / ((w+1)^{n1+1} w^{n2+1} (w-1)^{n3+1})`
/// at `a = -1, 0, 1` gives `p e^{-z}`, `q`, `r e^{z}`. Returns the
/// coefficient lists of `p, q, r` after `z ↦ scale z`, normalized so that
/// `monic` (0, 1, 2 for p, q, r) has leading coefficient one.
pub fn residue_oracle(n: [usize; 3], scale: u64, monic: usize) -> [Vec<BigRational>; 3] {
    let poles = [-1i64, 0, 1];
    let mut out: Vec<Vec<BigRational>> = Vec::new();
    for (i, &a) in poles.iter().enumerate() {
        let m = n[i] + 1;
        // h(u) = Π_{j≠i} (u + a - b_j)^{-(n_j+1)} with u = w - a.
        let mut h = vec![BigRational::one()];
        h.resize(m, BigRational::zero());
        for (j, &b) in poles.iter().enumerate() {
            if j != i {
                let s = inverse_power_series(&rat(a - b), n[j] + 1, m);
                h = series_mul(&h, &s, m);
            }
        }
        // Res = Σ_j z^j / j! · h_{m-1-j}, then z ↦ scale·z.
        let mut coeffs = Vec::with_capacity(m);
        let mut fact = BigRational::one();
        let mut power = BigRational::one();
        for j in 0..m {
            if j > 0 {
                fact *= rat(j as i64);
                power *= rat(scale as i64);
            }
            coeffs.push(&h[m - 1 - j] * &power / &fact);
        }
        out.push(coeffs);
    }
    let lead = out[monic].last().unwrap().clone();
    let normalized: Vec<Vec<BigRational>> = out.into_iter().map(|c| c.into_iter().map(|v| v / &lead).collect()).collect();
    [normalized[0].clone(), normalized[1].clone(), normalized[2].clone()]
}
