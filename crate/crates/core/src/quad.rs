//! Gauss–Legendre panels on straight chords in the complex plane.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

/// Nodes and weights on `[-1, 1]`, cached for the orders used here.
pub fn rule(order: usize) -> &'static [(f64, f64)] {
    static R8: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R16: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R32: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let build = |n: usize| -> Vec<(f64, f64)> {
        let q = GaussLegendre::new(n.try_into().expect("order at least 2"));
        q.into_node_weight_pairs().to_vec()
    };
    match order {
        8 => R8.get_or_init(|| build(8)),
        16 => R16.get_or_init(|| build(16)),
        32 => R32.get_or_init(|| build(32)),
        _ => panic!("unsupported Gauss-Legendre order {order}"),
    }
}

/// `∫_a^b f(s) ds` along the straight segment.
pub fn chord<F: FnMut(Complex64) -> Complex64>(a: Complex64, b: Complex64, order: usize, mut f: F) -> Complex64 {
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in rule(order) {
        acc += f(mid + half * x) * w;
    }
    acc * half
}

/// `∫_0^1 f(τ) dτ`.
pub fn unit<F: FnMut(f64) -> Complex64>(order: usize, mut f: F) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in rule(order) {
        acc += f(0.5 * (x + 1.0)) * (0.5 * w);
    }
    acc
}
