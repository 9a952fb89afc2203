//! Planar polyline helpers on `Complex64` points.

use num_complex::Complex64;

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Whether the closed segments `[a, b]` and `[c, d]` intersect.
pub fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Complex64, q: Complex64, r: Complex64| {
        r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
    };
    (d1 == 0.0 && on(a, b, c)) || (d2 == 0.0 && on(a, b, d)) || (d3 == 0.0 && on(c, d, a)) || (d4 == 0.0 && on(c, d, b))
}

/// Distance from `p` to the segment `[a, b]` and the clamped parameter of the
/// nearest point.
pub fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return ((p - a).norm(), 0.0);
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    ((p - (a + ab * t)).norm(), t)
}

/// Nearest point of a polyline.
#[derive(Clone, Copy, Debug)]
pub struct Projection {
    pub distance: f64,
    /// Index of the segment `[nodes[segment], nodes[segment + 1]]`.
    pub segment: usize,
    /// Parameter in `[0, 1]` along that segment.
    pub t: f64,
    /// Signed side: positive when `p` is to the left of the travel direction.
    pub side: f64,
}

pub fn project(nodes: &[Complex64], p: Complex64) -> Option<Projection> {
    let mut best: Option<Projection> = None;
    for (k, w) in nodes.windows(2).enumerate() {
        let (d, t) = segment_distance(p, w[0], w[1]);
        if best.as_ref().is_none_or(|b| d < b.distance) {
            let side = cross(w[1] - w[0], p - w[0]);
            best = Some(Projection { distance: d, segment: k, t, side });
        }
    }
    best
}

pub fn distance(nodes: &[Complex64], p: Complex64) -> f64 {
    project(nodes, p).map_or(f64::INFINITY, |pr| pr.distance)
}

#[derive(Clone, Copy, Debug)]
pub struct BBox {
    pub lo: Complex64,
    pub hi: Complex64,
}

impl BBox {
    pub fn of(nodes: &[Complex64]) -> Self {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for z in nodes {
            lo.re = lo.re.min(z.re);
            lo.im = lo.im.min(z.im);
            hi.re = hi.re.max(z.re);
            hi.im = hi.im.max(z.im);
        }
        BBox { lo, hi }
    }

    pub fn overlaps_segment(&self, a: Complex64, b: Complex64, pad: f64) -> bool {
        a.re.max(b.re) >= self.lo.re - pad
            && a.re.min(b.re) <= self.hi.re + pad
            && a.im.max(b.im) >= self.lo.im - pad
            && a.im.min(b.im) <= self.hi.im + pad
    }
}

/// Whether the segment `[a, b]` crosses the polyline.
pub fn segment_crosses(nodes: &[Complex64], bbox: &BBox, a: Complex64, b: Complex64) -> bool {
    if !bbox.overlaps_segment(a, b, 0.0) {
        return false;
    }
    nodes.windows(2).any(|w| segments_intersect(a, b, w[0], w[1]))
}

/// Even-odd point-in-polygon test; the polygon is closed implicitly.
pub fn inside_polygon(poly: &[Complex64], p: Complex64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if p.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Symmetric Hausdorff distance between two polylines, measured from nodes.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one = |x: &[Complex64], y: &[Complex64]| x.iter().map(|&p| distance(y, p)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

pub fn arclength(nodes: &[Complex64]) -> f64 {
    nodes.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}
