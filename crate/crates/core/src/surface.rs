//! The three-sheeted surface of `z = (w² - 1/3) / (w (w² - 1))`.
//!
//! Its inverse branches `ψ_P, ψ_Q, ψ_R` take the values `-1, 0, 1` at
//! infinity; `ψ_P` is cut along `Γ_P`, `ψ_R` along `Γ_R` and `ψ_Q` along both.
//! Branch values away from large `|z|` are obtained by analytic continuation
//! from the circle `|z| = BASE_RADIUS` along a route that avoids the cuts,
//! carrying `√(3ψ⁴+1)` along so that its sheetwise branch is fixed as well.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::polyline::{self, BBox};
use crate::Error;

type C = Complex64;

pub const BASE_RADIUS: f64 = 3.0;
const ON_CUT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    P,
    Q,
    R,
}

impl Sheet {
    pub const ALL: [Sheet; 3] = [Sheet::P, Sheet::Q, Sheet::R];

    pub fn index(self) -> usize {
        match self {
            Sheet::P => 0,
            Sheet::Q => 1,
            Sheet::R => 2,
        }
    }

    /// Value of the branch at infinity.
    pub fn at_infinity(self) -> f64 {
        match self {
            Sheet::P => -1.0,
            Sheet::Q => 0.0,
            Sheet::R => 1.0,
        }
    }
}

/// `+` is the left side with respect to the orientation of the arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

pub fn z_of_w(w: C) -> C {
    (w * w - 1.0 / 3.0) / (w * (w * w - 1.0))
}

pub fn dz_dw(w: C) -> C {
    -(1.0 / (w * w) + 1.0 / ((w - 1.0) * (w - 1.0)) + 1.0 / ((w + 1.0) * (w + 1.0))) / 3.0
}

pub fn d2z_dw2(w: C) -> C {
    let cube = |x: C| x * x * x;
    (1.0 / cube(w) + 1.0 / cube(w - 1.0) + 1.0 / cube(w + 1.0)) * (2.0 / 3.0)
}

pub fn cubic_residual(z: C, w: C) -> C {
    z * w * w * w - w * w - z * w + 1.0 / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchData {
    pub w: [C; 4],
    pub z: [C; 4],
}

/// `w_k = 3^{-1/4} e^{-(2k+1)πi/4}` and `z_k = z(w_k)`, `k = 1..4` stored at
/// index `k - 1`.
pub fn branch_points() -> BranchData {
    let r = 3f64.powf(-0.25);
    let mut w = [C::new(0.0, 0.0); 4];
    let mut z = [C::new(0.0, 0.0); 4];
    for k in 1..=4 {
        let wk = C::from_polar(r, -((2 * k + 1) as f64) * std::f64::consts::PI / 4.0);
        w[k - 1] = wk;
        z[k - 1] = z_of_w(wk);
    }
    BranchData { w, z }
}

/// Roots of a monic polynomial (ascending coefficients, leading 1 implied)
/// by Aberth–Ehrlich iteration followed by Newton polishing.
pub(crate) fn monic_roots(lower: &[C]) -> Vec<C> {
    let deg = lower.len();
    let eval = |w: C| {
        let mut v = C::new(1.0, 0.0);
        let mut d = C::new(0.0, 0.0);
        for c in lower.iter().rev() {
            d = d * w + v;
            v = v * w + c;
        }
        (v, d)
    };
    let bound = 1.0 + lower.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<C> = (0..deg)
        .map(|k| C::from_polar(0.7 * bound, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (v, d) = eval(roots[i]);
            if v == C::new(0.0, 0.0) {
                continue;
            }
            let ratio = v / d;
            let mut s = C::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    s += 1.0 / (roots[i] - roots[j]);
                }
            }
            let delta = ratio / (1.0 - ratio * s);
            roots[i] -= delta;
            moved = moved.max(delta.norm() / (1.0 + roots[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (v, d) = eval(*r);
            if d == C::new(0.0, 0.0) {
                break;
            }
            *r -= v / d;
        }
    }
    roots
}

fn sort_by_re_im(v: &mut [C]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// The three roots `w` of `z w³ - w² - z w + 1/3 = 0`, ordered by `(Re, Im)`.
pub fn solve_cubic(z: C) -> Result<[C; 3], Error> {
    if z.norm() == 0.0 {
        return Err(Error::PoleAtOrigin);
    }
    let lower = [1.0 / (3.0 * z), C::new(-1.0, 0.0), -1.0 / z];
    let mut roots = monic_roots(&lower);
    for r in roots.iter_mut() {
        *r = newton_cubic(z, *r, 4);
    }
    sort_by_re_im(&mut roots);
    Ok([roots[0], roots[1], roots[2]])
}

pub(crate) fn newton_cubic(z: C, mut w: C, iters: usize) -> C {
    for _ in 0..iters {
        let f = cubic_residual(z, w);
        let df = 3.0 * z * w * w - 2.0 * w - z;
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        w -= step;
        if step.norm() <= 1e-16 * (1.0 + w.norm()) {
            break;
        }
    }
    w
}

/// `dψ/dz` at a point `(z, w)` of the curve.
pub fn dpsi_dz(z: C, w: C) -> C {
    -(w * w * w - w) / (3.0 * z * w * w - 2.0 * w - z)
}

/// A branch value tagged with its sheet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetPoint {
    pub z: C,
    pub sheet: Sheet,
    pub w: C,
}

/// All three labeled branches at one point, with the matching values of the
/// cut square root `√(3ψ⁴+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SheetValues {
    pub z: C,
    pub psi: [C; 3],
    pub root: [C; 3],
}

impl SheetValues {
    pub fn psi(&self, s: Sheet) -> C {
        self.psi[s.index()]
    }

    pub fn root(&self, s: Sheet) -> C {
        self.root[s.index()]
    }

    pub fn point(&self, s: Sheet) -> SheetPoint {
        SheetPoint { z: self.z, sheet: s, w: self.psi(s) }
    }

    fn min_separation(&self) -> f64 {
        let d01 = (self.psi[0] - self.psi[1]).norm();
        let d02 = (self.psi[0] - self.psi[2]).norm();
        let d12 = (self.psi[1] - self.psi[2]).norm();
        d01.min(d02).min(d12)
    }

    fn separation_of(&self, k: usize) -> f64 {
        (0..3).filter(|&j| j != k).map(|j| (self.psi[k] - self.psi[j]).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Labels by proximity to the expansions at infinity; valid for `|z| ≥ BASE_RADIUS`.
pub fn label_far(z: C) -> Result<SheetValues, Error> {
    let roots = solve_cubic(z)?;
    let guesses = [C::new(-1.0, 0.0) + 1.0 / (3.0 * z), 1.0 / (3.0 * z), C::new(1.0, 0.0) + 1.0 / (3.0 * z)];
    let psi = assign(&roots, &guesses);
    let mut root = [C::new(0.0, 0.0); 3];
    for k in 0..3 {
        let s = (3.0 * psi[k].powi(4) + 1.0).sqrt();
        // √ → 2 on sheets P and R, → -1 on sheet Q.
        let target = if k == 1 { -1.0 } else { 2.0 };
        root[k] = if (s - target).norm() <= (-s - target).norm() { s } else { -s };
    }
    Ok(SheetValues { z, psi, root })
}

/// Permutation of `roots` minimizing the total distance to `targets`.
fn assign(roots: &[C; 3], targets: &[C; 3]) -> [C; 3] {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best = PERMS[0];
    let mut best_cost = f64::INFINITY;
    for p in PERMS {
        let cost: f64 = (0..3).map(|k| (roots[p[k]] - targets[k]).norm()).sum();
        if cost < best_cost {
            best_cost = cost;
            best = p;
        }
    }
    [roots[best[0]], roots[best[1]], roots[best[2]]]
}

fn matched_root(s: C, previous: C) -> C {
    if (s - previous).norm() <= (-s - previous).norm() {
        s
    } else {
        -s
    }
}

/// One continuation step from `state` to `b`; `None` if the step is too large
/// to be trusted.
fn continuation_step(state: &SheetValues, b: C) -> Option<SheetValues> {
    let a = state.z;
    let mut psi = [C::new(0.0, 0.0); 3];
    for k in 0..3 {
        let w0 = state.psi[k];
        let pred = w0 + dpsi_dz(a, w0) * (b - a);
        let w = newton_cubic(b, pred, 12);
        if !w.is_finite() || cubic_residual(b, w).norm() > 1e-10 * (1.0 + (b * w * w * w).norm()) {
            return None;
        }
        if (w - pred).norm() > 0.1 * state.separation_of(k) {
            return None;
        }
        psi[k] = w;
    }
    let next = SheetValues { z: b, psi, root: [C::new(0.0, 0.0); 3] };
    if next.min_separation() < 0.3 * state.min_separation() {
        return None;
    }
    let mut root = [C::new(0.0, 0.0); 3];
    for k in 0..3 {
        let s = matched_root((3.0 * psi[k].powi(4) + 1.0).sqrt(), state.root[k]);
        if (s - state.root[k]).norm() > 0.3 * state.root[k].norm() {
            return None;
        }
        root[k] = s;
    }
    Some(SheetValues { root, ..next })
}

/// Analytic continuation of all labels along a polyline.
pub fn continue_along(start: SheetValues, path: &[C]) -> Result<SheetValues, Error> {
    let mut state = start;
    let mut h = 0.02;
    for &target in path {
        loop {
            let remaining = target - state.z;
            let dist = remaining.norm();
            if dist == 0.0 {
                break;
            }
            let b = if dist <= h { target } else { state.z + remaining * (h / dist) };
            match continuation_step(&state, b) {
                Some(next) => {
                    state = next;
                    h = (h * 1.5).min(0.25);
                }
                None => {
                    h *= 0.5;
                    if h < 1e-13 {
                        return Err(Error::ContinuationFailure { z: state.z });
                    }
                }
            }
        }
    }
    // Snap to the exact roots at the endpoint.
    let z = state.z;
    for k in 0..3 {
        state.psi[k] = newton_cubic(z, state.psi[k], 3);
    }
    Ok(state)
}

/// The cut arcs `Γ_P` (oriented `z_1 → z_2`) and `Γ_R` (oriented `z_3 → z_4`).
#[derive(Clone, Debug)]
pub struct Cuts {
    pub gamma_p: Vec<C>,
    pub gamma_r: Vec<C>,
    bbox_p: BBox,
    bbox_r: BBox,
    branch: [C; 4],
}

impl Cuts {
    pub fn new(gamma_p: Vec<C>, gamma_r: Vec<C>) -> Self {
        let bbox_p = BBox::of(&gamma_p);
        let bbox_r = BBox::of(&gamma_r);
        Cuts { gamma_p, gamma_r, bbox_p, bbox_r, branch: branch_points().z }
    }

    pub fn arc(&self, which: Cut) -> &[C] {
        match which {
            Cut::P => &self.gamma_p,
            Cut::R => &self.gamma_r,
        }
    }

    /// Which cut, if any, lies within `tol` of `z`.
    pub fn near_cut(&self, z: C, tol: f64) -> Option<Cut> {
        if polyline::distance(&self.gamma_p, z) < tol {
            Some(Cut::P)
        } else if polyline::distance(&self.gamma_r, z) < tol {
            Some(Cut::R)
        } else {
            None
        }
    }

    fn segment_ok(&self, a: C, b: C, z: C) -> bool {
        if polyline::segment_crosses(&self.gamma_p, &self.bbox_p, a, b)
            || polyline::segment_crosses(&self.gamma_r, &self.bbox_r, a, b)
        {
            return false;
        }
        for zk in self.branch {
            let keep = 0.02f64.min(0.5 * (z - zk).norm());
            if polyline::segment_distance(zk, a, b).0 < keep {
                return false;
            }
        }
        let keep0 = 0.05f64.min(0.5 * z.norm());
        polyline::segment_distance(C::new(0.0, 0.0), a, b).0 >= keep0
    }

    /// A polyline from outside the base circle to `z` avoiding cuts, branch
    /// points and the origin.
    pub fn route(&self, z: C) -> Option<Vec<C>> {
        let out = BASE_RADIUS + 0.2;
        let mut candidates: Vec<Vec<C>> = Vec::new();
        if z.norm() > 0.0 {
            candidates.push(vec![z, z * (out / z.norm())]);
        }
        let up = if z.im >= 0.0 { 1.0 } else { -1.0 };
        for dir in [up, -up] {
            let y = if z.im.abs() >= 0.1 && z.im.signum() == dir { z.im } else { 0.1 * dir };
            candidates.push(vec![z, C::new(0.0, y), C::new(0.0, out * dir)]);
        }
        for k in 0..16 {
            let d = C::from_polar(1.0, std::f64::consts::PI * k as f64 / 8.0);
            // Walk until the ray leaves the base circle.
            let b = (z * d.conj()).re;
            let t = -b + (b * b - z.norm_sqr() + out * out).sqrt();
            candidates.push(vec![z, z + d * t]);
        }
        for k in 0..8 {
            let hop = z + C::from_polar(0.08, std::f64::consts::PI * (k as f64 + 0.5) / 4.0);
            for dir in [up, -up] {
                candidates.push(vec![z, hop, C::new(0.0, hop.im.abs().max(0.1) * dir), C::new(0.0, out * dir)]);
            }
        }
        candidates
            .into_iter()
            .find(|path| path.windows(2).all(|s| self.segment_ok(s[0], s[1], z)))
            .map(|mut path| {
                path.reverse();
                path
            })
    }

    /// All branch values at `z`, which must be off both cuts.
    pub fn label(&self, z: C) -> Result<SheetValues, Error> {
        if z.norm() == 0.0 {
            return Err(Error::PoleAtOrigin);
        }
        if z.norm() >= BASE_RADIUS {
            return label_far(z);
        }
        if let Some(cut) = self.near_cut(z, ON_CUT_TOL) {
            return Err(Error::OnCut { z, cut });
        }
        let path = self.route(z).ok_or(Error::ContinuationFailure { z })?;
        let start = label_far(path[0])?;
        continue_along(start, &path[1..])
    }

    pub fn psi(&self, z: C, sheet: Sheet) -> Result<SheetPoint, Error> {
        Ok(self.label(z)?.point(sheet))
    }

    /// Boundary values on a cut, taken from the given side.
    pub fn label_side(&self, z: C, cut: Cut, side: Side) -> Result<SheetValues, Error> {
        let arc = self.arc(cut);
        let pr = polyline::project(arc, z).ok_or(Error::InvalidInput("empty cut".into()))?;
        let tangent = arc[pr.segment + 1] - arc[pr.segment];
        let normal = C::new(0.0, 1.0) * tangent / tangent.norm();
        let probe = self.label(z + normal * (side.sign() * 1e-7))?;
        let roots = solve_cubic(z)?;
        let psi = assign(&roots, &probe.psi);
        let mut root = [C::new(0.0, 0.0); 3];
        for k in 0..3 {
            root[k] = matched_root((3.0 * psi[k].powi(4) + 1.0).sqrt(), probe.root[k]);
        }
        Ok(SheetValues { z, psi, root })
    }

    /// `√(3w⁴+1)` on the `w`-sphere with cuts along `ψ_{P+}(Γ_P)` and
    /// `ψ_{R+}(Γ_R)`: the value carried by the sheet whose branch passes
    /// through `w` at `z(w)`.
    pub fn sqrt_3w4p1(&self, w: C) -> Result<C, Error> {
        if w.norm() < 1e-12 {
            return Ok(C::new(-1.0, 0.0));
        }
        let z = z_of_w(w);
        if !z.is_finite() || z.norm() > 1e12 {
            return Ok(matched_root((3.0 * w.powi(4) + 1.0).sqrt(), C::new(2.0, 0.0)));
        }
        let v = self.label(z)?;
        let k = (0..3).min_by(|&a, &b| (v.psi[a] - w).norm().total_cmp(&(v.psi[b] - w).norm())).unwrap();
        Ok(v.root[k])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cut {
    P,
    R,
}

/// The three-case scalar `G(w)`; `sheet` names the `ψ`-image that `w` lies in.
pub fn g_scalar(w: C, sheet: Sheet) -> C {
    match sheet {
        Sheet::P => w * (-(w + 1.0) * (2.0 * w - 1.0) / (w * (w - 1.0))).exp(),
        Sheet::Q => ((w * w - 1.0 / 3.0) / (w * w - 1.0)) * (-2.0 * w * w / (w * w - 1.0)).exp(),
        Sheet::R => w * (-(w - 1.0) * (2.0 * w + 1.0) / (w * (w + 1.0))).exp(),
    }
}

/// `F_row(w)` for `row ∈ {1, 2, 3}`, given `√(3w⁴+1)` on the matching branch.
pub fn f_row(row: usize, w: C, root: C, sheet: Sheet) -> C {
    let g = g_scalar(w, sheet);
    let pre = match row {
        1 => -w * (w - 1.0),
        2 => 3.0 * (w * w - 1.0),
        3 => w * (w + 1.0),
        _ => panic!("row index {row} out of range"),
    };
    pre * g / root
}

/// The outer parametrix `N(z)` with `N_{jk} = F_j(ψ_k(z))`.
pub fn outer_parametrix(v: &SheetValues) -> [[C; 3]; 3] {
    let mut n = [[C::new(0.0, 0.0); 3]; 3];
    for (row, line) in n.iter_mut().enumerate() {
        for s in Sheet::ALL {
            line[s.index()] = f_row(row + 1, v.psi(s), v.root(s), s);
        }
    }
    n
}

pub fn n_entry(cuts: &Cuts, z: C, row: usize, col: usize) -> Result<C, Error> {
    if !(1..=3).contains(&row) || !(1..=3).contains(&col) {
        return Err(Error::InvalidInput(format!("N entry ({row},{col})")));
    }
    let v = cuts.label(z)?;
    Ok(outer_parametrix(&v)[row - 1][col - 1])
}
