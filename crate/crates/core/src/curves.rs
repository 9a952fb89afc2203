//! Trajectories `Re φ = 0` of the quadratic differential `-(ψ_Q - ψ_s)² dz²`
//! through the branch points, the contour `Γ_Q` and the domain partition.
//!
//! An arc is traced with the arclength ODE `z' = ±i conj(D)/|D|`, where `D`
//! is the difference of the two roots that coalesce at the starting branch
//! point. `φ = (3/2)∫D ds` is accumulated with Gauss–Legendre panels along
//! the chords and every node is projected back onto `Re φ = 0`. Tracing does
//! not need sheet labels; which root is `ψ_Q` is decided afterwards.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::polyline;
use crate::potentials;
use crate::quad;
use crate::surface::{self, branch_points, Cut, Cuts, Sheet, SheetValues, Side};
use crate::Error;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcLabel {
    GammaP,
    GammaR,
    GammaPStar,
    GammaRStar,
    GammaE1,
    GammaE2,
    GammaE3,
    GammaE4,
    /// The interval `[-iy*, iy*]` of `Γ_Q`.
    GammaQSegment,
}

impl ArcLabel {
    pub const TRACED: [ArcLabel; 8] = [
        ArcLabel::GammaP,
        ArcLabel::GammaR,
        ArcLabel::GammaPStar,
        ArcLabel::GammaRStar,
        ArcLabel::GammaE1,
        ArcLabel::GammaE2,
        ArcLabel::GammaE3,
        ArcLabel::GammaE4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArcLabel::GammaP => "gammaP",
            ArcLabel::GammaR => "gammaR",
            ArcLabel::GammaPStar => "gammaPstar",
            ArcLabel::GammaRStar => "gammaRstar",
            ArcLabel::GammaE1 => "gammaE1",
            ArcLabel::GammaE2 => "gammaE2",
            ArcLabel::GammaE3 => "gammaE3",
            ArcLabel::GammaE4 => "gammaE4",
            ArcLabel::GammaQSegment => "gammaQsegment",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        ArcLabel::TRACED
            .into_iter()
            .chain([ArcLabel::GammaQSegment])
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown arc '{s}'")))
    }

    /// The sheet paired with `Q` in the integrated difference.
    pub fn sheet(self) -> Sheet {
        match self {
            ArcLabel::GammaP | ArcLabel::GammaPStar | ArcLabel::GammaE1 | ArcLabel::GammaE2 => Sheet::P,
            _ => Sheet::R,
        }
    }
}

/// One polyline vertex. The density integrated along the arc is
/// `w_q - w_s`: `ψ_Q - ψ_P` or `ψ_Q - ψ_R` on trajectories (boundary values
/// from the `+` side on `Γ_P`, `Γ_R`) and `ψ_R - ψ_P` on the `Γ_Q` segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceNode {
    pub z: C,
    /// Arclength from the first node.
    pub t: f64,
    /// `(3/2)∫(w_q - w_s) ds` from the branch point `phi_origin`.
    pub phi: C,
    pub w_q: C,
    pub w_s: C,
}

impl TraceNode {
    pub fn difference(&self) -> C {
        self.w_q - self.w_s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Real,
    Imaginary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub axis: Axis,
    pub z: C,
    /// Index of the chord `[nodes[chord], nodes[chord + 1]]` that crosses.
    pub chord: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ending {
    /// Ran into branch point `z_{k+1}`.
    Branch(usize),
    Truncated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveTrace {
    pub label: Option<ArcLabel>,
    /// Branch point index where tracing started; `phi` is measured from it.
    pub phi_origin: usize,
    /// How tracing from `phi_origin` ended; kept as is when the arc is reversed.
    pub ending: Ending,
    /// Distance of the last traced node from the terminal branch point
    /// (zero for truncated arcs).
    pub endpoint_gap: f64,
    pub nodes: Vec<TraceNode>,
    pub crossings: Vec<Crossing>,
}

impl CurveTrace {
    pub fn points(&self) -> Vec<C> {
        self.nodes.iter().map(|n| n.z).collect()
    }

    pub fn first(&self) -> C {
        self.nodes[0].z
    }

    pub fn last(&self) -> C {
        self.nodes[self.nodes.len() - 1].z
    }

    pub fn length(&self) -> f64 {
        self.nodes.last().map_or(0.0, |n| n.t)
    }

    pub fn max_abs_re_phi(&self) -> f64 {
        self.nodes.iter().map(|n| n.phi.re.abs()).fold(0.0, f64::max)
    }

    /// The same arc traversed backwards.
    pub fn reversed(mut self) -> CurveTrace {
        self.nodes.reverse();
        let total = self.nodes.first().map_or(0.0, |n| n.t);
        for n in self.nodes.iter_mut() {
            n.t = total - n.t;
        }
        let chords = self.nodes.len().saturating_sub(1);
        for c in self.crossings.iter_mut() {
            c.chord = chords - 1 - c.chord;
        }
        self.crossings.reverse();
        self
    }

    fn swap_roles(&mut self) {
        for n in self.nodes.iter_mut() {
            std::mem::swap(&mut n.w_q, &mut n.w_s);
            n.phi = -n.phi;
        }
    }

    /// `(3/2)∫(w_q - w_s) ds` over the whole arc with `order`-point panels.
    pub fn integral(&self, order: usize) -> Result<C, Error> {
        let mut acc = C::new(0.0, 0.0);
        for pair in self.nodes.windows(2) {
            acc += chord_integral(&pair[0], &pair[1], order)?;
        }
        Ok(acc)
    }

    /// Rows `label, t, re_z, im_z, re_phi, im_phi`.
    pub fn csv_records(&self) -> Vec<[String; 6]> {
        let name = self.label.map_or("unlabeled", |l| l.name());
        self.nodes
            .iter()
            .map(|n| {
                [
                    name.to_string(),
                    format!("{:.16e}", n.t),
                    format!("{:.16e}", n.z.re),
                    format!("{:.16e}", n.z.im),
                    format!("{:.16e}", n.phi.re),
                    format!("{:.16e}", n.phi.im),
                ]
            })
            .collect()
    }
}

/// `(3/2)∫(w_q - w_s) ds` over one chord. Chords touching a branch point
/// (where both roots coincide) use the substitution `s = z_k + τ²(z - z_k)`.
pub fn chord_integral(a: &TraceNode, b: &TraceNode, order: usize) -> Result<C, Error> {
    if a.w_q == a.w_s {
        return Ok(branch_integral(a.z, a.w_q, b.z, b.w_q, b.w_s, order));
    }
    if b.w_q == b.w_s {
        return Ok(-branch_integral(b.z, b.w_q, a.z, a.w_q, a.w_s, order));
    }
    let mut failed = false;
    let v = quad::chord(a.z, b.z, order, |s| match pair_at(a.z, a.w_q, a.w_s, s) {
        Some((p, q)) => (p - q) * 1.5,
        None => {
            failed = true;
            C::new(0.0, 0.0)
        }
    });
    if failed {
        return Err(Error::TraceFailure { z: a.z });
    }
    Ok(v)
}

/// `(3/2)∫_{z_k}^{z} (ψ_a - ψ_b) ds` along the straight segment from a
/// branch point `(z_k, w_k)`, where `(wa, wb)` are the roots at `z`.
pub(crate) fn branch_integral(zk: C, wk: C, z: C, wa: C, wb: C, order: usize) -> C {
    let delta = z - zk;
    quad::unit(order, |tau| {
        let s = zk + delta * (tau * tau);
        let a = surface::newton_cubic(s, wk + (wa - wk) * tau, 16);
        let b = surface::newton_cubic(s, wk + (wb - wk) * tau, 16);
        (a - b) * (1.5 * 2.0 * tau) * delta
    })
}

/// Roots at `to` continued from the pair `(wa, wb)` at `from`.
pub(crate) fn pair_at(from: C, wa: C, wb: C, to: C) -> Option<(C, C)> {
    let sep = (wa - wb).norm();
    let pa = wa + surface::dpsi_dz(from, wa) * (to - from);
    let pb = wb + surface::dpsi_dz(from, wb) * (to - from);
    let a = surface::newton_cubic(to, pa, 12);
    let b = surface::newton_cubic(to, pb, 12);
    if !(a.is_finite() && b.is_finite()) {
        return None;
    }
    if (a - pa).norm() > 0.2 * sep || (b - pb).norm() > 0.2 * sep || (a - b).norm() < 0.5 * sep {
        return None;
    }
    Some((a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    /// Unbounded arcs stop at this modulus.
    pub truncation_radius: f64,
    /// Distance from the branch point of the first traced node.
    pub start_radius: f64,
    /// A trace ends at a branch point once it is this close.
    pub stop_distance: f64,
    /// Step cap for `|z| < 1.5`.
    pub near_step: f64,
    /// Step cap far out.
    pub far_step: f64,
    pub max_nodes: usize,
    /// Distance below which a point counts as lying on an arc.
    pub on_curve_tol: f64,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            truncation_radius: 50.0,
            start_radius: 1e-4,
            stop_distance: 1e-7,
            near_step: 5e-4,
            far_step: 0.5,
            max_nodes: 1_000_000,
            on_curve_tol: 1e-7,
        }
    }
}

impl TraceParams {
    fn step_cap(&self, z: C) -> f64 {
        let r = z.norm();
        if r < 1.5 {
            self.near_step
        } else {
            (self.near_step * (r / 1.5).powi(3)).min(self.far_step)
        }
    }
}

/// Angles of the three trajectories leaving branch point `k` (0-based).
///
/// Near `z_k`, `D² ≈ a (z - z_k)` with `a = 8 / z''(w_k)`, so
/// `φ ≈ √a (z - z_k)^{3/2}` and `Re φ = 0` along three rays.
pub fn departure_angles(k: usize) -> [f64; 3] {
    let b = branch_points();
    let a = 8.0 / surface::d2z_dw2(b.w[k]);
    let pi = std::f64::consts::PI;
    [0.0, 1.0, 2.0].map(|m| (2.0 / 3.0) * (pi / 2.0 - a.arg() / 2.0 + m * pi))
}

fn heading(d: C, sigma: f64) -> C {
    C::new(0.0, sigma) * d.conj() / d.norm()
}

#[derive(Clone, Copy, Debug)]
struct State {
    z: C,
    wa: C,
    wb: C,
    phi: C,
}

fn node_of(s: &State, t: f64) -> TraceNode {
    TraceNode { z: s.z, t, phi: s.phi, w_q: s.wa, w_s: s.wb }
}

/// Moves `z` along the normal until `Re φ = 0`, with `φ` measured from `base`.
fn project(base: &State, mut z: C, mut roots: (C, C)) -> Option<State> {
    let mut phi = C::new(0.0, 0.0);
    for _ in 0..4 {
        let node_a = node_of(base, 0.0);
        let node_b = TraceNode { z, t: 0.0, phi: C::new(0.0, 0.0), w_q: roots.0, w_s: roots.1 };
        phi = base.phi + chord_integral(&node_a, &node_b, 8).ok()?;
        let dphi = (roots.0 - roots.1) * 1.5;
        let corr = -dphi.conj() * (phi.re / dphi.norm_sqr());
        if corr.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
        z += corr;
        roots = pair_at(base.z, base.wa, base.wb, z)?;
    }
    Some(State { z, wa: roots.0, wb: roots.1, phi })
}

fn advance(cur: &State, h: f64, sigma: f64) -> Option<State> {
    let field = |s: C| -> Option<C> {
        let (a, b) = pair_at(cur.z, cur.wa, cur.wb, s)?;
        Some(heading(a - b, sigma))
    };
    let k1 = heading(cur.wa - cur.wb, sigma);
    let k2 = field(cur.z + k1 * (0.5 * h))?;
    let k3 = field(cur.z + k2 * (0.5 * h))?;
    let k4 = field(cur.z + k3 * h)?;
    let z = cur.z + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    let roots = pair_at(cur.z, cur.wa, cur.wb, z)?;
    let next = project(cur, z, roots)?;
    // Reject steps that turn back on themselves.
    if (heading(next.wa - next.wb, sigma) * k1.conj()).re <= 0.0 {
        return None;
    }
    Some(next)
}

/// Traces the trajectory leaving branch point `start` (0-based) along
/// departure direction `direction ∈ {0, 1, 2}`.
pub fn trace_trajectory(start: usize, direction: usize, params: &TraceParams) -> Result<CurveTrace, Error> {
    if start > 3 || direction > 2 {
        return Err(Error::InvalidInput(format!("branch point {start}, direction {direction}")));
    }
    let bp = branch_points();
    let (zk, wk) = (bp.z[start], bp.w[start]);
    let theta = departure_angles(start)[direction];
    let ray = C::from_polar(1.0, theta);
    let seed = zk + ray * params.start_radius;
    let u = (2.0 * (seed - zk) / surface::d2z_dw2(wk)).sqrt();
    let wa = surface::newton_cubic(seed, wk + u, 30);
    let wb = surface::newton_cubic(seed, wk - u, 30);
    let origin = State { z: zk, wa: wk, wb: wk, phi: C::new(0.0, 0.0) };
    let mut state = State { z: seed, wa, wb, phi: branch_integral(zk, wk, seed, wa, wb, 16) };
    // Project the seed onto Re φ = 0.
    for _ in 0..4 {
        let dphi = (state.wa - state.wb) * 1.5;
        let z = state.z - dphi.conj() * (state.phi.re / dphi.norm_sqr());
        let (a, b) = pair_at(state.z, state.wa, state.wb, z).ok_or(Error::TraceFailure { z })?;
        state = State { z, wa: a, wb: b, phi: branch_integral(zk, wk, z, a, b, 16) };
    }
    let sigma = if (heading(state.wa - state.wb, 1.0) * ray.conj()).re > 0.0 { 1.0 } else { -1.0 };

    let mut nodes = vec![node_of(&origin, 0.0), node_of(&state, (state.z - zk).norm())];
    let mut crossings = Vec::new();
    let mut t = nodes[1].t;
    let ending = loop {
        if nodes.len() > params.max_nodes {
            return Err(Error::TraceFailure { z: state.z });
        }
        let nearest = bp.z.iter().map(|b| (state.z - b).norm()).fold(f64::INFINITY, f64::min);
        let mut h = params.step_cap(state.z).min(0.25 * nearest).min(0.25 * state.z.norm());
        let next = loop {
            if let Some(n) = advance(&state, h, sigma) {
                break n;
            }
            h *= 0.5;
            if h < 1e-14 {
                return Err(Error::TraceFailure { z: state.z });
            }
        };
        let (p, q) = (state.z, next.z);
        let chord = nodes.len() - 1;
        if (p.re < 0.0) != (q.re < 0.0) {
            let s = p.re / (p.re - q.re);
            crossings.push(Crossing { axis: Axis::Imaginary, z: p + (q - p) * s, chord });
        }
        if (p.im < 0.0) != (q.im < 0.0) {
            let s = p.im / (p.im - q.im);
            crossings.push(Crossing { axis: Axis::Real, z: p + (q - p) * s, chord });
        }
        t += (q - p).norm();
        state = next;
        nodes.push(node_of(&state, t));
        if let Some(j) = (0..4).find(|&j| (j != start || t > 0.1) && (state.z - bp.z[j]).norm() < params.stop_distance) {
            break Ending::Branch(j);
        }
        if state.z.norm() >= params.truncation_radius {
            break Ending::Truncated;
        }
    };
    let mut endpoint_gap = 0.0;
    if let Ending::Branch(j) = ending {
        endpoint_gap = (state.z - bp.z[j]).norm();
        let tail = branch_integral(bp.z[j], bp.w[j], state.z, state.wa, state.wb, 16);
        nodes.push(TraceNode { z: bp.z[j], t: t + endpoint_gap, phi: state.phi - tail, w_q: bp.w[j], w_s: bp.w[j] });
    }
    Ok(CurveTrace { label: None, phi_origin: start, ending, endpoint_gap, nodes, crossings })
}

/// `Re φ_P(iy)` from the closed forms. On the imaginary axis the branches
/// are told apart by their real parts (`ψ_P` left, `ψ_R` right).
pub fn re_phi_p_on_axis(y: f64) -> Result<f64, Error> {
    let z = C::new(0.0, y);
    let psi = surface::solve_cubic(z)?;
    Ok(potentials::phi_p_closed(z, &psi).re)
}

fn bisect<F: Fn(f64) -> Result<f64, Error>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64, Error> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The zero of `Re φ_P` on the positive imaginary axis, bracketed by a scan
/// of `(0, 2]`.
pub fn ystar_by_scan() -> Result<f64, Error> {
    let samples = 40;
    let ys: Vec<f64> = (1..=samples).map(|k| 2.0 * k as f64 / samples as f64).collect();
    let vals: Vec<f64> = ys.iter().map(|&y| re_phi_p_on_axis(y)).collect::<Result<_, _>>()?;
    for k in 1..samples {
        if vals[k - 1].signum() != vals[k].signum() {
            return bisect(re_phi_p_on_axis, ys[k - 1], ys[k]);
        }
    }
    Err(Error::Bracket { lo: 0.0, hi: 2.0 })
}

/// `y*` from the traced `Γ_P*`: its crossing of the positive imaginary axis
/// seeds a bracket that is refined on `Re φ_P(iy) = 0`.
pub fn compute_ystar(gamma_p_star: &CurveTrace) -> Result<f64, Error> {
    let seed = gamma_p_star.crossings.iter().find(|c| c.axis == Axis::Imaginary && c.z.im > 0.0).map(|c| c.z.im);
    if let Some(y) = seed {
        if let Ok(v) = bisect(re_phi_p_on_axis, y - 1e-3, y + 1e-3) {
            return Ok(v);
        }
    }
    ystar_by_scan()
}

/// The contour `Γ_Q`, oriented from `z_2` to `z_3` below and from `z_4` to
/// `z_1` above, and the segment from `-iy*` to `iy*`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaQ {
    /// `Γ_P*` from `z_2` to `-iy*`.
    pub lower_p: CurveTrace,
    /// `Γ_R*` from `-iy*` to `z_3`.
    pub lower_r: CurveTrace,
    pub segment: CurveTrace,
    /// `Γ_R*` from `z_4` to `iy*`.
    pub upper_r: CurveTrace,
    /// `Γ_P*` from `iy*` to `z_1`.
    pub upper_p: CurveTrace,
}

impl GammaQ {
    pub fn pieces(&self) -> [&CurveTrace; 5] {
        [&self.lower_p, &self.lower_r, &self.segment, &self.upper_r, &self.upper_p]
    }
}

/// Splits `trace` at the exact point `at`, which must lie within the chord
/// `chord` up to the sag of the polyline.
fn split_trace(trace: &CurveTrace, chord: usize, at: C) -> Result<(CurveTrace, CurveTrace), Error> {
    let a = trace.nodes[chord];
    let (wq, ws) = pair_at(a.z, a.w_q, a.w_s, at).ok_or(Error::TraceFailure { z: at })?;
    let mid_partial = TraceNode { z: at, t: 0.0, phi: C::new(0.0, 0.0), w_q: wq, w_s: ws };
    let phi = a.phi + chord_integral(&a, &mid_partial, 16)?;
    let mid = TraceNode { z: at, t: a.t + (at - a.z).norm(), phi, w_q: wq, w_s: ws };
    let mut head: Vec<TraceNode> = trace.nodes[..=chord].to_vec();
    head.push(mid);
    let mut tail = vec![TraceNode { t: 0.0, ..mid }];
    let mut t = 0.0;
    let mut prev = at;
    for n in &trace.nodes[chord + 1..] {
        t += (n.z - prev).norm();
        prev = n.z;
        tail.push(TraceNode { t, ..*n });
    }
    let base = CurveTrace {
        label: trace.label,
        phi_origin: trace.phi_origin,
        ending: trace.ending,
        endpoint_gap: 0.0,
        nodes: Vec::new(),
        crossings: Vec::new(),
    };
    Ok((CurveTrace { nodes: head, ..base.clone() }, CurveTrace { nodes: tail, endpoint_gap: trace.endpoint_gap, ..base }))
}

fn axis_pair(y: f64) -> Result<(C, C), Error> {
    if y == 0.0 {
        let s = 1.0 / 3f64.sqrt();
        return Ok((C::new(s, 0.0), C::new(-s, 0.0)));
    }
    let psi = surface::solve_cubic(C::new(0.0, y))?;
    Ok((psi[2], psi[0]))
}

fn build_segment(ystar: f64, intervals: usize) -> Result<CurveTrace, Error> {
    let mut nodes = Vec::with_capacity(intervals + 1);
    let mut phi = C::new(0.0, 0.0);
    for j in 0..=intervals {
        let y = -ystar + 2.0 * ystar * j as f64 / intervals as f64;
        let y = if 2 * j == intervals { 0.0 } else { y };
        let (wr, wp) = axis_pair(y)?;
        if j > 0 {
            let prev: &TraceNode = &nodes[j - 1];
            let mut failed = None;
            phi += quad::chord(prev.z, C::new(0.0, y), 16, |s| match axis_pair(s.im) {
                Ok((a, b)) => (a - b) * 1.5,
                Err(e) => {
                    failed = Some(e);
                    C::new(0.0, 0.0)
                }
            });
            if let Some(e) = failed {
                return Err(e);
            }
        }
        nodes.push(TraceNode { z: C::new(0.0, y), t: y + ystar, phi, w_q: wr, w_s: wp });
    }
    Ok(CurveTrace {
        label: Some(ArcLabel::GammaQSegment),
        phi_origin: 1,
        ending: Ending::Truncated,
        endpoint_gap: 0.0,
        nodes,
        crossings: Vec::new(),
    })
}

/// The six domains of the partition by `Γ_P, Γ_Q, Γ_R, Γ_E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    DP,
    DR,
    DInfP,
    DInfR,
    DInfU,
    DInfL,
}

impl Region {
    pub fn in_d_infinity(self) -> bool {
        matches!(self, Region::DInfP | Region::DInfR | Region::DInfU | Region::DInfL)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Location {
    Region(Region),
    OnCurve { arc: ArcLabel, side: Side },
}

/// Result of [`Geometry::classify`]. `D_P*` and `D_R*` overlap the
/// partition, so membership in them is reported separately.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub location: Location,
    pub in_p_star: bool,
    pub in_r_star: bool,
}

impl Classification {
    pub fn region(&self) -> Option<Region> {
        match self.location {
            Location::Region(r) => Some(r),
            Location::OnCurve { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
struct Polygons {
    inf_p: Vec<C>,
    inf_r: Vec<C>,
    d_p: Vec<C>,
    d_r: Vec<C>,
    p_star: Vec<C>,
    r_star: Vec<C>,
}

/// The traced curve system with `Γ_Q`, `y*` and the region structure.
#[derive(Clone, Debug)]
pub struct Geometry {
    /// Arcs in [`ArcLabel::TRACED`] order, each with its final orientation:
    /// `Γ_P: z_1→z_2`, `Γ_R: z_3→z_4`, `Γ_P*: z_2→z_1`, `Γ_R*: z_4→z_3`,
    /// `Γ_{E,1}: z_1→∞`, `Γ_{E,2}: ∞→z_2`, `Γ_{E,3}: z_3→∞`, `Γ_{E,4}: ∞→z_4`.
    pub arcs: Vec<CurveTrace>,
    pub gamma_q: GammaQ,
    pub cuts: Cuts,
    pub ystar: f64,
    pub params: TraceParams,
    polygons: Polygons,
}

fn pick<'a>(traces: &'a [CurveTrace], start: usize, test: impl Fn(&CurveTrace) -> bool, what: &str) -> Result<&'a CurveTrace, Error> {
    let found: Vec<&CurveTrace> = traces.iter().filter(|t| t.phi_origin == start && test(t)).collect();
    match found.as_slice() {
        [one] => Ok(one),
        _ => Err(Error::Geometry(format!("expected exactly one {what} from z_{}, found {}", start + 1, found.len()))),
    }
}

fn crosses_real(t: &CurveTrace, positive: bool) -> bool {
    t.crossings.iter().any(|c| c.axis == Axis::Real && (c.z.re > 0.0) == positive)
}

fn imaginary_crossing(t: &CurveTrace, upper: bool) -> Result<&Crossing, Error> {
    t.crossings
        .iter()
        .find(|c| c.axis == Axis::Imaginary && (c.z.im > 0.0) == upper)
        .ok_or_else(|| Error::Geometry("arc does not cross the imaginary axis".into()))
}

impl Geometry {
    pub fn build(params: &TraceParams) -> Result<Geometry, Error> {
        let jobs: Vec<(usize, usize)> = (0..4).flat_map(|k| (0..3).map(move |m| (k, m))).collect();
        let traces: Vec<CurveTrace> =
            jobs.par_iter().map(|&(k, m)| trace_trajectory(k, m, params)).collect::<Result<_, _>>()?;

        let to = |j: usize| move |t: &CurveTrace| t.ending == Ending::Branch(j);
        let far = |t: &CurveTrace| t.ending == Ending::Truncated;
        let gamma_p = pick(&traces, 0, |t| to(1)(t) && crosses_real(t, false), "Γ_P")?.clone();
        let gamma_p_star = pick(&traces, 0, |t| to(1)(t) && crosses_real(t, true), "Γ_P*")?.clone().reversed();
        let e1 = pick(&traces, 0, far, "Γ_E1")?.clone();
        let e2 = pick(&traces, 1, far, "Γ_E2")?.clone().reversed();
        let gamma_r = pick(&traces, 2, |t| to(3)(t) && crosses_real(t, true), "Γ_R")?.clone();
        let gamma_r_star = pick(&traces, 2, |t| to(3)(t) && crosses_real(t, false), "Γ_R*")?.clone().reversed();
        let e3 = pick(&traces, 2, far, "Γ_E3")?.clone();
        let e4 = pick(&traces, 3, far, "Γ_E4")?.clone().reversed();

        let cuts = Cuts::new(gamma_p.points(), gamma_r.points());
        let mut arcs = vec![gamma_p, gamma_r, gamma_p_star, gamma_r_star, e1, e2, e3, e4];
        for (arc, label) in arcs.iter_mut().zip(ArcLabel::TRACED) {
            arc.label = Some(label);
            fix_roles(arc, &cuts)?;
        }

        let ystar = compute_ystar(&arcs[2])?;
        let p_star = &arcs[2];
        let r_star = &arcs[3];
        // Split at the later crossing first so chord indices stay valid.
        let (head, upper_p) = split_trace(p_star, imaginary_crossing(p_star, true)?.chord, C::new(0.0, ystar))?;
        let (lower_p, _) = split_trace(&head, imaginary_crossing(p_star, false)?.chord, C::new(0.0, -ystar))?;
        let (head, lower_r) = split_trace(r_star, imaginary_crossing(r_star, false)?.chord, C::new(0.0, -ystar))?;
        let (upper_r, _) = split_trace(&head, imaginary_crossing(r_star, true)?.chord, C::new(0.0, ystar))?;
        let segment = build_segment(ystar, 2000)?;
        let gamma_q = GammaQ { lower_p, lower_r, segment, upper_r, upper_p };

        let polygons = build_polygons(&arcs, &gamma_q, params.truncation_radius);
        Ok(Geometry { arcs, gamma_q, cuts, ystar, params: *params, polygons })
    }

    pub fn arc(&self, label: ArcLabel) -> &CurveTrace {
        match label {
            ArcLabel::GammaQSegment => &self.gamma_q.segment,
            _ => &self.arcs[ArcLabel::TRACED.iter().position(|&l| l == label).expect("traced label")],
        }
    }

    pub fn label(&self, z: C) -> Result<SheetValues, Error> {
        self.cuts.label(z)
    }

    pub fn label_side(&self, z: C, cut: Cut, side: Side) -> Result<SheetValues, Error> {
        self.cuts.label_side(z, cut, side)
    }

    pub fn classify(&self, z: C) -> Classification {
        let tol = self.params.on_curve_tol;
        let mut best: Option<(f64, ArcLabel, f64)> = None;
        for arc in self.arcs.iter().chain([&self.gamma_q.segment]) {
            let pts = arc.points();
            if let Some(pr) = polyline::project(&pts, z) {
                if pr.distance < tol && best.is_none_or(|b| pr.distance < b.0) {
                    best = Some((pr.distance, arc.label.expect("labeled"), pr.side));
                }
            }
        }
        let in_p_star = polyline::inside_polygon(&self.polygons.p_star, z);
        let in_r_star = polyline::inside_polygon(&self.polygons.r_star, z);
        if let Some((_, arc, side)) = best {
            let side = if side >= 0.0 { Side::Plus } else { Side::Minus };
            return Classification { location: Location::OnCurve { arc, side }, in_p_star, in_r_star };
        }
        let region = if z.norm() >= self.params.truncation_radius {
            let edge = std::f64::consts::LN_2 / 3.0;
            if z.re < -edge {
                Region::DInfP
            } else if z.re > edge {
                Region::DInfR
            } else if z.im > 0.0 {
                Region::DInfU
            } else {
                Region::DInfL
            }
        } else if polyline::inside_polygon(&self.polygons.inf_p, z) {
            Region::DInfP
        } else if polyline::inside_polygon(&self.polygons.inf_r, z) {
            Region::DInfR
        } else if polyline::inside_polygon(&self.polygons.d_p, z) {
            Region::DP
        } else if polyline::inside_polygon(&self.polygons.d_r, z) {
            Region::DR
        } else if z.im > 0.0 {
            Region::DInfU
        } else {
            Region::DInfL
        };
        Classification { location: Location::Region(region), in_p_star, in_r_star }
    }

    /// Distance from `z` to the nearest traced arc or the `Γ_Q` segment.
    pub fn distance_to_curves(&self, z: C) -> f64 {
        self.arcs
            .iter()
            .chain([&self.gamma_q.segment])
            .map(|a| polyline::distance(&a.points(), z))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Decides which tracked root is `ψ_Q` by labeling a middle node.
fn fix_roles(arc: &mut CurveTrace, cuts: &Cuts) -> Result<(), Error> {
    let label = arc.label.expect("labeled before fixing roles");
    let node = arc.nodes[arc.nodes.len() / 2];
    let values = match label {
        ArcLabel::GammaP => cuts.label_side(node.z, Cut::P, Side::Plus)?,
        ArcLabel::GammaR => cuts.label_side(node.z, Cut::R, Side::Plus)?,
        _ => cuts.label(node.z)?,
    };
    let q = values.psi(Sheet::Q);
    let s = values.psi(label.sheet());
    let keep = (node.w_q - q).norm() + (node.w_s - s).norm();
    let swap = (node.w_s - q).norm() + (node.w_q - s).norm();
    if keep.min(swap) > 1e-8 {
        return Err(Error::Geometry(format!("{} does not join sheets Q and {:?}", label.name(), label.sheet())));
    }
    if swap < keep {
        arc.swap_roles();
    }
    Ok(())
}

fn build_polygons(arcs: &[CurveTrace], q: &GammaQ, radius: f64) -> Polygons {
    let pts = |t: &CurveTrace| t.points();
    let rev = |t: &CurveTrace| {
        let mut v = t.points();
        v.reverse();
        v
    };
    let (gp, gr, gps, grs, e1, e2, e3, e4) = (&arcs[0], &arcs[1], &arcs[2], &arcs[3], &arcs[4], &arcs[5], &arcs[6], &arcs[7]);
    let wide = 4.0 * radius;

    let mut inf_p = rev(e1);
    inf_p.extend(pts(gp));
    inf_p.extend(rev(e2));
    inf_p.push(C::new(-wide, e2.first().im));
    inf_p.push(C::new(-wide, e1.last().im));

    let mut inf_r = pts(e4);
    inf_r.extend(rev(gr));
    inf_r.extend(pts(e3));
    inf_r.push(C::new(wide, e3.last().im));
    inf_r.push(C::new(wide, e4.first().im));

    let mut d_p = pts(gp);
    d_p.extend(pts(&q.lower_p));
    d_p.extend(pts(&q.upper_p));

    let mut d_r = pts(gr);
    d_r.extend(pts(&q.upper_r));
    d_r.extend(pts(&q.lower_r));

    let mut p_star = pts(gp);
    p_star.extend(pts(gps));
    let mut r_star = pts(gr);
    r_star.extend(pts(grs));

    Polygons { inf_p, inf_r, d_p, d_r, p_star, r_star }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn departure_angles_at_z1() {
        // One of the three directions from z_1 is that of Γ_P, at 215°.
        let angles = departure_angles(0);
        let target = 215f64.to_radians();
        let closest = angles
            .iter()
            .map(|a| {
                let d = (a - target).rem_euclid(2.0 * std::f64::consts::PI);
                d.min(2.0 * std::f64::consts::PI - d)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 1e-9, "{angles:?}");
    }

    #[test]
    fn ystar_from_axis_scan() {
        // Independent 30-digit quadrature of Re ∫(ψ_Q - ψ_P) from z_1 to iy
        // (mpmath, Simpson in τ with s = z_1 + τ²(iy - z_1)) puts the zero at
        // 0.6210282504.
        let y = ystar_by_scan().unwrap();
        assert!((y - 0.6210282504).abs() < 1e-9, "{y}");
        assert!(re_phi_p_on_axis(y).unwrap().abs() < 1e-10);
        assert!(re_phi_p_on_axis(0.3).unwrap().signum() != re_phi_p_on_axis(1.0).unwrap().signum());
    }

    #[test]
    fn arc_names_round_trip() {
        for a in ArcLabel::TRACED {
            assert_eq!(ArcLabel::parse(a.name()).unwrap(), a);
        }
        assert!(ArcLabel::parse("gammaX").is_err());
    }
}
