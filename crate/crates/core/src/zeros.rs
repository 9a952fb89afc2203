//! Zeros of `P_n, Q_n, R_n` (Aberth–Ehrlich at high precision) and of `E_n`
//! in a rectangle (argument principle on subdivided cells), plus comparison
//! of the zero counting measures with the limit measures.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::Target;
use crate::curves::{ArcLabel, CurveTrace, Geometry};
use crate::exact::{residue_polynomials, HPTriple, MpPoly, RationalPoly, TripleEvaluator};
use crate::mp::{MpComplex, MpCtx};
use crate::polyline;
use crate::potentials::wrap;
use crate::Error;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub z: C,
    pub multiplicity: usize,
    /// `|f(z)|` divided by the magnitude scale of the evaluation
    /// (`Σ|a_k||z|^k` for polynomials, the largest of the three terms for `E_n`).
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    /// `None` for a polynomial not tied to a diagonal index.
    pub target: Option<Target>,
    pub n: usize,
    pub precision_bits: usize,
    /// Sorted by `(Re, Im)`.
    pub zeros: Vec<Zero>,
}

impl ZeroSet {
    pub const CSV_HEADER: [&'static str; 5] = ["target", "n", "re", "im", "residual"];

    pub fn count(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    pub fn points(&self) -> Vec<C> {
        self.zeros.iter().map(|z| z.z).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.zeros.iter().map(|z| z.residual).fold(0.0, f64::max)
    }

    /// The zero closest to `point`.
    pub fn nearest(&self, point: C) -> Option<C> {
        self.points().into_iter().min_by(|a, b| (a - point).norm().total_cmp(&(b - point).norm()))
    }

    pub fn csv_records(&self) -> Vec<[String; 5]> {
        let name = self.target.map_or("poly", |t| t.name());
        self.zeros
            .iter()
            .flat_map(|z| std::iter::repeat_n(z, z.multiplicity))
            .map(|z| [name.to_string(), self.n.to_string(), format!("{:.17e}", z.z.re), format!("{:.17e}", z.z.im), format!("{:.3e}", z.residual)])
            .collect()
    }
}

fn sort_zeros(zeros: &mut [Zero]) {
    zeros.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
}

// Polynomial roots --------------------------------------------------------------

const MAX_ABERTH_ITERATIONS: usize = 2000;

struct PolyData {
    ctx: MpCtx,
    mp: MpPoly,
    ln_abs: Vec<f64>,
}

impl PolyData {
    fn new(poly: &RationalPoly, bits: usize) -> Self {
        let ctx = MpCtx::new(bits);
        let mp = MpPoly::new(&ctx, poly);
        let ln_abs = mp.coeffs().iter().map(|c| if c.is_zero() { f64::NEG_INFINITY } else { c.ln_abs() }).collect();
        PolyData { ctx, mp, ln_abs }
    }

    /// `ln Σ|a_k||z|^k`.
    fn ln_scale(&self, z: C) -> f64 {
        let lz = z.norm().ln();
        let logs: Vec<f64> = self.ln_abs.iter().enumerate().map(|(k, l)| l + k as f64 * lz).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
    }

    fn relative_residual(&self, z: &MpComplex) -> f64 {
        let v = self.mp.eval(&self.ctx, z);
        if v.is_zero() {
            return 0.0;
        }
        (v.ln_abs() - self.ln_scale(z.to_c64())).exp()
    }

    /// Fujiwara's bound `2 max_k |a_{d-k}/a_d|^{1/k}`.
    fn root_bound(&self) -> f64 {
        let d = self.ln_abs.len() - 1;
        let lead = self.ln_abs[d];
        let best = (1..=d).map(|k| (self.ln_abs[d - k] - lead) / k as f64).fold(f64::NEG_INFINITY, f64::max);
        2.0 * best.exp()
    }

    fn newton(&self, z: &MpComplex, steps: usize) -> MpComplex {
        let mut z = z.clone();
        for _ in 0..steps {
            let (v, d) = self.mp.eval_with_derivative(&self.ctx, &z);
            if v.is_zero() || d.is_zero() {
                break;
            }
            z = self.ctx.sub(&z, &self.ctx.div(&v, &d));
        }
        z
    }
}

/// All roots of `poly` by Aberth–Ehrlich iteration at `precision_bits`,
/// started on a jittered circle of radius `0.8 ×` Fujiwara's bound and
/// polished by Newton. Every root is certified with relative residual at
/// most `2^{-precision_bits/2}`.
pub fn poly_roots(poly: &RationalPoly, precision_bits: usize) -> Result<ZeroSet, Error> {
    let d = poly.degree().filter(|&d| d >= 1).ok_or_else(|| Error::InvalidInput("root finding needs degree at least 1".into()))?;
    // Roots at the origin are split off exactly.
    let low = poly.coeffs().iter().take_while(|c| num_traits::Zero::is_zero(*c)).count();
    let reduced = RationalPoly::new(poly.coeffs()[low..].to_vec());
    let data = PolyData::new(&reduced, precision_bits);
    let ctx = &data.ctx;
    let radius = if low == d { 0.0 } else { 0.8 * data.root_bound() };
    let golden = 0.618_033_988_749_895;
    let mut roots: Vec<MpComplex> = (0..d - low)
        .map(|k| {
            let jitter = ((k as f64 + 1.0) * golden).fract() - 0.5;
            let theta = 2.0 * PI * (k as f64 + 0.25 + 0.2 * jitter) / (d - low) as f64;
            ctx.from_c64(C::from_polar(radius, theta))
        })
        .collect();
    let mut fast: Vec<C> = roots.iter().map(|r| r.to_c64()).collect();
    let mut done = vec![false; roots.len()];
    let tol = 2f64.powf(-0.9 * precision_bits as f64);
    let noise = 2f64.powf(-(precision_bits as f64) + 16.0);
    let one = ctx.one();

    let mut iterations = 0;
    while done.iter().any(|d| !d) {
        iterations += 1;
        if iterations > MAX_ABERTH_ITERATIONS {
            let partial = done.iter().filter(|d| **d).count();
            return Err(Error::NonConvergence { what: format!("Aberth iteration ({partial} of {} roots converged)", roots.len()) });
        }
        for i in 0..roots.len() {
            if done[i] {
                continue;
            }
            let (v, dv) = data.mp.eval_with_derivative(ctx, &roots[i]);
            if v.is_zero() || (v.ln_abs() - data.ln_scale(fast[i])).exp() <= noise {
                done[i] = true;
                continue;
            }
            let ratio = ctx.div(&v, &dv);
            // The pairwise sum only needs f64: its error enters at second order.
            let s: C = (0..roots.len()).filter(|&j| j != i && fast[j] != fast[i]).map(|j| 1.0 / (fast[i] - fast[j])).sum();
            let denom = ctx.sub(&one, &ctx.mul(&ratio, &ctx.from_c64(s)));
            let step = ctx.div(&ratio, &denom);
            roots[i] = ctx.sub(&roots[i], &step);
            fast[i] = roots[i].to_c64();
            if step.to_c64().norm() <= tol * fast[i].norm().max(1e-3) {
                done[i] = true;
            }
        }
    }

    let cert = 2f64.powf(-(precision_bits as f64) / 2.0);
    let mut zeros = Vec::with_capacity(d);
    if low > 0 {
        zeros.push(Zero { z: C::new(0.0, 0.0), multiplicity: low, residual: 0.0 });
    }
    for r in &roots {
        let polished = data.newton(r, 3);
        let residual = data.relative_residual(&polished);
        let z = polished.to_c64();
        if residual > cert {
            return Err(Error::NonConvergence { what: format!("root near {z} has residual {residual:e}") });
        }
        zeros.push(Zero { z, multiplicity: 1, residual });
    }
    merge_clusters(&mut zeros, 2f64.powf(-(precision_bits as f64) / 4.0));
    sort_zeros(&mut zeros);
    Ok(ZeroSet { target: None, n: d, precision_bits, zeros })
}

fn merge_clusters(zeros: &mut Vec<Zero>, radius: f64) {
    let mut out: Vec<Zero> = Vec::with_capacity(zeros.len());
    for z in zeros.drain(..) {
        match out.iter_mut().find(|o| (o.z - z.z).norm() <= radius) {
            Some(o) => {
                o.multiplicity += z.multiplicity;
                o.residual = o.residual.max(z.residual);
            }
            None => out.push(z),
        }
    }
    *zeros = out;
}

/// Largest movement of the zeros when re-polished by Newton at doubled
/// precision.
pub fn stability_shift(poly: &RationalPoly, set: &ZeroSet) -> f64 {
    let data = PolyData::new(poly, 2 * set.precision_bits);
    set.zeros
        .iter()
        .filter(|z| z.multiplicity == 1)
        .map(|z| {
            let start = data.ctx.from_c64(z.z);
            let mut w = data.newton(&start, 6);
            // One more step as a convergence guard.
            w = data.newton(&w, 1);
            (w.to_c64() - z.z).norm()
        })
        .fold(0.0, f64::max)
}

/// Zeros of `P_n`, `Q_n` or `R_n`.
pub fn polynomial_zeros(n: usize, target: Target, precision_bits: usize) -> Result<ZeroSet, Error> {
    let triple = residue_polynomials(n)?;
    let poly = target_poly(&triple, target)?;
    let mut set = poly_roots(poly, precision_bits)?;
    set.target = Some(target);
    set.n = n;
    Ok(set)
}

pub fn target_poly(triple: &HPTriple, target: Target) -> Result<&RationalPoly, Error> {
    match target {
        Target::P => Ok(&triple.p),
        Target::Q => Ok(&triple.q),
        Target::R => Ok(&triple.r),
        _ => Err(Error::InvalidInput(format!("{} is not a polynomial target", target.name()))),
    }
}

// Zeros of the remainder ----------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, Error> {
        if !(x0 < x1 && y0 < y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("degenerate box [{x0}, {x1}] × [{y0}, {y1}]")));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    /// Parses `x0,x1,y0,y1`.
    pub fn parse(s: &str) -> Result<Self, Error> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("box component {t:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        match v.as_slice() {
            [a, b, c, d] => Rect::new(*a, *b, *c, *d),
            _ => Err(Error::Parse(format!("box needs four comma-separated numbers, got {s:?}"))),
        }
    }

    pub fn contains(&self, z: C) -> bool {
        (self.x0..=self.x1).contains(&z.re) && (self.y0..=self.y1).contains(&z.im)
    }

    fn corners(&self) -> [C; 4] {
        [C::new(self.x0, self.y0), C::new(self.x1, self.y0), C::new(self.x1, self.y1), C::new(self.x0, self.y1)]
    }

    fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn center(&self) -> C {
        C::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Four children split slightly off center so cell edges avoid the
    /// symmetry lines, in particular the origin.
    fn split(&self, fraction: f64) -> [Rect; 4] {
        let xm = self.x0 + fraction * (self.x1 - self.x0);
        let ym = self.y0 + fraction * (self.y1 - self.y0);
        [
            Rect { x0: self.x0, x1: xm, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: ym, y1: self.y1 },
            Rect { x0: self.x0, x1: xm, y0: ym, y1: self.y1 },
        ]
    }
}

const MAX_BITS: usize = 1 << 15;

/// `E_n` at a precision raised until the three-term sum keeps at least 64
/// good bits.
pub struct RemainderEvaluator {
    pub n: usize,
    triple: HPTriple,
    base_bits: usize,
    evaluators: HashMap<usize, TripleEvaluator>,
}

/// One evaluation of `E_n`.
#[derive(Clone, Debug)]
pub struct RemainderValue {
    pub value: MpComplex,
    pub derivative: Option<MpComplex>,
    /// `ln max(|P_n e^{-3nz}|, |Q_n|, |R_n e^{3nz}|)`.
    pub ln_terms: f64,
    pub bits: usize,
}

impl RemainderValue {
    pub fn relative_size(&self) -> f64 {
        if self.value.is_zero() {
            0.0
        } else {
            (self.value.ln_abs() - self.ln_terms).exp()
        }
    }
}

impl RemainderEvaluator {
    pub fn new(n: usize, precision_bits: usize) -> Result<Self, Error> {
        Ok(RemainderEvaluator { n, triple: residue_polynomials(n)?, base_bits: precision_bits, evaluators: HashMap::new() })
    }

    fn at_bits(&mut self, bits: usize) -> &mut TripleEvaluator {
        let triple = &self.triple;
        self.evaluators.entry(bits).or_insert_with(|| TripleEvaluator::new(triple, bits))
    }

    pub fn eval(&mut self, z: C, with_derivative: bool) -> Result<RemainderValue, Error> {
        let mut bits = self.base_bits;
        loop {
            let ev = self.at_bits(bits);
            let zm = ev.ctx.from_c64(z);
            let [p, q, r] = ev.polys(&zm);
            let (em, ep) = ev.exponentials(&zm);
            let ctx = &ev.ctx;
            let terms = [ctx.mul(&p, &em), q, ctx.mul(&r, &ep)];
            let ln_terms = terms.iter().filter(|t| !t.is_zero()).map(|t| t.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
            let value = ctx.add(&ctx.add(&terms[0], &terms[1]), &terms[2]);
            let lost = if value.is_zero() { f64::INFINITY } else { (ln_terms - value.ln_abs()) / LN_2 };
            if lost + 64.0 <= bits as f64 {
                let derivative = with_derivative.then(|| ev.remainder_with_derivative(&zm).1);
                return Ok(RemainderValue { value, derivative, ln_terms, bits });
            }
            let want = ((lost.min(1e9) + 128.0) / 64.0).ceil() as usize * 64;
            if bits >= MAX_BITS {
                return Err(Error::NonConvergence { what: format!("E_{} at {z} needs more than {MAX_BITS} bits", self.n) });
            }
            bits = want.max(2 * bits).min(MAX_BITS);
        }
    }

    /// `ln(E_n(z)/z^{3n+2})`, the remainder with its zero at the origin
    /// divided out.
    fn ln_reduced(&mut self, z: C) -> Result<C, Error> {
        if z.norm() < 1e-12 {
            return Err(Error::InvalidInput("the remainder is not evaluated at the origin".into()));
        }
        let v = self.eval(z, false)?;
        if v.value.is_zero() {
            return Err(Error::BoundaryZero { z });
        }
        Ok(v.value.ln() - (3 * self.n + 2) as f64 * z.ln())
    }
}

struct BoxSearch<'a> {
    eval: &'a mut RemainderEvaluator,
    cache: HashMap<(u64, u64), C>,
}

const SPLIT_FRACTION: f64 = 0.5 - 0.0123;
const MAX_ARG_STEP: f64 = PI / 4.0;

impl BoxSearch<'_> {
    fn ln_at(&mut self, z: C) -> Result<C, Error> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let v = self.eval.ln_reduced(z)?;
        self.cache.insert(key, v);
        Ok(v)
    }

    /// Change of `arg(E_n/z^{3n+2})` along the segment `a → b`.
    fn edge(&mut self, a: C, b: C) -> Result<f64, Error> {
        // E_n oscillates at most like e^{±3nz}; start with a few samples per
        // unit of phase and bisect wherever the phase still jumps.
        let pieces = (((b - a).norm() * 3.0 * self.eval.n as f64) / MAX_ARG_STEP).ceil().max(4.0) as usize;
        let mut total = 0.0;
        let mut prev = self.ln_at(a)?;
        for k in 1..=pieces {
            let t0 = a + (b - a) * ((k - 1) as f64 / pieces as f64);
            let t1 = if k == pieces { b } else { a + (b - a) * (k as f64 / pieces as f64) };
            let next = self.ln_at(t1)?;
            total += self.refine(t0, prev, t1, next, 0)?;
            prev = next;
        }
        Ok(total)
    }

    fn refine(&mut self, a: C, la: C, b: C, lb: C, depth: usize) -> Result<f64, Error> {
        let step = wrap(C::new(0.0, lb.im - la.im), 2.0 * PI).im;
        if step.abs() <= MAX_ARG_STEP && depth > 0 || step.abs() <= MAX_ARG_STEP / 4.0 {
            return Ok(step);
        }
        if depth > 40 || (b - a).norm() < 1e-13 {
            return Err(Error::BoundaryZero { z: 0.5 * (a + b) });
        }
        let m = 0.5 * (a + b);
        let lm = self.ln_at(m)?;
        Ok(self.refine(a, la, m, lm, depth + 1)? + self.refine(m, lm, b, lb, depth + 1)?)
    }

    fn count(&mut self, cell: &Rect) -> Result<usize, Error> {
        let c = cell.corners();
        let mut total = 0.0;
        for k in 0..4 {
            total += self.edge(c[k], c[(k + 1) % 4])?;
        }
        let winding = total / (2.0 * PI);
        let snapped = winding.round();
        if (winding - snapped).abs() > 0.25 || snapped < 0.0 {
            return Err(Error::NonConvergence { what: format!("winding number {winding} on a cell near {}", cell.center()) });
        }
        Ok(snapped as usize)
    }

    /// Newton from the cell center; `Some` when it converges inside the cell.
    fn newton_in(&mut self, cell: &Rect) -> Result<Option<Zero>, Error> {
        let mut z = cell.center();
        for _ in 0..60 {
            let v = self.eval.eval(z, true)?;
            let d = v.derivative.as_ref().expect("derivative requested");
            if d.is_zero() {
                return Ok(None);
            }
            let (vv, ve) = v.value.to_c64_scaled();
            let (dv, de) = d.to_c64_scaled();
            let step = vv / dv * 2f64.powi((ve - de).clamp(-1000, 1000) as i32);
            z -= step;
            if !z.is_finite() || (z - cell.center()).norm() > cell.diameter() {
                return Ok(None);
            }
            if step.norm() <= 1e-15 * z.norm().max(1.0) {
                let margin = 1e-12;
                let inside = z.re >= cell.x0 - margin && z.re <= cell.x1 + margin && z.im >= cell.y0 - margin && z.im <= cell.y1 + margin;
                if !inside {
                    return Ok(None);
                }
                let residual = self.eval.eval(z, false)?.relative_size();
                return Ok(Some(Zero { z, multiplicity: 1, residual }));
            }
        }
        Ok(None)
    }

    fn search(&mut self, cell: Rect, count: usize, out: &mut Vec<Zero>) -> Result<(), Error> {
        if count == 0 {
            return Ok(());
        }
        if count == 1 && cell.diameter() < 0.25 {
            if let Some(z) = self.newton_in(&cell)? {
                out.push(z);
                return Ok(());
            }
        }
        if cell.diameter() < 1e-9 {
            // A cluster the cells cannot separate further.
            let z = self.newton_in(&cell)?.map_or(cell.center(), |z| z.z);
            let residual = self.eval.eval(z, false)?.relative_size();
            out.push(Zero { z, multiplicity: count, residual });
            return Ok(());
        }
        let children = cell.split(SPLIT_FRACTION);
        let mut counts = [0usize; 4];
        for (k, c) in children.iter().enumerate() {
            counts[k] = self.count(c)?;
        }
        if counts.iter().sum::<usize>() != count {
            return Err(Error::NonConvergence { what: format!("cell counts {counts:?} do not add up to {count} near {}", cell.center()) });
        }
        for (c, k) in children.into_iter().zip(counts) {
            self.search(c, k, out)?;
        }
        Ok(())
    }
}

/// Zeros of `E_n` in `rect`, excluding the interpolation zero of order
/// `3n+2` at the origin (the search runs on `E_n / z^{3n+2}`).
pub fn entire_zeros_in_box(n: usize, rect: Rect, precision_bits: usize) -> Result<ZeroSet, Error> {
    let mut eval = RemainderEvaluator::new(n, precision_bits)?;
    let mut last_err = None;
    // A zero on a cell edge is handled by nudging the outer box.
    for attempt in 0..4 {
        let nudge = 1e-7 * attempt as f64;
        let cell = Rect { x0: rect.x0 - nudge, x1: rect.x1 + nudge * 0.7, y0: rect.y0 - nudge * 0.3, y1: rect.y1 + nudge * 1.1 };
        let mut search = BoxSearch { eval: &mut eval, cache: HashMap::new() };
        let outcome = search.count(&cell).and_then(|total| {
            let mut zeros = Vec::new();
            search.search(cell, total, &mut zeros)?;
            Ok((total, zeros))
        });
        match outcome {
            Ok((total, mut zeros)) => {
                zeros.retain(|z| rect.contains(z.z) || nudge > 0.0);
                sort_zeros(&mut zeros);
                let found: usize = zeros.iter().map(|z| z.multiplicity).sum();
                if found != total && nudge == 0.0 {
                    return Err(Error::NonConvergence { what: format!("found {found} zeros, winding total {total}") });
                }
                return Ok(ZeroSet { target: Some(Target::E), n, precision_bits, zeros });
            }
            Err(e @ Error::BoundaryZero { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Winding number of `E_n` around the circle `|z - center| = radius`.
pub fn remainder_winding(n: usize, center: C, radius: f64, precision_bits: usize) -> Result<i64, Error> {
    let mut eval = RemainderEvaluator::new(n, precision_bits)?;
    let samples = 64 + 12 * n;
    let arg_at = |eval: &mut RemainderEvaluator, t: f64| -> Result<f64, Error> {
        let z = center + C::from_polar(radius, t);
        Ok(eval.eval(z, false)?.value.arg())
    };
    let mut total = 0.0;
    let mut prev = arg_at(&mut eval, 0.0)?;
    for k in 1..=samples {
        let a = arg_at(&mut eval, 2.0 * PI * k as f64 / samples as f64)?;
        let step = wrap(C::new(0.0, a - prev), 2.0 * PI).im;
        if step.abs() > MAX_ARG_STEP * 2.0 {
            return Err(Error::NonConvergence { what: "phase jumps on the winding circle".into() });
        }
        total += step;
        prev = a;
    }
    let w = total / (2.0 * PI);
    if (w - w.round()).abs() > 0.25 {
        return Err(Error::NonConvergence { what: format!("winding {w} is not close to an integer") });
    }
    Ok(w.round() as i64)
}

// Comparison with the limit measures ------------------------------------------------

/// Piece of a carrier: a traced arc with its cumulative limit mass at each node.
struct Piece {
    name: &'static str,
    points: Vec<C>,
    cumulative: Vec<f64>,
}

impl Piece {
    /// Cumulative mass from `Im Δφ / π`; `φ` integrates the density's root
    /// difference along every traced arc.
    fn new(name: &'static str, arc: &CurveTrace) -> Self {
        let phi0 = arc.nodes[0].phi;
        let raw: Vec<f64> = arc.nodes.iter().map(|n| (n.phi - phi0).im / PI).collect();
        let sign = if raw.last().copied().unwrap_or(0.0) < 0.0 { -1.0 } else { 1.0 };
        Piece { name, points: arc.points(), cumulative: raw.into_iter().map(|m| m * sign).collect() }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().expect("nonempty arc")
    }

    fn mass_at(&self, pr: &polyline::Projection) -> f64 {
        let (a, b) = (self.cumulative[pr.segment], self.cumulative[pr.segment + 1]);
        a + pr.t * (b - a)
    }
}

fn carrier(geom: &Geometry, target: Target) -> Result<Vec<Piece>, Error> {
    let q = &geom.gamma_q;
    Ok(match target {
        Target::P => vec![Piece::new("gamma_p", geom.arc(ArcLabel::GammaP))],
        Target::R => vec![Piece::new("gamma_r", geom.arc(ArcLabel::GammaR))],
        Target::Q => vec![
            Piece::new("lower_p", &q.lower_p),
            Piece::new("lower_r", &q.lower_r),
            Piece::new("segment", &q.segment),
            Piece::new("upper_r", &q.upper_r),
            Piece::new("upper_p", &q.upper_p),
        ],
        // Every E piece runs outward from its branch point.
        Target::E => vec![
            Piece::new(ArcLabel::GammaE1.name(), geom.arc(ArcLabel::GammaE1)),
            Piece::new(ArcLabel::GammaE2.name(), &geom.arc(ArcLabel::GammaE2).clone().reversed()),
            Piece::new(ArcLabel::GammaE3.name(), geom.arc(ArcLabel::GammaE3)),
            Piece::new(ArcLabel::GammaE4.name(), &geom.arc(ArcLabel::GammaE4).clone().reversed()),
        ],
        Target::Xn => return Err(Error::InvalidInput("X_n has no zero counting measure".into())),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceFraction {
    pub piece: String,
    pub zeros: usize,
    /// Zero count divided by `n`.
    pub empirical: f64,
    /// Limit mass of the piece (inside the box for `E_n`).
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub target: Target,
    pub n: usize,
    pub zero_count: usize,
    pub max_distance: f64,
    /// `sup` over initial sub-arcs of each piece of
    /// `|ν_n(sub-arc) - μ(sub-arc)|`, with `ν_n` the counting measure over `n`.
    pub discrepancy: f64,
    pub pieces: Vec<PieceFraction>,
    /// For `E_n`: `(∫|s|^{-2}dν_n, ∫|s|^{-2}dμ_E)` over the box.
    pub weighted_total: Option<(f64, f64)>,
}

/// Distances, Kolmogorov-type discrepancy and piece fractions of the zero
/// counting measure against `μ_P`, `μ_Q`, `μ_R` or `μ_E`. For `E_n` the limit
/// side is restricted to `rect`.
pub fn empirical_vs_limit(set: &ZeroSet, geom: &Geometry, rect: Option<Rect>) -> Result<DiscrepancyReport, Error> {
    let target = set.target.ok_or_else(|| Error::InvalidInput("zero set has no target".into()))?;
    let pieces = carrier(geom, target)?;
    let nf = set.n as f64;
    let inside = |z: C| rect.is_none_or(|r| r.contains(z));

    // Assign each zero to its nearest piece.
    let mut params: Vec<Vec<f64>> = vec![Vec::new(); pieces.len()];
    let mut max_distance: f64 = 0.0;
    let mut count = 0;
    for zero in &set.zeros {
        let (k, pr) = pieces
            .iter()
            .enumerate()
            .map(|(k, p)| (k, polyline::project(&p.points, zero.z).expect("nonempty arc")))
            .min_by(|a, b| a.1.distance.total_cmp(&b.1.distance))
            .expect("at least one piece");
        max_distance = max_distance.max(pr.distance);
        for _ in 0..zero.multiplicity {
            params[k].push(pieces[k].mass_at(&pr));
        }
        count += zero.multiplicity;
    }

    let mut discrepancy: f64 = 0.0;
    let mut fractions = Vec::new();
    for (piece, ts) in pieces.iter().zip(params.iter_mut()) {
        ts.sort_by(f64::total_cmp);
        // The limit mass only counts the part of the arc inside the box.
        let mut limit_mass = piece.total();
        if rect.is_some() {
            limit_mass = inside_prefix_mass(piece, &inside);
        }
        for (j, t) in ts.iter().enumerate() {
            let t = t.min(limit_mass);
            discrepancy = discrepancy.max((j as f64 / nf - t).abs()).max(((j + 1) as f64 / nf - t).abs());
        }
        discrepancy = discrepancy.max((ts.len() as f64 / nf - limit_mass).abs());
        fractions.push(PieceFraction { piece: piece.name.to_string(), zeros: ts.len(), empirical: ts.len() as f64 / nf, limit: limit_mass });
    }

    let weighted_total = (target == Target::E).then(|| {
        let empirical = set.zeros.iter().map(|z| z.multiplicity as f64 / z.z.norm_sqr()).sum::<f64>() / nf;
        let limit = pieces
            .iter()
            .map(|p| {
                p.points
                    .windows(2)
                    .zip(p.cumulative.windows(2))
                    .filter(|(w, _)| inside(w[0]) && inside(w[1]))
                    .map(|(w, m)| (m[1] - m[0]) / (0.5 * (w[0] + w[1])).norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        (empirical, limit)
    });

    Ok(DiscrepancyReport { target, n: set.n, zero_count: count, max_distance, discrepancy, pieces: fractions, weighted_total })
}

/// Mass of the initial part of a piece that stays inside the box.
fn inside_prefix_mass(piece: &Piece, inside: &dyn Fn(C) -> bool) -> f64 {
    let last = piece.points.iter().position(|&z| !inside(z)).unwrap_or(piece.points.len());
    if last == 0 {
        0.0
    } else {
        piece.cumulative[last - 1]
    }
}

/// Piece masses of `μ_Q` on `Γ_Q` in the order lower_p, lower_r, segment,
/// upper_r, upper_p.
pub fn q_piece_masses(geom: &Geometry) -> Vec<(String, f64)> {
    carrier(geom, Target::Q).expect("Q has a carrier").iter().map(|p| (p.name.to_string(), p.total())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::RationalPoly;

    #[test]
    fn low_degree_roots() {
        let q1 = polynomial_zeros(1, Target::Q, 128).unwrap();
        assert_eq!(q1.count(), 1);
        assert!(q1.zeros[0].z.norm() < 1e-30);
        let p1 = polynomial_zeros(1, Target::P, 128).unwrap();
        assert!((p1.zeros[0].z - C::new(-1.0, 0.0)).norm() < 1e-14);
        let r1 = polynomial_zeros(1, Target::R, 128).unwrap();
        assert!((r1.zeros[0].z - C::new(1.0, 0.0)).norm() < 1e-14);
        let q2 = polynomial_zeros(2, Target::Q, 128).unwrap();
        let expected = 1.0 / 6f64.sqrt();
        assert!((q2.zeros[0].z - C::new(0.0, -expected)).norm() < 1e-14);
        assert!((q2.zeros[1].z - C::new(0.0, expected)).norm() < 1e-14);
    }

    #[test]
    fn multiplicity_at_origin() {
        let poly = RationalPoly::from_i64(&[0, 0, -1, 1]);
        let set = poly_roots(&poly, 128).unwrap();
        assert_eq!(set.count(), 3);
        assert_eq!(set.zeros[0].multiplicity, 2);
        assert!((set.zeros[1].z - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn constant_polynomial_is_rejected() {
        assert!(poly_roots(&RationalPoly::from_i64(&[3]), 128).is_err());
    }

    #[test]
    fn rect_parsing() {
        let r = Rect::parse("-2,2,-1.5,1.5").unwrap();
        assert_eq!(r, Rect { x0: -2.0, x1: 2.0, y0: -1.5, y1: 1.5 });
        assert!(Rect::parse("1,0,0,1").is_err());
        assert!(Rect::parse("1,2,3").is_err());
    }

    #[test]
    fn winding_of_first_remainder() {
        assert_eq!(remainder_winding(1, C::new(0.0, 0.0), 0.1, 128).unwrap(), 5);
        assert_eq!(remainder_winding(3, C::new(0.0, 0.0), 0.1, 128).unwrap(), 11);
    }

    #[test]
    fn q_piece_masses_add_up() {
        let geom = crate::test_geometry();
        let masses = q_piece_masses(geom);
        let total: f64 = masses.iter().map(|m| m.1).sum();
        assert!((total - 1.0).abs() < 1e-8, "{masses:?}");
        assert!(masses.iter().all(|m| m.1 > 0.0));
        // Mirror symmetry of the upper and lower pieces.
        assert!((masses[0].1 - masses[4].1).abs() < 1e-8);
    }
}
