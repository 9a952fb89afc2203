//! Logarithmic potentials of the limit measures, the functions `φ_P, φ_R`,
//! measure densities and masses.
//!
//! The `g`-functions come from closed forms in the branch values; only their
//! real parts are single valued, imaginary parts are principal-log values
//! and are compared modulo `2πi` (or `πi` for `φ`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curves::{self, ArcLabel, Classification, CurveTrace, Geometry, Location, Region};
use crate::polyline;
use crate::quad;
use crate::surface::{self, label_far, Cut, Sheet, SheetValues, Side};
use crate::Error;

type C = Complex64;

/// `log 2 - πi`.
pub fn ell() -> C {
    C::new(std::f64::consts::LN_2, -std::f64::consts::PI)
}

fn log_cubic_factor(w: C) -> C {
    (w * (w * w - 1.0)).ln()
}

/// `g_P` from `w = ψ_P(z)`.
pub fn g_p_closed(z: C, w: C) -> C {
    3.0 * z * (w + 1.0) - log_cubic_factor(w) - 1.0 + (2.0f64 / 3.0).ln()
}

/// `g_R` from `w = ψ_R(z)`.
pub fn g_r_closed(z: C, w: C) -> C {
    3.0 * z * (w - 1.0) - log_cubic_factor(w) - 1.0 + (2.0f64 / 3.0).ln()
}

/// `g_Q` from the region-dependent branch `w` (`ψ_Q` in the unbounded
/// domain, `ψ_P` in `D_P`, `ψ_R` in `D_R`).
pub fn g_q_closed(z: C, w: C) -> C {
    3.0 * z * w - log_cubic_factor(w) - 1.0 + C::new(-1.0 / 3.0, 0.0).ln()
}

/// `φ_P` from the labeled branches `[ψ_P, ψ_Q, ψ_R]`.
pub fn phi_p_closed(z: C, psi: &[C; 3]) -> C {
    let gp = g_p_closed(z, psi[0]);
    let gr = g_r_closed(z, psi[2]);
    (3.0 * z.ln() + 3.0 * z + ell() - 2.0 * gp - gr) * 0.5
}

/// `φ_R` from the labeled branches `[ψ_P, ψ_Q, ψ_R]`.
pub fn phi_r_closed(z: C, psi: &[C; 3]) -> C {
    let gp = g_p_closed(z, psi[0]);
    let gr = g_r_closed(z, psi[2]);
    (3.0 * z.ln() - 3.0 * z + ell() - gp - 2.0 * gr) * 0.5
}

/// Reduces the imaginary part of `x` into `(-period/2, period/2]`.
pub fn wrap(x: C, period: f64) -> C {
    let k = (x.im / period).round();
    C::new(x.re, x.im - k * period)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchNote {
    Mod2PiI,
    ModPiI,
    SingleValuedRealPart,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialValue {
    pub value: C,
    pub branch_note: BranchNote,
}

/// Where `z` lies and the branch values there. On `Γ_P` or `Γ_R` the values
/// are `+`-side limits and the cut is recorded.
#[derive(Clone, Copy, Debug)]
pub struct PointData {
    pub z: C,
    pub class: Classification,
    pub values: SheetValues,
    pub on_cut: Option<Cut>,
}

pub fn point_data(geom: &Geometry, z: C) -> Result<PointData, Error> {
    if z.norm() == 0.0 {
        return Err(Error::PoleAtOrigin);
    }
    let class = geom.classify(z);
    let (values, on_cut) = match geom.label(z) {
        Ok(v) => (v, None),
        Err(Error::OnCut { cut, .. }) => (geom.label_side(z, cut, Side::Plus)?, Some(cut)),
        Err(e) => return Err(e),
    };
    Ok(PointData { z, class, values, on_cut })
}

fn on_arc(z: C, arc: ArcLabel) -> Error {
    Error::OnArc { z, arc: arc.name().to_string() }
}

/// The sheet whose branch enters `g_Q` at this point: `P` in `D_P`, `R` in
/// `D_R`, `Q` in `D_∞`. The `+` sides of the cuts face `D_P` and `D_R`.
pub fn q_sheet(pd: &PointData) -> Result<Sheet, Error> {
    let z = pd.z;
    match pd.class.location {
        Location::Region(Region::DP) => Ok(Sheet::P),
        Location::Region(Region::DR) => Ok(Sheet::R),
        Location::Region(_) => Ok(Sheet::Q),
        Location::OnCurve { arc, .. } => match arc {
            ArcLabel::GammaP => Ok(Sheet::P),
            ArcLabel::GammaR => Ok(Sheet::R),
            ArcLabel::GammaE1 | ArcLabel::GammaE2 | ArcLabel::GammaE3 | ArcLabel::GammaE4 => Ok(Sheet::Q),
            ArcLabel::GammaPStar if z.re > 0.0 => Ok(Sheet::R),
            ArcLabel::GammaRStar if z.re < 0.0 => Ok(Sheet::P),
            _ => Err(on_arc(z, arc)),
        },
    }
}

/// `g_P`, `g_Q` or `g_R` at `z`, defined modulo `2πi`.
pub fn g(geom: &Geometry, z: C, which: Sheet) -> Result<PotentialValue, Error> {
    let pd = point_data(geom, z)?;
    let v = &pd.values;
    let value = match which {
        Sheet::Q => g_q_closed(z, v.psi(q_sheet(&pd)?)),
        Sheet::P if pd.on_cut == Some(Cut::P) => return Err(Error::OnCut { z, cut: Cut::P }),
        Sheet::R if pd.on_cut == Some(Cut::R) => return Err(Error::OnCut { z, cut: Cut::R }),
        Sheet::P => g_p_closed(z, v.psi(Sheet::P)),
        Sheet::R => g_r_closed(z, v.psi(Sheet::R)),
    };
    Ok(PotentialValue { value, branch_note: BranchNote::Mod2PiI })
}

/// `φ_P` or `φ_R` at `z` off `Γ_P ∪ Γ_R`, defined modulo `πi`.
pub fn phi(geom: &Geometry, z: C, which: Sheet) -> Result<PotentialValue, Error> {
    if z.norm() == 0.0 {
        return Err(Error::PoleAtOrigin);
    }
    let v = geom.label(z)?;
    let value = match which {
        Sheet::P => phi_p_closed(z, &v.psi),
        Sheet::R => phi_r_closed(z, &v.psi),
        Sheet::Q => return Err(Error::InvalidInput("phi is defined for P and R only".into())),
    };
    Ok(PotentialValue { value, branch_note: BranchNote::ModPiI })
}

/// `g_E` at `z` off `Γ_E`, defined modulo `2πi`.
pub fn g_e(geom: &Geometry, z: C) -> Result<C, Error> {
    let pd = point_data(geom, z)?;
    if let Location::OnCurve { arc: arc @ (ArcLabel::GammaE1 | ArcLabel::GammaE2 | ArcLabel::GammaE3 | ArcLabel::GammaE4), .. } =
        pd.class.location
    {
        return Err(on_arc(z, arc));
    }
    let gp = g_p_closed(z, pd.values.psi(Sheet::P));
    let gr = g_r_closed(z, pd.values.psi(Sheet::R));
    Ok(match pd.class.region() {
        Some(Region::DInfR) => gr + 3.0 * z - 3.0 * z.ln() - ell(),
        Some(Region::DInfP) => gp - 3.0 * z - 3.0 * z.ln() - ell(),
        _ => -gp - gr,
    })
}

/// `φ_P(z)` and `φ_R(z)` by quadrature of `(3/2)(ψ_Q - ψ_s)` from the branch
/// points: out along `Γ_{E,1}` (resp. `Γ_{E,3}`), round the circle of radius
/// `BASE_RADIUS + 0.2` and in along the labeling route. Independent of the
/// closed forms; agrees with them modulo `πi`.
pub fn phi_by_quadrature(geom: &Geometry, z: C) -> Result<(C, C), Error> {
    let route = geom.cuts.route(z).ok_or(Error::ContinuationFailure { z })?;
    let ring = route[0].norm();
    let mut out = [C::new(0.0, 0.0); 2];
    for (slot, (label, sheet)) in [(ArcLabel::GammaE1, Sheet::P), (ArcLabel::GammaE3, Sheet::R)].into_iter().enumerate() {
        let node = geom
            .arc(label)
            .nodes
            .iter()
            .find(|n| n.z.norm() >= ring)
            .ok_or_else(|| Error::Geometry(format!("{} ends inside radius {ring}", label.name())))?;
        let a0 = node.z.arg();
        let mut turn = route[0].arg() - a0;
        if turn > std::f64::consts::PI {
            turn -= 2.0 * std::f64::consts::PI;
        } else if turn <= -std::f64::consts::PI {
            turn += 2.0 * std::f64::consts::PI;
        }
        let steps = ((turn.abs() / 0.01).ceil() as usize).max(1);
        let mut path: Vec<C> = (0..=steps).map(|j| C::from_polar(ring, a0 + turn * j as f64 / steps as f64)).collect();
        path.extend_from_slice(&route[1..]);
        let start = label_far(node.z)?;
        out[slot] = node.phi + integrate_difference(start, &path, sheet)?;
    }
    Ok((out[0], out[1]))
}

/// Roots at `to` continued from all three labeled roots at `from`.
fn continue_roots(from: C, psi: &[C; 3], to: C) -> Option<[C; 3]> {
    let mut next = [C::new(0.0, 0.0); 3];
    for k in 0..3 {
        // Separation from the nearest other root; ψ_Q is far from both near 0.
        let sep = (0..3).filter(|&j| j != k).map(|j| (psi[k] - psi[j]).norm()).fold(f64::INFINITY, f64::min);
        let guess = psi[k] + surface::dpsi_dz(from, psi[k]) * (to - from);
        let w = surface::newton_cubic(to, guess, 12);
        if !w.is_finite() || (w - guess).norm() > 0.2 * sep {
            return None;
        }
        next[k] = w;
    }
    Some(next)
}

/// `(3/2)∫(ψ_Q - ψ_sheet) ds` along `path`, starting with labels `start`
/// at `start.z`.
fn integrate_difference(start: SheetValues, path: &[C], sheet: Sheet) -> Result<C, Error> {
    let branch = surface::branch_points().z;
    let (q, s) = (Sheet::Q.index(), sheet.index());
    let mut z = start.z;
    let mut psi = start.psi;
    let mut acc = C::new(0.0, 0.0);
    for &target in path {
        while z != target {
            let near = branch.iter().map(|&b| (z - b).norm()).fold(f64::INFINITY, f64::min);
            // ψ_Q grows like 1/z near the origin.
            let step = 0.05f64.min(0.25 * near).min(0.1 * z.norm());
            let gap = (target - z).norm();
            let b = if gap <= step { target } else { z + (target - z) * (step / gap) };
            let next = continue_roots(z, &psi, b).ok_or(Error::ContinuationFailure { z })?;
            let mut failed = false;
            acc += quad::chord(z, b, 16, |x| match continue_roots(z, &psi, x) {
                Some(r) => (r[q] - r[s]) * 1.5,
                None => {
                    failed = true;
                    C::new(0.0, 0.0)
                }
            });
            if failed {
                return Err(Error::ContinuationFailure { z });
            }
            z = b;
            psi = next;
        }
    }
    Ok(acc)
}

/// One evaluation of a measure density on its carrier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSample {
    pub s: C,
    /// `dμ/ds` with respect to the complex line element of the oriented arc.
    pub density: C,
    /// Unit tangent in the direction of orientation.
    pub tangent: C,
    pub carrier: ArcLabel,
}

impl MeasureSample {
    /// `dμ/|ds|`, real and nonnegative for the positive measures.
    pub fn line_density(&self) -> C {
        self.density * self.tangent
    }
}

/// The density of `μ_P`, `μ_R`, `μ_Q` or `μ_E` at a point of its carrier:
/// `(3/2πi)(ψ_Q - ψ_P)` on `Γ_P`, `Γ_P*`, `Γ_{E,1}`, `Γ_{E,2}`,
/// `(3/2πi)(ψ_Q - ψ_R)` on `Γ_R`, `Γ_R*`, `Γ_{E,3}`, `Γ_{E,4}` and
/// `(3/2πi)(ψ_R - ψ_P)` on the segment `[-iy*, iy*]`. Boundary values on
/// `Γ_P`, `Γ_R` are from the `+` side.
pub fn mu_density(geom: &Geometry, s: C, carrier: ArcLabel) -> Result<MeasureSample, Error> {
    let arc = geom.arc(carrier);
    let pts = arc.points();
    let pr = polyline::project(&pts, s).ok_or_else(|| Error::Geometry("empty arc".into()))?;
    if pr.distance > geom.params.on_curve_tol {
        return Err(Error::InvalidInput(format!("{s} is not on {} (distance {:e})", carrier.name(), pr.distance)));
    }
    let (a, b) = (&arc.nodes[pr.segment], &arc.nodes[pr.segment + 1]);
    let chord = (b.z - a.z) / (b.z - a.z).norm();
    let diff = if s == a.z {
        a.difference()
    } else if s == b.z {
        b.difference()
    } else if a.w_q == a.w_s || b.w_q == b.w_s {
        // The roots are analytic in τ = √(|s - z_k| / |other - z_k|) on a
        // chord from a branch point.
        let (k, o) = if a.w_q == a.w_s { (a, b) } else { (b, a) };
        let tau = ((s - k.z).norm() / (o.z - k.z).norm()).sqrt();
        let wq = surface::newton_cubic(s, k.w_q + (o.w_q - k.w_q) * tau, 16);
        let ws = surface::newton_cubic(s, k.w_s + (o.w_s - k.w_s) * tau, 16);
        wq - ws
    } else {
        let (wq, ws) = curves::pair_at(a.z, a.w_q, a.w_s, s).ok_or(Error::ContinuationFailure { z: s })?;
        wq - ws
    };
    let density = diff * 3.0 / (2.0 * std::f64::consts::PI * C::new(0.0, 1.0));
    // The arc is a trajectory, so `diff · ds` is imaginary along it.
    let tangent = if diff.norm() == 0.0 {
        chord
    } else {
        let t = C::new(0.0, 1.0) * diff.conj() / diff.norm();
        if (t * chord.conj()).re >= 0.0 {
            t
        } else {
            -t
        }
    };
    Ok(MeasureSample { s, density, tangent, carrier })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    P,
    Q,
    R,
}

/// A total mass with the difference between 16- and 8-point panels as error
/// estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    pub value: f64,
    pub imaginary: f64,
    pub error_estimate: f64,
}

const MASS_TOL: f64 = 1e-9;

fn mass_over(arcs: &[&CurveTrace]) -> Result<Mass, Error> {
    let mut fine = C::new(0.0, 0.0);
    let mut coarse = C::new(0.0, 0.0);
    for arc in arcs {
        fine += arc.integral(16)?;
        coarse += arc.integral(8)?;
    }
    // (3/2πi)∫D ds = (1/πi)·(3/2)∫D ds
    let scale = C::new(0.0, -1.0 / std::f64::consts::PI);
    let value = fine * scale;
    let error_estimate = ((fine - coarse) * scale).norm();
    if error_estimate > MASS_TOL {
        return Err(Error::Quadrature { estimate: error_estimate });
    }
    Ok(Mass { value: value.re, imaginary: value.im, error_estimate })
}

/// Total mass of `μ_P`, `μ_Q` or `μ_R`.
pub fn mu_total_mass(geom: &Geometry, which: Measure) -> Result<Mass, Error> {
    match which {
        Measure::P => mass_over(&[geom.arc(ArcLabel::GammaP)]),
        Measure::R => mass_over(&[geom.arc(ArcLabel::GammaR)]),
        Measure::Q => mass_over(&geom.gamma_q.pieces()),
    }
}

/// `(3/2πi)∫(ψ_Q - ψ_s) ds` over the whole of `Γ_P*` or `Γ_R*`.
pub fn star_mass(geom: &Geometry, cut: Cut) -> Result<Mass, Error> {
    mass_over(&[geom.arc(match cut {
        Cut::P => ArcLabel::GammaPStar,
        Cut::R => ArcLabel::GammaRStar,
    })])
}

/// `μ_E` mass of the arcs truncated at the tracing radius.
pub fn mu_e_truncated_mass(geom: &Geometry) -> Result<Mass, Error> {
    let e = [ArcLabel::GammaE1, ArcLabel::GammaE2, ArcLabel::GammaE3, ArcLabel::GammaE4];
    let arcs: Vec<&CurveTrace> = e.iter().map(|&l| geom.arc(l)).collect();
    mass_over(&arcs)
}

/// Residual of `2g_P(z_1) + g_R(z_1) - 3 log z_1 - 3z_1 - ℓ`, modulo `2πi`.
pub fn ell_residual() -> C {
    let bp = surface::branch_points();
    let (z1, w1) = (bp.z[0], bp.w[0]);
    let wr = 1.0 / z1 - 2.0 * w1;
    let lhs = 2.0 * g_p_closed(z1, w1) + g_r_closed(z1, wr) - 3.0 * z1.ln() - 3.0 * z1;
    wrap(lhs - ell(), 2.0 * std::f64::consts::PI)
}

/// Residual norms of the identities tying `g`, `φ` and `ψ` together at one
/// point. Entries are absent where an identity does not apply (wrong
/// region, or the point too close to a curve for finite differences).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub re_z: f64,
    pub im_z: f64,
    pub region: Option<Region>,
    /// `2g_P + g_R - 3 log z - 3z + 2φ_P - ℓ` with `φ_P` by quadrature, mod `2πi`.
    pub g_pr1: f64,
    /// `g_P + 2g_R - 3 log z + 3z + 2φ_R - ℓ` with `φ_R` by quadrature, mod `2πi`.
    pub g_pr2: f64,
    /// `g_P + g_Q + g_R - 3 log z` in `D_∞`, mod `2πi`.
    pub sum_g: Option<f64>,
    /// `g_P - g_Q - 3z - ℓ` in `D_P`, mod `2πi`.
    pub rel_pq: Option<f64>,
    /// `g_R - g_Q + 3z - ℓ` in `D_R`, mod `2πi`.
    pub rel_rq: Option<f64>,
    /// `ψ_P + ψ_Q + ψ_R - 1/z`.
    pub sum_psi: f64,
    /// Relative errors of `g_P' = 3ψ_P + 3`, `g_R' = 3ψ_R - 3` and the
    /// region-wise `g_Q'` against fourth-order central differences.
    pub d_g_p: Option<f64>,
    pub d_g_q: Option<f64>,
    pub d_g_r: Option<f64>,
}

impl IdentityReport {
    /// Largest residual present.
    pub fn worst(&self) -> f64 {
        [Some(self.g_pr1), Some(self.g_pr2), self.sum_g, self.rel_pq, self.rel_rq, Some(self.sum_psi), self.d_g_p, self.d_g_q, self.d_g_r]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

/// Checks the identities at `z`, which must be off all curves.
pub fn identity_residuals(geom: &Geometry, z: C) -> Result<IdentityReport, Error> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let region = geom.classify(z).region().ok_or_else(|| Error::InvalidInput(format!("{z} lies on a curve")))?;
    let v = geom.label(z)?;
    let (wp, wq, wr) = (v.psi(Sheet::P), v.psi(Sheet::Q), v.psi(Sheet::R));
    let q_sheet = match region {
        Region::DP => Sheet::P,
        Region::DR => Sheet::R,
        _ => Sheet::Q,
    };
    let gp = g_p_closed(z, wp);
    let gr = g_r_closed(z, wr);
    let gq = g_q_closed(z, v.psi(q_sheet));
    let (php, phr) = phi_by_quadrature(geom, z)?;
    let log3 = 3.0 * z.ln();
    let g_pr1 = wrap(2.0 * gp + gr - log3 - 3.0 * z + 2.0 * php - ell(), two_pi).norm();
    let g_pr2 = wrap(gp + 2.0 * gr - log3 + 3.0 * z + 2.0 * phr - ell(), two_pi).norm();
    let sum_g = region.in_d_infinity().then(|| wrap(gp + gq + gr - log3, two_pi).norm());
    let rel_pq = (region == Region::DP).then(|| wrap(gp - gq - 3.0 * z - ell(), two_pi).norm());
    let rel_rq = (region == Region::DR).then(|| wrap(gr - gq + 3.0 * z - ell(), two_pi).norm());
    let sum_psi = (wp + wq + wr - 1.0 / z).norm();

    let distance = geom.distance_to_curves(z).min(z.norm());
    let h = (1e-3 * z.norm().max(1.0)).min(0.01 * distance);
    let derivs = if h > 1e-7 {
        let mut stencil = [[C::new(0.0, 0.0); 3]; 4];
        let mut ok = true;
        for (slot, k) in [-2.0, -1.0, 1.0, 2.0].into_iter().enumerate() {
            let x = z + k * h;
            match continue_roots(z, &v.psi, x) {
                Some(r) => {
                    stencil[slot] = [g_p_closed(x, r[0]), g_q_closed(x, r[q_sheet.index()]), g_r_closed(x, r[2])];
                }
                None => ok = false,
            }
        }
        ok.then(|| {
            let centre = [gp, gq, gr];
            let exact = [3.0 * wp + 3.0, 3.0 * v.psi(q_sheet), 3.0 * wr - 3.0];
            let mut rel = [0.0; 3];
            for j in 0..3 {
                let d = |slot: usize| wrap(stencil[slot][j] - centre[j], two_pi);
                let fd = (-d(3) + 8.0 * d(2) - 8.0 * d(1) + d(0)) / (12.0 * h);
                rel[j] = (fd - exact[j]).norm() / exact[j].norm().max(1.0);
            }
            rel
        })
    } else {
        None
    };
    Ok(IdentityReport {
        re_z: z.re,
        im_z: z.im,
        region: Some(region),
        g_pr1,
        g_pr2,
        sum_g,
        rel_pq,
        rel_rq,
        sum_psi,
        d_g_p: derivs.map(|d| d[0]),
        d_g_q: derivs.map(|d| d[1]),
        d_g_r: derivs.map(|d| d[2]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_geometry;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn g_p_is_log_at_infinity() {
        let geom = test_geometry();
        let v = g(geom, c(1e6, 0.0), Sheet::P).unwrap();
        assert_eq!(v.branch_note, BranchNote::Mod2PiI);
        assert!((v.value.re - 1e6f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn g_p_derivative_by_central_difference() {
        let geom = test_geometry();
        let z = c(2.0, 1.0);
        let h = 1e-6;
        let fd = wrap(g(geom, z + h, Sheet::P).unwrap().value - g(geom, z - h, Sheet::P).unwrap().value, TWO_PI) / (2.0 * h);
        let exact = 3.0 * geom.label(z).unwrap().psi(Sheet::P) + 3.0;
        assert!((fd - exact).norm() / exact.norm() < 1e-8);
    }

    #[test]
    fn ell_at_first_branch_point() {
        assert!(ell_residual().norm() < 1e-12);
    }

    #[test]
    fn masses_are_one_and_stars_two() {
        let geom = test_geometry();
        for m in [Measure::P, Measure::Q, Measure::R] {
            let mass = mu_total_mass(geom, m).unwrap();
            assert!((mass.value - 1.0).abs() < 1e-8 && mass.imaginary.abs() < 1e-8, "{m:?}: {mass:?}");
        }
        for cut in [Cut::P, Cut::R] {
            let mass = star_mass(geom, cut).unwrap();
            assert!((mass.value - 2.0).abs() < 1e-8, "{cut:?}: {mass:?}");
        }
    }

    #[test]
    fn region_relations_for_g_q() {
        let geom = test_geometry();
        let zp = c(-0.3, 0.1);
        let (gp, gq) = (g(geom, zp, Sheet::P).unwrap().value, g(geom, zp, Sheet::Q).unwrap().value);
        assert!(wrap(gp - gq - 3.0 * zp - ell(), TWO_PI).norm() < 1e-10);

        let zr = c(0.3, 0.1);
        let h = 1e-6;
        let fd = wrap(g(geom, zr + h, Sheet::Q).unwrap().value - g(geom, zr - h, Sheet::Q).unwrap().value, TWO_PI) / (2.0 * h);
        let exact = 3.0 * geom.label(zr).unwrap().psi(Sheet::R);
        assert!((fd - exact).norm() / exact.norm() < 1e-8);

        let zi = c(1.5, 2.0);
        let sum: C = Sheet::ALL.iter().map(|&s| g(geom, zi, s).unwrap().value).sum();
        assert!(wrap(sum - 3.0 * zi.ln(), TWO_PI).norm() < 1e-10);
    }

    #[test]
    fn g_q_refuses_gamma_q() {
        let geom = test_geometry();
        assert!(matches!(g(geom, c(0.0, 0.3), Sheet::Q), Err(Error::OnArc { .. })));
        assert!(g(geom, c(0.0, 0.3), Sheet::P).is_ok());
    }

    #[test]
    fn phi_vanishes_in_real_part_on_gamma_p() {
        let geom = test_geometry();
        let arc = geom.arc(ArcLabel::GammaP);
        let z = arc.nodes[3].z;
        let v = geom.label_side(z, Cut::P, Side::Plus).unwrap();
        assert!(phi_p_closed(z, &v.psi).re.abs() < 1e-9);
        assert!(matches!(phi(geom, z, Sheet::P), Err(Error::OnCut { .. })));
    }

    #[test]
    fn phi_p_at_large_positive_z() {
        let geom = test_geometry();
        let z = c(1e4, 0.0);
        let v = phi(geom, z, Sheet::P).unwrap();
        assert_eq!(v.branch_note, BranchNote::ModPiI);
        assert!((2.0 * v.value - 3.0 * z - ell()).re.abs() < 1e-3);
    }

    #[test]
    fn phi_real_parts_on_and_left_of_the_axis() {
        let geom = test_geometry();
        let on = c(0.0, 0.4);
        let (p, r) = (phi(geom, on, Sheet::P).unwrap().value, phi(geom, on, Sheet::R).unwrap().value);
        assert!((p.re - r.re).abs() < 1e-12);
        let left = c(-1.0, 0.0);
        assert!(phi(geom, left, Sheet::P).unwrap().value.re < phi(geom, left, Sheet::R).unwrap().value.re);
    }

    #[test]
    fn g_e_side_limits_across_gamma_p() {
        let geom = test_geometry();
        let arc = geom.arc(ArcLabel::GammaP);
        let z = arc.nodes[arc.nodes.len() / 2].z;
        let plus = geom.label_side(z, Cut::P, Side::Plus).unwrap();
        let minus = geom.label_side(z, Cut::P, Side::Minus).unwrap();
        let inside = -g_p_closed(z, plus.psi(Sheet::P)) - g_r_closed(z, plus.psi(Sheet::R));
        let outside = g_p_closed(z, minus.psi(Sheet::P)) - 3.0 * z - 3.0 * z.ln() - ell();
        assert!(wrap(inside - outside, TWO_PI).norm() < 1e-10);
    }

    #[test]
    fn g_e_in_d_p() {
        let geom = test_geometry();
        let z = c(-0.3, 0.1);
        let expect = -g(geom, z, Sheet::P).unwrap().value - g(geom, z, Sheet::R).unwrap().value;
        assert!(wrap(g_e(geom, z).unwrap() - expect, TWO_PI).norm() < 1e-12);
    }

    #[test]
    fn densities_on_carriers() {
        let geom = test_geometry();
        let seg = &geom.gamma_q.segment;
        let node = seg.nodes[seg.nodes.len() / 3];
        let s = mu_density(geom, node.z, ArcLabel::GammaQSegment).unwrap();
        assert!(node.difference().im.abs() < 1e-12 && s.line_density().re > 0.0);

        let gp = geom.arc(ArcLabel::GammaP);
        let s = mu_density(geom, gp.nodes[gp.nodes.len() / 3].z, ArcLabel::GammaP).unwrap();
        let line = s.line_density();
        assert!(line.re > 0.0 && line.im.abs() < 1e-12 * line.re.max(1.0));

        let e1 = geom.arc(ArcLabel::GammaE1);
        let s = mu_density(geom, e1.last(), ArcLabel::GammaE1).unwrap();
        assert!((s.line_density() - 1.5 / std::f64::consts::PI).norm() < 1e-3);

        assert!(mu_density(geom, c(3.0, 3.0), ArcLabel::GammaP).is_err());
    }

    #[test]
    fn identity_report_serializes() {
        let geom = test_geometry();
        let rep = identity_residuals(geom, c(0.3, 0.1)).unwrap();
        assert!(rep.worst() < 1e-9, "{rep:?}");
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"rel_rq\"") && json.contains("\"DR\""));
    }
}
