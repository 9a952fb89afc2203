//! Asymptotic formulas for `P_n, Q_n, R_n, E_n` and the algebraic
//! approximant, evaluated from the geometry, and their comparison with the
//! exact polynomials.
//!
//! Predictions are carried as logarithms (`log_value`, defined modulo `2πi`)
//! since `e^{n g}` leaves the `f64` range quickly. Every `1 + O(1/n)` factor is
//! replaced by one.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curves::{self, ArcLabel, Geometry, Location, Region};
use crate::exact::{residue_polynomials, TripleEvaluator};
use crate::mp::{MpComplex, MpCtx};
use crate::potentials::{self, g_p_closed, g_q_closed, g_r_closed, phi_p_closed, phi_r_closed, point_data, wrap, PointData};
use crate::surface::{self, Cut, Sheet, Side};
use crate::Error;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

fn omega() -> C {
    C::from_polar(1.0, 2.0 * PI / 3.0)
}

// Airy function --------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AiryValue {
    pub argument: C,
    pub ai: C,
    pub ai_prime: C,
}

const AI0: &str = "0.35502805388781723926006318600418317639797917419918";
const NEG_AI0_PRIME: &str = "0.25881940379280679840518356018920396347909113835493";

/// Radius below which the Maclaurin series is used.
pub const AIRY_SERIES_RADIUS: f64 = 8.0;

/// `Ai` and `Ai'` at `z`: Maclaurin series at `precision_bits` for
/// `|z| ≤ 8`, the asymptotic expansion (with the connection formula near the
/// negative axis) beyond.
pub fn airy(z: C, precision_bits: usize) -> AiryValue {
    if z.norm() <= AIRY_SERIES_RADIUS {
        airy_series(z, precision_bits)
    } else {
        airy_expansion(z)
    }
}

/// Maclaurin series `Ai = c_1 f - c_2 g` with the standard even/odd solutions.
pub fn airy_series(z: C, precision_bits: usize) -> AiryValue {
    // Terms grow like e^{(2/3)|z|^{3/2}} before they cancel.
    let guard = (2.0 / 3.0 * z.norm().powf(1.5) / LN_2).ceil() as usize;
    let mut ctx = MpCtx::new(precision_bits + guard + 16);
    let zm = ctx.from_c64(z);
    let z3 = ctx.powi(&zm, 3);
    let c1 = ctx.decimal(AI0);
    let c2 = ctx.decimal(NEG_AI0_PRIME);
    let tol = 2f64.powi(-(precision_bits as i32) - 8);

    // f = Σ t_k, t_k/t_{k-1} = z³/((3k-1)3k); f' = Σ u_k, u_0 = z²/2,
    // u_k/u_{k-1} = z³/(3k(3k+2)); g = Σ s_k, s_0 = z, s_k/s_{k-1} = z³/(3k(3k+1));
    // g' = Σ v_k, v_0 = 1, v_k/v_{k-1} = z³/(3k(3k-2)).
    let sum = |first: MpComplex, ratio: &dyn Fn(u64) -> f64| -> MpComplex {
        let mut term = first;
        let mut acc = term.clone();
        let mut peak = acc.to_c64().norm();
        for k in 1u64.. {
            let d = ctx.real_f64(ratio(k));
            term = ctx.mul(&term, &z3);
            term = MpComplex { re: term.re.div(&d, ctx.precision(), astro_float::RoundingMode::ToEven), im: term.im.div(&d, ctx.precision(), astro_float::RoundingMode::ToEven) };
            acc = ctx.add(&acc, &term);
            let t = term.to_c64().norm();
            peak = peak.max(acc.to_c64().norm());
            if t <= tol * peak.max(1e-300) && k > 2 {
                break;
            }
        }
        acc
    };
    let z2 = ctx.mul(&zm, &zm);
    let half = ctx.real_f64(0.5);
    let f = sum(ctx.one(), &|k| ((3 * k - 1) * 3 * k) as f64);
    let fp = sum(ctx.mul_real(&z2, &half), &|k| (3 * k * (3 * k + 2)) as f64);
    let g = sum(zm.clone(), &|k| (3 * k * (3 * k + 1)) as f64);
    let gp = sum(ctx.one(), &|k| (3 * k * (3 * k - 2)) as f64);
    let ai = ctx.sub(&ctx.mul_real(&f, &c1), &ctx.mul_real(&g, &c2));
    let aip = ctx.sub(&ctx.mul_real(&fp, &c1), &ctx.mul_real(&gp, &c2));
    AiryValue { argument: z, ai: ai.to_c64(), ai_prime: aip.to_c64() }
}

/// Asymptotic series for `|arg z| ≤ 2π/3`, summed to the smallest term.
fn airy_expansion_sector(z: C) -> (C, C) {
    let zeta = z.powf(1.5) * (2.0 / 3.0);
    let mut u = 1.0f64;
    let mut sum_ai = C::new(1.0, 0.0);
    let mut sum_aip = C::new(1.0, 0.0);
    let mut power = C::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        power = -power / zeta;
        let t = power * u;
        if t.norm() >= last || t.norm() < 1e-18 {
            break;
        }
        last = t.norm();
        sum_ai += t;
        sum_aip += power * v;
    }
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = z.powf(0.25);
    (pre / q * sum_ai, -pre * q * sum_aip)
}

/// Asymptotic expansion for large `|z|`; near the negative axis
/// `Ai(z) = -ω Ai(ωz) - ω² Ai(ω²z)` moves both evaluations into the sector.
pub fn airy_expansion(z: C) -> AiryValue {
    let (ai, ai_prime) = if z.arg().abs() <= 2.0 * PI / 3.0 {
        airy_expansion_sector(z)
    } else {
        let w = omega();
        let (a1, d1) = airy_expansion_sector(w * z);
        let (a2, d2) = airy_expansion_sector(w * w * z);
        (-w * a1 - w * w * a2, -w * w * d1 - w * d2)
    };
    AiryValue { argument: z, ai, ai_prime }
}

/// `ι_ν > 0` with `Ai(-ι_ν) = 0`, `ν ≥ 1`, by Newton from the asymptotic
/// zero formula.
pub fn airy_zero(nu: usize) -> f64 {
    assert!(nu >= 1, "Airy zeros are numbered from 1");
    let t = 3.0 * PI * (4.0 * nu as f64 - 1.0) / 8.0;
    let mut x = -t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 / (t * t));
    for _ in 0..50 {
        let a = airy(C::new(x, 0.0), 128);
        let step = a.ai.re / a.ai_prime.re;
        x -= step;
        if step.abs() < 1e-15 * x.abs() {
            break;
        }
    }
    -x
}

// Exact values ------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    P,
    Q,
    R,
    E,
    Xn,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::P => "P",
            Target::Q => "Q",
            Target::R => "R",
            Target::E => "E",
            Target::Xn => "Xn",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "p" => Ok(Target::P),
            "q" => Ok(Target::Q),
            "r" => Ok(Target::R),
            "e" => Ok(Target::E),
            "xn" | "x" => Ok(Target::Xn),
            _ => Err(Error::Parse(format!("unknown target {s:?}"))),
        }
    }
}

/// The diagonal `P_n, Q_n, R_n` prepared for evaluation at a fixed precision.
pub struct ExactDiagonal {
    pub n: usize,
    evaluator: TripleEvaluator,
}

impl ExactDiagonal {
    pub fn new(n: usize, precision_bits: usize) -> Result<Self, Error> {
        let triple = residue_polynomials(n)?;
        Ok(ExactDiagonal { n, evaluator: TripleEvaluator::new(&triple, precision_bits) })
    }

    pub fn ctx(&self) -> &MpCtx {
        &self.evaluator.ctx
    }

    /// `P_n(z), Q_n(z), R_n(z)` at working precision.
    pub fn polys(&self, z: C) -> [MpComplex; 3] {
        let zm = self.evaluator.ctx.from_c64(z);
        self.evaluator.polys(&zm)
    }

    /// `E_n(z) = P_n e^{-3nz} + Q_n + R_n e^{3nz}`.
    pub fn remainder(&mut self, z: C) -> MpComplex {
        let zm = self.evaluator.ctx.from_c64(z);
        self.evaluator.remainder(&zm)
    }

    /// `log` of the exact `P_n, Q_n, R_n, E_n` or `X_n` at `z`.
    pub fn log_value(&mut self, target: Target, z: C, geom: &Geometry) -> Result<C, Error> {
        let v = match target {
            Target::P => self.polys(z)[0].clone(),
            Target::Q => self.polys(z)[1].clone(),
            Target::R => self.polys(z)[2].clone(),
            Target::E => self.remainder(z),
            Target::Xn => return Ok(self.algebraic(z, geom)?.ln()),
        };
        if v.is_zero() {
            return Err(Error::InvalidInput(format!("{} vanishes at {z}", target.name())));
        }
        Ok(v.ln())
    }

    /// The root of `P_n + Q_n X + R_n X² = 0` selected by the region rule.
    pub fn algebraic(&self, z: C, geom: &Geometry) -> Result<MpComplex, Error> {
        if z.re.abs() < 1e-12 {
            return Err(Error::InvalidInput("the algebraic approximant does not converge on the imaginary axis".into()));
        }
        let region = geom.classify(z).region();
        if !matches!(region, Some(Region::DP | Region::DR)) {
            return Err(Error::InvalidInput(format!("{z} is not in D_P or D_R")));
        }
        let [p, q, r] = self.polys(z);
        let ctx = &self.evaluator.ctx;
        let four = ctx.from_c64(C::new(4.0, 0.0));
        let disc = ctx.sub(&ctx.mul(&q, &q), &ctx.mul(&four, &ctx.mul(&p, &r)));
        let mut root = ctx.sqrt(&disc);
        // Take the branch with √(Q² - 4PR) ≈ Q.
        if ctx.abs(&ctx.sub(&root, &q)) > ctx.abs(&ctx.add(&root, &q)) {
            root = ctx.neg(&root);
        }
        if region == Some(Region::DP) {
            // (-Q + √)/(2R) rewritten without cancellation.
            let den = ctx.add(&q, &root);
            if den.is_zero() {
                return Err(Error::InvalidInput(format!("Q_n + √(Q_n² - 4P_nR_n) vanishes at {z}")));
            }
            let two = ctx.from_c64(C::new(-2.0, 0.0));
            Ok(ctx.div(&ctx.mul(&two, &p), &den))
        } else {
            if r.is_zero() {
                return Err(Error::InvalidInput(format!("R_n vanishes at {z}")));
            }
            let two = ctx.from_c64(C::new(2.0, 0.0));
            Ok(ctx.div(&ctx.neg(&ctx.add(&q, &root)), &ctx.mul(&two, &r)))
        }
    }
}

/// `X_n(z)` as `(mantissa, binary exponent)`.
pub fn algebraic_approximant(geom: &Geometry, z: C, n: usize, precision_bits: usize) -> Result<(C, i64), Error> {
    Ok(ExactDiagonal::new(n, precision_bits)?.algebraic(z, geom)?.to_c64_scaled())
}

// Predictions ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Strong,
    TwoTerm,
    AiryLocal,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Strong => "strong",
            Regime::TwoTerm => "two_term",
            Regime::AiryLocal => "airy_local",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "strong" => Ok(Regime::Strong),
            "two_term" => Ok(Regime::TwoTerm),
            "airy_local" | "airy" => Ok(Regime::AiryLocal),
            _ => Err(Error::Parse(format!("unknown regime {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub target: Target,
    pub regime: Regime,
    pub n: usize,
    pub z: C,
    pub location: Location,
    /// `log` of the predicted value of `P_n, Q_n, R_n, E_n` or `X_n`.
    pub log_value: C,
    /// Logs of the individual terms of a multi-term formula, each including
    /// the common prefactor.
    pub log_terms: Vec<C>,
}

impl AsymptoticPrediction {
    pub fn value(&self) -> C {
        self.log_value.exp()
    }

    /// `|exact/predicted - 1|` from the log of the exact value.
    pub fn relative_error(&self, log_exact: C) -> f64 {
        (wrap(log_exact - self.log_value, 2.0 * PI).exp() - 1.0).norm()
    }
}

/// `log(-2)^{n+1}`.
fn log_minus_two_pow(n: usize) -> C {
    (n as f64 + 1.0) * C::new(LN_2, PI)
}

/// `log Σ e^{l_k}`.
fn log_sum(logs: &[C]) -> C {
    let top = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let s: C = logs.iter().map(|l| (l - top).exp()).sum();
    s.ln() + top
}

fn mismatch(target: Target, regime: Regime, z: C, why: &str) -> Error {
    Error::InvalidInput(format!("{} {} formula does not apply at {z}: {why}", target.name(), regime.name()))
}

fn is_gamma_e(arc: ArcLabel) -> bool {
    matches!(arc, ArcLabel::GammaE1 | ArcLabel::GammaE2 | ArcLabel::GammaE3 | ArcLabel::GammaE4)
}

/// Main term of the strong asymptotics away from the zeros.
pub fn strong_asymptotic(geom: &Geometry, z: C, n: usize, target: Target) -> Result<AsymptoticPrediction, Error> {
    let pd = point_data(geom, z)?;
    let v = &pd.values;
    let nf = n as f64;
    let log_root = |s: Sheet| v.root(s).ln();
    let gp = || g_p_closed(z, v.psi(Sheet::P));
    let gr = || g_r_closed(z, v.psi(Sheet::R));
    let log_value = match target {
        Target::P | Target::R => {
            let (cut, sheet) = if target == Target::P { (Cut::P, Sheet::P) } else { (Cut::R, Sheet::R) };
            if pd.on_cut == Some(cut) {
                return Err(mismatch(target, Regime::Strong, z, "on the cut"));
            }
            let gv = if target == Target::P { gp() } else { gr() };
            LN_2 + nf * gv - log_root(sheet) - log_minus_two_pow(n)
        }
        Target::Q => {
            let sheet = potentials::q_sheet(&pd).map_err(|_| mismatch(target, Regime::Strong, z, "on Γ_Q"))?;
            let gq = g_q_closed(z, v.psi(sheet));
            let sign = if sheet == Sheet::Q { C::new(0.0, PI) } else { C::new(0.0, 0.0) };
            sign + nf * gq - log_root(sheet)
        }
        Target::E => {
            if let Location::OnCurve { arc, .. } = pd.class.location {
                if is_gamma_e(arc) {
                    return Err(mismatch(target, Regime::Strong, z, "on Γ_E"));
                }
            }
            let minus_half = nf * C::new(-LN_2, PI);
            match pd.class.region() {
                Some(Region::DInfR) => C::new(0.0, PI) + minus_half + nf * (gr() + 3.0 * z) - log_root(Sheet::R),
                Some(Region::DInfP) => C::new(0.0, PI) + minus_half + nf * (gp() - 3.0 * z) - log_root(Sheet::P),
                _ => C::new(0.0, PI) + 3.0 * nf * z.ln() - nf * (gp() + gr()) - log_root(Sheet::Q),
            }
        }
        Target::Xn => {
            if !matches!(pd.class.region(), Some(Region::DP | Region::DR)) || z.re.abs() < 1e-12 {
                return Err(mismatch(target, Regime::Strong, z, "outside D_P ∪ D_R"));
            }
            3.0 * nf * z
        }
    };
    Ok(AsymptoticPrediction { target, regime: Regime::Strong, n, z, location: pd.class.location, log_value, log_terms: Vec::new() })
}

/// Multi-term formulas valid near the curves where zeros accumulate.
pub fn two_term_asymptotic(geom: &Geometry, z: C, n: usize, target: Target) -> Result<AsymptoticPrediction, Error> {
    let pd = point_data(geom, z)?;
    let nf = n as f64;
    let location = pd.class.location;
    let (prefix, terms) = match target {
        Target::Q | Target::E => two_term_qe(&pd, n, target)?,
        Target::P | Target::R => two_term_pr(geom, &pd, n, target)?,
        Target::Xn => return Err(mismatch(target, Regime::TwoTerm, z, "no two-term form")),
    };
    let log_terms: Vec<C> = terms.iter().map(|t| t + prefix).collect();
    let log_value = log_sum(&log_terms);
    let _ = nf;
    Ok(AsymptoticPrediction { target, regime: Regime::TwoTerm, n, z, location, log_value, log_terms })
}

fn two_term_qe(pd: &PointData, n: usize, target: Target) -> Result<(C, Vec<C>), Error> {
    let z = pd.z;
    let nf = n as f64;
    let ok = match (target, pd.class.location) {
        (Target::Q, Location::Region(r)) => !matches!(r, Region::DInfP | Region::DInfR),
        (Target::Q, Location::OnCurve { arc, .. }) => {
            matches!(arc, ArcLabel::GammaQSegment)
                || (arc == ArcLabel::GammaPStar && z.re <= 0.0)
                || (arc == ArcLabel::GammaRStar && z.re >= 0.0)
        }
        (_, Location::Region(r)) => r.in_d_infinity(),
        (_, Location::OnCurve { arc, .. }) => is_gamma_e(arc),
    };
    if !ok || pd.on_cut.is_some() {
        let why = if target == Target::Q { "outside Γ_Q ∪ D_P ∪ D_R ∪ D_∞U ∪ D_∞L" } else { "outside D_∞" };
        return Err(mismatch(target, Regime::TwoTerm, z, why));
    }
    let v = &pd.values;
    let gp = g_p_closed(z, v.psi(Sheet::P));
    let gr = g_r_closed(z, v.psi(Sheet::R));
    let php = phi_p_closed(z, &v.psi);
    let phr = phi_r_closed(z, &v.psi);
    let prefix = 3.0 * nf * z.ln() - nf * (gp + gr) + if target == Target::E { C::new(0.0, PI) } else { C::new(0.0, 0.0) };
    let middle = if target == Target::Q { C::new(0.0, PI) } else { C::new(0.0, 0.0) };
    let terms = vec![
        -2.0 * nf * php - v.root(Sheet::P).ln(),
        middle - v.root(Sheet::Q).ln(),
        -2.0 * nf * phr - v.root(Sheet::R).ln(),
    ];
    Ok((prefix, terms))
}

fn two_term_pr(geom: &Geometry, pd: &PointData, n: usize, target: Target) -> Result<(C, Vec<C>), Error> {
    let z = pd.z;
    let nf = n as f64;
    let (cut, sheet, arc, own_inf) = if target == Target::P {
        (Cut::P, Sheet::P, ArcLabel::GammaP, Region::DInfP)
    } else {
        (Cut::R, Sheet::R, ArcLabel::GammaR, Region::DInfR)
    };
    let g_of = |z: C, w: C| if target == Target::P { g_p_closed(z, w) } else { g_r_closed(z, w) };
    let prefix = -log_minus_two_pow(n);
    if let Location::OnCurve { arc: on, .. } = pd.class.location {
        if on == arc {
            // Boundary form: one term from each side.
            let terms = [Side::Minus, Side::Plus]
                .into_iter()
                .map(|side| {
                    let v = geom.label_side(z, cut, side)?;
                    Ok(LN_2 + nf * g_of(z, v.psi(sheet)) - v.root(sheet).ln())
                })
                .collect::<Result<Vec<C>, Error>>()?;
            return Ok((prefix, terms));
        }
    }
    let star = if target == Target::P { pd.class.in_p_star } else { pd.class.in_r_star };
    let region = pd.class.region();
    if pd.on_cut.is_some() || !(region == Some(own_inf) || (star && region.is_some())) {
        return Err(mismatch(target, Regime::TwoTerm, z, "Re φ is not negative here"));
    }
    let v = &pd.values;
    let phi = if target == Target::P { phi_p_closed(z, &v.psi) } else { phi_r_closed(z, &v.psi) };
    let sign = if region.is_some_and(|r| r.in_d_infinity()) { C::new(0.0, PI) } else { C::new(0.0, 0.0) };
    let base = nf * g_of(z, v.psi(sheet));
    let terms = vec![base + LN_2 - v.root(sheet).ln(), base + sign + LN_2 + 2.0 * nf * phi - v.root(Sheet::Q).ln()];
    Ok((prefix, terms))
}

// Airy regime near z_1 -----------------------------------------------------------

/// `f_1'(z_1) = 2^{1/3} 3^{5/12} e^{-7πi/36}`.
pub fn c1() -> C {
    C::from_polar(2f64.powf(1.0 / 3.0) * 3f64.powf(5.0 / 12.0), -7.0 * PI / 36.0)
}

/// Default radius of the disk around `z_1` where the Airy formulas are used.
pub const AIRY_DELTA: f64 = 0.1;

/// The local quantities of the Airy parametrix at a point near `z_1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AiryLocal {
    pub z: C,
    /// `φ_P` on the branch vanishing at `z_1`.
    pub phi: C,
    pub g_p: C,
    pub f1: C,
    pub h1: C,
    pub h2: C,
}

/// `φ_P`, `f_1`, `h_1`, `h_2` at `z` with `0 < |z - z_1| < delta`.
pub fn airy_local_data(geom: &Geometry, z: C, delta: f64) -> Result<AiryLocal, Error> {
    let bp = surface::branch_points();
    let (z1, w1) = (bp.z[0], bp.w[0]);
    let d = (z - z1).norm();
    if d >= delta || d < 1e-12 {
        return Err(Error::InvalidInput(format!("{z} is not in the punctured disk of radius {delta} around z_1")));
    }
    let pd = point_data(geom, z)?;
    let v = &pd.values;
    let (wp, wq, wr) = (v.psi(Sheet::P), v.psi(Sheet::Q), v.psi(Sheet::R));
    let phi = curves::branch_integral(z1, w1, z, wq, wp, 32);
    let gp = g_p_closed(z, wp);
    let gr = g_r_closed(z, wr);
    // The cube-root branch is the one continuous with c_1 (z - z_1).
    let base = (1.5 * phi).powf(2.0 / 3.0);
    let guide = c1() * (z - z1);
    let f1 = (0..3)
        .map(|k| base * C::from_polar(1.0, 2.0 * PI * k as f64 / 3.0))
        .min_by(|a, b| (a - guide).norm().total_cmp(&(b - guide).norm()))
        .expect("three candidates");
    let n21 = 2.0 * (-gp).exp() / v.root(Sheet::P);
    let n22 = -(gp + gr).exp() / (z * z * v.root(Sheet::Q));
    let mixed = I / z * (-3.0 * z).exp() * n22;
    // Principal fourth root: its cut is where f_1 < 0, i.e. along Γ_P.
    let q = f1.powf(0.25);
    Ok(AiryLocal { z, phi, g_p: gp, f1, h1: (n21 + mixed) * q, h2: (-n21 + mixed) / q })
}

/// Airy-type formulas for `P_n`, `Q_n`, `E_n` near `z_1`.
pub fn airy_local(geom: &Geometry, z: C, n: usize, target: Target, delta: f64, precision_bits: usize) -> Result<AsymptoticPrediction, Error> {
    let loc = airy_local_data(geom, z, delta)?;
    let nf = n as f64;
    let m = nf + 1.0;
    let s = m.powf(2.0 / 3.0) * loc.f1;
    let w = omega();
    let (rot, a_rot, d_rot, extra, sign) = match target {
        Target::P => (C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)),
        Target::Q => (w.conj(), w.conj(), w, 3.0 * z - m * 3.0 * z, C::new(0.0, 0.0)),
        Target::E => (w, w, w.conj(), 3.0 * z - m * 3.0 * z, C::new(0.0, PI)),
        _ => return Err(mismatch(target, Regime::AiryLocal, z, "only P, Q, E have Airy forms near z_1")),
    };
    let a = airy(rot * s, precision_bits);
    let bracket = nf.powf(1.0 / 6.0) * loc.h1 * a_rot * a.ai + nf.powf(-1.0 / 6.0) * loc.h2 * d_rot * a.ai_prime;
    let prefix = sign + 0.5 * PI.ln() + m * (loc.g_p + loc.phi) + extra - log_minus_two_pow(n);
    let log_value = prefix + bracket.ln();
    let location = geom.classify(z).location;
    Ok(AsymptoticPrediction { target, regime: Regime::AiryLocal, n, z, location, log_value, log_terms: Vec::new() })
}

/// `z_1 - rot · ι_ν / f_1'(z_1) · n^{-2/3}` with `rot = 1, e^{2πi/3}, e^{-2πi/3}`
/// for `P, Q, E`.
pub fn predicted_extreme_zero(n: usize, nu: usize, target: Target) -> Result<C, Error> {
    let rot = match target {
        Target::P => C::new(1.0, 0.0),
        Target::Q => omega(),
        Target::E => omega().conj(),
        _ => return Err(Error::InvalidInput(format!("no extreme-zero law for {}", target.name()))),
    };
    if nu == 0 {
        return Err(Error::InvalidInput("zeros are numbered from 1".into()));
    }
    let z1 = surface::branch_points().z[0];
    Ok(z1 - rot * airy_zero(nu) / c1() * (n as f64).powf(-2.0 / 3.0))
}

// Error reports ------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub target: Target,
    pub regime: Regime,
    pub n: usize,
    pub re_z: f64,
    pub im_z: f64,
    pub rel_err: f64,
}

impl ErrorRow {
    pub const HEADER: [&'static str; 6] = ["target", "regime", "n", "re_z", "im_z", "rel_err"];

    pub fn record(&self) -> [String; 6] {
        [
            self.target.name().to_string(),
            self.regime.name().to_string(),
            self.n.to_string(),
            format!("{:.16e}", self.re_z),
            format!("{:.16e}", self.im_z),
            format!("{:.16e}", self.rel_err),
        ]
    }
}

/// Prediction for any regime; the Airy regime uses the default disk.
pub fn predict(geom: &Geometry, z: C, n: usize, target: Target, regime: Regime, precision_bits: usize) -> Result<AsymptoticPrediction, Error> {
    match regime {
        Regime::Strong => strong_asymptotic(geom, z, n, target),
        Regime::TwoTerm => two_term_asymptotic(geom, z, n, target),
        Regime::AiryLocal => airy_local(geom, z, n, target, AIRY_DELTA, precision_bits),
    }
}

/// Relative error of one prediction against the exact value.
pub fn compare(geom: &Geometry, z: C, n: usize, target: Target, regime: Regime, precision_bits: usize) -> Result<ErrorRow, Error> {
    let pred = predict(geom, z, n, target, regime, precision_bits)?;
    let mut exact = ExactDiagonal::new(n, precision_bits)?;
    let log_exact = exact.log_value(target, z, geom)?;
    Ok(ErrorRow { target, regime, n, re_z: z.re, im_z: z.im, rel_err: pred.relative_error(log_exact) })
}

/// Least-squares slope of `log(err)` against `log(n)`.
pub fn log_log_slope(ns: &[usize], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: C, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm()
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn airy_at_reference_points() {
        let a = airy(C::new(0.0, 0.0), 128);
        assert!((a.ai.re - 0.355_028_053_887_817_2).abs() < 1e-16);
        assert!((a.ai_prime.re + 0.258_819_403_792_806_8).abs() < 1e-16);
        let cases = [
            (C::new(3.0, -4.0), C::new(0.014554546690944634862, 0.047435251515492836146), C::new(-0.075209961195903029036, -0.082364077155537795090)),
            (C::new(-9.0, 2.0), C::new(-22.409135482740587384, -62.279200457441465536), C::new(-180.81830875936532394, 86.483191189538360634)),
        ];
        for (z, ai, aip) in cases {
            let v = airy(z, 128);
            assert!(close(v.ai, ai, 1e-13), "{z}: {}", v.ai);
            assert!(close(v.ai_prime, aip, 1e-13), "{z}: {}", v.ai_prime);
        }
        let far = airy(C::new(20.0, 30.0), 128);
        assert!(close(far.ai, C::new(8.4973702543454508397e-8, 5.9114499846262369698e-8), 1e-12), "{}", far.ai);
        let neg = airy(C::new(-30.0, 1.0), 128);
        assert!(close(neg.ai_prime, C::new(149.89342015937664156, 49.851403797675578916), 1e-12), "{}", neg.ai_prime);
        let ten = airy(C::new(10.0, 0.0), 128).ai.re;
        let scaled = ten * 2.0 * PI.sqrt() * 10f64.powf(0.25) * (2.0 / 3.0 * 10f64.powf(1.5)).exp();
        assert!((scaled - 0.996785723120804308838).abs() < 1e-13);
    }

    #[test]
    fn series_and_expansion_agree_at_the_switch() {
        for k in 0..24 {
            let z = C::from_polar(AIRY_SERIES_RADIUS, 2.0 * PI * k as f64 / 24.0 + 0.1);
            let s = airy_series(z, 160);
            let e = airy_expansion(z);
            assert!(close(e.ai, s.ai, 1e-12), "{z}: {} vs {}", e.ai, s.ai);
            assert!(close(e.ai_prime, s.ai_prime, 1e-12), "{z}");
        }
    }

    #[test]
    fn airy_equation_by_differences() {
        let h = 1e-3;
        let d = |z: C| airy(z, 128).ai_prime;
        for z in [C::new(1.0, 2.0), C::new(-3.0, 0.5), C::new(9.0, -3.0), C::new(-12.0, 1.0)] {
            let d2 = (8.0 * (d(z + h) - d(z - h)) - (d(z + 2.0 * h) - d(z - 2.0 * h))) / (12.0 * h);
            let rhs = z * airy(z, 128).ai;
            assert!((d2 - rhs).norm() <= 1e-8 * rhs.norm().max(1.0), "{z}");
        }
    }

    #[test]
    fn first_airy_zeros() {
        let refs = [2.3381074104597670384891972524467354406385401456724, 4.0879494441309706166369887014573910602247646991085, 5.5205598280955510591298555129312935737972142806175];
        for (k, r) in refs.iter().enumerate() {
            assert!((airy_zero(k + 1) - r).abs() < 1e-13, "{k}");
        }
    }

    #[test]
    fn extreme_zero_directions() {
        // The offsets from z_1 point along e^{-29πi/36}, e^{-5πi/36}, e^{19πi/36}.
        let z1 = surface::branch_points().z[0];
        for (t, dir) in [(Target::P, -29.0), (Target::Q, -5.0), (Target::E, 19.0)] {
            let off = predicted_extreme_zero(1000, 1, t).unwrap() - z1;
            assert!((wrap(C::new(0.0, off.arg() - dir * PI / 36.0), 2.0 * PI)).norm() < 1e-12, "{t:?}");
            let size = airy_zero(1) * 2f64.powf(-1.0 / 3.0) * 3f64.powf(-5.0 / 12.0) * 1000f64.powf(-2.0 / 3.0);
            assert!((off.norm() - size).abs() < 1e-14);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn rotated_airy_values_sum_to_zero(r in 0.0f64..30.0, t in -PI..PI) {
            let z = C::from_polar(r, t);
            let w = omega();
            let terms = [airy(z, 128).ai, w * airy(w * z, 128).ai, w * w * airy(w * w * z, 128).ai];
            let scale = terms.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let sum: C = terms.iter().sum();
            proptest::prop_assert!(sum.norm() <= 1e-11 * scale, "{z}: {sum} vs {scale}");
        }
    }

    #[test]
    fn log_sum_handles_huge_terms() {
        let l = log_sum(&[C::new(1000.0, 0.0), C::new(1000.0, PI)]);
        assert!(l.re < 990.0);
        let l = log_sum(&[C::new(800.0, 0.3), C::new(0.0, 0.0)]);
        assert!((l - C::new(800.0, 0.3)).norm() < 1e-12);
    }
}
