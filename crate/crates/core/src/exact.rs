//! Exact Hermite–Padé polynomials for the weights `e^{-z}, 1, e^{z}`.
//!
//! Two independent routes compute the diagonal scaled polynomials `P_n, Q_n, R_n`:
//! a dense rational linear solve of the vanishing-coefficient conditions
//! ([`solve_hp_system`]) and a residue expansion of the contour integral
//! representation ([`residue_polynomials`]). The tests use each as the oracle
//! of the other.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::mp::{MpComplex, MpCtx};
use crate::Error;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn factorial(k: usize) -> BigInt {
    (1..=k as u64).fold(BigInt::one(), |acc, j| acc * j)
}

/// Dense polynomial with exact rational coefficients, ascending degree.
///
/// Trailing zero coefficients are stripped on construction, so the zero
/// polynomial has an empty coefficient list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    /// Returns `z ↦ p(s·z)`.
    pub fn scale_variable(&self, s: &BigRational) -> Self {
        let mut pow = BigRational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c * &pow);
            pow *= s;
        }
        Self::new(out)
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluates at a complex point with rational real and imaginary parts.
    pub fn eval_complex_rational(&self, re: &BigRational, im: &BigRational) -> (BigRational, BigRational) {
        let (mut ar, mut ai) = (BigRational::zero(), BigRational::zero());
        for c in self.coeffs.iter().rev() {
            let nr = &ar * re - &ai * im + c;
            let ni = &ar * im + &ai * re;
            ar = nr;
            ai = ni;
        }
        (ar, ai)
    }

    /// Coefficients as exact `"num/den"` strings (integers without a slash).
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_string).collect()
    }
}

pub fn rational_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((a, b)) => {
            let den: BigInt = b.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(BigRational::new(a.trim().parse().ok()?, den))
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}

/// Which polynomial of the triple is made monic after substituting `z ↦ scale·z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    QMonicScaled,
    PMonicScaled,
    RMonicScaled,
}

/// One Hermite–Padé triple. When `scale = s`, the stored polynomials are
/// `p(s z), q(s z), r(s z)` and the remainder is `p e^{-s z} + q + r e^{s z}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HPTriple {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub p: RationalPoly,
    pub q: RationalPoly,
    pub r: RationalPoly,
    pub normalization: Normalization,
    pub scale: u64,
}

impl HPTriple {
    pub fn total_degree(&self) -> usize {
        self.n1 + self.n2 + self.n3
    }

    /// Order of vanishing of the remainder at the origin guaranteed by the
    /// defining conditions.
    pub fn order(&self) -> usize {
        self.total_degree() + 2
    }

    pub fn to_json(&self) -> serde_json::Value {
        let poly = |p: &RationalPoly| {
            let num: Vec<String> = p.coeffs().iter().map(|c| c.numer().to_string()).collect();
            let den: Vec<String> = p.coeffs().iter().map(|c| c.denom().to_string()).collect();
            serde_json::json!({ "num": num, "den": den, "coeffs": p.to_strings() })
        };
        serde_json::json!({
            "n1": self.n1,
            "n2": self.n2,
            "n3": self.n3,
            "normalization": self.normalization,
            "scale": self.scale,
            "p": poly(&self.p),
            "q": poly(&self.q),
            "r": poly(&self.r),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, Error> {
        let bad = |what: &str| Error::Parse(format!("HPTriple JSON: {what}"));
        let uint = |k: &str| v.get(k).and_then(|x| x.as_u64()).ok_or_else(|| bad(k));
        let poly = |k: &str| -> Result<RationalPoly, Error> {
            let obj = v.get(k).ok_or_else(|| bad(k))?;
            let num = obj.get("num").and_then(|x| x.as_array()).ok_or_else(|| bad(k))?;
            let den = obj.get("den").and_then(|x| x.as_array()).ok_or_else(|| bad(k))?;
            if num.len() != den.len() {
                return Err(bad(k));
            }
            let mut coeffs = Vec::new();
            for (a, b) in num.iter().zip(den) {
                let a: BigInt = a.as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad(k))?;
                let b: BigInt = b.as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad(k))?;
                if b.is_zero() {
                    return Err(bad(k));
                }
                coeffs.push(BigRational::new(a, b));
            }
            Ok(RationalPoly::new(coeffs))
        };
        let normalization = serde_json::from_value(v.get("normalization").cloned().ok_or_else(|| bad("normalization"))?)
            .map_err(|_| bad("normalization"))?;
        Ok(HPTriple {
            n1: uint("n1")? as usize,
            n2: uint("n2")? as usize,
            n3: uint("n3")? as usize,
            p: poly("p")?,
            q: poly("q")?,
            r: poly("r")?,
            normalization,
            scale: uint("scale")?,
        })
    }
}

/// Solves `p e^{-z} + q + r e^{z} = O(z^{n1+n2+n3+2})` exactly, then rescales
/// by `z ↦ scale·z` and normalizes the designated polynomial to be monic of
/// its full allowed degree.
pub fn solve_hp_system(
    n1: usize,
    n2: usize,
    n3: usize,
    normalization: Normalization,
    scale: u64,
) -> Result<HPTriple, Error> {
    if scale == 0 {
        return Err(Error::InvalidInput("scale must be positive".into()));
    }
    let total = n1 + n2 + n3;
    let unknowns = total + 3;
    let conditions = total + 2;
    let fact: Vec<BigInt> = (0..=conditions).map(factorial).collect();

    // Column layout: p_0..p_{n1}, q_0..q_{n2}, r_0..r_{n3}.
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(unknowns);
    for k in 0..conditions {
        let mut row = vec![BigRational::zero(); unknowns + 1];
        for j in 0..=n1.min(k) {
            let sign = if (k - j) % 2 == 0 { 1 } else { -1 };
            row[j] = BigRational::new(BigInt::from(sign), fact[k - j].clone());
        }
        if k <= n2 {
            row[n1 + 1 + k] = BigRational::one();
        }
        for j in 0..=n3.min(k) {
            row[n1 + n2 + 2 + j] = BigRational::new(BigInt::one(), fact[k - j].clone());
        }
        rows.push(row);
    }
    // Leading coefficient of the designated polynomial, before rescaling,
    // must equal scale^{-deg}.
    let (target_col, target_deg) = match normalization {
        Normalization::PMonicScaled => (n1, n1),
        Normalization::QMonicScaled => (n1 + 1 + n2, n2),
        Normalization::RMonicScaled => (n1 + n2 + 2 + n3, n3),
    };
    let s = BigRational::from_integer(BigInt::from(scale));
    let mut norm_row = vec![BigRational::zero(); unknowns + 1];
    norm_row[target_col] = BigRational::one();
    norm_row[unknowns] = num_traits::pow(s.clone(), target_deg).recip();
    rows.push(norm_row);

    let x = gauss_solve(rows, unknowns).ok_or(Error::SingularSystem { n1, n2, n3 })?;

    let p = RationalPoly::new(x[0..=n1].to_vec()).scale_variable(&s);
    let q = RationalPoly::new(x[n1 + 1..=n1 + 1 + n2].to_vec()).scale_variable(&s);
    let r = RationalPoly::new(x[n1 + n2 + 2..].to_vec()).scale_variable(&s);
    Ok(HPTriple { n1, n2, n3, p, q, r, normalization, scale })
}

/// Gaussian elimination on an augmented square system; `None` if singular.
fn gauss_solve(mut a: Vec<Vec<BigRational>>, n: usize) -> Option<Vec<BigRational>> {
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for c in col..=n {
            a[col][c] = &a[col][c] * &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for c in col..=n {
                if !pivot_row[c].is_zero() {
                    row[c] -= &f * &pivot_row[c];
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Truncated power series `1 / a(u)` to `len` terms; `a(0)` must be nonzero.
pub fn series_inverse(a: &[BigRational], len: usize) -> Vec<BigRational> {
    let a0_inv = a[0].recip();
    let mut out: Vec<BigRational> = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = if k == 0 { BigRational::one() } else { BigRational::zero() };
        for j in 1..=k.min(a.len() - 1) {
            acc -= &a[j] * &out[k - j];
        }
        out.push(acc * &a0_inv);
    }
    out
}

fn poly_pow(base: &[BigRational], e: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::one()];
    for _ in 0..e {
        let mut next = vec![BigRational::zero(); out.len() + base.len() - 1];
        for (i, x) in out.iter().enumerate() {
            for (j, y) in base.iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        out = next;
    }
    out
}

/// The normalizing constant `n! (-1)^{n+1} / (3n)^n` that makes `Q_n` monic.
pub fn normalizing_constant(n: usize) -> BigRational {
    let sign = if (n + 1).is_multiple_of(2) { 1 } else { -1 };
    BigRational::new(factorial(n) * sign, BigInt::from(3 * n as u64).pow(n as u32))
}

/// Scaled diagonal polynomials `P_n, Q_n, R_n` from the residues of
/// `C e^{3nzw} [w(w²-1)]^{-(n+1)}` at `w = -1, 0, 1`.
pub fn residue_polynomials(n: usize) -> Result<HPTriple, Error> {
    if n == 0 {
        return Err(Error::InvalidInput("residue route needs n >= 1".into()));
    }
    let c = normalizing_constant(n);
    let three_n = BigRational::from_integer(BigInt::from(3 * n as u64));
    let fact: Vec<BigInt> = (0..=n).map(factorial).collect();

    // Residue at w = ∓1: with w = ∓1 + u, w(w²-1) = u (2 ∓ 3u + u²).
    let side = |sign: i64| -> RationalPoly {
        let base = poly_pow(&[rat(2), rat(-3 * sign), rat(1)], n + 1);
        let a = series_inverse(&base, n + 1);
        let mut coeffs = vec![BigRational::zero(); n + 1];
        for (k, ak) in a.iter().enumerate() {
            let deg = n - k;
            coeffs[deg] = &c * ak * num_traits::pow(three_n.clone(), deg) / BigRational::from_integer(fact[deg].clone());
        }
        RationalPoly::new(coeffs)
    };
    let p = side(1);
    let r = side(-1);

    // Residue at w = 0: (1-w²)^{-(n+1)} = Σ binom(n+m, m) w^{2m}.
    let mut qc = vec![BigRational::zero(); n + 1];
    for m in 0..=n / 2 {
        let binom = factorial(n + m) / (factorial(n) * factorial(m));
        let deg = n - 2 * m;
        let val = BigRational::new(binom * &fact[n], fact[deg].clone()) / num_traits::pow(three_n.clone(), 2 * m);
        qc[deg] = val;
    }
    let q = RationalPoly::new(qc);
    Ok(HPTriple { n1: n, n2: n, n3: n, p, q, r, normalization: Normalization::QMonicScaled, scale: 3 * n as u64 })
}

/// Exact Taylor coefficients of the remainder on orders `first..=last`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemainderSeries {
    pub n: usize,
    pub first: usize,
    pub coeffs: Vec<BigRational>,
}

impl RemainderSeries {
    pub fn coeff(&self, k: usize) -> BigRational {
        if k < self.first {
            BigRational::zero()
        } else {
            self.coeffs.get(k - self.first).cloned().unwrap_or_else(BigRational::zero)
        }
    }
}

/// Taylor coefficients `0..=last` of `p e^{-s z} + q + r e^{s z}`, without
/// any assumption about which of them vanish.
pub fn remainder_coefficients(triple: &HPTriple, last: usize) -> Vec<BigRational> {
    let s = BigRational::from_integer(BigInt::from(triple.scale));
    let mut exp_plus = Vec::with_capacity(last + 1);
    let mut term = BigRational::one();
    for k in 0..=last {
        if k > 0 {
            term = term * &s / rat(k as i64);
        }
        exp_plus.push(term.clone());
    }
    (0..=last)
        .map(|k| {
            let mut acc = triple.q.coeff(k);
            for (j, pj) in triple.p.coeffs().iter().enumerate().take(k + 1) {
                let e = &exp_plus[k - j];
                if (k - j) % 2 == 0 {
                    acc += pj * e;
                } else {
                    acc -= pj * e;
                }
            }
            for (j, rj) in triple.r.coeffs().iter().enumerate().take(k + 1) {
                acc += rj * &exp_plus[k - j];
            }
            acc
        })
        .collect()
}

/// Coefficients of the remainder on `[order, last]`; the lower ones are
/// computed too and must vanish.
pub fn remainder_series(triple: &HPTriple, last: usize) -> Result<RemainderSeries, Error> {
    let first = triple.order();
    if last < first {
        return Err(Error::InvalidInput(format!("series end {last} below order {first}")));
    }
    let all = remainder_coefficients(triple, last);
    if let Some(k) = all[..first].iter().position(|c| !c.is_zero()) {
        return Err(Error::OrderViolation { index: k });
    }
    Ok(RemainderSeries { n: triple.n2, first, coeffs: all[first..].to_vec() })
}

/// Closed form of the first nonzero remainder coefficient of the diagonal
/// scaled triple: `(-1)^{n+1} n! (3n)^{2n+2} / (3n+2)!`.
pub fn remainder_leading_coefficient(n: usize) -> BigRational {
    let sign = if (n + 1).is_multiple_of(2) { 1 } else { -1 };
    BigRational::new(factorial(n) * BigInt::from(3 * n as u64).pow(2 * n as u32 + 2) * sign, factorial(3 * n + 2))
}

/// A polynomial converted once to working precision.
#[derive(Clone, Debug)]
pub struct MpPoly {
    coeffs: Vec<MpComplex>,
}

impl MpPoly {
    pub fn new(ctx: &MpCtx, poly: &RationalPoly) -> Self {
        let coeffs = poly.coeffs().iter().map(|c| ctx.from_real(ctx.from_rational(c))).collect();
        MpPoly { coeffs }
    }

    pub fn eval(&self, ctx: &MpCtx, z: &MpComplex) -> MpComplex {
        let mut acc = ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = ctx.add(&ctx.mul(&acc, z), c);
        }
        acc
    }

    /// Value and derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, ctx: &MpCtx, z: &MpComplex) -> (MpComplex, MpComplex) {
        let mut val = ctx.zero();
        let mut der = ctx.zero();
        for c in self.coeffs.iter().rev() {
            der = ctx.add(&ctx.mul(&der, z), &val);
            val = ctx.add(&ctx.mul(&val, z), c);
        }
        (val, der)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[MpComplex] {
        &self.coeffs
    }
}

/// Horner evaluation at `precision_bits`. Each step loses at most a couple
/// of ulps, so for degree `d` the relative error is bounded by about
/// `2^{-precision_bits} · 4d · (Σ|c_k||z|^k) / |p(z)|`.
pub fn eval_poly(poly: &RationalPoly, z: Complex64, precision_bits: usize) -> Complex64 {
    let ctx = MpCtx::new(precision_bits);
    MpPoly::new(&ctx, poly).eval(&ctx, &ctx.from_c64(z)).to_c64()
}

/// A triple prepared for repeated evaluation of `p, q, r` and the remainder.
pub struct TripleEvaluator {
    pub ctx: MpCtx,
    pub p: MpPoly,
    pub q: MpPoly,
    pub r: MpPoly,
    scale: f64,
}

impl TripleEvaluator {
    pub fn new(triple: &HPTriple, precision_bits: usize) -> Self {
        let ctx = MpCtx::new(precision_bits);
        let p = MpPoly::new(&ctx, &triple.p);
        let q = MpPoly::new(&ctx, &triple.q);
        let r = MpPoly::new(&ctx, &triple.r);
        TripleEvaluator { ctx, p, q, r, scale: triple.scale as f64 }
    }

    /// `(p(z), q(z), r(z))` at working precision.
    pub fn polys(&self, z: &MpComplex) -> [MpComplex; 3] {
        [self.p.eval(&self.ctx, z), self.q.eval(&self.ctx, z), self.r.eval(&self.ctx, z)]
    }

    /// `(e^{-s z}, e^{s z})` with `s` the triple's scale.
    pub fn exponentials(&mut self, z: &MpComplex) -> (MpComplex, MpComplex) {
        let s = self.ctx.real_f64(self.scale);
        let sz = self.ctx.mul_real(z, &s);
        let plus = self.ctx.exp(&sz);
        let minus = self.ctx.recip(&plus);
        (minus, plus)
    }

    pub fn remainder(&mut self, z: &MpComplex) -> MpComplex {
        let [p, q, r] = self.polys(z);
        let (em, ep) = self.exponentials(z);
        let ctx = &self.ctx;
        ctx.add(&ctx.add(&ctx.mul(&p, &em), &q), &ctx.mul(&r, &ep))
    }

    /// Remainder and its derivative.
    pub fn remainder_with_derivative(&mut self, z: &MpComplex) -> (MpComplex, MpComplex) {
        let (p, dp) = self.p.eval_with_derivative(&self.ctx, z);
        let (q, dq) = self.q.eval_with_derivative(&self.ctx, z);
        let (r, dr) = self.r.eval_with_derivative(&self.ctx, z);
        let (em, ep) = self.exponentials(z);
        let ctx = &self.ctx;
        let s = ctx.real_f64(self.scale);
        let val = ctx.add(&ctx.add(&ctx.mul(&p, &em), &q), &ctx.mul(&r, &ep));
        // d/dz [p e^{-sz}] = (p' - s p) e^{-sz}, likewise for r with +s.
        let dpe = ctx.mul(&ctx.sub(&dp, &ctx.mul_real(&p, &s)), &em);
        let dre = ctx.mul(&ctx.add(&dr, &ctx.mul_real(&r, &s)), &ep);
        (val, ctx.add(&ctx.add(&dpe, &dq), &dre))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourSide {
    Inside,
    Outside,
}

/// The three triples whose polynomials fill the rows of `Y`.
pub struct YTriples {
    pub n: usize,
    pub rows: [HPTriple; 3],
}

impl YTriples {
    pub fn new(n: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidInput("Y needs n >= 1".into()));
        }
        let s = 3 * n as u64;
        let top = solve_hp_system(n + 1, n - 1, n, Normalization::PMonicScaled, s)?;
        let mid = residue_polynomials(n)?;
        let bottom = solve_hp_system(n, n - 1, n + 1, Normalization::RMonicScaled, s)?;
        Ok(YTriples { n, rows: [top, mid, bottom] })
    }
}

/// `Y(z)` at working precision: polynomial rows, with the middle column
/// `z^{-3n-2} q` outside the contour and `z^{-3n-2} e` inside.
pub fn build_y(triples: &YTriples, z: Complex64, side: ContourSide, precision_bits: usize) -> Result<[[MpComplex; 3]; 3], Error> {
    let n = triples.n;
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidInput("Y is evaluated away from the origin".into()));
    }
    let mut out: Vec<[MpComplex; 3]> = Vec::with_capacity(3);
    for triple in &triples.rows {
        let mut ev = TripleEvaluator::new(triple, precision_bits);
        let zz = ev.ctx.from_c64(z);
        let [p, q, r] = ev.polys(&zz);
        let middle = match side {
            ContourSide::Outside => q,
            ContourSide::Inside => ev.remainder(&zz),
        };
        let ctx = &ev.ctx;
        let zpow = ctx.recip(&ctx.powi(&zz, 3 * n as u32 + 2));
        out.push([p, ctx.mul(&middle, &zpow), r]);
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

pub fn det3(ctx: &MpCtx, m: &[[MpComplex; 3]; 3]) -> MpComplex {
    let minor = |a: usize, b: usize, c: usize, d: usize| {
        ctx.sub(&ctx.mul(&m[1][a], &m[2][b]), &ctx.mul(&m[1][c], &m[2][d]))
    };
    let t0 = ctx.mul(&m[0][0], &minor(1, 2, 2, 1));
    let t1 = ctx.mul(&m[0][1], &minor(0, 2, 2, 0));
    let t2 = ctx.mul(&m[0][2], &minor(0, 1, 1, 0));
    ctx.add(&ctx.sub(&t0, &t1), &t2)
}

/// The jump matrix `J(z)` with `Y_inside = Y_outside · J` on the contour.
pub fn y_jump_matrix(ctx: &mut MpCtx, n: usize, z: Complex64) -> [[MpComplex; 3]; 3] {
    let zz = ctx.from_c64(z);
    let s = ctx.real_f64(3.0 * n as f64);
    let ep = ctx.exp(&ctx.mul_real(&zz, &s));
    let em = ctx.recip(&ep);
    let zpow = ctx.recip(&ctx.powi(&zz, 3 * n as u32 + 2));
    let (o, l) = (ctx.zero(), ctx.one());
    [
        [l.clone(), ctx.mul(&zpow, &em), o.clone()],
        [o.clone(), l.clone(), o.clone()],
        [o.clone(), ctx.mul(&zpow, &ep), l],
    ]
}

pub fn matmul3(ctx: &MpCtx, a: &[[MpComplex; 3]; 3], b: &[[MpComplex; 3]; 3]) -> [[MpComplex; 3]; 3] {
    let entry = |i: usize, j: usize| {
        let mut acc = ctx.zero();
        for k in 0..3 {
            acc = ctx.add(&acc, &ctx.mul(&a[i][k], &b[k][j]));
        }
        acc
    };
    [
        [entry(0, 0), entry(0, 1), entry(0, 2)],
        [entry(1, 0), entry(1, 1), entry(1, 2)],
        [entry(2, 0), entry(2, 1), entry(2, 2)],
    ]
}
