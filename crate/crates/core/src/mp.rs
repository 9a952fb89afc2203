//! Configurable-precision complex arithmetic on top of `astro-float`.
//!
//! A [`MpCtx`] carries the working precision and the constant cache needed by
//! the transcendental functions. It is cheap to create and not shared between
//! threads; create one per computation.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

const RM: RoundingMode = RoundingMode::ToEven;

/// Complex number with arbitrary-precision real and imaginary parts.
#[derive(Clone, Debug)]
pub struct MpComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

pub struct MpCtx {
    prec: usize,
    cc: Consts,
}

impl MpCtx {
    pub fn new(precision_bits: usize) -> Self {
        let cc = Consts::new().expect("constant cache allocation");
        MpCtx { prec: precision_bits.max(64), cc }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn real_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }

    pub fn zero(&self) -> MpComplex {
        MpComplex { re: self.real_f64(0.0), im: self.real_f64(0.0) }
    }

    pub fn one(&self) -> MpComplex {
        MpComplex { re: self.real_f64(1.0), im: self.real_f64(0.0) }
    }

    pub fn from_c64(&self, z: Complex64) -> MpComplex {
        MpComplex { re: self.real_f64(z.re), im: self.real_f64(z.im) }
    }

    pub fn from_real(&self, x: BigFloat) -> MpComplex {
        MpComplex { re: x, im: self.real_f64(0.0) }
    }

    pub fn from_int(&self, n: &BigInt) -> BigFloat {
        // Horner in base 2^64 over the magnitude digits.
        let p = self.prec + 64;
        let radix = BigFloat::from_u64(u64::MAX, p).add(&BigFloat::from_u64(1, p), p, RM);
        let mut acc = BigFloat::from_u64(0, p);
        for d in n.magnitude().to_u64_digits().iter().rev() {
            acc = acc.mul(&radix, p, RM).add(&BigFloat::from_u64(*d, p), p, RM);
        }
        if n.is_negative() {
            acc = acc.neg();
        }
        acc
    }

    /// A decimal literal at working precision.
    pub fn decimal(&mut self, s: &str) -> BigFloat {
        BigFloat::parse(s, Radix::Dec, self.prec, RM, &mut self.cc)
    }

    pub fn from_rational(&self, q: &BigRational) -> BigFloat {
        if q.is_zero() {
            return self.real_f64(0.0);
        }
        let num = self.from_int(q.numer());
        let den = self.from_int(q.denom());
        num.div(&den, self.prec, RM)
    }

    pub fn add(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        MpComplex { re: a.re.add(&b.re, self.prec, RM), im: a.im.add(&b.im, self.prec, RM) }
    }

    pub fn sub(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        MpComplex { re: a.re.sub(&b.re, self.prec, RM), im: a.im.sub(&b.im, self.prec, RM) }
    }

    pub fn neg(&self, a: &MpComplex) -> MpComplex {
        MpComplex { re: a.re.neg(), im: a.im.neg() }
    }

    pub fn mul(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        let p = self.prec;
        let rr = a.re.mul(&b.re, p, RM);
        let ii = a.im.mul(&b.im, p, RM);
        let ri = a.re.mul(&b.im, p, RM);
        let ir = a.im.mul(&b.re, p, RM);
        MpComplex { re: rr.sub(&ii, p, RM), im: ri.add(&ir, p, RM) }
    }

    pub fn mul_real(&self, a: &MpComplex, x: &BigFloat) -> MpComplex {
        MpComplex { re: a.re.mul(x, self.prec, RM), im: a.im.mul(x, self.prec, RM) }
    }

    pub fn norm_sqr(&self, a: &MpComplex) -> BigFloat {
        let p = self.prec;
        a.re.mul(&a.re, p, RM).add(&a.im.mul(&a.im, p, RM), p, RM)
    }

    pub fn abs(&self, a: &MpComplex) -> BigFloat {
        self.norm_sqr(a).sqrt(self.prec, RM)
    }

    pub fn recip(&self, a: &MpComplex) -> MpComplex {
        let p = self.prec;
        let d = self.norm_sqr(a);
        MpComplex { re: a.re.div(&d, p, RM), im: a.im.neg().div(&d, p, RM) }
    }

    pub fn div(&self, a: &MpComplex, b: &MpComplex) -> MpComplex {
        self.mul(a, &self.recip(b))
    }

    pub fn exp(&mut self, a: &MpComplex) -> MpComplex {
        let p = self.prec;
        let m = a.re.exp(p, RM, &mut self.cc);
        let c = a.im.cos(p, RM, &mut self.cc);
        let s = a.im.sin(p, RM, &mut self.cc);
        MpComplex { re: m.mul(&c, p, RM), im: m.mul(&s, p, RM) }
    }

    /// Principal square root (cut along the negative reals).
    pub fn sqrt(&self, a: &MpComplex) -> MpComplex {
        let p = self.prec;
        if a.re.is_zero() && a.im.is_zero() {
            return self.zero();
        }
        let r = self.abs(a);
        let two = self.real_f64(2.0);
        let t = r.add(&a.re.abs(), p, RM).div(&two, p, RM).sqrt(p, RM);
        let other = a.im.abs().div(&t.mul(&two, p, RM), p, RM);
        if !a.re.is_negative() {
            let im = if a.im.is_negative() { other.neg() } else { other };
            MpComplex { re: t, im }
        } else {
            let im = if a.im.is_negative() { t.neg() } else { t };
            MpComplex { re: other, im }
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, a: &MpComplex, k: u32) -> MpComplex {
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }
}

/// Converts to `f64`, returning `(mantissa, binary exponent)` so that values
/// outside the `f64` range survive.
pub fn big_to_f64_scaled(x: &BigFloat) -> (f64, i64) {
    if x.is_zero() {
        return (0.0, 0);
    }
    match x.as_raw_parts() {
        Some((words, _bits, sign, exponent, _)) => {
            let top = *words.last().unwrap_or(&0);
            let next = if words.len() >= 2 { words[words.len() - 2] } else { 0 };
            let m = top as f64 / 18446744073709551616.0 + next as f64 / 18446744073709551616.0f64.powi(2);
            let m = if sign == Sign::Neg { -m } else { m };
            (m, exponent as i64)
        }
        None => (f64::NAN, 0),
    }
}

pub fn big_to_f64(x: &BigFloat) -> f64 {
    let (m, e) = big_to_f64_scaled(x);
    ldexp(m, e)
}

pub fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let e = e.clamp(-2200, 2200) as i32;
    // Split to avoid intermediate overflow of 2^e.
    let half = e / 2;
    m * 2f64.powi(half) * 2f64.powi(e - half)
}

impl MpComplex {
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(big_to_f64(&self.re), big_to_f64(&self.im))
    }

    /// Returns `(c, e)` with `self ≈ c · 2^e` and `|c|` of order one.
    pub fn to_c64_scaled(&self) -> (Complex64, i64) {
        let (mr, er) = big_to_f64_scaled(&self.re);
        let (mi, ei) = big_to_f64_scaled(&self.im);
        let e = if mr == 0.0 {
            ei
        } else if mi == 0.0 {
            er
        } else {
            er.max(ei)
        };
        (Complex64::new(ldexp(mr, er - e), ldexp(mi, ei - e)), e)
    }

    /// Natural log of the modulus, valid far outside the `f64` range.
    pub fn ln_abs(&self) -> f64 {
        let (c, e) = self.to_c64_scaled();
        c.norm().ln() + e as f64 * std::f64::consts::LN_2
    }

    /// Principal logarithm, valid far outside the `f64` range.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.ln_abs(), self.arg())
    }

    pub fn arg(&self) -> f64 {
        self.to_c64_scaled().0.arg()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}
