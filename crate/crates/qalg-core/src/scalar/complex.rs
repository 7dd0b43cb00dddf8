//! Arbitrary-precision complex numbers and numeric evaluation of exact scalars.

use super::{FieldDescriptor, FieldError, GRat, RatFunc, Scalar, UPoly};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn zero(prec: u32) -> Self {
        Complex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Complex::from_f64(1.0, 0.0, prec)
    }

    pub fn i(prec: u32) -> Self {
        Complex::from_f64(0.0, 1.0, prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Complex { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Complex { re, im: Float::new(prec) }
    }

    pub fn from_grat(g: &GRat, prec: u32) -> Self {
        Complex { re: Float::with_val(prec, &g.re), im: Float::with_val(prec, &g.im) }
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        Complex { re: Float::with_val(prec, r), im: Float::new(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Complex) -> Complex {
        Complex { re: Float::with_val(self.prec(), &self.re + &o.re), im: Float::with_val(self.prec(), &self.im + &o.im) }
    }

    pub fn sub(&self, o: &Complex) -> Complex {
        Complex { re: Float::with_val(self.prec(), &self.re - &o.re), im: Float::with_val(self.prec(), &self.im - &o.im) }
    }

    pub fn neg(&self) -> Complex {
        Complex { re: Float::with_val(self.prec(), -&self.re), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn mul(&self, o: &Complex) -> Complex {
        let p = self.prec();
        if self.im.is_zero() && o.im.is_zero() {
            return Complex::from_real(Float::with_val(p, &self.re * &o.re));
        }
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        Complex { re: ac - bd, im: ad + bc }
    }

    /// `self += a * b`.
    pub fn add_mul(&mut self, a: &Complex, b: &Complex) {
        let t = a.mul(b);
        self.re += &t.re;
        self.im += &t.im;
    }

    pub fn scale(&self, r: &Float) -> Complex {
        Complex { re: Float::with_val(self.prec(), &self.re * r), im: Float::with_val(self.prec(), &self.im * r) }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, &self.re * &self.re) + Float::with_val(p, &self.im * &self.im)
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn conj(&self) -> Complex {
        Complex { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn inv(&self) -> Option<Complex> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Complex {
            re: Float::with_val(self.prec(), &self.re / &n),
            im: Float::with_val(self.prec(), -&self.im) / n,
        })
    }

    pub fn div(&self, o: &Complex) -> Option<Complex> {
        if o.im.is_zero() {
            if o.re.is_zero() {
                return None;
            }
            return Some(Complex {
                re: Float::with_val(self.prec(), &self.re / &o.re),
                im: Float::with_val(self.prec(), &self.im / &o.re),
            });
        }
        Some(self.mul(&o.inv()?))
    }

    pub fn powi(&self, e: i64) -> Option<Complex> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Complex::one(self.prec());
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        Some(acc)
    }

    pub fn from_polar(r: &Float, theta: &Float) -> Complex {
        let p = r.prec();
        let (s, c) = theta.clone().sin_cos(Float::new(p));
        Complex { re: Float::with_val(p, r * &c), im: Float::with_val(p, r * &s) }
    }

    /// Principal branch of `self^e` for real `e`.
    pub fn powf(&self, e: &Float) -> Complex {
        let p = self.prec();
        if self.is_zero() {
            return Complex::zero(p);
        }
        let r = Float::with_val(p, self.abs().pow(e));
        let t = Float::with_val(p, self.arg() * e);
        Complex::from_polar(&r, &t)
    }

    pub fn pow_rational(&self, e: &Rational) -> Complex {
        if *e.denom() == 1 {
            if let Some(k) = e.numer().to_i64() {
                if let Some(v) = self.powi(k) {
                    return v;
                }
            }
        }
        self.powf(&Float::with_val(self.prec(), e))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Complex {
        let p = self.prec();
        let m = self.abs();
        let x = Float::with_val(p, Float::with_val(p, &m + &self.re) / 2u32).sqrt();
        let mut y = Float::with_val(p, Float::with_val(p, &m - &self.re) / 2u32).sqrt();
        if self.im.is_sign_negative() && !self.im.is_zero() {
            y = -y;
        }
        Complex { re: x, im: y }
    }

    pub fn exp(&self) -> Complex {
        let p = self.prec();
        let r = Float::with_val(p, self.re.exp_ref());
        Complex::from_polar(&r, &self.im)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// `log2 |self|` as an `f64`, valid far outside the `f64` range.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let a = self.abs();
        let (m, e) = a.to_f64_exp();
        m.abs().log2() + e as f64
    }

    /// Decimal rendering with `digits` significant digits per part.
    pub fn to_decimal(&self, digits: usize) -> (String, String) {
        (self.re.to_string_radix(10, Some(digits)), self.im.to_string_radix(10, Some(digits)))
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_decimal(20);
        write!(f, "{re} + {im}*I")
    }
}

/// Numeric instantiation of a [`FieldDescriptor`]: values of `u`, `q` and `ρ`.
#[derive(Clone, Debug)]
pub struct NumericField {
    pub prec: u32,
    pub q: Complex,
    pub u: Complex,
    pub rho: Option<Complex>,
    pub root_order: u32,
}

impl NumericField {
    /// `u` is the principal `D`-th root of `q`; `ρ` the principal square root
    /// of the evaluated extension datum.
    pub fn new(fd: &FieldDescriptor, q: Complex, prec: u32) -> Result<Self, FieldError> {
        if prec < 64 {
            return Err(FieldError::NotRepresentable("precision below 64 bits".into()));
        }
        let q = Complex { re: Float::with_val(prec, &q.re), im: Float::with_val(prec, &q.im) };
        if q.abs() <= 1 {
            return Err(FieldError::NotRepresentable("|q| must exceed 1".into()));
        }
        let u = match &fd.u_value {
            Some(v) => Complex::from_grat(v, prec),
            None => q.pow_rational(&Rational::from((1, fd.root_order))),
        };
        let mut nf = NumericField { prec, q, u, rho: None, root_order: fd.root_order };
        if let Some(ext) = &fd.ext {
            let d = nf.eval_ratfunc(&ext.d)?;
            nf.rho = Some(d.sqrt());
        }
        Ok(nf)
    }

    /// Real positive `q` given as an exact rational.
    pub fn real(fd: &FieldDescriptor, q: &Rational, prec: u32) -> Result<Self, FieldError> {
        NumericField::new(fd, Complex::from_rational(q, prec), prec)
    }

    pub fn zero(&self) -> Complex {
        Complex::zero(self.prec)
    }

    pub fn one(&self) -> Complex {
        Complex::one(self.prec)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.prec, Constant::Pi)
    }

    pub fn u_pow(&self, k: i64) -> Complex {
        self.u.powi(k).expect("u is nonzero")
    }

    pub fn q_pow(&self, k: i64) -> Complex {
        self.u_pow(k * self.root_order as i64)
    }

    /// `q^e`, principal branch.
    pub fn q_pow_rational(&self, e: &Rational) -> Complex {
        let t = Rational::from(e * self.root_order);
        self.u.pow_rational(&t)
    }

    fn eval_upoly(&self, p: &UPoly) -> Complex {
        let mut acc = self.zero();
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(&self.u);
            acc = acc.add(&Complex::from_grat(c, self.prec));
        }
        acc
    }

    pub fn eval_ratfunc(&self, r: &RatFunc) -> Result<Complex, FieldError> {
        let n = self.eval_upoly(r.num());
        if r.den().is_one() {
            return Ok(n);
        }
        let d = self.eval_upoly(r.den());
        // pole test relative to the size of the denominator's coefficients
        let mut scale = Float::with_val(self.prec, 0);
        let ua = self.u.abs();
        let mut pw = Float::with_val(self.prec, 1);
        for c in r.den().coeffs() {
            let ca = Complex::from_grat(c, self.prec).abs();
            scale += Float::with_val(self.prec, &ca * &pw);
            pw *= &ua;
        }
        let tol = Float::with_val(self.prec, Float::i_exp(1, -(self.prec as i32 - 8))) * scale;
        if d.abs() <= tol {
            return Err(FieldError::PoleError);
        }
        Ok(n.div(&d).unwrap())
    }

    pub fn eval(&self, x: &Scalar) -> Result<Complex, FieldError> {
        let a = self.eval_ratfunc(x.rational_part())?;
        if x.rho_part().is_zero() {
            return Ok(a);
        }
        let rho = self.rho.as_ref().ok_or(FieldError::MixedField)?;
        let b = self.eval_ratfunc(x.rho_part())?;
        Ok(a.add(&b.mul(rho)))
    }
}
