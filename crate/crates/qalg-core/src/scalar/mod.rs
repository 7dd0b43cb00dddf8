//! Coefficient arithmetic.
//!
//! Exact scalars live in ℚ(i)(u), where `u` is a formal root of `q`
//! (`q = u^D`), optionally extended by a single square root `ρ` with
//! `ρ² = d`. A field may also be *specialised*: `u` is then a fixed Gaussian
//! rational and every scalar is a constant, which keeps long recursions cheap
//! while remaining exact. Numeric evaluation goes through [`complex`].

pub mod complex;
pub mod gauss;
pub mod json;
pub mod poly;
pub mod ratfunc;
pub mod solve;

pub use complex::{Complex, NumericField};
pub use gauss::GRat;
pub use poly::UPoly;
pub use ratfunc::RatFunc;
pub use solve::{solve_univariate, Root, Roots};

use rug::Rational;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different quadratic extensions")]
    MixedField,
    #[error("field already carries a quadratic extension")]
    AlreadyExtended,
    #[error("pole: denominator vanishes at the evaluation point")]
    PoleError,
    #[error("value not representable: {0}")]
    NotRepresentable(String),
}

/// Quadratic extension datum `ρ² = d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Extension {
    pub d: RatFunc,
}

/// Rational exponent of `q`.
pub type QExponent = Rational;

/// `A + B·ρ`, with `B = 0` whenever no extension is attached.
#[derive(Clone, Debug)]
pub struct Scalar {
    a: RatFunc,
    b: RatFunc,
    ext: Option<Arc<Extension>>,
}

impl PartialEq for Scalar {
    fn eq(&self, o: &Self) -> bool {
        self.a == o.a && self.b == o.b && (self.b.is_zero() || self.ext == o.ext)
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, o: &Self) -> Ordering {
        self.a.cmp(&o.a).then_with(|| self.b.cmp(&o.b))
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { a: RatFunc::zero(), b: RatFunc::zero(), ext: None }
    }

    pub fn one() -> Self {
        Scalar::from_ratfunc(RatFunc::one())
    }

    pub fn i() -> Self {
        Scalar::from_grat(GRat::i())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_ratfunc(RatFunc::from_int(n))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Scalar::from_grat(GRat::from_frac(n, d))
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar::from_grat(GRat::from_rational(r))
    }

    pub fn from_grat(g: GRat) -> Self {
        Scalar::from_ratfunc(RatFunc::constant(g))
    }

    pub fn from_ratfunc(a: RatFunc) -> Self {
        Scalar { a, b: RatFunc::zero(), ext: None }
    }

    /// `a + b·ρ` in the given extension.
    pub fn with_ext(a: RatFunc, b: RatFunc, ext: Option<Arc<Extension>>) -> Self {
        if b.is_zero() {
            return Scalar { a, b, ext: None };
        }
        assert!(ext.is_some(), "ρ-component requires an extension");
        Scalar { a, b, ext }
    }

    /// The generator `ρ` of `ext`.
    pub fn rho(ext: &Arc<Extension>) -> Self {
        Scalar::with_ext(RatFunc::zero(), RatFunc::one(), Some(ext.clone()))
    }

    pub fn rational_part(&self) -> &RatFunc {
        &self.a
    }

    pub fn rho_part(&self) -> &RatFunc {
        &self.b
    }

    pub fn ext(&self) -> Option<&Arc<Extension>> {
        self.ext.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// Value in ℚ(i) when the scalar does not involve `u` or `ρ`.
    pub fn as_grat(&self) -> Option<GRat> {
        if self.b.is_zero() {
            self.a.as_constant()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_constant() && self.b.is_constant()
    }

    fn join_ext(&self, o: &Scalar) -> Result<Option<Arc<Extension>>, FieldError> {
        match (&self.ext, &o.ext) {
            (None, None) => Ok(None),
            (Some(e), None) | (None, Some(e)) => Ok(Some(e.clone())),
            (Some(e1), Some(e2)) => {
                if Arc::ptr_eq(e1, e2) || e1 == e2 {
                    Ok(Some(e1.clone()))
                } else {
                    Err(FieldError::MixedField)
                }
            }
        }
    }

    pub fn checked_add(&self, o: &Scalar) -> Result<Scalar, FieldError> {
        let ext = self.join_ext(o)?;
        Ok(Scalar::with_ext(self.a.add(&o.a), self.b.add(&o.b), ext))
    }

    pub fn checked_sub(&self, o: &Scalar) -> Result<Scalar, FieldError> {
        self.checked_add(&o.neg_ref())
    }

    pub fn checked_mul(&self, o: &Scalar) -> Result<Scalar, FieldError> {
        if self.b.is_zero() && o.b.is_zero() {
            return Ok(Scalar::from_ratfunc(self.a.mul(&o.a)));
        }
        let ext = self.join_ext(o)?;
        let d = &ext.as_ref().unwrap().d;
        let a = self.a.mul(&o.a).add(&self.b.mul(&o.b).mul(d));
        let b = self.a.mul(&o.b).add(&self.b.mul(&o.a));
        Ok(Scalar::with_ext(a, b, ext))
    }

    pub fn checked_inv(&self) -> Result<Scalar, FieldError> {
        if self.b.is_zero() {
            return self.a.inv().map(Scalar::from_ratfunc).ok_or(FieldError::DivisionByZero);
        }
        let ext = self.ext.clone().unwrap();
        let norm = self.a.mul(&self.a).sub(&self.b.mul(&self.b).mul(&ext.d));
        let ninv = norm.inv().ok_or(FieldError::DivisionByZero)?;
        Ok(Scalar::with_ext(self.a.mul(&ninv), self.b.neg().mul(&ninv), Some(ext)))
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar, FieldError> {
        self.checked_mul(&o.checked_inv()?)
    }

    pub fn neg_ref(&self) -> Scalar {
        Scalar { a: self.a.neg(), b: self.b.neg(), ext: self.ext.clone() }
    }

    pub fn inv(&self) -> Option<Scalar> {
        self.checked_inv().ok()
    }

    pub fn pow(&self, e: i64) -> Result<Scalar, FieldError> {
        let base = if e < 0 { self.checked_inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Scalar::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&b)?;
            }
            e >>= 1;
            if e > 0 {
                b = b.checked_mul(&b)?;
            }
        }
        Ok(acc)
    }

    /// Conjugate with respect to `ρ ↦ -ρ`.
    pub fn rho_conj(&self) -> Scalar {
        Scalar { a: self.a.clone(), b: self.b.neg(), ext: self.ext.clone() }
    }

    /// Substitute `u ↦ u^m` in both components (and in the extension datum).
    pub fn stretch(&self, m: usize, new_ext: Option<&Arc<Extension>>) -> Scalar {
        let ext = if self.b.is_zero() { None } else { new_ext.cloned() };
        Scalar::with_ext(self.a.stretch(m), self.b.stretch(m), ext)
    }

    pub fn compress(&self, m: usize, new_ext: Option<&Arc<Extension>>) -> Option<Scalar> {
        let ext = if self.b.is_zero() { None } else { new_ext.cloned() };
        Some(Scalar::with_ext(self.a.compress(m)?, self.b.compress(m)?, ext))
    }

    pub fn exponent_gcd(&self) -> usize {
        ratfunc::gcd_usize(self.a.exponent_gcd(), self.b.exponent_gcd())
    }

    /// Map `u ↦ value` (rational specialisation); the extension datum is
    /// specialised by the caller.
    pub fn specialize(&self, value: &GRat, new_ext: Option<&Arc<Extension>>) -> Result<Scalar, FieldError> {
        let a = self.a.eval(value).ok_or(FieldError::PoleError)?;
        let b = self.b.eval(value).ok_or(FieldError::PoleError)?;
        let ext = if b.is_zero() { None } else { new_ext.cloned() };
        Ok(Scalar::with_ext(RatFunc::constant(a), RatFunc::constant(b), ext))
    }

    /// Number of monomials in `u` (real and imaginary parts counted
    /// separately) after multiplying through by the denominator.
    pub fn expanded_term_count(&self) -> usize {
        self.a.num().term_count() + self.b.num().term_count()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                self.$checked(o).expect("scalar operation failed")
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$checked(&o).expect("scalar operation failed")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

/// Root order, optional extension and optional specialisation of `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDescriptor {
    /// `q = u^D`.
    pub root_order: u32,
    pub ext: Option<Arc<Extension>>,
    /// When set, `u` is this fixed value and scalars are constants.
    pub u_value: Option<GRat>,
}

impl Default for FieldDescriptor {
    fn default() -> Self {
        FieldDescriptor::new(2)
    }
}

impl FieldDescriptor {
    pub fn new(root_order: u32) -> Self {
        assert!(root_order >= 1);
        FieldDescriptor { root_order, ext: None, u_value: None }
    }

    pub fn is_specialized(&self) -> bool {
        self.u_value.is_some()
    }

    /// `u^k`.
    pub fn u_pow(&self, k: i64) -> Scalar {
        match &self.u_value {
            Some(v) => Scalar::from_grat(v.pow(k).expect("u value is nonzero")),
            None => Scalar::from_ratfunc(RatFunc::monomial(GRat::one(), k)),
        }
    }

    /// `q^k`.
    pub fn q_pow(&self, k: i64) -> Scalar {
        self.u_pow(k * self.root_order as i64)
    }

    /// `q^e` for rational `e`, when `e·D` is an integer.
    pub fn q_pow_rational(&self, e: &Rational) -> Option<Scalar> {
        let t = Rational::from(e * self.root_order);
        if *t.denom() != 1 {
            return None;
        }
        Some(self.u_pow(t.numer().to_i64()?))
    }

    /// Attach `ρ² = d`. A `d` that already has a square root in the field
    /// yields `Err(root)` so the caller can use the root directly.
    pub fn adjoin_sqrt(&self, d: &Scalar) -> Result<Result<(FieldDescriptor, Scalar), Scalar>, FieldError> {
        if d.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if let Some(r) = field_sqrt(d) {
            return Ok(Err(r));
        }
        if self.ext.is_some() || !d.rho_part().is_zero() {
            return Err(FieldError::AlreadyExtended);
        }
        let ext = Arc::new(Extension { d: d.rational_part().clone() });
        let mut fd = self.clone();
        fd.ext = Some(ext.clone());
        Ok(Ok((fd, Scalar::rho(&ext))))
    }

    pub fn rho(&self) -> Option<Scalar> {
        self.ext.as_ref().map(Scalar::rho)
    }
}

/// Square root inside ℚ(i)(u) (no extension) when one exists.
pub fn field_sqrt(d: &Scalar) -> Option<Scalar> {
    if !d.rho_part().is_zero() {
        return None;
    }
    let r = d.rational_part();
    if let Some(root) = r.sqrt() {
        return Some(Scalar::from_ratfunc(root));
    }
    // try -d = s² so that sqrt(d) = i·s
    r.neg().sqrt().map(|s| Scalar::from_ratfunc(s.scale(&GRat::i())))
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fd = FieldDescriptor::new(1);
        write!(f, "{}", json::render_scalar(self, &fd))
    }
}
