//! Gaussian rationals `a + b i` with `a, b` in ℚ.

use rug::{Integer, Rational};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GRat {
    pub re: Rational,
    pub im: Rational,
}

impl GRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        GRat { re, im }
    }

    pub fn zero() -> Self {
        GRat::default()
    }

    pub fn one() -> Self {
        GRat::from_int(1)
    }

    pub fn i() -> Self {
        GRat::new(Rational::new(), Rational::from(1))
    }

    pub fn from_int(n: i64) -> Self {
        GRat::new(Rational::from(n), Rational::new())
    }

    pub fn from_rational(r: Rational) -> Self {
        GRat::new(r, Rational::new())
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        GRat::from_rational(Rational::from((n, d)))
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0().is_eq() && self.im.cmp0().is_eq()
    }

    pub fn is_one(&self) -> bool {
        self.im.cmp0().is_eq() && self.re == 1
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0().is_eq()
    }

    pub fn conj(&self) -> Self {
        GRat::new(self.re.clone(), Rational::from(-&self.im))
    }

    /// `re² + im²`.
    pub fn norm(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(GRat::new(
            Rational::from(&self.re / &n),
            Rational::from(-&self.im) / n,
        ))
    }

    pub fn div(&self, other: &GRat) -> Option<Self> {
        other.inv().map(|inv| self * &inv)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        GRat::new(Rational::from(&self.re * r), Rational::from(&self.im * r))
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = GRat::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        Some(acc)
    }

    /// Exact square root in ℚ(i), principal branch (nonnegative real part,
    /// and nonnegative imaginary part when the real part vanishes).
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(GRat::zero());
        }
        let m = rational_sqrt(&self.norm())?;
        let two = Rational::from(2);
        let x2 = Rational::from(&m + &self.re) / &two;
        let y2 = Rational::from(&m - &self.re) / &two;
        let x = rational_sqrt(&x2)?;
        let mut y = rational_sqrt(&y2)?;
        if self.im.cmp0().is_lt() {
            y = -y;
        }
        Some(GRat::new(x, y))
    }

    /// Integer-valued parts when the denominators are 1.
    pub fn is_gaussian_integer(&self) -> bool {
        *self.re.denom() == 1 && *self.im.denom() == 1
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Square root of a nonnegative rational when it is a perfect square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.cmp0().is_lt() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    if !n.is_perfect_square() || !d.is_perfect_square() {
        return None;
    }
    Some(Rational::from((Integer::from(n.sqrt_ref()), Integer::from(d.sqrt_ref()))))
}

/// Largest `s` such that `s²` divides the rational `r` in the sense of
/// ℤ-factorisation of numerator and denominator (trial division only).
pub fn rational_square_part(r: &Rational) -> Rational {
    fn square_part(n: &Integer) -> Integer {
        let mut n = Integer::from(n.abs_ref());
        let mut s = Integer::from(1);
        let mut p = Integer::from(2);
        let limit = Integer::from(1_000_000);
        while Integer::from(&p * &p) <= n && p <= limit {
            let sq = Integer::from(&p * &p);
            while n.is_divisible(&sq) {
                n /= &sq;
                s *= &p;
            }
            while n.is_divisible(&p) {
                n /= &p;
            }
            p += 1;
        }
        if n.is_perfect_square() {
            s *= n.sqrt();
        }
        s
    }
    Rational::from((square_part(r.numer()), square_part(r.denom())))
}

impl fmt::Display for GRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.cmp0().is_eq(), self.im.cmp0().is_eq()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}*I", self.im),
            (false, false) => {
                if self.im.cmp0().is_lt() {
                    write!(f, "{}-{}*I", self.re, Rational::from(-&self.im))
                } else {
                    write!(f, "{}+{}*I", self.re, self.im)
                }
            }
        }
    }
}

impl<'a> Add<&'a GRat> for &'a GRat {
    type Output = GRat;
    fn add(self, o: &GRat) -> GRat {
        GRat::new(Rational::from(&self.re + &o.re), Rational::from(&self.im + &o.im))
    }
}

impl<'a> Sub<&'a GRat> for &'a GRat {
    type Output = GRat;
    fn sub(self, o: &GRat) -> GRat {
        GRat::new(Rational::from(&self.re - &o.re), Rational::from(&self.im - &o.im))
    }
}

impl<'a> Mul<&'a GRat> for &'a GRat {
    type Output = GRat;
    fn mul(self, o: &GRat) -> GRat {
        if self.im.cmp0().is_eq() && o.im.cmp0().is_eq() {
            return GRat::from_rational(Rational::from(&self.re * &o.re));
        }
        let re = Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im);
        let im = Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re);
        GRat::new(re, im)
    }
}

impl Neg for &GRat {
    type Output = GRat;
    fn neg(self) -> GRat {
        GRat::new(Rational::from(-&self.re), Rational::from(-&self.im))
    }
}
