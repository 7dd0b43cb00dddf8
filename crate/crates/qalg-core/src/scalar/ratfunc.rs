//! Reduced rational functions in `u` over ℚ(i).

use super::gauss::GRat;
use super::poly::UPoly;

/// `num / den` with `gcd(num, den) = 1` and `den` monic; zero is `0 / 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatFunc {
    num: UPoly,
    den: UPoly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: UPoly::zero(), den: UPoly::one() }
    }

    pub fn one() -> Self {
        RatFunc::constant(GRat::one())
    }

    pub fn constant(c: GRat) -> Self {
        RatFunc { num: UPoly::constant(c), den: UPoly::one() }
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc::constant(GRat::from_int(n))
    }

    pub fn from_poly(p: UPoly) -> Self {
        RatFunc { num: p, den: UPoly::one() }
    }

    /// `c·u^k` for any integer `k`.
    pub fn monomial(c: GRat, k: i64) -> Self {
        if c.is_zero() {
            return RatFunc::zero();
        }
        if k >= 0 {
            RatFunc { num: UPoly::monomial(c, k as usize), den: UPoly::one() }
        } else {
            RatFunc { num: UPoly::constant(c), den: UPoly::monomial(GRat::one(), (-k) as usize) }
        }
    }

    pub fn new(num: UPoly, den: UPoly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Self::normalize(num, den))
    }

    fn normalize(num: UPoly, den: UPoly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        // strip common powers of u first; most denominators are monomials
        let v = num.valuation().unwrap().min(den.valuation().unwrap());
        let (mut num, mut den) = if v > 0 { (num.shift_down(v), den.shift_down(v)) } else { (num, den) };
        if !(den.degree() == Some(0) || den.is_monomial()) {
            let g = UPoly::gcd(&num, &den);
            if g.degree().unwrap_or(0) > 0 {
                num = num.divrem(&g).0;
                den = den.divrem(&g).0;
            }
        }
        let (l, den) = den.make_monic();
        let num = if l.is_one() { num } else { num.scale(&l.inv().unwrap()) };
        RatFunc { num, den }
    }

    pub fn num(&self) -> &UPoly {
        &self.num
    }

    pub fn den(&self) -> &UPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<GRat> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// True when no power of `u` survives.
    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.den.is_one() {
                return RatFunc { num: self.num.add(&o.num), den: UPoly::one() };
            }
            return Self::normalize(self.num.add(&o.num), self.den.clone());
        }
        Self::normalize(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc { num: self.num.mul(&o.num), den: UPoly::one() };
        }
        Self::normalize(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale(&self, c: &GRat) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return None;
        }
        Some(Self::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFunc) -> Option<RatFunc> {
        Some(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Option<RatFunc> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = RatFunc::one();
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

    /// Value at `u = x`; `None` at a pole.
    pub fn eval(&self, x: &GRat) -> Option<GRat> {
        self.num.eval(x).div(&self.den.eval(x))
    }

    /// Substitute `u ↦ u^m`.
    pub fn stretch(&self, m: usize) -> RatFunc {
        RatFunc { num: self.num.stretch(m), den: self.den.stretch(m) }
    }

    pub fn compress(&self, m: usize) -> Option<RatFunc> {
        Some(RatFunc { num: self.num.compress(m)?, den: self.den.compress(m)? })
    }

    /// `gcd` of all exponents of `u` present (0 when constant).
    pub fn exponent_gcd(&self) -> usize {
        let mut g = 0usize;
        for p in [&self.num, &self.den] {
            for (k, _) in p.nonzero_terms() {
                g = gcd_usize(g, k);
            }
        }
        g
    }

    /// Exact square root when both numerator and denominator are squares.
    pub fn sqrt(&self) -> Option<RatFunc> {
        let n = poly_sqrt(&self.num)?;
        let d = poly_sqrt(&self.den)?;
        Some(Self::normalize(n, d))
    }
}

pub(crate) fn gcd_usize(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Square root of a polynomial over ℚ(i) when it is a perfect square.
fn poly_sqrt(p: &UPoly) -> Option<UPoly> {
    let Some(deg) = p.degree() else {
        return Some(UPoly::zero());
    };
    let v = p.valuation().unwrap();
    if v % 2 == 1 || deg % 2 == 1 {
        return None;
    }
    let p = p.shift_down(v);
    let deg = deg - v;
    let c = p.coeffs();
    let half = deg / 2;
    // top-down: s_half = sqrt(lead), then solve for lower coefficients
    let mut s = vec![GRat::zero(); half + 1];
    s[half] = c[deg].sqrt()?;
    let two_lead = &s[half] + &s[half];
    let inv2 = two_lead.inv()?;
    for k in (0..half).rev() {
        // coefficient of u^{half + k} in s² equals c[half + k]
        let mut acc = c[half + k].clone();
        for i in (k + 1)..half {
            let j = half + k - i;
            if j > half || j <= k {
                continue;
            }
            acc = &acc - &(&s[i] * &s[j]);
        }
        s[k] = &acc * &inv2;
    }
    let r = UPoly::from_coeffs(s);
    if r.mul(&r) == p {
        Some(r.shift_up(v / 2))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> UPoly {
        UPoly::from_coeffs(v.iter().map(|&x| GRat::from_int(x)).collect())
    }

    #[test]
    fn reduced_on_construction() {
        let r = RatFunc::new(p(&[-1, 0, 1]), p(&[2, 2])).unwrap();
        assert_eq!(r.num(), &p(&[-1, 1]).scale(&GRat::from_frac(1, 2)));
        assert_eq!(r.den(), &p(&[1]));
    }

    #[test]
    fn inverse_of_u6_plus_one() {
        let r = RatFunc::from_poly(p(&[1, 0, 0, 0, 0, 0, 1])).inv().unwrap();
        assert!(r.num().is_one());
        assert_eq!(r.den(), &p(&[1, 0, 0, 0, 0, 0, 1]));
    }

    #[test]
    fn square_roots() {
        let s = p(&[1, 2, 0, 3]);
        let r = RatFunc::new(s.mul(&s).shift_up(2), p(&[0, 0, 0, 0, 9])).unwrap();
        let root = r.sqrt().unwrap();
        assert_eq!(root.mul(&root), r);
        assert!(RatFunc::from_poly(p(&[2, 0, 1])).sqrt().is_none());
    }
}
