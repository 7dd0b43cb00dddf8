//! Dense univariate polynomials in the formal root `u`, over ℚ(i).

use super::gauss::GRat;
use rug::{Integer, Rational};
use std::cmp::Ordering;

/// Coefficients stored low degree first; no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct UPoly {
    c: Vec<GRat>,
}

impl PartialOrd for UPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c.len().cmp(&other.c.len()).then_with(|| self.c.iter().rev().cmp(other.c.iter().rev()))
    }
}

impl UPoly {
    pub fn from_coeffs(mut c: Vec<GRat>) -> Self {
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        UPoly::constant(GRat::one())
    }

    pub fn constant(c: GRat) -> Self {
        UPoly::from_coeffs(vec![c])
    }

    pub fn monomial(c: GRat, k: usize) -> Self {
        if c.is_zero() {
            return UPoly::zero();
        }
        let mut v = vec![GRat::zero(); k + 1];
        v[k] = c;
        UPoly { c: v }
    }

    pub fn coeffs(&self) -> &[GRat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&GRat> {
        self.c.last()
    }

    pub fn coeff(&self, k: usize) -> GRat {
        self.c.get(k).cloned().unwrap_or_default()
    }

    pub fn as_constant(&self) -> Option<GRat> {
        match self.c.len() {
            0 => Some(GRat::zero()),
            1 => Some(self.c[0].clone()),
            _ => None,
        }
    }

    /// Lowest index with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    /// Single nonzero coefficient.
    pub fn is_monomial(&self) -> bool {
        self.c.iter().filter(|x| !x.is_zero()).count() == 1
    }

    pub fn term_count(&self) -> usize {
        self.c.iter().map(|x| (!x.re.cmp0().is_eq()) as usize + (!x.im.cmp0().is_eq()) as usize).sum()
    }

    pub fn nonzero_terms(&self) -> impl Iterator<Item = (usize, &GRat)> {
        self.c.iter().enumerate().filter(|(_, x)| !x.is_zero())
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(match (self.c.get(k), o.c.get(k)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        UPoly::from_coeffs(v)
    }

    pub fn neg(&self) -> UPoly {
        UPoly { c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        if self.c.len() == 1 {
            return o.scale(&self.c[0]);
        }
        if o.c.len() == 1 {
            return self.scale(&o.c[0]);
        }
        let mut v = vec![GRat::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        UPoly::from_coeffs(v)
    }

    pub fn scale(&self, s: &GRat) -> UPoly {
        if s.is_zero() {
            return UPoly::zero();
        }
        UPoly { c: self.c.iter().map(|x| x * s).collect() }
    }

    /// Multiply by `u^k`.
    pub fn shift_up(&self, k: usize) -> UPoly {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut v = vec![GRat::zero(); k];
        v.extend(self.c.iter().cloned());
        UPoly { c: v }
    }

    /// Divide by `u^k`; the caller guarantees divisibility.
    pub fn shift_down(&self, k: usize) -> UPoly {
        debug_assert!(self.valuation().map_or(true, |v| v >= k));
        UPoly::from_coeffs(self.c.iter().skip(k).cloned().collect())
    }

    /// Returns `(lead, self / lead)`.
    pub fn make_monic(&self) -> (GRat, UPoly) {
        match self.lead() {
            None => (GRat::one(), UPoly::zero()),
            Some(l) if l.is_one() => (GRat::one(), self.clone()),
            Some(l) => {
                let inv = l.inv().expect("nonzero lead");
                (l.clone(), self.scale(&inv))
            }
        }
    }

    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let Some(sd) = self.degree() else {
            return (UPoly::zero(), UPoly::zero());
        };
        if sd < dd {
            return (UPoly::zero(), self.clone());
        }
        let linv = d.lead().unwrap().inv().unwrap();
        let mut r = self.c.clone();
        let mut q = vec![GRat::zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let t = &r[k + dd] * &linv;
            if t.is_zero() {
                continue;
            }
            for (j, dj) in d.c.iter().enumerate() {
                if !dj.is_zero() {
                    r[k + j] = &r[k + j] - &(&t * dj);
                }
            }
            q[k] = t;
        }
        r.truncate(dd);
        (UPoly::from_coeffs(q), UPoly::from_coeffs(r))
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(a: &UPoly, b: &UPoly) -> UPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.divrem(&y);
            x = y;
            y = r.make_monic().1;
        }
        x.make_monic().1
    }

    pub fn eval(&self, x: &GRat) -> GRat {
        let mut acc = GRat::zero();
        for c in self.c.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// Substitute `u ↦ u^m`.
    pub fn stretch(&self, m: usize) -> UPoly {
        if m == 1 || self.c.len() <= 1 {
            return self.clone();
        }
        let mut v = vec![GRat::zero(); (self.c.len() - 1) * m + 1];
        for (k, x) in self.c.iter().enumerate() {
            v[k * m] = x.clone();
        }
        UPoly { c: v }
    }

    /// Inverse of [`UPoly::stretch`] when every exponent is a multiple of `m`.
    pub fn compress(&self, m: usize) -> Option<UPoly> {
        if m == 1 {
            return Some(self.clone());
        }
        if self.nonzero_terms().any(|(k, _)| k % m != 0) {
            return None;
        }
        Some(UPoly::from_coeffs(self.c.iter().step_by(m).cloned().collect()))
    }

    /// Least common multiple of all coefficient denominators (real and
    /// imaginary parts).
    pub fn denominator_lcm(&self) -> Integer {
        let mut l = Integer::from(1);
        for x in &self.c {
            l.lcm_mut(x.re.denom());
            l.lcm_mut(x.im.denom());
        }
        l
    }

    /// Gcd of the integer parts after clearing denominators, as a rational
    /// content `g / l` such that `self / content` has coprime integer parts.
    pub fn rational_content(&self) -> Rational {
        let l = self.denominator_lcm();
        let mut g = Integer::new();
        for x in &self.c {
            for part in [&x.re, &x.im] {
                let v = Integer::from(part.numer() * Integer::from(&l / part.denom()));
                g.gcd_mut(&v);
            }
        }
        if g == 0 {
            return Rational::from(1);
        }
        Rational::from((g, l))
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, x)| x.scale(&Rational::from(k as i64)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> UPoly {
        UPoly::from_coeffs(v.iter().map(|&x| GRat::from_int(x)).collect())
    }

    #[test]
    fn product_of_u2_plus_minus_one() {
        assert_eq!(p(&[1, 0, 1]).mul(&p(&[-1, 0, 1])), p(&[-1, 0, 0, 0, 1]));
    }

    #[test]
    fn gcd_and_division() {
        let a = p(&[-1, 0, 1]).mul(&p(&[2, 1]));
        let b = p(&[1, 1]).mul(&p(&[5, 0, 1]));
        assert_eq!(UPoly::gcd(&a, &b), p(&[1, 1]));
        let (q, r) = a.divrem(&p(&[2, 1]));
        assert!(r.is_zero());
        assert_eq!(q, p(&[-1, 0, 1]));
    }

    #[test]
    fn stretch_compress_roundtrip() {
        let a = p(&[3, 1, 0, 2]);
        assert_eq!(a.stretch(3).compress(3).unwrap(), a);
        assert!(a.compress(2).is_none());
    }
}
