//! Sparse polynomials `P(z, Y_{-k}, …, Y_k)` encoding `P f = 0`, where
//! `Y_j` stands for `f(q^j z)`.

use crate::scalar::json::{field_json, is_single_term, render_scalar, scalar_json};
use crate::scalar::{FieldDescriptor, FieldError, GRat, RatFunc, Scalar, UPoly};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QPolyError {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("{0} is not a root of the constant equation")]
    NotARoot(String),
    #[error("not deflatable: monomials with z-degree not divisible by {m}: {offending:?}")]
    NotDeflatable { m: u32, offending: Vec<MonomialKey> },
    #[error("scaling factors must be nonzero")]
    ZeroScale,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `z^a · Y_{α₁} ⋯ Y_{α_ℓ}` with `α₁ ≤ … ≤ α_ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialKey {
    pub a: u32,
    pub shifts: Vec<i32>,
}

impl MonomialKey {
    pub fn new(a: u32, mut shifts: Vec<i32>) -> Self {
        shifts.sort_unstable();
        MonomialKey { a, shifts }
    }

    pub fn pure(a: u32) -> Self {
        MonomialKey { a, shifts: Vec::new() }
    }

    pub fn ell(&self) -> usize {
        self.shifts.len()
    }

    pub fn top(&self) -> Option<i32> {
        self.shifts.last().copied()
    }

    pub fn is_pure(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn mul(&self, o: &MonomialKey) -> MonomialKey {
        let mut s = self.shifts.clone();
        s.extend_from_slice(&o.shifts);
        MonomialKey::new(self.a + o.a, s)
    }

    /// `(a; α₁,…,α_ℓ)`.
    pub fn tuple_text(&self) -> String {
        let s: Vec<String> = self.shifts.iter().map(|x| x.to_string()).collect();
        format!("({};{})", self.a, s.join(","))
    }
}

impl Ord for MonomialKey {
    fn cmp(&self, o: &Self) -> Ordering {
        self.a
            .cmp(&o.a)
            .then_with(|| self.shifts.is_empty().cmp(&o.shifts.is_empty()))
            .then_with(|| self.shifts.cmp(&o.shifts))
    }
}

impl PartialOrd for MonomialKey {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Orders removed by [`QPolynomial::remove_trivial_factors`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RemovedOrders {
    pub z: u32,
    pub y: BTreeMap<i32, u32>,
}

impl RemovedOrders {
    pub fn is_trivial(&self) -> bool {
        self.z == 0 && self.y.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdersDegrees {
    pub ord_z: u32,
    pub ord_y: BTreeMap<i32, u32>,
    /// Total Y-degree of `P(0, Y)` (0 when `P(0, Y)` is constant).
    pub deg_at_zero: usize,
    pub total_degree: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QPolynomial {
    terms: BTreeMap<MonomialKey, Scalar>,
    field: FieldDescriptor,
}

/// Output formats of [`QPolynomial::render`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Canonical,
    Json,
}

impl QPolynomial {
    pub fn zero(field: FieldDescriptor) -> Self {
        QPolynomial { terms: BTreeMap::new(), field }
    }

    pub fn constant(c: Scalar, field: FieldDescriptor) -> Self {
        let mut p = QPolynomial::zero(field);
        p.add_term(MonomialKey::pure(0), c);
        p
    }

    pub fn monomial(key: MonomialKey, c: Scalar, field: FieldDescriptor) -> Self {
        let mut p = QPolynomial::zero(field);
        p.add_term(key, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (MonomialKey, Scalar)>, field: FieldDescriptor) -> Self {
        let mut p = QPolynomial::zero(field);
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn with_field(mut self, field: FieldDescriptor) -> Self {
        self.field = field;
        self
    }

    pub fn terms(&self) -> &BTreeMap<MonomialKey, Scalar> {
        &self.terms
    }

    pub fn coeff(&self, k: &MonomialKey) -> Scalar {
        self.terms.get(k).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merge `c` into the coefficient of `k`, dropping zeros.
    pub fn add_term(&mut self, k: MonomialKey, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&k);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    /// Smallest `k` with every `|α| ≤ k`.
    pub fn index_window(&self) -> i32 {
        self.terms.keys().flat_map(|k| k.shifts.iter()).map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &QPolynomial) -> QPolynomial {
        let mut p = self.clone();
        for (k, c) in &o.terms {
            p.add_term(k.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> QPolynomial {
        QPolynomial { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(), field: self.field.clone() }
    }

    pub fn sub(&self, o: &QPolynomial) -> QPolynomial {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &QPolynomial) -> QPolynomial {
        let mut p = QPolynomial::zero(self.field.clone());
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                p.add_term(k1.mul(k2), c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, e: u32) -> QPolynomial {
        let mut acc = QPolynomial::constant(Scalar::one(), self.field.clone());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale_coeffs(&self, s: &Scalar) -> QPolynomial {
        QPolynomial::from_terms(self.terms.iter().map(|(k, c)| (k.clone(), c * s)), self.field.clone())
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar, field: FieldDescriptor) -> QPolynomial {
        QPolynomial::from_terms(self.terms.iter().map(|(k, c)| (k.clone(), f(c))), field)
    }

    /// Divide out `z^{ord_z}` and every `Y_j^{ord_{Y_j}}`.
    pub fn remove_trivial_factors(&self) -> Result<(QPolynomial, RemovedOrders), QPolyError> {
        if self.is_zero() {
            return Err(QPolyError::ZeroPolynomial);
        }
        let od = self.orders_degrees()?;
        let removed = RemovedOrders { z: od.ord_z, y: od.ord_y.clone() };
        if removed.is_trivial() {
            return Ok((self.clone(), removed));
        }
        let terms = self.terms.iter().map(|(k, c)| {
            let mut shifts = Vec::with_capacity(k.shifts.len());
            let mut left = removed.y.clone();
            for &s in &k.shifts {
                match left.get_mut(&s) {
                    Some(n) if *n > 0 => *n -= 1,
                    _ => shifts.push(s),
                }
            }
            (MonomialKey { a: k.a - removed.z, shifts }, c.clone())
        });
        Ok((QPolynomial::from_terms(terms, self.field.clone()), removed))
    }

    /// `P(0, c, …, c)` as coefficients of `c^0, c^1, …`.
    pub fn constant_equation(&self) -> Vec<Scalar> {
        let deg = self.terms.keys().filter(|k| k.a == 0).map(|k| k.ell()).max().unwrap_or(0);
        let mut v = vec![Scalar::zero(); deg + 1];
        for (k, c) in self.terms.iter().filter(|(k, _)| k.a == 0) {
            v[k.ell()] = &v[k.ell()] + c;
        }
        while v.len() > 1 && v.last().unwrap().is_zero() {
            v.pop();
        }
        v
    }

    pub fn eval_constant_equation(&self, c: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for x in self.constant_equation().iter().rev() {
            acc = &(&acc * c) + x;
        }
        acc
    }

    /// `P(z, f₀ + z q^{j} Y_j, …)` with the common power of `z` removed;
    /// solutions correspond through `f = f₀ + z g`.
    pub fn substitute_reduction(&self, f0: &Scalar) -> Result<QPolynomial, QPolyError> {
        if self.is_zero() {
            return Err(QPolyError::ZeroPolynomial);
        }
        if !self.eval_constant_equation(f0).is_zero() {
            return Err(QPolyError::NotARoot(render_scalar(f0, &self.field)));
        }
        let mut out = QPolynomial::zero(self.field.clone());
        let mut qp: BTreeMap<i32, Scalar> = BTreeMap::new();
        for (k, c) in &self.terms {
            // expand Π (f₀ + z q^{α} Y_α) over the shifts
            let mut partial: Vec<(u32, Vec<i32>, Scalar)> = vec![(0, Vec::new(), c.clone())];
            for &al in &k.shifts {
                let w = qp.entry(al).or_insert_with(|| self.field.q_pow(al as i64)).clone();
                let mut next = Vec::with_capacity(partial.len() * 2);
                for (dz, ys, cc) in partial {
                    if !f0.is_zero() {
                        next.push((dz, ys.clone(), &cc * f0));
                    }
                    let mut y2 = ys;
                    y2.push(al);
                    next.push((dz + 1, y2, &cc * &w));
                }
                partial = next;
            }
            for (dz, ys, cc) in partial {
                out.add_term(MonomialKey::new(k.a + dz, ys), cc);
            }
        }
        if out.is_zero() {
            return Err(QPolyError::ZeroPolynomial);
        }
        let lz = out.terms.keys().map(|k| k.a).min().unwrap();
        Ok(out.shift_z_down(lz))
    }

    fn shift_z_down(&self, lz: u32) -> QPolynomial {
        if lz == 0 {
            return self.clone();
        }
        QPolynomial {
            terms: self.terms.iter().map(|(k, c)| (MonomialKey { a: k.a - lz, shifts: k.shifts.clone() }, c.clone())).collect(),
            field: self.field.clone(),
        }
    }

    /// `α ↦ α + n` for every shift; solutions correspond via
    /// `g(w) = f(q^{-n} w)`.
    pub fn shift_indices(&self, n: i32) -> QPolynomial {
        if n == 0 {
            return self.clone();
        }
        QPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (MonomialKey { a: k.a, shifts: k.shifts.iter().map(|s| s + n).collect() }, c.clone()))
                .collect(),
            field: self.field.clone(),
        }
    }

    /// Root-order bookkeeping for [`QPolynomial::ramify`]: the new root order
    /// and the stretch applied to `u`.
    pub fn ramified_field(fd: &FieldDescriptor, m: u32) -> (u32, u32) {
        let g = gcd_u32(m, fd.root_order);
        (fd.root_order / g, m / g)
    }

    /// `z ↦ z^m`, new base `q^{1/m}`; solutions correspond via `g(z) = f(z^m)`.
    pub fn ramify(&self, m: u32) -> Result<QPolynomial, QPolyError> {
        assert!(m >= 1);
        if m == 1 {
            return Ok(self.clone());
        }
        let (d_new, stretch) = Self::ramified_field(&self.field, m);
        if self.field.u_value.is_some() {
            if stretch != 1 {
                return Err(FieldError::NotRepresentable("ramify on a specialised field needs m | D".into()).into());
            }
            let field = FieldDescriptor { root_order: d_new, ..self.field.clone() };
            let terms = self.terms.iter().map(|(k, c)| (MonomialKey { a: k.a * m, shifts: k.shifts.clone() }, c.clone()));
            return Ok(QPolynomial::from_terms(terms, field));
        }
        let ext = self.field.ext.as_ref().map(|e| std::sync::Arc::new(crate::scalar::Extension { d: e.d.stretch(stretch as usize) }));
        let field = FieldDescriptor { root_order: d_new, ext: ext.clone(), u_value: None };
        let terms = self.terms.iter().map(|(k, c)| {
            (MonomialKey { a: k.a * m, shifts: k.shifts.clone() }, c.stretch(stretch as usize, ext.as_ref()))
        });
        Ok(QPolynomial::from_terms(terms, field))
    }

    /// `z^m ↦ z`, new base `q^m`; solutions correspond via `g(z) = h(z^m)`.
    pub fn deflate(&self, m: u32) -> Result<QPolynomial, QPolyError> {
        assert!(m >= 1);
        if m == 1 {
            return Ok(self.clone());
        }
        let offending: Vec<MonomialKey> = self.terms.keys().filter(|k| k.a % m != 0).cloned().collect();
        if !offending.is_empty() {
            return Err(QPolyError::NotDeflatable { m, offending });
        }
        let mut field = self.field.clone();
        field.root_order *= m;
        let terms = self.terms.iter().map(|(k, c)| (MonomialKey { a: k.a / m, shifts: k.shifts.clone() }, c.clone()));
        Ok(QPolynomial::from_terms(terms, field))
    }

    /// Coefficient of `(a; α₁..α_ℓ)` multiplied by `c^a λ^ℓ`; solutions
    /// correspond via `f(c z) = λ g(z)`.
    pub fn scale(&self, c: &Scalar, lambda: &Scalar) -> Result<QPolynomial, QPolyError> {
        if c.is_zero() || lambda.is_zero() {
            return Err(QPolyError::ZeroScale);
        }
        let mut out = QPolynomial::zero(self.field.clone());
        for (k, v) in &self.terms {
            let w = &c.pow(k.a as i64)? * &lambda.pow(k.ell() as i64)?;
            out.add_term(k.clone(), v * &w);
        }
        Ok(out)
    }

    pub fn orders_degrees(&self) -> Result<OrdersDegrees, QPolyError> {
        if self.is_zero() {
            return Err(QPolyError::ZeroPolynomial);
        }
        let ord_z = self.terms.keys().map(|k| k.a).min().unwrap();
        let mut idx: Vec<i32> = self.terms.keys().flat_map(|k| k.shifts.iter().copied()).collect();
        idx.sort_unstable();
        idx.dedup();
        let mut ord_y = BTreeMap::new();
        for j in idx {
            let o = self.terms.keys().map(|k| k.shifts.iter().filter(|&&s| s == j).count()).min().unwrap() as u32;
            if o > 0 {
                ord_y.insert(j, o);
            }
        }
        let deg_at_zero = self.terms.keys().filter(|k| k.a == 0).map(|k| k.ell()).max().unwrap_or(0);
        let total_degree = self.terms.keys().map(|k| k.ell()).max().unwrap_or(0);
        Ok(OrdersDegrees { ord_z, ord_y, deg_at_zero, total_degree })
    }

    /// Number of monomials in `z, Y, u, ρ` once all coefficients are brought
    /// over a common denominator (real and imaginary parts counted apart).
    pub fn expanded_term_count(&self) -> usize {
        self.expanded_term_count_where(|_| true)
    }

    /// [`Self::expanded_term_count`] restricted to the keys accepted by
    /// `keep`, with the denominator common to the whole polynomial.
    pub fn expanded_term_count_where(&self, keep: impl Fn(&MonomialKey) -> bool) -> usize {
        let mut l = UPoly::one();
        for c in self.terms.values() {
            for r in [c.rational_part(), c.rho_part()] {
                if !r.is_zero() {
                    let g = UPoly::gcd(&l, r.den());
                    l = l.mul(&r.den().divrem(&g).0);
                }
            }
        }
        let mut n = 0;
        for (k, c) in &self.terms {
            if !keep(k) {
                continue;
            }
            for r in [c.rational_part(), c.rho_part()] {
                if !r.is_zero() {
                    n += r.num().mul(&l.divrem(r.den()).0).term_count();
                }
            }
        }
        n
    }

    /// Substitute a fixed value for `u`, including the extension datum.
    pub fn specialize(&self, u_value: &GRat) -> Result<QPolynomial, QPolyError> {
        if self.field.u_value.is_some() {
            return Ok(self.clone());
        }
        let ext = match &self.field.ext {
            Some(e) => {
                let d = e.d.eval(u_value).ok_or(FieldError::PoleError)?;
                if d.is_zero() {
                    return Err(FieldError::DivisionByZero.into());
                }
                Some(std::sync::Arc::new(crate::scalar::Extension { d: RatFunc::constant(d) }))
            }
            None => None,
        };
        let field = FieldDescriptor { root_order: self.field.root_order, ext: ext.clone(), u_value: Some(u_value.clone()) };
        let mut out = QPolynomial::zero(field);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.specialize(u_value, ext.as_ref())?);
        }
        Ok(out)
    }

    /// The polynomial part `P(z)` (pure-z monomials) as `(degree, coefficient)`.
    pub fn pure_part(&self) -> Vec<(u32, Scalar)> {
        self.terms.iter().filter(|(k, _)| k.is_pure()).map(|(k, c)| (k.a, c.clone())).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": field_json(&self.field),
            "terms": self.terms.iter().map(|(k, c)| json!({
                "a": k.a,
                "shifts": k.shifts,
                "coeff": scalar_json(c),
            })).collect::<Vec<_>>(),
        })
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_json()).expect("serializable");
        let h = Sha256::digest(&bytes);
        h.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json().to_string(),
            Format::Canonical => self.render_with(|j| fapp_text(j), |j, e| pow_text(&fapp_text(j), e)),
            Format::Human => self.render_with(|j| format!("Y{j}"), |j, e| pow_text(&format!("Y{j}"), e)),
        }
    }

    fn render_with(&self, _single: impl Fn(i32) -> String, factor: impl Fn(i32, usize) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            let mut parts: Vec<String> = Vec::new();
            if k.a == 1 {
                parts.push("z".into());
            } else if k.a > 1 {
                parts.push(format!("z^{}", k.a));
            }
            let mut i = 0;
            while i < k.shifts.len() {
                let j = k.shifts[i];
                let e = k.shifts[i..].iter().take_while(|&&s| s == j).count();
                parts.push(factor(j, e));
                i += e;
            }
            let ctext = render_scalar(c, &self.field);
            let (neg, body) = if is_single_term(c) {
                match ctext.strip_prefix('-') {
                    Some(rest) => (true, rest.to_string()),
                    None => (false, ctext),
                }
            } else {
                (false, format!("({ctext})"))
            };
            let mut term = String::new();
            if parts.is_empty() {
                term.push_str(&body);
            } else {
                if body != "1" {
                    term.push_str(&body);
                    term.push('*');
                }
                term.push_str(&parts.join("*"));
            }
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&term);
        }
        out
    }
}

fn fapp_text(j: i32) -> String {
    match j {
        0 => "f(z)".into(),
        1 => "f(q*z)".into(),
        _ => format!("f(q^{j}*z)"),
    }
}

fn pow_text(base: &str, e: usize) -> String {
    if e == 1 {
        base.to_string()
    } else {
        format!("{base}^{e}")
    }
}

fn gcd_u32(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl fmt::Display for QPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Format::Canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd() -> FieldDescriptor {
        FieldDescriptor::new(2)
    }

    fn key(a: u32, s: &[i32]) -> MonomialKey {
        MonomialKey::new(a, s.to_vec())
    }

    #[test]
    fn trivial_factor_removal() {
        let p = QPolynomial::from_terms(
            [(key(3, &[0]), Scalar::one()), (key(4, &[0, 0]), Scalar::one())],
            fd(),
        );
        let (r, rem) = p.remove_trivial_factors().unwrap();
        assert_eq!(rem.z, 3);
        assert_eq!(rem.y.get(&0), Some(&1));
        assert_eq!(r.terms().len(), 2);
        assert!(r.terms().contains_key(&key(0, &[])));
        assert!(r.terms().contains_key(&key(1, &[0])));
        let (same, rem) = r.remove_trivial_factors().unwrap();
        assert!(rem.is_trivial());
        assert_eq!(same, r);
    }

    #[test]
    fn shift_roundtrip_and_deflate_guard() {
        let p = QPolynomial::from_terms([(key(0, &[0]), Scalar::one()), (key(3, &[1, 2]), Scalar::from_int(2))], fd());
        assert_eq!(p.shift_indices(4).shift_indices(-4), p);
        assert_eq!(p.deflate(3).unwrap().ramify(3).unwrap(), p);
        assert!(matches!(p.deflate(2), Err(QPolyError::NotDeflatable { .. })));
    }

    #[test]
    fn canonical_rendering() {
        let f = fd();
        let p = QPolynomial::from_terms(
            [
                (key(0, &[0]), Scalar::one()),
                (key(1, &[0]), f.q_pow(1)),
                (key(1, &[]), Scalar::from_int(-1)),
                (key(2, &[]), -f.q_pow(1)),
            ],
            f,
        );
        assert_eq!(p.render(Format::Canonical), "f(z) + q*z*f(z) - z - q*z^2");
        assert_eq!(QPolynomial::zero(fd()).render(Format::Canonical), "0");
    }
}
