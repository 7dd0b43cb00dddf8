//! q-factor combinatorics: `Q₀`/`Q₊`, α-bounds, heights, crest, co-height,
//! crest polynomial, existence condition, classification, sign condition.

use crate::qpoly::{MonomialKey, QPolyError, QPolynomial};
use crate::scalar::json::{render_scalar, scalar_json};
use crate::scalar::{FieldDescriptor, NumericField, Scalar};
use rug::{Float, Rational};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StructureError {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("no shifting q-factors")]
    EmptyShiftingSet,
    #[error("alpha(Q0) = {0}, expected 0; shift indices first")]
    NotNormalized(i32),
    #[error("equation is not reduced")]
    NotReduced,
    #[error("existence condition fails at n = {0}")]
    ExistenceFails(u64),
    #[error("no nonshifting q-factors")]
    NoNonShifting,
    #[error(transparent)]
    QPoly(#[from] QPolyError),
    #[error(transparent)]
    Field(#[from] crate::scalar::FieldError),
}

/// `r_A · z^a Y_{α₁} ⋯ Y_{α_ℓ}` with `ℓ ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QFactor {
    pub key: MonomialKey,
    pub r: Scalar,
}

impl QFactor {
    pub fn a(&self) -> u32 {
        self.key.a
    }

    pub fn top(&self) -> i32 {
        self.key.top().expect("q-factor has at least one shift")
    }

    pub fn is_shifting(&self) -> bool {
        self.key.a > 0
    }

    pub fn height(&self) -> Rational {
        Rational::from((self.top(), 2 * self.key.a as i32))
    }

    /// Number of entries equal to the largest shift.
    pub fn scope(&self) -> usize {
        let t = self.top();
        self.key.shifts.iter().filter(|&&s| s == t).count()
    }
}

/// `P(z) = Σ P_i z^i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolyPart {
    pub coeffs: Vec<Scalar>,
}

impl PolyPart {
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }
}

pub fn extract(p: &QPolynomial) -> Result<(Vec<QFactor>, PolyPart), StructureError> {
    if p.is_zero() {
        return Err(StructureError::ZeroPolynomial);
    }
    let mut q = Vec::new();
    let mut poly = PolyPart::default();
    for (k, c) in p.terms() {
        if k.is_pure() {
            let i = k.a as usize;
            if poly.coeffs.len() <= i {
                poly.coeffs.resize(i + 1, Scalar::zero());
            }
            poly.coeffs[i] = c.clone();
        } else {
            q.push(QFactor { key: k.clone(), r: c.clone() });
        }
    }
    Ok((q, poly))
}

/// `(α(Q₀), α(Q₊))`, `None` standing for `-∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlphaBounds {
    pub q0: Option<i32>,
    pub qplus: Option<i32>,
}

pub fn alpha_bounds(q: &[QFactor]) -> AlphaBounds {
    let q0 = q.iter().filter(|f| !f.is_shifting()).map(|f| f.top()).max();
    let qplus = q.iter().filter(|f| f.is_shifting()).map(|f| f.top()).max();
    AlphaBounds { q0, qplus }
}

/// Every nonshifting factor is linear and there is at least one.
pub fn is_reduced(p: &QPolynomial) -> bool {
    let mut any = false;
    for k in p.terms().keys().filter(|k| k.a == 0 && !k.is_pure()) {
        if k.ell() != 1 {
            return false;
        }
        any = true;
    }
    any
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeightProfile {
    /// `H(A)` for every shifting factor, in key order.
    pub heights: Vec<(MonomialKey, Rational)>,
    /// Per top-index heights `H_i`.
    pub per_index: BTreeMap<i32, Rational>,
    pub height: Rational,
    pub crest: Vec<MonomialKey>,
    pub co_height: u32,
    pub scopes: Vec<(MonomialKey, usize)>,
}

fn check_normalized(q: &[QFactor]) -> Result<(), StructureError> {
    if !q.iter().any(|f| f.is_shifting()) {
        return Err(StructureError::EmptyShiftingSet);
    }
    match alpha_bounds(q).q0 {
        Some(0) => Ok(()),
        Some(a) => Err(StructureError::NotNormalized(a)),
        None => Err(StructureError::NoNonShifting),
    }
}

/// Heights computed factor by factor.
pub fn height_profile(q: &[QFactor]) -> Result<HeightProfile, StructureError> {
    check_normalized(q)?;
    let heights: Vec<(MonomialKey, Rational)> =
        q.iter().filter(|f| f.is_shifting()).map(|f| (f.key.clone(), f.height())).collect();
    let height = heights.iter().map(|(_, h)| h.clone()).max().unwrap();
    let mut per_index: BTreeMap<i32, Rational> = BTreeMap::new();
    for f in q.iter().filter(|f| f.is_shifting()) {
        let e = per_index.entry(f.top()).or_insert_with(|| f.height());
        if f.height() > *e {
            *e = f.height();
        }
    }
    Ok(finish_profile(q, heights, per_index, height))
}

/// Heights through the per-index polynomials `R_i(z) = Σ_{α_ℓ = i} r_A z^a`:
/// `H_i = i / (2 ord_z R_i)` for `i ≥ 0` and `i / (2 deg_z R_i)` for `i < 0`.
pub fn height_profile_by_index(q: &[QFactor]) -> Result<HeightProfile, StructureError> {
    check_normalized(q)?;
    let mut r_i: BTreeMap<i32, BTreeMap<u32, Scalar>> = BTreeMap::new();
    for f in q.iter().filter(|f| f.is_shifting()) {
        let e = r_i.entry(f.top()).or_default().entry(f.a()).or_default();
        *e = &*e + &f.r;
    }
    let mut per_index = BTreeMap::new();
    for (i, poly) in &r_i {
        let degs: Vec<u32> = poly.iter().filter(|(_, c)| !c.is_zero()).map(|(a, _)| *a).collect();
        let a = if *i >= 0 { degs.iter().min() } else { degs.iter().max() };
        if let Some(&a) = a {
            per_index.insert(*i, Rational::from((*i, 2 * a as i32)));
        }
    }
    let height = per_index.values().max().cloned().ok_or(StructureError::EmptyShiftingSet)?;
    let heights = q.iter().filter(|f| f.is_shifting()).map(|f| (f.key.clone(), f.height())).collect();
    Ok(finish_profile(q, heights, per_index, height))
}

fn finish_profile(
    q: &[QFactor],
    heights: Vec<(MonomialKey, Rational)>,
    per_index: BTreeMap<i32, Rational>,
    height: Rational,
) -> HeightProfile {
    let on_crest = |f: &QFactor| Rational::from(&height * (2 * f.a() as i64)) == f.top();
    let crest: Vec<MonomialKey> = q.iter().filter(|f| on_crest(f)).map(|f| f.key.clone()).collect();
    let co_height = q.iter().filter(|f| f.is_shifting() && on_crest(f)).map(|f| f.a()).min().unwrap();
    let scopes = q.iter().filter(|f| on_crest(f)).map(|f| (f.key.clone(), f.scope())).collect();
    HeightProfile { heights, per_index, height, crest, co_height, scopes }
}

/// Coefficient `c · q^e` of `z^a t^k` in the crest polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct CrestTerm {
    pub a: u32,
    pub t_power: u32,
    pub coeff: Scalar,
    /// Residual exponent of `q` not representable in the field (0 when folded).
    pub q_exp: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrestPolynomial {
    pub terms: Vec<CrestTerm>,
}

impl CrestPolynomial {
    /// `C(0, t)`.
    pub fn constant_term(&self) -> Scalar {
        self.terms.iter().filter(|t| t.a == 0).fold(Scalar::zero(), |acc, t| &acc + &t.coeff)
    }

    /// Degree in `z`; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.a).max()
    }

    /// No term of positive z-degree: the root sits at infinity.
    pub fn root_at_infinity(&self) -> bool {
        self.terms.iter().all(|t| t.a == 0) && !self.constant_term().is_zero()
    }

    /// `C(z, t₀)` as exact coefficients in `z` when every `q_exp` vanishes.
    pub fn at_t(&self, t0: &Scalar) -> Option<Vec<Scalar>> {
        let deg = self.degree()? as usize;
        let mut v = vec![Scalar::zero(); deg + 1];
        for t in &self.terms {
            if t.q_exp.cmp0().is_ne() {
                return None;
            }
            let w = &t.coeff * &t0.pow(t.t_power as i64).ok()?;
            v[t.a as usize] = &v[t.a as usize] + &w;
        }
        Some(v)
    }

    /// `C(z, t₀)` numerically.
    pub fn at_t_numeric(&self, t0: &Scalar, nf: &NumericField) -> Result<Vec<crate::scalar::Complex>, StructureError> {
        let deg = self.degree().unwrap_or(0) as usize;
        let mut v = vec![nf.zero(); deg + 1];
        let t0n = nf.eval(t0)?;
        for t in &self.terms {
            let c = nf.eval(&t.coeff)?.mul(&nf.q_pow_rational(&t.q_exp)).mul(&t0n.powi(t.t_power as i64).unwrap());
            v[t.a as usize] = v[t.a as usize].add(&c);
        }
        Ok(v)
    }

    pub fn render(&self, fd: &FieldDescriptor) -> String {
        let mut parts = Vec::new();
        for t in &self.terms {
            let mut s = format!("({})", render_scalar(&t.coeff, fd));
            if t.q_exp.cmp0().is_ne() {
                s.push_str(&format!("*q^({})", t.q_exp));
            }
            if t.a > 0 {
                s.push_str(&format!("*z^{}", t.a));
            }
            if t.t_power > 0 {
                s.push_str(&format!("*t^{}", t.t_power));
            }
            parts.push(s);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn to_json(&self, fd: &FieldDescriptor) -> Value {
        json!({
            "text": self.render(fd),
            "terms": self.terms.iter().map(|t| json!({
                "a": t.a, "t": t.t_power, "coeff": scalar_json(&t.coeff),
                "q_exp": {"num": t.q_exp.numer().to_string(), "den": t.q_exp.denom().to_string()},
            })).collect::<Vec<_>>(),
        })
    }
}

fn crest_weight(fd: &FieldDescriptor, h_q: &Rational, a: u32, h: u32) -> (Scalar, Rational) {
    let e = -Rational::from(h_q * Rational::from(a as i64 * (a as i64 - h as i64)));
    match fd.q_pow_rational(&e) {
        Some(s) => (s, Rational::new()),
        None => (Scalar::one(), e),
    }
}

fn push_crest(map: &mut BTreeMap<(u32, u32), (Scalar, Rational)>, a: u32, t: u32, c: Scalar, e: Rational) {
    let entry = map.entry((a, t)).or_insert_with(|| (Scalar::zero(), e));
    entry.0 = &entry.0 + &c;
}

fn finish_crest(map: BTreeMap<(u32, u32), (Scalar, Rational)>) -> CrestPolynomial {
    CrestPolynomial {
        terms: map
            .into_iter()
            .filter(|(_, (c, _))| !c.is_zero())
            .map(|((a, t_power), (coeff, q_exp))| CrestTerm { a, t_power, coeff, q_exp })
            .collect(),
    }
}

/// `Σ_{A ∈ crest} r_A s(A) q^{-H a(a-h)} z^a t^{ℓ-1}`.
pub fn crest_polynomial(p: &QPolynomial) -> Result<(HeightProfile, CrestPolynomial), StructureError> {
    if !is_reduced(p) {
        return Err(StructureError::NotReduced);
    }
    let (q, _) = extract(p)?;
    let prof = height_profile(&q)?;
    let mut map = BTreeMap::new();
    for f in q.iter().filter(|f| prof.crest.contains(&f.key)) {
        let (w, e) = crest_weight(p.field(), &prof.height, f.a(), prof.co_height);
        let c = &(&f.r * &Scalar::from_int(f.scope() as i64)) * &w;
        push_crest(&mut map, f.a(), f.key.ell() as u32 - 1, c, e);
    }
    Ok((prof, finish_crest(map)))
}

/// Same polynomial obtained by differentiating with respect to the top shift
/// variable and then setting every `Y_j = t`, on the monomials whose top
/// index equals `2aH`.
pub fn crest_polynomial_by_derivative(p: &QPolynomial) -> Result<CrestPolynomial, StructureError> {
    if !is_reduced(p) {
        return Err(StructureError::NotReduced);
    }
    let (q, _) = extract(p)?;
    let prof = height_profile_by_index(&q)?;
    let mut map = BTreeMap::new();
    for (k, c) in p.terms() {
        let Some(top) = k.top() else { continue };
        if Rational::from(&prof.height * (2 * k.a as i64)) != top {
            continue;
        }
        // ∂/∂Y_top of Y_{α₁}…Y_{α_ℓ} at Y = t
        let mult = k.shifts.iter().filter(|&&s| s == top).count() as i64;
        let (w, e) = crest_weight(p.field(), &prof.height, k.a, prof.co_height);
        push_crest(&mut map, k.a, (k.ell() - 1) as u32, &(c * &Scalar::from_int(mult)) * &w, e);
    }
    Ok(finish_crest(map))
}

/// Outcome of the existence condition `Σ_{A∈Q₀} r_A q^{α₁ n} ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExistenceCertificate {
    pub holds: bool,
    pub failing_n: Option<u64>,
    /// Beyond this index nonvanishing follows from the tail bound.
    pub tail_bound: Option<u64>,
    /// True when only `n ≤ n_max` could be checked.
    pub inconclusive: bool,
    /// `(r_A, α₁)` for the nonshifting factors.
    pub terms: Vec<(Scalar, i32)>,
    /// `"generic"` (symbolic q) or `"value"` (q fixed).
    pub mode: &'static str,
}

/// `E(n) = Σ r_A q^{α₁ n}` exactly.
pub fn existence_value(terms: &[(Scalar, i32)], fd: &FieldDescriptor, n: i64) -> Scalar {
    terms.iter().fold(Scalar::zero(), |acc, (r, al)| &acc + &(r * &fd.q_pow(*al as i64 * n)))
}

fn nonshifting_terms(p: &QPolynomial) -> Result<Vec<(Scalar, i32)>, StructureError> {
    if !is_reduced(p) {
        return Err(StructureError::NotReduced);
    }
    let (q, _) = extract(p)?;
    Ok(q.iter().filter(|f| !f.is_shifting()).map(|f| (f.r.clone(), f.top())).collect())
}

/// Check the existence condition.
///
/// With a numeric field the tail bound
/// `N* = min{n : Σ_{α₁<α₀} |r_A| |q|^{(α₁-α₀)n} < |Σ_{α₁=α₀} r_A|}` is used
/// (moduli padded by `2^-64`), and `n < N*` is checked exactly when the field
/// is specialised, numerically otherwise. Without one, `q` is generic: each
/// `E(n)` is a rational function in `u`, and the monomial supports separate
/// once `n` exceeds a computable index.
pub fn existence_check(p: &QPolynomial, nf: Option<&NumericField>, n_max: u64) -> Result<ExistenceCertificate, StructureError> {
    let terms = nonshifting_terms(p)?;
    let fd = p.field();
    let a0 = terms.iter().map(|(_, a)| *a).max().ok_or(StructureError::NoNonShifting)?;
    let lead = terms.iter().filter(|(_, a)| *a == a0).fold(Scalar::zero(), |acc, (r, _)| &acc + r);
    let mut cert = ExistenceCertificate {
        holds: true,
        failing_n: None,
        tail_bound: None,
        inconclusive: false,
        terms: terms.clone(),
        mode: if nf.is_some() { "value" } else { "generic" },
    };
    let tail = match nf {
        Some(nf) if !lead.is_zero() => numeric_tail_bound(&terms, a0, &lead, nf)?,
        None if !lead.is_zero() => generic_tail_bound(&terms, a0, fd),
        _ => None,
    };
    let limit = tail.unwrap_or(n_max).min(n_max.max(tail.unwrap_or(0)));
    for n in 0..=limit {
        let zero = match nf {
            Some(nf) if !fd.is_specialized() => {
                let v = nf.eval(&existence_value(&terms, fd, n as i64))?;
                let scale = terms.iter().map(|(r, a)| {
                    let m = nf.eval(r).map(|c| c.abs()).unwrap_or_else(|_| Float::with_val(nf.prec, 0));
                    m * nf.q.abs().pow(*a as i64 * n as i64 - a0 as i64 * n as i64)
                });
                let s = scale.fold(Float::with_val(nf.prec, 0), |acc, x| acc + x);
                v.abs() <= s * Float::with_val(nf.prec, Float::i_exp(1, -(nf.prec as i32 - 16)))
            }
            _ => existence_value(&terms, fd, n as i64).is_zero(),
        };
        if zero {
            cert.holds = false;
            cert.failing_n = Some(n);
            return Ok(cert);
        }
    }
    cert.tail_bound = tail;
    cert.inconclusive = tail.is_none();
    Ok(cert)
}

use rug::ops::Pow;

fn numeric_tail_bound(terms: &[(Scalar, i32)], a0: i32, lead: &Scalar, nf: &NumericField) -> Result<Option<u64>, StructureError> {
    let pad = Float::with_val(nf.prec, Float::i_exp(1, -64));
    let lead_abs = Float::with_val(nf.prec, nf.eval(lead)?.abs() - &pad);
    let qa = nf.q.abs();
    let rest: Vec<(Float, i32)> = terms
        .iter()
        .filter(|(_, a)| *a < a0)
        .map(|(r, a)| Ok((Float::with_val(nf.prec, nf.eval(r)?.abs() + &pad), *a - a0)))
        .collect::<Result<_, StructureError>>()?;
    if rest.is_empty() {
        return Ok(Some(0));
    }
    for n in 0..100_000u64 {
        let s = rest.iter().fold(Float::with_val(nf.prec, 0), |acc, (m, d)| acc + Float::with_val(nf.prec, m * Float::with_val(nf.prec, (&qa).pow(*d as i64 * n as i64))));
        if s < lead_abs {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// For generic `q`, `E(n)` times a common denominator is
/// `Σ N_A(u) u^{D α_A n}`; groups with distinct `α` occupy disjoint degree
/// ranges as soon as `D·gap·n` exceeds the spread of the `N_A`.
fn generic_tail_bound(terms: &[(Scalar, i32)], _a0: i32, fd: &FieldDescriptor) -> Option<u64> {
    if fd.is_specialized() {
        return None;
    }
    let mut spread = 0i64;
    for (r, _) in terms {
        for part in [r.rational_part(), r.rho_part()] {
            if part.is_zero() {
                continue;
            }
            let n = part.num();
            let d = part.den();
            let lo = n.valuation().unwrap() as i64 - d.degree().unwrap() as i64;
            let hi = n.degree().unwrap() as i64 - d.valuation().unwrap() as i64;
            spread = spread.max(hi - lo);
        }
    }
    // the product with a common denominator widens each range by at most its degree
    let lcm_deg: i64 = terms.iter().map(|(r, _)| r.rational_part().den().degree().unwrap_or(0) as i64 + r.rho_part().den().degree().unwrap_or(0) as i64).sum();
    let mut alphas: Vec<i32> = terms.iter().map(|(_, a)| *a).collect();
    alphas.sort_unstable();
    alphas.dedup();
    let gap = alphas.windows(2).map(|w| (w[1] - w[0]) as i64).min().unwrap_or(1);
    let width = 2 * (spread + lcm_deg) + 1;
    Some((width / (fd.root_order as i64 * gap) + 1) as u64)
}

/// `P(0, Y_j = q^{jn})` divided by the coefficient of `Y₀`, as pairs
/// `(j, coefficient of q^{jn})`; the constant term of `P` is grouped with
/// `j = 0`.
pub fn literal_existence_polynomial(p: &QPolynomial) -> Result<Vec<(i32, Scalar)>, StructureError> {
    let c0 = p.coeff(&MonomialKey::new(0, vec![0]));
    if c0.is_zero() {
        return Err(StructureError::NoNonShifting);
    }
    let inv = c0.checked_inv()?;
    let mut out: BTreeMap<i32, Scalar> = BTreeMap::new();
    for (k, c) in p.terms().iter().filter(|(k, _)| k.a == 0) {
        if k.ell() > 1 {
            return Err(StructureError::NotReduced);
        }
        let j = k.top().unwrap_or(0);
        let e = out.entry(j).or_default();
        *e = &*e + &(c * &inv);
    }
    Ok(out.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    PolynomialSolution,
    Convergent,
    DivergentCandidate { height: Rational, co_height: u32 },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::PolynomialSolution => "PolynomialSolution",
            Classification::Convergent => "Convergent",
            Classification::DivergentCandidate { .. } => "DivergentCandidate",
        }
    }
}

/// `p` with indices shifted so that `α(Q₀) = 0`, and the shift used.
pub fn normalize(p: &QPolynomial) -> Result<(QPolynomial, i32), StructureError> {
    let (q, _) = extract(p)?;
    let a0 = alpha_bounds(&q).q0.ok_or(StructureError::NoNonShifting)?;
    Ok((p.shift_indices(-a0), -a0))
}

pub fn classify(p: &QPolynomial) -> Result<Classification, StructureError> {
    if !is_reduced(p) {
        return Err(StructureError::NotReduced);
    }
    let (q, _) = extract(p)?;
    let ab = alpha_bounds(&q);
    match (ab.q0, ab.qplus) {
        (_, None) => Ok(Classification::PolynomialSolution),
        (Some(a0), Some(ap)) if a0 >= ap => Ok(Classification::Convergent),
        _ => {
            let (pn, _) = normalize(p)?;
            let (qn, _) = extract(&pn)?;
            let prof = height_profile(&qn)?;
            Ok(Classification::DivergentCandidate { height: prof.height, co_height: prof.co_height })
        }
    }
}

/// Sign of a scalar that is real for every real `u > 0`, when the signs of
/// its coefficients determine it; `None` otherwise.
fn symbolic_sign(s: &Scalar) -> Option<i32> {
    if !s.rho_part().is_zero() {
        return None;
    }
    let r = s.rational_part();
    let sign_of = |p: &crate::scalar::UPoly| -> Option<i32> {
        let mut sg = 0;
        for (_, c) in p.nonzero_terms() {
            if !c.is_real() {
                return None;
            }
            let x = if c.re.cmp0().is_gt() { 1 } else { -1 };
            if sg != 0 && sg != x {
                return None;
            }
            sg = x;
        }
        Some(sg)
    };
    Some(sign_of(r.num())? * sign_of(r.den())?)
}

/// True iff `{P_i} ∪ {r_A : A ∈ Q₊} ∪ {-r_A : A ∈ Q₀}` are real and share
/// one sign: decided at the given numeric `q` (or the specialised value),
/// otherwise for all real `q > 1` from coefficient signs.
pub fn sign_condition(p: &QPolynomial, nf: Option<&NumericField>) -> Result<bool, StructureError> {
    if !is_reduced(p) {
        return Err(StructureError::NotReduced);
    }
    let (q, poly) = extract(p)?;
    let mut vals: Vec<Scalar> = poly.coeffs.iter().filter(|c| !c.is_zero()).cloned().collect();
    for f in &q {
        vals.push(if f.is_shifting() { f.r.clone() } else { -&f.r });
    }
    let mut sign = 0;
    for v in &vals {
        let s = if let Some(g) = v.as_grat() {
            if !g.is_real() {
                return Ok(false);
            }
            if g.re.cmp0().is_gt() { 1 } else { -1 }
        } else if let Some(nf) = nf {
            let c = nf.eval(v)?;
            if !c.im.is_zero() && c.im.clone().abs() > c.abs() * Float::with_val(nf.prec, Float::i_exp(1, -(nf.prec as i32 - 16))) {
                return Ok(false);
            }
            if c.re.is_sign_positive() { 1 } else { -1 }
        } else {
            match symbolic_sign(v) {
                Some(s) => s,
                None => return Ok(false),
            }
        };
        if sign != 0 && s != sign {
            return Ok(false);
        }
        sign = s;
    }
    Ok(true)
}

/// Aggregate report on a reduced equation.
#[derive(Clone, Debug)]
pub struct StructureReport {
    pub factors: Vec<QFactor>,
    pub poly_part: PolyPart,
    pub alpha: AlphaBounds,
    pub normalization_shift: i32,
    pub profile: Option<HeightProfile>,
    pub crest_polynomial: Option<CrestPolynomial>,
    pub max_ell: usize,
    pub classification: Option<Classification>,
}

pub fn report(p: &QPolynomial) -> Result<StructureReport, StructureError> {
    let (factors, poly_part) = extract(p)?;
    let alpha = alpha_bounds(&factors);
    let max_ell = factors.iter().map(|f| f.key.ell()).max().unwrap_or(0);
    let mut rep = StructureReport {
        factors,
        poly_part,
        alpha,
        normalization_shift: 0,
        profile: None,
        crest_polynomial: None,
        max_ell,
        classification: None,
    };
    if is_reduced(p) {
        let (pn, s) = normalize(p)?;
        rep.normalization_shift = s;
        rep.classification = Some(classify(p)?);
        if alpha.qplus.is_some() {
            let (prof, crest) = crest_polynomial(&pn)?;
            rep.profile = Some(prof);
            rep.crest_polynomial = Some(crest);
        }
    }
    Ok(rep)
}

fn rat_json(r: &Rational) -> Value {
    json!({"num": r.numer().to_string(), "den": r.denom().to_string()})
}

impl StructureReport {
    pub fn to_json(&self, fd: &FieldDescriptor) -> Value {
        let alpha = |x: Option<i32>| x.map(Value::from).unwrap_or_else(|| Value::from("-inf"));
        json!({
            "factors": self.factors.iter().map(|f| json!({
                "a": f.key.a, "shifts": f.key.shifts, "r": scalar_json(&f.r), "r_text": render_scalar(&f.r, fd),
                "set": if f.is_shifting() { "Q+" } else { "Q0" },
            })).collect::<Vec<_>>(),
            "poly_part": self.poly_part.coeffs.iter().map(|c| render_scalar(c, fd)).collect::<Vec<_>>(),
            "alpha_Q0": alpha(self.alpha.q0),
            "alpha_Qplus": alpha(self.alpha.qplus),
            "normalization_shift": self.normalization_shift,
            "L": self.max_ell,
            "classification": self.classification.as_ref().map(|c| c.label()),
            "profile": self.profile.as_ref().map(|p| json!({
                "H": rat_json(&p.height),
                "h": p.co_height,
                "heights": p.heights.iter().map(|(k, h)| json!({"factor": k.tuple_text(), "H": rat_json(h)})).collect::<Vec<_>>(),
                "crest": p.crest.iter().map(|k| k.tuple_text()).collect::<Vec<_>>(),
                "scopes": p.scopes.iter().map(|(k, s)| json!({"factor": k.tuple_text(), "s": s})).collect::<Vec<_>>(),
            })),
            "crest_polynomial": self.crest_polynomial.as_ref().map(|c| c.to_json(fd)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_polynomial;

    const RUNNING: &str = "-2*f(z)+4*z^3*f(q*z)*f(q^6*z)+5*q^2*z^6*f(z)*f(q^9*z)*f(q^10*z)+18*q^4*z^7*f(q^14*z)^2+9*z^10*f(q^-3*z)*f(q^5*z)*f(q^14*z)*f(q^16*z)+3*z^14*f(q^-5*z)+(q^8+2*q^17)*z^14*f(z)+72*z^14*f(z)*f(q^3*z)*f(q^5*z)+1+15*z^7";

    #[test]
    fn running_example_heights() {
        let fd = FieldDescriptor::new(2);
        let p = parse_polynomial(RUNNING, &fd).unwrap();
        let (q, poly) = extract(&p).unwrap();
        assert_eq!(q.len(), 8);
        assert_eq!(poly.coeffs.len(), 8);
        let a = height_profile(&q).unwrap();
        let b = height_profile_by_index(&q).unwrap();
        assert_eq!(a.height, 1);
        assert_eq!(a.co_height, 3);
        assert_eq!(a, b);
        let (_, c) = crest_polynomial(&p).unwrap();
        assert_eq!(c, crest_polynomial_by_derivative(&p).unwrap());
        assert_eq!(c.constant_term(), Scalar::from_int(-2));
        let ex = existence_check(&p, None, 50).unwrap();
        assert!(ex.holds);
    }

    #[test]
    fn painleve_f0_one_is_convergent_and_mixed_sign() {
        let fd = FieldDescriptor::new(2);
        let p = parse_polynomial("f(q^-1*z)*f(z)^2*f(q*z) - f(z) + z", &fd).unwrap();
        let pd = p.substitute_reduction(&Scalar::one()).unwrap();
        assert_eq!(pd.len(), 12);
        assert!(is_reduced(&pd));
        let (q, _) = extract(&pd).unwrap();
        assert_eq!(alpha_bounds(&q), AlphaBounds { q0: Some(1), qplus: Some(1) });
        assert_eq!(classify(&pd).unwrap(), Classification::Convergent);
        assert!(!sign_condition(&pd, None).unwrap());
        assert!(existence_check(&pd, None, 50).unwrap().holds);
        let pc = p.substitute_reduction(&Scalar::zero()).unwrap().deflate(3).unwrap();
        match classify(&pc).unwrap() {
            Classification::DivergentCandidate { height, co_height } => {
                assert_eq!(height, Rational::from((1, 2)));
                assert_eq!(co_height, 1);
            }
            c => panic!("{c:?}"),
        }
    }
}
