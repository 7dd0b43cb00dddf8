//! Solution coefficients: exact recursion, normalized numeric recursion,
//! plug-in residuals, q-Borel transform, weights and majorant certificate.

use crate::qpoly::{MonomialKey, QPolynomial};
use crate::scalar::{Complex, FieldDescriptor, FieldError, NumericField, Scalar};
use crate::structure::{self, alpha_bounds, extract, is_reduced, StructureError};
use rug::{Float, Integer, Rational};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SeriesError {
    #[error("existence condition fails at n = {0}")]
    ExistenceFails(usize),
    #[error("no solution: coefficient equation at n = {0} is inconsistent")]
    Inconsistent(usize),
    #[error("initial value given for n = {0}, which is not free")]
    InitialNotFree(usize),
    #[error("operation budget of {0} multiplications exceeded")]
    BudgetExceeded(u64),
    #[error("q-exponent {0} is not representable exactly")]
    NonIntegralExponent(String),
    #[error("equation is not reduced")]
    NotReduced,
    #[error("alpha(Q0) = {0}, expected 0")]
    NotNormalized(i32),
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Coefficient arithmetic for the recursion: exact scalars or complex floats.
pub trait CoeffRing {
    type E: Clone;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn div(&self, a: &Self::E, b: &Self::E) -> Result<Self::E, SeriesError>;
    fn neg(&self, a: &Self::E) -> Self::E;
    /// Zero, or negligible relative to `scale` in floating point.
    fn is_zero(&self, a: &Self::E, scale: &Self::E) -> bool;
    fn embed(&self, s: &Scalar) -> Result<Self::E, SeriesError>;
    fn q_pow(&self, k: i64) -> Self::E;
    fn q_pow_rational(&self, e: &Rational) -> Result<Self::E, SeriesError>;
    /// `|a|` as an element, for error scales.
    fn abs(&self, a: &Self::E) -> Self::E;
}

/// Exact arithmetic in the field of a descriptor.
#[derive(Clone, Debug)]
pub struct ExactRing {
    pub field: FieldDescriptor,
}

impl CoeffRing for ExactRing {
    type E = Scalar;
    fn zero(&self) -> Scalar {
        Scalar::zero()
    }
    fn one(&self) -> Scalar {
        Scalar::one()
    }
    fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }
    fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a - b
    }
    fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a * b
    }
    fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, SeriesError> {
        Ok(a.checked_div(b)?)
    }
    fn neg(&self, a: &Scalar) -> Scalar {
        -a
    }
    fn is_zero(&self, a: &Scalar, _: &Scalar) -> bool {
        a.is_zero()
    }
    fn embed(&self, s: &Scalar) -> Result<Scalar, SeriesError> {
        Ok(s.clone())
    }
    fn q_pow(&self, k: i64) -> Scalar {
        self.field.q_pow(k)
    }
    fn q_pow_rational(&self, e: &Rational) -> Result<Scalar, SeriesError> {
        self.field.q_pow_rational(e).ok_or_else(|| SeriesError::NonIntegralExponent(e.to_string()))
    }
    fn abs(&self, a: &Scalar) -> Scalar {
        a.clone()
    }
}

impl CoeffRing for NumericField {
    type E = Complex;
    fn zero(&self) -> Complex {
        NumericField::zero(self)
    }
    fn one(&self) -> Complex {
        NumericField::one(self)
    }
    fn add(&self, a: &Complex, b: &Complex) -> Complex {
        a.add(b)
    }
    fn sub(&self, a: &Complex, b: &Complex) -> Complex {
        a.sub(b)
    }
    fn mul(&self, a: &Complex, b: &Complex) -> Complex {
        a.mul(b)
    }
    fn div(&self, a: &Complex, b: &Complex) -> Result<Complex, SeriesError> {
        a.div(b).ok_or(SeriesError::Field(FieldError::DivisionByZero))
    }
    fn neg(&self, a: &Complex) -> Complex {
        a.neg()
    }
    fn is_zero(&self, a: &Complex, scale: &Complex) -> bool {
        let tol = Float::with_val(self.prec, Float::i_exp(1, -(self.prec as i32 - 16)));
        a.abs() <= scale.abs() * tol
    }
    fn embed(&self, s: &Scalar) -> Result<Complex, SeriesError> {
        Ok(self.eval(s)?)
    }
    fn q_pow(&self, k: i64) -> Complex {
        NumericField::q_pow(self, k)
    }
    fn q_pow_rational(&self, e: &Rational) -> Result<Complex, SeriesError> {
        Ok(NumericField::q_pow_rational(self, e))
    }
    fn abs(&self, a: &Complex) -> Complex {
        Complex::from_real(a.abs())
    }
}

/// `d_n = H n (n - h)` for `n ≥ 0`, `0` for `n < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightKit {
    pub height: Rational,
    pub co_height: u32,
}

impl WeightKit {
    pub fn new(height: Rational, co_height: u32) -> Self {
        WeightKit { height, co_height }
    }

    pub fn d(&self, n: i64) -> Rational {
        if n < 0 {
            return Rational::new();
        }
        Rational::from(&self.height * Rational::from(n * (n - self.co_height as i64)))
    }

    /// `D_A(n₁…n_ℓ) = d_{Σn + a} - Σ d_{n_i} - Σ α_i n_i`.
    pub fn d_a(&self, key: &MonomialKey, ns: &[i64]) -> Rational {
        let s: i64 = ns.iter().sum::<i64>() + key.a as i64;
        let mut v = self.d(s);
        for (n, al) in ns.iter().zip(&key.shifts) {
            v -= self.d(*n);
            v -= Rational::from(*al as i64 * n);
        }
        v
    }

    /// `θ(A, k)`.
    pub fn theta(&self, key: &MonomialKey, k: usize) -> Rational {
        let h = &self.height;
        let hh = self.co_height as i64;
        let al = *key.shifts.last().unwrap() as i64;
        let b = key.a as i64 + k as i64 - 1;
        let mut v = Rational::from(h * Rational::from(b * b)) + Rational::from((h * Rational::from(hh)) - al) * Rational::from(b);
        if k >= 2 {
            v += Rational::from(h * Rational::from((k as i64 - 1) * (1 - hh)));
            let l = key.shifts.len();
            for i in (l - k)..(l - 1) {
                v += key.shifts[i] as i64;
            }
        }
        v
    }

    /// `n(2Ha - α_ℓ + 2H(k-1)) - θ(A,k)`.
    pub fn dmin_closed_form(&self, key: &MonomialKey, n: i64, k: usize) -> Rational {
        let h2 = Rational::from(&self.height * 2);
        let al = *key.shifts.last().unwrap() as i64;
        let slope = Rational::from(&h2 * Rational::from(key.a as i64 + k as i64 - 1)) - al;
        Rational::from(slope * n) - self.theta(key, k)
    }

    /// `(0,…,0,1,…,1,n-a-k+1)`.
    pub fn dmin_tuple(&self, key: &MonomialKey, n: i64, k: usize) -> Vec<i64> {
        let l = key.ell();
        let mut t = vec![0; l];
        for x in t.iter_mut().skip(l - k).take(k - 1) {
            *x = 1;
        }
        t[l - 1] = n - key.a as i64 - k as i64 + 1;
        t
    }
}

/// Exhaustive minimum of `D_A` over tuples summing to `n - a` with exactly
/// `k` positive entries, and every tuple achieving it.
pub fn dmin_bruteforce(kit: &WeightKit, key: &MonomialKey, n: i64, k: usize) -> (Rational, Vec<Vec<i64>>) {
    let l = key.ell();
    let total = n - key.a as i64;
    let mut best: Option<Rational> = None;
    let mut arg = Vec::new();
    let mut cur = vec![0i64; l];
    fn rec(i: usize, left: i64, pos: usize, k: usize, cur: &mut Vec<i64>, visit: &mut dyn FnMut(&[i64])) {
        let l = cur.len();
        if i == l {
            if left == 0 && pos == k {
                visit(cur);
            }
            return;
        }
        cur[i] = 0;
        if l - i - 1 >= k - pos {
            rec(i + 1, left, pos, k, cur, visit);
        }
        if pos < k {
            for v in 1..=left {
                cur[i] = v;
                rec(i + 1, left - v, pos + 1, k, cur, visit);
            }
        }
        cur[i] = 0;
    }
    rec(0, total, 0, k, &mut cur, &mut |t| {
        let v = kit.d_a(key, t);
        match &best {
            Some(b) if v > *b => {}
            Some(b) if v == *b => arg.push(t.to_vec()),
            _ => {
                best = Some(v);
                arg = vec![t.to_vec()];
            }
        }
    });
    (best.expect("at least one tuple"), arg)
}

#[derive(Clone, Debug)]
struct TrieNode {
    parent: Option<usize>,
    alpha: i32,
}

/// Reduced normalized equation prepared for the recursion.
#[derive(Clone, Debug)]
pub struct Prepared<E> {
    poly: Vec<E>,
    q0: Vec<(E, i32)>,
    /// `(r_A, a, node)` for shifting factors.
    qplus: Vec<(E, u32, usize)>,
    trie: Vec<TrieNode>,
    alphas: Vec<i32>,
}

pub fn prepare<R: CoeffRing>(ring: &R, p: &QPolynomial) -> Result<Prepared<R::E>, SeriesError> {
    if !is_reduced(p) {
        return Err(SeriesError::NotReduced);
    }
    let (q, poly) = extract(p)?;
    if let Some(a0) = alpha_bounds(&q).q0 {
        if a0 != 0 {
            return Err(SeriesError::NotNormalized(a0));
        }
    }
    let poly = poly.coeffs.iter().map(|c| ring.embed(c)).collect::<Result<_, _>>()?;
    let mut q0 = Vec::new();
    let mut qplus = Vec::new();
    let mut trie = vec![TrieNode { parent: None, alpha: 0 }];
    let mut index: BTreeMap<(usize, i32), usize> = BTreeMap::new();
    for f in &q {
        let r = ring.embed(&f.r)?;
        if !f.is_shifting() {
            q0.push((r, f.top()));
            continue;
        }
        let mut node = 0;
        for &al in &f.key.shifts {
            node = *index.entry((node, al)).or_insert_with(|| {
                trie.push(TrieNode { parent: Some(node), alpha: al });
                trie.len() - 1
            });
        }
        qplus.push((r, f.a(), node));
    }
    let mut alphas: Vec<i32> = trie.iter().skip(1).map(|n| n.alpha).collect();
    alphas.sort_unstable();
    alphas.dedup();
    Ok(Prepared { poly, q0, qplus, trie, alphas })
}

impl<E> Prepared<E> {
    pub fn trie_size(&self) -> usize {
        self.trie.len() - 1
    }
}

/// Coefficients of a solution and how they are stored.
#[derive(Clone, Debug)]
pub struct SeriesSolution<E> {
    /// `f_n`, or `g_n = q^{-d_n} f_n` when `normalization` is set.
    pub coeffs: Vec<E>,
    pub normalization: Option<WeightKit>,
    /// Indices where `E(n) = 0` and an initial value was used.
    pub free: Vec<usize>,
    pub multiplications: u64,
}

#[derive(Clone, Debug)]
pub struct SolveOptions<E> {
    pub initial: BTreeMap<usize, E>,
    pub budget: Option<u64>,
}

impl<E> Default for SolveOptions<E> {
    fn default() -> Self {
        SolveOptions { initial: BTreeMap::new(), budget: None }
    }
}

/// Shared kernel: with `kit` the recursion runs on `g_n = q^{-d_n} f_n`.
///
/// For every node of the trie of sorted shift prefixes the truncated
/// product series is kept, normalized as `P̃(m) = q^{-d_m} S(m)`, and
/// extended by one coefficient each time `g_n` is known, via
/// `P̃(m) = Σ_k q^{-2Hk(m-k)} P̃_parent(k) q^{α(m-k)} g_{m-k}`.
pub fn solve_kernel<R: CoeffRing>(
    ring: &R,
    prep: &Prepared<R::E>,
    n_max: usize,
    kit: Option<&WeightKit>,
    opts: &SolveOptions<R::E>,
) -> Result<SeriesSolution<R::E>, SeriesError> {
    let nn = n_max + 1;
    let mut ops: u64 = 0;
    let budget = opts.budget.unwrap_or(u64::MAX);
    // w^e with w = q^{-2H}
    let wpow: Option<Vec<R::E>> = match kit {
        Some(k) if k.height.cmp0().is_ne() => {
            let w = ring.q_pow_rational(&-Rational::from(&k.height * 2))?;
            let emax = (nn * nn) / 4 + 1;
            let mut v = Vec::with_capacity(emax + 1);
            v.push(ring.one());
            for e in 1..=emax {
                let x = ring.mul(&v[e - 1], &w);
                v.push(x);
            }
            Some(v)
        }
        _ => None,
    };
    let ai: BTreeMap<i32, usize> = prep.alphas.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let qa: Vec<R::E> = prep.alphas.iter().map(|a| ring.q_pow(*a as i64)).collect();
    // S̃_α(j) = q^{αj} g_j
    let mut sa: Vec<Vec<R::E>> = vec![Vec::with_capacity(nn); prep.alphas.len()];
    let mut qaj: Vec<R::E> = vec![ring.one(); prep.alphas.len()];
    let mut prod: Vec<Vec<R::E>> = vec![Vec::with_capacity(nn); prep.trie.len()];
    let mut g: Vec<R::E> = Vec::with_capacity(nn);
    let mut free = Vec::new();
    let dn = |n: usize| kit.map(|k| k.d(n as i64)).unwrap_or_default();
    for n in 0..nn {
        // right-hand side
        let mut rhs = ring.zero();
        let mut scale = ring.zero();
        if let Some(pn) = prep.poly.get(n) {
            let w = if kit.is_some() { ring.q_pow_rational(&-dn(n))? } else { ring.one() };
            let t = ring.mul(pn, &w);
            scale = ring.add(&scale, &ring.abs(&t));
            rhs = ring.add(&rhs, &t);
        }
        for (r, a, node) in &prep.qplus {
            let a = *a as usize;
            if a > n {
                continue;
            }
            let m = n - a;
            let mut t = ring.mul(r, &prod[*node][m]);
            if kit.is_some() {
                let e = Rational::from(dn(m) - dn(n));
                t = ring.mul(&t, &ring.q_pow_rational(&e)?);
            }
            scale = ring.add(&scale, &ring.abs(&t));
            rhs = ring.add(&rhs, &t);
            ops += 2;
        }
        let mut e = ring.zero();
        let mut escale = ring.zero();
        for (r, al) in &prep.q0 {
            let t = ring.mul(r, &ring.q_pow(*al as i64 * n as i64));
            escale = ring.add(&escale, &ring.abs(&t));
            e = ring.add(&e, &t);
        }
        let gn = if ring.is_zero(&e, &escale) {
            match opts.initial.get(&n) {
                Some(v) => {
                    if !ring.is_zero(&rhs, &scale) {
                        return Err(SeriesError::Inconsistent(n));
                    }
                    free.push(n);
                    v.clone()
                }
                None => return Err(SeriesError::ExistenceFails(n)),
            }
        } else {
            if opts.initial.contains_key(&n) {
                return Err(SeriesError::InitialNotFree(n));
            }
            ring.neg(&ring.div(&rhs, &e)?)
        };
        g.push(gn);
        // extend the shifted series and the trie products
        for (i, x) in sa.iter_mut().enumerate() {
            x.push(ring.mul(&qaj[i], &g[n]));
            qaj[i] = ring.mul(&qaj[i], &qa[i]);
        }
        for idx in 1..prep.trie.len() {
            let node = &prep.trie[idx];
            let s = &sa[ai[&node.alpha]];
            let parent = node.parent.unwrap();
            let v = if parent == 0 {
                s[n].clone()
            } else {
                let pp = &prod[parent];
                let mut acc = ring.zero();
                for k in 0..=n {
                    let mut t = ring.mul(&pp[k], &s[n - k]);
                    if let Some(w) = &wpow {
                        t = ring.mul(&t, &w[k * (n - k)]);
                        ops += 1;
                    }
                    acc = ring.add(&acc, &t);
                }
                ops += n as u64 + 1;
                acc
            };
            prod[idx].push(v);
        }
        if ops > budget {
            return Err(SeriesError::BudgetExceeded(budget));
        }
    }
    Ok(SeriesSolution { coeffs: g, normalization: kit.cloned(), free, multiplications: ops })
}

/// `f₀…f_N` exactly, for a reduced equation with `α(Q₀) = 0`.
pub fn coefficients_exact(p: &QPolynomial, n_max: usize, opts: &SolveOptions<Scalar>) -> Result<SeriesSolution<Scalar>, SeriesError> {
    let ring = ExactRing { field: p.field().clone() };
    let prep = prepare(&ring, p)?;
    solve_kernel(&ring, &prep, n_max, None, opts)
}

/// `g₀…g_N` with `g_n = q^{-d_n} f_n` at the precision of `nf`.
pub fn coefficients_normalized(
    p: &QPolynomial,
    n_max: usize,
    nf: &NumericField,
    kit: &WeightKit,
    opts: &SolveOptions<Complex>,
) -> Result<SeriesSolution<Complex>, SeriesError> {
    let prep = prepare(nf, p)?;
    solve_kernel(nf, &prep, n_max, Some(kit), opts)
}

/// `f₀…f_N` numerically without normalization.
pub fn coefficients_numeric(p: &QPolynomial, n_max: usize, nf: &NumericField, opts: &SolveOptions<Complex>) -> Result<SeriesSolution<Complex>, SeriesError> {
    let prep = prepare(nf, p)?;
    solve_kernel(nf, &prep, n_max, None, opts)
}

/// Closed-form solution when `Q₊` is empty:
/// `f_n = -P_n / Σ_{Q₀} r_A q^{α₁ n}`.
pub fn solve_polynomial_case(p: &QPolynomial) -> Result<Vec<Scalar>, SeriesError> {
    if !is_reduced(p) {
        return Err(SeriesError::NotReduced);
    }
    let (q, poly) = extract(p)?;
    if q.iter().any(|f| f.is_shifting()) {
        return Err(SeriesError::Precondition("shifting factors present".into()));
    }
    let fd = p.field();
    let mut out = Vec::new();
    for (n, pn) in poly.coeffs.iter().enumerate() {
        let e = q.iter().fold(Scalar::zero(), |acc, f| &acc + &(&f.r * &fd.q_pow(f.top() as i64 * n as i64)));
        if e.is_zero() {
            if pn.is_zero() {
                return Err(SeriesError::ExistenceFails(n));
            }
            return Err(SeriesError::Inconsistent(n));
        }
        out.push(-&pn.checked_div(&e)?);
    }
    while out.last().map_or(false, |c| c.is_zero()) {
        out.pop();
    }
    Ok(out)
}

/// Coefficients of `P(z, f(q^{α}z), …)` up to `z^N` by direct truncated
/// multiplication, for `f` given to order `N`; `q_exp` is the exponent of
/// `q` per unit shift in terms of `ring.q_pow`.
pub fn plug_in_residual<R: CoeffRing>(ring: &R, p: &QPolynomial, f: &[R::E], q_exp: i64) -> Result<(Vec<R::E>, Vec<R::E>), SeriesError> {
    let nn = f.len();
    let mut res = vec![ring.zero(); nn];
    let mut mag = vec![ring.zero(); nn];
    let mut shifted: BTreeMap<i32, (Vec<R::E>, Vec<R::E>)> = BTreeMap::new();
    for (k, c) in p.terms() {
        let a = k.a as usize;
        if a >= nn {
            continue;
        }
        let c = ring.embed(c)?;
        let mut acc = vec![ring.zero(); nn - a];
        let mut acc_abs = vec![ring.zero(); nn - a];
        acc[0] = c.clone();
        acc_abs[0] = ring.abs(&c);
        for &al in &k.shifts {
            let (s, sabs) = shifted.entry(al).or_insert_with(|| {
                let qa = ring.q_pow(al as i64 * q_exp);
                let mut w = ring.one();
                let mut v = Vec::with_capacity(nn);
                for x in f {
                    v.push(ring.mul(&w, x));
                    w = ring.mul(&w, &qa);
                }
                let va = v.iter().map(|x| ring.abs(x)).collect();
                (v, va)
            });
            let len = nn - a;
            let mut next = vec![ring.zero(); len];
            let mut next_abs = vec![ring.zero(); len];
            for i in 0..len {
                for j in 0..len - i {
                    next[i + j] = ring.add(&next[i + j], &ring.mul(&acc[i], &s[j]));
                    next_abs[i + j] = ring.add(&next_abs[i + j], &ring.mul(&acc_abs[i], &sabs[j]));
                }
            }
            acc = next;
            acc_abs = next_abs;
        }
        for i in 0..nn - a {
            res[i + a] = ring.add(&res[i + a], &acc[i]);
            mag[i + a] = ring.add(&mag[i + a], &acc_abs[i]);
        }
    }
    Ok((res, mag))
}

/// Largest `|res_n| / mag_n` over `n` (0 when every residual vanishes).
pub fn relative_residual(res: &[Complex], mag: &[Complex]) -> f64 {
    res.iter()
        .zip(mag)
        .map(|(r, m)| {
            let a = r.abs();
            let b = m.abs();
            if a.is_zero() {
                0.0
            } else if b.is_zero() {
                f64::INFINITY
            } else {
                (a / b).to_f64()
            }
        })
        .fold(0.0, f64::max)
}

/// `(q^{-d_n} f_n)_n`.
pub fn q_borel<R: CoeffRing>(ring: &R, f: &[R::E], kit: &WeightKit) -> Result<Vec<R::E>, SeriesError> {
    f.iter()
        .enumerate()
        .map(|(n, x)| Ok(ring.mul(x, &ring.q_pow_rational(&-kit.d(n as i64))?)))
        .collect()
}

/// Certificate `|f_n| ≤ c γ^n g_n` with `g = 1 + z g^L`.
#[derive(Clone, Debug)]
pub struct MajorantCertificate {
    pub c: f64,
    pub gamma: f64,
    pub big_l: usize,
    /// Lower bound for `inf_n |Σ_{Q₀} r_A q^{α₁ n}|`.
    pub inf_e: f64,
    pub tail_bound: u64,
    pub verified_to: usize,
    pub holds: bool,
}

/// `g_n = C(nL, n) / ((L-1)n + 1)`.
pub fn majorant_sequence(big_l: usize, n_max: usize) -> Vec<Integer> {
    (0..=n_max)
        .map(|n| {
            let l = big_l as u32;
            let b = Integer::from(Integer::binomial_u(l * n as u32, n as u32));
            b / ((big_l - 1) * n + 1) as u32
        })
        .collect()
}

pub fn majorant_certificate(p: &QPolynomial, nf: &NumericField, n_check: usize) -> Result<MajorantCertificate, SeriesError> {
    if !is_reduced(p) {
        return Err(SeriesError::NotReduced);
    }
    let (q, poly) = extract(p)?;
    let ab = alpha_bounds(&q);
    match (ab.q0, ab.qplus) {
        (Some(0), Some(x)) if x <= 0 => {}
        (Some(0), None) => {}
        (a0, _) => return Err(SeriesError::Precondition(format!("need alpha(Q0) = 0 >= alpha(Q+), got {a0:?}"))),
    }
    let big_l = q.iter().filter(|f| f.is_shifting()).map(|f| f.key.ell()).max().unwrap_or(1).max(1);
    let f = coefficients_numeric(p, n_check, nf, &SolveOptions::default())?;
    let fabs: Vec<f64> = f.coeffs.iter().map(|x| x.abs().to_f64()).collect();
    let pdeg = poly.coeffs.len().saturating_sub(1);
    let c = fabs.iter().take(pdeg + 1).cloned().fold(1.0, f64::max);
    // inf |E(n)| through the tail bound
    let terms: Vec<(Complex, i32)> = q.iter().filter(|f| !f.is_shifting()).map(|f| Ok((nf.eval(&f.r)?, f.top()))).collect::<Result<_, FieldError>>()?;
    let qa = nf.q.abs().to_f64();
    let lead: f64 = terms.iter().filter(|t| t.1 == 0).fold(NumericField::zero(nf), |acc, t| acc.add(&t.0)).abs().to_f64();
    let tail = |n: u64| -> f64 { terms.iter().filter(|t| t.1 < 0).map(|t| t.0.abs().to_f64() * qa.powf(t.1 as f64 * n as f64)).sum() };
    let mut nstar = 0u64;
    while tail(nstar) >= lead {
        nstar += 1;
        if nstar > 100_000 {
            return Err(SeriesError::Precondition("no tail bound".into()));
        }
    }
    let mut inf_e = lead - tail(nstar);
    for n in 0..nstar {
        let e = terms.iter().fold(NumericField::zero(nf), |acc, t| acc.add(&t.0.mul(&nf.q_pow(t.1 as i64 * n as i64))));
        inf_e = inf_e.min(e.abs().to_f64());
    }
    if inf_e <= 0.0 {
        return Err(SeriesError::Precondition("existence condition fails".into()));
    }
    let sum_r: f64 = q.iter().filter(|f| f.is_shifting()).map(|f| Ok(nf.eval(&f.r)?.abs().to_f64())).sum::<Result<f64, FieldError>>()?;
    let gamma = (c.powi(big_l as i32 - 1) * sum_r / inf_e).max(1.0);
    let gseq = majorant_sequence(big_l, n_check);
    let holds = fabs.iter().enumerate().all(|(n, x)| {
        let bound = c * gamma.powi(n as i32) * gseq[n].to_f64();
        *x <= bound * (1.0 + 1e-12)
    });
    Ok(MajorantCertificate { c, gamma, big_l, inf_e, tail_bound: nstar, verified_to: n_check, holds })
}

/// Ratio-test estimate of the radius of `Σ g_n z^n` using blocks of
/// `period` coefficients at the end of the sequence.
pub fn ratio_radius(g: &[Complex], period: usize) -> Option<f64> {
    let n = g.len();
    if n < 2 * period + 1 {
        return None;
    }
    let block_max = |lo: usize, hi: usize| g[lo..hi].iter().map(|x| x.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    let a = block_max(n - 2 * period, n - period);
    let b = block_max(n - period, n);
    if !a.is_finite() || !b.is_finite() {
        return None;
    }
    Some(2f64.powf((a - b) / period as f64))
}

/// Normalize, then compute `g` for a reduced leaf classified divergent.
pub fn kit_for(p: &QPolynomial) -> Result<WeightKit, SeriesError> {
    let (q, _) = extract(p)?;
    let prof = structure::height_profile(&q)?;
    Ok(WeightKit::new(prof.height, prof.co_height))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_polynomial;
    use crate::scalar::GRat;

    #[test]
    fn designed_equation_solves_to_z() {
        let fd = FieldDescriptor::new(1);
        let p = parse_polynomial("f(z) + q*z*f(z) - z - q*z^2", &fd).unwrap();
        let s = coefficients_exact(&p, 12, &SolveOptions::default()).unwrap();
        for (n, c) in s.coeffs.iter().enumerate() {
            assert_eq!(c.is_one(), n == 1);
            assert!(n == 1 || c.is_zero());
        }
    }

    #[test]
    fn polynomial_case() {
        let fd = FieldDescriptor::new(1);
        let p = parse_polynomial("f(q*z) - z", &fd).unwrap();
        let f = solve_polynomial_case(&p.shift_indices(-1)).unwrap();
        assert_eq!(f, vec![Scalar::zero(), Scalar::one()]);
        let p = parse_polynomial("2*f(z) - f(q*z) - 1", &fd).unwrap().specialize(&GRat::from_int(3)).unwrap();
        let f = solve_polynomial_case(&p.shift_indices(-1)).unwrap();
        assert_eq!(f, vec![Scalar::one()]);
    }

    #[test]
    fn drake_exact_matches_residual_and_normalized() {
        let fd = FieldDescriptor::new(1);
        let p = parse_polynomial("-f(z) + 1 + z*f(z) + q*z^2*f(z)*f(q*z)", &fd).unwrap();
        let p2 = p.specialize(&GRat::from_int(2)).unwrap();
        let s = coefficients_exact(&p2, 20, &SolveOptions::default()).unwrap();
        let ring = ExactRing { field: p2.field().clone() };
        let (res, _) = plug_in_residual(&ring, &p2, &s.coeffs, 1).unwrap();
        assert!(res.iter().all(|x| x.is_zero()));
        let nf = NumericField::real(&fd, &Rational::from(2), 128).unwrap();
        let kit = kit_for(&p).unwrap();
        assert_eq!(kit.height, Rational::from((1, 4)));
        let g = coefficients_normalized(&p, 20, &nf, &kit, &SolveOptions::default()).unwrap();
        for n in 0..=20 {
            let exact = nf.eval(&s.coeffs[n]).unwrap();
            let back = g.coeffs[n].mul(&nf.q_pow_rational(&kit.d(n as i64)));
            let rel = exact.sub(&back).abs() / exact.abs();
            assert!(rel.to_f64() < 1e-30, "n = {n}");
        }
    }

    #[test]
    fn weights_and_dmin() {
        let kit = WeightKit::new(Rational::from(1), 3);
        assert_eq!(kit.d(0), 0);
        assert_eq!(kit.d(3), 0);
        let a = MonomialKey::new(3, vec![1, 6]);
        assert_eq!(kit.theta(&a, 1), 0);
        let (m, arg) = dmin_bruteforce(&kit, &a, 10, 1);
        assert_eq!(m, kit.dmin_closed_form(&a, 10, 1));
        assert!(arg.contains(&kit.dmin_tuple(&a, 10, 1)));
    }

    #[test]
    fn majorant_sequence_is_fuss_catalan() {
        let g = majorant_sequence(2, 5);
        let v: Vec<u32> = g.iter().map(|x| x.to_u32().unwrap()).collect();
        assert_eq!(v, vec![1, 1, 2, 5, 14, 42]);
        assert!(majorant_sequence(1, 4).iter().all(|x| *x == 1));
    }
}
