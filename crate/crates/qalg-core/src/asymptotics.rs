//! Asymptotic laws for divergent solutions: crest roots, the U-series,
//! residue constants per residue class, and empirical validation.

use crate::qpoly::QPolynomial;
use crate::scalar::{Complex, FieldError, NumericField, Scalar};
use crate::series::{self, CoeffRing, SeriesError, SolveOptions, WeightKit};
use crate::structure::{self, extract, Classification, CrestPolynomial, StructureError, StructureReport};
use rug::float::Constant;
use rug::{Float, Rational};
use serde_json::{json, Value};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AsymptoticsError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("crest polynomial is constant in z")]
    DegenerateCrest,
    #[error("crest polynomial vanishes identically")]
    ZeroCrest,
    #[error("need at least {need} coefficients, have {have}")]
    InsufficientData { need: usize, have: usize },
    #[error("root finder did not converge")]
    NoConvergence,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn tiny(prec: u32, shift: i32) -> Float {
    Float::with_val(prec, Float::i_exp(1, -(prec as i32) + shift))
}

/// `(a; b)_k = Π_{i<k} (1 - a b^i)`.
pub fn qpochhammer(a: &Complex, b: &Complex, k: usize) -> Complex {
    let p = a.prec();
    let one = Complex::one(p);
    let mut acc = one.clone();
    let mut t = a.clone();
    for _ in 0..k {
        acc = acc.mul(&one.sub(&t));
        t = t.mul(b);
    }
    acc
}

/// `(a; b)_∞` for `|b| < 1`, stopping once the factors are 1 to working
/// precision.
pub fn qpochhammer_inf(a: &Complex, b: &Complex) -> Complex {
    let p = a.prec();
    let one = Complex::one(p);
    let eps = tiny(p, -2);
    let mut acc = one.clone();
    let mut t = a.clone();
    for _ in 0..100_000 {
        if t.abs() < eps {
            break;
        }
        acc = acc.mul(&one.sub(&t));
        t = t.mul(b);
    }
    acc
}

fn horner(c: &[Complex], z: &Complex) -> (Complex, Complex) {
    let p = z.prec();
    let mut v = Complex::zero(p);
    let mut d = Complex::zero(p);
    for a in c.iter().rev() {
        d = d.mul(z).add(&v);
        v = v.mul(z).add(a);
    }
    (v, d)
}

fn eval_norm(c: &[Complex], z: &Complex) -> Float {
    let p = z.prec();
    let za = z.abs();
    let mut acc = Float::new(p);
    for a in c.iter().rev() {
        acc = Float::with_val(p, &acc * &za) + a.abs();
    }
    acc
}

/// Roots of `C(z, f₀)` ordered by modulus, then by argument in `[0, 2π)`.
#[derive(Clone, Debug)]
pub struct CrestRoots {
    pub roots: Vec<Complex>,
    /// Smallest modulus; `None` for a root at infinity.
    pub radius: Option<Float>,
    pub root_at_infinity: bool,
    /// Multiplicity of the root `z = 0`.
    pub zero_multiplicity: usize,
    /// Largest `|C(ζ)| / Σ|c_k||ζ|^k` over the roots.
    pub max_residual: f64,
    pub certified: bool,
    pub ill_conditioned: bool,
}

impl CrestRoots {
    /// Roots of minimal modulus.
    pub fn dominant(&self) -> Vec<Complex> {
        let Some(r) = &self.radius else { return Vec::new() };
        let p = r.prec();
        let tol = Float::with_val(p, r * tiny(p, p as i32 / 2));
        self.roots.iter().filter(|z| Float::with_val(p, z.abs() - r) <= tol).cloned().collect()
    }
}

fn arg_2pi(z: &Complex) -> Float {
    let p = z.prec();
    let a = z.arg();
    if a.is_sign_negative() {
        a + Float::with_val(p, Constant::Pi) * 2u32
    } else {
        a
    }
}

fn order_roots(v: &mut [Complex]) {
    if v.is_empty() {
        return;
    }
    let p = v[0].prec();
    let rel = tiny(p, p as i32 / 2);
    v.sort_by(|x, y| {
        let (a, b) = (x.abs(), y.abs());
        let big = if a > b { a.clone() } else { b.clone() };
        if Float::with_val(p, &a - &b).abs() <= Float::with_val(p, &big * &rel) {
            arg_2pi(x).partial_cmp(&arg_2pi(y)).unwrap_or(Ordering::Equal)
        } else {
            a.partial_cmp(&b).unwrap_or(Ordering::Equal)
        }
    });
}

/// Simultaneous Aberth iteration on a polynomial with nonzero constant and
/// leading coefficients.
fn aberth(c: &[Complex]) -> Result<Vec<Complex>, AsymptoticsError> {
    let d = c.len() - 1;
    let p = c[0].prec();
    let r0 = c[0].div(&c[d]).unwrap().abs();
    let r0 = Float::with_val(p, r0.ln() / d as u32).exp();
    let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
    let mut z: Vec<Complex> = (0..d)
        .map(|k| {
            let t = Float::with_val(p, &two_pi * k as u32) / d as u32 + Float::with_val(p, 0.4);
            Complex::from_polar(&r0, &t)
        })
        .collect();
    let eps = tiny(p, 8);
    for _ in 0..2000 {
        let mut worst = Float::new(p);
        for k in 0..d {
            let (v, dv) = horner(c, &z[k]);
            if v.is_zero() {
                continue;
            }
            let Some(ratio) = v.div(&dv) else { continue };
            let mut s = Complex::zero(p);
            for j in 0..d {
                if j != k {
                    if let Some(w) = z[k].sub(&z[j]).inv() {
                        s = s.add(&w);
                    }
                }
            }
            let den = Complex::one(p).sub(&ratio.mul(&s));
            let w = ratio.div(&den).unwrap_or(ratio);
            let zk = z[k].abs();
            let rel = if zk.is_zero() { w.abs() } else { Float::with_val(p, w.abs() / &zk) };
            if rel > worst {
                worst = rel;
            }
            z[k] = z[k].sub(&w);
        }
        if worst <= eps {
            return Ok(z);
        }
    }
    Err(AsymptoticsError::NoConvergence)
}

/// All roots of `Σ c_k z^k` with residual certification.
pub fn polynomial_roots(coeffs: &[Complex]) -> Result<CrestRoots, AsymptoticsError> {
    let mut c = coeffs.to_vec();
    while c.last().map_or(false, |x| x.is_zero()) {
        c.pop();
    }
    if c.is_empty() {
        return Err(AsymptoticsError::ZeroCrest);
    }
    let p = c[0].prec();
    let m0 = c.iter().take_while(|x| x.is_zero()).count();
    if m0 > 0 {
        return Ok(CrestRoots {
            roots: vec![Complex::zero(p); m0],
            radius: Some(Float::new(p)),
            root_at_infinity: false,
            zero_multiplicity: m0,
            max_residual: 0.0,
            certified: true,
            ill_conditioned: m0 > 1,
        });
    }
    if c.len() == 1 {
        return Ok(CrestRoots {
            roots: Vec::new(),
            radius: None,
            root_at_infinity: true,
            zero_multiplicity: 0,
            max_residual: 0.0,
            certified: true,
            ill_conditioned: false,
        });
    }
    let mut roots = aberth(&c)?;
    order_roots(&mut roots);
    let mut max_res = 0f64;
    let bound = tiny(p, 16);
    let mut certified = true;
    for z in &roots {
        let (v, _) = horner(&c, z);
        let norm = eval_norm(&c, z);
        let r = Float::with_val(p, v.abs() / &norm);
        if r > bound {
            certified = false;
        }
        max_res = max_res.max(r.to_f64());
    }
    let sep = tiny(p, p as i32 / 2);
    let mut ill = false;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let scale = roots[i].abs().max(&Float::with_val(p, 1));
            if roots[i].sub(&roots[j]).abs() <= Float::with_val(p, &scale * &sep) {
                ill = true;
            }
        }
    }
    let radius = roots.iter().map(|z| z.abs()).min_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(CrestRoots { roots, radius, root_at_infinity: false, zero_multiplicity: 0, max_residual: max_res, certified, ill_conditioned: ill })
}

/// `C(z, t₀)` numerically, coefficients low degree first.
pub fn crest_numeric(crest: &CrestPolynomial, nf: &NumericField, t0: &Complex) -> Result<Vec<Complex>, AsymptoticsError> {
    let deg = crest.degree().unwrap_or(0) as usize;
    let mut v = vec![nf.zero(); deg + 1];
    for t in &crest.terms {
        let w = nf.eval(&t.coeff)?.mul(&nf.q_pow_rational(&t.q_exp)).mul(&t0.powi(t.t_power as i64).unwrap_or_else(|| nf.one()));
        v[t.a as usize] = v[t.a as usize].add(&w);
    }
    Ok(v)
}

pub fn crest_roots(crest: &CrestPolynomial, nf: &NumericField, f0: &Complex) -> Result<CrestRoots, AsymptoticsError> {
    polynomial_roots(&crest_numeric(crest, nf, f0)?)
}

/// q-Gevrey order `2H`, in the equation's own base and in a second base
/// `q' = q^{base_ratio}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GevreyOrder {
    pub order: Rational,
    pub order_in_base: Rational,
    pub base_ratio: Rational,
    /// The order is the smallest one (sign condition holds).
    pub smallest: bool,
}

pub fn gevrey_order(report: &StructureReport, sign_condition: bool, base_ratio: &Rational) -> Result<GevreyOrder, AsymptoticsError> {
    match &report.classification {
        Some(Classification::DivergentCandidate { height, .. }) => {
            let order = Rational::from(height * 2);
            Ok(GevreyOrder { order_in_base: Rational::from(&order / base_ratio), order, base_ratio: base_ratio.clone(), smallest: sign_condition })
        }
        Some(c) => Err(AsymptoticsError::NotApplicable(format!("classification {}", c.label()))),
        None => Err(AsymptoticsError::NotApplicable("equation not reduced".into())),
    }
}

/// `U_n = -Σ_j C_j g_{n-j}` for the normalized coefficients `g`.
pub fn u_series<R: CoeffRing>(ring: &R, c: &[R::E], g: &[R::E]) -> Vec<R::E> {
    (0..g.len())
        .map(|n| {
            let mut acc = ring.zero();
            for (j, cj) in c.iter().enumerate().take(n + 1) {
                acc = ring.add(&acc, &ring.mul(cj, &g[n - j]));
            }
            ring.neg(&acc)
        })
        .collect()
}

/// `q^{d_n} U_n = -Σ_{A ∈ crest} r_A s(A) f₀^{ℓ-1} q^{α_ℓ(n-a)} f_{n-a}`,
/// computed from the unnormalized coefficients `f`. All exponents are
/// integers, so this works in exact arithmetic.
pub fn u_series_unweighted<R: CoeffRing>(ring: &R, p: &QPolynomial, f: &[R::E]) -> Result<Vec<R::E>, AsymptoticsError> {
    let (q, _) = extract(p)?;
    let prof = structure::height_profile(&q)?;
    let f0 = f.first().cloned().unwrap_or_else(|| ring.zero());
    let mut crest = Vec::new();
    for a in q.iter().filter(|a| prof.crest.contains(&a.key)) {
        let mut c = ring.mul(&ring.embed(&a.r)?, &ring.embed(&Scalar::from_int(a.scope() as i64))?);
        for _ in 1..a.key.ell() {
            c = ring.mul(&c, &f0);
        }
        crest.push((a.a() as usize, a.top() as i64, c));
    }
    Ok((0..f.len())
        .map(|n| {
            let mut acc = ring.zero();
            for (a, al, c) in &crest {
                if *a <= n {
                    let t = ring.mul(&ring.mul(c, &ring.q_pow(al * (n - a) as i64)), &f[n - a]);
                    acc = ring.add(&acc, &t);
                }
            }
            ring.neg(&acc)
        })
        .collect())
}

/// All nonzero terms share one sign (reals only) and at least one is nonzero.
pub fn single_sign(v: &[Scalar]) -> bool {
    let mut sign = 0;
    for x in v.iter().filter(|x| !x.is_zero()) {
        let Some(g) = x.as_grat() else { return false };
        if !g.is_real() {
            return false;
        }
        let s = if g.re.cmp0().is_gt() { 1 } else { -1 };
        if sign != 0 && s != sign {
            return false;
        }
        sign = s;
    }
    sign != 0
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Analytic,
    Empirical,
}

#[derive(Clone, Debug)]
pub struct DominantRoot {
    pub zeta: Complex,
    pub derivative: Complex,
    /// `U(ζ)` by partial sums.
    pub u_value: Complex,
    /// Estimated truncation error of `u_value`.
    pub u_tail: f64,
    /// Coefficient `K_ζ` in `g_n ≈ Σ K_ζ ζ^{-n}`.
    pub residue: Complex,
}

#[derive(Clone, Debug)]
pub struct AsymptoticLaw {
    pub height: Rational,
    pub co_height: u32,
    pub gevrey: Rational,
    pub roots: CrestRoots,
    pub dominant: Vec<DominantRoot>,
    /// Reference root: `f_n ≈ c_{n mod period} q^{d_n} ζ₀^{-n}`.
    pub zeta0: Complex,
    pub period: usize,
    /// Dominant roots are `ζ₀ e^{2πik/period}`.
    pub equally_spaced: bool,
    pub constants: Vec<Complex>,
    pub validity: Validity,
    pub theta: Rational,
}

impl AsymptoticLaw {
    /// Predicted `g_n`.
    pub fn predict_g(&self, n: usize) -> Complex {
        let p = self.zeta0.prec();
        let mut acc = Complex::zero(p);
        for d in &self.dominant {
            acc = acc.add(&d.residue.mul(&d.zeta.powi(-(n as i64)).unwrap_or_else(|| Complex::zero(p))));
        }
        acc
    }

    pub fn kit(&self) -> WeightKit {
        WeightKit::new(self.height.clone(), self.co_height)
    }

    /// Relative gaps `|g_n - prediction_n| / |prediction_n|`.
    pub fn prediction_residuals(&self, g: &[Complex]) -> Vec<f64> {
        g.iter()
            .enumerate()
            .map(|(n, x)| {
                let pr = self.predict_g(n);
                if pr.is_zero() {
                    f64::NAN
                } else {
                    2f64.powf(x.sub(&pr).log2_abs() - pr.log2_abs())
                }
            })
            .collect()
    }

    pub fn to_json(&self, digits: usize) -> Value {
        let cj = |z: &Complex| {
            let (re, im) = z.to_decimal(digits);
            json!({"re": re, "im": im})
        };
        json!({
            "height": self.height.to_string(),
            "co_height": self.co_height,
            "gevrey_order": self.gevrey.to_string(),
            "radius": self.roots.radius.as_ref().map(|r| r.to_string_radix(10, Some(digits))),
            "root_residual": self.roots.max_residual,
            "certified": self.roots.certified,
            "ill_conditioned": self.roots.ill_conditioned,
            "roots": self.roots.roots.iter().map(cj).collect::<Vec<_>>(),
            "dominant": self.dominant.iter().map(|d| json!({
                "zeta": cj(&d.zeta), "u_value": cj(&d.u_value), "u_tail": d.u_tail, "residue": cj(&d.residue),
            })).collect::<Vec<_>>(),
            "zeta0": cj(&self.zeta0),
            "period": self.period,
            "equally_spaced": self.equally_spaced,
            "constants": self.constants.iter().map(cj).collect::<Vec<_>>(),
            "validity": match self.validity { Validity::Analytic => "Analytic", Validity::Empirical => "Empirical" },
            "theta": self.theta.to_string(),
            "precision_bits": self.zeta0.prec(),
        })
    }
}

/// `min(2H, min_{A ∉ crest} (2Ha - α_ℓ), 1)`.
pub fn theta_heuristic(p: &QPolynomial) -> Result<Rational, AsymptoticsError> {
    let (q, _) = extract(p)?;
    let prof = structure::height_profile(&q)?;
    let h2 = Rational::from(&prof.height * 2);
    let mut t = if h2 < 1 { h2.clone() } else { Rational::from(1) };
    for a in q.iter().filter(|a| !prof.crest.contains(&a.key)) {
        let v = Rational::from(&h2 * a.a()) - a.top();
        if v < t {
            t = v;
        }
    }
    Ok(t)
}

/// `Σ_{n≤N} U_n ζ^n` and a tail estimate from the geometric decay of the
/// last terms.
fn partial_sum(u: &[Complex], zeta: &Complex) -> (Complex, f64) {
    let p = zeta.prec();
    let mut acc = Complex::zero(p);
    let mut pw = Complex::one(p);
    let mut logs = Vec::with_capacity(u.len());
    for x in u {
        let t = x.mul(&pw);
        logs.push(t.log2_abs());
        acc = acc.add(&t);
        pw = pw.mul(zeta);
    }
    let n = logs.len();
    let w = (n / 4).max(2).min(n);
    let last = logs[n - 1].max(logs[n.saturating_sub(2)]);
    let tail = if n >= 2 * w {
        let a = logs[n - 2 * w..n - w].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let b = logs[n - w..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let rate = (b - a) / w as f64;
        if rate < 0.0 && last.is_finite() {
            let r = 2f64.powf(rate);
            2f64.powf(last) * r / (1.0 - r)
        } else if last.is_finite() {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        f64::INFINITY
    };
    let scale = acc.log2_abs();
    (acc, if scale.is_finite() { tail / 2f64.powf(scale) } else { tail })
}

/// Analytic law from singularity analysis of `g = -U/C` at the crest roots
/// of minimal modulus. `p` must be reduced with `α(Q₀) = 0` and `g` its
/// normalized coefficients.
pub fn asymptotic_law(p: &QPolynomial, nf: &NumericField, g: &[Complex]) -> Result<AsymptoticLaw, AsymptoticsError> {
    match structure::classify(p)? {
        Classification::DivergentCandidate { .. } => {}
        c => return Err(AsymptoticsError::NotApplicable(format!("classification {}", c.label()))),
    }
    if g.is_empty() {
        return Err(AsymptoticsError::InsufficientData { need: 1, have: 0 });
    }
    let (prof, crest) = structure::crest_polynomial(p)?;
    let f0 = g[0].clone();
    let c = crest_numeric(&crest, nf, &f0)?;
    let roots = polynomial_roots(&c)?;
    if roots.root_at_infinity {
        return Err(AsymptoticsError::DegenerateCrest);
    }
    if roots.zero_multiplicity > 0 {
        return Err(AsymptoticsError::Unsupported("crest polynomial vanishes at z = 0".into()));
    }
    let prec = nf.prec;
    let dom = roots.dominant();
    let dc: Vec<Complex> = c.iter().enumerate().skip(1).map(|(k, x)| x.mul(&Complex::from_f64(k as f64, 0.0, prec))).collect();
    let u = u_series(nf, &c, g);
    let mut dominant = Vec::new();
    for z in &dom {
        let (dv, _) = horner(&dc, z);
        let scale = eval_norm(&dc, z);
        if dv.abs() <= Float::with_val(prec, &scale * tiny(prec, prec as i32 / 2)) {
            return Err(AsymptoticsError::Unsupported("non-simple dominant root".into()));
        }
        let (uz, tail) = partial_sum(&u, z);
        let residue = uz.div(&dv.mul(z)).ok_or(AsymptoticsError::DegenerateCrest)?;
        dominant.push(DominantRoot { zeta: z.clone(), derivative: dv, u_value: uz, u_tail: tail, residue });
    }
    // reference root: principal branch for a binomial crest, else smallest argument
    let nz: Vec<usize> = (0..c.len()).filter(|&k| !c[k].is_zero()).collect();
    let zeta0 = if nz.len() == 2 && nz[0] == 0 {
        let h = nz[1];
        let x = c[h].neg().div(&c[0]).unwrap();
        x.pow_rational(&Rational::from((1, h as i64))).inv().unwrap()
    } else {
        dom[0].clone()
    };
    let period = dom.len().max(1);
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let mut equally_spaced = true;
    let tol = tiny(prec, prec as i32 / 2 + 8);
    for d in &dominant {
        let ratio = d.zeta.div(&zeta0).unwrap();
        let k = Float::with_val(prec, arg_2pi(&ratio) * period as u32) / &two_pi;
        let kr = k.clone().round();
        if Float::with_val(prec, &k - &kr).abs() > Float::with_val(prec, 1e-10) || Float::with_val(prec, ratio.abs() - 1u32).abs() > tol {
            equally_spaced = false;
        }
    }
    let constants = (0..period)
        .map(|m| {
            let mut acc = Complex::zero(prec);
            for d in &dominant {
                let ratio = zeta0.div(&d.zeta).unwrap();
                acc = acc.add(&d.residue.mul(&ratio.powi(m as i64).unwrap()));
            }
            acc
        })
        .collect();
    Ok(AsymptoticLaw {
        gevrey: Rational::from(&prof.height * 2),
        height: prof.height,
        co_height: prof.co_height,
        roots,
        dominant,
        zeta0,
        period,
        equally_spaced,
        constants,
        validity: Validity::Analytic,
        theta: theta_heuristic(p)?,
    })
}

/// Normalized coefficients and the analytic law for a reduced equation
/// with `α(Q₀) = 0`.
pub fn analyze(p: &QPolynomial, nf: &NumericField, n_max: usize, opts: &SolveOptions<Complex>) -> Result<(Vec<Complex>, AsymptoticLaw), AsymptoticsError> {
    let kit = series::kit_for(p)?;
    let g = series::coefficients_normalized(p, n_max, nf, &kit, opts)?.coeffs;
    let law = asymptotic_law(p, nf, &g)?;
    Ok((g, law))
}

/// Divisor `q^{A n² + B n} G^n` of a coefficient sequence.
#[derive(Clone, Debug)]
pub struct LawSkeleton {
    pub base: Complex,
    pub quadratic: Rational,
    pub linear: Rational,
    pub geometric: Complex,
}

impl LawSkeleton {
    pub fn value(&self, n: usize) -> Complex {
        let n = n as i64;
        let e = Rational::from(&self.quadratic * Rational::from(n * n)) + Rational::from(&self.linear * n);
        self.base.pow_rational(&e).mul(&self.geometric.powi(n).unwrap())
    }

    /// `x_n / skeleton(n)`.
    pub fn normalize(&self, f: &[Complex]) -> Vec<Complex> {
        f.iter().enumerate().map(|(n, x)| x.div(&self.value(n)).unwrap()).collect()
    }
}

/// Per-residue estimates `ĉ_m` from a normalized sequence.
#[derive(Clone, Debug)]
pub struct EmpiricalConstants {
    pub period: usize,
    pub estimates: Vec<Complex>,
    /// Index at which each estimate was read.
    pub taken_at: Vec<usize>,
    /// `(n, |x_n - x_{n-period}| / |x_n|)` per residue.
    pub changes: Vec<Vec<(usize, f64)>>,
    pub tolerance: f64,
    pub validates: bool,
}

fn rel_gap(a: &Complex, b: &Complex) -> f64 {
    if b.is_zero() {
        return if a.is_zero() { 0.0 } else { f64::INFINITY };
    }
    2f64.powf(a.sub(b).log2_abs() - b.log2_abs())
}

pub fn empirical_constants(x: &[Complex], period: usize, tolerance: f64) -> Result<EmpiricalConstants, AsymptoticsError> {
    let need = 4 * period + 40;
    if period == 0 || x.len() < need {
        return Err(AsymptoticsError::InsufficientData { need, have: x.len() });
    }
    let n = x.len();
    let mut estimates = Vec::with_capacity(period);
    let mut taken_at = Vec::with_capacity(period);
    let mut changes = vec![Vec::new(); period];
    for m in 0..period {
        let last = m + (n - 1 - m) / period * period;
        estimates.push(x[last].clone());
        taken_at.push(last);
        let mut k = m + period;
        while k < n {
            changes[m].push((k, rel_gap(&x[k - period], &x[k])));
            k += period;
        }
    }
    let validates = (0..period).all(|m| {
        if estimates[m].is_zero() {
            return true;
        }
        changes[m].iter().rev().take(2).all(|(_, c)| *c <= tolerance)
    });
    Ok(EmpiricalConstants { period, estimates, taken_at, changes, tolerance, validates })
}

impl EmpiricalConstants {
    /// Smallest `n₀` such that every `x_n` with `n ≥ n₀` lies within
    /// `tolerance` (relative) of its residue's estimate, ignoring residues
    /// whose estimate has modulus at most `floor`.
    pub fn stable_from(&self, x: &[Complex], floor: f64) -> usize {
        let fl = floor.log2();
        let mut n0 = 0;
        for (n, v) in x.iter().enumerate() {
            let m = n % self.period;
            let e = &self.estimates[m];
            if e.log2_abs() <= fl {
                continue;
            }
            if rel_gap(v, e) >= self.tolerance {
                n0 = n + 1;
            }
        }
        n0
    }
}

/// Rows `n, re, im, log10|x|, prediction re, prediction im, relative residual`.
pub fn csv(x: &[Complex], prediction: Option<&[Complex]>, digits: usize) -> String {
    let mut out = String::from("n,re,im,log10_abs,prediction_re,prediction_im,residual\n");
    for (n, v) in x.iter().enumerate() {
        let (re, im) = v.to_decimal(digits);
        let l = v.log2_abs() * std::f64::consts::LOG10_2;
        let (pre, pim, res) = match prediction.and_then(|p| p.get(n)) {
            Some(p) => {
                let (a, b) = p.to_decimal(digits);
                (a, b, format!("{:e}", rel_gap(v, p)))
            }
            None => (String::new(), String::new(), String::new()),
        };
        out.push_str(&format!("{n},{re},{im},{l},{pre},{pim},{res}\n"));
    }
    out
}

/// [`u_series_unweighted`] in exact arithmetic.
pub fn exact_u_series(p: &QPolynomial, f: &[Scalar]) -> Result<Vec<Scalar>, AsymptoticsError> {
    let ring = series::ExactRing { field: p.field().clone() };
    u_series_unweighted(&ring, p, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_polynomial;
    use crate::scalar::FieldDescriptor;

    fn nf(q: i64, prec: u32) -> (FieldDescriptor, NumericField) {
        let fd = FieldDescriptor::new(1);
        let nf = NumericField::real(&fd, &Rational::from(q), prec).unwrap();
        (fd, nf)
    }

    #[test]
    fn pochhammer_basics() {
        let p = 128;
        let a = Complex::from_f64(0.5, 0.0, p);
        let v = qpochhammer(&a, &a, 3);
        let want = 0.5 * 0.75 * 0.875;
        assert!((v.re.to_f64() - want).abs() < 1e-15);
        let inf = qpochhammer_inf(&a, &a);
        assert!((inf.re.to_f64() - 0.288_788_095_086_602_4).abs() < 1e-15);
    }

    #[test]
    fn drake_roots() {
        let (fd, nf) = nf(2, 128);
        let p = parse_polynomial("-f(z) + 1 + z*f(z) + q*z^2*f(z)*f(q*z)", &fd).unwrap();
        let (_, crest) = structure::crest_polynomial(&p).unwrap();
        let r = crest_roots(&crest, &nf, &nf.one()).unwrap();
        assert!(r.certified);
        assert_eq!(r.roots.len(), 2);
        let want = 2f64.powf(-0.5);
        assert!((r.roots[0].re.to_f64() - want).abs() < 1e-15);
        assert!((r.roots[1].re.to_f64() + want).abs() < 1e-15);
        assert_eq!(r.dominant().len(), 2);
    }

    #[test]
    fn constant_crest_has_root_at_infinity() {
        let p = 64;
        let r = polynomial_roots(&[Complex::from_f64(3.0, 0.0, p)]).unwrap();
        assert!(r.root_at_infinity && r.radius.is_none());
        let r = polynomial_roots(&[Complex::zero(p), Complex::one(p)]).unwrap();
        assert!(r.radius.unwrap().is_zero());
        assert_eq!(polynomial_roots(&[Complex::zero(p)]).unwrap_err(), AsymptoticsError::ZeroCrest);
    }

    #[test]
    fn drake_law_matches_empirical() {
        let (fd, nf) = nf(2, 192);
        let p = parse_polynomial("-f(z) + 1 + z*f(z) + q*z^2*f(z)*f(q*z)", &fd).unwrap();
        let (g, law) = analyze(&p, &nf, 120, &SolveOptions::default()).unwrap();
        assert_eq!(law.period, 2);
        assert!(law.equally_spaced);
        // g_n ζ₀^n approaches c_{n mod 2}
        for n in [118usize, 119] {
            let x = g[n].mul(&law.zeta0.powi(n as i64).unwrap());
            assert!(rel_gap(&x, &law.constants[n % 2]) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn u_series_of_zero_solution_vanishes() {
        let (fd, nf) = nf(2, 64);
        let p = parse_polynomial("-f(z) + z*f(q*z)", &fd).unwrap();
        let s = series::coefficients_numeric(&p, 10, &nf, &SolveOptions::default()).unwrap();
        let u = u_series_unweighted(&nf, &p, &s.coeffs).unwrap();
        assert!(u.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn empirical_needs_data() {
        let x = vec![Complex::one(64); 10];
        assert!(matches!(empirical_constants(&x, 1, 1e-6), Err(AsymptoticsError::InsufficientData { .. })));
        let z = vec![Complex::zero(64); 50];
        let e = empirical_constants(&z, 2, 1e-6).unwrap();
        assert!(e.estimates.iter().all(|c| c.is_zero()) && e.validates);
    }
}
