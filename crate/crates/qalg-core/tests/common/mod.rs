//! Property checks shared by the property suite and the acceptance gate.
#![allow(dead_code)]

use proptest::prelude::*;
use qalg_core::asymptotics;
use qalg_core::corpus::{self, Job};
use qalg_core::parser::parse_polynomial;
use qalg_core::qpoly::{Format, MonomialKey, QPolynomial};
use qalg_core::scalar::{Complex, FieldDescriptor, NumericField, Scalar};
use qalg_core::series::{self, kit_for, plug_in_residual, SolveOptions};
use qalg_core::structure::{self, Classification};
use rug::Rational;

const PREC: u32 = 160;

#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: i64,
    pub q_power: i64,
    pub a: u32,
    pub shifts: Vec<i32>,
}

pub fn term(max_a: u32, max_ell: usize) -> impl Strategy<Value = Term> {
    (
        prop_oneof![-9i64..=-1, 1i64..=9],
        -2i64..=3,
        0..=max_a,
        prop::collection::vec(-2i32..=3, 0..=max_ell),
    )
        .prop_map(|(coeff, q_power, a, shifts)| Term { coeff, q_power, a, shifts })
}

fn build(terms: &[Term], fd: &FieldDescriptor, a_mult: u32) -> QPolynomial {
    let mut p = QPolynomial::zero(fd.clone());
    for t in terms {
        let c = &Scalar::from_int(t.coeff) * &fd.q_pow(t.q_power);
        p.add_term(MonomialKey::new(t.a * a_mult, t.shifts.clone()), c);
    }
    p
}

pub fn equation(max_a: u32) -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(term(max_a, 3), 1..=6)
}

pub fn series_values(len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, len)
}

fn to_complex(v: &[i64]) -> Vec<Complex> {
    v.iter().map(|&x| Complex::from_f64(x as f64, 0.0, PREC)).collect()
}

fn nf_at(fd: &FieldDescriptor, q: &Complex) -> NumericField {
    NumericField::new(fd, q.clone(), PREC).unwrap()
}

/// `|a - b| ≤ 2^{-PREC+24} · scale` entry by entry.
fn close(a: &[Complex], b: &[Complex], scale: &[Complex]) -> Result<(), String> {
    for (n, ((x, y), s)) in a.iter().zip(b).zip(scale).enumerate() {
        let d = x.sub(y).log2_abs();
        let m = s.log2_abs().max(0.0);
        if d.is_finite() && d > m - PREC as f64 + 24.0 {
            return Err(format!("coefficient {n}: {x} vs {y}"));
        }
    }
    Ok(())
}

fn residual(nf: &NumericField, p: &QPolynomial, f: &[Complex]) -> (Vec<Complex>, Vec<Complex>) {
    plug_in_residual(nf, p, f, 1).unwrap()
}

pub fn canonical_equation() -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(term(5, 3), 1..=8)
}

pub fn shift_identity_cases() -> impl Strategy<Value = (Vec<Term>, Vec<i64>, i32)> {
    (equation(4), series_values(10), -3i32..=3)
}

pub fn check_shift_identity((terms, g, n): (Vec<Term>, Vec<i64>, i32)) -> Result<(), TestCaseError> {
    let fd = FieldDescriptor::new(1);
    let p = build(&terms, &fd, 1);
    let p2 = p.shift_indices(n);
    let nf = nf_at(&fd, &Complex::from_f64(2.0, 0.0, PREC));
    let g = to_complex(&g);
    // f(z) = g(q^n z)
    let f: Vec<Complex> = g.iter().enumerate().map(|(k, x)| x.mul(&nf.q_pow(n as i64 * k as i64))).collect();
    let (r1, m1) = residual(&nf, &p, &f);
    let (r2, _) = residual(&nf, &p2, &g);
    close(&r1, &r2, &m1).map_err(TestCaseError::fail)?;
    Ok(())
}

pub fn reduce_identity_cases() -> impl Strategy<Value = (Vec<Term>, Vec<i64>, i64)> {
    (equation(4), series_values(10), -3i64..=3)
}

pub fn check_reduce_identity((terms, g, c): (Vec<Term>, Vec<i64>, i64)) -> Result<(), TestCaseError> {
    let fd = FieldDescriptor::new(1);
    let mut p = build(&terms, &fd, 1);
    let c = Scalar::from_int(c);
    let e = p.eval_constant_equation(&c);
    p.add_term(MonomialKey::pure(0), e.neg_ref());
    let Ok(p2) = p.substitute_reduction(&c) else { return Ok(()) };
    let nf = nf_at(&fd, &Complex::from_f64(2.0, 0.0, PREC));
    let g = to_complex(&g);
    // f = c + z g
    let mut f = vec![nf.eval(&c).unwrap()];
    f.extend(g.iter().cloned());
    f.truncate(g.len());
    let (r1, m1) = residual(&nf, &p, &f);
    let (r2, _) = residual(&nf, &p2, &g);
    prop_assume!(!r2[0].is_zero());
    let lz = r1.iter().position(|x| x.log2_abs() > -(PREC as f64) / 2.0).unwrap_or(r1.len());
    prop_assert!(lz < r1.len());
    close(&r1[lz..], &r2[..r1.len() - lz], &m1[lz..]).map_err(TestCaseError::fail)?;
        Ok(())
}

pub fn ramify_identity_cases() -> impl Strategy<Value = (Vec<Term>, Vec<i64>, u32)> {
    (equation(3), series_values(6), 2u32..=3)
}

pub fn check_ramify_identity((terms, h, m): (Vec<Term>, Vec<i64>, u32)) -> Result<(), TestCaseError> {
    let fd = FieldDescriptor::new(1);
    let p = build(&terms, &fd, 1);
    let p2 = p.ramify(m).unwrap();
    let q = Complex::from_f64(2.0, 0.0, PREC);
    let q2 = q.pow_rational(&Rational::from((1, m)));
    let nf = nf_at(&fd, &q);
    let nf2 = nf_at(p2.field(), &q2);
    let f = to_complex(&h);
    // g(z) = f(z^m)
    let mut g = vec![Complex::zero(PREC); (f.len() - 1) * m as usize + 1];
    for (k, x) in f.iter().enumerate() {
        g[k * m as usize] = x.clone();
    }
    let (r1, m1) = residual(&nf, &p, &f);
    let (r2, _) = residual(&nf2, &p2, &g);
    let r2s: Vec<Complex> = r2.iter().step_by(m as usize).cloned().collect();
    close(&r1, &r2s, &m1).map_err(TestCaseError::fail)?;
    for (k, x) in r2.iter().enumerate() {
        if k % m as usize != 0 {
            prop_assert!(x.log2_abs() < -(PREC as f64) / 2.0);
        }
    }
    Ok(())
}

pub fn deflate_identity_cases() -> impl Strategy<Value = (Vec<Term>, Vec<i64>, u32)> {
    (equation(2), series_values(6), 2u32..=3)
}

pub fn check_deflate_identity((terms, h, m): (Vec<Term>, Vec<i64>, u32)) -> Result<(), TestCaseError> {
    let fd = FieldDescriptor::new(1);
    let p = build(&terms, &fd, m);
    let p2 = p.deflate(m).unwrap();
    let q = Complex::from_f64(2.0, 0.0, PREC);
    let nf = nf_at(&fd, &q);
    let nf2 = nf_at(p2.field(), &q.powi(m as i64).unwrap());
    let hh = to_complex(&h);
    // g(z) = h(z^m) solves p when h solves p2
    let mut g = vec![Complex::zero(PREC); (hh.len() - 1) * m as usize + 1];
    for (k, x) in hh.iter().enumerate() {
        g[k * m as usize] = x.clone();
    }
    let (r1, m1) = residual(&nf, &p, &g);
    let (r2, _) = residual(&nf2, &p2, &hh);
    let r1s: Vec<Complex> = r1.iter().step_by(m as usize).cloned().collect();
    let m1s: Vec<Complex> = m1.iter().step_by(m as usize).cloned().collect();
    close(&r1s, &r2, &m1s).map_err(TestCaseError::fail)?;
    Ok(())
}

pub fn scale_identity_cases() -> impl Strategy<Value = (Vec<Term>, Vec<i64>, i64, i64)> {
    (equation(4), series_values(10), prop_oneof![-3i64..=-1, 1i64..=3], prop_oneof![-3i64..=-1, 1i64..=3])
}

pub fn check_scale_identity((terms, g, c, l): (Vec<Term>, Vec<i64>, i64, i64)) -> Result<(), TestCaseError> {
    let fd = FieldDescriptor::new(1);
    let p = build(&terms, &fd, 1);
    let (cs, ls) = (Scalar::from_int(c), Scalar::from_int(l));
    let p2 = p.scale(&cs, &ls).unwrap();
    let nf = nf_at(&fd, &Complex::from_f64(2.0, 0.0, PREC));
    let gv = to_complex(&g);
    // f(c z) = λ g(z)
    let cc = Complex::from_f64(c as f64, 0.0, PREC);
    let lc = Complex::from_f64(l as f64, 0.0, PREC);
    let f: Vec<Complex> = gv.iter().enumerate().map(|(k, x)| x.mul(&lc).div(&cc.powi(k as i64).unwrap()).unwrap()).collect();
    let (r1, m1) = residual(&nf, &p, &f);
    let (r2, _) = residual(&nf, &p2, &gv);
    let r1c: Vec<Complex> = r1.iter().enumerate().map(|(k, x)| x.mul(&cc.powi(k as i64).unwrap())).collect();
    let m1c: Vec<Complex> = m1.iter().enumerate().map(|(k, x)| x.mul(&Complex::from_real(cc.powi(k as i64).unwrap().abs()))).collect();
    close(&r1c, &r2, &m1c).map_err(TestCaseError::fail)?;
    Ok(())
}

pub fn crest_invariant_cases() -> impl Strategy<Value = (Vec<Term>,)> {
    (prop::collection::vec(term(4, 3), 1..=5),)
}

pub fn check_crest_invariant((shifting,): (Vec<Term>,)) -> Result<(), TestCaseError> {
    let fd = FieldDescriptor::new(1);
    let mut terms: Vec<Term> = shifting.into_iter().filter(|t| t.a > 0 && !t.shifts.is_empty()).collect();
    prop_assume!(!terms.is_empty());
    for t in terms.iter_mut() {
        for s in t.shifts.iter_mut() {
            *s = s.abs();
        }
    }
    terms.push(Term { coeff: -1, q_power: 0, a: 0, shifts: vec![0] });
    terms.push(Term { coeff: 1, q_power: 0, a: 0, shifts: vec![] });
    let p = build(&terms, &fd, 1);
    let (q, _) = structure::extract(&p).unwrap();
    let Ok(Classification::DivergentCandidate { height, .. }) = structure::classify(&p) else { return Ok(()) };
    let (prof, _) = structure::crest_polynomial(&p).unwrap();
    for f in q.iter().filter(|f| f.is_shifting()) {
        let gap = Rational::from(&height * (2 * f.a() as i64)) - f.top();
        if prof.crest.contains(&f.key) {
            prop_assert_eq!(gap, Rational::new());
        } else {
            prop_assert!(gap > 0, "off-crest factor {} has 2aH - alpha = {}", f.key.tuple_text(), gap);
        }
    }
    Ok(())
}

pub fn parser_round_trip_cases() -> impl Strategy<Value = (Vec<Term>, u32)> {
    (canonical_equation(), 1u32..=3)
}

pub fn check_parser_round_trip((terms, d): (Vec<Term>, u32)) -> Result<(), TestCaseError> {
    let fd = FieldDescriptor::new(d);
    let p = build(&terms, &fd, 1);
    prop_assume!(!p.is_zero());
    for format in [Format::Canonical] {
        let text = p.render(format);
        let back = parse_polynomial(&text, &fd).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&back, &p, "{}", text);
        prop_assert_eq!(back.render(format), text);
    }
    Ok(())
}

/// Closed-form Dmin against brute force on every corpus crest factor; returns the check count.
pub fn dmin_lemma_on_corpus_crest_factors() -> usize {
    let mut checked = 0;
    for entry in corpus::bundled() {
        let cfg = entry.file.config().unwrap();
        let job = Job::new(&cfg, false).unwrap();
        for leaf in job.reduced() {
            let p = leaf.poly().unwrap();
            let Ok(Classification::DivergentCandidate { .. }) = structure::classify(p) else { continue };
            let kit = kit_for(p).unwrap();
            let (q, _) = structure::extract(p).unwrap();
            let prof = structure::height_profile(&q).unwrap();
            for f in q.iter().filter(|f| f.is_shifting() && prof.crest.contains(&f.key)) {
                let key = &f.key;
                for k in 1..=key.ell() {
                    for n in key.a as i64 + k as i64..=20 {
                        let (m, arg) = series::dmin_bruteforce(&kit, key, n, k);
                        assert_eq!(m, kit.dmin_closed_form(key, n, k), "{}: {} k={k} n={n}", entry.id, key.tuple_text());
                        assert!(arg.contains(&kit.dmin_tuple(key, n, k)), "{}: {} k={k} n={n}", entry.id, key.tuple_text());
                        checked += 1;
                    }
                }
            }
        }
    }
    checked
}

/// Ratio-test radius of the normalized series against the smallest crest root modulus.
pub fn q_borel_radius_matches_crest_root() {
    for id in ["drake-b", "gessel"] {
        let cfg = corpus::entry(id).unwrap().file.config().unwrap();
        let job = Job::new(&cfg, false).unwrap();
        let leaf = job.leaf(0).unwrap();
        let p = leaf.poly().unwrap();
        let nf = job.numeric_field(leaf, 192).unwrap();
        let (g, law) = asymptotics::analyze(p, &nf, 200, &SolveOptions::default()).unwrap();
        let r = law.roots.radius.as_ref().unwrap().to_f64();
        let est = series::ratio_radius(&g, 2 * law.period).unwrap();
        assert!(((est - r) / r).abs() <= 0.02, "{id}: ratio {est} vs R {r}");
    }
}

/// Both height routes agree on every divergent corpus leaf; returns the leaf count.
pub fn height_routes_agree_on_corpus() -> usize {
    let mut checked = 0;
    for entry in corpus::bundled() {
        let job = Job::new(&entry.file.config().unwrap(), false).unwrap();
        for leaf in job.reduced() {
            let (q, _) = structure::extract(leaf.poly().unwrap()).unwrap();
            let (Ok(a), Ok(b)) = (structure::height_profile(&q), structure::height_profile_by_index(&q)) else { continue };
            assert_eq!(a, b, "{}", entry.id);
            checked += 1;
        }
    }
    checked
}
