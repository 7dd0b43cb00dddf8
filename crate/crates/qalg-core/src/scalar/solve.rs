//! Exact roots of univariate polynomials with scalar coefficients.

use super::gauss::rational_square_part;
use super::{field_sqrt, FieldDescriptor, GRat, RatFunc, Scalar, UPoly};
use rug::{Integer, Rational};

/// A root together with the field it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: Scalar,
    pub multiplicity: usize,
    pub field: FieldDescriptor,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Roots {
    pub roots: Vec<Root>,
    /// Remaining factor (coefficients low degree first) with no exact roots
    /// found; empty when everything was resolved.
    pub unresolved: Vec<Scalar>,
}

fn trim(mut p: Vec<Scalar>) -> Vec<Scalar> {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

fn eval(p: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for c in p.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

/// Divide by `(c - x)`; the caller guarantees `x` is a root.
fn deflate(p: &[Scalar], x: &Scalar) -> Vec<Scalar> {
    let n = p.len() - 1;
    let mut q = vec![Scalar::zero(); n];
    let mut carry = Scalar::zero();
    for k in (1..=n).rev() {
        carry = &p[k] + &(&carry * x);
        q[k - 1] = carry.clone();
    }
    q
}

fn small_divisors(n: &Integer, cap: u64) -> Vec<Integer> {
    let n = Integer::from(n.abs_ref());
    if n == 0 {
        return vec![Integer::from(1)];
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d <= cap && Integer::from(d) * Integer::from(d) <= n {
        if n.is_divisible_u(d as u32) {
            out.push(Integer::from(d));
            let co = Integer::from(&n / d);
            if co != d {
                out.push(co);
            }
        }
        d += 1;
    }
    out
}

/// Candidate linear-factor roots: `0, ±1, ±i`, plus rational-root-theorem
/// candidates when every coefficient is a rational constant.
fn candidates(p: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::one(), Scalar::from_int(-1), Scalar::i(), -Scalar::i()];
    let consts: Option<Vec<Rational>> = p
        .iter()
        .map(|c| c.as_grat().filter(|g| g.is_real()).map(|g| g.re))
        .collect();
    if let Some(cs) = consts {
        let mut l = Integer::from(1);
        for c in &cs {
            l.lcm_mut(c.denom());
        }
        let ints: Vec<Integer> = cs.iter().map(|c| Integer::from(c.numer() * Integer::from(&l / c.denom()))).collect();
        let lead = ints.last().unwrap();
        let tail = ints.iter().find(|x| **x != 0).unwrap();
        if tail.significant_bits() <= 64 && lead.significant_bits() <= 64 {
            for a in small_divisors(tail, 10_000) {
                for b in small_divisors(lead, 10_000) {
                    let r = Rational::from((a.clone(), b));
                    for s in [r.clone(), -r] {
                        let v = Scalar::from_rational(s);
                        if !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Square root of `d` (no ρ-component), adjoining `ρ` when needed.
/// `ρ` is normalised so that `ρ²` has square-free rational content.
fn sqrt_with_extension(d: &Scalar, fd: &FieldDescriptor, allow_extension: bool) -> Option<(Scalar, FieldDescriptor)> {
    if let Some(s) = field_sqrt(d) {
        return Some((s, fd.clone()));
    }
    if !allow_extension || fd.ext.is_some() || !d.rho_part().is_zero() {
        return None;
    }
    let r = d.rational_part();
    // d = num/den = (num·den)/den²
    let d0 = r.num().mul(r.den());
    let content = d0.rational_content();
    let s = rational_square_part(&content);
    let s2 = Rational::from(&s * &s);
    let core = d0.scale(&GRat::from_rational(Rational::from(1) / s2));
    let datum = Scalar::from_ratfunc(RatFunc::from_poly(core));
    let (nfd, rho) = match fd.adjoin_sqrt(&datum).ok()? {
        Ok(v) => v,
        Err(root) => return Some((&root * &Scalar::from_ratfunc(scale_den(r.den(), &s)?), fd.clone())),
    };
    let factor = Scalar::from_ratfunc(scale_den(r.den(), &s)?);
    Some((&rho * &factor, nfd))
}

/// `s / den` as a rational function.
fn scale_den(den: &UPoly, s: &Rational) -> Option<RatFunc> {
    RatFunc::new(UPoly::constant(GRat::from_rational(s.clone())), den.clone())
}

/// Roots of `Σ p[k] c^k` over the field of `fd`.
///
/// Roots come from factoring out `c^m`, linear factors found among a small
/// candidate set, and a final quadratic factor (possibly through one new
/// square root when `allow_extension` is set). Whatever remains is returned
/// as `unresolved`.
pub fn solve_univariate(p: &[Scalar], fd: &FieldDescriptor, allow_extension: bool) -> Roots {
    let mut p = trim(p.to_vec());
    assert!(!p.is_empty(), "zero polynomial");
    let mut out = Roots::default();
    let m = p.iter().take_while(|c| c.is_zero()).count();
    if m > 0 {
        out.roots.push(Root { value: Scalar::zero(), multiplicity: m, field: fd.clone() });
        p.drain(..m);
    }
    let cands = candidates(&p);
    loop {
        let deg = p.len() - 1;
        if deg == 0 {
            break;
        }
        if deg == 1 {
            let r = -(&p[0] / &p[1]);
            push_root(&mut out, r, fd);
            break;
        }
        if let Some(pos) = cands.iter().position(|x| eval(&p, x).is_zero()) {
            let x = cands[pos].clone();
            p = deflate(&p, &x);
            push_root(&mut out, x, fd);
            continue;
        }
        if deg == 2 {
            let b2a = &p[1] / &(&p[2] * &Scalar::from_int(2));
            let disc = &(&b2a * &b2a) - &(&p[0] / &p[2]);
            if let Some((s, nfd)) = sqrt_with_extension(&disc, fd, allow_extension) {
                let r1 = &(-&b2a) + &s;
                let r2 = &(-&b2a) - &s;
                if r1 == r2 {
                    out.roots.push(Root { value: r1, multiplicity: 2, field: nfd });
                } else {
                    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
                    out.roots.push(Root { value: lo, multiplicity: 1, field: nfd.clone() });
                    out.roots.push(Root { value: hi, multiplicity: 1, field: nfd });
                }
                break;
            }
        }
        out.unresolved = p.clone();
        break;
    }
    out
}

fn push_root(out: &mut Roots, x: Scalar, fd: &FieldDescriptor) {
    if let Some(r) = out.roots.iter_mut().find(|r| r.value == x) {
        r.multiplicity += 1;
    } else {
        out.roots.push(Root { value: x, multiplicity: 1, field: fd.clone() });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Scalar::from_int(x)).collect()
    }

    #[test]
    fn painleve_constant_equation() {
        let fd = FieldDescriptor::new(1);
        let r = solve_univariate(&ints(&[0, -1, 0, 0, 1]), &fd, false);
        let vals: Vec<_> = r.roots.iter().map(|x| x.value.clone()).collect();
        assert_eq!(vals, vec![Scalar::zero(), Scalar::one()]);
        assert_eq!(r.unresolved, ints(&[1, 1, 1]));
        let r = solve_univariate(&ints(&[0, -1, 0, 0, 1]), &fd, true);
        assert_eq!(r.roots.len(), 4);
        assert!(r.unresolved.is_empty());
        let w = &r.roots[2];
        let ext = w.field.ext.as_ref().unwrap();
        assert_eq!(ext.d, RatFunc::from_int(-3));
        let cube = w.value.pow(3).unwrap();
        assert!(cube.is_one());
    }

    #[test]
    fn linear_root() {
        let fd = FieldDescriptor::new(2);
        let r = solve_univariate(&ints(&[-1, 2]), &fd, false);
        assert_eq!(r.roots[0].value, Scalar::from_frac(1, 2));
    }

    #[test]
    fn cfa_quadratic() {
        let fd = FieldDescriptor::new(2);
        let u = fd.u_pow(1);
        let inner = &(&(&Scalar::from_int(4) * &u.pow(8).unwrap()) - &(&Scalar::from_int(9) * &u.pow(4).unwrap()))
            + &Scalar::from_int(2);
        let c0 = &u.pow(2).unwrap() * &inner;
        let r = solve_univariate(&[c0.clone(), Scalar::zero(), Scalar::one()], &fd, true);
        assert_eq!(r.roots.len(), 2);
        for root in &r.roots {
            let v = &root.value;
            assert!((&(v * v) + &c0).is_zero());
        }
        let ext = r.roots[0].field.ext.as_ref().unwrap();
        assert_eq!(Scalar::from_ratfunc(ext.d.clone()), -c0);
    }
}
