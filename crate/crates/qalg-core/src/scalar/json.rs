//! Text and JSON encodings of scalars.

use super::{FieldDescriptor, GRat, RatFunc, Scalar, UPoly};
use serde_json::{json, Value};

fn grat_text(g: &GRat) -> String {
    if g.im.cmp0().is_eq() {
        return g.re.to_string();
    }
    if g.re.cmp0().is_eq() {
        return if g.im == 1 { "I".into() } else if g.im == -1 { "-I".into() } else { format!("{}*I", g.im) };
    }
    format!("({})", g)
}

fn upow_text(e: i64, fd: &FieldDescriptor) -> String {
    let d = fd.root_order as i64;
    let (base, k) = if e % d == 0 { ("q", e / d) } else { ("u", e) };
    match k {
        1 => base.to_string(),
        _ => format!("{base}^{k}"),
    }
}

/// Terms `(coefficient, exponent of u)` rendered as a signed sum.
fn sum_text(terms: &[(GRat, i64)], fd: &FieldDescriptor) -> String {
    let mut s = String::new();
    for (idx, (c, e)) in terms.iter().enumerate() {
        let neg_real = c.im.cmp0().is_eq() && c.re.cmp0().is_lt();
        let mag = if neg_real { -c } else { c.clone() };
        let body = if *e == 0 {
            grat_text(&mag)
        } else if mag.is_one() {
            upow_text(*e, fd)
        } else {
            format!("{}*{}", grat_text(&mag), upow_text(*e, fd))
        };
        if idx == 0 {
            if neg_real {
                s.push('-');
            }
        } else {
            s.push_str(if neg_real { " - " } else { " + " });
        }
        s.push_str(&body);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn poly_terms(p: &UPoly, shift: i64) -> Vec<(GRat, i64)> {
    p.nonzero_terms().map(|(k, c)| (c.clone(), k as i64 - shift)).collect()
}

/// Rendered rational function plus a flag telling whether it is a single
/// product (safe to multiply without parentheses).
fn ratfunc_text(r: &RatFunc, fd: &FieldDescriptor) -> (String, bool) {
    if r.den().is_monomial() {
        let k = r.den().degree().unwrap() as i64;
        let t = poly_terms(r.num(), k);
        let single = t.len() == 1;
        return (sum_text(&t, fd), single);
    }
    let n = sum_text(&poly_terms(r.num(), 0), fd);
    let d = sum_text(&poly_terms(r.den(), 0), fd);
    let n = if r.num().nonzero_terms().count() > 1 { format!("({n})") } else { n };
    (format!("{n}/({d})"), false)
}

/// Expression text accepted by the equation parser.
pub fn render_scalar(s: &Scalar, fd: &FieldDescriptor) -> String {
    let (a, _) = ratfunc_text(s.rational_part(), fd);
    if s.rho_part().is_zero() {
        return a;
    }
    let (b, single) = ratfunc_text(s.rho_part(), fd);
    let rho = if b == "1" {
        "rho".to_string()
    } else if b == "-1" {
        "-rho".to_string()
    } else if single {
        format!("{b}*rho")
    } else {
        format!("({b})*rho")
    };
    if s.rational_part().is_zero() {
        rho
    } else {
        format!("{a} + {rho}")
    }
}

/// True when the rendering of `s` is a single signed product.
pub fn is_single_term(s: &Scalar) -> bool {
    s.rho_part().is_zero() && s.rational_part().num().nonzero_terms().count() == 1 && s.rational_part().den().is_monomial()
}

fn upoly_json(p: &UPoly) -> Value {
    Value::Array(
        p.nonzero_terms()
            .map(|(k, c)| json!([c.re.to_string(), c.im.to_string(), k]))
            .collect(),
    )
}

pub fn scalar_json(s: &Scalar) -> Value {
    json!({
        "num": upoly_json(s.rational_part().num()),
        "den": upoly_json(s.rational_part().den()),
        "rho_num": upoly_json(s.rho_part().num()),
        "rho_den": upoly_json(s.rho_part().den()),
    })
}

pub fn field_json(fd: &FieldDescriptor) -> Value {
    json!({
        "D": fd.root_order,
        "ext": fd.ext.as_ref().map(|e| scalar_json(&Scalar::from_ratfunc(e.d.clone()))),
        "u_value": fd.u_value.as_ref().map(|v| json!([v.re.to_string(), v.im.to_string()])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_q_powers() {
        let fd = FieldDescriptor::new(2);
        let s = &fd.q_pow(-24) * &Scalar::from_int(36);
        assert_eq!(render_scalar(&s, &fd), "36*q^-24");
        let t = &fd.u_pow(1) - &Scalar::from_int(2);
        assert_eq!(render_scalar(&t, &fd), "-2 + u");
        let w = (&fd.u_pow(6) + &Scalar::one()).inv().unwrap();
        assert_eq!(render_scalar(&w, &fd), "1/(1 + q^3)");
    }

    #[test]
    fn json_shape() {
        let v = scalar_json(&Scalar::from_frac(3, 4));
        assert_eq!(v["num"][0][0], "3/4");
        assert_eq!(v["den"][0][2], 0);
    }
}
