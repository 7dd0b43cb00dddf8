//! Driving an equation to reduced normal form, with a branching trace.

use crate::parser::parse_scalar;
use crate::qpoly::{QPolyError, QPolynomial};
use crate::scalar::json::{field_json, render_scalar, scalar_json};
use crate::scalar::{solve_univariate, Complex, FieldDescriptor, FieldError, GRat, NumericField, Root, Scalar};
use crate::structure::{self, alpha_bounds, extract, is_reduced};
use rug::Rational;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReductionError {
    #[error("more than {0} reduction steps")]
    MaxStepsExceeded(usize),
    #[error("path entry {0:?} is not a root of the constant equation")]
    PathMismatch(String),
    #[error("replay diverged at step {0}")]
    ReplayMismatch(usize),
    #[error("series assembly: {0}")]
    Assembly(String),
    #[error(transparent)]
    QPoly(#[from] QPolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepKind {
    Reduce(Scalar),
    Shift(i32),
    Ramify(u32),
    Deflate(u32),
    Scale(Scalar, Scalar),
    RemoveTrivial { z: u32, y: BTreeMap<i32, u32> },
    /// Field extension by `ρ² = d`.
    Adjoin(Scalar),
    /// `u ↦ value`.
    Specialize(GRat),
}

impl StepKind {
    pub fn label(&self) -> &'static str {
        match self {
            StepKind::Reduce(_) => "reduce",
            StepKind::Shift(_) => "shift",
            StepKind::Ramify(_) => "ramify",
            StepKind::Deflate(_) => "deflate",
            StepKind::Scale(..) => "scale",
            StepKind::RemoveTrivial { .. } => "remove_trivial",
            StepKind::Adjoin(_) => "adjoin",
            StepKind::Specialize(_) => "specialize",
        }
    }

    pub fn to_json(&self, fd: &FieldDescriptor) -> Value {
        let arg = match self {
            StepKind::Reduce(c) => json!({"f0": render_scalar(c, fd), "value": scalar_json(c)}),
            StepKind::Shift(n) => json!({"n": n}),
            StepKind::Ramify(m) | StepKind::Deflate(m) => json!({"m": m}),
            StepKind::Scale(c, l) => json!({"c": render_scalar(c, fd), "lambda": render_scalar(l, fd)}),
            StepKind::RemoveTrivial { z, y } => json!({"z": z, "y": y.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>()}),
            StepKind::Adjoin(d) => json!({"rho_squared": render_scalar(d, fd)}),
            StepKind::Specialize(v) => json!({"u": [v.re.to_string(), v.im.to_string()]}),
        };
        json!({"kind": self.label(), "arg": arg})
    }
}

/// Apply one step.
pub fn apply_step(p: &QPolynomial, kind: &StepKind) -> Result<QPolynomial, ReductionError> {
    Ok(match kind {
        StepKind::Reduce(c) => p.substitute_reduction(c)?,
        StepKind::Shift(n) => p.shift_indices(*n),
        StepKind::Ramify(m) => p.ramify(*m)?,
        StepKind::Deflate(m) => p.deflate(*m)?,
        StepKind::Scale(c, l) => p.scale(c, l)?,
        StepKind::RemoveTrivial { .. } => p.remove_trivial_factors()?.0,
        StepKind::Adjoin(d) => match p.field().adjoin_sqrt(d)? {
            Ok((fd, _)) => p.clone().with_field(fd),
            Err(_) => p.clone(),
        },
        StepKind::Specialize(v) => p.specialize(v)?,
    })
}

#[derive(Clone, Debug)]
pub struct ReductionStep {
    pub kind: StepKind,
    /// Field after the step.
    pub field: FieldDescriptor,
    pub before: String,
    pub after: String,
    pub terms_before: usize,
    pub terms_after: usize,
}

impl ReductionStep {
    pub fn to_json(&self) -> Value {
        json!({
            "step": self.kind.to_json(&self.field),
            "field": field_json(&self.field),
            "before": self.before, "after": self.after,
            "terms_before": self.terms_before, "terms_after": self.terms_after,
        })
    }
}

#[derive(Clone, Debug)]
pub enum LeafKind {
    /// Reduced, `α(Q₀) = 0`; `pre_shift` is the reduced equation before the
    /// final index shift.
    Reduced { poly: QPolynomial, pre_shift: QPolynomial },
    /// The constant equation has a factor without representable roots.
    Unresolved { poly: QPolynomial, factor: Vec<Scalar> },
    Failed { reason: String },
}

#[derive(Clone, Debug)]
pub struct Leaf {
    pub id: usize,
    pub kind: LeafKind,
    /// Every step from the input polynomial to this leaf.
    pub steps: Vec<ReductionStep>,
    /// `f₀, f₁, …` fixed by the reduce steps.
    pub prefix: Vec<Scalar>,
    pub notes: Vec<String>,
}

impl Leaf {
    pub fn poly(&self) -> Option<&QPolynomial> {
        match &self.kind {
            LeafKind::Reduced { poly, .. } | LeafKind::Unresolved { poly, .. } => Some(poly),
            LeafKind::Failed { .. } => None,
        }
    }

    pub fn is_reduced(&self) -> bool {
        matches!(self.kind, LeafKind::Reduced { .. })
    }

    pub fn field(&self) -> Option<&FieldDescriptor> {
        self.poly().map(|p| p.field())
    }

    pub fn step_kinds(&self) -> Vec<StepKind> {
        self.steps.iter().map(|s| s.kind.clone()).collect()
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            LeafKind::Reduced { .. } => "ReducedLeaf",
            LeafKind::Unresolved { .. } => "Unresolved",
            LeafKind::Failed { .. } => "Failed",
        }
    }

    pub fn to_json(&self) -> Value {
        let fd = self.field().cloned().unwrap_or_default();
        let mut v = json!({
            "id": self.id,
            "kind": self.label(),
            "prefix": self.prefix.iter().map(|c| render_scalar(c, &fd)).collect::<Vec<_>>(),
            "notes": self.notes,
        });
        match &self.kind {
            LeafKind::Reduced { poly, .. } => {
                v["digest"] = json!(poly.digest());
                v["terms"] = json!(poly.len());
            }
            LeafKind::Unresolved { factor, .. } => {
                v["factor"] = json!(factor.iter().map(|c| render_scalar(c, &fd)).collect::<Vec<_>>());
            }
            LeafKind::Failed { reason } => v["reason"] = json!(reason),
        }
        v
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Branch(Vec<TraceNode>),
    Leaf(usize),
}

/// A run of steps ending in a branch point or a leaf.
#[derive(Clone, Debug)]
pub struct TraceNode {
    pub steps: Vec<ReductionStep>,
    pub outcome: Outcome,
}

impl TraceNode {
    fn to_json(&self, leaves: &[Leaf]) -> Value {
        let outcome = match &self.outcome {
            Outcome::Branch(ch) => json!({"children": ch.iter().map(|c| c.to_json(leaves)).collect::<Vec<_>>()}),
            Outcome::Leaf(i) => json!({"leaf": leaves[*i].to_json()}),
        };
        json!({"steps": self.steps.iter().map(|s| s.to_json()).collect::<Vec<_>>(), "outcome": outcome})
    }
}

#[derive(Clone, Debug)]
pub struct ReductionTrace {
    pub input: QPolynomial,
    pub tree: TraceNode,
    pub leaves: Vec<Leaf>,
    pub stopping_rule: &'static str,
}

impl ReductionTrace {
    pub fn reduced_leaves(&self) -> impl Iterator<Item = &Leaf> {
        self.leaves.iter().filter(|l| l.is_reduced())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "input": self.input.digest(),
            "stopping_rule": self.stopping_rule,
            "tree": self.tree.to_json(&self.leaves),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BranchPolicy {
    All,
    First,
    /// Roots to take at successive reduce steps, as expressions (`"0"`,
    /// `"rho"`), positions in the sorted root list (`"#1"`) or, in a
    /// specialised field, approximate values (`"~re,im"`); once exhausted,
    /// `First` applies.
    Path(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct ReductionOptions {
    pub max_steps: usize,
    pub max_leaves: usize,
    pub policy: BranchPolicy,
    pub allow_extension: bool,
    /// Keep reducing at `f₀ = 0` while the height strictly drops.
    pub lower_height: bool,
    /// Applied to the input before reduction.
    pub pre: Vec<StepKind>,
    /// Applied to each reduced equation before the final shift.
    pub post: Vec<StepKind>,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions {
            max_steps: 32,
            max_leaves: 64,
            policy: BranchPolicy::All,
            allow_extension: false,
            lower_height: true,
            pre: Vec::new(),
            post: Vec::new(),
        }
    }
}

/// Remove trivial factors and substitute `f = f₀ + z g`.
pub fn reduce_step(p: &QPolynomial, f0: &Scalar) -> Result<QPolynomial, QPolyError> {
    p.substitute_reduction(f0)?.remove_trivial_factors().map(|x| x.0)
}

struct Explorer<'a> {
    opts: &'a ReductionOptions,
    leaves: Vec<Leaf>,
}

#[derive(Clone)]
struct State {
    poly: QPolynomial,
    steps: Vec<ReductionStep>,
    prefix: Vec<Scalar>,
    path_pos: usize,
    notes: Vec<String>,
}

impl State {
    fn push(&mut self, kind: StepKind) -> Result<(), ReductionError> {
        let next = apply_step(&self.poly, &kind)?;
        self.steps.push(ReductionStep {
            kind,
            field: next.field().clone(),
            before: self.poly.digest(),
            after: next.digest(),
            terms_before: self.poly.len(),
            terms_after: next.len(),
        });
        self.poly = next;
        Ok(())
    }

    fn remove_trivial(&mut self) -> Result<(), ReductionError> {
        let (_, removed) = self.poly.remove_trivial_factors()?;
        if !removed.is_trivial() {
            self.push(StepKind::RemoveTrivial { z: removed.z, y: removed.y })?;
        }
        Ok(())
    }

    fn reduce_with(&mut self, root: &Scalar, field: &FieldDescriptor) -> Result<(), ReductionError> {
        if field != self.poly.field() {
            let d = field.ext.as_ref().map(|e| Scalar::from_ratfunc(e.d.clone())).expect("extended field");
            self.push(StepKind::Adjoin(d))?;
        }
        self.push(StepKind::Reduce(root.clone()))?;
        self.prefix.push(root.clone());
        Ok(())
    }
}

fn normalized_height(p: &QPolynomial) -> Option<Rational> {
    if !is_reduced(p) {
        return None;
    }
    let (q, _) = extract(p).ok()?;
    let ab = alpha_bounds(&q);
    ab.qplus?;
    let (pn, _) = structure::normalize(p).ok()?;
    let (qn, _) = extract(&pn).ok()?;
    structure::height_profile(&qn).ok().map(|h| h.height)
}

impl Explorer<'_> {
    fn leaf(&mut self, st: State, kind: LeafKind) -> TraceNode {
        let id = self.leaves.len();
        let steps = st.steps.clone();
        self.leaves.push(Leaf { id, kind, steps: st.steps, prefix: st.prefix, notes: st.notes });
        TraceNode { steps, outcome: Outcome::Leaf(id) }
    }

    fn fail(&mut self, st: State, reason: String) -> TraceNode {
        self.leaf(st, LeafKind::Failed { reason })
    }

    fn path(&self) -> &[String] {
        match &self.opts.policy {
            BranchPolicy::Path(p) => p,
            _ => &[],
        }
    }

    /// Steps of the returned node are those added after `base` steps.
    fn explore(&mut self, mut st: State, base: usize) -> TraceNode {
        let mut node = match self.run(&mut st) {
            Ok(Some(children)) => {
                let mut kids = Vec::new();
                let n0 = st.steps.len();
                for (child, unresolved) in children {
                    kids.push(match unresolved {
                        None => self.explore(child, n0),
                        Some(factor) => {
                            let poly = child.poly.clone();
                            let mut n = self.leaf(child, LeafKind::Unresolved { poly, factor });
                            n.steps.drain(..n0);
                            n
                        }
                    });
                }
                TraceNode { steps: st.steps.clone(), outcome: Outcome::Branch(kids) }
            }
            Ok(None) => {
                match self.finish(&mut st) {
                    Ok(pre_shift) => {
                        let poly = st.poly.clone();
                        self.leaf(st, LeafKind::Reduced { poly, pre_shift })
                    }
                    Err(e) => self.fail(st, e.to_string()),
                }
            }
            Err(Stop::Unresolved(factor)) => {
                let poly = st.poly.clone();
                self.leaf(st, LeafKind::Unresolved { poly, factor })
            }
            Err(Stop::Failed(reason)) => self.fail(st, reason),
        };
        node.steps.drain(..base.min(node.steps.len()));
        node
    }
}

enum Stop {
    Unresolved(Vec<Scalar>),
    Failed(String),
}

impl From<ReductionError> for Stop {
    fn from(e: ReductionError) -> Self {
        Stop::Failed(e.to_string())
    }
}

/// Root of a specialised field closest to `re,im`, if within `1e-9`
/// relative distance.
fn nearest_root<'r>(roots: &'r [Root], target: &str) -> Option<&'r Root> {
    let (re, im) = target.split_once(',')?;
    let prec = 128;
    let t = Complex::from_f64(re.trim().parse().ok()?, im.trim().parse().ok()?, prec);
    let scale = t.log2_abs().max(0.0);
    let dist = |r: &Root| -> Option<f64> {
        let u = Complex::from_grat(r.field.u_value.as_ref()?, prec);
        let nf = NumericField::new(&r.field, u.powi(r.field.root_order as i64)?, prec).ok()?;
        Some(nf.eval(&r.value).ok()?.sub(&t).log2_abs() - scale)
    };
    let (best, d) = roots.iter().filter_map(|r| dist(r).map(|d| (r, d))).min_by(|a, b| a.1.total_cmp(&b.1))?;
    (d < -29.0).then_some(best)
}

impl Explorer<'_> {
    /// Reduce until the equation is reduced (`Ok(None)`) or a branch point
    /// is reached (`Ok(Some(children))`).
    fn run(&mut self, st: &mut State) -> Result<Option<Vec<(State, Option<Vec<Scalar>>)>>, Stop> {
        loop {
            st.remove_trivial()?;
            let path_left = st.path_pos < self.path().len();
            if is_reduced(&st.poly) && !path_left {
                if self.opts.lower_height && self.try_lower(st)? {
                    continue;
                }
                return Ok(None);
            }
            if st.prefix.len() >= self.opts.max_steps {
                return Err(ReductionError::MaxStepsExceeded(self.opts.max_steps).into());
            }
            let ce = st.poly.constant_equation();
            if ce.iter().all(|c| c.is_zero()) {
                if path_left {
                    let v = self.path()[st.path_pos].clone();
                    let c = parse_scalar(&v, st.poly.field()).map_err(|e| Stop::Failed(e.to_string()))?;
                    st.path_pos += 1;
                    let fd = st.poly.field().clone();
                    st.reduce_with(&c, &fd)?;
                    continue;
                }
                return Err(Stop::Failed("constant equation vanishes identically".into()));
            }
            if ce.len() == 1 {
                return Err(Stop::Failed("constant equation has no root".into()));
            }
            let roots = solve_univariate(&ce, st.poly.field(), self.opts.allow_extension);
            if path_left {
                let want = self.path()[st.path_pos].clone();
                st.path_pos += 1;
                let pick = if let Some(i) = want.strip_prefix('#') {
                    i.parse::<usize>().ok().and_then(|i| roots.roots.get(i))
                } else if let Some(target) = want.strip_prefix('~') {
                    nearest_root(&roots.roots, target)
                } else {
                    roots.roots.iter().find(|r| parse_scalar(&want, &r.field).map_or(false, |v| v == r.value))
                };
                let Some(root) = pick.cloned() else {
                    return Err(ReductionError::PathMismatch(want).into());
                };
                st.reduce_with(&root.value, &root.field)?;
                continue;
            }
            let mut chosen: Vec<_> = roots.roots.clone();
            if self.opts.policy == BranchPolicy::First || matches!(self.opts.policy, BranchPolicy::Path(_)) {
                chosen.truncate(1);
            }
            let unresolved = !roots.unresolved.is_empty() && self.opts.policy == BranchPolicy::All;
            if chosen.is_empty() {
                return Err(Stop::Unresolved(roots.unresolved));
            }
            if chosen.len() == 1 && !unresolved {
                let r = &chosen[0];
                if r.multiplicity > 1 {
                    st.notes.push(format!("root {} has multiplicity {}", render_scalar(&r.value, &r.field), r.multiplicity));
                }
                st.reduce_with(&r.value, &r.field)?;
                continue;
            }
            let mut kids = Vec::new();
            for r in chosen {
                if self.leaves.len() + kids.len() >= self.opts.max_leaves {
                    st.notes.push("leaf cap reached".into());
                    break;
                }
                let mut c = st.clone();
                c.reduce_with(&r.value, &r.field)?;
                kids.push((c, None));
            }
            if unresolved {
                kids.push((st.clone(), Some(roots.unresolved)));
            }
            return Ok(Some(kids));
        }
    }

    fn try_lower(&mut self, st: &mut State) -> Result<bool, Stop> {
        let ce = st.poly.constant_equation();
        if ce.len() != 2 || !ce[0].is_zero() || ce[1].is_zero() {
            return Ok(false);
        }
        let Some(h0) = normalized_height(&st.poly) else { return Ok(false) };
        let Ok(next) = reduce_step(&st.poly, &Scalar::zero()) else { return Ok(false) };
        match normalized_height(&next) {
            Some(h1) if h1 < h0 => {
                st.notes.push(format!("height lowered from {h0} to {h1} by f0 = 0"));
                let fd = st.poly.field().clone();
                st.reduce_with(&Scalar::zero(), &fd)?;
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn finish(&mut self, st: &mut State) -> Result<QPolynomial, ReductionError> {
        for s in &self.opts.post {
            st.push(s.clone())?;
        }
        let pre = st.poly.clone();
        let (q, _) = extract(&st.poly).map_err(|e| ReductionError::Assembly(e.to_string()))?;
        let a0 = alpha_bounds(&q).q0.unwrap_or(0);
        st.push(StepKind::Shift(-a0))?;
        Ok(pre)
    }
}

/// Explore the reduction tree of `p`.
pub fn reduce_to_normal_form(p: &QPolynomial, opts: &ReductionOptions) -> Result<ReductionTrace, ReductionError> {
    if p.is_zero() {
        return Err(QPolyError::ZeroPolynomial.into());
    }
    let mut st = State { poly: p.clone(), steps: Vec::new(), prefix: Vec::new(), path_pos: 0, notes: Vec::new() };
    for s in &opts.pre {
        st.push(s.clone())?;
    }
    let mut ex = Explorer { opts, leaves: Vec::new() };
    let tree = ex.explore(st, 0);
    Ok(ReductionTrace {
        input: p.clone(),
        tree,
        leaves: ex.leaves,
        stopping_rule: "reduce at f0 = 0 while the normalized height strictly decreases",
    })
}

/// Re-apply `steps` to `p`, checking every intermediate digest.
pub fn replay(p: &QPolynomial, steps: &[ReductionStep]) -> Result<QPolynomial, ReductionError> {
    let mut cur = p.clone();
    for (i, s) in steps.iter().enumerate() {
        if cur.digest() != s.before {
            return Err(ReductionError::ReplayMismatch(i));
        }
        cur = apply_step(&cur, &s.kind)?;
        if cur.digest() != s.after {
            return Err(ReductionError::ReplayMismatch(i));
        }
    }
    Ok(cur)
}

/// Cumulative stretch from the field before step `i` to the final field.
fn stretches(input: &FieldDescriptor, steps: &[ReductionStep]) -> Vec<usize> {
    let mut fields = vec![input.clone()];
    fields.extend(steps.iter().map(|s| s.field.clone()));
    let mut out = vec![1usize; steps.len() + 1];
    for i in (0..steps.len()).rev() {
        let s = match steps[i].kind {
            StepKind::Ramify(m) if !fields[i].is_specialized() => QPolynomial::ramified_field(&fields[i], m).1 as usize,
            _ => 1,
        };
        out[i] = out[i + 1] * s;
    }
    out
}

/// Series of the input equation from a leaf series `g`, exactly, with
/// coefficients in the leaf field. `input_field` is the field of the
/// equation the steps start from.
pub fn assemble_exact(input_field: &FieldDescriptor, steps: &[ReductionStep], g: &[Scalar]) -> Result<Vec<Scalar>, ReductionError> {
    let leaf = steps.last().map(|s| s.field.clone()).unwrap_or_else(|| input_field.clone());
    let st = stretches(input_field, steps);
    let mut fields = vec![input_field.clone()];
    fields.extend(steps.iter().map(|s| s.field.clone()));
    let embed = |c: &Scalar, i: usize| c.stretch(st[i], leaf.ext.as_ref());
    let mut f = g.to_vec();
    for (i, s) in steps.iter().enumerate().rev() {
        let fd = &fields[i];
        f = match &s.kind {
            StepKind::Reduce(c) => {
                let mut v = vec![embed(c, i)];
                v.extend(f);
                v
            }
            StepKind::Shift(n) => f
                .iter()
                .enumerate()
                .map(|(k, x)| x * &leaf.u_pow(st[i] as i64 * fd.root_order as i64 * *n as i64 * k as i64))
                .collect(),
            StepKind::Ramify(m) => {
                let m = *m as usize;
                if f.iter().enumerate().any(|(k, x)| k % m != 0 && !x.is_zero()) {
                    return Err(ReductionError::Assembly("ramified series is not a series in z^m".into()));
                }
                f.iter().step_by(m).cloned().collect()
            }
            StepKind::Deflate(m) => {
                let m = *m as usize;
                let mut v = vec![Scalar::zero(); (f.len() - 1) * m + 1];
                for (k, x) in f.iter().enumerate() {
                    v[k * m] = x.clone();
                }
                v
            }
            StepKind::Scale(c, l) => {
                let (c, l) = (embed(c, i), embed(l, i));
                let ci = c.checked_inv()?;
                f.iter().enumerate().map(|(k, x)| Ok(&(x * &l) * &ci.pow(k as i64)?)).collect::<Result<_, FieldError>>()?
            }
            StepKind::RemoveTrivial { .. } | StepKind::Adjoin(_) | StepKind::Specialize(_) => f,
        };
    }
    Ok(f)
}

/// Numeric counterpart of [`assemble_exact`]; `q` is the base of the input
/// equation.
pub fn assemble_numeric(
    input_field: &FieldDescriptor,
    q: &Complex,
    prec: u32,
    steps: &[ReductionStep],
    g: &[Complex],
) -> Result<Vec<Complex>, ReductionError> {
    assemble_numeric_with(input_field, q, prec, steps, g, false)
}

/// [`assemble_numeric`] with the adjoined root evaluated as `-ρ` when
/// `negate_rho` is set.
pub fn assemble_numeric_with(
    input_field: &FieldDescriptor,
    q: &Complex,
    prec: u32,
    steps: &[ReductionStep],
    g: &[Complex],
    negate_rho: bool,
) -> Result<Vec<Complex>, ReductionError> {
    let mut fields = vec![input_field.clone()];
    fields.extend(steps.iter().map(|s| s.field.clone()));
    let qs = q_chain(q, steps);
    let mut f = g.to_vec();
    for (i, s) in steps.iter().enumerate().rev() {
        let mut nf = NumericField::new(&fields[i], qs[i].clone(), prec)?;
        if negate_rho {
            nf.rho = nf.rho.map(|r| r.neg());
        }
        f = match &s.kind {
            StepKind::Reduce(c) => {
                let mut v = vec![nf.eval(c)?];
                v.extend(f);
                v
            }
            StepKind::Shift(n) => f.iter().enumerate().map(|(k, x)| x.mul(&nf.q_pow(*n as i64 * k as i64))).collect(),
            StepKind::Ramify(m) => f.iter().step_by(*m as usize).cloned().collect(),
            StepKind::Deflate(m) => {
                let m = *m as usize;
                let mut v = vec![nf.zero(); (f.len() - 1) * m + 1];
                for (k, x) in f.iter().enumerate() {
                    v[k * m] = x.clone();
                }
                v
            }
            StepKind::Scale(c, l) => {
                let ci = nf.eval(c)?.inv().ok_or(FieldError::DivisionByZero)?;
                let l = nf.eval(l)?;
                f.iter().enumerate().map(|(k, x)| x.mul(&l).mul(&ci.powi(k as i64).unwrap())).collect()
            }
            StepKind::RemoveTrivial { .. } | StepKind::Adjoin(_) | StepKind::Specialize(_) => f,
        };
    }
    Ok(f)
}

/// Value of `q` before each step and after the last one.
pub fn q_chain(q: &Complex, steps: &[ReductionStep]) -> Vec<Complex> {
    let mut qs = vec![q.clone()];
    for s in steps {
        let prev = qs.last().unwrap().clone();
        qs.push(match &s.kind {
            StepKind::Ramify(m) => prev.pow_rational(&Rational::from((1, *m))),
            StepKind::Deflate(m) => prev.powi(*m as i64).unwrap(),
            _ => prev,
        });
    }
    qs
}

/// The input polynomial with coefficients mapped into the leaf field and
/// `q` of the input expressed in the leaf field: returns the mapped
/// polynomial and the exponent `e` with `q_input = u_leaf^e`.
pub fn embed_input(input: &QPolynomial, steps: &[ReductionStep]) -> (QPolynomial, i64) {
    let st = stretches(input.field(), steps);
    let leaf = steps.last().map(|s| s.field.clone()).unwrap_or_else(|| input.field().clone());
    let p = input.map_coeffs(|c| c.stretch(st[0], leaf.ext.as_ref()), leaf.clone());
    (p, st[0] as i64 * input.field().root_order as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_polynomial;

    #[test]
    fn painleve_branches() {
        let fd = FieldDescriptor::new(1);
        let p = parse_polynomial("f(q^-1*z)*f(z)^2*f(q*z) - f(z) + z", &fd).unwrap();
        let t = reduce_to_normal_form(&p, &ReductionOptions::default()).unwrap();
        let kinds: Vec<_> = t.leaves.iter().map(|l| l.label()).collect();
        assert_eq!(kinds, vec!["ReducedLeaf", "ReducedLeaf", "Unresolved"]);
        assert_eq!(t.leaves[0].prefix, vec![Scalar::zero()]);
        assert_eq!(t.leaves[1].prefix, vec![Scalar::one()]);
        let opts = ReductionOptions { allow_extension: true, ..Default::default() };
        let t = reduce_to_normal_form(&p, &opts).unwrap();
        assert_eq!(t.reduced_leaves().count(), 4);
        for l in &t.leaves {
            let out = replay(&p, &l.steps).unwrap();
            assert_eq!(out, *l.poly().unwrap());
        }
    }

    #[test]
    fn reduced_input_gets_single_shift() {
        let fd = FieldDescriptor::new(1);
        let p = parse_polynomial("f(z) + q*z*f(z) - z - q*z^2", &fd).unwrap();
        let t = reduce_to_normal_form(&p, &ReductionOptions::default()).unwrap();
        assert_eq!(t.leaves.len(), 1);
        let kinds = t.leaves[0].step_kinds();
        assert_eq!(kinds, vec![StepKind::Shift(0)]);
    }
}
