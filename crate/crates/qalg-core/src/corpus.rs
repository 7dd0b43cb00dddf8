//! Equation files, job configuration and the bundled regression corpus.
//!
//! An equation file is a block of `key: value` header lines, a blank line,
//! and the equation expression. Lines starting with `#` are comments.
//! Expectations are header lines of the form
//!
//! ```text
//! expect[1]: height deflate=3 = 1/2 @published
//! expect: constant 0 = 5.2925487081388446 tol 1e-6 @derived
//! ```
//!
//! where the optional bracket selects a reduced leaf (default 0) and the
//! trailing `@origin` is one of `published`, `derived`, `trivial`.

use crate::asymptotics::{self, AsymptoticLaw, LawSkeleton};
use crate::parser::{parse_polynomial, parse_scalar, ParseError};
use crate::qpoly::QPolynomial;
use crate::reduction::{
    self, apply_step, assemble_exact, assemble_numeric_with, BranchPolicy, Leaf, LeafKind, ReductionError, ReductionOptions,
    ReductionTrace, StepKind,
};
use crate::scalar::{Complex, FieldDescriptor, FieldError, GRat, NumericField, Scalar};
use crate::series::{self, SeriesError, SolveOptions, WeightKit};
use crate::structure::{self, Classification, StructureError};
use rug::{Float, Integer, Rational};
use serde_json::{json, Value};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Asymptotics(#[from] asymptotics::AsymptoticsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Published,
    Derived,
    Trivial,
}

impl Origin {
    pub fn label(self) -> &'static str {
        match self {
            Origin::Published => "published",
            Origin::Derived => "derived",
            Origin::Trivial => "trivial",
        }
    }
}

impl FromStr for Origin {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "published" => Ok(Origin::Published),
            "derived" => Ok(Origin::Derived),
            "trivial" => Ok(Origin::Trivial),
            _ => Err(format!("unknown origin {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    pub leaf: usize,
    pub key: String,
    pub args: Vec<String>,
    pub value: String,
    pub tol: Option<f64>,
    pub origin: Origin,
    pub line: usize,
}

impl Expectation {
    pub fn name(&self) -> String {
        let mut s = self.key.clone();
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        if self.leaf != 0 {
            s = format!("[{}] {s}", self.leaf);
        }
        s
    }

    fn parse(leaf: usize, body: &str, line: usize) -> Result<Self, CorpusError> {
        let err = |m: &str| CorpusError::Header { line, message: m.to_string() };
        let (body, origin) = body.rsplit_once('@').ok_or_else(|| err("expectation without @origin"))?;
        let origin = origin.trim().parse().map_err(|e: String| err(&e))?;
        let (lhs, rhs) = body.split_once(" = ").ok_or_else(|| err("expectation without ' = '"))?;
        let mut words = lhs.split_whitespace();
        let key = words.next().ok_or_else(|| err("empty expectation"))?.to_string();
        let args = words.map(str::to_string).collect();
        let (value, tol) = match rhs.rsplit_once(" tol ") {
            Some((v, t)) => (v.trim().to_string(), Some(t.trim().parse::<f64>().map_err(|_| err("bad tolerance"))?)),
            None => (rhs.trim().to_string(), None),
        };
        Ok(Expectation { leaf, key, args, value, tol, origin, line })
    }
}

/// `q^{A n² + B n} G^n` with `G = base^exp`, all given exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct LawSpec {
    pub quadratic: Rational,
    pub linear: Rational,
    pub geometric: (Rational, Rational),
    pub period: usize,
}

impl LawSpec {
    fn parse(s: &str) -> Result<Self, String> {
        let mut spec = LawSpec {
            quadratic: Rational::new(),
            linear: Rational::new(),
            geometric: (Rational::from(1), Rational::from(1)),
            period: 1,
        };
        for item in s.split_whitespace() {
            let (k, v) = item.split_once('=').ok_or(format!("bad law item {item:?}"))?;
            match k {
                "quadratic" => spec.quadratic = parse_rational(v)?,
                "linear" => spec.linear = parse_rational(v)?,
                "period" => spec.period = v.parse().map_err(|_| format!("bad period {v:?}"))?,
                "geometric" => {
                    spec.geometric = match v.split_once("^(") {
                        Some((b, e)) => (parse_rational(b)?, parse_rational(e.trim_end_matches(')'))?),
                        None => (parse_rational(v)?, Rational::from(1)),
                    }
                }
                _ => return Err(format!("unknown law item {k:?}")),
            }
        }
        Ok(spec)
    }

    pub fn skeleton(&self, q: &Complex) -> LawSkeleton {
        let p = q.prec();
        let g = Complex::from_rational(&self.geometric.0, p).pow_rational(&self.geometric.1);
        LawSkeleton { base: q.clone(), quadratic: self.quadratic.clone(), linear: self.linear.clone(), geometric: g }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let a = Integer::from_str(a.trim()).map_err(|_| format!("bad rational {s:?}"))?;
            let b = Integer::from_str(b.trim()).map_err(|_| format!("bad rational {s:?}"))?;
            if b == 0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            Rational::from((a, b))
        }
        None => Rational::from(Integer::from_str(s).map_err(|_| format!("bad rational {s:?}"))?),
    };
    Ok(r)
}

/// Everything needed to run one equation through the pipeline.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub expression: String,
    pub root_order: u32,
    pub q: Option<Rational>,
    pub precision: u32,
    pub ramify: Option<u32>,
    pub deflate: Option<u32>,
    pub branch: BranchPolicy,
    pub extension: bool,
    pub n: usize,
    /// Values for free coefficients of the leaf series, as expressions.
    pub initial: Vec<(usize, String)>,
    pub law: Option<LawSpec>,
    /// Use `-ρ` instead of the principal square root for the adjoined root.
    pub rho_negated: bool,
    /// Cap on scalar multiplications in the coefficient recursion.
    pub budget: Option<u64>,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            expression: String::new(),
            root_order: 1,
            q: None,
            precision: 128,
            ramify: None,
            deflate: None,
            branch: BranchPolicy::All,
            extension: false,
            n: 30,
            initial: Vec::new(),
            law: None,
            rho_negated: false,
            budget: None,
        }
    }
}

pub fn parse_branch(s: &str) -> Result<BranchPolicy, String> {
    match s.trim() {
        "all" => Ok(BranchPolicy::All),
        "first" => Ok(BranchPolicy::First),
        p => match p.strip_prefix("path=") {
            Some(list) => Ok(BranchPolicy::Path(list.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect())),
            None => Err(format!("branch policy must be all, first or path=..., got {p:?}")),
        },
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "yes" | "true" => Ok(true),
        "no" | "false" => Ok(false),
        x => Err(format!("expected yes or no, got {x:?}")),
    }
}

/// Rational `x^{1/m}` when it exists.
pub fn rational_root(x: &Rational, m: u32) -> Option<Rational> {
    let root = |n: &Integer| -> Option<Integer> {
        if n.cmp0().is_lt() {
            return None;
        }
        let r = Integer::from(n.root_ref(m));
        (Integer::from(rug::ops::Pow::pow(&r, m)) == *n).then_some(r)
    };
    Some(Rational::from((root(x.numer())?, root(x.denom())?)))
}

impl JobConfig {
    /// Apply one header entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let opt_u32 = |v: &str| -> Result<Option<u32>, String> {
            if v.is_empty() {
                Ok(None)
            } else {
                v.parse().map(Some).map_err(|_| format!("bad integer {v:?}"))
            }
        };
        match key {
            "D" => self.root_order = v.parse().map_err(|_| format!("bad D {v:?}"))?,
            "q" => self.q = if v.is_empty() { None } else { Some(parse_rational(v)?) },
            "precision" => self.precision = v.parse().map_err(|_| format!("bad precision {v:?}"))?,
            "ramify" => self.ramify = opt_u32(v)?,
            "deflate" => self.deflate = opt_u32(v)?,
            "branch" => self.branch = parse_branch(v)?,
            "extension" => self.extension = parse_bool(v)?,
            "N" => self.n = v.parse().map_err(|_| format!("bad N {v:?}"))?,
            "initial" => {
                self.initial.clear();
                for item in v.split(',').map(str::trim).filter(|x| !x.is_empty()) {
                    let (k, e) = item.split_once('=').ok_or(format!("bad initial value {item:?}"))?;
                    self.initial.push((k.trim().parse().map_err(|_| format!("bad index {k:?}"))?, e.trim().to_string()));
                }
            }
            "law" => self.law = Some(LawSpec::parse(v)?),
            "budget" => self.budget = if v.is_empty() { None } else { Some(v.parse().map_err(|_| format!("bad budget {v:?}"))?) },
            "rho" => {
                self.rho_negated = match v {
                    "principal" => false,
                    "negated" => true,
                    _ => return Err(format!("rho must be principal or negated, got {v:?}")),
                }
            }
            _ => return Err(format!("unknown header key {key:?}")),
        }
        Ok(())
    }

    pub fn field(&self) -> FieldDescriptor {
        FieldDescriptor::new(self.root_order)
    }

    /// `u = q^{1/D}` when `q` is set and the root is rational.
    pub fn u_value(&self) -> Option<Rational> {
        rational_root(self.q.as_ref()?, self.root_order)
    }

    /// Reduction options; with `specialize` the field is first specialised
    /// at `u = q^{1/D}`.
    pub fn reduction_options(&self, specialize: bool) -> Result<ReductionOptions, CorpusError> {
        let mut pre = Vec::new();
        if specialize {
            let u = self.u_value().ok_or_else(|| CorpusError::Config("exact specialisation needs a rational q^(1/D)".into()))?;
            pre.push(StepKind::Specialize(GRat::from_rational(u)));
        }
        if let Some(m) = self.ramify {
            pre.push(StepKind::Ramify(m));
        }
        let post = self.deflate.map(|m| vec![StepKind::Deflate(m)]).unwrap_or_default();
        Ok(ReductionOptions { policy: self.branch.clone(), allow_extension: self.extension, pre, post, ..Default::default() })
    }
}

/// Parsed equation file.
#[derive(Clone, Debug)]
pub struct EquationFile {
    pub header: Vec<(String, String)>,
    pub expectations: Vec<Expectation>,
    pub expression: String,
}

pub fn parse_equation_file(text: &str) -> Result<EquationFile, CorpusError> {
    let lines: Vec<&str> = text.lines().collect();
    let is_header = |l: &str| {
        let t = l.trim_start();
        t.starts_with('#')
            || t.split_once(':').map_or(false, |(k, _)| !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || "_[]".contains(c)))
    };
    let has_header = lines.iter().find(|l| !l.trim().is_empty()).map_or(false, |l| is_header(l));
    let mut header = Vec::new();
    let mut expectations = Vec::new();
    let mut i = 0;
    if has_header {
        while i < lines.len() && !lines[i].trim().is_empty() {
            let l = lines[i].trim();
            i += 1;
            if l.starts_with('#') {
                continue;
            }
            let (k, v) = l.split_once(':').ok_or(CorpusError::Header { line: i, message: "expected key: value".into() })?;
            if let Some(rest) = k.strip_prefix("expect") {
                let leaf = match rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                    Some(x) => x.parse().map_err(|_| CorpusError::Header { line: i, message: "bad leaf index".into() })?,
                    None if rest.is_empty() => 0,
                    None => return Err(CorpusError::Header { line: i, message: format!("bad key {k:?}") }),
                };
                expectations.push(Expectation::parse(leaf, v.trim(), i)?);
            } else {
                header.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    let expression = lines[i..]
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(EquationFile { header, expectations, expression })
}

impl EquationFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Job configuration from the header; `id`, `title` and `origin` are
    /// descriptive and skipped.
    pub fn config(&self) -> Result<JobConfig, CorpusError> {
        let mut cfg = JobConfig { expression: self.expression.clone(), ..Default::default() };
        for (k, v) in &self.header {
            if matches!(k.as_str(), "id" | "title" | "origin" | "source") {
                continue;
            }
            cfg.set(k, v).map_err(CorpusError::Config)?;
        }
        Ok(cfg)
    }
}

/// An input equation taken through reduction.
#[derive(Clone, Debug)]
pub struct Job {
    pub config: JobConfig,
    pub input: QPolynomial,
    pub trace: ReductionTrace,
    pub specialized: bool,
    pre_len: usize,
}

impl Job {
    /// With `specialize`, a branch path is replayed by the numeric values of
    /// the roots the generic reduction picked.
    pub fn new(config: &JobConfig, specialize: bool) -> Result<Job, CorpusError> {
        let fd = config.field();
        let input = parse_polynomial(&config.expression, &fd)?;
        let mut opts = config.reduction_options(specialize)?;
        if specialize && matches!(config.branch, BranchPolicy::Path(_)) {
            let generic = Job::new(config, false)?;
            opts.policy = BranchPolicy::Path(generic.path_values(generic.leaf(0)?)?);
        }
        let trace = reduction::reduce_to_normal_form(&input, &opts)?;
        Ok(Job { config: config.clone(), input, trace, specialized: specialize, pre_len: opts.pre.len() })
    }

    /// `~re,im` tokens for the roots taken at each reduce step of `leaf`.
    fn path_values(&self, leaf: &Leaf) -> Result<Vec<String>, CorpusError> {
        let q = self.config.q.as_ref().ok_or_else(|| CorpusError::Config("exact specialisation needs a value of q".into()))?;
        let chain = reduction::q_chain(&Complex::from_rational(q, 128), &leaf.steps);
        let mut out = Vec::new();
        for (i, s) in leaf.steps.iter().enumerate() {
            if let StepKind::Reduce(c) = &s.kind {
                let nf = NumericField::new(&s.field, chain[i + 1].clone(), 128)?;
                let (re, im) = nf.eval(c)?.to_f64_pair();
                out.push(format!("~{re:e},{im:e}"));
            }
        }
        Ok(out)
    }

    pub fn reduced(&self) -> Vec<&Leaf> {
        self.trace.reduced_leaves().collect()
    }

    pub fn leaf(&self, i: usize) -> Result<&Leaf, CorpusError> {
        self.reduced().get(i).copied().ok_or_else(|| CorpusError::Config(format!("no reduced leaf with index {i}")))
    }

    /// Field of the equation after the pre-processing steps.
    pub fn base_field(&self, leaf: &Leaf) -> FieldDescriptor {
        if self.pre_len == 0 {
            self.input.field().clone()
        } else {
            leaf.steps[self.pre_len - 1].field.clone()
        }
    }

    /// Steps from the pre-processed equation to the leaf.
    pub fn core_steps<'a>(&self, leaf: &'a Leaf) -> &'a [reduction::ReductionStep] {
        &leaf.steps[self.pre_len..]
    }

    /// `q` of the pre-processed equation.
    pub fn base_q(&self, leaf: &Leaf, prec: u32) -> Result<Complex, CorpusError> {
        let q = self.config.q.as_ref().ok_or_else(|| CorpusError::Config("numeric work needs a value of q".into()))?;
        let chain = reduction::q_chain(&Complex::from_rational(q, prec), &leaf.steps[..self.pre_len]);
        Ok(chain.last().unwrap().clone())
    }

    pub fn numeric_field(&self, leaf: &Leaf, prec: u32) -> Result<NumericField, CorpusError> {
        let q = self.config.q.as_ref().ok_or_else(|| CorpusError::Config("numeric work needs a value of q".into()))?;
        let chain = reduction::q_chain(&Complex::from_rational(q, prec), &leaf.steps);
        let mut nf = NumericField::new(leaf.field().unwrap(), chain.last().unwrap().clone(), prec)?;
        if self.config.rho_negated {
            nf.rho = nf.rho.map(|r| r.neg());
        }
        Ok(nf)
    }

    pub fn initial_exact(&self, leaf: &Leaf) -> Result<SolveOptions<Scalar>, CorpusError> {
        let fd = leaf.field().unwrap();
        let mut o = SolveOptions { budget: self.config.budget, ..Default::default() };
        for (k, e) in &self.config.initial {
            o.initial.insert(*k, parse_scalar(e, fd)?);
        }
        Ok(o)
    }

    pub fn initial_numeric(&self, leaf: &Leaf, nf: &NumericField) -> Result<SolveOptions<Complex>, CorpusError> {
        let fd = leaf.field().unwrap();
        let mut o = SolveOptions { budget: self.config.budget, ..Default::default() };
        for (k, e) in &self.config.initial {
            o.initial.insert(*k, nf.eval(&parse_scalar(e, fd)?)?);
        }
        Ok(o)
    }

    /// Exact leaf coefficients `g_0..g_n`.
    pub fn leaf_exact(&self, leaf: &Leaf, n: usize) -> Result<Vec<Scalar>, CorpusError> {
        let p = leaf.poly().unwrap();
        Ok(series::coefficients_exact(p, n, &self.initial_exact(leaf)?)?.coeffs)
    }

    /// Exact coefficients of the pre-processed equation's solution, with
    /// values in the leaf field.
    pub fn assembled_exact(&self, leaf: &Leaf, n: usize) -> Result<Vec<Scalar>, CorpusError> {
        let stretch: usize = self.core_steps(leaf).iter().map(|s| if let StepKind::Ramify(m) = s.kind { m as usize } else { 1 }).product();
        let g = self.leaf_exact(leaf, n * stretch)?;
        let mut f = assemble_exact(&self.base_field(leaf), self.core_steps(leaf), &g)?;
        f.truncate(n + 1);
        Ok(f)
    }

    /// Normalized leaf coefficients and the weights used.
    pub fn leaf_normalized(&self, leaf: &Leaf, n: usize, nf: &NumericField) -> Result<(Vec<Complex>, WeightKit), CorpusError> {
        let p = leaf.poly().unwrap();
        let kit = match structure::classify(p)? {
            Classification::DivergentCandidate { .. } => series::kit_for(p)?,
            _ => WeightKit::new(Rational::new(), 0),
        };
        let g = series::coefficients_normalized(p, n, nf, &kit, &self.initial_numeric(leaf, nf)?)?.coeffs;
        Ok((g, kit))
    }

    /// Numeric coefficients of the pre-processed equation's solution.
    pub fn assembled_numeric(&self, leaf: &Leaf, g: &[Complex], kit: &WeightKit, nf: &NumericField) -> Result<Vec<Complex>, CorpusError> {
        let k: Vec<Complex> = g.iter().enumerate().map(|(i, x)| x.mul(&nf.q_pow_rational(&kit.d(i as i64)))).collect();
        let q = self.base_q(leaf, nf.prec)?;
        let mut f = assemble_numeric_with(&self.base_field(leaf), &q, nf.prec, self.core_steps(leaf), &k, self.config.rho_negated)?;
        f.truncate(g.len());
        Ok(f)
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub origin: Origin,
    pub passed: bool,
    pub detail: String,
}

struct NumericData {
    nf: NumericField,
    g: Vec<Complex>,
    f: Vec<Complex>,
    law: Result<AsymptoticLaw, String>,
}

/// Checks expectations against a job, caching numeric work per leaf.
pub struct Checker<'a> {
    pub job: &'a Job,
    numeric: RefCell<BTreeMap<usize, std::rc::Rc<NumericData>>>,
}

fn rel_gap(a: &Complex, b: &Complex) -> f64 {
    if b.is_zero() {
        return if a.is_zero() { 0.0 } else { f64::INFINITY };
    }
    2f64.powf(a.sub(b).log2_abs() - b.log2_abs())
}

fn parse_complex(s: &str, prec: u32) -> Result<Complex, String> {
    let s = s.trim();
    if s == "i" {
        return Ok(Complex::i(prec));
    }
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "0"),
    };
    let f = |x: &str| Float::parse(x).map(|v| Float::with_val(prec, v)).map_err(|_| format!("bad number {x:?}"));
    Ok(Complex { re: f(re)?, im: f(im)? })
}

impl<'a> Checker<'a> {
    pub fn new(job: &'a Job) -> Self {
        Checker { job, numeric: RefCell::new(BTreeMap::new()) }
    }

    fn numeric(&self, leaf_idx: usize) -> Result<std::rc::Rc<NumericData>, CorpusError> {
        if let Some(d) = self.numeric.borrow().get(&leaf_idx) {
            return Ok(d.clone());
        }
        let leaf = self.job.leaf(leaf_idx)?;
        let nf = self.job.numeric_field(leaf, self.job.config.precision)?;
        let (g, kit) = self.job.leaf_normalized(leaf, self.job.config.n, &nf)?;
        let f = self.job.assembled_numeric(leaf, &g, &kit, &nf)?;
        let law = asymptotics::asymptotic_law(leaf.poly().unwrap(), &nf, &g).map_err(|e| e.to_string());
        let d = std::rc::Rc::new(NumericData { nf, g, f, law });
        self.numeric.borrow_mut().insert(leaf_idx, d.clone());
        Ok(d)
    }

    fn normalized_sequence(&self, leaf_idx: usize) -> Result<(Vec<Complex>, usize), CorpusError> {
        let d = self.numeric(leaf_idx)?;
        let law = self.job.config.law.as_ref().ok_or_else(|| CorpusError::Config("no law given".into()))?;
        let q = Complex::from_rational(self.job.config.q.as_ref().unwrap(), d.nf.prec);
        Ok((law.skeleton(&q).normalize(&d.f), law.period))
    }

    pub fn check(&self, e: &Expectation) -> CheckResult {
        let (passed, detail) = match self.evaluate(e) {
            Ok(v) => v,
            Err(err) => (false, format!("error: {err}")),
        };
        CheckResult { name: e.name(), origin: e.origin, passed, detail }
    }

    fn evaluate(&self, e: &Expectation) -> Result<(bool, String), CorpusError> {
        let job = self.job;
        let cmp = |got: String| -> (bool, String) {
            let ok = got == e.value;
            (ok, format!("got {got}, expected {}", e.value))
        };
        let arg = |name: &str| e.args.iter().find_map(|a| a.strip_prefix(&format!("{name}=")).map(str::to_string));
        let tol = e.tol.unwrap_or(1e-6);
        Ok(match e.key.as_str() {
            "branches" => cmp(job.trace.leaves.len().to_string()),
            "leaves" => cmp(job.reduced().len().to_string()),
            "classification" => {
                let leaf = job.leaf(e.leaf)?;
                cmp(structure::classify(leaf.poly().unwrap())?.label().to_string())
            }
            "height" | "co_height" => {
                let leaf = job.leaf(e.leaf)?;
                let mut p = leaf.poly().unwrap().clone();
                if let Some(m) = arg("deflate") {
                    let m: u32 = m.parse().map_err(|_| CorpusError::Config("bad deflate".into()))?;
                    p = structure::normalize(&apply_step(&p, &StepKind::Deflate(m))?)?.0;
                }
                match structure::classify(&p)? {
                    Classification::DivergentCandidate { height, co_height } => {
                        cmp(if e.key == "height" { height.to_string() } else { co_height.to_string() })
                    }
                    c => (false, format!("classification {}", c.label())),
                }
            }
            "alpha_q0" | "alpha_qplus" => {
                let leaf = job.leaf(e.leaf)?;
                let p = match &leaf.kind {
                    LeafKind::Reduced { pre_shift, .. } => pre_shift,
                    _ => unreachable!(),
                };
                let (q, _) = structure::extract(p)?;
                let ab = structure::alpha_bounds(&q);
                let v = if e.key == "alpha_q0" { ab.q0 } else { ab.qplus };
                cmp(v.map(|x| x.to_string()).unwrap_or_else(|| "-inf".into()))
            }
            "expanded_terms" => cmp(job.leaf(e.leaf)?.poly().unwrap().expanded_term_count().to_string()),
            "shifting_terms" => cmp(job.leaf(e.leaf)?.poly().unwrap().expanded_term_count_where(|k| k.a > 0 && !k.is_pure()).to_string()),
            "existence" => {
                let leaf = job.leaf(e.leaf)?;
                let c = structure::existence_check(leaf.poly().unwrap(), None, 64)?;
                cmp(c.holds.to_string())
            }
            "sign_condition" => cmp(structure::sign_condition(job.leaf(e.leaf)?.poly().unwrap(), None)?.to_string()),
            "gevrey" => match structure::classify(job.leaf(e.leaf)?.poly().unwrap())? {
                Classification::DivergentCandidate { height, .. } => cmp(Rational::from(height * 2).to_string()),
                c => (false, format!("classification {}", c.label())),
            },
            "crest" => {
                let leaf = job.leaf(e.leaf)?;
                let fd = leaf.field().unwrap();
                let (_, crest) = structure::crest_polynomial(leaf.poly().unwrap())?;
                let mut want = Vec::new();
                for item in e.value.split(';') {
                    let parts: Vec<&str> = item.splitn(3, ':').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(CorpusError::Config(format!("bad crest term {item:?}")));
                    }
                    let a: u32 = parts[0].parse().map_err(|_| CorpusError::Config("bad crest degree".into()))?;
                    let t: u32 = parts[1].parse().map_err(|_| CorpusError::Config("bad crest t power".into()))?;
                    want.push((a, t, parse_scalar(parts[2], fd)?));
                }
                let folded = crest.terms.iter().all(|t| t.q_exp.cmp0().is_eq());
                let got: Vec<(u32, u32, Scalar)> = crest.terms.iter().map(|t| (t.a, t.t_power, t.coeff.clone())).collect();
                (folded && got == want, format!("got {}", crest.render(fd)))
            }
            "f0" => {
                let leaf = job.leaf(e.leaf)?;
                let f = job.assembled_exact(leaf, 0)?;
                let want = parse_scalar(&e.value, leaf.field().unwrap())?;
                let fd = leaf.field().unwrap();
                (f[0] == want, format!("got {}", crate::scalar::json::render_scalar(&f[0], fd)))
            }
            "coefficients" => {
                let leaf = job.leaf(e.leaf)?;
                let fd = leaf.field().unwrap();
                let want: Vec<Scalar> = e.value.split(',').map(|x| parse_scalar(x.trim(), fd)).collect::<Result<_, _>>()?;
                let f = job.assembled_exact(leaf, want.len() - 1)?;
                let got: Vec<String> = f.iter().map(|c| crate::scalar::json::render_scalar(c, fd)).collect();
                (f == want, format!("got {}", got.join(", ")))
            }
            "majorant" => {
                let leaf = job.leaf(e.leaf)?;
                let n: usize = e.value.parse().map_err(|_| CorpusError::Config("bad majorant range".into()))?;
                let nf = job.numeric_field(leaf, job.config.precision)?;
                let c = series::majorant_certificate(leaf.poly().unwrap(), &nf, n)?;
                (c.holds, format!("c = {:.4}, gamma = {:.4}, L = {}, verified to {}", c.c, c.gamma, c.big_l, c.verified_to))
            }
            "constant" => {
                let m: usize = e.args.first().and_then(|a| a.parse().ok()).ok_or_else(|| CorpusError::Config("constant needs a residue".into()))?;
                let (x, period) = self.normalized_sequence(e.leaf)?;
                let emp = asymptotics::empirical_constants(&x, period, tol)?;
                let want = parse_complex(&e.value, x[0].prec()).map_err(CorpusError::Config)?;
                let got = &emp.estimates[m];
                let gap = rel_gap(got, &want);
                {
                    let (re, im) = got.to_decimal(16);
                    (gap <= tol, format!("estimate {re} + {im}*I at n = {}, relative error {gap:.3e}", emp.taken_at[m]))
                }
            }
            "symmetry" => {
                let shift: usize = e.args.first().and_then(|a| a.parse().ok()).ok_or_else(|| CorpusError::Config("symmetry needs a shift".into()))?;
                let floor: f64 = arg("floor").map(|v| v.parse().unwrap_or(0.0)).unwrap_or(0.0);
                let (x, period) = self.normalized_sequence(e.leaf)?;
                let emp = asymptotics::empirical_constants(&x, period, tol)?;
                let factor = parse_complex(&e.value, x[0].prec()).map_err(CorpusError::Config)?;
                let mut worst = 0f64;
                let mut counted = 0;
                for m in 0..period {
                    let a = &emp.estimates[m];
                    let b = &emp.estimates[(m + shift) % period];
                    if 2f64.powf(a.log2_abs()) <= floor {
                        continue;
                    }
                    counted += 1;
                    worst = worst.max(rel_gap(b, &a.mul(&factor)));
                }
                (worst <= tol && counted > 0, format!("{counted} residues, worst relative gap {worst:.3e}"))
            }
            "parity" => {
                let d = self.numeric(e.leaf)?;
                let mut ok = true;
                let mut checked = 0;
                for (n, x) in d.f.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let (re, im) = (2f64.powf(Complex::from_real(x.re.clone()).log2_abs()), 2f64.powf(Complex::from_real(x.im.clone()).log2_abs()));
                    let a = 2f64.powf(x.log2_abs());
                    let small = if n % 2 == 0 { im } else { re };
                    checked += 1;
                    if small > a * 1e-30 {
                        ok = false;
                    }
                }
                (ok && e.value == "even-real", format!("{checked} nonzero coefficients checked"))
            }
            "nonnegative" => {
                let d = self.numeric(e.leaf)?;
                let slack = -(d.nf.prec as f64) + 16.0;
                let ok = d.f.iter().all(|x| {
                    let a = x.log2_abs();
                    x.is_zero() || (x.re.is_sign_positive() && Complex::from_real(x.im.clone()).log2_abs() <= a + slack)
                });
                cmp(ok.to_string())
            }
            "analytic_agreement" => {
                let d = self.numeric(e.leaf)?;
                let law = d.law.as_ref().map_err(|s| CorpusError::Config(s.clone()))?;
                let x: Vec<Complex> = d.g.iter().enumerate().map(|(n, v)| v.mul(&law.zeta0.powi(n as i64).unwrap())).collect();
                let emp = asymptotics::empirical_constants(&x, law.period, tol)?;
                let mut worst = 0f64;
                for m in 0..law.period {
                    worst = worst.max(rel_gap(&emp.estimates[m], &law.constants[m]));
                }
                let limit: f64 = e.value.parse().map_err(|_| CorpusError::Config("bad agreement bound".into()))?;
                (worst <= limit, format!("period {}, worst relative gap {worst:.3e}", law.period))
            }
            "radius_ratio" => {
                let d = self.numeric(e.leaf)?;
                let law = d.law.as_ref().map_err(|s| CorpusError::Config(s.clone()))?;
                let r = law.roots.radius.as_ref().map(|r| r.to_f64()).unwrap_or(f64::INFINITY);
                let est = series::ratio_radius(&d.g, law.period.max(1) * 8).unwrap_or(f64::NAN);
                let limit: f64 = e.value.parse().map_err(|_| CorpusError::Config("bad ratio bound".into()))?;
                let gap = ((est - r) / r).abs();
                (gap <= limit, format!("ratio estimate {est:.6}, R = {r:.6}, gap {gap:.3e}"))
            }
            "u_single_sign" => {
                let special = Job::new(&job.config, true)?;
                let leaf = special.leaf(e.leaf)?;
                let n: usize = e.args.first().and_then(|a| a.parse().ok()).unwrap_or(job.config.n);
                let f = special.leaf_exact(leaf, n)?;
                let u = asymptotics::exact_u_series(leaf.poly().unwrap(), &f)?;
                cmp(asymptotics::single_sign(&u).to_string())
            }
            k => return Err(CorpusError::Config(format!("unknown expectation key {k:?}"))),
        })
    }
}

/// One entry of the bundled corpus.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub id: String,
    pub title: String,
    pub file: EquationFile,
}

const BUNDLED: [&str; 8] = [
    include_str!("../corpus/running.qeq"),
    include_str!("../corpus/qp1.qeq"),
    include_str!("../corpus/drake-a.qeq"),
    include_str!("../corpus/drake-b.qeq"),
    include_str!("../corpus/gessel.qeq"),
    include_str!("../corpus/jones.qeq"),
    include_str!("../corpus/cfa.qeq"),
    include_str!("../corpus/designed.qeq"),
];

pub fn bundled() -> Vec<CorpusEntry> {
    BUNDLED
        .iter()
        .map(|text| {
            let file = parse_equation_file(text).expect("bundled corpus file parses");
            CorpusEntry { id: file.get("id").unwrap_or("").to_string(), title: file.get("title").unwrap_or("").to_string(), file }
        })
        .collect()
}

pub fn entry(id: &str) -> Option<CorpusEntry> {
    bundled().into_iter().find(|e| e.id == id)
}

#[derive(Clone, Debug)]
pub struct EntryOutcome {
    pub id: String,
    pub checks: Vec<CheckResult>,
    pub error: Option<String>,
}

impl EntryOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "passed": self.passed(),
            "error": self.error,
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name, "origin": c.origin.label(), "passed": c.passed, "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn run_entry(e: &CorpusEntry) -> EntryOutcome {
    let result = (|| -> Result<Vec<CheckResult>, CorpusError> {
        let cfg = e.file.config()?;
        let job = Job::new(&cfg, false)?;
        let checker = Checker::new(&job);
        Ok(e.file.expectations.iter().map(|x| checker.check(x)).collect())
    })();
    match result {
        Ok(checks) => EntryOutcome { id: e.id.clone(), checks, error: None },
        Err(err) => EntryOutcome { id: e.id.clone(), checks: Vec::new(), error: Some(err.to_string()) },
    }
}
