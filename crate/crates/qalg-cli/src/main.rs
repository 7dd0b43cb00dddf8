use clap::{Args, Parser, Subcommand, ValueEnum};
use qalg_core::asymptotics::{self, AsymptoticsError};
use qalg_core::corpus::{self, CorpusError, Job, JobConfig};
use qalg_core::scalar::json::render_scalar;
use qalg_core::scalar::Complex;
use qalg_core::series::SeriesError;
use qalg_core::structure::{self, Classification};
use rug::Rational;
use serde_json::{json, Value};
use std::io::Write;
use std::process::ExitCode;

const SCHEMA: &str = "qalg/1";

#[derive(Parser)]
#[command(name = "qalg", version, about = "Structure, solutions and asymptotics of q-algebraic equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structure report: reduction trace, q-factors, crest, existence, classification.
    Analyze(JobArgs),
    /// Power series coefficients, exact or numeric.
    Solve {
        #[command(flatten)]
        job: JobArgs,
        /// Exact arithmetic; with --q the field is specialised at that value.
        #[arg(long)]
        exact: bool,
    },
    /// Asymptotic law of the coefficients of a divergent solution.
    Asym(JobArgs),
    /// Bundled regression corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// List entries.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run entries and compare against their expectations.
    Run {
        #[arg(long)]
        entry: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct JobArgs {
    /// Equation file: optional `key: value` header, blank line, expression.
    file: Option<String>,
    /// Equation given inline instead of a file.
    #[arg(long, short = 'e')]
    expr: Option<String>,
    /// Root order D of u, with q = u^D.
    #[arg(long = "field-D")]
    field_d: Option<u32>,
    /// Value of q, a rational with |q| > 1.
    #[arg(long)]
    q: Option<String>,
    /// Working precision in bits for numeric mode.
    #[arg(long = "precision-bits")]
    precision_bits: Option<u32>,
    /// Substitute z -> z^m before reducing.
    #[arg(long)]
    ramify: Option<u32>,
    /// Substitute z^m -> z after reducing.
    #[arg(long)]
    deflate: Option<u32>,
    /// all, first or path=r1,r2,...
    #[arg(long)]
    branch: Option<String>,
    /// Allow quadratic extensions during reduction.
    #[arg(long)]
    extension: bool,
    /// Number of coefficients beyond f_0.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Values for free coefficients, e.g. `0=1`.
    #[arg(long)]
    initial: Option<String>,
    /// Normalising law for empirical constants, e.g. `quadratic=1/4 period=2`.
    #[arg(long)]
    law: Option<String>,
    /// principal or negated.
    #[arg(long)]
    rho: Option<String>,
    /// Reduced leaf to use for solve and asym.
    #[arg(long, default_value_t = 0)]
    leaf: usize,
    /// Abort after this many coefficient multiplications.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

enum Failure {
    Usage(String),
    Negative(String, Option<Value>),
    Budget(String),
    Internal(String),
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match &e {
            CorpusError::Parse(_) | CorpusError::Header { .. } | CorpusError::Config(_) => Failure::Usage(e.to_string()),
            CorpusError::Series(SeriesError::BudgetExceeded(_)) => Failure::Budget(e.to_string()),
            CorpusError::Series(SeriesError::ExistenceFails(_) | SeriesError::Inconsistent(_)) => Failure::Negative(e.to_string(), None),
            CorpusError::Asymptotics(AsymptoticsError::NotApplicable(_)) => Failure::Negative(format!("not applicable: {e}"), None),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<AsymptoticsError> for Failure {
    fn from(e: AsymptoticsError) -> Self {
        Failure::from(CorpusError::from(e))
    }
}

impl JobArgs {
    fn config(&self) -> Result<JobConfig, Failure> {
        let text = match (&self.file, &self.expr) {
            (Some(path), None) => std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?,
            (None, Some(e)) => e.clone(),
            (Some(_), Some(_)) => return Err(Failure::Usage("give either a file or --expr, not both".into())),
            (None, None) => return Err(Failure::Usage("no equation given".into())),
        };
        let file = corpus::parse_equation_file(&text)?;
        if file.expression.trim().is_empty() {
            return Err(Failure::Usage("empty equation".into()));
        }
        let mut cfg = file.config()?;
        let mut set = |k: &str, v: Option<String>| -> Result<(), Failure> {
            match v {
                Some(v) => cfg.set(k, &v).map_err(Failure::Usage),
                None => Ok(()),
            }
        };
        set("D", self.field_d.map(|x| x.to_string()))?;
        set("q", self.q.clone())?;
        set("precision", self.precision_bits.map(|x| x.to_string()))?;
        set("ramify", self.ramify.map(|x| x.to_string()))?;
        set("deflate", self.deflate.map(|x| x.to_string()))?;
        set("branch", self.branch.clone())?;
        set("N", self.n.map(|x| x.to_string()))?;
        set("initial", self.initial.clone())?;
        set("law", self.law.clone())?;
        set("rho", self.rho.clone())?;
        set("budget", self.budget.map(|x| x.to_string()))?;
        if self.extension {
            cfg.extension = true;
        }
        Ok(cfg)
    }
}

fn config_json(cfg: &JobConfig) -> Value {
    json!({
        "expression": cfg.expression,
        "D": cfg.root_order,
        "q": cfg.q.as_ref().map(|q| q.to_string()),
        "precision_bits": cfg.precision,
        "ramify": cfg.ramify,
        "deflate": cfg.deflate,
        "extension": cfg.extension,
        "N": cfg.n,
    })
}

fn complex_json(z: &Complex, digits: usize) -> Value {
    let (re, im) = z.to_decimal(digits);
    json!({"re": re, "im": im})
}

fn digits(prec: u32) -> usize {
    (prec as f64 * 0.30103) as usize
}

fn analyze(args: &JobArgs) -> Result<(Value, String), Failure> {
    let cfg = args.config()?;
    let job = Job::new(&cfg, false)?;
    let mut leaves = Vec::new();
    let mut text = String::new();
    let mut negative = false;
    text.push_str(&format!("branches: {}, reduced leaves: {}\n", job.trace.leaves.len(), job.reduced().len()));
    for (i, leaf) in job.reduced().into_iter().enumerate() {
        let p = leaf.poly().unwrap();
        let fd = leaf.field().unwrap();
        let rep = structure::report(p).map_err(CorpusError::from)?;
        let ex = structure::existence_check(p, None, 64).map_err(CorpusError::from)?;
        let sign = structure::sign_condition(p, None).map_err(CorpusError::from)?;
        let gevrey = asymptotics::gevrey_order(&rep, sign, &Rational::from(1)).ok();
        let supplied = ex.failing_n.map_or(false, |n| cfg.initial.iter().any(|(k, _)| *k as u64 == n));
        negative |= !ex.holds && !supplied;
        let class = rep.classification.as_ref().map(|c| c.label()).unwrap_or("-");
        text.push_str(&format!("leaf {i}: {class}, {} terms, {} expanded monomials\n", p.len(), p.expanded_term_count()));
        let alpha = |a: Option<i32>| a.map(|x| x.to_string()).unwrap_or_else(|| "-inf".into());
        text.push_str(&format!("  alpha(Q0) = {}, alpha(Q+) = {}\n", alpha(rep.alpha.q0), alpha(rep.alpha.qplus)));
        if let Some(Classification::DivergentCandidate { height, co_height }) = &rep.classification {
            text.push_str(&format!("  H = {height}, h = {co_height}, Gevrey order {}\n", Rational::from(height * 2)));
        }
        if let Some(c) = &rep.crest_polynomial {
            text.push_str(&format!("  crest: {}\n", c.render(fd)));
        }
        let note = match ex.failing_n {
            Some(n) if supplied => format!(" (coefficient {n} is free, value supplied)"),
            Some(n) => format!(" (fails at n = {n})"),
            None => String::new(),
        };
        text.push_str(&format!("  existence: {}{note}\n", ex.holds));
        text.push_str(&format!("  sign condition: {sign}\n"));
        leaves.push(json!({
            "index": i,
            "steps": leaf.steps.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            "terms": p.len(),
            "expanded_terms": p.expanded_term_count(),
            "report": rep.to_json(fd),
            "existence": {"holds": ex.holds, "failing_n": ex.failing_n, "free_value_supplied": supplied, "tail_bound": ex.tail_bound, "inconclusive": ex.inconclusive, "mode": ex.mode},
            "sign_condition": sign,
            "gevrey_order": gevrey.map(|g| g.order.to_string()),
            "prefix": leaf.prefix.iter().map(|c| render_scalar(c, fd)).collect::<Vec<_>>(),
        }));
    }
    let v = json!({
        "schema": SCHEMA,
        "command": "analyze",
        "config": config_json(&cfg),
        "trace": job.trace.to_json(),
        "leaves": leaves,
    });
    if negative || job.reduced().is_empty() {
        return Err(Failure::Negative("no reduced leaf with a solvable coefficient recursion".into(), Some(v)));
    }
    Ok((v, text))
}

fn solve(args: &JobArgs, exact: bool) -> Result<(Value, String), Failure> {
    let cfg = args.config()?;
    let n = cfg.n;
    if exact {
        let job = Job::new(&cfg, cfg.q.is_some())?;
        let leaf = job.leaf(args.leaf)?;
        let f = job.assembled_exact(leaf, n)?;
        let lf = leaf.field().unwrap();
        let rendered: Vec<String> = f.iter().map(|c| render_scalar(c, lf)).collect();
        let csv = std::iter::once("n,value".to_string()).chain(rendered.iter().enumerate().map(|(i, v)| format!("{i},\"{v}\""))).collect::<Vec<_>>().join("\n");
        let v = json!({
            "schema": SCHEMA, "command": "solve", "mode": "exact", "config": config_json(&cfg),
            "coefficients": rendered,
        });
        return Ok((v, csv + "\n"));
    }
    let job = Job::new(&cfg, false)?;
    let leaf = job.leaf(args.leaf)?;
    let nf = job.numeric_field(leaf, cfg.precision)?;
    let (g, kit) = job.leaf_normalized(leaf, n, &nf)?;
    let f = job.assembled_numeric(leaf, &g, &kit, &nf)?;
    let d = digits(cfg.precision);
    let mut csv = String::from("n,re,im\n");
    for (i, x) in f.iter().enumerate() {
        let (re, im) = x.to_decimal(d);
        csv.push_str(&format!("{i},{re},{im}\n"));
    }
    let v = json!({
        "schema": SCHEMA, "command": "solve", "mode": "numeric", "config": config_json(&cfg),
        "coefficients": f.iter().map(|x| complex_json(x, d)).collect::<Vec<_>>(),
        "normalized": {
            "height": kit.height.to_string(), "co_height": kit.co_height,
            "values": g.iter().map(|x| complex_json(x, d)).collect::<Vec<_>>(),
        },
    });
    Ok((v, csv))
}

/// JSON report, CSV rows and a text summary.
fn asym(args: &JobArgs) -> Result<(Value, String, String), Failure> {
    let cfg = args.config()?;
    let job = Job::new(&cfg, false)?;
    let leaf = job.leaf(args.leaf)?;
    let p = leaf.poly().unwrap();
    match structure::classify(p).map_err(CorpusError::from)? {
        Classification::DivergentCandidate { .. } => {}
        c => return Err(Failure::Negative(format!("not applicable: classification {}", c.label()), None)),
    }
    let nf = job.numeric_field(leaf, cfg.precision)?;
    let (g, kit) = job.leaf_normalized(leaf, cfg.n, &nf)?;
    let d = digits(cfg.precision).min(30);
    let law = asymptotics::asymptotic_law(p, &nf, &g);
    let prediction: Option<Vec<Complex>> = law.as_ref().ok().map(|l| (0..g.len()).map(|n| l.predict_g(n)).collect());
    let mut v = json!({
        "schema": SCHEMA, "command": "asym", "config": config_json(&cfg),
        "law": match &law { Ok(l) => l.to_json(d), Err(e) => json!({"error": e.to_string()}) },
    });
    let mut csv = asymptotics::csv(&g, prediction.as_deref(), d.min(20));
    let show = |z: &Complex| {
        let (re, im) = z.to_decimal(d.min(20));
        if z.im.is_zero() {
            re
        } else {
            format!("{re} + {im}*I")
        }
    };
    let mut text = String::new();
    match &law {
        Ok(l) => {
            text.push_str(&format!("H = {}, h = {}, q-Gevrey order {}\n", l.height, l.co_height, l.gevrey));
            let radius = l.roots.radius.as_ref().map(|r| r.to_string_radix(10, Some(d.min(20)))).unwrap_or_else(|| "inf".into());
            let validity = match l.validity {
                asymptotics::Validity::Analytic => "analytic",
                asymptotics::Validity::Empirical => "empirical",
            };
            text.push_str(&format!("radius R = {radius}, period {}, constants {validity}\n", l.period));
            for (m, c) in l.constants.iter().enumerate() {
                text.push_str(&format!("  c_{m} = {}\n", show(c)));
            }
        }
        Err(e) => text.push_str(&format!("law: {e}\n")),
    }
    if let Some(spec) = &cfg.law {
        let f = job.assembled_numeric(leaf, &g, &kit, &nf)?;
        let q = Complex::from_rational(cfg.q.as_ref().unwrap(), cfg.precision);
        let x = spec.skeleton(&q).normalize(&f);
        let emp = asymptotics::empirical_constants(&x, spec.period, 1e-6)?;
        v["empirical"] = json!({
            "period": spec.period,
            "validates": emp.validates,
            "stable_from": emp.stable_from(&x, 1e-8),
            "estimates": emp.estimates.iter().map(|c| complex_json(c, d)).collect::<Vec<_>>(),
            "taken_at": emp.taken_at,
        });
        text.push_str(&format!(
            "empirical: period {}, {}, within 1e-6 of the final estimates from n = {}\n",
            spec.period,
            if emp.validates { "converged" } else { "not converged" },
            emp.stable_from(&x, 1e-8)
        ));
        for (m, c) in emp.estimates.iter().enumerate() {
            text.push_str(&format!("  c_{m} ~ {} (n = {})\n", show(c), emp.taken_at[m]));
        }
        csv = asymptotics::csv(&x, None, d.min(20));
    }
    Ok((v, csv, text))
}

fn corpus_list() -> (Value, String) {
    let entries = corpus::bundled();
    let v = json!({
        "schema": SCHEMA, "command": "corpus list",
        "entries": entries.iter().map(|e| json!({"id": e.id, "title": e.title, "expectations": e.file.expectations.len()})).collect::<Vec<_>>(),
    });
    let text = entries.iter().map(|e| format!("{:<10} {}\n", e.id, e.title)).collect::<String>();
    (v, text)
}

fn corpus_run(entry: Option<&str>) -> Result<(Value, String, bool), Failure> {
    let entries: Vec<_> = match entry {
        Some(id) => vec![corpus::entry(id).ok_or_else(|| Failure::Usage(format!("no corpus entry {id:?}")))?],
        None => corpus::bundled(),
    };
    let mut text = String::new();
    let mut all = true;
    let mut out = Vec::new();
    for e in &entries {
        let r = corpus::run_entry(e);
        all &= r.passed();
        text.push_str(&format!("{:<10} {}\n", r.id, if r.passed() { "PASS" } else { "FAIL" }));
        if let Some(err) = &r.error {
            text.push_str(&format!("    error: {err}\n"));
        }
        for c in &r.checks {
            text.push_str(&format!("    {} {:<28} @{} {}\n", if c.passed { "ok  " } else { "FAIL" }, c.name, c.origin.label(), c.detail));
        }
        out.push(r.to_json());
    }
    Ok((json!({"schema": SCHEMA, "command": "corpus run", "passed": all, "entries": out}), text, all))
}

fn emit(format: Format, v: &Value, text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(v).unwrap()),
        Format::Csv | Format::Text => write!(out, "{text}"),
    };
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a).map(|(v, t)| emit(a.format, &v, &t)),
        Command::Solve { job, exact } => solve(job, *exact).map(|(v, t)| emit(job.format, &v, &t)),
        Command::Asym(a) => asym(a).map(|(v, csv, text)| emit(a.format, &v, if matches!(a.format, Format::Csv) { &csv } else { &text })),
        Command::Corpus { action: CorpusAction::List { format } } => {
            let (v, t) = corpus_list();
            emit(*format, &v, &t);
            Ok(())
        }
        Command::Corpus { action: CorpusAction::Run { entry, format } } => match corpus_run(entry.as_deref()) {
            Ok((v, t, all)) => {
                emit(*format, &v, &t);
                if all {
                    Ok(())
                } else {
                    Err(Failure::Negative("corpus expectations failed".into(), None))
                }
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Negative(m, v)) => {
            if let Some(v) = v {
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            }
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
