//! `viewcheck` command line: runs `.bk` specs, single operator queries,
//! bundled example fixtures, the lemma search and the law suite.

use std::fmt::Write as _;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value as Json};

use viewcheck_core::design::{Counterexample, SearchBounds, ViewClass};
use viewcheck_core::laws;
use viewcheck_core::leak::LeakEntry;
use viewcheck_core::{AlgebraError, State, Value, DEFAULT_STATE_LIMIT};
use viewcheck_dsl::ast::Query;
use viewcheck_dsl::elaborate::{view_pairs, Elaborated};
use viewcheck_dsl::{parse, printer, Check, DiagKind, Diagnostic, Model, Outcome, Pos};

pub const SCHEMA_VERSION: &str = "1";

/// Bundled fixtures, by name.
pub const EXAMPLES: [(&str, &str); 8] = [
    ("ex-v1-localise", include_str!("../../../fixtures/ex-v1-localise.bk")),
    ("ex-v2-localise", include_str!("../../../fixtures/ex-v2-localise.bk")),
    ("ex-v3-localise", include_str!("../../../fixtures/ex-v3-localise.bk")),
    ("ex-v1-globalise", include_str!("../../../fixtures/ex-v1-globalise.bk")),
    ("ex-v2-globalise", include_str!("../../../fixtures/ex-v2-globalise.bk")),
    ("ex-v3-globalise", include_str!("../../../fixtures/ex-v3-globalise.bk")),
    ("guess-infer", include_str!("../../../fixtures/guess-infer.bk")),
    ("auth-paradox", include_str!("../../../fixtures/auth-paradox.bk")),
];

pub fn example_source(name: &str) -> Option<&'static str> {
    EXAMPLES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses and elaborates a bundled fixture.
pub fn load_example(name: &str) -> Result<Model, Diagnostic> {
    let src = example_source(name)
        .ok_or_else(|| Diagnostic::elab(Pos::default(), format!("unknown example `{name}`; valid names: {}", example_names())))?;
    viewcheck_dsl::load(src, DEFAULT_STATE_LIMIT)
}

fn example_names() -> String {
    EXAMPLES.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}

#[derive(Parser, Debug)]
#[command(name = "viewcheck", version, about = "Finite-model checker for confidentiality views")]
struct Cli {
    /// Emit a JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Largest state space any alphabet may have.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_STATE_LIMIT)]
    max_states: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every `check` in a spec file.
    Check { file: String },
    /// Localise a system or design through a view.
    Localise {
        file: String,
        view: String,
        target: String,
        /// Expected result, e.g. `delta(vu:a >= 0)`.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Globalise the localisation of a system.
    Globalise {
        file: String,
        view: String,
        system: String,
        #[arg(long)]
        expect: Option<String>,
    },
    /// Infer what an observation reveals about a system.
    Infer {
        file: String,
        system: String,
        view: String,
        /// Observation over the view and its primed copy.
        #[arg(long)]
        obs: String,
        #[arg(long)]
        expect: Option<String>,
    },
    /// Check the healthiness conditions of a view.
    Healthy { file: String, view: String },
    /// Run a leak analysis.
    Leak {
        file: String,
        system: String,
        view: String,
        secret: String,
        policy: String,
    },
    /// Check that one system refines another.
    Refines {
        file: String,
        implementation: String,
        specification: String,
    },
    /// Search small models for counterexamples to design localisation.
    Lemma335 {
        #[arg(long, value_name = "N")]
        max_sys: usize,
        #[arg(long, value_name = "M")]
        max_vu: usize,
        /// Stop at the first counterexample.
        #[arg(long)]
        first: bool,
        #[arg(long, value_enum, default_value_t = Views::Healthy)]
        views: Views,
    },
    /// Run a bundled example; without a name, list them.
    Example { name: Option<String> },
    /// Run the randomized algebraic law suite.
    Laws {
        #[arg(long, default_value_t = 500)]
        instances: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Views {
    Healthy,
    All,
    Surjective,
}

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Serialize, Debug)]
pub struct Report {
    pub version: &'static str,
    pub tool: String,
    pub command: String,
    pub results: Vec<QueryResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub exit: i32,
}

#[derive(Serialize, Debug)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Serialize, Debug)]
pub struct QueryResult {
    pub query: String,
    pub verdict: &'static str,
    pub detail: String,
    pub witness: Option<Map<String, Json>>,
    pub entries: Option<Vec<Json>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexamples: Option<Vec<Json>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub ms: f64,
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Int(i) => Json::from(*i),
        Value::Bool(b) => Json::from(*b),
        Value::Sym(s) => Json::from(s.clone()),
    }
}

/// Variables in canonical alphabet order.
pub fn state_json(s: &State) -> Map<String, Json> {
    s.bindings().iter().map(|(n, v)| (n.to_string(), value_json(v))).collect()
}

fn entry_json(e: &LeakEntry) -> Json {
    serde_json::json!({
        "observation": state_json(&e.observation),
        "inferred": e.inferred,
        "baseline": e.baseline,
    })
}

fn counterexample_json(c: &Counterexample) -> Json {
    serde_json::json!({
        "sys_size": c.sys_size,
        "vu_size": c.vu_size,
        "view": view_pairs(&c.view),
        "pre": printer::predicate(&c.pre),
        "post": printer::predicate(&c.post),
        "witness": state_json(&c.witness),
    })
}

impl QueryResult {
    fn new(o: Outcome, ms: f64) -> Self {
        QueryResult {
            query: o.query,
            verdict: o.verdict.name(),
            detail: o.detail,
            witness: o.witness.as_ref().map(state_json),
            entries: o.entries.as_ref().map(|es| es.iter().map(entry_json).collect()),
            counterexamples: o.counterexamples.as_ref().map(|cs| cs.iter().map(counterexample_json).collect()),
            notes: o.notes,
            ms,
        }
    }
}

enum Failure {
    Diag(Diagnostic),
    Algebra(AlgebraError),
    Io(String),
}

impl Failure {
    fn exit(&self) -> i32 {
        match self {
            Failure::Diag(d) if d.kind == DiagKind::Guard => EXIT_INTERNAL,
            Failure::Diag(_) | Failure::Io(_) => EXIT_INPUT,
            Failure::Algebra(_) => EXIT_INTERNAL,
        }
    }

    fn report(&self) -> ErrorReport {
        match self {
            Failure::Diag(d) => ErrorReport {
                kind: match d.kind {
                    DiagKind::Syntax => "syntax",
                    DiagKind::Elaboration => "elaboration",
                    DiagKind::Guard => "guard",
                },
                line: d.pos.line,
                col: d.pos.col,
                message: d.message.clone(),
            },
            Failure::Algebra(e) => ErrorReport {
                kind: match e {
                    AlgebraError::StateSpaceTooLarge { .. } | AlgebraError::SearchTooLarge { .. } => "guard",
                    _ => "internal",
                },
                line: 0,
                col: 0,
                message: e.to_string(),
            },
            Failure::Io(m) => ErrorReport {
                kind: "io",
                line: 0,
                col: 0,
                message: m.clone(),
            },
        }
    }
}

impl From<Diagnostic> for Failure {
    fn from(d: Diagnostic) -> Self {
        Failure::Diag(d)
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Self {
        Failure::Algebra(e)
    }
}

fn read(file: &str) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| Failure::Io(format!("cannot read `{file}`: {e}")))
}

/// Runs checks, timing each one.
fn run_checks(checks: &[Check]) -> Result<Vec<QueryResult>, Failure> {
    checks
        .iter()
        .map(|c| {
            let t = Instant::now();
            let o = c.run()?;
            Ok(QueryResult::new(o, t.elapsed().as_secs_f64() * 1e3))
        })
        .collect()
}

/// Loads `file` and runs one extra query written in spec syntax.
fn run_query(file: &str, limit: u64, query: String) -> Result<Vec<QueryResult>, Failure> {
    let src = read(file)?;
    let mut model = viewcheck_dsl::load(&src, limit)?;
    let extra = parse(&format!("check {query}")).map_err(|mut d| {
        d.message = format!("in command-line query `{query}`: {}", d.message);
        d
    })?;
    let before = model.checks.len();
    model.add(&extra)?;
    run_checks(&model.checks[before..])
}

fn with_expect(q: String, expect: &Option<String>) -> String {
    match expect {
        Some(e) => format!("{q} expect {e}"),
        None => q,
    }
}

fn lemma(max_sys: usize, max_vu: usize, first: bool, views: Views) -> Result<Vec<QueryResult>, Failure> {
    let class = match views {
        Views::Healthy => ViewClass::Healthy,
        Views::All => ViewClass::All,
        Views::Surjective => ViewClass::Surjective,
    };
    let mut bounds = SearchBounds::new(max_sys, max_vu).class(class);
    if first {
        bounds = bounds.first();
    }
    let check = Check {
        text: printer::query(&Query::Lemma335 {
            max_sys: max_sys as u64,
            max_vu: max_vu as u64,
        }),
        pos: Pos::default(),
        query: Elaborated::Lemma335(bounds),
    };
    run_checks(std::slice::from_ref(&check))
}

fn law_suite(instances: usize, seed: u64) -> Result<Vec<QueryResult>, Failure> {
    let t = Instant::now();
    let results = laws::run_laws(instances, seed)?;
    let ms = t.elapsed().as_secs_f64() * 1e3 / results.len().max(1) as f64;
    Ok(results
        .into_iter()
        .map(|r| QueryResult {
            query: format!("law {}", r.name),
            verdict: if r.passed() { "holds" } else { "fails" },
            detail: match &r.failure {
                None => format!("{} instances", r.instances),
                Some(f) => f.clone(),
            },
            witness: None,
            entries: None,
            counterexamples: None,
            notes: Vec::new(),
            ms,
        })
        .collect())
}

fn dispatch(cli: &Cli) -> Result<Vec<QueryResult>, Failure> {
    let limit = cli.max_states;
    match &cli.command {
        Command::Check { file } => {
            let model = viewcheck_dsl::load(&read(file)?, limit)?;
            run_checks(&model.checks)
        }
        Command::Localise {
            file,
            view,
            target,
            expect,
        } => run_query(file, limit, with_expect(format!("localise {view} {target}"), expect)),
        Command::Globalise {
            file,
            view,
            system,
            expect,
        } => run_query(file, limit, with_expect(format!("globalise {view} {system}"), expect)),
        Command::Infer {
            file,
            system,
            view,
            obs,
            expect,
        } => run_query(file, limit, with_expect(format!("infer {system} {view} {obs}"), expect)),
        Command::Healthy { file, view } => run_query(file, limit, format!("healthy {view}")),
        Command::Leak {
            file,
            system,
            view,
            secret,
            policy,
        } => run_query(file, limit, format!("leak {system} {view} {secret} {policy}")),
        Command::Refines {
            file,
            implementation,
            specification,
        } => run_query(file, limit, format!("refines {implementation} {specification}")),
        Command::Lemma335 {
            max_sys,
            max_vu,
            first,
            views,
        } => lemma(*max_sys, *max_vu, *first, *views),
        Command::Example { name } => match name {
            None => Ok(Vec::new()),
            Some(n) => {
                let src = example_source(n).ok_or_else(|| {
                    Failure::Diag(Diagnostic::elab(
                        Pos::default(),
                        format!("unknown example `{n}`; valid names: {}", example_names()),
                    ))
                })?;
                let model = viewcheck_dsl::load(src, limit)?;
                run_checks(&model.checks)
            }
        },
        Command::Laws { instances, seed } => law_suite(*instances, *seed),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Localise { .. } => "localise",
        Command::Globalise { .. } => "globalise",
        Command::Infer { .. } => "infer",
        Command::Healthy { .. } => "healthy",
        Command::Leak { .. } => "leak",
        Command::Refines { .. } => "refines",
        Command::Lemma335 { .. } => "lemma335",
        Command::Example { .. } => "example",
        Command::Laws { .. } => "laws",
    }
}

/// Output style for text reports.
#[derive(Debug, Clone, Copy, Default)]
pub struct Style {
    pub color: bool,
    /// Include timings in text output.
    pub timings: bool,
}

fn paint(s: &str, code: &str, style: Style) -> String {
    if style.color {
        format!("\x1b[{code}m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

fn render_text(r: &Report, list_examples: bool, style: Style) -> String {
    let mut out = String::new();
    if list_examples {
        for (n, _) in EXAMPLES {
            let _ = writeln!(out, "{n}");
        }
    }
    for q in &r.results {
        let code = if matches!(q.verdict, "holds" | "clean") { "32" } else { "31" };
        let _ = write!(out, "{} {}", paint(&format!("[{}]", q.verdict), code, style), q.query);
        if style.timings {
            let _ = write!(out, "  ({:.1} ms)", q.ms);
        }
        out.push('\n');
        let _ = writeln!(out, "    {}", q.detail);
        for n in &q.notes {
            let _ = writeln!(out, "    {n}");
        }
    }
    if let Some(e) = &r.error {
        let at = if e.line > 0 { format!("{}:{}: ", e.line, e.col) } else { String::new() };
        let _ = writeln!(out, "{} {at}{}", paint(&format!("{} error:", e.kind), "31", style), e.message);
    } else if !r.results.is_empty() {
        let failed = r.results.iter().filter(|q| !matches!(q.verdict, "holds" | "clean")).count();
        let _ = writeln!(out, "{} queries, {} negative", r.results.len(), failed);
    }
    out
}

/// Runs the tool on `argv` (without the program name is fine); returns the
/// exit code and the text written to standard output.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_styled(argv, Style::default())
}

pub fn run_styled<I, T>(argv: I, style: Style) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = std::iter::once("viewcheck".into())
        .chain(argv.into_iter().map(Into::into))
        .collect();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    let (exit, results, error) = match dispatch(&cli) {
        Ok(results) => {
            let ok = results.iter().all(|q| matches!(q.verdict, "holds" | "clean"));
            (if ok { EXIT_OK } else { EXIT_FAILED }, results, None)
        }
        Err(f) => (f.exit(), Vec::new(), Some(f.report())),
    };
    let report = Report {
        version: SCHEMA_VERSION,
        tool: format!("viewcheck {}", env!("CARGO_PKG_VERSION")),
        command: command_name(&cli.command).to_string(),
        results,
        error,
        exit,
    };
    let list = matches!(cli.command, Command::Example { name: None });
    let text = if cli.json {
        let mut s = serde_json::to_string_pretty(&report).expect("report serialises");
        s.push('\n');
        s
    } else {
        render_text(&report, list, style)
    };
    (exit, text)
}
