//! Command dispatch: argument parsing, execution and rendering.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use jring_core::checker::suite::{paper_suite, Case, SuiteConfig, SuiteReport};
use jring_core::checker::theorems::{Outcome, TheoremId, TheoremInstance, TheoremVerdict, Validator};
use jring_core::checker::{
    classify, enumeration_estimate, verify_certificate, Bounds, ClassificationReport, SearchConfig, SearchMode,
    TargetKind, Verdict, Witness, DEFAULT_BUDGET, DEFAULT_TRIALS,
};
use jring_core::constructions::IdealSpec;
use jring_core::ring::DEFAULT_CAP;
use jring_core::structure::{
    center, idempotents, is_abelian, jacobson_radical, nilpotents, non_local_witness, units, Abelian,
};
use jring_core::{Error, FiniteRing};
use serde::Serialize;
use serde_json::json;

use crate::cache::Cache;
use crate::cert::{Certificate, SCHEMA_VERSION, TOOL_VERSION};
use crate::expr::{parse_ring_expr, Evaluator};
use crate::{CliError, EXIT_COUNTEREXAMPLE, EXIT_OK, EXIT_PARSE, EXIT_UNKNOWN};

#[derive(Parser, Debug)]
#[command(name = "jring", version, about = "Finite rings and bounded Armendariz-type checks")]
struct Cli {
    /// Emit one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for cached Cayley tables.
    #[arg(long, global = true, value_name = "PATH")]
    cache_dir: Option<PathBuf>,
    /// Worker threads for searches (default: available parallelism).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Largest exhaustive enumeration estimate, |R|^(deg_f + 1).
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Largest ring to materialize.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summary of a ring's structure.
    Info { expr: String },
    /// Elements of the Jacobson radical.
    Radical { expr: String },
    /// Idempotent elements.
    Idempotents { expr: String },
    /// Whether the non-units form an ideal.
    IsLocal { expr: String },
    /// Whether every idempotent is central.
    IsAbelian { expr: String },
    /// Bounded Armendariz-type classification.
    Classify {
        expr: String,
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long)]
        deg_f: usize,
        #[arg(long)]
        deg_g: usize,
        /// Defaults to exhaustive when within budget, sampled otherwise.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
    },
    /// Run the closure-theorem validators over a corpus file.
    CheckTheorems {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[arg(long, value_name = "N,M", value_parser = parse_bounds)]
        bounds: Bounds,
    },
    /// Reproduce the bundled worked examples.
    VerifyPaper {
        #[arg(long, default_value = "all", value_parser = parse_cases)]
        case: CaseArg,
        #[arg(long, default_value_t = 3)]
        truncation: usize,
    },
    /// Replay a JSON certificate.
    VerifyCert { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    Armendariz,
    Weak,
    J,
}

impl From<TargetArg> for TargetKind {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Armendariz => TargetKind::Zero,
            TargetArg::Weak => TargetKind::Nil,
            TargetArg::J => TargetKind::Jac,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sample,
}

#[derive(Clone, Debug)]
struct CaseArg(Vec<Case>);

fn parse_cases(s: &str) -> Result<CaseArg, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(CaseArg(Case::ALL.to_vec()));
    }
    Case::parse(s).map(|c| CaseArg(vec![c])).ok_or_else(|| format!("unknown case `{s}`, expected E2, E5, E7, E9 or all"))
}

fn parse_bounds(s: &str) -> Result<Bounds, String> {
    let (f, g) = s.split_once(',').ok_or("expected N,M")?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok(Bounds::new(num(f)?, num(g)?))
}

/// Result of a command: exit code plus either text or a JSON document.
struct Output {
    code: i32,
    text: String,
    json: serde_json::Value,
}

struct Context {
    cap: usize,
    cache: Option<Cache>,
    search: SearchConfig,
}

impl Context {
    fn ring(&self, expr: &str) -> Result<FiniteRing, CliError> {
        let e = parse_ring_expr(expr)?;
        Evaluator { cap: self.cap, cache: self.cache.as_ref() }.eval(&e)
    }
}

/// Runs one command; `args` excludes the program name. Returns the exit code
/// and everything the command prints.
pub fn run_command<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("jring")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    let json = cli.json;
    match execute(cli) {
        Ok(out) if json => (out.code, pretty(&out.json)),
        Ok(out) => (out.code, out.text),
        Err(e) if json => (e.exit_code(), pretty(&json!({ "schema_version": SCHEMA_VERSION, "error": e.to_string() }))),
        Err(e) => (e.exit_code(), format!("error: {e}\n")),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn to_value(v: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn execute(cli: Cli) -> Result<Output, CliError> {
    let mut search = SearchConfig::default().with_budget(cli.budget);
    if let Some(w) = cli.workers {
        search = search.with_workers(w);
    }
    let cache = cli.cache_dir.map(Cache::new).transpose()?;
    let cx = Context { cap: cli.cap, cache, search };
    match cli.command {
        Command::Info { expr } => info(&cx, &expr),
        Command::Radical { expr } => element_list(&cx, &expr, "radical", |r| Ok(jacobson_radical(r)?.members().to_vec())),
        Command::Idempotents { expr } => {
            element_list(&cx, &expr, "idempotents", |r| Ok(idempotents(r)?.members().to_vec()))
        }
        Command::IsLocal { expr } => is_local_cmd(&cx, &expr),
        Command::IsAbelian { expr } => is_abelian_cmd(&cx, &expr),
        Command::Classify { expr, target, deg_f, deg_g, mode, trials } => {
            classify_cmd(&cx, &expr, target.into(), Bounds::new(deg_f, deg_g), mode, trials)
        }
        Command::CheckTheorems { corpus, bounds } => check_theorems(&cx, &corpus, bounds),
        Command::VerifyPaper { case, truncation } => verify_paper(&cx, &case.0, truncation),
        Command::VerifyCert { file } => verify_cert(&cx, &file),
    }
}

fn header(command: &str, ring: &FiniteRing) -> serde_json::Map<String, serde_json::Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("ring_expr".into(), json!(ring.name()));
    m.insert("ring_size".into(), json!(ring.size() as u64));
    m
}

fn finish(mut m: serde_json::Map<String, serde_json::Value>) -> serde_json::Value {
    m.insert("tool_version".into(), json!(TOOL_VERSION));
    serde_json::Value::Object(m)
}

fn info(cx: &Context, expr: &str) -> Result<Output, CliError> {
    let ring = cx.ring(expr)?;
    let t = ring.require_table()?;
    let mut characteristic = 1;
    let mut x = t.one();
    while x != 0 {
        x = t.add(x, t.one());
        characteristic += 1;
    }
    let commutative = (0..t.size()).all(|x| (0..x).all(|y| t.mul(x, y) == t.mul(y, x)));
    let local = non_local_witness(&ring)?.is_none() && t.size() > 1;
    let abelian = is_abelian(&ring)? == Abelian::Abelian;
    let counts = [
        ("units", units(&ring)?.len()),
        ("nilpotents", nilpotents(&ring)?.len()),
        ("idempotents", idempotents(&ring)?.len()),
        ("radical", jacobson_radical(&ring)?.len()),
        ("center", center(&ring)?.len()),
    ];
    let mut m = header("info", &ring);
    m.insert("characteristic".into(), json!(characteristic));
    m.insert("commutative".into(), json!(commutative));
    m.insert("local".into(), json!(local));
    m.insert("abelian".into(), json!(abelian));
    let mut text = format!("ring: {}\nsize: {}\ncharacteristic: {characteristic}\n", ring.name(), t.size());
    for (k, v) in counts {
        m.insert(k.into(), json!(v));
        let _ = writeln!(text, "{k}: {v}");
    }
    let _ = writeln!(text, "commutative: {commutative}\nlocal: {local}\nabelian: {abelian}");
    Ok(Output { code: EXIT_OK, text, json: finish(m) })
}

fn element_list(
    cx: &Context,
    expr: &str,
    what: &str,
    members: impl Fn(&FiniteRing) -> jring_core::Result<Vec<usize>>,
) -> Result<Output, CliError> {
    let ring = cx.ring(expr)?;
    let t = ring.require_table()?;
    let labels: Vec<&str> = members(&ring)?.into_iter().map(|i| t.label(i)).collect();
    let mut text = format!("{what} of {} ({} of {} elements):\n", ring.name(), labels.len(), t.size());
    for l in &labels {
        let _ = writeln!(text, "  {l}");
    }
    let mut m = header(what, &ring);
    m.insert("count".into(), json!(labels.len()));
    m.insert("elements".into(), json!(labels));
    Ok(Output { code: EXIT_OK, text, json: finish(m) })
}

fn is_local_cmd(cx: &Context, expr: &str) -> Result<Output, CliError> {
    let ring = cx.ring(expr)?;
    let t = ring.require_table()?;
    let witness = non_local_witness(&ring)?;
    let local = witness.is_none() && t.size() > 1;
    let mut m = header("is-local", &ring);
    m.insert("local".into(), json!(local));
    let text = match (local, witness) {
        (true, _) => format!("{} is local\n", ring.name()),
        (false, Some(w)) => {
            m.insert("witness".into(), json!({ "element": t.label(w), "reason": "non-unit outside J(R)" }));
            format!("{} is not local: {} is a non-unit outside J(R)\n", ring.name(), t.label(w))
        }
        (false, None) => format!("{} is the zero ring, which is not local\n", ring.name()),
    };
    let code = if local { EXIT_OK } else { EXIT_COUNTEREXAMPLE };
    Ok(Output { code, text, json: finish(m) })
}

fn is_abelian_cmd(cx: &Context, expr: &str) -> Result<Output, CliError> {
    let ring = cx.ring(expr)?;
    let t = ring.require_table()?;
    let mut m = header("is-abelian", &ring);
    let (code, text) = match is_abelian(&ring)? {
        Abelian::Abelian => {
            m.insert("abelian".into(), json!(true));
            (EXIT_OK, format!("{} is abelian\n", ring.name()))
        }
        Abelian::Witness { idempotent, element } => {
            let (e, x) = (t.label(idempotent), t.label(element));
            m.insert("abelian".into(), json!(false));
            m.insert("witness".into(), json!({ "idempotent": e, "element": x }));
            (
                EXIT_COUNTEREXAMPLE,
                format!("{} is not abelian: idempotent {e} does not commute with {x}\n", ring.name()),
            )
        }
    };
    Ok(Output { code, text, json: finish(m) })
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Verified => EXIT_OK,
        Verdict::Counterexample => EXIT_COUNTEREXAMPLE,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn poly_text(coeffs: &[String]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.as_str() != "0")
        .map(|(i, c)| match i {
            0 => c.clone(),
            1 => format!("{c}·x"),
            _ => format!("{c}·x^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn witness_text(w: &Witness) -> String {
    let (i, j) = w.offending;
    let mut s = format!(
        "  f = {}\n  g = {}\n  f·g = 0, but a_{i}·b_{j} = {} lies outside the target ({} elements)\n",
        poly_text(&w.f),
        poly_text(&w.g),
        w.product,
        w.target_size
    );
    if let Some(trace) = &w.power_trace {
        let _ = writeln!(s, "  powers of the product: {}", trace.join(", "));
    }
    s
}

fn report_text(r: &ClassificationReport) -> String {
    let b = r.bounds;
    let mode = match r.mode {
        SearchMode::Exhaustive => "exhaustive".to_string(),
        SearchMode::Sampled { trials } => format!("sampled, {trials} trials"),
    };
    let mut s = format!(
        "{} ({} elements), {} at deg f <= {}, deg g <= {} ({mode}): {:?}\n",
        r.ring_expr,
        r.ring_size,
        r.target.property(),
        b.deg_f,
        b.deg_g,
        r.verdict
    );
    if let Some(w) = &r.witness {
        s.push_str(&witness_text(w));
    }
    let _ = writeln!(s, "  examined {} f, {} g leaves", r.stats.f_examined, r.stats.g_leaves);
    s
}

fn classify_cmd(
    cx: &Context,
    expr: &str,
    target: TargetKind,
    bounds: Bounds,
    mode: Option<ModeArg>,
    trials: u64,
) -> Result<Output, CliError> {
    let ring = cx.ring(expr)?;
    let mode = match mode {
        Some(ModeArg::Exhaustive) => SearchMode::Exhaustive,
        Some(ModeArg::Sample) => SearchMode::Sampled { trials },
        None => SearchMode::auto(ring.size(), bounds, cx.search.budget, trials),
    };
    let report = classify(&ring, target, bounds, mode, &cx.search)?;
    let cert = Certificate::from_report("classify", &report);
    Ok(Output { code: verdict_code(report.verdict), text: report_text(&report), json: to_value(&cert) })
}

fn read_corpus(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

#[derive(Serialize)]
struct Skipped {
    theorem: TheoremId,
    instance: Vec<String>,
    reason: String,
}

/// Theorem instances generated from a list of corpus rings, each paired with
/// the size of the largest ring it classifies.
fn corpus_instances(rings: &[FiniteRing]) -> Result<Vec<(TheoremInstance, u128, Vec<String>)>, CliError> {
    let mut out = Vec::new();
    let pow = |s: u128, e: u32| s.checked_pow(e).unwrap_or(u128::MAX);
    for (i, r) in rings.iter().enumerate() {
        let s = r.size();
        let name = r.name().to_string();
        out.push((TheoremInstance::Local { ring: r.clone() }, s, vec![name.clone()]));
        let radical = jacobson_radical(r)?;
        let nonzero: Vec<usize> = radical.members().iter().copied().filter(|&x| x != 0).collect();
        if let Some(&first) = nonzero.first() {
            let gens = |idx: &[usize]| -> jring_core::Result<Vec<_>> { idx.iter().map(|&x| r.element(x)).collect() };
            for ideal in [vec![first], nonzero.clone()] {
                let desc = vec![name.clone(), format!("{} generators", ideal.len())];
                out.push((TheoremInstance::Quot { ring: r.clone(), ideal: IdealSpec { generators: gens(&ideal)? } }, s, desc));
                if nonzero.len() == 1 {
                    break;
                }
            }
        }
        out.push((TheoremInstance::Tri { base: r.clone() }, pow(s, 3), vec![name.clone()]));
        out.push((TheoremInstance::Tn { base: r.clone(), n: 2 }, pow(s, 3), vec![name.clone(), "n=2".into()]));
        out.push((TheoremInstance::Tn { base: r.clone(), n: 3 }, pow(s, 6), vec![name.clone(), "n=3".into()]));
        out.push((TheoremInstance::Triv { base: r.clone() }, pow(s, 2), vec![name.clone()]));
        let t = r.require_table()?;
        for e in jring_core::structure::idempotent_indices(t).into_iter().filter(|&e| e != 0) {
            let desc = vec![name.clone(), format!("e={}", t.label(e))];
            out.push((TheoremInstance::Corner { ring: r.clone(), idempotent: r.element(e)? }, s, desc));
        }
        for other in &rings[i..] {
            let desc = vec![name.clone(), other.name().to_string()];
            out.push((TheoremInstance::Prod { left: r.clone(), right: other.clone() }, s * other.size(), desc));
        }
    }
    Ok(out)
}

fn check_theorems(cx: &Context, corpus: &Path, bounds: Bounds) -> Result<Output, CliError> {
    let exprs = read_corpus(corpus)?;
    let rings = exprs.iter().map(|e| cx.ring(e)).collect::<Result<Vec<_>, _>>()?;
    let validator = Validator::new(cx.search, cx.cap);
    let mut verdicts: Vec<TheoremVerdict> = Vec::new();
    let mut skipped = Vec::new();
    for (instance, largest, desc) in corpus_instances(&rings)? {
        let estimate = enumeration_estimate(largest, bounds);
        if largest > cx.cap as u128 || estimate > cx.search.budget {
            let reason = format!("largest ring has {largest} elements; enumeration estimate {estimate}");
            skipped.push(Skipped { theorem: instance.id(), instance: desc, reason });
            continue;
        }
        match validator.validate(&instance, bounds) {
            Ok(v) => verdicts.push(v),
            Err(e @ (Error::CapExceeded { .. } | Error::BudgetExceeded { .. })) => {
                skipped.push(Skipped { theorem: instance.id(), instance: desc, reason: e.to_string() })
            }
            Err(e) => return Err(e.into()),
        }
    }
    let failures = verdicts.iter().filter(|v| v.outcome == Outcome::Fails).count();
    let mut text = format!(
        "{} rings, bounds ({}, {}): {} instances checked, {} skipped, {failures} failed\n",
        rings.len(),
        bounds.deg_f,
        bounds.deg_g,
        verdicts.len(),
        skipped.len()
    );
    for id in TheoremId::ALL {
        let of: Vec<&TheoremVerdict> = verdicts.iter().filter(|v| v.theorem == id).collect();
        let count = |o: Outcome| of.iter().filter(|v| v.outcome == o).count();
        let _ = writeln!(
            text,
            "  {:<9} holds {:>4}  vacuous {:>4}  fails {:>3}  skipped {:>4}",
            id.code(),
            count(Outcome::Holds),
            count(Outcome::HoldsVacuously),
            count(Outcome::Fails),
            skipped.iter().filter(|s| s.theorem == id).count()
        );
    }
    for v in verdicts.iter().filter(|v| v.outcome == Outcome::Fails) {
        let _ = writeln!(text, "FAIL {} [{}]: {}", v.theorem.code(), v.instance.join("; "), v.notes.join("; "));
        if let Some(r) = &v.counterexample {
            text.push_str(&report_text(r));
        }
    }
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "check-theorems",
        "corpus": exprs,
        "bounds": bounds,
        "holds": failures == 0,
        "checked": verdicts.len(),
        "failures": failures,
        "verdicts": verdicts,
        "skipped": skipped,
        "tool_version": TOOL_VERSION,
    });
    let code = if failures == 0 { EXIT_OK } else { EXIT_COUNTEREXAMPLE };
    Ok(Output { code, text, json })
}

fn suite_text(report: &SuiteReport) -> String {
    let mut s = String::new();
    for case in &report.cases {
        let status = if case.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "[{status}] {:?}: {} ({} elements)", case.case, case.ring, case.ring_size);
        for c in &case.checks {
            let mark = if c.passed { "ok" } else { "FAILED" };
            let _ = writeln!(s, "    {mark:<6} {}: {}", c.name, c.detail);
        }
        for n in &case.notes {
            let _ = writeln!(s, "    note: {n}");
        }
    }
    let passed = report.cases.iter().filter(|c| c.passed).count();
    let _ = writeln!(s, "{passed}/{} cases passed at truncation {}", report.cases.len(), report.truncation);
    s
}

fn verify_paper(cx: &Context, cases: &[Case], truncation: usize) -> Result<Output, CliError> {
    let config = SuiteConfig { truncation, cap: cx.cap.max(DEFAULT_CAP), search: cx.search };
    let report = paper_suite(cases, &config)?;
    let mut json = to_value(&report);
    if let serde_json::Value::Object(m) = &mut json {
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("command".into(), json!("verify-paper"));
        m.insert("tool_version".into(), json!(TOOL_VERSION));
    }
    let code = if report.passed { EXIT_OK } else { EXIT_COUNTEREXAMPLE };
    Ok(Output { code, text: suite_text(&report), json })
}

/// Replays a certificate. Counterexamples are checked directly; other
/// verdicts are checked by rerunning the same search.
fn verify_cert(cx: &Context, file: &Path) -> Result<Output, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
    let cert: Certificate = serde_json::from_str(&text).map_err(|e| CliError::Json(e.to_string()))?;
    if cert.schema_version > SCHEMA_VERSION {
        return Err(CliError::Json(format!("unsupported schema version {}", cert.schema_version)));
    }
    let ring = cx.ring(&cert.ring_expr)?;
    let report = cert.to_report();
    let (valid, detail) = if ring.size() != cert.ring_size as u128 {
        (false, format!("ring has {} elements, certificate says {}", ring.size(), cert.ring_size))
    } else if cert.verdict == Verdict::Counterexample {
        match verify_certificate(&ring, &report) {
            Ok(true) => (true, "witness replays".to_string()),
            Ok(false) => (false, "witness does not replay".to_string()),
            Err(e @ Error::MalformedWitness(_)) => (false, e.to_string()),
            Err(e) => return Err(e.into()),
        }
    } else {
        let rerun = classify(&ring, report.target, report.bounds, report.mode, &cx.search)?;
        if rerun == report {
            (true, format!("search reproduces {:?}", rerun.verdict))
        } else {
            (false, format!("search gives {:?} with stats {:?}", rerun.verdict, rerun.stats))
        }
    };
    let mut m = header("verify-cert", &ring);
    m.insert("certificate_verdict".into(), json!(cert.verdict));
    m.insert("valid".into(), json!(valid));
    m.insert("detail".into(), json!(detail));
    let code = if valid { EXIT_OK } else { EXIT_COUNTEREXAMPLE };
    let text = format!("certificate for {} is {}: {detail}\n", ring.name(), if valid { "valid" } else { "INVALID" });
    Ok(Output { code, text, json: finish(m) })
}
