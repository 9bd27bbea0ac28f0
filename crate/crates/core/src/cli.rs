//! Command-line front end. [`run`] parses arguments and writes to the given
//! streams so the binary and the tests share one code path.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage or input error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix, C64, DET_TOL};
use crate::oracle::{self, Lower, TestRecord};
use crate::phase::{
    self, BuildOptions, ElementarySemigroup, Family, FullGroup, HetGroup, PauliGroup, StructureReport,
};
use crate::sigma::{self, RuleFamily};
use crate::su2::{self, PolyadicIdentity, PolyadicSU2Element, Side};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "POLYSIGMA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "polysigma", version, about = "Polyadic Pauli and Σ-matrix algebra with a dense-matrix oracle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the complete Cayley table of a finite family.
    Cayley(FamilyArgs),
    /// Build a finite family and verify its axioms against the oracle.
    Verify(VerifyArgs),
    /// Multiply SU(2) parameter tuples with the closed-form rules.
    ParamMul(ParamMulArgs),
    /// Ordinary and polyadic trace of an element or polyadic identity.
    Trace(TraceArgs),
    /// Dump the ternary elementary or full Σ rule table as CSV.
    Rules(RulesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyOpt {
    Pauli,
    Elementary,
    Full,
    Het,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    DenseJson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exhaustive,
    Sample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RulesOpt {
    Elementary,
    Full,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub q: u32,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Maximum number of tuples an exhaustive pass may visit.
    #[arg(long, default_value_t = 30_000_000)]
    pub budget: u64,
    #[arg(long, default_value_t = matrix::DEFAULT_TOL)]
    pub tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyOpt,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyOpt,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: Mode,
    /// Tuples drawn by checks that sample.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Also write a JUnit XML report here.
    #[arg(long)]
    pub junit: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ParamMulArgs {
    /// JSON array of operand tuples; each operand is an element
    /// `{"arity": n, "blocks": [{"x0": …, "x": [x1, x2, x3]}, …]}`.
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Element JSON, or `{"arity": n, "identity": {"side": "left", "coeffs": […]}}`.
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RulesArgs {
    #[arg(long, value_enum)]
    pub family: RulesOpt,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Configures the global rayon pool from [`THREADS_ENV`], if set.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // a second initialisation in the same process is harmless
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the CLI on `args` (including the program name). Reports go to
/// `--out` or `out`; diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "polysigma: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Cayley(a) => cmd_cayley(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::ParamMul(a) => cmd_param_mul(&a, out),
        Command::Trace(a) => cmd_trace(&a, out),
        Command::Rules(a) => {
            let fam = match a.family {
                RulesOpt::Elementary => RuleFamily::Elementary,
                RulesOpt::Full => RuleFamily::Full,
            };
            emit(a.out.as_deref(), out, sigma::rule_dump_csv(fam).as_bytes())?;
            Ok(EXIT_PASS)
        }
    }
}

fn emit(path: Option<&Path>, out: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn bad_format(cmd: &str, f: Format) -> Error {
    Error::Unsupported(format!("format {f:?} is not available for {cmd}"))
}

fn cmd_cayley(a: &FamilyArgs, out: &mut dyn Write) -> Result<i32> {
    let c = &a.common;
    let format = c.format.unwrap_or(Format::Csv);
    match a.family {
        FamilyOpt::Pauli => cayley_for(&PauliGroup::new(c.q)?, c, format, out),
        FamilyOpt::Elementary => cayley_for(&ElementarySemigroup::new(c.n, c.q)?, c, format, out),
        FamilyOpt::Full => cayley_for(&FullGroup::new(c.n, c.q)?, c, format, out),
        FamilyOpt::Het => cayley_for(&HetGroup::new(c.n, c.q)?, c, format, out),
    }
}

#[derive(Serialize)]
struct DenseElement {
    label: String,
    /// Row-major entries as `[re, im]` pairs.
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct DenseDump {
    family: phase::FamilyKind,
    n: usize,
    q: u32,
    elements: Vec<DenseElement>,
}

fn dense_rows(m: &DenseMatrix) -> Vec<Vec<[f64; 2]>> {
    m.rows().into_iter().map(|r| r.into_iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn cayley_for<F: Family>(f: &F, c: &Common, format: Format, out: &mut dyn Write) -> Result<i32> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            phase::write_cayley_csv(f, c.budget, &mut buf)?;
            emit(c.out.as_deref(), out, &buf)?;
        }
        Format::DenseJson => {
            if f.order() as u64 > c.budget {
                return Err(Error::BudgetExceeded { required: f.order() as u128, budget: c.budget as u128 });
            }
            let elements = (0..f.order())
                .map(|i| {
                    let l = f.label(i);
                    DenseElement { label: l.to_string(), matrix: dense_rows(&l.lower()) }
                })
                .collect();
            let dump = DenseDump { family: f.kind(), n: f.arity(), q: f.modulus().get(), elements };
            emit(c.out.as_deref(), out, &to_json(&dump)?)?;
        }
        Format::Json => return Err(bad_format("cayley", format)),
    }
    Ok(EXIT_PASS)
}

/// Builds the requested structure report.
pub fn build_report(family: FamilyOpt, n: usize, q: u32, opts: &BuildOptions) -> Result<StructureReport> {
    match family {
        FamilyOpt::Pauli => phase::build_pauli_group(q, opts),
        FamilyOpt::Elementary => phase::build_elementary_semigroup(n, q, opts),
        FamilyOpt::Full => phase::build_full_group(n, q, opts),
        FamilyOpt::Het => phase::build_het_group(n, q, opts),
    }
}

fn junit_records(r: &StructureReport) -> Vec<TestRecord> {
    let rec = |name: &str, ok: Option<bool>| {
        ok.map(|passed| TestRecord {
            name: name.to_string(),
            passed,
            message: (!passed).then(|| r.witness.clone().unwrap_or_else(|| "failed".into())),
        })
    };
    [
        rec("closure", Some(r.closure)),
        rec("associativity", Some(r.associativity)),
        rec("identity", r.identity_verified),
        rec("querelement", r.querelement),
        rec("zero_absorption", r.zero_absorption),
    ]
    .into_iter()
    .flatten()
    .collect()
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let c = &a.common;
    let format = c.format.unwrap_or(Format::Json);
    if format != Format::Json {
        return Err(bad_format("verify", format));
    }
    let budget = match a.mode {
        Mode::Exhaustive => c.budget,
        Mode::Sample => 0,
    };
    let opts = BuildOptions { budget, seed: c.seed, samples: a.samples, tol: c.tol };
    let report = build_report(a.family, c.n, c.q, &opts)?;
    emit(c.out.as_deref(), out, &to_json(&report)?)?;
    if let Some(path) = &a.junit {
        let suite = format!("verify-{}-n{}-q{}", report.family, report.n, report.q);
        fs::write(path, oracle::junit_xml(&suite, &junit_records(&report)))?;
    }
    Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct ParamMulRow {
    result: PolyadicSU2Element,
    abs_deviation: f64,
    norm_deviation: f64,
}

#[derive(Serialize)]
struct ParamMulReport {
    n: usize,
    count: usize,
    max_abs_deviation: f64,
    max_norm_deviation: f64,
    passed: bool,
    results: Vec<ParamMulRow>,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Validation(e.to_string()))
}

/// Closed-form product of one tuple plus its oracle and norm deviations.
pub fn param_mul_tuple(n: usize, tuple: &[PolyadicSU2Element]) -> Result<(PolyadicSU2Element, f64, f64)> {
    if tuple.len() != n || tuple.iter().any(|e| e.arity() != n) {
        return Err(Error::Validation(format!("each tuple must hold {n} elements of arity {n}")));
    }
    let (result, dev) = match n {
        2 => {
            let (p, q) = (&tuple[0].blocks()[0], &tuple[1].blocks()[0]);
            let r = su2::binary_param_mul(p, q)?;
            let dev = (p.standard_matrix() * q.standard_matrix()).max_deviation(&r.standard_matrix());
            (PolyadicSU2Element::new(2, vec![r])?, dev)
        }
        3 => {
            let b = |i: usize| [tuple[i].blocks()[0], tuple[i].blocks()[1]];
            let r = su2::ternary_param_mul(&b(0), &b(1), &b(2))?;
            let e = PolyadicSU2Element::new(3, r.to_vec())?;
            let dev = oracle::lowered_product(tuple).max_deviation(&e.lower());
            (e, dev)
        }
        _ => return Err(Error::Unsupported(format!("param-mul supports n = 2 or 3, got {n}"))),
    };
    let norm_dev = result.blocks().iter().map(|p| (p.norm_sq() - 1.0).abs()).fold(0.0, f64::max);
    Ok((result, dev, norm_dev))
}

fn cmd_param_mul(a: &ParamMulArgs, out: &mut dyn Write) -> Result<i32> {
    let c = &a.common;
    if let Some(f) = c.format.filter(|f| *f != Format::Json) {
        return Err(bad_format("param-mul", f));
    }
    let tuples: Vec<Vec<PolyadicSU2Element>> = parse(read_json(&a.input)?)?;
    let mut results = Vec::with_capacity(tuples.len());
    for t in &tuples {
        let (result, abs_deviation, norm_deviation) = param_mul_tuple(c.n, t)?;
        results.push(ParamMulRow { result, abs_deviation, norm_deviation });
    }
    let max_abs = results.iter().map(|r| r.abs_deviation).fold(0.0, f64::max);
    let max_norm = results.iter().map(|r| r.norm_deviation).fold(0.0, f64::max);
    let passed = max_abs <= c.tol && max_norm <= DET_TOL;
    let report = ParamMulReport {
        n: c.n,
        count: results.len(),
        max_abs_deviation: max_abs,
        max_norm_deviation: max_norm,
        passed,
        results,
    };
    emit(c.out.as_deref(), out, &to_json(&report)?)?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct Complex {
    re: f64,
    im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct TraceReport {
    arity: usize,
    source: &'static str,
    ordinary_trace: Complex,
    polyadic_trace: Complex,
}

#[derive(serde::Deserialize)]
struct IdentitySpec {
    side: Side,
    coeffs: Vec<f64>,
}

fn cmd_trace(a: &TraceArgs, out: &mut dyn Write) -> Result<i32> {
    let c = &a.common;
    if let Some(f) = c.format.filter(|f| *f != Format::Json) {
        return Err(bad_format("trace", f));
    }
    let v = read_json(&a.input)?;
    let (m, source) = if let Some(spec) = v.get("identity") {
        let arity = v
            .get("arity")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Validation("identity input needs an integer \"arity\"".into()))?;
        let spec: IdentitySpec = parse(spec.clone())?;
        (PolyadicIdentity::new(arity as usize, spec.side, spec.coeffs)?.matrix(), "identity")
    } else {
        (parse::<PolyadicSU2Element>(v)?.to_matrix(), "element")
    };
    let report = TraceReport {
        arity: m.arity(),
        source,
        ordinary_trace: matrix::trace(&m.dense()).into(),
        polyadic_trace: su2::polyadic_trace(&m).into(),
    };
    emit(c.out.as_deref(), out, &to_json(&report)?)?;
    Ok(EXIT_PASS)
}

/// Entry point used by the binary.
pub fn main_with_env() -> i32 {
    init_threads();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = io::stdout().flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&["polysigma"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["polysigma", "verify", "--family", "nope"]).0, EXIT_USAGE);
        let (code, _, err) = run_capture(&["polysigma", "verify", "--family", "pauli", "--q", "6"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("phase modulus"));
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = run_capture(&["polysigma", "--help"]);
        assert_eq!(code, EXIT_PASS);
        assert!(out.contains("cayley"));
    }

    #[test]
    fn verify_pauli() {
        let (code, out, _) = run_capture(&["polysigma", "verify", "--family", "pauli", "--q", "4"]);
        assert_eq!(code, EXIT_PASS);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["order"], 16);
        assert_eq!(v["closure"], true);
        assert_eq!(v["family"], "pauli");
    }

    #[test]
    fn cayley_budget_refusal() {
        let (code, _, err) =
            run_capture(&["polysigma", "cayley", "--family", "het", "--n", "3", "--q", "4", "--budget", "100"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("budget"));
    }

    #[test]
    fn cayley_format_checks() {
        let (code, _, _) = run_capture(&["polysigma", "cayley", "--family", "pauli", "--format", "json"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, out, _) = run_capture(&["polysigma", "cayley", "--family", "pauli", "--format", "dense-json"]);
        assert_eq!(code, EXIT_PASS);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["elements"].as_array().unwrap().len(), 16);
    }

    #[test]
    fn rules_dump() {
        let (code, out, _) = run_capture(&["polysigma", "rules", "--family", "full"]);
        assert_eq!(code, EXIT_PASS);
        assert_eq!(out.lines().count(), 65);
    }
}
