use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qdiag::catalog::smgf_catalog;
use qdiag::diagnosis::{build_tests, circuit_hash, fault_spec_hash, table_from_tests, CampaignConfig, TestOrder};
use qdiag::helstrom::error_probability;
use qdiag::linalg::CVector;
use qdiag::{
    circuit_separator, faulty_variant, parse_circuit, run_campaign, Circuit, DiagnosticTable, Error, FaultSpec,
    RotationConvention,
};

const EXIT_PARSE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNDETECTABLE: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const EXIT_AMBIGUOUS: u8 = 5;

/// Single-fault test generation and diagnosis for quantum circuits.
#[derive(Parser, Debug)]
#[command(name = "qdiag", version)]
struct Cli {
    /// Rotation angle convention for ry/rz gates.
    #[arg(long, global = true, default_value = "half")]
    convention: RotationConvention,

    /// Seed for diagnosis campaigns.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format (each subcommand has its own default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Missing-gate separators for the built-in gate library.
    Catalog {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Circuit-level separator input for one gate.
    Separator {
        #[arg(short, long)]
        circuit: PathBuf,
        /// Gate index, 1-based.
        #[arg(short = 'i', long)]
        gate: usize,
        /// `smgf` or a fault spec JSON file.
        #[arg(long, default_value = "smgf")]
        fault: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Diagnostic table of every test against every faulty variant.
    Table {
        #[arg(short, long)]
        circuit: PathBuf,
        #[arg(long, default_value = "smgf")]
        fault: String,
        /// Emit the table even if some faults are undetectable.
        #[arg(long)]
        allow_undetectable: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate a circuit under test and diagnose it.
    Diagnose {
        /// The golden (fault-free) circuit.
        #[arg(short, long)]
        circuit: PathBuf,
        #[arg(long, default_value = "smgf")]
        fault: String,
        /// Precomputed table; its hashes must match the circuit and fault spec.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Gate made faulty in the simulated circuit under test (0 = none).
        #[arg(long, default_value_t = 0)]
        inject_fault: usize,
        /// Maximum total circuit evaluations.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Shots per test application; omit to plan them from delta and --epsilon.
        #[arg(long, default_value = "10")]
        shots: ShotsArg,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// `adaptive` or a comma-separated list of test indices.
        #[arg(long, default_value = "adaptive")]
        order: OrderArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Debug)]
struct ShotsArg(Option<usize>);

impl std::str::FromStr for ShotsArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ShotsArg(None));
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer or `auto`, got `{s}`")),
            Ok(n) => Ok(ShotsArg(Some(n))),
        }
    }
}

#[derive(Clone, Debug)]
struct OrderArg(TestOrder);

impl std::str::FromStr for OrderArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(OrderArg(TestOrder::Adaptive));
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| format!("invalid test index `{t}`")))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| OrderArg(TestOrder::Explicit(v)))
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::GateIndexOutOfRange { .. } | Error::InvalidArgument(_) => EXIT_USAGE,
            Error::UndetectableFault { .. } => EXIT_UNDETECTABLE,
            Error::TableMismatch(_) => EXIT_MISMATCH,
            Error::AmbiguousDiagnosis { .. } => EXIT_AMBIGUOUS,
            _ => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let conv = cli.convention;
    match cli.command {
        Command::Catalog { output } => {
            let text = catalog(conv, cli.format.unwrap_or(Format::Text))?;
            emit(output.as_deref(), &text)
        }
        Command::Separator { circuit, gate, fault, output } => {
            let c = load_circuit(&circuit)?;
            let spec = load_fault_spec(&fault, &c)?;
            let text = separator(&c, &spec, gate, conv, cli.format.unwrap_or(Format::Text))?;
            emit(output.as_deref(), &text)
        }
        Command::Table { circuit, fault, allow_undetectable, output } => {
            let c = load_circuit(&circuit)?;
            let spec = load_fault_spec(&fault, &c)?;
            let tests = build_tests(&c, &spec, conv)?;
            let table = table_from_tests(&c, &spec, conv, &tests)?;
            let undetectable = table.undetectable();
            if !undetectable.is_empty() && !allow_undetectable {
                return Err(Failure::new(
                    EXIT_UNDETECTABLE,
                    format!(
                        "faults at gates {undetectable:?} are undetectable (pass --allow-undetectable to emit anyway)"
                    ),
                ));
            }
            let text = match cli.format.unwrap_or(Format::Json) {
                Format::Json => table.to_json() + "\n",
                Format::Csv => table.to_csv(),
                Format::Text => table.to_text(),
            };
            emit(output.as_deref(), &text)
        }
        Command::Diagnose { circuit, fault, table, inject_fault, budget, shots, epsilon, order, output } => {
            let c = load_circuit(&circuit)?;
            let spec = load_fault_spec(&fault, &c)?;
            if inject_fault > c.len() {
                return Err(Failure::new(
                    EXIT_USAGE,
                    format!("--inject-fault {inject_fault} out of range (circuit has {} gates)", c.len()),
                ));
            }
            let tests = build_tests(&c, &spec, conv)?;
            let table = match table {
                Some(path) => {
                    let t = DiagnosticTable::from_json(&read(&path)?)?;
                    t.metadata().check_inputs(&c, &spec, conv)?;
                    t
                }
                None => table_from_tests(&c, &spec, conv, &tests)?,
            };
            let cut = faulty_variant(&c, &spec, inject_fault)?;
            let cfg = CampaignConfig { shots_per_test: shots.0, seed: cli.seed, order: order.0, epsilon, budget };
            let result = run_campaign(&cut, &table, &tests, &cfg)?;
            let text = match cli.format.unwrap_or(Format::Text) {
                Format::Json => {
                    let doc = json!({
                        "tool_version": env!("CARGO_PKG_VERSION"),
                        "convention": conv,
                        "circuit_hash": circuit_hash(&c),
                        "fault_spec_hash": fault_spec_hash(&spec),
                        "injected_fault": inject_fault,
                        "config": cfg,
                        "result": result,
                    });
                    to_json(&doc)
                }
                Format::Csv => {
                    let mut out = String::from("test,p0,p1,punknown\n");
                    for (q, t) in &result.empirical {
                        writeln!(out, "{q},{},{},{}", t.p0, t.p1, t.p_unknown).expect("string write");
                    }
                    out
                }
                Format::Text => format!(
                    "verdict: {}\nevaluations: {}\ntests: {}\n",
                    result.verdict,
                    result.evaluations_used,
                    result.history.iter().map(|h| format!("F{}", h.test)).collect::<Vec<_>>().join(" ")
                ),
            };
            emit(output.as_deref(), &text)
        }
    }
}

fn catalog(conv: RotationConvention, format: Format) -> CliResult<String> {
    let entries = smgf_catalog(conv)?;
    Ok(match format {
        Format::Json => to_json(&json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "convention": conv,
            "fault": "smgf",
            "entries": entries,
        })),
        Format::Csv => {
            let mut out = String::from("gate,k,delta,separator\n");
            for e in &entries {
                writeln!(out, "{},{},{},\"{}\"", e.gate, e.k, e.delta, format_vector(&e.separator))
                    .expect("string write");
            }
            out
        }
        Format::Text => {
            let mut out = format!("# missing-gate separators ({} convention)\n", conv);
            writeln!(out, "{:<10} {:>6} {:>8}  separator", "gate", "delta", "k").expect("string write");
            for e in &entries {
                writeln!(out, "{:<10} {:>6.2} {:>8.4}  {}", e.gate, e.delta, e.k, format_vector(&e.separator))
                    .expect("string write");
            }
            out
        }
    })
}

#[derive(Serialize)]
struct SeparatorReport {
    tool_version: &'static str,
    convention: RotationConvention,
    circuit_hash: String,
    fault_spec_hash: String,
    gate: usize,
    k: f64,
    kappa: f64,
    delta: f64,
    phi_prime: CVector,
    phi: CVector,
}

fn separator(
    c: &Circuit,
    spec: &FaultSpec,
    gate: usize,
    conv: RotationConvention,
    format: Format,
) -> CliResult<String> {
    let sol = circuit_separator(c, spec, gate, conv)?;
    let report = SeparatorReport {
        tool_version: env!("CARGO_PKG_VERSION"),
        convention: conv,
        circuit_hash: circuit_hash(c),
        fault_spec_hash: fault_spec_hash(spec),
        gate,
        k: sol.k,
        kappa: sol.kappa,
        delta: error_probability(sol.k)?,
        phi_prime: sol.phi_prime,
        phi: sol.phi,
    };
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("index,re,im\n");
            for (i, z) in report.phi.as_slice().iter().enumerate() {
                writeln!(out, "{i},{},{}", z.re, z.im).expect("string write");
            }
            out
        }
        Format::Text => format!(
            "gate: {}\nk: {:.6}\nkappa: {:.6}\ndelta: {:.6}\nphi': {}\nphi: {}\n",
            gate,
            report.k,
            report.kappa,
            report.delta,
            format_vector(&report.phi_prime),
            format_vector(&report.phi)
        ),
    })
}

fn format_vector(v: &CVector) -> String {
    let parts: Vec<String> = v
        .as_slice()
        .iter()
        .map(|z| {
            let (re, im) = (clean(z.re), clean(z.im));
            if im == 0.0 {
                format!("{re:.4}")
            } else {
                format!("{re:.4}{im:+.4}i")
            }
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

/// Rounds values that would print as `-0.0000` to zero.
fn clean(x: f64) -> f64 {
    if x.abs() < 5e-5 {
        0.0
    } else {
        x
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> CliResult<Circuit> {
    let text = read(path)?;
    parse_circuit(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_fault_spec(arg: &str, c: &Circuit) -> CliResult<FaultSpec> {
    let spec = if arg.eq_ignore_ascii_case("smgf") {
        FaultSpec::smgf()
    } else {
        let path = Path::new(arg);
        FaultSpec::from_json(&read(path)?).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?
    };
    spec.validate(c).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    Ok(spec)
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
