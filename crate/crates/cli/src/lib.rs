//! Command-line front end for `ramond-core`.
//!
//! [`run`] parses arguments, executes one command and returns the exit code
//! together with the text for stdout and stderr, so the binary is a thin
//! wrapper and the whole surface is testable in-process.

use std::ffi::OsString;
use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use ramond_core::e8;
use ramond_core::expr::{evaluate, parse_expression, EvalConfig, Value};
use ramond_core::family::{self, VerificationReport};
use ramond_core::json;
use ramond_core::modular::{eta_inverse_power, phi_basis};
use ramond_core::series::{QSeries, Rational};
use ramond_core::suite::{run_suite, SuiteConfig, SuiteName};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "ramond", version, about = "Exact modular-form and family-index computations")]
pub struct Cli {
    /// Highest power of q kept in expansions.
    #[arg(long, global = true, default_value_t = 10)]
    pub q_order: usize,
    /// Highest power of z kept in Jacobi-like forms.
    #[arg(long, global = true, default_value_t = 16)]
    pub z_order: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an expression such as "E4^3 - 728*Delta" or "CK(E4)".
    Eval { expression: String },
    /// Run verification claims.
    Suite {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: SuiteName,
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
    },
    /// Basis of M^k normalized against prod (1-q^n)^{-m}.
    PhiBasis {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        fiber_dim: u32,
    },
    /// Proportionality constants c(j, n) for n <= q-order.
    CTable {
        #[arg(long)]
        fiber_dim: usize,
        #[arg(long)]
        j: u32,
    },
    /// Relations among the lowest surviving index classes.
    Anomaly {
        #[arg(long)]
        fiber_dim: usize,
    },
    /// The Witten-genus family series in fiber-integration symbols.
    Sch {
        #[arg(long)]
        fiber_dim: usize,
        #[arg(long)]
        max_degree: u32,
    },
    /// Check the family theorem symbolically and print its display.
    VerifyMain {
        #[arg(long)]
        fiber_dim: usize,
        #[arg(long)]
        max_degree: u32,
    },
    /// E8 character data and the E8 family identity.
    E8 {
        #[arg(long, default_value_t = e8::MAX_BUNDLE_DEGREE)]
        max_degree: u32,
    },
}

fn parse_suite(s: &str) -> Result<SuiteName, String> {
    s.parse()
}

/// Everything a command produced: the echo of the invocation, effective
/// truncations and the payload.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputDocument {
    pub command: Vec<String>,
    pub q_order: usize,
    pub z_order: usize,
    pub result: Json,
    pub notes: Vec<String>,
    pub text: String,
    pub csv: Option<String>,
    pub passed: bool,
    pub internal_error: bool,
}

impl OutputDocument {
    pub fn to_json(&self) -> Json {
        json!({
            "command": self.command,
            "q_order": self.q_order,
            "z_order": self.z_order,
            "status": if self.passed { "pass" } else { "fail" },
            "result": self.result,
            "notes": self.notes,
        })
    }
}

/// Exit code and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Self {
        Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: msg.into() }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome::usage(text)
            };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let format = cli.format;
    let doc = match catch_unwind(AssertUnwindSafe(|| execute(&cli, echo))) {
        Ok(Ok(doc)) => doc,
        Ok(Err(msg)) => return Outcome::usage(format!("error: {msg}\n")),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            return Outcome { code: EXIT_INTERNAL, stdout: String::new(), stderr: format!("internal error: {msg}\n") };
        }
    };
    let stdout = match format {
        Format::Text => format!("{}\n", doc.text),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&doc.to_json()).expect("serializable")),
        Format::Csv => match &doc.csv {
            Some(c) => c.clone(),
            None => return Outcome::usage(format!("error: csv output is not available for {}\n", command_name(&cli.command))),
        },
    };
    let code = if doc.internal_error {
        EXIT_INTERNAL
    } else if doc.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    };
    Outcome { code, stdout, stderr: String::new() }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eval { .. } => "eval",
        Command::Suite { .. } => "suite",
        Command::PhiBasis { .. } => "phi-basis",
        Command::CTable { .. } => "c-table",
        Command::Anomaly { .. } => "anomaly",
        Command::Sch { .. } => "sch",
        Command::VerifyMain { .. } => "verify-main",
        Command::E8 { .. } => "e8",
    }
}

fn doc(cli: &Cli, command: Vec<String>, result: Json, text: String) -> OutputDocument {
    OutputDocument {
        command,
        q_order: cli.q_order,
        z_order: cli.z_order,
        result,
        notes: Vec::new(),
        text,
        csv: None,
        passed: true,
        internal_error: false,
    }
}

fn series_csv(rows: &mut String, prefix: &str, s: &QSeries<Rational>) {
    for (n, c) in s.coeffs().iter().enumerate() {
        rows.push_str(&format!("{prefix}{n},{},{}\n", c.numer(), c.denom()));
    }
}

fn execute(cli: &Cli, echo: Vec<String>) -> Result<OutputDocument, String> {
    let q = cli.q_order;
    match &cli.command {
        Command::Eval { expression } => {
            let e = parse_expression(expression).map_err(|e| e.to_string())?;
            let v = evaluate(&e, &EvalConfig { q_order: q, z_order: cli.z_order }).map_err(|e| e.to_string())?;
            let mut d = doc(cli, echo, json!({"expression": e.to_string(), "value": v.to_json(q)}), v.render(q));
            let mut csv = String::new();
            if let Some(s) = v.expansion(q) {
                csv.push_str("n,numerator,denominator\n");
                series_csv(&mut csv, "", &s);
            } else if let Some(j) = v.jacobi() {
                csv.push_str("z_power,n,numerator,denominator\n");
                for (k, c) in j.coeffs().iter().enumerate() {
                    series_csv(&mut csv, &format!("{k},"), &c.expand(q));
                }
            }
            d.csv = Some(csv);
            if matches!(v, Value::Natural(_)) {
                d.notes.push("natural lift: index 1, corrections f_{2l} listed in the delta basis".into());
            }
            Ok(d)
        }
        Command::Suite { suite, seed } => {
            let report = run_suite(*suite, &SuiteConfig { seed: *seed });
            let mut result = report.to_json();
            // timings are the only nondeterministic part of a report
            if let Some(obj) = result.as_object_mut() {
                obj.remove("timing");
            }
            let mut d = doc(cli, echo, result, report.render());
            d.notes.push("suite claims use fixed truncations; --q-order and --z-order do not apply".into());
            d.passed = report.passed();
            d.internal_error = report.internal_error();
            Ok(d)
        }
        Command::PhiBasis { weight, fiber_dim } => {
            let basis = phi_basis(*weight, *fiber_dim).map_err(|e| e.to_string())?;
            let eta = eta_inverse_power(*fiber_dim, q);
            let mut lines = vec![format!("M^{weight}, dimension {}, normalized by prod (1-q^n)^-{fiber_dim}", basis.dim())];
            let mut csv = String::from("i,n,numerator,denominator\n");
            let mut normalized = Vec::new();
            for (i, f) in basis.elements.iter().enumerate() {
                let s = f.expand(q).mul(&eta);
                lines.push(format!("phi_{i} = {}", f.render_delta_basis()));
                lines.push(format!("    normalized: {s}"));
                series_csv(&mut csv, &format!("{i},"), &s);
                normalized.push(json::series(&s));
            }
            let mut result = basis.to_json(q);
            result["normalized"] = Json::Array(normalized);
            let mut d = doc(cli, echo, result, lines.join("\n"));
            d.csv = Some(csv);
            Ok(d)
        }
        Command::CTable { fiber_dim, j } => {
            let table = family::c_table(*fiber_dim, *j, q).map_err(|e| e.to_string())?;
            let mut csv = String::from("n,numerator,denominator\n");
            series_csv(&mut csv, "", &QSeries::from_coeffs(table.clone()));
            let text = table.iter().enumerate().map(|(n, c)| format!("c({j},{n}) = {c}")).collect::<Vec<_>>().join("\n");
            let result = json!({
                "fiber_dim": fiber_dim,
                "j": j,
                "c": table.iter().map(json::rational).collect::<Vec<_>>(),
            });
            let mut d = doc(cli, echo, result, text);
            d.csv = Some(csv);
            Ok(d)
        }
        Command::Anomaly { fiber_dim } => {
            let a = family::anomaly_relations(*fiber_dim, q).map_err(|e| e.to_string())?;
            let mut text = a.render().join("\n");
            text.push_str(if a.verified { "\nverified against the index symbols" } else { "\nNOT verified against the index symbols" });
            let mut d = doc(cli, echo, a.to_json(), text);
            d.passed = a.verified;
            Ok(d)
        }
        Command::Sch { fiber_dim, max_degree } => {
            check_family_args(*fiber_dim, *max_degree)?;
            let s = family::sch_series(*fiber_dim, *max_degree, q);
            let coefficients: Vec<Json> = s.series.coeffs().iter().map(|c| Json::String(c.render())).collect();
            let result = json!({"fiber_dim": fiber_dim, "max_degree": max_degree, "coefficients": coefficients});
            Ok(doc(cli, echo, result, s.render()))
        }
        Command::VerifyMain { fiber_dim, max_degree } => {
            check_family_args(*fiber_dim, *max_degree)?;
            let r = family::verify_main_theorem(*fiber_dim, *max_degree, q).map_err(|e| e.to_string())?;
            let mut d = doc(cli, echo, r.to_json(), report_text(&r));
            d.notes.push(format!("working q-order {}", family::working_q_order(*fiber_dim, *max_degree, q)));
            d.passed = r.passed();
            Ok(d)
        }
        Command::E8 { max_degree } => {
            if *max_degree > e8::MAX_BUNDLE_DEGREE {
                return Err(format!("--max-degree must be at most {}", e8::MAX_BUNDLE_DEGREE));
            }
            let data = e8::basic_character(q).map_err(|e| e.to_string())?;
            let h = e8::h_expansion(6, q).map_err(|e| e.to_string())?;
            let r = e8::verify_e8_theorem(*max_degree, q).map_err(|e| e.to_string())?;
            let dims = data.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ");
            let mut lines = vec![format!("dim W_n: {dims}")];
            for (i, f) in h.h.iter().enumerate() {
                lines.push(format!("H, (e1/2)^{i}: {}", f.render_delta_basis()));
            }
            lines.push(report_text(&r));
            let result = json!({"character": data.to_json(), "h": h.to_json(q), "theorem": r.to_json()});
            let mut d = doc(cli, echo, result, lines.join("\n"));
            d.notes.push(e8::RESCALING_NOTE.to_string());
            d.passed = r.passed() && h.verified;
            Ok(d)
        }
    }
}

fn check_family_args(m: usize, cap: u32) -> Result<(), String> {
    if m == 0 || m % 2 == 1 {
        return Err(format!("--fiber-dim must be a positive even number, got {m}"));
    }
    if cap % 2 == 1 {
        return Err(format!("--max-degree must be even, got {cap}"));
    }
    Ok(())
}

fn report_text(r: &VerificationReport) -> String {
    let mut lines = vec![format!("{}: {}", r.claim, if r.passed() { "pass" } else { "FAIL" })];
    if let Some(m) = &r.first_mismatch {
        lines.push(format!("first mismatch: {m}"));
    }
    for c in &r.checks {
        lines.push(format!("  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail));
    }
    for d in &r.display {
        lines.push(String::new());
        lines.push(d.clone());
    }
    lines.join("\n")
}
