use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use laxrecon::checks::{run_property_suite, SuiteConfig};
use laxrecon::kp::KpEngine;
use laxrecon::pdo::PdOperator;
use laxrecon::recon::reconstruct;
use laxrecon::Error;

#[derive(Parser)]
#[command(name = "laxrecon", version, about = "Exact KP flows and their reconstruction")]
struct Cli {
    /// Largest total weight a + b to compute.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(4..))]
    max_weight: u32,

    /// Extra truncation depth, used for soundness re-checks.
    #[arg(long, global = true, default_value_t = 0)]
    depth_margin: u32,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print L^k, with L truncated after `depth` negative orders.
    LaxPower {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        /// Defaults to k + 1, which keeps two negative orders of L^k exact.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        depth: Option<u32>,
    },
    /// The flows R(a, b) in the w frame.
    Flows,
    /// The table Q(a, b) rebuilt from the seed.
    Reconstruct,
    /// Run the property suite; exits 0 iff every check passes.
    Verify,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotExact(_) => 10,
        Error::NoSolution(_) => 11,
        Error::NonUniqueSolution { .. } => 12,
        Error::WindowViolation { .. } => 13,
        _ => 1,
    }
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(out: &Option<PathBuf>, body: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, body),
        None => io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn table_text(name: &str, entries: impl Iterator<Item = ((u32, u32), String)>) -> String {
    let mut s = String::new();
    for ((a, b), p) in entries {
        s.push_str(&format!("{}({},{}) = {}\n", name, a, b, p));
    }
    s
}

fn lax_power(k: u32, depth: Option<u32>, format: Format) -> Result<String, Error> {
    let depth = depth.unwrap_or(k + 1);
    let op = PdOperator::lax_operator(depth).power(k);
    let residue = op.residue().inspect_err(|_| {
        eprintln!("error: res L^{} needs depth >= {}, got depth {}", k, k, depth);
    })?;
    Ok(match format {
        Format::Text => format!("{}\nresidue: {}\n", op, residue),
        Format::Json => {
            let coefficients: serde_json::Map<String, Value> =
                op.coefficients().map(|(n, c)| (n.to_string(), c.to_json())).collect();
            render_json(&json!({
                "k": k,
                "depth": depth,
                "top": op.top_order(),
                "validLow": op.valid_low(),
                "coefficients": coefficients,
                "residue": residue.to_json(),
            }))
        }
    })
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let body = match cli.command {
        Command::LaxPower { k, depth } => lax_power(k, depth, cli.format)?,
        Command::Flows => {
            let table = KpEngine::new(cli.depth_margin).flow_table(cli.max_weight)?;
            match cli.format {
                Format::Text => table_text("R", table.entries().map(|(k, p)| (k, p.to_string()))),
                Format::Json => render_json(&table.to_json()),
            }
        }
        Command::Reconstruct => {
            let table = reconstruct(cli.max_weight)?;
            match cli.format {
                Format::Text => {
                    let mut s = String::new();
                    for ((a, b), p) in table.entries() {
                        let how = table.provenance(a, b).map_or("?", |p| p.as_str());
                        s.push_str(&format!("Q({},{}) [{}] = {}\n", a, b, how, p));
                    }
                    s
                }
                Format::Json => render_json(&table.to_json()),
            }
        }
        Command::Verify => {
            let config = SuiteConfig { max_weight: cli.max_weight, depth_margin: cli.depth_margin, seed: cli.seed };
            let report = run_property_suite(config)?;
            let summary = report.summary();
            let body = match cli.format {
                Format::Text => summary.clone(),
                Format::Json => render_json(&report.to_json()),
            };
            if cli.out.is_some() {
                print!("{}", summary);
            }
            emit(&cli.out, &body).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            return Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    };
    emit(&cli.out, &body).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
