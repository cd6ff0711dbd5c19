mod certfile;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use erec_core::kernel::{Machine, DEFAULT_FUEL};

use commands::Ctx;
use report::{Report, Status, EXIT_ERROR};

/// Evaluator for recursion in the functional E, with a coded type universe
/// and a realizability checker.
///
/// Naturals are decimal, `<a,b,..>` tuples, `(a,b)` pairs, `{..}` sets, or a
/// built-in name (ID, SUCC, B2, B+, GL, D, OMEGA, TAG, LPO, LPO_LITERAL).
/// Exit status: 0 definite, 3 unknown, 4 mismatch, 1 error.
#[derive(Parser, Debug)]
#[command(name = "erec", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Fuel for each evaluation.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    pub fuel: u64,
    /// Naturals probed when a base type cannot be listed.
    #[arg(long, global = true, default_value_t = 64)]
    pub probe: u64,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Include a derivation or stage trace.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Certificate files to register before running.
    #[arg(long = "cert", global = true, value_name = "FILE")]
    pub certs: Vec<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Apply a code to arguments.
    Eval { code: String, args: Vec<String> },
    /// Build smn(p, q); with arguments, compare it against p applied to q and them.
    Smn {
        p: String,
        q: String,
        args: Vec<String>,
    },
    /// Build a fixed point of f; with arguments, check the recursion law.
    Fix { f: String, args: Vec<String> },
    /// Is x an element of a type code?
    Member {
        x: String,
        #[arg(value_name = "TYPE")]
        ty: String,
        /// Probe bound for this query.
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Is a natural a type code of the universe?
    InUniverse {
        #[arg(value_name = "TYPE")]
        ty: String,
    },
    /// Build the set tree with the given elements.
    Mkset { elements: Vec<String> },
    /// Decide equality of two set trees through their equality type.
    Eq { a: String, b: String },
    /// Check that a natural realizes a formula (inline or a file).
    Realize {
        formula: String,
        index: String,
        /// Variable bindings, name=value.
        #[arg(long = "let", value_name = "NAME=VALUE")]
        lets: Vec<String>,
    },
    /// Search for a realizer.
    Search {
        formula: String,
        #[arg(long, default_value_t = 512)]
        bound: u64,
        #[arg(long = "let", value_name = "NAME=VALUE")]
        lets: Vec<String>,
    },
    /// Run the disjunction transform on a family built for a predicate.
    LpoDemo {
        /// never, always, n==k, n<k, n>=k or "n in {a,b}".
        #[arg(long)]
        pred: String,
        #[arg(long = "P")]
        p: Option<String>,
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long = "let", value_name = "NAME=VALUE")]
        lets: Vec<String>,
        /// Use sg(E) as the tag instead of 1 - sg(E).
        #[arg(long)]
        literal_sg: bool,
        /// Do not register the totality certificate for the tag function.
        #[arg(long)]
        no_certificate: bool,
    },
    /// Compare least fixed points against the evaluator and the universe checker.
    OracleCompare {
        /// Most codes in the computation carrier.
        #[arg(long, default_value_t = 200)]
        bound: usize,
        /// Rounds of code generation.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Arguments and values range over naturals below this.
        #[arg(long, default_value_t = 4)]
        nats: u64,
        /// Naturals below this are elements of the universe carrier.
        #[arg(long, default_value_t = 40)]
        types_bound: u64,
    },
    /// Validate and register a totality certificate file.
    Certify { file: PathBuf },
    /// Re-run a JSON report and compare.
    Replay { report: PathBuf },
}

fn run(cli: &Cli, argv: &[String]) -> Result<Report> {
    let machine = Machine::new();
    for path in &cli.global.certs {
        let cert = certfile::load(path)?;
        machine
            .register(cert, cli.global.fuel)
            .with_context(|| format!("certificate {}", path.display()))?;
    }
    let ctx = Ctx {
        machine,
        global: cli.global.clone(),
    };
    let start = Instant::now();
    let mut report = match &cli.cmd {
        Cmd::Eval { code, args } => commands::eval(&ctx, code, args)?,
        Cmd::Smn { p, q, args } => commands::smn_cmd(&ctx, p, q, args)?,
        Cmd::Fix { f, args } => commands::fix_cmd(&ctx, f, args)?,
        Cmd::Member { x, ty, bound } => commands::member(&ctx, x, ty, *bound)?,
        Cmd::InUniverse { ty } => commands::in_universe(&ctx, ty)?,
        Cmd::Mkset { elements } => commands::mkset_cmd(&ctx, elements)?,
        Cmd::Eq { a, b } => commands::eq(&ctx, a, b)?,
        Cmd::Realize {
            formula,
            index,
            lets,
        } => commands::realize(&ctx, formula, index, lets)?,
        Cmd::Search {
            formula,
            bound,
            lets,
        } => commands::search(&ctx, formula, *bound, lets)?,
        Cmd::LpoDemo {
            pred,
            p,
            r,
            lets,
            literal_sg,
            no_certificate,
        } => commands::lpo_demo(
            &ctx,
            &commands::LpoArgs {
                pred,
                p: p.as_deref(),
                r: r.as_deref(),
                lets,
                literal_sg: *literal_sg,
                certify: !no_certificate,
            },
        )?,
        Cmd::OracleCompare {
            bound,
            depth,
            nats,
            types_bound,
        } => commands::oracle_compare(
            &ctx,
            &commands::OracleArgs {
                bound: *bound,
                depth: *depth,
                nats: *nats,
                types_bound: *types_bound,
            },
        )?,
        Cmd::Certify { file } => commands::certify(&ctx, file)?,
        Cmd::Replay { report } => replay(report)?,
    };
    report.argv = argv.to_vec();
    report.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
    Ok(report)
}

fn replay(path: &PathBuf) -> Result<Report> {
    let src =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let old: Report = serde_json::from_str(&src).context("not a report")?;
    let mut full = vec!["erec".to_string()];
    full.extend(old.argv.iter().cloned());
    let cli = Cli::try_parse_from(&full).context("report argv")?;
    if matches!(cli.cmd, Cmd::Replay { .. }) {
        anyhow::bail!("cannot replay a replay report");
    }
    let new = run(&cli, &old.argv)?;
    let same = new.same_run(&old);
    let status = if same {
        Status::Agree
    } else {
        Status::Mismatch
    };
    let summary = if same {
        format!("reproduced: {:?} {}", new.status, new.summary)
    } else {
        format!(
            "differs: was {:?} {}, now {:?} {}",
            old.status, old.summary, new.status, new.summary
        )
    };
    Ok(Report::new("replay", status, summary)
        .input("report", path.display())
        .result(&new))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(&cli, &argv) {
        Ok(report) => {
            if cli.global.json {
                match serde_json::to_string_pretty(&report) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_ERROR as u8);
                    }
                }
            } else {
                print!("{}", report.render_text());
            }
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
