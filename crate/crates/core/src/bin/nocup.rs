//! Command-line driver. Exit status: 0 success, 1 runtime verdict failure,
//! 2 usage or parse error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use nocup::cupping::{psi_run, IterateMode, PsiConfig, PsiError, RemovalStepMode, Schedule, TraceEvent};
use nocup::growth::{curve_csv, growth_curve, leq_e_proxy, ll_e_proxy};
use nocup::honest::HonestFn;
use nocup::machine::{Catalog, Enumeration, DEFAULT_CAP};
use nocup::ordinals::{enum_below_with_norm, fund_seq, norm, trans_iterate, FundSource, IterBudget, OrdinalCnf};
use nocup::provability::{psi_t_run, MockTheory, ProofStream, PsiTOutcome};
use nocup::trace;

#[derive(Parser)]
#[command(name = "nocup", version, about = "Anti-cupping construction laboratory")]
struct Cli {
    /// builtin catalog file; the default catalog otherwise
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Ψ and write its trace
    Psi(PsiArgs),
    /// Compare growth rates and write a CSV growth curve
    Compare(CompareArgs),
    /// Ordinal utilities
    Ord {
        #[command(subcommand)]
        op: OrdOp,
    },
    /// Run the provability-side loop against a mock theory
    Prov(ProvArgs),
}

#[derive(clap::Args)]
struct PsiArgs {
    #[arg(long, default_value = "TOWERDIAG")]
    gamma: String,
    /// `scaled`, `tower` or `ordinal:<alpha>`
    #[arg(long, default_value = "scaled")]
    schedule: String,
    /// `power` or `ordinal:<alpha>`
    #[arg(long, default_value = "power")]
    iterate: String,
    /// initial member of C
    #[arg(long, default_value = "0")]
    subject: String,
    #[arg(long)]
    n: u64,
    #[arg(long, env = "NOCUP_CAP", default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[arg(long, default_value = "total")]
    step_mode: StepModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StepModeArg {
    Total,
    PerEval,
}

#[derive(clap::Args)]
struct CompareArgs {
    /// function names; a second `--f` stands for `--g`
    #[arg(long = "f", required = true, num_args = 1)]
    f: Vec<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long, default_value_t = 6)]
    kmax: u64,
    /// `leq` for f <= g^k, `ll` for eventual domination of every f^m
    #[arg(long, default_value = "leq")]
    mode: String,
    #[arg(long, default_value_t = 6)]
    mmax: u64,
    #[arg(long, default_value_t = 0)]
    tail: u64,
    #[arg(long, default_value_t = 0)]
    from: u64,
    #[arg(long, default_value_t = 16)]
    to: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OrdOp {
    /// Norm of an ordinal
    Norm {
        expr: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ordinals below EXPR with bounded norm, ascending
    Enum {
        expr: String,
        #[arg(long)]
        normbound: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transfinite iterate of a catalog function at EXPR
    Iterate {
        expr: String,
        #[arg(long, default_value = "SUCC")]
        f: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 200_000)]
        nodes: u64,
        #[arg(long, default_value_t = 1 << 20)]
        bits: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// k-th member of the fundamental sequence of EXPR or e0
    Fundseq {
        expr: String,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct ProvArgs {
    #[arg(long)]
    mock: Option<PathBuf>,
    #[arg(long)]
    stream: Option<PathBuf>,
    #[arg(long)]
    s: u64,
    #[arg(long, default_value_t = 1000)]
    horizon: u64,
    #[arg(long, env = "NOCUP_CAP", default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// exit 1 when an embedded run exceeds the horizon
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn runtime(message: impl ToString) -> Failure {
    Failure { code: 1, message: message.to_string() }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_catalog(path: &Option<PathBuf>) -> Result<Catalog, Failure> {
    match path {
        None => Ok(Catalog::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            Catalog::parse(&text).map_err(usage)
        }
    }
}

fn parse_ordinal(text: &str) -> Result<OrdinalCnf, Failure> {
    text.parse().map_err(usage)
}

fn parse_source(text: &str) -> Result<FundSource, Failure> {
    text.parse().map_err(usage)
}

fn function(machines: &Enumeration, name: &str) -> Result<HonestFn, Failure> {
    HonestFn::named(machines, name).map_err(usage)
}

#[derive(Serialize)]
struct PsiHeader<'a> {
    config: &'a PsiConfig,
    gamma_name: &'a str,
    subject_name: &'a str,
    n: u64,
    catalog: String,
}

fn cmd_psi(catalog: Catalog, args: PsiArgs) -> Result<(), Failure> {
    let machines = Arc::new(Enumeration::new(catalog));
    let gamma = machines.resolve(&args.gamma).map_err(usage)?;
    let initial = machines.resolve(&args.subject).map_err(usage)?;
    let schedule = match args.schedule.as_str() {
        "scaled" => Schedule::Scaled,
        "tower" => Schedule::Tower,
        s => match s.strip_prefix("ordinal:") {
            Some(a) => Schedule::Ordinal(parse_source(a)?),
            None => return Err(usage(format!("unknown schedule `{s}`"))),
        },
    };
    let iterate_mode = match args.iterate.as_str() {
        "power" => IterateMode::FinitePower,
        s => match s.strip_prefix("ordinal:") {
            Some(a) => IterateMode::OrdinalIterate(parse_source(a)?),
            None => return Err(usage(format!("unknown iterate mode `{s}`"))),
        },
    };
    let removal_step_mode = match args.step_mode {
        StepModeArg::Total => RemovalStepMode::TotalPerSide,
        StepModeArg::PerEval => RemovalStepMode::PerEvaluation,
    };
    let config = PsiConfig { gamma, schedule, iterate_mode, cap: args.cap, removal_step_mode, initial };
    let header = PsiHeader {
        config: &config,
        gamma_name: &args.gamma,
        subject_name: &args.subject,
        n: args.n,
        catalog: machines.catalog().render(),
    };
    match psi_run(machines, config.clone(), args.n) {
        Ok(run) => {
            emit(&args.out, &trace::render("psi", &header, &run.trace))?;
            let count = |kind: fn(&TraceEvent) -> bool| run.trace.iter().filter(|e| kind(e)).count();
            let elses = count(|e| matches!(e, TraceEvent::ElseBranch { .. }));
            let removals = count(|e| matches!(e, TraceEvent::Removal { .. }));
            if args.out.is_some() {
                println!("M={} else_branches={elses} removals={removals}", run.big_m);
            }
            Ok(())
        }
        Err(err) => {
            let record = match &err {
                PsiError::CapExceeded { e, m } => json!({"error": "CapExceeded", "e": e, "m": m}),
                PsiError::GammaDiverged(l) => json!({"error": "GammaDiverged", "l": l}),
                other => json!({"error": "Psi", "message": other.to_string()}),
            };
            let mut text = trace::header_line("psi", &header);
            text.push('\n');
            text.push_str(&record.to_string());
            text.push('\n');
            if args.out.is_some() {
                emit(&args.out, &text)?;
            }
            println!("{record}");
            Err(runtime(err))
        }
    }
}

fn cmd_compare(catalog: Catalog, args: CompareArgs) -> Result<(), Failure> {
    let machines = Enumeration::new(catalog);
    if args.f.len() > 2 || (args.f.len() == 2 && args.g.is_some()) {
        return Err(usage("give at most two functions"));
    }
    let f_name = args.f[0].clone();
    let g_name = args.g.clone().or_else(|| args.f.get(1).cloned()).unwrap_or_else(|| f_name.clone());
    let (f, g) = (function(&machines, &f_name)?, function(&machines, &g_name)?);
    if args.from > args.to {
        return Err(usage("empty range"));
    }
    let range = args.from..=args.to;
    let verdict = match args.mode.as_str() {
        "leq" => leq_e_proxy(&f, &g, args.kmax, range.clone()).map_err(runtime)?.to_string(),
        "ll" => ll_e_proxy(&f, &g, args.kmax, args.mmax, args.tail, range.clone()).map_err(runtime)?.to_string(),
        other => return Err(usage(format!("unknown mode `{other}`"))),
    };
    let rows = growth_curve(&f, &g, args.kmax, range).map_err(runtime)?;
    let config = json!({
        "f": f_name, "g": g_name, "kmax": args.kmax, "mode": args.mode, "mmax": args.mmax,
        "tail": args.tail, "from": args.from, "to": args.to, "catalog": machines.catalog().render(),
    });
    let mut text = format!("# {}\n", trace::header_line("compare", &config));
    text.push_str(&curve_csv(&rows, args.kmax));
    text.push_str(&format!("# verdict,{verdict}\n"));
    emit(&args.out, &text)?;
    if args.out.is_some() {
        println!("{verdict}");
    }
    Ok(())
}

fn cmd_ord(catalog: Catalog, op: OrdOp) -> Result<(), Failure> {
    let (text, out) = match op {
        OrdOp::Norm { expr, out } => (format!("{}\n", norm(&parse_ordinal(&expr)?)), out),
        OrdOp::Enum { expr, normbound, out } => {
            let list = enum_below_with_norm(&parse_ordinal(&expr)?, normbound);
            let body: Vec<String> = list.iter().map(|b| b.to_string()).collect();
            (format!("[{}]\n", body.join(", ")), out)
        }
        OrdOp::Iterate { expr, f, n, nodes, bits, out } => {
            let machines = Enumeration::new(catalog);
            let func = function(&machines, &f)?;
            let budget = IterBudget { max_recursion_nodes: nodes.max(1), max_value_bits: bits.max(1) };
            let v = trans_iterate(&func, &parse_ordinal(&expr)?, n, budget).map_err(runtime)?;
            (format!("{v}\n"), out)
        }
        OrdOp::Fundseq { expr, k, out } => {
            let v = fund_seq(&parse_source(&expr)?, k).map_err(usage)?;
            (format!("{v}\n"), out)
        }
    };
    emit(&out, &text)
}

fn cmd_prov(catalog: Catalog, args: ProvArgs) -> Result<(), Failure> {
    let machines = Enumeration::new(catalog);
    let read = |p: &PathBuf| fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())));
    let theory = match &args.mock {
        Some(p) => MockTheory::parse(&read(p)?).map_err(usage)?,
        None => MockTheory::default(),
    };
    let stream = match &args.stream {
        Some(p) => ProofStream::parse(&read(p)?, &machines).map_err(usage)?,
        None => ProofStream::default(),
    };
    let run = psi_t_run(&stream, &theory, args.s, args.horizon, &machines, args.cap).map_err(runtime)?;
    let config = json!({
        "mock": theory, "stream": stream, "s": args.s, "horizon": args.horizon,
        "cap": args.cap, "strict": args.strict,
    });
    emit(&args.out, &trace::render("prov", &config, &run.trace))?;
    let summary = match run.outcome {
        PsiTOutcome::Halted => "Halted".to_string(),
        PsiTOutcome::ExceededHorizon { m } => format!("ExceededHorizon(m={m})"),
    };
    if args.out.is_some() {
        println!("{summary} p={}", run.state.p);
    }
    match run.outcome {
        PsiTOutcome::ExceededHorizon { .. } if args.strict => Err(runtime(summary)),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_catalog(&cli.catalog).and_then(|catalog| match cli.command {
        Command::Psi(a) => cmd_psi(catalog, a),
        Command::Compare(a) => cmd_compare(catalog, a),
        Command::Ord { op } => cmd_ord(catalog, op),
        Command::Prov(a) => cmd_prov(catalog, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
