//! Command-line front end: solve, verify, enumerate-core, prices, gen, and
//! examples, over the canonical JSON file formats.
//!
//! Exit codes are a stable contract:
//!   0  success / candidate is in the core
//!   1  candidate blocked, or a price property failed
//!   2  invalid input (parse error, broken invariant, infeasible candidate)
//!   3  resource refusal (enumeration search space above the cap)

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ttcnet::core_verify::{
    cap_find_blocking, enumerate_core, find_blocking_coalition, EnumerateError,
    EnumerateOptions, FeasibilityMode,
};
use ttcnet::format::{
    cap_certificate_section, cap_instance_file, network_certificate_section,
    network_instance_file, parse_instance, parse_result, to_canonical_json, FormatError,
    InstanceFile, ParsedInstance, ResultFile,
};
use ttcnet::instance_gen::{
    example_instance, random_cap_instance, random_network_instance, GenConfig, GenKind,
};
use ttcnet::model::{is_feasible_allocation, is_feasible_network};
use ttcnet::prices::{personalized_prices, verify_price_properties};
use ttcnet::{solve_cap, solve_network, EmptyBundlePolicy};

const EXIT_BLOCKED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_REFUSED: u8 = 3;

#[derive(Parser)]
#[command(name = "ttcnet", version, about = "Core-stable trading networks with quotas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write the resulting assignments.
    Solve(SolveArgs),
    /// Check a candidate network or allocation for core membership.
    Verify(VerifyArgs),
    /// Exhaustively enumerate the core of a network instance.
    EnumerateCore(EnumerateArgs),
    /// Solve, price the outcome, and verify the price properties.
    Prices(PricesArgs),
    /// Generate a seeded random instance.
    Gen(GenArgs),
    /// Write one of the built-in example instances.
    Examples(ExamplesArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    input: PathBuf,
    /// Result file to write.
    output: PathBuf,
    /// Also write the full stage trace to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file.
    input: PathBuf,
    /// Candidate result file (its assignments are checked).
    candidate: PathBuf,
    /// Bound the blocking search to coalitions of at most this size.
    #[arg(long)]
    max_coalition: Option<usize>,
    /// Write the blocking certificate here instead of standard output.
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Instance file (network kind only).
    input: PathBuf,
    /// File to write the enumerated core to.
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Balanced)]
    mode: ModeArg,
    /// Refuse enumeration when the raw candidate count exceeds this.
    #[arg(long, default_value_t = 10_000_000)]
    max_candidates: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Balanced,
    All,
}

#[derive(Args)]
struct PricesArgs {
    /// Instance file (network kind only).
    input: PathBuf,
    /// Result file with the prices section.
    output: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Output instance file.
    output: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Number of agents.
    #[arg(long)]
    agents: usize,
    /// Largest quota a network agent may get (default: agent count).
    #[arg(long)]
    max_quota: Option<usize>,
    /// Largest endowment a cap agent may get (default: 1).
    #[arg(long)]
    max_endowment: Option<usize>,
    #[arg(long)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Network,
    Cap,
}

#[derive(Args)]
struct ExamplesArgs {
    /// Example id: 1, 2 or 3.
    #[arg(long)]
    id: usize,
    /// Output instance file.
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::EnumerateCore(args) => cmd_enumerate_core(&args),
        Command::Prices(args) => cmd_prices(&args),
        Command::Gen(args) => cmd_gen(&args),
        Command::Examples(args) => cmd_examples(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("ttcnet: {err:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn read_instance(path: &Path) -> Result<ParsedInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("{}", path.display()))
}

fn read_result(path: &Path) -> Result<ResultFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_result(&text).with_context(|| format!("{}", path.display()))
}

fn write_canonical<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_canonical_json(value).context("serialization failed")?;
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let instance = read_instance(&args.input)?;
    match instance {
        ParsedInstance::Network(inst) => {
            let (net, trace) = solve_network(&inst).map_err(FormatError::Instance)?;
            write_canonical(&args.output, &ResultFile::for_network(&net).with_stages(trace.stages))?;
            if let Some(trace_path) = &args.trace {
                write_canonical(trace_path, &ResultFile::for_network(&net).with_trace(&trace))?;
            }
        }
        ParsedInstance::Cap(inst) => {
            let (alloc, trace) = solve_cap(&inst).map_err(FormatError::Instance)?;
            write_canonical(
                &args.output,
                &ResultFile::for_allocation(&alloc).with_stages(trace.stages),
            )?;
            if let Some(trace_path) = &args.trace {
                write_canonical(trace_path, &ResultFile::for_allocation(&alloc).with_trace(&trace))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let instance = read_instance(&args.input)?;
    let candidate = read_result(&args.candidate)?;
    if candidate.kind != instance.kind() {
        return Err(anyhow!(
            "candidate kind {:?} does not match instance kind {:?}",
            candidate.kind,
            instance.kind()
        ));
    }
    let policy = EmptyBundlePolicy::default();
    let certificate = match &instance {
        ParsedInstance::Network(inst) => {
            let net = candidate.to_network().context("candidate assignments")?;
            if !is_feasible_network(inst, &net)? {
                return Err(anyhow!("candidate network is infeasible: a quota is exceeded"));
            }
            find_blocking_coalition(inst, &net, args.max_coalition, policy)?
                .map(|cert| {
                    let mut out = ResultFile::for_network(&net);
                    out.certificate = Some(network_certificate_section(&cert));
                    out
                })
        }
        ParsedInstance::Cap(inst) => {
            let alloc = candidate.to_allocation().context("candidate assignments")?;
            if !is_feasible_allocation(inst, &alloc)? {
                return Err(anyhow!(
                    "candidate allocation is infeasible: not exclusive or quotas not met"
                ));
            }
            cap_find_blocking(inst, &alloc, args.max_coalition)?.map(|cert| {
                let mut out = ResultFile::for_allocation(&alloc);
                out.certificate = Some(cap_certificate_section(&cert));
                out
            })
        }
    };
    match certificate {
        None => {
            println!("in core: no blocking coalition found");
            Ok(ExitCode::SUCCESS)
        }
        Some(result) => {
            let section = result.certificate.as_ref().expect("certificate present");
            eprintln!("blocked by coalition {:?}", section.coalition);
            match &args.certificate {
                Some(path) => write_canonical(path, &result)?,
                None => print!("{}", to_canonical_json(&result)?),
            }
            Ok(ExitCode::from(EXIT_BLOCKED))
        }
    }
}

/// Core listing written by `enumerate-core`.
#[derive(serde::Serialize)]
struct CoreFile {
    kind: &'static str,
    mode: &'static str,
    count: usize,
    networks: Vec<Vec<Vec<usize>>>,
}

fn cmd_enumerate_core(args: &EnumerateArgs) -> Result<ExitCode> {
    let instance = read_instance(&args.input)?;
    let inst = match &instance {
        ParsedInstance::Network(inst) => inst,
        ParsedInstance::Cap(_) => {
            return Err(anyhow!("enumerate-core requires a network instance"))
        }
    };
    let (mode, mode_name) = match args.mode {
        ModeArg::Balanced => (FeasibilityMode::Balanced, "balanced"),
        ModeArg::All => (FeasibilityMode::All, "all"),
    };
    let options = EnumerateOptions {
        mode,
        policy: EmptyBundlePolicy::default(),
        candidate_cap: args.max_candidates,
    };
    let core = match enumerate_core(inst, &options) {
        Ok(core) => core,
        Err(err @ EnumerateError::TooLarge { .. })
        | Err(err @ EnumerateError::TooManyAgents { .. }) => {
            eprintln!("ttcnet: {err}");
            return Ok(ExitCode::from(EXIT_REFUSED));
        }
        Err(EnumerateError::Model(err)) => return Err(err.into()),
    };
    let file = CoreFile {
        kind: "core-enumeration",
        mode: mode_name,
        count: core.len(),
        networks: core
            .iter()
            .map(|net| {
                net.assignments().iter().map(|s| s.iter().copied().collect()).collect()
            })
            .collect(),
    };
    write_canonical(&args.output, &file)?;
    println!("core contains {} network(s)", file.count);
    Ok(ExitCode::SUCCESS)
}

fn cmd_prices(args: &PricesArgs) -> Result<ExitCode> {
    let instance = read_instance(&args.input)?;
    let inst = match &instance {
        ParsedInstance::Network(inst) => inst,
        ParsedInstance::Cap(_) => {
            return Err(anyhow!(
                "prices requires a network instance; allocation pricing is library-only"
            ))
        }
    };
    let (net, trace) = solve_network(inst).map_err(FormatError::Instance)?;
    let table = personalized_prices(&trace)?;
    let report = verify_price_properties(inst, &net, &table)?;
    write_canonical(
        &args.output,
        &ResultFile::for_network(&net).with_stages(trace.stages).with_prices(&table),
    )?;
    for (name, check) in [
        ("consistency", &report.consistency),
        ("aggregate-bound", &report.aggregate_bound),
        ("order-consistency", &report.order_consistency),
        ("payment-balance", &report.payment_balance),
    ] {
        println!("{name}: {}", if check.passed { "pass" } else { "fail" });
        for line in &check.counterexamples {
            eprintln!("  {line}");
        }
    }
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_BLOCKED))
    }
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode> {
    let file: InstanceFile = match args.kind {
        KindArg::Network => {
            let cfg = GenConfig {
                kind: GenKind::Network,
                agents: args.agents,
                max_share: args.max_quota.unwrap_or(args.agents),
                seed: args.seed,
            };
            network_instance_file(&random_network_instance(&cfg)?)
        }
        KindArg::Cap => {
            let cfg = GenConfig {
                kind: GenKind::Cap,
                agents: args.agents,
                max_share: args.max_endowment.unwrap_or(1),
                seed: args.seed,
            };
            cap_instance_file(&random_cap_instance(&cfg)?)
        }
    };
    write_canonical(&args.output, &file)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_examples(args: &ExamplesArgs) -> Result<ExitCode> {
    let fixture = example_instance(args.id)?;
    write_canonical(&args.output, &network_instance_file(&fixture.instance))?;
    Ok(ExitCode::SUCCESS)
}
