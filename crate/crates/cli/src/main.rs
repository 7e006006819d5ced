use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use gavf_core::compiler::{compile, ObjectivePolicy, SolveError};
use gavf_core::lp::CertifiedFloat;
use gavf_core::model::{check_acyclic, parse_net_json, TcpNet};
use gavf_core::oracle::{all_entailed_pairs, consistent, DEFAULT_ORACLE_CAP};
use gavf_core::ranking::{format_number, load_items_path, top_k, GaValueFunction};
use gavf_core::simulation::{run_experiment, ExperimentConfig};
use gavf_service::{validate_document, ServiceConfig};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gavf",
    version,
    about = "Compile TCP-nets into GA value functions and rank items"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    L1,
    RandomVertex,
}

#[derive(Subcommand)]
enum Command {
    /// Check a net file for structural errors and cycles.
    Validate { net: PathBuf },
    /// Compile and solve a net, writing the value function as JSON.
    Compile {
        net: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "l1")]
        policy: Policy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the top k items as `rank,id,score`.
    Rank {
        value_function: PathBuf,
        items: PathBuf,
        #[arg(short, default_value_t = 10)]
        k: usize,
    },
    /// Brute-force entailment over the full outcome space.
    Oracle {
        net: PathBuf,
        /// List every entailed pair, better first.
        #[arg(long, conflicts_with = "consistent")]
        pairs: bool,
        /// Only report whether the net is consistent.
        #[arg(long)]
        consistent: bool,
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        cap: usize,
    },
    /// Run a simulated-user experiment.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = "GAVF_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "GAVF_SNAPSHOT_DIR")]
        snapshot_dir: Option<PathBuf>,
        /// Item files sessions may reference through `items_ref`.
        #[arg(long = "items-allow", env = "GAVF_ITEMS_ALLOW", value_delimiter = ',')]
        items_allow: Vec<PathBuf>,
        #[arg(long, env = "GAVF_ROUND_CAP", default_value_t = gavf_core::elicitation::DEFAULT_ROUND_CAP)]
        round_cap: usize,
        #[arg(long, env = "GAVF_K", default_value_t = gavf_core::elicitation::DEFAULT_K)]
        k: usize,
    },
}

/// A failure in the domain rather than in the invocation. Exits with 2.
#[derive(Debug)]
struct DomainError(String);

impl std::fmt::Display for DomainError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DomainError {}

fn domain(message: impl Into<String>) -> anyhow::Error {
    DomainError(message.into()).into()
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_net(path: &Path) -> anyhow::Result<TcpNet> {
    parse_net_json(&read(path)?).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn validate(path: &Path) -> anyhow::Result<()> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?)
        .with_context(|| format!("{} is not JSON", path.display()))?;
    let report = validate_document(value);
    println!("{}", serde_json::to_string_pretty(&report)?);
    if report.valid && report.acyclic {
        Ok(())
    } else {
        Err(domain(report.diagnostics.join("; ")))
    }
}

fn compile_net(net: &Path, output: &Path, policy: Policy, seed: u64) -> anyhow::Result<()> {
    let net = load_net(net)?;
    let mut system = compile(&net).map_err(|e| domain(e.to_string()))?;
    let policy = match policy {
        Policy::L1 => ObjectivePolicy::L1,
        Policy::RandomVertex => ObjectivePolicy::RandomVertex { seed },
    };
    let v = match system.solve(policy, &CertifiedFloat::default()) {
        Ok(v) => v,
        Err(SolveError::Infeasible { hints }) => {
            let described: Vec<String> = hints
                .iter()
                .map(|&i| system.describe_constraint(i))
                .collect();
            return Err(domain(format!(
                "the net is inconsistent; conflicting statements:\n  {}",
                described.join("\n  ")
            )));
        }
        Err(e) => return Err(domain(e.to_string())),
    };
    std::fs::write(output, v.to_json())
        .with_context(|| format!("cannot write {}", output.display()))?;
    eprintln!(
        "{} entries over {} factors, {} constraints",
        v.entry_count(),
        v.factors().len(),
        system.constraints.len()
    );
    Ok(())
}

fn rank(vf: &Path, items: &Path, k: usize) -> anyhow::Result<()> {
    let v = GaValueFunction::parse_json(&read(vf)?)
        .map_err(|e| domain(format!("{}: {e}", vf.display())))?;
    let items = load_items_path(items, v.variables()).map_err(|e| domain(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    for (i, r) in top_k(&v, &items, k).iter().enumerate() {
        writeln!(out, "{},{},{}", i + 1, r.id, format_number(&r.score))?;
    }
    Ok(())
}

fn oracle(path: &Path, pairs: bool, only_consistency: bool, cap: usize) -> anyhow::Result<()> {
    let net = load_net(path)?;
    let report = check_acyclic(&net);
    if !report.acyclic {
        eprintln!(
            "warning: net is not acyclic (cycle through {})",
            report.witness_names(&net).unwrap_or_default().join(" -> ")
        );
    }
    let ok = consistent(&net, cap).map_err(|e| domain(e.to_string()))?;
    if only_consistency || !ok {
        println!("{}", if ok { "consistent" } else { "inconsistent" });
        return if ok {
            Ok(())
        } else {
            Err(domain("the net is inconsistent"))
        };
    }
    let entailed = all_entailed_pairs(&net, cap).map_err(|e| domain(e.to_string()))?;
    if pairs {
        let mut out = std::io::stdout().lock();
        for (better, worse) in &entailed {
            writeln!(out, "{}\t{}", better.label(&net), worse.label(&net))?;
        }
    } else {
        println!("consistent, {} entailed pairs", entailed.len());
    }
    Ok(())
}

fn simulate(config: &Path, out: &Path) -> anyhow::Result<()> {
    let config: ExperimentConfig = serde_json::from_str(&read(config)?)
        .with_context(|| format!("bad experiment config {}", config.display()))?;
    let stats = run_experiment(&config).map_err(|e| domain(e.to_string()))?;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    std::fs::write(
        out.join("stats.json"),
        serde_json::to_string_pretty(&stats)?,
    )?;
    std::fs::write(out.join("histogram.txt"), stats.histogram_text())?;
    print!("{}", stats.histogram_text());
    Ok(())
}

fn serve(addr: SocketAddr, config: ServiceConfig) -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(gavf_service::serve(addr, config))?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { net } => validate(&net),
        Command::Compile {
            net,
            output,
            policy,
            seed,
        } => compile_net(&net, &output, policy, seed),
        Command::Rank {
            value_function,
            items,
            k,
        } => rank(&value_function, &items, k),
        Command::Oracle {
            net,
            pairs,
            consistent,
            cap,
        } => oracle(&net, pairs, consistent, cap),
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Serve {
            addr,
            snapshot_dir,
            items_allow,
            round_cap,
            k,
        } => serve(
            addr,
            ServiceConfig {
                snapshot_dir,
                items_allow,
                round_cap,
                default_k: k,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            // stdout closed early, as in `gavf oracle net.json --pairs | head`
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<DomainError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
