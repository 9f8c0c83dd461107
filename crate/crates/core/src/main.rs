use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use negotiator::agents::{AgentKind, AgentSettings};
use negotiator::domains::generate_benchmark_domain;
use negotiator::gpr::bench::{kernel_benchmark, synthetic_concession_traces, write_csv, Sequence, TraceConfig};
use negotiator::tournament::{
    run_experiment, write_posteriors, write_results_csv, write_stats_csv, write_summary_csv, DomainSource,
    ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "negotiator", version, about = "Bilateral negotiation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play seeded sessions between two agents in both profile assignments.
    Run(RunArgs),
    /// Score the GP kernels on next-bid prediction over concession traces.
    KernelBench {
        /// Directory of trace CSV files, or gen:SEED for synthetic traces.
        #[arg(long)]
        traces: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a generated benchmark domain as JSON.
    GenDomain {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        issues: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Domain JSON file, or gen:SEED for the generated benchmark.
    #[arg(long)]
    domain: String,
    #[arg(long)]
    agent_a: AgentKind,
    #[arg(long)]
    agent_b: AgentKind,
    /// Sessions per profile assignment.
    #[arg(long, default_value_t = 20)]
    sessions: usize,
    #[arg(long, default_value_t = 200)]
    round_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Per-move search statistics CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write the top posterior hypotheses per move next to the results.
    #[arg(long)]
    dump_posterior: bool,
    /// Agent setting, e.g. mcts.simulations=5000 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    settings: Vec<String>,
    /// Worker threads for independent sessions.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write each session's message transcript under this directory.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::KernelBench { traces, out } => kernel_bench(&traces, &out),
        Command::GenDomain { seed, issues, out } => {
            if issues == 0 {
                bail!("--issues must be at least 1");
            }
            generate_benchmark_domain(seed, issues)
                .spec
                .write(&out)
                .with_context(|| format!("writing {}", out.display()))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// `results.csv` -> `results.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn run(args: RunArgs) -> Result<()> {
    let mut settings = AgentSettings::default();
    for s in &args.settings {
        settings.apply(s)?;
    }
    if args.sessions == 0 {
        bail!("--sessions must be at least 1");
    }
    if args.round_cap == 0 {
        bail!("--round-cap must be at least 1");
    }
    let source: DomainSource = args.domain.parse()?;
    let spec = source.load().with_context(|| format!("loading domain {}", args.domain))?;
    let cfg = ExperimentConfig {
        agent_a: args.agent_a,
        agent_b: args.agent_b,
        settings,
        sessions: args.sessions,
        round_cap: args.round_cap,
        base_seed: args.seed,
        jobs: args.jobs,
        dump_posterior: args.dump_posterior,
    };
    let exp = run_experiment(&spec, &cfg)?;

    write_results_csv(&exp.records, create(&args.out)?)?;
    let summary_path = sibling(&args.out, "summary.csv");
    write_summary_csv(&exp, create(&summary_path)?)?;
    if let Some(path) = &args.stats {
        write_stats_csv(&exp.records, create(path)?)?;
    }
    if args.dump_posterior {
        write_posteriors(&exp.records, create(&sibling(&args.out, "posterior.jsonl"))?)?;
    }
    if let Some(dir) = &args.transcripts {
        for r in &exp.records {
            let path = dir.join(format!("a{}-s{:04}.txt", r.assignment, r.session));
            let mut w = create(&path)?;
            for line in &r.transcript {
                writeln!(w, "{line}")?;
            }
            w.flush()?;
        }
    }

    for (i, s) in exp.summaries.iter().enumerate() {
        println!(
            "assignment {}: {} {:.3} ± {:.3} | {} {:.3} ± {:.3} | rounds {:.1} | agreement {:.0}%",
            i + 1,
            cfg.agent_a,
            s.mean_a,
            s.std_a,
            cfg.agent_b,
            s.mean_b,
            s.std_b,
            s.mean_rounds,
            s.agreement_rate * 100.0,
        );
    }
    Ok(())
}

/// One CSV file per trace: a header row of issue names, then one row of
/// numeric values per opponent bid.
fn read_traces(dir: &Path) -> Result<Vec<Sequence>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    let mut traces = Vec::with_capacity(paths.len());
    for path in paths {
        let mut r = csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.with_context(|| format!("reading {}", path.display()))?;
            let row = rec
                .iter()
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("non-numeric value in {}", path.display()))?;
            rows.push(row);
        }
        traces.push(rows);
    }
    if traces.is_empty() {
        bail!("no .csv traces in {}", dir.display());
    }
    Ok(traces)
}

fn kernel_bench(traces: &str, out: &Path) -> Result<()> {
    let sequences = match traces.strip_prefix("gen:") {
        Some(seed) => {
            let seed = seed.parse().with_context(|| format!("bad seed in {traces}"))?;
            synthetic_concession_traces(seed, &TraceConfig::default())
        }
        None => read_traces(Path::new(traces))?,
    };
    let scores = kernel_benchmark(&sequences)?;
    write_csv(&scores, create(out)?)?;
    for s in &scores {
        println!("{:<7} {:.6}", s.family.name(), s.avg_distance);
    }
    Ok(())
}
