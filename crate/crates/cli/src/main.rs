use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vfpe::config::{Scheme, SimConfig};
use vfpe::engine::{contact_statistics, mean_delay, pdr, run, run_traced, RunMetrics};
use vfpe::experiment::{run_campaign, write_outputs, write_trace, Campaign};

/// Swarm relay-chain simulator and experiment harness.
#[derive(Parser, Debug)]
#[command(name = "simulate", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    campaign: CampaignArgs,
}

#[derive(Args, Debug)]
struct CampaignArgs {
    /// Campaign file, or one of the built-in campaigns `paper-cs` and `paper-n`.
    #[arg(long)]
    campaign: Option<String>,
    /// Output directory for the CSV and gnuplot tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides runs_per_point.
    #[arg(long)]
    runs: Option<usize>,
    /// Overrides seed_base.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs a single configuration and prints its metrics.
    One(OneArgs),
}

#[derive(Args, Debug)]
struct OneArgs {
    #[arg(long, default_value = "random")]
    scheme: String,
    /// Maximum entries per beacon.
    #[arg(long, default_value_t = 10)]
    cs: usize,
    /// Swarm size.
    #[arg(long, default_value_t = 15)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulated seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Writes node trajectories (time, node, role, x, y) to this CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Trace sampling period in integration steps.
    #[arg(long, default_value_t = 10)]
    trace_every: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Some(Command::One(args)) => one(args),
        None => campaign(cli.campaign),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn campaign(args: CampaignArgs) -> Result<()> {
    let (Some(campaign), Some(out)) = (args.campaign, args.out) else {
        bail!("--campaign and --out are required (or use the `one` subcommand)");
    };
    let mut c = Campaign::load(&campaign)?;
    if let Some(r) = args.runs {
        c.runs_per_point = r;
    }
    if let Some(s) = args.seed {
        c.seed_base = s;
    }
    c.validate()?;
    let name = if c.name.is_empty() {
        "campaign".to_string()
    } else {
        c.name.clone()
    };
    let result = run_campaign(&c, args.workers)?;
    let (csv, dat) = write_outputs(&result, &out, &name)?;
    println!(
        "{} points written to {}",
        result.points.len(),
        csv.display()
    );
    println!("gnuplot table: {}", dat.display());
    Ok(())
}

fn one(args: OneArgs) -> Result<()> {
    let scheme: Scheme = args.scheme.parse()?;
    let mut cfg = SimConfig {
        scheme,
        cs: args.cs,
        n_swarm: args.n,
        seed: args.seed,
        ..SimConfig::default()
    };
    if let Some(d) = args.duration {
        cfg.duration = d;
    }
    cfg.validate()?;
    let m = match &args.trace {
        Some(path) => {
            let (m, rows) = run_traced(&cfg, args.trace_every)?;
            write_trace(&rows, path).with_context(|| "writing trace")?;
            m
        }
        None => run(&cfg)?,
    };
    report(&cfg, &m);
    Ok(())
}

fn report(cfg: &SimConfig, m: &RunMetrics) {
    let opt =
        |x: Option<f64>, scale: f64| x.map_or("-".to_string(), |v| format!("{:.4}", v * scale));
    println!("scheme            {}", cfg.scheme);
    println!("cs                {}", cfg.cs);
    println!("n_swarm           {}", cfg.n_swarm);
    println!("seed              {}", cfg.seed);
    println!("cbr_sent          {}", m.cbr_sent);
    println!("cbr_received      {}", m.cbr_received);
    println!("pdr               {}", opt(pdr(m), 1.0));
    println!("mean_delay_ms     {}", opt(mean_delay(m), 1e3));
    for (cause, n) in &m.drop_causes {
        println!("drop {:<12} {n}", format!("{cause:?}"));
    }
    println!("mean_contact_s    {}", opt(contact_statistics(m), 1.0));
    println!("chain_complete_s  {}", opt(m.chain_completion_time, 1.0));
    println!("promotions        {}", m.promotions);
    println!("demotions         {}", m.demotions);
    println!("teardowns         {}", m.teardowns);
    println!("auditor_flags     {}", m.auditor_violations);
    println!("frames_sent       {}", m.frames_sent);
    println!("events            {}", m.events);
}
