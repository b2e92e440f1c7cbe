//! `achilles`: campaign runner, attack driver and synthetic-net tools.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use achilles_core::attacks::{boosted_attack_campaign, export_seed_list, AttackConfig, Selection};
use achilles_core::format::{read_network, save_network};
use achilles_core::harness::{
    run_repeats, write_report, CampaignConfig, GreedySettings, Mode, RepeatSummary, StopCondition,
};
use achilles_core::seeding::{SeedingConfig, ThresholdStrategy};
use achilles_core::synth::{parse_shape, random_network};
use achilles_core::verifier::{grid_oracle, OracleVerdict, VerificationQuery};
use achilles_core::Error;
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "achilles", version, about = "Counter-example boosting for ReLU network robustness queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a local-robustness campaign and write its reports.
    Verify(VerifyArgs),
    /// Run an iterated-FGSM campaign from random or low-margin starts.
    Attack(AttackArgs),
    /// Write a seeded random network.
    GenNet(GenNetArgs),
    /// Decide one query by exhaustive grid evaluation (≤ 3 inputs).
    Oracle(OracleArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    net: PathBuf,
    /// r, rg, b or bg.
    #[arg(long)]
    mode: Mode,
    #[arg(long)]
    delta: f64,
    /// Stop after this many seconds.
    #[arg(long, conflicts_with = "find", required_unless_present = "find")]
    budget: Option<f64>,
    /// Stop after this many counter-examples.
    #[arg(long)]
    find: Option<u64>,
    /// Per-query verifier timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent campaigns with seeds `seed, seed + 1, …`.
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    max_runs: Option<u64>,
    #[arg(long)]
    min_box_width: Option<f64>,
    #[command(flatten)]
    seeding: SeedingArgs,
    #[arg(long)]
    l_max: Option<f64>,
    #[arg(long)]
    l_min: Option<f64>,
    #[arg(long, default_value_t = achilles_core::greedy::DEFAULT_MAX_ITERATIONS)]
    greedy_max_iterations: u64,
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SeedingArgs {
    #[arg(long, default_value_t = achilles_core::seeding::DEFAULT_SAMPLE_SET_SIZE)]
    sample_set_size: usize,
    #[arg(long, default_value_t = achilles_core::seeding::DEFAULT_COL_NUM)]
    col_num: u64,
    /// minimum or average.
    #[arg(long, default_value = "minimum")]
    threshold_strategy: ThresholdStrategy,
}

impl SeedingArgs {
    fn config(&self) -> SeedingConfig {
        SeedingConfig {
            sample_set_size: self.sample_set_size,
            col_num: self.col_num,
            threshold_strategy: self.threshold_strategy,
        }
    }
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    net: PathBuf,
    /// r or b.
    #[arg(long)]
    selection: Selection,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    epo: u32,
    #[arg(long)]
    inputs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the starting points, one per line.
    #[arg(long)]
    seeds_out: Option<PathBuf>,
    #[command(flatten)]
    seeding: SeedingArgs,
}

#[derive(Args)]
struct GenNetArgs {
    /// Layer sizes, e.g. 2,8,8,2.
    #[arg(long)]
    shape: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
    x0: Vec<f64>,
    /// Grid spacing; defaults to delta / 20.
    #[arg(long)]
    h: Option<f64>,
}

fn secs(v: f64, what: &str) -> Result<Duration> {
    Duration::try_from_secs_f64(v).map_err(|_| Error::InvalidConfig(format!("{what} must be a non-negative number of seconds")).into())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let net = read_network(&args.net).with_context(|| format!("reading {}", args.net.display()))?;
    let stop = match (args.budget, args.find) {
        (Some(b), _) => StopCondition::TimeBudget(secs(b, "budget")?),
        (None, Some(n)) => StopCondition::TargetCounterexamples(n),
        (None, None) => unreachable!("clap requires one of --budget / --find"),
    };
    if args.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()).into());
    }
    let cfg = CampaignConfig {
        query_timeout: secs(args.timeout, "timeout")?,
        rng_seed: args.seed,
        seeding: args.seeding.config(),
        greedy: GreedySettings {
            l_max: args.l_max,
            l_min: args.l_min,
            max_iterations: args.greedy_max_iterations,
            trace: args.trace,
        },
        min_box_width: args.min_box_width,
        max_runs: args.max_runs,
        workers: args.workers,
        ..CampaignConfig::new(args.mode, args.delta, stop)
    };
    let mut reports = run_repeats(&net, &cfg, args.repeats)?;
    let network = args.net.display().to_string();
    for r in &mut reports {
        r.network.clone_from(&network);
    }
    if let [report] = &reports[..] {
        write_report(report, &args.out)?;
    } else {
        for (i, report) in reports.iter().enumerate() {
            write_report(report, args.out.join(format!("repeat-{i}")))?;
        }
        let mean = RepeatSummary::from_reports(&reports);
        fs::write(args.out.join("mean.json"), serde_json::to_string_pretty(&mean)? + "\n")?;
    }
    for (i, r) in reports.iter().enumerate() {
        let a = &r.aggregates;
        println!(
            "repeat {i}: mode {} runs {} sat {} (greedy {}) unsat {} unknown {} errors {} rate {:.4}",
            cfg.mode, a.runs, a.sat_total, a.sat_by_greedy, a.unsat, a.unknown, a.errors, a.rate
        );
    }
    Ok(())
}

fn attack(args: AttackArgs) -> Result<()> {
    let net = read_network(&args.net).with_context(|| format!("reading {}", args.net.display()))?;
    let cfg = AttackConfig::new(args.eps, args.epo)?;
    let campaign = boosted_attack_campaign(&net, args.inputs, &cfg, args.selection, &args.seeding.config(), args.seed)?;
    if let Some(path) = &args.seeds_out {
        fs::write(path, export_seed_list(&campaign.starts)).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "selection {:?}: {} / {} successful (rate {:.4}, {} without a start)",
        campaign.selection, campaign.successes, campaign.inputs, campaign.rate, campaign.seed_failures
    );
    Ok(())
}

fn gen_net(args: GenNetArgs) -> Result<()> {
    let net = random_network(&parse_shape(&args.shape)?, args.seed)?;
    let text = save_network(&net);
    match &args.out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn oracle(args: OracleArgs) -> Result<()> {
    let net = read_network(&args.net).with_context(|| format!("reading {}", args.net.display()))?;
    let q = VerificationQuery::new(&net, args.x0, args.delta)?;
    match grid_oracle(&net, &q, args.h.unwrap_or(args.delta / 20.0))? {
        OracleVerdict::Sat(p) => println!("sat {}", achilles_core::format::format_reals(&p)),
        OracleVerdict::Unsat => println!("unsat"),
        OracleVerdict::Inconclusive => println!("inconclusive"),
    }
    Ok(())
}

/// 1 for bad arguments or configuration, 2 for I/O and format problems.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Io(_) | Error::Parse(_) | Error::InvalidNetwork(_) | Error::Csv(_) | Error::Json(_) | Error::Schema(_)) => 2,
        Some(_) => 1,
        None if err.downcast_ref::<std::io::Error>().is_some() || err.downcast_ref::<serde_json::Error>().is_some() => 2,
        None => 1,
    }
}

/// The cause chain, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Attack(a) => attack(a),
        Command::GenNet(a) => gen_net(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
