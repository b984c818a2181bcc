use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use smpxor::harness::{
    hd_error_experiment, lemma_partition_experiment, replay_dump, run_trials, sweep_r, write_csv, ConfigFile,
    PredicateSource, TrialConfig, WeightSchedule,
};
use smpxor::Strategy;

#[derive(Parser)]
#[command(name = "smpxor", version, about = "Public-coin SMP protocols for symmetric XOR functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full protocol against the oracle, one CSV row per trial.
    Run(RunArgs),
    /// Mean transcript cost versus r for random:r predicates.
    SweepR(SweepArgs),
    /// Block-overflow rate of random k-partitions of a weight-k string.
    LemmaPartition(LemmaArgs),
    /// Verdict error of a single HD(d, eps) sketch at weights d and d+1.
    HdError(HdErrorArgs),
    /// Re-score transcript dumps (files or directories of trial-*.tsv).
    Replay(ReplayArgs),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn file(&self) -> anyhow::Result<ConfigFile> {
        match &self.config {
            Some(p) => ConfigFile::read(p).with_context(|| format!("reading {}", p.display())),
            None => Ok(ConfigFile::default()),
        }
    }

    fn out(&self, file: &ConfigFile) -> Option<PathBuf> {
        self.out.clone().or_else(|| file.get_str("out").map(PathBuf::from))
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// eq | ham:d | parity | random:r | file:PATH
    #[arg(long)]
    predicate: Option<String>,
    /// Comma-separated weights, or `auto`.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// raw | bucket | syndrome
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    dump_transcripts: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated r values.
    #[arg(long)]
    r_values: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Args)]
struct LemmaArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated block counts.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct HdErrorArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated thresholds.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Transcript files or directories.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(|v| v.trim().parse().with_context(|| format!("bad number {v:?} in {s:?}")))
        .collect()
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let file = args.common.file()?;
    let predicate: PredicateSource = file.resolve(args.predicate, "predicate", "eq".to_string())?.parse()?;
    let weights: WeightSchedule = file.resolve(args.weights, "weights", "auto".to_string())?.parse()?;
    let strategy: Strategy = file.resolve(args.strategy, "strategy", "syndrome".to_string())?.parse()?;
    let cfg = TrialConfig {
        n: file.resolve(args.n, "n", 64)?,
        predicate,
        weights,
        trials: file.resolve(args.trials, "trials", 100)?,
        seed: file.resolve(args.common.seed, "seed", 0)?,
        strategy,
    };
    let dump = args
        .dump_transcripts
        .or_else(|| file.get_str("dump-transcripts").map(PathBuf::from));
    let report = run_trials(&cfg, dump.as_deref())?;
    let mut out = sink(args.common.out(&file).as_deref())?;
    report.write_csv(&mut out)?;
    out.flush()?;
    for cell in &report.cells {
        eprintln!(
            "{} n={} r0={} r1={} weight={}: {}/{} correct ({:.4} ± {:.4}), branches a/b/c = {:?}, mean cost {:.1} bits",
            report.predicate_id,
            report.n,
            report.profile.r0,
            report.profile.r1,
            cell.weight,
            cell.successes,
            cell.trials,
            cell.rate(),
            cell.std_err(),
            cell.branch_trials,
            cell.mean_cost_bits
        );
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let file = args.common.file()?;
    let rs = parse_list(&file.resolve(args.r_values, "r-values", "4,8,16,32,64".to_string())?)?;
    let strategy: Strategy = file.resolve(args.strategy, "strategy", "syndrome".to_string())?.parse()?;
    let rows = sweep_r(
        &rs,
        file.resolve(args.n, "n", 4096)?,
        strategy,
        file.resolve(args.trials, "trials", 3)?,
        file.resolve(args.common.seed, "seed", 0)?,
    )?;
    let mut out = sink(args.common.out(&file).as_deref())?;
    write_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn cmd_lemma(args: LemmaArgs) -> anyhow::Result<()> {
    let file = args.common.file()?;
    let ks = parse_list(&file.resolve(args.k, "k", "16,64,256".to_string())?)?;
    let samples = file.resolve(args.samples, "samples", 10_000)?;
    let seed = file.resolve(args.common.seed, "seed", 0)?;
    let rows = ks
        .iter()
        .map(|&k| lemma_partition_experiment(k, samples, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = sink(args.common.out(&file).as_deref())?;
    write_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn cmd_hd_error(args: HdErrorArgs) -> anyhow::Result<()> {
    let file = args.common.file()?;
    let ds = parse_list(&file.resolve(args.d, "d", "0,1,2,4,8".to_string())?)?;
    let epsilon = file.resolve(args.epsilon, "epsilon", 0.1)?;
    let strategy: Strategy = file.resolve(args.strategy, "strategy", "syndrome".to_string())?.parse()?;
    let samples = file.resolve(args.samples, "samples", 10_000)?;
    let seed = file.resolve(args.common.seed, "seed", 0)?;
    let mut rows = Vec::new();
    for d in ds {
        rows.extend(hd_error_experiment(d, epsilon, strategy, samples, seed)?);
    }
    let mut out = sink(args.common.out(&file).as_deref())?;
    write_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

#[derive(serde::Serialize)]
struct ReplayRow {
    trial: u64,
    n: usize,
    predicate: String,
    weight: usize,
    output: u8,
    truth: u8,
    correct: u8,
    cost_bits: usize,
    branch: String,
    seed: u64,
}

fn cmd_replay(args: ReplayArgs) -> anyhow::Result<()> {
    let mut files = Vec::new();
    for p in &args.paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            entries.retain(|e| e.extension().is_some_and(|x| x == "tsv"));
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no transcript dumps found");
    }
    let mut rows = Vec::with_capacity(files.len());
    for f in &files {
        let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        let r = replay_dump(&text).with_context(|| format!("replaying {}", f.display()))?;
        rows.push(ReplayRow {
            trial: r.header.trial,
            n: r.header.n,
            predicate: r.header.predicate.clone(),
            weight: r.header.weight,
            output: r.output as u8,
            truth: r.truth as u8,
            correct: r.correct() as u8,
            cost_bits: r.cost_bits,
            branch: r.branch.to_string(),
            seed: r.header.seed,
        });
    }
    rows.sort_by_key(|r| r.trial);
    let mut out = sink(args.out.as_deref())?;
    write_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::SweepR(a) => cmd_sweep(a),
        Command::LemmaPartition(a) => cmd_lemma(a),
        Command::HdError(a) => cmd_hd_error(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
