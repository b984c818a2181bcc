//! Monte Carlo experiments behind the CLI.
//!
//! Every trial reads its own coins `trial/<t>` (and its input pair from
//! `trial/<t>/input`), so results do not depend on how rayon schedules work.

mod config;
mod experiments;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::sample_pair_with_distance;
use crate::error::{Error, Result};
use crate::hamming::Strategy;
use crate::predicate::{family, Family, Predicate, Profile};
use crate::protocol::{Branch, Execution, SmpProtocol, Transcript, TranscriptHeader};
use crate::randomness::CoinSource;

pub use config::ConfigFile;
pub use experiments::{
    hd_error_experiment, lemma_partition_experiment, pk_agreement_experiment, sweep_normalizer, sweep_r,
    HdErrorRow, LemmaRow, PkAgreement, SweepRow,
};

/// Where the predicate comes from: a named family or a two-line file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredicateSource {
    Family(Family),
    File(PathBuf),
}

impl fmt::Display for PredicateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateSource::Family(fam) => write!(f, "{fam}"),
            PredicateSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for PredicateSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("file:") {
            Some(path) => Ok(PredicateSource::File(PathBuf::from(path))),
            None => Ok(PredicateSource::Family(s.parse()?)),
        }
    }
}

impl PredicateSource {
    /// `Random` families draw their values from `seed`'s `predicate` coins.
    pub fn load(&self, n: usize, seed: u64) -> Result<Predicate> {
        match self {
            PredicateSource::Family(fam) => family(*fam, n, &CoinSource::new(seed).derive("predicate")),
            PredicateSource::File(path) => {
                let d = Predicate::read_file(path)?;
                if d.n() != n {
                    return Err(Error::config(format!(
                        "predicate file {} has n = {}, run uses n = {n}",
                        path.display(),
                        d.n()
                    )));
                }
                Ok(d)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightSchedule {
    /// `{0, r0, r0+1, floor(n/2), n-r1-1, n-r1, n}`: the branch hand-off points.
    Auto,
    List(Vec<usize>),
}

impl FromStr for WeightSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(WeightSchedule::Auto);
        }
        s.split(',')
            .map(|w| {
                w.trim()
                    .parse()
                    .map_err(|_| Error::usage(format!("bad weight {w:?} in {s:?}")))
            })
            .collect::<Result<_>>()
            .map(WeightSchedule::List)
    }
}

impl WeightSchedule {
    pub fn resolve(&self, n: usize, profile: &Profile) -> Vec<usize> {
        let mut ws = match self {
            WeightSchedule::Auto => {
                let high = n.saturating_sub(profile.r1);
                vec![0, profile.r0, profile.r0 + 1, n / 2, high.saturating_sub(1), high, n]
                    .into_iter()
                    .filter(|&w| w <= n)
                    .collect()
            }
            WeightSchedule::List(ws) => ws.clone(),
        };
        ws.sort_unstable();
        ws.dedup();
        ws
    }
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub n: usize,
    pub predicate: PredicateSource,
    pub weights: WeightSchedule,
    pub trials: usize,
    pub seed: u64,
    pub strategy: Strategy,
}

/// One executed trial.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: u64,
    pub weight: usize,
    pub output: bool,
    pub truth: bool,
    pub branch: Branch,
    pub cost_bits: usize,
}

impl TrialRecord {
    pub fn correct(&self) -> bool {
        self.output == self.truth
    }
}

/// Aggregate over the trials of one (predicate, weight) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub predicate: String,
    pub weight: usize,
    pub trials: usize,
    pub successes: usize,
    pub mean_cost_bits: f64,
    pub min_cost_bits: usize,
    pub max_cost_bits: usize,
    /// Trials ending in branch a, b, c.
    pub branch_trials: [usize; 3],
    pub branch_successes: [usize; 3],
}

impl CellStats {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of [`rate`](Self::rate).
    pub fn std_err(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn branch_rate(&self, branch: Branch) -> f64 {
        self.branch_trials[branch_index(branch)] as f64 / self.trials as f64
    }

    fn from_records(predicate: &str, weight: usize, records: &[TrialRecord]) -> Self {
        let mut branch_trials = [0; 3];
        let mut branch_successes = [0; 3];
        for r in records {
            let b = branch_index(r.branch);
            branch_trials[b] += 1;
            branch_successes[b] += r.correct() as usize;
        }
        let costs = records.iter().map(|r| r.cost_bits);
        CellStats {
            predicate: predicate.to_string(),
            weight,
            trials: records.len(),
            successes: records.iter().filter(|r| r.correct()).count(),
            mean_cost_bits: costs.clone().sum::<usize>() as f64 / records.len() as f64,
            min_cost_bits: costs.clone().min().unwrap_or(0),
            max_cost_bits: costs.max().unwrap_or(0),
            branch_trials,
            branch_successes,
        }
    }
}

fn branch_index(b: Branch) -> usize {
    match b {
        Branch::Low => 0,
        Branch::High => 1,
        Branch::Parity => 2,
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub predicate_id: String,
    pub predicate: Predicate,
    pub profile: Profile,
    pub n: usize,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellStats>,
}

#[derive(Serialize)]
struct RunRow<'a> {
    trial: u64,
    n: usize,
    predicate: &'a str,
    r0: usize,
    r1: usize,
    weight: usize,
    output: u8,
    truth: u8,
    correct: u8,
    cost_bits: usize,
    seed: u64,
}

impl RunReport {
    /// `trial,n,predicate,r0,r1,weight,output,truth,correct,cost_bits,seed`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(RunRow {
                trial: r.trial,
                n: self.n,
                predicate: &self.predicate_id,
                r0: self.profile.r0,
                r1: self.profile.r1,
                weight: r.weight,
                output: r.output as u8,
                truth: r.truth as u8,
                correct: r.correct() as u8,
                cost_bits: r.cost_bits,
                seed: self.seed,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn trial_coins(seed: u64, trial: u64) -> CoinSource {
    CoinSource::new(seed).derive(&format!("trial/{trial}"))
}

/// Runs `P` end to end on `trials` pairs at each scheduled weight and scores
/// each output against `D(|x ⊕ y|)`. Trial ids run consecutively through the
/// cells in weight order. With `dump_dir`, each trial's transcript is written
/// to `trial-<t>.tsv` there.
pub fn run_trials(cfg: &TrialConfig, dump_dir: Option<&Path>) -> Result<RunReport> {
    if cfg.trials == 0 {
        return Err(Error::usage("trials must be at least 1"));
    }
    let predicate = cfg.predicate.load(cfg.n, cfg.seed)?;
    let predicate_id = cfg.predicate.to_string();
    let protocol = SmpProtocol::new(predicate.clone(), cfg.strategy)?;
    let profile = protocol.profile().clone();
    let weights = cfg.weights.resolve(cfg.n, &profile);
    if let Some(&w) = weights.iter().find(|&&w| w > cfg.n) {
        return Err(Error::usage(format!("weight {w} outside [0, {}]", cfg.n)));
    }
    if let Some(dir) = dump_dir {
        std::fs::create_dir_all(dir)?;
    }
    let jobs: Vec<(u64, usize)> = weights
        .iter()
        .enumerate()
        .flat_map(|(c, &w)| (0..cfg.trials).map(move |i| ((c * cfg.trials + i) as u64, w)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(trial, weight)| {
            let coins = trial_coins(cfg.seed, trial);
            let (x, y) = sample_pair_with_distance(cfg.n, weight, &coins.derive("input"))?;
            let exec = protocol.run(&x, &y, &coins)?;
            if let Some(dir) = dump_dir {
                let header = TranscriptHeader {
                    seed: cfg.seed,
                    n: cfg.n,
                    predicate: predicate_id.clone(),
                    strategy: cfg.strategy.to_string(),
                    trial,
                    weight,
                    values: predicate.to_bit_string(),
                };
                std::fs::write(dir.join(format!("trial-{trial}.tsv")), exec.transcript().dump(&header))?;
            }
            Ok(record(trial, weight, &predicate, &exec))
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = records
        .chunks(cfg.trials)
        .map(|chunk| CellStats::from_records(&predicate_id, chunk[0].weight, chunk))
        .collect();
    Ok(RunReport {
        predicate_id,
        predicate,
        profile,
        n: cfg.n,
        seed: cfg.seed,
        records,
        cells,
    })
}

fn record(trial: u64, weight: usize, d: &Predicate, exec: &Execution) -> TrialRecord {
    TrialRecord {
        trial,
        weight,
        output: exec.outcome.output,
        truth: d.eval(weight),
        branch: exec.outcome.branch,
        cost_bits: exec.cost_bits(),
    }
}

/// A trial re-scored from its transcript dump alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replayed {
    pub header: TranscriptHeader,
    pub output: bool,
    pub truth: bool,
    pub branch: Branch,
    pub cost_bits: usize,
}

impl Replayed {
    pub fn correct(&self) -> bool {
        self.output == self.truth
    }
}

pub fn replay_dump(text: &str) -> Result<Replayed> {
    let (header, transcript) = Transcript::parse_dump(text)?;
    let predicate = Predicate::from_bit_string(&header.values)?;
    if predicate.n() != header.n {
        return Err(Error::usage(format!(
            "transcript header has n = {} but {} predicate values",
            header.n,
            header.values.len()
        )));
    }
    let strategy: Strategy = header.strategy.parse()?;
    let protocol = SmpProtocol::new(predicate.clone(), strategy)?;
    let outcome = protocol.replay(&transcript, &trial_coins(header.seed, header.trial))?;
    Ok(Replayed {
        truth: predicate.eval_clamped(header.weight),
        output: outcome.output,
        branch: outcome.branch,
        cost_bits: transcript.cost_bits(),
        header,
    })
}

/// Serializes any row type as CSV with a header line.
pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
