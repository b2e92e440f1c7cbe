//! Campaign orchestration for the four seed/pre-analysis modes.
//!
//! | mode | seeds            | greedy pre-analysis |
//! |------|------------------|---------------------|
//! | R    | uniform random   | no                  |
//! | RG   | uniform random   | yes                 |
//! | B    | low-margin       | no                  |
//! | BG   | low-margin       | yes                 |
//!
//! Seeds are drawn sequentially from one RNG stream (the low-margin sampler
//! is stateful). Greedy search and verification of a batch of seeds may run
//! on several workers; records are appended in seed order, so aggregates
//! do not depend on scheduling.

mod report;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{
    read_report, write_report, Aggregates, CampaignReport, Outcome, RepeatSummary, RunRecord,
    SeedingSummary,
};

use crate::error::{Error, Result};
use crate::format::read_network;
use crate::greedy::{greedy_search, GreedyConfig, SearchKind, DEFAULT_MAX_ITERATIONS, DEFAULT_MIN_STEP_DIVISOR};
use crate::network::Network;
use crate::rng::{seeded, SeededRng};
use crate::seeding::{random_sample, SeedingConfig, ThresholdState};
use crate::verifier::{verify_local_robustness, UnknownReason, VerdictKind, VerificationQuery, DEFAULT_MIN_WIDTH_FACTOR};

pub const DEFAULT_QUERY_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    R,
    RG,
    B,
    BG,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::R, Mode::RG, Mode::B, Mode::BG];

    pub fn boosted_seeds(self) -> bool {
        matches!(self, Mode::B | Mode::BG)
    }

    pub fn runs_greedy(self) -> bool {
        matches!(self, Mode::RG | Mode::BG)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::R => "r",
            Mode::RG => "rg",
            Mode::B => "b",
            Mode::BG => "bg",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::R => "R",
            Mode::RG => "R+G",
            Mode::B => "B",
            Mode::BG => "B+G",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('+', "").as_str() {
            "r" => Ok(Mode::R),
            "rg" => Ok(Mode::RG),
            "b" => Ok(Mode::B),
            "bg" => Ok(Mode::BG),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCondition {
    TimeBudget(Duration),
    TargetCounterexamples(u64),
}

/// Greedy settings; unset step bounds default to `delta` and `delta / 1024`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedySettings {
    pub l_max: Option<f64>,
    pub l_min: Option<f64>,
    pub max_iterations: u64,
    pub trace: bool,
}

impl Default for GreedySettings {
    fn default() -> Self {
        Self { l_max: None, l_min: None, max_iterations: DEFAULT_MAX_ITERATIONS, trace: false }
    }
}

impl GreedySettings {
    pub fn resolve(&self, delta: f64) -> GreedyConfig {
        let l_max = self.l_max.unwrap_or(delta);
        GreedyConfig {
            l_max,
            l_min: self.l_min.unwrap_or(l_max / DEFAULT_MIN_STEP_DIVISOR),
            max_iterations: self.max_iterations,
            trace: self.trace,
        }
    }
}

/// Everything that defines a campaign apart from the network itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub mode: Mode,
    pub delta: f64,
    pub stop: StopCondition,
    pub query_timeout: Duration,
    pub rng_seed: u64,
    pub seeding: SeedingConfig,
    pub greedy: GreedySettings,
    /// Defaults to `delta * 1e-4`.
    pub min_box_width: Option<f64>,
    /// Safety cap on the number of runs, whatever the stop condition.
    pub max_runs: Option<u64>,
    pub workers: usize,
}

impl CampaignConfig {
    pub fn new(mode: Mode, delta: f64, stop: StopCondition) -> Self {
        Self {
            mode,
            delta,
            stop,
            query_timeout: DEFAULT_QUERY_TIMEOUT,
            rng_seed: 0,
            seeding: SeedingConfig::default(),
            greedy: GreedySettings::default(),
            min_box_width: None,
            max_runs: None,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidConfig(format!("delta must be positive, got {}", self.delta)));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if let Some(w) = self.min_box_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidConfig("min_box_width must be positive".into()));
            }
        }
        self.seeding.validate()?;
        if self.mode.runs_greedy() {
            self.greedy.resolve(self.delta).validate()?;
        }
        Ok(())
    }

    fn min_box_width(&self) -> f64 {
        self.min_box_width.unwrap_or(self.delta * DEFAULT_MIN_WIDTH_FACTOR)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub network: PathBuf,
    pub config: CampaignConfig,
}

/// Where seeds come from: uniform draws or the low-margin sampler.
pub enum SeedSource {
    Random(SeededRng),
    Boosted { state: ThresholdState, initial_threshold: f64, rng: SeededRng },
}

pub struct SeedDraw {
    pub point: Option<Vec<f64>>,
    pub margin: Option<f64>,
    pub time_ms: f64,
    pub error: Option<String>,
}

impl SeedSource {
    pub fn for_mode(net: &Network, cfg: &CampaignConfig) -> Result<Self> {
        let mut rng = seeded(cfg.rng_seed);
        if cfg.mode.boosted_seeds() {
            let state = ThresholdState::learn(net, &cfg.seeding, &mut rng)?;
            Ok(SeedSource::Boosted { initial_threshold: state.threshold, state, rng })
        } else {
            Ok(SeedSource::Random(rng))
        }
    }

    pub fn draw(&mut self, net: &Network) -> SeedDraw {
        let start = Instant::now();
        let (point, error) = match self {
            SeedSource::Random(rng) => (Some(random_sample(net, rng)), None),
            SeedSource::Boosted { state, rng, .. } => match state.generate_seed(net, rng) {
                Ok(seed) => (Some(seed.point), None),
                Err(e) => (None, Some(e.to_string())),
            },
        };
        let margin = point.as_ref().and_then(|p| net.margin(p).ok());
        SeedDraw { point, margin, time_ms: ms(start.elapsed()), error }
    }

    pub fn seeding_summary(&self) -> Option<SeedingSummary> {
        match self {
            SeedSource::Random(_) => None,
            SeedSource::Boosted { state, initial_threshold, .. } => Some(SeedingSummary {
                initial_threshold: *initial_threshold,
                final_threshold: state.threshold,
                escalations: state.escalations,
                samples_drawn: state.samples_drawn,
            }),
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Greedy pre-analysis (for RG/BG) and then, unless greedy already found a
/// counter-example, the verifier under `timeout`.
pub fn evaluate_seed(
    net: &Network,
    cfg: &CampaignConfig,
    index: u64,
    seed: SeedDraw,
    timeout: Duration,
) -> RunRecord {
    let mut record = RunRecord {
        index,
        mode: cfg.mode,
        seed: seed.point.clone().unwrap_or_default(),
        seed_margin: seed.margin,
        label0: None,
        outcome: Outcome::Error,
        greedy_ran: false,
        greedy_found: false,
        greedy_iterations: 0,
        witness: None,
        boxes_explored: 0,
        seed_time_ms: seed.time_ms,
        greedy_time_ms: 0.0,
        verify_time_ms: 0.0,
        time_ms: seed.time_ms,
        error: seed.error,
    };
    let Some(x0) = seed.point else {
        return record;
    };
    let query = match VerificationQuery::new(net, x0.clone(), cfg.delta) {
        Ok(q) => q
            .with_time_budget(timeout)
            .with_min_box_width(cfg.min_box_width()),
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let query = VerificationQuery { probe_seed: cfg.rng_seed ^ index.rotate_left(32), ..query };
    record.label0 = Some(query.label0);

    if cfg.mode.runs_greedy() {
        let start = Instant::now();
        record.greedy_ran = true;
        let outcome = greedy_search(net, &x0, cfg.delta, &cfg.greedy.resolve(cfg.delta));
        record.greedy_time_ms = ms(start.elapsed());
        match outcome {
            Ok(found) => {
                record.greedy_iterations = found.iterations;
                if let SearchKind::Counterexample(p) = found.kind {
                    record.time_ms += record.greedy_time_ms;
                    return accept_witness(net, &query, record, p, true);
                }
            }
            Err(e) => {
                record.error = Some(e.to_string());
                record.time_ms += record.greedy_time_ms;
                return record;
            }
        }
    }

    let verdict = verify_local_robustness(net, &query);
    record.time_ms += record.greedy_time_ms;
    match verdict {
        Ok(v) => {
            record.verify_time_ms = ms(v.stats.wall_time);
            record.time_ms += record.verify_time_ms;
            record.boxes_explored = v.stats.boxes_explored;
            match v.kind {
                VerdictKind::Sat(p) => accept_witness(net, &query, record, p, false),
                VerdictKind::Unsat => RunRecord { outcome: Outcome::Unsat, ..record },
                VerdictKind::Unknown(UnknownReason::Budget) => {
                    RunRecord { outcome: Outcome::UnknownBudget, ..record }
                }
                VerdictKind::Unknown(UnknownReason::Precision) => {
                    RunRecord { outcome: Outcome::UnknownPrecision, ..record }
                }
            }
        }
        Err(e) => RunRecord { error: Some(e.to_string()), ..record },
    }
}

fn accept_witness(
    net: &Network,
    query: &VerificationQuery,
    mut record: RunRecord,
    p: Vec<f64>,
    by_greedy: bool,
) -> RunRecord {
    if query.is_counterexample(net, &p) {
        record.outcome = Outcome::Sat;
        record.greedy_found = by_greedy;
        record.witness = Some(p);
    } else {
        record.error = Some("counter-example failed re-validation".into());
    }
    record
}

/// Draws one seed and evaluates it.
pub fn run_query(
    net: &Network,
    cfg: &CampaignConfig,
    source: &mut SeedSource,
    index: u64,
    timeout: Duration,
) -> RunRecord {
    let seed = source.draw(net);
    evaluate_seed(net, cfg, index, seed, timeout)
}

pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignReport> {
    let net = read_network(&spec.network)?;
    let mut report = run_campaign_on(&net, &spec.config)?;
    report.network = spec.network.display().to_string();
    Ok(report)
}

/// Runs a campaign on an in-memory network.
pub fn run_campaign_on(net: &Network, cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut records: Vec<RunRecord> = Vec::new();
    let mut sat_total = 0u64;

    let done = |records: &[RunRecord], sat_total: u64| -> bool {
        if cfg.max_runs.is_some_and(|cap| records.len() as u64 >= cap) {
            return true;
        }
        match cfg.stop {
            StopCondition::TimeBudget(budget) => start.elapsed() >= budget,
            StopCondition::TargetCounterexamples(n) => sat_total >= n,
        }
    };

    let mut source = None;
    while !done(&records, sat_total) {
        let source = match &mut source {
            Some(s) => s,
            None => source.insert(SeedSource::for_mode(net, cfg)?),
        };
        let timeout = match cfg.stop {
            StopCondition::TimeBudget(budget) => cfg.query_timeout.min(budget.saturating_sub(start.elapsed())),
            StopCondition::TargetCounterexamples(_) => cfg.query_timeout,
        };
        let mut batch_len = cfg.workers as u64;
        if let Some(cap) = cfg.max_runs {
            batch_len = batch_len.min(cap - records.len() as u64);
        }
        let first = records.len() as u64;
        let batch: Vec<RunRecord> = if batch_len == 1 {
            vec![run_query(net, cfg, source, first, timeout)]
        } else {
            let seeds: Vec<SeedDraw> = (0..batch_len).map(|_| source.draw(net)).collect();
            seeds
                .into_par_iter()
                .enumerate()
                .map(|(i, seed)| evaluate_seed(net, cfg, first + i as u64, seed, timeout))
                .collect()
        };
        for record in batch {
            if done(&records, sat_total) && !matches!(cfg.stop, StopCondition::TimeBudget(_)) {
                break;
            }
            if record.outcome == Outcome::Sat {
                sat_total += 1;
            }
            records.push(record);
        }
    }

    let seeding = source.as_ref().and_then(SeedSource::seeding_summary);
    let aggregates = Aggregates::from_records(&records, ms(start.elapsed()));
    Ok(CampaignReport {
        network: String::new(),
        config: cfg.clone(),
        seeding,
        aggregates,
        records,
    })
}

/// `k` campaigns with RNG seeds `rng_seed, rng_seed + 1, …`.
pub fn run_repeats(net: &Network, cfg: &CampaignConfig, k: u32) -> Result<Vec<CampaignReport>> {
    (0..k)
        .map(|i| {
            let cfg = CampaignConfig { rng_seed: cfg.rng_seed.wrapping_add(i as u64), ..cfg.clone() };
            run_campaign_on(net, &cfg)
        })
        .collect()
}
