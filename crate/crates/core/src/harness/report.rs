//! Campaign reports: one CSV row per run plus a JSON summary.
//!
//! `runs.csv` carries every per-run field (points as space-separated
//! shortest round-trip reals), `summary.json` the aggregates, the seeding
//! summary and an echo of the configuration. Reading checks that the
//! aggregates agree with the rows.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CampaignConfig, Mode};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::region::is_counterexample;

pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Sat,
    Unsat,
    UnknownBudget,
    UnknownPrecision,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub index: u64,
    pub mode: Mode,
    pub seed: Vec<f64>,
    pub seed_margin: Option<f64>,
    pub label0: Option<usize>,
    pub outcome: Outcome,
    pub greedy_ran: bool,
    /// The counter-example came from the greedy stage.
    pub greedy_found: bool,
    pub greedy_iterations: u64,
    pub witness: Option<Vec<f64>>,
    pub boxes_explored: u64,
    pub seed_time_ms: f64,
    pub greedy_time_ms: f64,
    pub verify_time_ms: f64,
    /// Seed generation plus greedy plus verification.
    pub time_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub runs: u64,
    /// Counter-examples found by any stage.
    pub sat_total: u64,
    /// Counter-examples found by the greedy stage.
    pub sat_by_greedy: u64,
    pub unsat: u64,
    pub unknown: u64,
    pub errors: u64,
    /// `sat_total / runs`, 0 for an empty campaign.
    pub rate: f64,
    pub wall_time_ms: f64,
}

impl Aggregates {
    pub fn from_records(records: &[RunRecord], wall_time_ms: f64) -> Self {
        let count = |f: &dyn Fn(&RunRecord) -> bool| records.iter().filter(|r| f(r)).count() as u64;
        let runs = records.len() as u64;
        let sat_total = count(&|r| r.outcome == Outcome::Sat);
        Self {
            runs,
            sat_total,
            sat_by_greedy: count(&|r| r.outcome == Outcome::Sat && r.greedy_found),
            unsat: count(&|r| r.outcome == Outcome::Unsat),
            unknown: count(&|r| matches!(r.outcome, Outcome::UnknownBudget | Outcome::UnknownPrecision)),
            errors: count(&|r| r.outcome == Outcome::Error),
            rate: if runs == 0 { 0.0 } else { sat_total as f64 / runs as f64 },
            wall_time_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedingSummary {
    pub initial_threshold: f64,
    pub final_threshold: f64,
    pub escalations: u64,
    pub samples_drawn: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub network: String,
    pub config: CampaignConfig,
    pub seeding: Option<SeedingSummary>,
    pub aggregates: Aggregates,
    pub records: Vec<RunRecord>,
}

#[derive(Serialize, Deserialize)]
struct Summary {
    network: String,
    config: CampaignConfig,
    seeding: Option<SeedingSummary>,
    aggregates: Aggregates,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    run: u64,
    mode: Mode,
    seed: String,
    seed_margin: Option<f64>,
    label0: Option<usize>,
    outcome: Outcome,
    greedy_ran: bool,
    greedy_found: bool,
    greedy_iterations: u64,
    witness: String,
    boxes_explored: u64,
    seed_time_ms: f64,
    greedy_time_ms: f64,
    verify_time_ms: f64,
    time_ms: f64,
    error: String,
}

fn join_reals(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
}

fn split_reals(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Schema(format!("bad real `{t}` in point column"))))
        .collect()
}

impl From<&RunRecord> for CsvRow {
    fn from(r: &RunRecord) -> Self {
        Self {
            run: r.index,
            mode: r.mode,
            seed: join_reals(&r.seed),
            seed_margin: r.seed_margin,
            label0: r.label0,
            outcome: r.outcome,
            greedy_ran: r.greedy_ran,
            greedy_found: r.greedy_found,
            greedy_iterations: r.greedy_iterations,
            witness: r.witness.as_deref().map(join_reals).unwrap_or_default(),
            boxes_explored: r.boxes_explored,
            seed_time_ms: r.seed_time_ms,
            greedy_time_ms: r.greedy_time_ms,
            verify_time_ms: r.verify_time_ms,
            time_ms: r.time_ms,
            error: r.error.clone().unwrap_or_default(),
        }
    }
}

impl TryFrom<CsvRow> for RunRecord {
    type Error = Error;

    fn try_from(row: CsvRow) -> Result<Self> {
        let witness = if row.outcome == Outcome::Sat {
            Some(split_reals(&row.witness)?)
        } else if row.witness.is_empty() {
            None
        } else {
            return Err(Error::Schema(format!("run {} has a witness but is not sat", row.run)));
        };
        Ok(Self {
            index: row.run,
            mode: row.mode,
            seed: split_reals(&row.seed)?,
            seed_margin: row.seed_margin,
            label0: row.label0,
            outcome: row.outcome,
            greedy_ran: row.greedy_ran,
            greedy_found: row.greedy_found,
            greedy_iterations: row.greedy_iterations,
            witness,
            boxes_explored: row.boxes_explored,
            seed_time_ms: row.seed_time_ms,
            greedy_time_ms: row.greedy_time_ms,
            verify_time_ms: row.verify_time_ms,
            time_ms: row.time_ms,
            error: (!row.error.is_empty()).then_some(row.error),
        })
    }
}

impl CampaignReport {
    pub fn runs_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for record in &self.records {
            writer.serialize(CsvRow::from(record))?;
        }
        if self.records.is_empty() {
            // Header-only file for empty campaigns.
            writer.write_record([
                "run", "mode", "seed", "seed_margin", "label0", "outcome", "greedy_ran",
                "greedy_found", "greedy_iterations", "witness", "boxes_explored", "seed_time_ms",
                "greedy_time_ms", "verify_time_ms", "time_ms", "error",
            ])?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn summary_json(&self) -> Result<String> {
        let summary = Summary {
            network: self.network.clone(),
            config: self.config.clone(),
            seeding: self.seeding.clone(),
            aggregates: self.aggregates.clone(),
        };
        Ok(serde_json::to_string_pretty(&summary)? + "\n")
    }

    pub fn from_parts(runs_csv: &str, summary_json: &str) -> Result<Self> {
        let summary: Summary = serde_json::from_str(summary_json)?;
        let mut reader = csv::Reader::from_reader(runs_csv.as_bytes());
        let records = reader
            .deserialize::<CsvRow>()
            .map(|row| RunRecord::try_from(row?))
            .collect::<Result<Vec<_>>>()?;
        let report = Self {
            network: summary.network,
            config: summary.config,
            seeding: summary.seeding,
            aggregates: summary.aggregates,
            records,
        };
        report.check_invariants()?;
        Ok(report)
    }

    /// Aggregates must match the rows; greedy counts must fit the mode.
    pub fn check_invariants(&self) -> Result<()> {
        let expected = Aggregates::from_records(&self.records, self.aggregates.wall_time_ms);
        if expected != self.aggregates {
            return Err(Error::Schema(format!(
                "aggregates {:?} disagree with rows {:?}",
                self.aggregates, expected
            )));
        }
        let a = &self.aggregates;
        if !(a.sat_by_greedy <= a.sat_total && a.sat_total <= a.runs) {
            return Err(Error::Schema("sat counts out of order".into()));
        }
        if !self.config.mode.runs_greedy() && a.sat_by_greedy != 0 {
            return Err(Error::Schema(format!("mode {} reports greedy counter-examples", self.config.mode)));
        }
        if let Some(r) = self.records.iter().find(|r| r.outcome == Outcome::Sat && r.witness.is_none()) {
            return Err(Error::Schema(format!("run {} is sat without a witness", r.index)));
        }
        Ok(())
    }

    /// Re-validates every stored counter-example against `net`; returns the
    /// number checked.
    pub fn audit_witnesses(&self, net: &Network) -> Result<usize> {
        let mut checked = 0;
        for r in self.records.iter().filter(|r| r.outcome == Outcome::Sat) {
            let (Some(w), Some(label0)) = (&r.witness, r.label0) else {
                return Err(Error::WitnessRejected(format!("run {} lacks witness data", r.index)));
            };
            if net.classify(&r.seed)? != label0
                || !is_counterexample(net, &r.seed, self.config.delta, label0, w)
            {
                return Err(Error::WitnessRejected(format!("run {} witness does not re-validate", r.index)));
            }
            checked += 1;
        }
        Ok(checked)
    }

    /// Copy with every timing field zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        out.aggregates.wall_time_ms = 0.0;
        for r in &mut out.records {
            r.seed_time_ms = 0.0;
            r.greedy_time_ms = 0.0;
            r.verify_time_ms = 0.0;
            r.time_ms = 0.0;
        }
        out
    }
}

/// Writes `runs.csv` and `summary.json` into `dir`, creating it if needed.
pub fn write_report(report: &CampaignReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join(RUNS_FILE), report.runs_csv()?)?;
    fs::write(dir.join(SUMMARY_FILE), report.summary_json()?)?;
    Ok(())
}

pub fn read_report(dir: impl AsRef<Path>) -> Result<CampaignReport> {
    let dir = dir.as_ref();
    let runs = fs::read_to_string(dir.join(RUNS_FILE))?;
    let summary = fs::read_to_string(dir.join(SUMMARY_FILE))?;
    CampaignReport::from_parts(&runs, &summary)
}

/// Means over repeated campaigns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub repeats: usize,
    pub per_repeat: Vec<Aggregates>,
    pub mean_runs: f64,
    pub mean_sat_total: f64,
    pub mean_sat_by_greedy: f64,
    pub mean_rate: f64,
}

impl RepeatSummary {
    pub fn from_reports(reports: &[CampaignReport]) -> Self {
        let n = reports.len().max(1) as f64;
        let mean = |f: &dyn Fn(&Aggregates) -> f64| reports.iter().map(|r| f(&r.aggregates)).sum::<f64>() / n;
        Self {
            repeats: reports.len(),
            per_repeat: reports.iter().map(|r| r.aggregates.clone()).collect(),
            mean_runs: mean(&|a| a.runs as f64),
            mean_sat_total: mean(&|a| a.sat_total as f64),
            mean_sat_by_greedy: mean(&|a| a.sat_by_greedy as f64),
            mean_rate: mean(&|a| a.rate),
        }
    }
}
