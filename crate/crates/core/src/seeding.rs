//! Weak-seed selection.
//!
//! A threshold is learned from the margins of a random sample set; seeds are
//! then drawn uniformly from the input box and accepted only when their
//! margin falls below the threshold. Every time more than `col_num`
//! consecutive draws are rejected the threshold grows by 10%.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;

pub const ESCALATION_FACTOR: f64 = 1.1;
pub const DEFAULT_SAMPLE_SET_SIZE: usize = 1000;
pub const DEFAULT_COL_NUM: u64 = 1000;
/// Hard cap on draws within a single `generate_seed` call.
pub const MAX_SAMPLES_PER_SEED: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdStrategy {
    /// Smallest margin over the sample set.
    #[default]
    Minimum,
    /// Mean margin minus its standard deviation.
    Average,
}

impl std::str::FromStr for ThresholdStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimum" => Ok(Self::Minimum),
            "average" => Ok(Self::Average),
            other => Err(Error::InvalidConfig(format!("unknown threshold strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedingConfig {
    pub sample_set_size: usize,
    pub col_num: u64,
    pub threshold_strategy: ThresholdStrategy,
}

impl Default for SeedingConfig {
    fn default() -> Self {
        Self {
            sample_set_size: DEFAULT_SAMPLE_SET_SIZE,
            col_num: DEFAULT_COL_NUM,
            threshold_strategy: ThresholdStrategy::Minimum,
        }
    }
}

impl SeedingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_set_size == 0 {
            return Err(Error::InvalidConfig("sample_set_size must be positive".into()));
        }
        if self.col_num == 0 {
            return Err(Error::InvalidConfig("col_num must be positive".into()));
        }
        Ok(())
    }
}

/// Uniform draw from the input box, one coordinate at a time.
pub fn random_sample<R: Rng + ?Sized>(net: &Network, rng: &mut R) -> Vec<f64> {
    net.input_lower()
        .iter()
        .zip(net.input_upper())
        .map(|(&lo, &hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn draw<R: Rng + ?Sized>(net: &Network, size: usize, rng: &mut R) -> Self {
        Self { points: (0..size).map(|_| random_sample(net, rng)).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn margins(&self, net: &Network) -> Result<Vec<f64>> {
        if self.points.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        self.points.iter().map(|x| net.margin(x)).collect()
    }
}

/// Minimum margin over the sample set.
pub fn compute_threshold(net: &Network, samples: &SampleSet) -> Result<f64> {
    Ok(samples.margins(net)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// `mean − std` of the sample margins, never below the minimum margin.
pub fn average_threshold(net: &Network, samples: &SampleSet) -> Result<f64> {
    let margins = samples.margins(net)?;
    let n = margins.len() as f64;
    let mean = margins.iter().sum::<f64>() / n;
    let var = margins.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n;
    let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((mean - var.sqrt()).max(min))
}

pub fn threshold_for(strategy: ThresholdStrategy, net: &Network, samples: &SampleSet) -> Result<f64> {
    match strategy {
        ThresholdStrategy::Minimum => compute_threshold(net, samples),
        ThresholdStrategy::Average => average_threshold(net, samples),
    }
}

/// Mutable seed-selection state. The escalated threshold carries over from
/// one `generate_seed` call to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    pub threshold: f64,
    pub col_num: u64,
    /// Rejections since the last escalation in the most recent call.
    pub collisions: u64,
    /// Escalations over the lifetime of this state.
    pub escalations: u64,
    /// Draws over the lifetime of this state.
    pub samples_drawn: u64,
}

/// An accepted seed with the bookkeeping of the call that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub point: Vec<f64>,
    pub margin: f64,
    /// Threshold in effect when the seed was accepted.
    pub threshold: f64,
    pub samples: u64,
    /// Threshold values after each escalation during this call.
    pub escalations: Vec<f64>,
}

impl ThresholdState {
    pub fn new(threshold: f64, col_num: u64) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "seed threshold must be positive and finite, got {threshold}"
            )));
        }
        if col_num == 0 {
            return Err(Error::InvalidConfig("col_num must be positive".into()));
        }
        Ok(Self { threshold, col_num, collisions: 0, escalations: 0, samples_drawn: 0 })
    }

    /// Learns the initial threshold from a fresh sample set drawn from `rng`.
    pub fn learn<R: Rng + ?Sized>(net: &Network, cfg: &SeedingConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let samples = SampleSet::draw(net, cfg.sample_set_size, rng);
        Self::new(threshold_for(cfg.threshold_strategy, net, &samples)?, cfg.col_num)
    }

    /// Draws until a point with margin strictly below the threshold appears.
    pub fn generate_seed<R: Rng + ?Sized>(&mut self, net: &Network, rng: &mut R) -> Result<Seed> {
        let mut escalations = Vec::new();
        let mut samples = 0u64;
        self.collisions = 0;
        loop {
            if self.collisions > self.col_num {
                self.threshold *= ESCALATION_FACTOR;
                self.collisions = 0;
                self.escalations += 1;
                escalations.push(self.threshold);
            }
            if samples >= MAX_SAMPLES_PER_SEED {
                return Err(Error::SeedGenerationGaveUp { samples, threshold: self.threshold });
            }
            let point = random_sample(net, rng);
            samples += 1;
            self.samples_drawn += 1;
            let margin = net.margin(&point)?;
            if margin < self.threshold {
                return Ok(Seed { point, margin, threshold: self.threshold, samples, escalations });
            }
            self.collisions += 1;
        }
    }
}

/// Corpus variant: the `k` points of `points` with the smallest margins,
/// ascending by margin (stable for equal margins).
pub fn select_weakest(net: &Network, points: &[Vec<f64>], k: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut scored = points
        .iter()
        .map(|p| Ok((p.clone(), net.margin(p)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    scored.truncate(k);
    Ok(scored)
}
