//! Complete local-robustness verification by interval bound propagation and
//! input-space branch-and-bound, plus a grid oracle for small networks and
//! the text boundary to external verifiers.
//!
//! The query region is the L∞ ball of radius `delta` around `x0` clipped to
//! the input box. Boxes are explored best-first by their worst margin lower
//! bound: a box is certified when every rival's margin bound is positive,
//! refuted when its center or a corner changes the label, and split along
//! its widest dimension otherwise.

mod bounds;
mod external;
mod oracle;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use bounds::{certifies, hidden_bounds, interval_bounds, margin_lower_bounds};
pub use external::{export_query, import_witness, parse_query, parse_witness, write_witness, ExportedQuery};
pub use oracle::{grid_oracle, OracleVerdict, MAX_ORACLE_DIM};

use crate::error::{Error, Result};
use crate::network::Network;
use crate::region::{is_counterexample, Region};
use crate::rng::seeded;

pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(60);
pub const DEFAULT_MIN_WIDTH_FACTOR: f64 = 1e-4;
/// Corners probed per box when the dimension is too large to enumerate them.
pub const MAX_CORNER_PROBES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationQuery {
    pub x0: Vec<f64>,
    pub delta: f64,
    pub label0: usize,
    pub time_budget: Duration,
    pub min_box_width: f64,
    /// Seed for the corner sampler used above eight dimensions.
    pub probe_seed: u64,
}

impl VerificationQuery {
    /// Query with `label0 = classify(x0)` and default budget and precision.
    pub fn new(net: &Network, x0: Vec<f64>, delta: f64) -> Result<Self> {
        let label0 = net.classify(&x0)?;
        Ok(Self {
            x0,
            delta,
            label0,
            time_budget: DEFAULT_TIME_BUDGET,
            min_box_width: delta * DEFAULT_MIN_WIDTH_FACTOR,
            probe_seed: 0,
        })
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = budget;
        self
    }

    pub fn with_min_box_width(mut self, width: f64) -> Self {
        self.min_box_width = width;
        self
    }

    pub fn validate(&self, net: &Network) -> Result<Region> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidConfig(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.min_box_width.is_finite() && self.min_box_width > 0.0) {
            return Err(Error::InvalidConfig("min_box_width must be positive".into()));
        }
        if self.label0 >= net.output_size() {
            return Err(Error::LabelOutOfRange { label: self.label0, outputs: net.output_size() });
        }
        Region::query(net, &self.x0, self.delta)
    }

    pub fn is_counterexample(&self, net: &Network, p: &[f64]) -> bool {
        is_counterexample(net, &self.x0, self.delta, self.label0, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownReason {
    Budget,
    Precision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VerdictKind {
    Sat(Vec<f64>),
    Unsat,
    Unknown(UnknownReason),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifierStats {
    pub boxes_explored: u64,
    pub max_depth: u32,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub stats: VerifierStats,
}

impl Verdict {
    pub fn witness(&self) -> Option<&[f64]> {
        match &self.kind {
            VerdictKind::Sat(p) => Some(p),
            _ => None,
        }
    }
}

struct Pending {
    worst: f64,
    seq: u64,
    depth: u32,
    region: Region,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Max-heap: the most negative worst-case margin pops first, then FIFO.
    fn cmp(&self, other: &Self) -> Ordering {
        other.worst.total_cmp(&self.worst).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn probe<R: Rng>(net: &Network, q: &VerificationQuery, region: &Region, rng: &mut R) -> Option<Vec<f64>> {
    let check = |p: Vec<f64>| q.is_counterexample(net, &p).then_some(p);
    if let Some(p) = check(region.center()) {
        return Some(p);
    }
    let dim = region.dim();
    if dim <= 8 {
        (0..1u64 << dim).find_map(|mask| check(region.corner(mask)))
    } else {
        (0..MAX_CORNER_PROBES).find_map(|_| {
            let p: Vec<f64> = (0..dim)
                .map(|i| if rng.random::<bool>() { region.upper[i] } else { region.lower[i] })
                .collect();
            check(p)
        })
    }
}

/// Decides local robustness of `net` around `q.x0`.
pub fn verify_local_robustness(net: &Network, q: &VerificationQuery) -> Result<Verdict> {
    let start = Instant::now();
    let root = q.validate(net)?;
    let mut rng = seeded(q.probe_seed);
    let mut stats = VerifierStats::default();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let (_, worst) = certifies(net, &root, q.label0);
    heap.push(Pending { worst, seq, depth: 0, region: root });
    let mut precision_limited = false;

    let kind = loop {
        let Some(item) = heap.pop() else {
            break if precision_limited {
                VerdictKind::Unknown(UnknownReason::Precision)
            } else {
                VerdictKind::Unsat
            };
        };
        if start.elapsed() >= q.time_budget {
            break VerdictKind::Unknown(UnknownReason::Budget);
        }
        stats.boxes_explored += 1;
        stats.max_depth = stats.max_depth.max(item.depth);

        if certifies(net, &item.region, q.label0).0 {
            continue;
        }
        if let Some(p) = probe(net, q, &item.region, &mut rng) {
            break VerdictKind::Sat(p);
        }
        if item.region.widths().iter().all(|w| *w < q.min_box_width) {
            precision_limited = true;
            continue;
        }
        let (left, right) = item.region.split(item.region.widest_dim());
        for child in [left, right] {
            seq += 1;
            let (_, worst) = certifies(net, &child, q.label0);
            heap.push(Pending { worst, seq, depth: item.depth + 1, region: child });
        }
    };

    stats.wall_time = start.elapsed();
    Ok(Verdict { kind, stats })
}
