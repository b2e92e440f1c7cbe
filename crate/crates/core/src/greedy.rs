//! Greedy counter-example search run before the complete verifier.
//!
//! Starting from the seed, each round perturbs one coordinate at a time by
//! `±step` and looks for a neighbor that changes the seed's label. Without a
//! hit, the search moves to the neighbor with the lowest margin if that
//! lowers the current margin, and halves the step otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;
use crate::region::Region;

pub const DEFAULT_MAX_ITERATIONS: u64 = 10_000;
/// `l_min = l_max / 1024` by default, i.e. ten halvings.
pub const DEFAULT_MIN_STEP_DIVISOR: f64 = 1024.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub l_max: f64,
    pub l_min: f64,
    pub max_iterations: u64,
    /// Record each round's step and margin.
    pub trace: bool,
}

impl GreedyConfig {
    /// Defaults for radius `delta`: `l_max = delta`, `l_min = delta / 1024`.
    pub fn for_delta(delta: f64) -> Self {
        Self {
            l_max: delta,
            l_min: delta / DEFAULT_MIN_STEP_DIVISOR,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            trace: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.l_max) || !positive(self.l_min) {
            return Err(Error::InvalidConfig("l_max and l_min must be positive".into()));
        }
        if self.l_min >= self.l_max {
            return Err(Error::InvalidConfig(format!(
                "l_min ({}) must be smaller than l_max ({})",
                self.l_min, self.l_max
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("greedy max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// One search round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: f64,
    /// Margin of the current point at the start of the round.
    pub margin: f64,
    /// Margin after the round's move, if one was made.
    pub moved_to: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SearchKind {
    Counterexample(Vec<f64>),
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub kind: SearchKind,
    pub iterations: u64,
    /// Margin of the last current point or, for a counter-example, of the
    /// counter-example itself.
    pub final_margin: f64,
    pub trace: Option<Vec<TraceEntry>>,
}

impl SearchOutcome {
    pub fn counterexample(&self) -> Option<&[f64]> {
        match &self.kind {
            SearchKind::Counterexample(p) => Some(p),
            SearchKind::NotFound => None,
        }
    }
}

/// Moves `x` by `±step` along each axis, clipped to `region`. Candidates
/// that collapse back onto `x` are dropped. Order: `+step` then `-step`,
/// dimension by dimension.
pub fn gen_neighbors(x: &[f64], step: f64, region: &Region) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * x.len());
    for i in 0..x.len() {
        for shift in [step, -step] {
            let mut candidate = x.to_vec();
            candidate[i] = (x[i] + shift).clamp(region.lower[i], region.upper[i]);
            if candidate[i] != x[i] {
                out.push(candidate);
            }
        }
    }
    out
}

pub fn greedy_search(net: &Network, x0: &[f64], delta: f64, cfg: &GreedyConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidConfig(format!("radius must be positive, got {delta}")));
    }
    let region = Region::query(net, x0, delta)?;
    let label0 = net.classify(x0)?;

    let mut x = x0.to_vec();
    let mut current = net.margin(&x)?;
    let mut step = cfg.l_max / 2.0;
    let mut iterations = 0;
    let mut trace = cfg.trace.then(Vec::new);

    let kind = loop {
        if step < cfg.l_min || iterations >= cfg.max_iterations {
            break SearchKind::NotFound;
        }
        iterations += 1;

        let mut best: Option<(usize, f64)> = None;
        let neighbors = gen_neighbors(&x, step, &region);
        let mut hit = None;
        for (idx, candidate) in neighbors.iter().enumerate() {
            let profile = net.forward(candidate)?;
            if profile.top_label != label0 {
                hit = Some((idx, profile.margin));
                break;
            }
            if best.is_none_or(|(_, m)| profile.margin < m) {
                best = Some((idx, profile.margin));
            }
        }
        if let Some((idx, margin)) = hit {
            if let Some(t) = trace.as_mut() {
                t.push(TraceEntry { step, margin: current, moved_to: None });
            }
            current = margin;
            break SearchKind::Counterexample(neighbors[idx].clone());
        }

        let moved = match best {
            Some((idx, margin)) if margin < current => {
                x.clone_from(&neighbors[idx]);
                Some(margin)
            }
            _ => None,
        };
        if let Some(t) = trace.as_mut() {
            t.push(TraceEntry { step, margin: current, moved_to: moved });
        }
        match moved {
            Some(margin) => current = margin,
            None => step /= 2.0,
        }
    };

    Ok(SearchOutcome { kind, iterations, final_margin: current, trace })
}
