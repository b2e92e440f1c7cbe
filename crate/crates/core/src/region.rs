//! Axis-aligned boxes and the L∞ query region around a seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{linf_distance, Network};

/// Per-dimension closed interval `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), actual: upper.len() });
        }
        if lower.iter().zip(&upper).any(|(lo, hi)| lo.partial_cmp(hi).is_none_or(|o| o.is_gt())) {
            return Err(Error::InvalidConfig("box lower bound exceeds upper bound".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn point(x: &[f64]) -> Self {
        Self { lower: x.to_vec(), upper: x.to_vec() }
    }

    /// The L∞ ball of radius `delta` around `x0`, intersected with the
    /// network's input box. Bounds are rounded inward so that every point of
    /// the region is within `delta` of `x0` in floating point.
    pub fn query(net: &Network, x0: &[f64], delta: f64) -> Result<Self> {
        if x0.len() != net.input_size() {
            return Err(Error::DimensionMismatch { expected: net.input_size(), actual: x0.len() });
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidConfig(format!("radius must be finite and non-negative, got {delta}")));
        }
        let mut lower = Vec::with_capacity(x0.len());
        let mut upper = Vec::with_capacity(x0.len());
        for ((&c, &box_lo), &box_hi) in x0.iter().zip(net.input_lower()).zip(net.input_upper()) {
            let mut lo = (c - delta).max(box_lo);
            while c - lo > delta {
                lo = lo.next_up();
            }
            let mut hi = (c + delta).min(box_hi);
            while hi - c > delta {
                hi = hi.next_down();
            }
            if lo > hi {
                return Err(Error::EmptyQueryRegion);
            }
            lower.push(lo);
            upper.push(hi);
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| lo + (hi - lo) / 2.0).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| hi - lo).collect()
    }

    /// Widest dimension, lowest index on ties.
    pub fn widest_dim(&self) -> usize {
        let widths = self.widths();
        let mut best = 0;
        for (i, w) in widths.iter().enumerate() {
            if *w > widths[best] {
                best = i;
            }
        }
        best
    }

    /// Halves the region along `dim`.
    pub fn split(&self, dim: usize) -> (Self, Self) {
        let mid = self.lower[dim] + (self.upper[dim] - self.lower[dim]) / 2.0;
        let mut left = self.clone();
        let mut right = self.clone();
        left.upper[dim] = mid;
        right.lower[dim] = mid;
        (left, right)
    }

    /// Corner selected by the bits of `mask` (bit `i` set means upper bound).
    pub fn corner(&self, mask: u64) -> Vec<f64> {
        (0..self.dim())
            .map(|i| if i < 64 && mask >> i & 1 == 1 { self.upper[i] } else { self.lower[i] })
            .collect()
    }
}

/// Whether `p` is a valid counter-example for the query `(x0, delta, label0)`.
pub fn is_counterexample(net: &Network, x0: &[f64], delta: f64, label0: usize, p: &[f64]) -> bool {
    net.contains(p)
        && linf_distance(p, x0) <= delta
        && net.classify(p).is_ok_and(|label| label != label0)
}
