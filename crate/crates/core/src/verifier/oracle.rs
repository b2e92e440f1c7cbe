//! Exhaustive grid check for networks with at most three inputs.
//!
//! Every grid point of spacing at most `h` in the query region is
//! evaluated. A misclassified grid point is a counter-example. When every
//! grid point keeps `label0` with a margin above `2 · L · (h / 2) · dim`, the
//! Lipschitz bound `L` extends that margin to the whole region.

use serde::{Deserialize, Serialize};

use super::VerificationQuery;
use crate::error::{Error, Result};
use crate::network::{label_margin, Network};

pub const MAX_ORACLE_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleVerdict {
    Sat(Vec<f64>),
    Unsat,
    Inconclusive,
}

fn axis(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let width = hi - lo;
    if width <= 0.0 {
        return vec![lo];
    }
    let n = (width / h).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| if k == n { hi } else { (lo + width * k as f64 / n as f64).clamp(lo, hi) })
        .collect()
}

pub fn grid_oracle(net: &Network, q: &VerificationQuery, h: f64) -> Result<OracleVerdict> {
    if net.input_size() > MAX_ORACLE_DIM {
        return Err(Error::OracleDimension { max: MAX_ORACLE_DIM, actual: net.input_size() });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidConfig(format!("grid spacing must be positive, got {h}")));
    }
    let region = q.validate(net)?;
    let axes: Vec<Vec<f64>> = (0..region.dim())
        .map(|i| axis(region.lower[i], region.upper[i], h))
        .collect();
    let certificate = 2.0 * net.lipschitz_bound() * (h / 2.0) * net.input_size() as f64;

    let mut certified = true;
    let mut index = vec![0usize; axes.len()];
    loop {
        let point: Vec<f64> = index.iter().zip(&axes).map(|(&k, a)| a[k]).collect();
        let profile = net.forward(&point)?;
        if profile.top_label != q.label0 {
            return Ok(OracleVerdict::Sat(point));
        }
        if label_margin(&profile.values, q.label0) <= certificate {
            certified = false;
        }
        // Odometer increment over the grid.
        let mut d = 0;
        loop {
            if d == axes.len() {
                return Ok(if certified { OracleVerdict::Unsat } else { OracleVerdict::Inconclusive });
            }
            index[d] += 1;
            if index[d] < axes[d].len() {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}
