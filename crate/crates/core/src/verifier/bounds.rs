//! Interval bound propagation.
//!
//! Affine layers split each weight by sign; ReLU clamps both ends at 0.
//! Every affine step is widened by a floating-point error term so the
//! enclosure stays sound under rounding.

use crate::network::{Layer, Network};
use crate::region::Region;

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

fn affine(layer: &Layer, lower: &[f64], upper: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let gamma = (layer.inputs() as f64 + 2.0) * UNIT_ROUNDOFF * 1.01;
    let mut lo = Vec::with_capacity(layer.outputs());
    let mut hi = Vec::with_capacity(layer.outputs());
    for j in 0..layer.outputs() {
        let b = layer.bias()[j];
        let (mut l, mut u, mut mag) = (b, b, b.abs());
        for ((w, a), c) in layer.row(j).iter().zip(lower).zip(upper) {
            if *w >= 0.0 {
                l += w * a;
                u += w * c;
            } else {
                l += w * c;
                u += w * a;
            }
            mag += w.abs() * a.abs().max(c.abs());
        }
        let err = gamma * mag;
        lo.push(l - err);
        hi.push(u + err);
    }
    (lo, hi)
}

/// Enclosure of the last hidden layer's activations over `region`.
pub fn hidden_bounds(net: &Network, region: &Region) -> (Vec<f64>, Vec<f64>) {
    let layers = net.layers();
    let mut lo = region.lower.clone();
    let mut hi = region.upper.clone();
    for layer in &layers[..layers.len() - 1] {
        let (l, u) = affine(layer, &lo, &hi);
        lo = l.into_iter().map(|v| v.max(0.0)).collect();
        hi = u.into_iter().map(|v| v.max(0.0)).collect();
    }
    (lo, hi)
}

/// Per-output `(lo, hi)` with `lo ≤ out_j(x) ≤ hi` for every `x` in `region`.
pub fn interval_bounds(net: &Network, region: &Region) -> Vec<(f64, f64)> {
    let (lo, hi) = hidden_bounds(net, region);
    let last = &net.layers()[net.layers().len() - 1];
    let (l, u) = affine(last, &lo, &hi);
    l.into_iter().zip(u).collect()
}

/// Lower bounds on `out_label − out_j` over `region`, one per output
/// (`+∞` at `label`). The output layer is folded into each difference
/// before bounding, which is tighter than subtracting output intervals.
pub fn margin_lower_bounds(net: &Network, region: &Region, label: usize) -> Vec<f64> {
    let (lo, hi) = hidden_bounds(net, region);
    let last = &net.layers()[net.layers().len() - 1];
    let gamma = (last.inputs() as f64 + 3.0) * UNIT_ROUNDOFF * 1.01;
    let top = last.row(label);
    (0..last.outputs())
        .map(|j| {
            if j == label {
                return f64::INFINITY;
            }
            let b = last.bias()[label] - last.bias()[j];
            let (mut l, mut mag) = (b, b.abs());
            for (k, (w_top, w_j)) in top.iter().zip(last.row(j)).enumerate() {
                let w = w_top - w_j;
                l += if w >= 0.0 { w * lo[k] } else { w * hi[k] };
                mag += (w_top.abs() + w_j.abs()) * hi[k].abs().max(lo[k].abs());
            }
            l - gamma * mag * 2.0
        })
        .collect()
}

/// Whether every point of `region` provably keeps `label`, honoring the
/// lowest-index tie rule: against a higher-index rival a zero gap suffices.
pub fn certifies(net: &Network, region: &Region, label: usize) -> (bool, f64) {
    let bounds = margin_lower_bounds(net, region, label);
    let proved = bounds
        .iter()
        .enumerate()
        .all(|(j, &lb)| j == label || if j > label { lb >= 0.0 } else { lb > 0.0 });
    let worst = bounds.iter().copied().fold(f64::INFINITY, f64::min);
    (proved, worst)
}
