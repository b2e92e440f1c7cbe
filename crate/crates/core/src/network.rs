//! Feed-forward ReLU classification networks.
//!
//! Hidden layers apply an affine map followed by `max(0, ·)`; the output
//! layer is affine only. The predicted label is the lowest index among the
//! maximal outputs and the margin is the gap between the largest and the
//! second-largest output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One affine layer, stored row-major (`outputs × inputs`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    /// Builds a layer from weight rows (one per output neuron) and biases.
    pub fn from_rows(rows: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let outputs = rows.len();
        if outputs == 0 {
            return Err(Error::InvalidNetwork("layer with no neurons".into()));
        }
        let inputs = rows[0].len();
        if inputs == 0 {
            return Err(Error::InvalidNetwork("layer with no inputs".into()));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != inputs) {
            return Err(Error::InvalidNetwork(format!(
                "weight row {i} has length {}, expected {inputs}",
                row.len()
            )));
        }
        if bias.len() != outputs {
            return Err(Error::InvalidNetwork(format!(
                "bias length {} does not match {outputs} neurons",
                bias.len()
            )));
        }
        Ok(Self { inputs, outputs, weights: rows.concat(), bias })
    }

    /// A layer with every weight and bias set to zero.
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, neuron: usize) -> &[f64] {
        &self.weights[neuron * self.inputs..(neuron + 1) * self.inputs]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weight(&self, neuron: usize, input: usize) -> f64 {
        self.weights[neuron * self.inputs + input]
    }

    /// `W·x + b`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.inputs);
        (0..self.outputs)
            .map(|j| {
                self.row(j).iter().zip(x).fold(self.bias[j], |acc, (w, v)| acc + w * v)
            })
            .collect()
    }

    /// Max-absolute-row-sum norm, i.e. the operator norm induced by L∞.
    pub fn linf_operator_norm(&self) -> f64 {
        (0..self.outputs)
            .map(|j| self.row(j).iter().map(|w| w.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn all_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}

/// A feed-forward ReLU network with a mandatory input box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<Layer>,
    input_lower: Vec<f64>,
    input_upper: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl Network {
    pub fn new(
        layers: Vec<Layer>,
        input_lower: Vec<f64>,
        input_upper: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidNetwork("at least one hidden layer is required".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::InvalidNetwork(format!(
                    "layer {} produces {} values but layer {} expects {}",
                    k,
                    pair[0].outputs,
                    k + 1,
                    pair[1].inputs
                )));
            }
        }
        if let Some(k) = layers.iter().position(|l| !l.all_finite()) {
            return Err(Error::InvalidNetwork(format!("layer {k} has a non-finite parameter")));
        }
        let n = layers[0].inputs;
        if input_lower.len() != n || input_upper.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "input bounds must have {n} entries (got {} and {})",
                input_lower.len(),
                input_upper.len()
            )));
        }
        for (i, (lo, hi)) in input_lower.iter().zip(&input_upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidNetwork(format!("input bound {i} is not finite")));
            }
            if lo > hi {
                return Err(Error::InvalidNetwork(format!(
                    "input lower bound {lo} exceeds upper bound {hi} in dimension {i}"
                )));
            }
        }
        let outputs = layers.last().map_or(0, |l| l.outputs);
        if let Some(labels) = &labels {
            if labels.len() != outputs {
                return Err(Error::InvalidNetwork(format!(
                    "{} labels given for {outputs} outputs",
                    labels.len()
                )));
            }
            if labels.iter().any(|l| l.is_empty() || l.contains(|c: char| c.is_whitespace() || c == '#')) {
                return Err(Error::InvalidNetwork(
                    "labels must be non-empty and free of whitespace and `#`".into(),
                ));
            }
        }
        Ok(Self { layers, input_lower, input_upper, labels })
    }

    /// A network of the given shape with every parameter zero, on the unit box.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidNetwork("layer sizes must be positive".into()));
        }
        let layers = layer_sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        let n = layer_sizes.first().copied().unwrap_or(0);
        Self::new(layers, vec![0.0; n], vec![1.0; n], None)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_size()).chain(self.layers.iter().map(|l| l.outputs)).collect()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn input_lower(&self) -> &[f64] {
        &self.input_lower
    }

    pub fn input_upper(&self) -> &[f64] {
        &self.input_upper
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Whether `x` has the right dimension and lies inside the input box.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.input_size()
            && x.iter()
                .zip(self.input_lower.iter().zip(&self.input_upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Clamps `x` coordinate-wise into the input box.
    pub fn clip_to_box(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.input_lower.iter().zip(&self.input_upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(Error::DimensionMismatch { expected: self.input_size(), actual: x.len() });
        }
        Ok(())
    }

    /// Raw output values.
    pub fn output_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.eval(x))
    }

    pub(crate) fn eval(&self, x: &[f64]) -> Vec<f64> {
        let (hidden, last) = self.layers.split_at(self.layers.len() - 1);
        let mut values = x.to_vec();
        for layer in hidden {
            values = layer.apply(&values);
            values.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        last[0].apply(&values)
    }

    pub fn forward(&self, x: &[f64]) -> Result<OutputProfile> {
        Ok(OutputProfile::from_values(self.output_values(x)?))
    }

    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.margin)
    }

    pub fn classify(&self, x: &[f64]) -> Result<usize> {
        Ok(self.forward(x)?.top_label)
    }

    /// Pre-activation values of every hidden neuron, layer by layer.
    pub fn hidden_preactivations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(x)?;
        let mut out = Vec::with_capacity(self.layers.len() - 1);
        let mut values = x.to_vec();
        for layer in &self.layers[..self.layers.len() - 1] {
            let pre = layer.apply(&values);
            values = pre.iter().map(|v| v.max(0.0)).collect();
            out.push(pre);
        }
        Ok(out)
    }

    /// Gradient of `output[target_label]` with respect to the input, taking
    /// the ReLU derivative at 0 to be 0.
    pub fn gradient(&self, x: &[f64], target_label: usize) -> Result<Vec<f64>> {
        if target_label >= self.output_size() {
            return Err(Error::LabelOutOfRange { label: target_label, outputs: self.output_size() });
        }
        let pre = self.hidden_preactivations(x)?;
        let last = &self.layers[self.layers.len() - 1];
        let mut grad = last.row(target_label).to_vec();
        for (layer, z) in self.layers[..self.layers.len() - 1].iter().zip(&pre).rev() {
            for (g, z) in grad.iter_mut().zip(z) {
                if *z <= 0.0 {
                    *g = 0.0;
                }
            }
            let mut next = vec![0.0; layer.inputs];
            for (j, g) in grad.iter().enumerate() {
                if *g == 0.0 {
                    continue;
                }
                for (acc, w) in next.iter_mut().zip(layer.row(j)) {
                    *acc += g * w;
                }
            }
            grad = next;
        }
        Ok(grad)
    }

    /// Product of the per-layer L∞ operator norms. Every output coordinate
    /// satisfies `|out(x) − out(y)| ≤ L · ‖x − y‖∞`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.layers.iter().map(Layer::linf_operator_norm).product()
    }
}

/// Output values with the derived classification and margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputProfile {
    pub values: Vec<f64>,
    pub top_label: usize,
    pub margin: f64,
}

impl OutputProfile {
    pub fn from_values(values: Vec<f64>) -> Self {
        let top_label = argmax(&values);
        // A single-output network has no competing class; its margin is 0.
        let margin = if values.len() < 2 { 0.0 } else { label_margin(&values, top_label) };
        Self { values, top_label, margin }
    }
}

/// Lowest index attaining the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// `values[label] − max_{j≠label} values[j]`; `+∞` when there is no other output.
///
/// Positive means `label` wins, negative means some other label wins. At
/// exactly zero the tie rule decides: `label` wins only if it has the lowest
/// index among the tied maxima.
pub fn label_margin(values: &[f64], label: usize) -> f64 {
    let rival = values
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != label)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    values[label] - rival
}

/// `max_i |a_i − b_i|`.
pub fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
