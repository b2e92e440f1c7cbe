//! Seeded synthetic networks for desk-scale experiments and tests.

use rand::Rng;

use crate::error::{Error, Result};
use crate::network::{Layer, Network};
use crate::rng::seeded;

/// Random network of the given shape on the box `[-1, 1]^n`.
pub fn random_network(shape: &[usize], seed: u64) -> Result<Network> {
    let n = shape.first().copied().unwrap_or(0);
    random_network_in_box(shape, seed, vec![-1.0; n], vec![1.0; n])
}

/// Random network with He-uniform weights (`±sqrt(6 / fan_in)`) and biases
/// drawn from `[-0.1, 0.1]`.
pub fn random_network_in_box(
    shape: &[usize],
    seed: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
) -> Result<Network> {
    if shape.len() < 3 || shape.contains(&0) {
        return Err(Error::InvalidNetwork(format!(
            "shape {shape:?} needs at least three positive layer sizes"
        )));
    }
    let mut rng = seeded(seed);
    let layers = shape
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let scale = (6.0 / fan_in as f64).sqrt();
            let rows = (0..fan_out)
                .map(|_| (0..fan_in).map(|_| rng.random_range(-scale..scale)).collect())
                .collect();
            let bias = (0..fan_out).map(|_| rng.random_range(-0.1..0.1)).collect();
            Layer::from_rows(rows, bias)
        })
        .collect::<Result<Vec<_>>>()?;
    Network::new(layers, lower, upper, None)
}

/// Parses a comma-separated shape such as `2,8,8,2`.
pub fn parse_shape(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad layer size `{tok}` in shape")))
        })
        .collect()
}
