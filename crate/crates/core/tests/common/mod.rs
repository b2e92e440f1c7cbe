#![allow(dead_code)]

use achilles_core::{Layer, Network};
use num::{BigRational, Signed, ToPrimitive, Zero};

/// Straight-line evaluation in exact rational arithmetic.
pub fn rational_forward(net: &Network, x: &[f64]) -> Vec<BigRational> {
    let exact = |v: f64| BigRational::from_float(v).expect("finite");
    let mut values: Vec<BigRational> = x.iter().map(|v| exact(*v)).collect();
    let n = net.layers().len();
    for (k, layer) in net.layers().iter().enumerate() {
        let mut next = Vec::with_capacity(layer.outputs());
        for j in 0..layer.outputs() {
            let mut acc = exact(layer.bias()[j]);
            for (i, v) in values.iter().enumerate() {
                acc += exact(layer.weight(j, i)) * v;
            }
            if k + 1 < n && acc.is_negative() {
                acc = BigRational::zero();
            }
            next.push(acc);
        }
        values = next;
    }
    values
}

pub fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().expect("representable")
}

/// Argmax (lowest index on ties) and top-minus-second margin, exactly.
pub fn rational_profile(values: &[BigRational]) -> (usize, BigRational) {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    let second = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, v)| v.clone())
        .max()
        .expect("at least two outputs");
    (best, &values[best] - second)
}

/// `out(x) = (x, 1 − x)` on `[0, 1]`.
pub fn flip_net() -> Network {
    Network::new(
        vec![
            Layer::from_rows(vec![vec![1.0]], vec![0.0]).unwrap(),
            Layer::from_rows(vec![vec![1.0], vec![-1.0]], vec![0.0, 1.0]).unwrap(),
        ],
        vec![0.0],
        vec![1.0],
        None,
    )
    .unwrap()
}

/// One-sided two-sample z statistic for `mean(a) < mean(b)`.
pub fn z_less(a: &[f64], b: &[f64]) -> f64 {
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, var / n)
    };
    let (ma, va) = stats(a);
    let (mb, vb) = stats(b);
    (mb - ma) / (va + vb).sqrt()
}

/// One-sided 1% critical value of the standard normal.
pub const Z_CRIT_1PCT: f64 = 2.326;
