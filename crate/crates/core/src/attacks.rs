//! Iterated FGSM and the seed-selection boost for attacks.
//!
//! Each step moves every coordinate by `eps` against the sign of the
//! gradient of the original label's output, then clips to the input box.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;
use crate::rng::seeded;
use crate::seeding::{random_sample, SeedingConfig, ThresholdState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub eps: f64,
    pub epo: u32,
}

impl AttackConfig {
    pub fn new(eps: f64, epo: u32) -> Result<Self> {
        let cfg = Self { eps, epo };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        if self.epo == 0 {
            return Err(Error::InvalidConfig("epo must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub success: bool,
    pub adversarial: Option<Vec<f64>>,
    pub steps_used: u32,
}

pub fn fgsm_step(net: &Network, x: &[f64], label0: usize, eps: f64) -> Result<Vec<f64>> {
    let grad = net.gradient(x, label0)?;
    let mut next: Vec<f64> = x
        .iter()
        .zip(&grad)
        .map(|(v, g)| if *g == 0.0 { *v } else { v - eps * g.signum() })
        .collect();
    net.clip_to_box(&mut next);
    Ok(next)
}

/// Up to `epo` FGSM steps, stopping at the first label change.
pub fn attack(net: &Network, x: &[f64], cfg: &AttackConfig) -> Result<AttackResult> {
    cfg.validate()?;
    let label0 = net.classify(x)?;
    let mut current = x.to_vec();
    for step in 1..=cfg.epo {
        current = fgsm_step(net, &current, label0, cfg.eps)?;
        if net.classify(&current)? != label0 {
            return Ok(AttackResult { success: true, adversarial: Some(current), steps_used: step });
        }
    }
    Ok(AttackResult { success: false, adversarial: None, steps_used: cfg.epo })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Uniform random starting points.
    R,
    /// Low-margin starting points from the threshold sampler.
    B,
}

impl std::str::FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" => Ok(Self::R),
            "b" => Ok(Self::B),
            other => Err(Error::InvalidConfig(format!("unknown selection `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackCampaign {
    pub selection: Selection,
    pub inputs: usize,
    pub successes: usize,
    pub rate: f64,
    /// Inputs for which no starting point could be selected; they count as
    /// unsuccessful attacks.
    pub seed_failures: usize,
    pub starts: Vec<Vec<f64>>,
}

/// Draws `n_inputs` starting points with `selection` and attacks each one.
pub fn boosted_attack_campaign(
    net: &Network,
    n_inputs: usize,
    cfg: &AttackConfig,
    selection: Selection,
    seeding: &SeedingConfig,
    rng_seed: u64,
) -> Result<AttackCampaign> {
    if n_inputs == 0 {
        return Err(Error::InvalidConfig("at least one input is required".into()));
    }
    cfg.validate()?;
    let mut rng = seeded(rng_seed);
    let starts: Vec<Vec<f64>> = match selection {
        Selection::R => (0..n_inputs).map(|_| random_sample(net, &mut rng)).collect(),
        Selection::B => {
            seeding.validate()?;
            // A degenerate net (zero margin on every sample) yields no usable threshold.
            match ThresholdState::learn(net, seeding, &mut rng) {
                Ok(mut state) => (0..n_inputs)
                    .filter_map(|_| state.generate_seed(net, &mut rng).ok().map(|s| s.point))
                    .collect(),
                Err(_) => Vec::new(),
            }
        }
    };
    let outcomes = starts
        .par_iter()
        .map(|x| attack(net, x, cfg))
        .collect::<Result<Vec<_>>>()?;
    let successes = outcomes.iter().filter(|r| r.success).count();
    Ok(AttackCampaign {
        selection,
        inputs: n_inputs,
        successes,
        rate: successes as f64 / n_inputs as f64,
        seed_failures: n_inputs - starts.len(),
        starts,
    })
}

/// One line per starting point, space-separated coordinates.
pub fn export_seed_list(points: &[Vec<f64>]) -> String {
    points
        .iter()
        .map(|p| format!("{}\n", crate::format::format_reals(p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{linf_distance, Layer};

    fn flip_net() -> Network {
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

    #[test]
    fn zero_gradient_leaves_point() {
        let net = Network::zeros(&[2, 2, 2]).unwrap();
        assert_eq!(fgsm_step(&net, &[0.3, 0.6], 0, 0.1).unwrap(), vec![0.3, 0.6]);
        let r = attack(&net, &[0.3, 0.6], &AttackConfig::new(0.1, 1).unwrap()).unwrap();
        assert!(!r.success);
    }

    #[test]
    fn flip_net_step_moves_right_and_succeeds() {
        let net = flip_net();
        let next = fgsm_step(&net, &[0.45], 1, 0.1).unwrap();
        assert!((next[0] - 0.55).abs() < 1e-15);
        let r = attack(&net, &[0.45], &AttackConfig::new(0.1, 1).unwrap()).unwrap();
        assert!(r.success);
        assert_eq!(r.steps_used, 1);
        assert_eq!(net.classify(r.adversarial.as_ref().unwrap()).unwrap(), 0);
    }

    #[test]
    fn boundary_clipping() {
        let net = flip_net();
        // Descending out_0 = x moves left.
        assert!((fgsm_step(&net, &[0.95], 0, 0.1).unwrap()[0] - 0.85).abs() < 1e-15);
        // Descending out_1 = 1 - x moves right, past the upper bound.
        assert_eq!(fgsm_step(&net, &[0.3], 1, 5.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn dominant_margin_never_flips() {
        let net = Network::new(
            vec![
                Layer::from_rows(vec![vec![1.0]], vec![0.0]).unwrap(),
                Layer::from_rows(vec![vec![0.1], vec![-0.1]], vec![3.0, 0.0]).unwrap(),
            ],
            vec![0.0],
            vec![1.0],
            None,
        )
        .unwrap();
        let cfg = AttackConfig::new(0.05, 4).unwrap();
        // margin ≥ 2.8 > 2 · L · eps · epo = 0.04
        let r = attack(&net, &[0.5], &cfg).unwrap();
        assert!(!r.success);
    }

    #[test]
    fn perturbation_accounting() {
        let net = crate::synth::random_network(&[4, 8, 3], 2).unwrap();
        let x0 = vec![0.1, -0.3, 0.5, 0.0];
        let label0 = net.classify(&x0).unwrap();
        let mut x = x0.clone();
        for k in 1..=5 {
            x = fgsm_step(&net, &x, label0, 0.02).unwrap();
            assert!(linf_distance(&x, &x0) <= k as f64 * 0.02 + 1e-15);
        }
    }

    #[test]
    fn zero_net_campaign_rate_is_zero() {
        let net = Network::zeros(&[2, 2, 2]).unwrap();
        let cfg = AttackConfig::new(0.1, 3).unwrap();
        let r = boosted_attack_campaign(&net, 20, &cfg, Selection::R, &SeedingConfig::default(), 1).unwrap();
        assert_eq!(r.rate, 0.0);
        // Margins are all zero, so no positive threshold can be learned.
        let b = boosted_attack_campaign(&net, 20, &cfg, Selection::B, &SeedingConfig::default(), 1).unwrap();
        assert_eq!((b.rate, b.seed_failures), (0.0, 20));
    }

    #[test]
    fn seed_list_format() {
        let text = export_seed_list(&[vec![0.5, 1.0]]);
        assert_eq!(text, "5.0000000000000000e-1 1.0000000000000000e0\n");
        assert!(AttackConfig::new(0.0, 1).is_err());
        assert!(AttackConfig::new(0.1, 0).is_err());
    }
}
