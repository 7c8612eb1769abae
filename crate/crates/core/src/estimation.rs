//! Block and repetition statistics shared by both samplers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Multiphase,
    Hitrun,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Multiphase => "multiphase",
            Method::Hitrun => "hitrun",
        }
    }
}

/// Hit counts of one phase of a multiphase repetition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseHits {
    pub radius: f64,
    pub samples: u64,
    /// Samples inside the convex set of states.
    pub states: u64,
    /// States that also satisfy the target predicate.
    pub target: u64,
    /// States inside the previous (smaller) ball.
    pub states_inner: u64,
    /// Target hits inside the previous ball.
    pub target_inner: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub mean: f64,
    /// Repetition standard deviation (multiphase) or standard deviation of
    /// the block mean (hit-and-run).
    pub sigma: f64,
    pub samples: u64,
    pub blocks_or_reps: u64,
    pub method: Method,
    pub predicate_name: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_phase_hits: Option<Vec<PhaseHits>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSummary {
    pub mean: f64,
    pub sigma_mean: f64,
    pub n_blocks: usize,
}

/// Splits `bits` into blocks of `block_size` (a trailing partial block is
/// dropped) and returns the mean block fraction and `σ_B/√N_I`.
pub fn block_statistics(bits: &[bool], block_size: usize) -> Result<BlockSummary> {
    if block_size == 0 || bits.len() < 2 * block_size {
        return Err(Error::InvalidConfig(format!(
            "block statistics need at least two full blocks ({} bits, block size {block_size})",
            bits.len()
        )));
    }
    let fractions: Vec<f64> = bits
        .chunks_exact(block_size)
        .map(|b| b.iter().filter(|&&x| x).count() as f64 / block_size as f64)
        .collect();
    block_statistics_from_fractions(&fractions)
}

pub fn block_statistics_from_fractions(fractions: &[f64]) -> Result<BlockSummary> {
    let n = fractions.len();
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "block statistics need at least two full blocks, got {n}"
        )));
    }
    let (mean, sd) = mean_and_sample_sd(fractions);
    Ok(BlockSummary {
        mean,
        sigma_mean: sd / (n as f64).sqrt(),
        n_blocks: n,
    })
}

/// Arithmetic mean and sample standard deviation (divisor `s - 1`).
pub fn repetition_statistics(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "repetition statistics need at least two values, got {}",
            values.len()
        )));
    }
    Ok(mean_and_sample_sd(values))
}

fn mean_and_sample_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Streams predicate bits into per-block success counts.
#[derive(Debug, Clone)]
pub struct BlockAccumulator {
    block_size: u64,
    in_block: u64,
    hits: u64,
    blocks: Vec<u64>,
}

impl BlockAccumulator {
    pub fn new(block_size: u64) -> Self {
        assert!(block_size > 0, "block size must be positive");
        Self {
            block_size,
            in_block: 0,
            hits: 0,
            blocks: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        self.hits += bit as u64;
        self.in_block += 1;
        if self.in_block == self.block_size {
            self.blocks.push(self.hits);
            self.in_block = 0;
            self.hits = 0;
        }
    }

    /// Success counts of the completed blocks.
    pub fn block_hits(&self) -> &[u64] {
        &self.blocks
    }

    pub fn fractions(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|&h| h as f64 / self.block_size as f64)
            .collect()
    }
}

/// CSV of per-block success fractions (`block,fraction`).
pub fn block_fractions_csv(fractions: &[f64]) -> String {
    let mut s = String::from("block,fraction\n");
    for (i, f) in fractions.iter().enumerate() {
        s.push_str(&format!("{i},{f}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn all_true_bits() {
        let s = block_statistics(&[true; 50], 10).unwrap();
        assert_eq!((s.mean, s.sigma_mean, s.n_blocks), (1.0, 0.0, 5));
    }

    #[test]
    fn alternating_bits_have_zero_spread() {
        let bits: Vec<bool> = (0..100_000).map(|i| i % 2 == 0).collect();
        let s = block_statistics(&bits, 10_000).unwrap();
        assert_eq!((s.mean, s.sigma_mean), (0.5, 0.0));
    }

    #[test]
    fn trailing_partial_block_dropped() {
        let mut bits = vec![false; 20];
        bits.extend([true; 5]);
        let s = block_statistics(&bits, 10).unwrap();
        assert_eq!((s.mean, s.n_blocks), (0.0, 2));
    }

    #[test]
    fn too_few_blocks() {
        assert!(matches!(
            block_statistics(&[true; 19], 10),
            Err(Error::InvalidConfig(_))
        ));
        assert!(block_statistics(&[true; 19], 0).is_err());
    }

    #[test]
    fn fair_coin_sigma_matches_bernoulli() {
        let mut rng = crate::rng::RngStream::new(5, 0);
        let bits: Vec<bool> = (0..1_000_000).map(|_| rng.random::<bool>()).collect();
        let s = block_statistics(&bits, 10_000).unwrap();
        let expected = (0.25f64 / 1e4).sqrt() / 10.0;
        assert!(s.sigma_mean > expected / 1.2 && s.sigma_mean < expected * 1.2, "{}", s.sigma_mean);
    }

    #[test]
    fn repetition_examples() {
        assert_eq!(repetition_statistics(&[0.5, 0.5, 0.5]).unwrap(), (0.5, 0.0));
        let (m, s) = repetition_statistics(&[0.4, 0.6]).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
        assert!((s - 0.02f64.sqrt()).abs() < 1e-15);
        assert!(repetition_statistics(&[0.5]).is_err());
    }

    #[test]
    fn accumulator_matches_slice_statistics() {
        let bits: Vec<bool> = (0..1234).map(|i| (i * 7919) % 13 < 5).collect();
        let mut acc = BlockAccumulator::new(100);
        bits.iter().for_each(|&b| acc.push(b));
        let a = block_statistics_from_fractions(&acc.fractions()).unwrap();
        let b = block_statistics(&bits, 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_export() {
        assert_eq!(block_fractions_csv(&[0.5, 0.25]), "block,fraction\n0,0.5\n1,0.25\n");
    }

    proptest! {
        #[test]
        fn block_permutation_invariance(mut f in prop::collection::vec(0.0f64..1.0, 2..40), rot in 0usize..40) {
            let a = block_statistics_from_fractions(&f).unwrap();
            let k = rot % f.len();
            f.rotate_left(k);
            f.reverse();
            let b = block_statistics_from_fractions(&f).unwrap();
            prop_assert!((a.mean - b.mean).abs() < 1e-12);
            prop_assert!((a.sigma_mean - b.sigma_mean).abs() < 1e-12);
        }

        #[test]
        fn merged_equal_runs_average_means(a in prop::collection::vec(0.0f64..1.0, 3), b in prop::collection::vec(0.0f64..1.0, 3)) {
            let ma = block_statistics_from_fractions(&a).unwrap().mean;
            let mb = block_statistics_from_fractions(&b).unwrap().mean;
            let merged: Vec<f64> = a.iter().chain(&b).copied().collect();
            let m = block_statistics_from_fractions(&merged).unwrap().mean;
            prop_assert!((m - 0.5 * (ma + mb)).abs() < 1e-12);
        }
    }
}
