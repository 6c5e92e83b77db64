use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::BenchError;

/// Per-hop latency model. Samples are normal and truncated below at a
/// floor by rejection, so they are always positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct LatencyModel {
    pub per_message_mean_ms: f64,
    pub per_message_jitter_ms: f64,
    pub per_message_floor_ms: f64,
    pub chain_read_mean_ms: f64,
    pub chain_read_jitter_ms: f64,
    pub chain_read_floor_ms: f64,
    pub wpa2_message_count: u32,
    pub proposed_message_count: u32,
    pub rng_seed: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            per_message_mean_ms: 15.0,
            per_message_jitter_ms: 3.0,
            per_message_floor_ms: 1.0,
            chain_read_mean_ms: 50.0,
            chain_read_jitter_ms: 10.0,
            chain_read_floor_ms: 5.0,
            wpa2_message_count: 4,
            proposed_message_count: 3,
            rng_seed: 42,
        }
    }
}

impl LatencyModel {
    pub fn validate(&self) -> Result<(), BenchError> {
        let ok = |m: f64, j: f64, f: f64| m > 0.0 && j >= 0.0 && f >= 0.0 && f < m + 6.0 * j.max(1e-9);
        if !ok(self.per_message_mean_ms, self.per_message_jitter_ms, self.per_message_floor_ms)
            || !ok(self.chain_read_mean_ms, self.chain_read_jitter_ms, self.chain_read_floor_ms)
        {
            return Err(BenchError::Invalid(format!("latency model {self:?}")));
        }
        Ok(())
    }

    /// Independent stream per (scheme, trial): results do not depend on
    /// execution order.
    pub fn trial_rng(&self, scheme_index: u64, trial: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.rng_seed);
        rng.set_stream((scheme_index << 32) | trial);
        rng
    }

    pub fn message<R: Rng>(&self, rng: &mut R) -> f64 {
        truncated(rng, self.per_message_mean_ms, self.per_message_jitter_ms, self.per_message_floor_ms)
    }

    pub fn messages<R: Rng>(&self, rng: &mut R, count: u32) -> f64 {
        (0..count).map(|_| self.message(rng)).sum()
    }

    pub fn chain_read<R: Rng>(&self, rng: &mut R) -> f64 {
        truncated(rng, self.chain_read_mean_ms, self.chain_read_jitter_ms, self.chain_read_floor_ms)
    }
}

fn truncated<R: Rng>(rng: &mut R, mean: f64, sd: f64, floor: f64) -> f64 {
    if sd == 0.0 {
        return mean.max(floor);
    }
    let normal = Normal::new(mean, sd).expect("finite parameters");
    loop {
        let x = normal.sample(rng);
        if x >= floor {
            return x;
        }
    }
}
