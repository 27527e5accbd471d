//! Counter-based randomness: ChaCha keyed by the master seed, one stream per
//! replication, one 64-byte block per period.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform draws available to one period, in fixed slots so that a
/// strategy that ignores its draw never shifts anyone else's.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodDraws {
    pub rainmaker: f64,
    pub forecaster: f64,
    pub weather: f64,
}

pub struct ReplicationRng {
    inner: ChaCha8Rng,
}

const WORDS_PER_PERIOD: u128 = 16;

impl ReplicationRng {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(replication);
        ReplicationRng { inner }
    }

    pub fn period(&mut self, t: u64) -> PeriodDraws {
        self.inner.set_word_pos(t as u128 * WORDS_PER_PERIOD);
        PeriodDraws {
            rainmaker: self.inner.random(),
            forecaster: self.inner.random(),
            weather: self.inner.random(),
        }
    }

    /// The generator positioned at the start of period `t`.
    pub fn at_period(&mut self, t: u64) -> &mut ChaCha8Rng {
        self.inner.set_word_pos(t as u128 * WORDS_PER_PERIOD);
        &mut self.inner
    }
}
