//! Counter-based random substreams.
//!
//! Every trial draws from independent ChaCha8 streams addressed by
//! `(master seed, purpose, attempt)` as the key and the trial index as the
//! stream id. A trial's randomness therefore never depends on which other
//! trials ran, or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// What a substream is used for. Each purpose gets a disjoint key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Geometry = 1,
    Schedule = 2,
    Fading = 3,
    Cellular = 4,
}

/// Address of one random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub trial: u64,
    pub purpose: Purpose,
    /// Bumped when a realization has to be redrawn (degenerate sample).
    pub attempt: u32,
}

impl StreamKey {
    pub fn new(seed: u64, trial: u64, purpose: Purpose) -> Self {
        Self {
            seed,
            trial,
            purpose,
            attempt: 0,
        }
    }

    pub fn with_purpose(self, purpose: Purpose) -> Self {
        Self { purpose, ..self }
    }

    pub fn next_attempt(self) -> Self {
        Self {
            attempt: self.attempt + 1,
            ..self
        }
    }

    pub fn rng(&self) -> TrialRng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&(self.purpose as u64).to_le_bytes());
        key[16..20].copy_from_slice(&self.attempt.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.trial);
        rng
    }
}
