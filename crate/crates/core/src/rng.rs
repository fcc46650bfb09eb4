//! Keyed random substreams.
//!
//! Every stochastic decision draws from a stream identified by
//! `(seed, purpose, step, id)`, where `id` is a particle or cell id. The
//! four words form the ChaCha8 key, so streams are independent and the
//! result of a run does not depend on how particles are scheduled across
//! threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    InitForward = 1,
    InitAdjoint = 2,
    ForwardTransport = 3,
    AdjointTransport = 4,
    SourceInjection = 5,
    Reaction = 6,
    /// Free for tests and examples.
    Scratch = 99,
}

pub struct RngStream {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, purpose: Purpose, step: u64, id: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
        key[16..24].copy_from_slice(&step.to_le_bytes());
        key[24..].copy_from_slice(&id.to_le_bytes());
        Self {
            rng: ChaCha8Rng::from_seed(key),
            spare_normal: None,
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on `(0, 1]`.
    pub fn unit_positive(&mut self) -> f64 {
        1.0 - self.unit()
    }

    /// Standard normal draw by the Box-Muller transform. Draws come in
    /// pairs; the second of each pair is cached for the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let r = (-2.0 * self.unit_positive().ln()).sqrt();
        let angle = std::f64::consts::TAU * self.unit();
        let (s, c) = angle.sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }
}
