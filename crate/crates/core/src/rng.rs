//! Seed derivation and counter-based random streams.
//!
//! Every random draw in the crate comes from a [`SeedStream`]. Children are
//! derived by mixing a label into the parent seed, so the draws for trial
//! `k` never depend on how many draws trial `k - 1` consumed. This is what
//! lets parallel runs reproduce the sequential result bit for bit.

use crate::linalg::{StateVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream(u64);

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Child stream for an integer label (trial index, setting index, ...).
    pub fn child(self, index: u64) -> Self {
        Self(splitmix64(self.0 ^ splitmix64(index.wrapping_add(GOLDEN))))
    }

    /// Child stream for a named purpose ("u", "v", "benchmark", ...).
    pub fn named(self, name: &str) -> Self {
        self.child(fnv1a(name))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Same key as [`SeedStream::rng`] but on an independent ChaCha stream.
    pub fn rng_on(self, stream: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(stream);
        rng
    }
}

/// Haar-random pure state: normalized complex Gaussian vector.
pub fn haar_state<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect();
        if let Ok(v) = StateVector::normalize(amps) {
            return v;
        }
    }
}

/// Uniform phase in `[0, 2π)`.
pub fn random_phase<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * std::f64::consts::TAU
}
