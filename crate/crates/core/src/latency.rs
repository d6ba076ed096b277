//! Seeded latency and jitter injection that never reorders messages.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencyConfig {
    pub mean_ms: f64,
    pub jitter_ms: f64,
    #[serde(default)]
    pub seed: u64,
}

impl LatencyConfig {
    pub fn none() -> Self {
        Self::default()
    }
}

/// Draws per-message delays uniformly in `[max(0, mean - jitter), mean + jitter]`.
#[derive(Debug, Clone)]
pub struct DelaySampler {
    rng: ChaCha8Rng,
    mean: f64,
    jitter: f64,
}

impl DelaySampler {
    pub fn new(cfg: LatencyConfig) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            mean: cfg.mean_ms.max(0.0),
            jitter: cfg.jitter_ms.max(0.0),
        }
    }

    /// Next delay in whole milliseconds.
    pub fn next_delay_ms(&mut self) -> u64 {
        if self.jitter == 0.0 {
            return self.mean.round() as u64;
        }
        let lo = (self.mean - self.jitter).max(0.0);
        let hi = self.mean + self.jitter;
        self.rng.random_range(lo..=hi).round() as u64
    }
}

/// One direction of a delayed link. Delivery time is the drawn delay, pushed
/// back when needed so that nothing overtakes an earlier message.
#[derive(Debug, Clone)]
pub struct LatencyChannel<T> {
    sampler: DelaySampler,
    queue: VecDeque<(u64, T)>,
    last_delivery: u64,
}

impl<T> LatencyChannel<T> {
    pub fn new(cfg: LatencyConfig) -> Self {
        Self {
            sampler: DelaySampler::new(cfg),
            queue: VecDeque::new(),
            last_delivery: 0,
        }
    }

    /// Enqueues `msg` sent at `now_ms`; returns its delivery time.
    pub fn send(&mut self, now_ms: u64, msg: T) -> u64 {
        let at = (now_ms + self.sampler.next_delay_ms()).max(self.last_delivery);
        self.last_delivery = at;
        self.queue.push_back((at, msg));
        at
    }

    /// Removes and returns everything due at or before `now_ms`, in send order.
    pub fn deliver(&mut self, now_ms: u64) -> Vec<T> {
        let mut out = Vec::new();
        while self.queue.front().is_some_and(|(at, _)| *at <= now_ms) {
            out.push(self.queue.pop_front().expect("front checked").1);
        }
        out
    }

    /// Pops the next message regardless of time, with its delivery time.
    pub fn pop_next(&mut self) -> Option<(u64, T)> {
        self.queue.pop_front()
    }

    pub fn next_delivery(&self) -> Option<u64> {
        self.queue.front().map(|(at, _)| *at)
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }
}
