//! Brownian increments from a counter-based generator.
//!
//! Increment `n` of a path with seed `s` is
//! `sqrt(dt) * Φ⁻¹(u)`, where `u = (splitmix64(s + (n+1)·γ) >> 11 + 1/2) · 2⁻⁵³`,
//! `γ = 0x9E3779B97F4A7C15` and `Φ⁻¹` is the standard normal quantile.
//! Every increment depends only on `(seed, n)`, so paths are reproducible
//! and can be regenerated piecewise.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::time::TimeGrid;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform in the open interval `(0, 1)` for counter `n` of stream `seed`.
pub fn uniform_at(seed: u64, n: u64) -> f64 {
    let bits = mix64(seed.wrapping_add(n.wrapping_add(1).wrapping_mul(GOLDEN))) >> 11;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Seed of path `index` under `master_seed`.
pub fn path_seed(master_seed: u64, index: u64) -> u64 {
    mix64(mix64(master_seed ^ 0x5851_F42D_4C95_7F2D).wrapping_add(index.wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub seed: u64,
    pub time: TimeGrid,
    /// `ΔB_n = B(t_{n+1}) - B(t_n)`, `n = 0..K`.
    pub increments: Vec<f64>,
}

impl SamplePath {
    /// A path with every increment zero; turns the stochastic solver into the
    /// deterministic one.
    pub fn frozen(time: TimeGrid) -> Self {
        SamplePath {
            seed: 0,
            time,
            increments: vec![0.0; time.steps()],
        }
    }

    /// `B(T)`
    pub fn terminal_value(&self) -> f64 {
        self.increments.iter().sum()
    }

    /// `B(t_n)` for every level, starting from `B(0) = 0`.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.increments.len() + 1);
        let mut b = 0.0;
        out.push(b);
        for db in &self.increments {
            b += db;
            out.push(b);
        }
        out
    }
}

/// Draws `steps` Brownian increments on `[0, horizon]`.
pub fn sample_brownian(horizon: f64, steps: usize, seed: u64) -> Result<SamplePath> {
    let time = TimeGrid::new(horizon, steps)?;
    Ok(sample_on(time, seed))
}

pub fn sample_on(time: TimeGrid, seed: u64) -> SamplePath {
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let scale = time.dt().sqrt();
    let increments = (0..time.steps() as u64)
        .map(|n| scale * std_normal.inverse_cdf(uniform_at(seed, n)))
        .collect();
    SamplePath {
        seed,
        time,
        increments,
    }
}
