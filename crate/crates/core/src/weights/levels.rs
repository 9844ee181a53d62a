//! Level sets `Q^(k) = { phi > mu_k }` of the general weight, used to
//! localize the lateral Cauchy problem.

use super::{SpatialProfile, WeightSpec};
use crate::error::{invalid, Result};
use crate::grid::GridSpec;
use crate::time::TimeGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetSpec {
    pub n_level: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub beta: f64,
    pub t0: f64,
    pub d_sup: f64,
    /// `mu_1 < mu_2 < mu_3 < mu_4`
    pub mu: [f64; 4],
}

impl LevelSetSpec {
    /// Validates `β ε² < ‖d‖_∞ < 2 β ε²` and `n_level > 1`.
    pub fn new(d_sup: f64, lambda: f64, beta: f64, epsilon: f64, n_level: usize, t0: f64) -> Result<Self> {
        if n_level < 2 {
            return Err(invalid(format!("level count must exceed 1, got {n_level}")));
        }
        if !(epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        let lo = beta * epsilon * epsilon;
        if !(lo < d_sup && d_sup < 2.0 * lo) {
            return Err(invalid(format!(
                "need beta*eps^2 < ||d|| < 2*beta*eps^2, got {lo} < {d_sup} < {}",
                2.0 * lo
            )));
        }
        let mut spec = LevelSetSpec {
            n_level,
            epsilon,
            lambda,
            beta,
            t0,
            d_sup,
            mu: [0.0; 4],
        };
        for k in 1..=4 {
            spec.mu[k - 1] = spec.mu_k(k);
        }
        Ok(spec)
    }

    /// `mu_k = exp(λ (k ‖d‖ / N - β ε² / N))` for any `k`.
    pub fn mu_k(&self, k: usize) -> f64 {
        let nl = self.n_level as f64;
        (self.lambda * (k as f64 * self.d_sup / nl - self.beta * self.epsilon * self.epsilon / nl)).exp()
    }

    /// The band of `beta` admitted for a given `‖d‖` and `ε`; its midpoint is the default.
    pub fn beta_band(d_sup: f64, epsilon: f64) -> (f64, f64) {
        let e2 = epsilon * epsilon;
        (d_sup / (2.0 * e2), d_sup / e2)
    }

    /// Half-width `ε / sqrt(N)` of the time window guaranteed inside `Q^(4)`.
    pub fn window_half_width(&self) -> f64 {
        self.epsilon / (self.n_level as f64).sqrt()
    }
}

/// Membership masks of `Q^(1..4)` on the closed mesh at every time level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMasks {
    pub grid: GridSpec,
    pub time: TimeGrid,
    masks: [Vec<bool>; 4],
}

impl LevelMasks {
    pub fn contains(&self, k: usize, n: usize, i: usize) -> bool {
        self.masks[k - 1][n * self.grid.len() + i]
    }

    pub fn count(&self, k: usize) -> usize {
        self.masks[k - 1].iter().filter(|&&b| b).count()
    }

    /// `Q^(k+1) ⊆ Q^(k)` for `k = 1..3`.
    pub fn is_nested(&self) -> bool {
        (0..3).all(|k| {
            self.masks[k + 1]
                .iter()
                .zip(&self.masks[k])
                .all(|(&inner, &outer)| !inner || outer)
        })
    }

    /// Checks that every node of `G_0 = (x_left, L]` at every time level
    /// within `ε / sqrt(N)` of `t0` lies in `Q^(4)`.
    pub fn check_inclusion(&self, spec: &LevelSetSpec, x_left: f64) -> InclusionReport {
        let half = spec.window_half_width();
        let mut checked = 0;
        let mut violations = Vec::new();
        for n in 0..self.time.levels() {
            if (self.time.time(n) - spec.t0).abs() >= half {
                continue;
            }
            for i in 1..self.grid.len() {
                if self.grid.node(i) > x_left {
                    checked += 1;
                    if !self.contains(4, n, i) {
                        violations.push((n, i));
                    }
                }
            }
        }
        InclusionReport {
            holds: violations.is_empty(),
            checked,
            violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub holds: bool,
    pub checked: usize,
    /// `(time level, node)` pairs outside `Q^(4)`.
    pub violations: Vec<(usize, usize)>,
}

/// Builds the level spec and tabulates the four masks.
#[allow(clippy::too_many_arguments)]
pub fn level_sets(
    profile: &SpatialProfile,
    lambda: f64,
    beta: f64,
    epsilon: f64,
    n_level: usize,
    t0: f64,
    grid: &GridSpec,
    time: &TimeGrid,
) -> Result<(LevelSetSpec, LevelMasks)> {
    let spec = LevelSetSpec::new(profile.sup_norm, lambda, beta, epsilon, n_level, t0)?;
    let w = WeightSpec::general(profile.clone(), t0, beta, lambda.max(1.0), 0.0);
    let size = grid.len() * time.levels();
    let mut masks: [Vec<bool>; 4] = std::array::from_fn(|_| Vec::with_capacity(size));
    for n in 0..time.levels() {
        let t = time.time(n);
        for i in 0..grid.len() {
            let phi = (lambda * w.psi(grid, i, t)).exp();
            for (k, m) in masks.iter_mut().enumerate() {
                m.push(phi > spec.mu[k]);
            }
        }
    }
    Ok((
        spec,
        LevelMasks {
            grid: *grid,
            time: *time,
            masks,
        },
    ))
}

/// Smallest level count `N > 1` with `d > 4 ‖d‖ / N` at every node of
/// `(x_left, L]`.
pub fn minimal_level_count(profile: &SpatialProfile, grid: &GridSpec, x_left: f64) -> Result<usize> {
    let d_min = (1..grid.len())
        .filter(|&i| grid.node(i) > x_left)
        .map(|i| profile.values[i])
        .fold(f64::INFINITY, f64::min);
    if !d_min.is_finite() {
        return Err(invalid(format!("no mesh node lies in ({x_left}, L]")));
    }
    if d_min <= 0.0 {
        return Err(invalid("profile must be positive on the observation region"));
    }
    Ok(((4.0 * profile.sup_norm / d_min).floor() as usize + 1).max(2))
}
