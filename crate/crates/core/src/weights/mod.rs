//! Carleman weight functions.
//!
//! `psi` is either the regular profile `|x - x*|² - β (t - t0)²` or the
//! general profile `d(x) - β (t - t0)²`; then `phi = exp(λ psi)`,
//! `theta = exp(s phi)` and `r = 1 / theta`.
//!
//! `theta` overflows quickly, so the weighted integrals elsewhere in the
//! crate work with `ln theta = s phi` and only exponentiate after shifting.

mod cutoff;
mod expansion;
mod levels;

pub use cutoff::{build_cutoff_chi, build_cutoff_chitilde, smoothstep, smoothstep_derivative, CutoffProfile};
pub use expansion::{expansion_residuals, ExpansionResiduals};
pub use levels::{level_sets, minimal_level_count, InclusionReport, LevelMasks, LevelSetSpec};

use crate::error::{invalid, LabError, Result};
use crate::grid::GridSpec;
use crate::time::TimeGrid;

/// Largest argument of `exp` that stays finite in `f64`.
pub const LN_MAX: f64 = 709.782712893384;

/// A spatial profile `d` sampled on the closed mesh with its first two
/// derivatives, plus its sup-norm over the extended interval it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialProfile {
    pub values: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub sup_norm: f64,
}

impl SpatialProfile {
    /// `d(x) = x ((L + δ) - x)` on the extended interval `(0, L + δ)`.
    pub fn typical(grid: &GridSpec, delta: f64) -> Self {
        let end = grid.length() + delta;
        let xs = grid.nodes();
        SpatialProfile {
            values: xs.iter().map(|x| x * (end - x)).collect(),
            first: xs.iter().map(|x| end - 2.0 * x).collect(),
            second: vec![-2.0; xs.len()],
            sup_norm: end * end / 4.0,
        }
    }

    /// The default profile, `δ = 2L`.
    pub fn default_for(grid: &GridSpec) -> Self {
        Self::typical(grid, 2.0 * grid.length())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Regular { x_star: f64, t0: f64, beta: f64 },
    General { profile: SpatialProfile, t0: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub lambda: f64,
    pub s: f64,
}

impl WeightSpec {
    pub fn regular(x_star: f64, t0: f64, beta: f64, lambda: f64, s: f64) -> Self {
        WeightSpec {
            kind: WeightKind::Regular { x_star, t0, beta },
            lambda,
            s,
        }
    }

    pub fn general(profile: SpatialProfile, t0: f64, beta: f64, lambda: f64, s: f64) -> Self {
        WeightSpec {
            kind: WeightKind::General { profile, t0, beta },
            lambda,
            s,
        }
    }

    pub fn with_s(&self, s: f64) -> Self {
        WeightSpec { s, ..self.clone() }
    }

    pub fn t0(&self) -> f64 {
        match self.kind {
            WeightKind::Regular { t0, .. } | WeightKind::General { t0, .. } => t0,
        }
    }

    pub fn beta(&self) -> f64 {
        match self.kind {
            WeightKind::Regular { beta, .. } | WeightKind::General { beta, .. } => beta,
        }
    }

    /// Checks the parameter ranges and the nonvanishing spatial gradient.
    pub fn validate(&self, grid: &GridSpec, time: &TimeGrid) -> Result<()> {
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return Err(invalid(format!("lambda must be >= 1, got {}", self.lambda)));
        }
        if !(self.s >= 0.0 && self.s.is_finite()) {
            return Err(invalid(format!("s must be >= 0, got {}", self.s)));
        }
        let (t0, beta) = (self.t0(), self.beta());
        if !(t0 > 0.0 && t0 < time.horizon()) {
            return Err(invalid(format!("t0 = {t0} must lie in (0, {})", time.horizon())));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(invalid(format!("beta must be >= 0, got {beta}")));
        }
        match &self.kind {
            WeightKind::Regular { x_star, .. } => {
                if (0.0..=grid.length()).contains(x_star) {
                    return Err(LabError::Precondition(format!(
                        "x* = {x_star} lies in [0, {}]; the spatial gradient of psi vanishes there",
                        grid.length()
                    )));
                }
            }
            WeightKind::General { profile, .. } => {
                let n = grid.len();
                if profile.values.len() != n || profile.first.len() != n || profile.second.len() != n {
                    return Err(invalid(format!("profile must be sampled on {n} nodes")));
                }
                if let Some(i) = (1..=grid.n()).find(|&i| profile.first[i] == 0.0) {
                    return Err(LabError::Precondition(format!(
                        "profile derivative vanishes at interior node {i}"
                    )));
                }
                let signs_differ = profile.first[1..=grid.n()]
                    .windows(2)
                    .any(|w| w[0].signum() != w[1].signum());
                if signs_differ {
                    return Err(LabError::Precondition(
                        "profile derivative changes sign inside the domain".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn psi(&self, grid: &GridSpec, i: usize, t: f64) -> f64 {
        match &self.kind {
            WeightKind::Regular { x_star, t0, beta } => {
                regular_psi(grid.node(i), t, *x_star, *t0, *beta)
            }
            WeightKind::General { profile, t0, beta } => {
                profile.values[i] - beta * (t - t0) * (t - t0)
            }
        }
    }

    /// `psi(x_j, t) - psi(x_i, t)`, formed without cancellation for the
    /// regular profile.
    pub fn psi_increment(&self, grid: &GridSpec, i: usize, j: usize) -> f64 {
        match &self.kind {
            WeightKind::Regular { x_star, .. } => {
                let (xi, xj) = (grid.node(i), grid.node(j));
                (xj - xi) * (xj + xi - 2.0 * x_star)
            }
            WeightKind::General { profile, .. } => profile.values[j] - profile.values[i],
        }
    }

    pub fn psi_x(&self, grid: &GridSpec, i: usize) -> f64 {
        match &self.kind {
            WeightKind::Regular { x_star, .. } => 2.0 * (grid.node(i) - x_star),
            WeightKind::General { profile, .. } => profile.first[i],
        }
    }

    pub fn psi_xx(&self, _grid: &GridSpec, i: usize) -> f64 {
        match &self.kind {
            WeightKind::Regular { .. } => 2.0,
            WeightKind::General { profile, .. } => profile.second[i],
        }
    }

    pub fn psi_t(&self, t: f64) -> f64 {
        -2.0 * self.beta() * (t - self.t0())
    }

    pub fn phi(&self, grid: &GridSpec, i: usize, t: f64) -> f64 {
        (self.lambda * self.psi(grid, i, t)).exp()
    }

    /// `ln theta = s phi`.
    pub fn ln_theta(&self, grid: &GridSpec, i: usize, t: f64) -> f64 {
        self.s * self.phi(grid, i, t)
    }
}

/// `|x - x*|² - β (t - t0)²` at an arbitrary point.
pub fn regular_psi(x: f64, t: f64, x_star: f64, t0: f64, beta: f64) -> f64 {
    (x - x_star) * (x - x_star) - beta * (t - t0) * (t - t0)
}

/// Weight functions tabulated on the space-time grid, level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTables {
    pub grid: GridSpec,
    pub time: TimeGrid,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub r: Vec<f64>,
}

impl WeightTables {
    pub fn index(&self, n: usize, i: usize) -> usize {
        n * self.grid.len() + i
    }
}

/// Largest `max phi` over the grid; `s` must stay below `LN_MAX / max_phi`
/// for `theta` itself to be finite.
pub fn max_phi(w: &WeightSpec, grid: &GridSpec, time: &TimeGrid) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for n in 0..time.levels() {
        let t = time.time(n);
        for i in 0..grid.len() {
            m = m.max(w.phi(grid, i, t));
        }
    }
    m
}

/// The largest `s` for which `theta^2 = exp(2 s phi)` is representable
/// without log-space accumulation.
pub fn max_direct_s(w: &WeightSpec, grid: &GridSpec, time: &TimeGrid) -> f64 {
    LN_MAX / (2.0 * max_phi(w, grid, time))
}

/// Tabulates `psi, phi, theta, r`. Fails with a range error when
/// `exp(s phi)` is not representable.
pub fn eval_weights(w: &WeightSpec, grid: &GridSpec, time: &TimeGrid) -> Result<WeightTables> {
    w.validate(grid, time)?;
    let size = grid.len() * time.levels();
    let (mut psi, mut phi, mut theta, mut r) = (
        Vec::with_capacity(size),
        Vec::with_capacity(size),
        Vec::with_capacity(size),
        Vec::with_capacity(size),
    );
    let mut max_psi = f64::NEG_INFINITY;
    for n in 0..time.levels() {
        let t = time.time(n);
        for i in 0..grid.len() {
            let p = w.psi(grid, i, t);
            max_psi = max_psi.max(p);
            let f = (w.lambda * p).exp();
            psi.push(p);
            phi.push(f);
            let ln_theta = w.s * f;
            theta.push(ln_theta.exp());
            r.push((-ln_theta).exp());
        }
    }
    if theta.iter().any(|v| !v.is_finite()) || phi.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Range(format!(
            "exp(s phi) overflows for s = {}, lambda = {}, max psi = {max_psi}",
            w.s, w.lambda
        )));
    }
    Ok(WeightTables {
        grid: *grid,
        time: *time,
        psi,
        phi,
        theta,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (GridSpec, TimeGrid) {
        (GridSpec::new(1.0, 15).unwrap(), TimeGrid::new(1.0, 8).unwrap())
    }

    #[test]
    fn regular_at_center() {
        let (x_star, t0, lambda, s_par) = (-0.5, 0.5, 2.0, 3.0);
        let psi = regular_psi(x_star, t0, x_star, t0, 1.0);
        assert_eq!(psi, 0.0);
        let phi = (lambda * psi).exp();
        assert_eq!(phi, 1.0);
        assert_eq!((s_par * phi).exp(), 3.0_f64.exp());

        let (g, t) = setup();
        let w = WeightSpec::regular(x_star, t0, 1.0, lambda, s_par);
        assert_eq!(w.psi(&g, 0, t0), 0.25);
        assert!(eval_weights(&w, &g, &t).is_ok());
    }

    #[test]
    fn zero_beta_is_time_independent() {
        let (g, t) = setup();
        let w = WeightSpec::regular(-0.2, 0.5, 0.0, 1.0, 1.0);
        let tab = eval_weights(&w, &g, &t).unwrap();
        for n in 0..t.levels() {
            for i in 0..g.len() {
                let x = g.node(i);
                assert_eq!(tab.psi[tab.index(n, i)], (x + 0.2) * (x + 0.2));
            }
        }
    }

    #[test]
    fn general_typical_value() {
        let g = GridSpec::new(1.0, 3).unwrap();
        let t = TimeGrid::new(1.0, 4).unwrap();
        let w = WeightSpec::general(SpatialProfile::default_for(&g), 0.5, 1.0, 1.0, 1.0);
        // node 2 is x = 0.5: 0.5 * (3 - 0.5) = 1.25
        assert_eq!(w.psi(&g, 2, 0.5), 1.25);
        assert!(w.validate(&g, &t).is_ok());
    }

    #[test]
    fn theta_times_r_is_one() {
        let (g, t) = setup();
        let w = WeightSpec::regular(-0.3, 0.4, 2.0, 2.0, 4.0);
        let tab = eval_weights(&w, &g, &t).unwrap();
        for (th, r) in tab.theta.iter().zip(&tab.r) {
            assert!((th * r - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn gradient_sign_is_uniform() {
        let (g, _) = setup();
        let left = WeightSpec::regular(-0.1, 0.5, 1.0, 1.0, 1.0);
        let right = WeightSpec::regular(1.1, 0.5, 1.0, 1.0, 1.0);
        for i in 0..g.len() {
            assert!(left.psi_x(&g, i) > 0.0);
            assert!(right.psi_x(&g, i) < 0.0);
        }
    }

    #[test]
    fn invariants_enforced() {
        let (g, t) = setup();
        let inside = WeightSpec::regular(0.5, 0.5, 1.0, 1.0, 1.0);
        assert!(matches!(inside.validate(&g, &t), Err(LabError::Precondition(_))));
        let flat = SpatialProfile {
            values: vec![1.0; g.len()],
            first: vec![0.0; g.len()],
            second: vec![0.0; g.len()],
            sup_norm: 1.0,
        };
        let w = WeightSpec::general(flat, 0.5, 1.0, 1.0, 1.0);
        assert!(matches!(w.validate(&g, &t), Err(LabError::Precondition(_))));
        let small_lambda = WeightSpec::regular(-0.5, 0.5, 1.0, 0.5, 1.0);
        assert!(small_lambda.validate(&g, &t).is_err());
        let bad_t0 = WeightSpec::regular(-0.5, 1.5, 1.0, 1.0, 1.0);
        assert!(bad_t0.validate(&g, &t).is_err());
    }

    #[test]
    fn overflow_is_a_range_error() {
        let (g, t) = setup();
        let w = WeightSpec::regular(-1.0, 0.5, 1.0, 3.0, 50.0);
        match eval_weights(&w, &g, &t) {
            Err(LabError::Range(msg)) => assert!(msg.contains("s = 50")),
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(max_direct_s(&w, &g, &t) < 50.0);
    }
}
