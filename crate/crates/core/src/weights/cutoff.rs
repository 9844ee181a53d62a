//! Smooth cut-off profiles built from the quintic smoothstep.

use super::{LevelSetSpec, WeightSpec};
use crate::error::{invalid, Result};
use crate::grid::{DiscreteField, FieldOnMinus, GridSpec, InteriorField};
use crate::time::TimeGrid;

/// `p(σ) = 6σ⁵ - 15σ⁴ + 10σ³`, clamped to `[0, 1]` outside the unit interval.
pub fn smoothstep(sigma: f64) -> f64 {
    let s = sigma.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

pub fn smoothstep_derivative(sigma: f64) -> f64 {
    if !(0.0..=1.0).contains(&sigma) {
        return 0.0;
    }
    30.0 * sigma * sigma * (1.0 - sigma) * (1.0 - sigma)
}

/// A cut-off and its discrete derivatives, one entry per time level
/// (a single level for the purely spatial cut-off).
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile {
    pub values: Vec<DiscreteField>,
    pub diff_plus: Vec<FieldOnMinus>,
    pub diff_center: Vec<InteriorField>,
    pub laplacian: Vec<InteriorField>,
    /// Exact time derivative at every node; empty for the spatial cut-off.
    pub time_derivative: Vec<Vec<f64>>,
}

impl CutoffProfile {
    fn from_levels(values: Vec<DiscreteField>, time_derivative: Vec<Vec<f64>>) -> Self {
        CutoffProfile {
            diff_plus: values.iter().map(DiscreteField::diff_plus).collect(),
            diff_center: values.iter().map(DiscreteField::diff_center).collect(),
            laplacian: values.iter().map(DiscreteField::laplacian).collect(),
            values,
            time_derivative,
        }
    }
}

/// `chi = 0` on `[x_0, x_1]`, `1` on `[x_N, x_{N+1}]`, smoothstep in between.
pub fn build_cutoff_chi(grid: &GridSpec) -> Result<CutoffProfile> {
    if grid.n() < 4 {
        return Err(invalid(format!(
            "spatial cut-off needs at least 4 interior nodes, got {}",
            grid.n()
        )));
    }
    let (a, b) = (grid.node(1), grid.node(grid.n()));
    let values: Vec<f64> = (0..grid.len())
        .map(|i| smoothstep((grid.node(i) - a) / (b - a)))
        .collect();
    let field = DiscreteField::new(*grid, values)?;
    Ok(CutoffProfile::from_levels(vec![field], Vec::new()))
}

/// `chi~ = 1` where `phi > mu_3`, `0` where `phi < mu_2`, smoothstep in `phi`
/// between. `weight` must be the general weight the levels were built from.
pub fn build_cutoff_chitilde(
    levels: &LevelSetSpec,
    weight: &WeightSpec,
    grid: &GridSpec,
    time: &TimeGrid,
) -> Result<CutoffProfile> {
    let (mu2, mu3) = (levels.mu[1], levels.mu[2]);
    if !(mu2 < mu3) {
        return Err(invalid(format!("need mu_2 < mu_3, got {mu2} and {mu3}")));
    }
    let lambda = levels.lambda;
    let mut values = Vec::with_capacity(time.levels());
    let mut dt = Vec::with_capacity(time.levels());
    for n in 0..time.levels() {
        let t = time.time(n);
        let mut level = Vec::with_capacity(grid.len());
        let mut level_dt = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let phi = (lambda * weight.psi(grid, i, t)).exp();
            let sigma = (phi - mu2) / (mu3 - mu2);
            level.push(smoothstep(sigma));
            let dphi_dt = lambda * phi * weight.psi_t(t);
            level_dt.push(smoothstep_derivative(sigma) * dphi_dt / (mu3 - mu2));
        }
        values.push(DiscreteField::new(*grid, level)?);
        dt.push(level_dt);
    }
    Ok(CutoffProfile::from_levels(values, dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{level_sets, SpatialProfile};

    #[test]
    fn smoothstep_shape() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(0.5), 0.5);
        assert_eq!(smoothstep(-3.0), 0.0);
        assert_eq!(smoothstep(7.0), 1.0);
        for k in 0..=100 {
            let s = k as f64 / 100.0;
            assert!((smoothstep(s) + smoothstep(1.0 - s) - 1.0).abs() < 1e-14);
        }
        // derivative against a central difference
        let h = 1e-6;
        for s in [0.1, 0.3, 0.5, 0.77] {
            let fd = (smoothstep(s + h) - smoothstep(s - h)) / (2.0 * h);
            assert!((fd - smoothstep_derivative(s)).abs() < 1e-8);
        }
    }

    #[test]
    fn chi_plateaus() {
        let g = GridSpec::new(1.0, 10).unwrap();
        let c = build_cutoff_chi(&g).unwrap();
        let v = c.values[0].values();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 0.0);
        assert_eq!(v[g.n()], 1.0);
        assert_eq!(v[g.n() + 1], 1.0);
        assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(build_cutoff_chi(&GridSpec::new(1.0, 3).unwrap()).is_err());
    }

    #[test]
    fn chi_laplacian_bounded_under_refinement() {
        let maxes: Vec<f64> = [15, 31, 63, 127]
            .iter()
            .map(|&n| {
                let g = GridSpec::new(1.0, n).unwrap();
                build_cutoff_chi(&g).unwrap().laplacian[0].max_abs()
            })
            .collect();
        // sup p'' = 10/√3 ≈ 5.77, divided by (x_N - x_1)² which grows towards L².
        assert!(maxes.iter().all(|&m| m < 10.0), "{maxes:?}");
        assert!(maxes.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn chitilde_plateaus() {
        let g = GridSpec::new(1.0, 31).unwrap();
        let t = TimeGrid::new(2.0, 40).unwrap();
        let p = SpatialProfile::default_for(&g);
        let (lo, hi) = LevelSetSpec::beta_band(p.sup_norm, 0.5);
        let beta = 0.5 * (lo + hi);
        let (spec, _) = level_sets(&p, 1.0, beta, 0.5, 6, 1.0, &g, &t).unwrap();
        let w = WeightSpec::general(p, 1.0, beta, 1.0, 0.0);
        let c = build_cutoff_chitilde(&spec, &w, &g, &t).unwrap();
        let mut saw_one = false;
        for n in 0..t.levels() {
            for i in 0..g.len() {
                let phi = w.phi(&g, i, t.time(n));
                let v = c.values[n].get(i);
                assert!((0.0..=1.0).contains(&v));
                if phi > spec.mu[2] {
                    assert_eq!(v, 1.0);
                    saw_one = true;
                }
                if phi < spec.mu[1] {
                    assert_eq!(v, 0.0);
                    assert_eq!(c.time_derivative[n][i], 0.0);
                }
            }
        }
        assert!(saw_one);
        // x_0 is never in the support since d(0) = 0.
        assert!(c.values.iter().all(|f| f.get(0) == 0.0));
    }
}
