use super::WeightSpec;
use crate::error::Result;
use crate::grid::GridSpec;
use crate::time::TimeGrid;

/// Maximum deviations of the discrete weight derivatives from their
/// leading-order symbols, over interior nodes and all time levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionResiduals {
    /// `max |theta D_h r + s λ phi psi_x|`
    pub res1: f64,
    /// `max |theta Δ_h r - (s²λ² phi² psi_x² - sλ² phi psi_x² - sλ phi psi_xx)|`
    pub res2: f64,
}

/// `theta * r(x_{i±1})` is `exp(-s (phi_{i±1} - phi_i))`; both differences are
/// built from `expm1` so nothing overflows and small increments keep their
/// relative accuracy.
pub fn expansion_residuals(
    w: &WeightSpec,
    grid: &GridSpec,
    time: &TimeGrid,
) -> Result<ExpansionResiduals> {
    w.validate(grid, time)?;
    let (s, lambda, h) = (w.s, w.lambda, grid.h());
    let mut res1 = 0.0_f64;
    let mut res2 = 0.0_f64;
    for n in 0..time.levels() {
        let t = time.time(n);
        for i in 1..=grid.n() {
            let phi = w.phi(grid, i, t);
            let dphi_plus = phi * (lambda * w.psi_increment(grid, i, i + 1)).exp_m1();
            let dphi_minus = phi * (lambda * w.psi_increment(grid, i, i - 1)).exp_m1();
            let em_plus = (-s * dphi_plus).exp_m1();
            let em_minus = (-s * dphi_minus).exp_m1();
            let theta_dr = (em_plus - em_minus) / (2.0 * h);
            let theta_lap_r = (em_plus + em_minus) / (h * h);

            let px = w.psi_x(grid, i);
            let pxx = w.psi_xx(grid, i);
            let f1 = phi * px;
            let f2 = phi * phi * px * px;
            let f3 = phi * px * px;
            let f4 = phi * pxx;
            res1 = res1.max((theta_dr + s * lambda * f1).abs());
            let symbol = s * s * lambda * lambda * f2 - s * lambda * lambda * f3 - s * lambda * f4;
            res2 = res2.max((theta_lap_r - symbol).abs());
        }
    }
    Ok(ExpansionResiduals { res1, res2 })
}
