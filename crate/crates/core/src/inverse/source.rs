use crate::error::{invalid, Result};
use crate::grid::{DiscreteField, GridSpec};
use crate::time::{SpaceTimeData, TimeGrid};

/// A source `g(x, t) = r(t) R(x)` with a known spatial factor bounded away
/// from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableSource {
    /// `r` at every time level.
    pub r: Vec<f64>,
    pub space: DiscreteField,
    /// `min_i |R_i|`
    pub r0: f64,
    /// `max_i |(D_h⁺R)_i|`
    pub r1: f64,
}

impl SeparableSource {
    /// `R1 / R0`, a valid constant in `|D_h⁺g̃| ≤ C |g̃|` for any pair sharing `R`.
    pub fn gradient_constant(&self) -> f64 {
        self.r1 / self.r0
    }

    pub fn to_data(&self) -> SpaceTimeData {
        SpaceTimeData::Separable {
            time: self.r.clone(),
            space: self.space.values().to_vec(),
        }
    }

    /// Same spatial factor with `r` replaced.
    pub fn with_time_profile(&self, r: Vec<f64>) -> Self {
        SeparableSource { r, ..self.clone() }
    }
}

pub fn make_separable_source(r: Vec<f64>, space: DiscreteField) -> Result<SeparableSource> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(invalid("time profile has a non-finite value"));
    }
    let r0 = space.values().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if !(r0 > 0.0) {
        return Err(invalid("spatial factor must not vanish at any node (R0 > 0)"));
    }
    let r1 = space.diff_plus().max_abs();
    Ok(SeparableSource { r, space, r0, r1 })
}

/// Outcome of the scan for `|D_h⁺g̃_i| ≤ C |g̃_i|`, `i = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientDomination {
    pub holds: bool,
    /// Largest `|D_h⁺g̃| / |g̃|` over points with a nonzero denominator.
    pub best_constant: f64,
    /// `(time level, node)` where `g̃ = 0` but `D_h⁺g̃ ≠ 0`.
    pub violations: Vec<(usize, usize)>,
}

/// Scans every time level of `g1 - g2`.
pub fn check_gradient_domination(g1: &SpaceTimeData, g2: &SpaceTimeData, grid: &GridSpec, time: &TimeGrid) -> GradientDomination {
    let h = grid.h();
    let mut best: f64 = 0.0;
    let mut violations = Vec::new();
    for n in 0..time.levels() {
        for i in 0..=grid.n() {
            let gap = g1.value(n, i) - g2.value(n, i);
            let next = g1.value(n, i + 1) - g2.value(n, i + 1);
            let d = ((next - gap) / h).abs();
            if gap != 0.0 {
                best = best.max(d / gap.abs());
            } else if d != 0.0 {
                violations.push((n, i));
            }
        }
    }
    GradientDomination {
        holds: violations.is_empty(),
        best_constant: best,
        violations,
    }
}
