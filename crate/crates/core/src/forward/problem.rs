use crate::error::{invalid, Result};
use crate::grid::{DiscreteField, GridSpec};
use crate::time::{SpaceTimeData, TimeGrid};

/// Data of the semi-discrete system
///
/// ```text
/// dy - Δ_h y dt = (a y + b D_h⁺y + f) dt + (c y + g) dB   on interior nodes
/// y_0 = γ_1(t),  y_{N+1} = γ_2(t),  y(0) = y⁰
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SpdeProblem {
    pub grid: GridSpec,
    pub time: TimeGrid,
    pub a: SpaceTimeData,
    pub b: SpaceTimeData,
    pub c: SpaceTimeData,
    pub f: SpaceTimeData,
    pub g: SpaceTimeData,
    /// Boundary values at `x_0`, one per time level; `None` means zero.
    pub gamma_left: Option<Vec<f64>>,
    /// Boundary values at `x_{N+1}`, one per time level; `None` means zero.
    pub gamma_right: Option<Vec<f64>>,
    pub initial: DiscreteField,
}

impl SpdeProblem {
    /// The zero problem: all coefficients, sources and data vanish.
    pub fn new(grid: GridSpec, time: TimeGrid) -> Self {
        SpdeProblem {
            grid,
            time,
            a: SpaceTimeData::Zero,
            b: SpaceTimeData::Zero,
            c: SpaceTimeData::Zero,
            f: SpaceTimeData::Zero,
            g: SpaceTimeData::Zero,
            gamma_left: None,
            gamma_right: None,
            initial: DiscreteField::zeros(grid),
        }
    }

    pub fn with_initial(mut self, initial: DiscreteField) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_drift(mut self, a: SpaceTimeData, b: SpaceTimeData) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn with_noise_coefficient(mut self, c: SpaceTimeData) -> Self {
        self.c = c;
        self
    }

    pub fn with_sources(mut self, f: SpaceTimeData, g: SpaceTimeData) -> Self {
        self.f = f;
        self.g = g;
        self
    }

    pub fn with_boundary(mut self, left: Option<Vec<f64>>, right: Option<Vec<f64>>) -> Self {
        self.gamma_left = left;
        self.gamma_right = right;
        self
    }

    pub fn gamma_left_at(&self, n: usize) -> f64 {
        self.gamma_left.as_ref().map_or(0.0, |g| g[n])
    }

    pub fn gamma_right_at(&self, n: usize) -> f64 {
        self.gamma_right.as_ref().map_or(0.0, |g| g[n])
    }

    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("a", &self.a), ("b", &self.b), ("c", &self.c), ("f", &self.f), ("g", &self.g)] {
            d.validate(name, &self.grid, &self.time)?;
        }
        if self.initial.grid() != &self.grid {
            return Err(invalid("initial data lives on a different grid"));
        }
        for (name, series) in [("gamma_left", &self.gamma_left), ("gamma_right", &self.gamma_right)] {
            if let Some(s) = series {
                if s.len() != self.time.levels() {
                    return Err(invalid(format!(
                        "{name}: expected {} values, got {}",
                        self.time.levels(),
                        s.len()
                    )));
                }
                if s.iter().any(|v| !v.is_finite()) {
                    return Err(invalid(format!("{name}: non-finite value")));
                }
            }
        }
        let initial_zero = self.initial.values().iter().all(|&v| v == 0.0);
        if initial_zero && (self.gamma_left_at(0) != 0.0 || self.gamma_right_at(0) != 0.0) {
            return Err(invalid(
                "boundary data must vanish at t = 0 when the initial data is zero",
            ));
        }
        Ok(())
    }
}
