use crate::error::{invalid, Result};
use crate::forward::boundary_flux;
use crate::grid::GridSpec;
use crate::time::{h1_time_norm, l2_time_norm, SpaceTimeField, TimeGrid};

/// Lateral data at the right end: `ξ = y_{N+1}` and `η = D_h⁻y_{N+1}`, one
/// series per path, plus ensemble norms.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub time: TimeGrid,
    pub xi: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
    /// `sqrt(E ‖ξ‖²_{H¹(0,T)})`
    pub xi_norm: f64,
    /// `sqrt(E ‖η‖²_{L²(0,T)})`
    pub eta_norm: f64,
}

impl CauchyData {
    /// `‖ξ‖ + ‖η‖`
    pub fn data_norm(&self) -> f64 {
        self.xi_norm + self.eta_norm
    }

    pub fn paths(&self) -> usize {
        self.xi.len()
    }

    /// Builds from per-path series and checks their lengths.
    pub fn from_series(time: TimeGrid, xi: Vec<Vec<f64>>, eta: Vec<Vec<f64>>) -> Result<Self> {
        if xi.is_empty() || xi.len() != eta.len() {
            return Err(invalid("need the same positive number of xi and eta series"));
        }
        if xi.iter().chain(&eta).any(|s| s.len() != time.levels()) {
            return Err(invalid(format!("every series needs {} values", time.levels())));
        }
        let m = xi.len() as f64;
        let dt = time.dt();
        let xi_sq: f64 = xi.iter().map(|s| h1_time_norm(s, dt).powi(2)).sum::<f64>() / m;
        let eta_sq: f64 = eta.iter().map(|s| l2_time_norm(s, dt).powi(2)).sum::<f64>() / m;
        Ok(CauchyData {
            time,
            xi,
            eta,
            xi_norm: xi_sq.sqrt(),
            eta_norm: eta_sq.sqrt(),
        })
    }
}

/// `(ξ, η)` of one solution.
pub fn lateral_trace(y: &SpaceTimeField) -> (Vec<f64>, Vec<f64>) {
    let last = y.grid().n() + 1;
    let xi = (0..y.time().levels()).map(|n| y.get(n, last)).collect();
    (xi, boundary_flux(y))
}

pub fn generate_cauchy_data(solutions: &[SpaceTimeField]) -> Result<CauchyData> {
    let first = solutions.first().ok_or_else(|| invalid("empty solution ensemble"))?;
    let (xi, eta) = solutions.iter().map(lateral_trace).unzip();
    CauchyData::from_series(*first.time(), xi, eta)
}

/// `G₀ × (ε, T − ε)` with `G₀ = (x_left, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRegion {
    pub x_left: f64,
    pub epsilon: f64,
}

impl ObservationRegion {
    pub fn new(x_left: f64, epsilon: f64) -> Self {
        ObservationRegion { x_left, epsilon }
    }

    /// The whole space-time cylinder; its norm is the global one.
    pub fn whole() -> Self {
        ObservationRegion {
            x_left: 0.0,
            epsilon: 0.0,
        }
    }

    /// Smallest `N` with a mesh node in `(x_left, L)`.
    pub fn minimum_n(&self, length: f64) -> usize {
        ((self.x_left / (length - self.x_left)).floor() as usize + 1).max(1)
    }

    pub fn validate(&self, grid: &GridSpec, time: &TimeGrid) -> Result<()> {
        let l = grid.length();
        if !(self.x_left >= 0.0 && self.x_left < l) {
            return Err(invalid(format!("x_left must lie in [0, {l}), got {}", self.x_left)));
        }
        if !(self.epsilon >= 0.0 && 2.0 * self.epsilon < time.horizon()) {
            return Err(invalid(format!("epsilon must lie in [0, T/2), got {}", self.epsilon)));
        }
        if grid.node(grid.n()) <= self.x_left {
            return Err(invalid(format!(
                "no interior node in ({}, {l}]; need N >= {}",
                self.x_left,
                self.minimum_n(l)
            )));
        }
        Ok(())
    }

    /// Interior nodes `i` with `x_i > x_left`.
    pub fn nodes(&self, grid: &GridSpec) -> std::ops::RangeInclusive<usize> {
        let first = (1..=grid.n()).find(|&i| grid.node(i) > self.x_left).unwrap_or(grid.n() + 1);
        first..=grid.n()
    }

    /// Left-rule cells `[t_n, t_{n+1}]` inside `[ε, T − ε]`.
    pub fn levels(&self, time: &TimeGrid) -> std::ops::Range<usize> {
        // tolerance keeps cells whose ends hit ε up to rounding
        let tol = 1e-12 * time.dt();
        let lo = (0..time.steps()).find(|&n| time.time(n) >= self.epsilon - tol).unwrap_or(time.steps());
        let hi = (0..time.steps())
            .rev()
            .find(|&n| time.time(n + 1) <= time.horizon() - self.epsilon + tol)
            .map_or(lo, |n| (n + 1).max(lo));
        lo..hi
    }
}

/// `Σ_n dt ‖y^n‖²_{H²(G_{0,h})}` for one path. Second differences and values
/// run over interior nodes in `G₀`, forward differences over the cells that
/// reach into `G₀`.
pub fn region_norm_sq(y: &SpaceTimeField, region: &ObservationRegion) -> f64 {
    let grid = y.grid();
    let h = grid.h();
    let nodes = region.nodes(grid);
    let (first, last) = (*nodes.start(), *nodes.end());
    let cells = first.saturating_sub(1)..=last;
    let mut total = 0.0;
    for n in region.levels(y.time()) {
        let u = y.level(n);
        let mut s = 0.0;
        for i in nodes.clone() {
            let lap = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            s += lap * lap + u[i] * u[i];
        }
        for i in cells.clone() {
            let d = (u[i + 1] - u[i]) / h;
            s += d * d;
        }
        total += h * s;
    }
    total * y.time().dt()
}

/// `sqrt(E Σ_n dt ‖y^n‖²_{H²(G_{0,h})})` over the observation window.
pub fn interior_norm(solutions: &[SpaceTimeField], region: &ObservationRegion) -> Result<f64> {
    let first = solutions.first().ok_or_else(|| invalid("empty solution ensemble"))?;
    region.validate(first.grid(), first.time())?;
    let sum: f64 = solutions.iter().map(|y| region_norm_sq(y, region)).sum();
    Ok((sum / solutions.len() as f64).sqrt())
}

/// `‖y‖_{L²_F(0,T;H²(G_h))}`
pub fn global_norm(solutions: &[SpaceTimeField]) -> Result<f64> {
    interior_norm(solutions, &ObservationRegion::whole())
}
