use crate::error::{invalid, Result};
use crate::forward::Estimate;
use crate::grid::GridSpec;
use crate::time::{h1_time_norm, SpaceTimeData, SpaceTimeField, TimeGrid};
use crate::weights::WeightSpec;

pub const LHS_TERMS: [&str; 4] = ["laplacian", "gradient", "zeroth_order", "noise"];
pub const RHS_TERMS: [&str; 5] = ["drift_source", "noise_gradient", "boundary_flux", "terminal", "boundary_data"];

/// `φ` and the rescaled `θ² e^{-ln_scale}` on every node and time level.
///
/// Every weighted integral is returned as a mantissa relative to
/// `e^{ln_scale}`, where `ln_scale = 2 s max φ`, so nothing overflows.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub grid: GridSpec,
    pub time: TimeGrid,
    pub s: f64,
    pub lambda: f64,
    pub ln_scale: f64,
    phi: Vec<f64>,
    theta_sq: Vec<f64>,
}

impl WeightTable {
    pub fn new(w: &WeightSpec, grid: &GridSpec, time: &TimeGrid) -> Result<Self> {
        w.validate(grid, time)?;
        let mut phi = Vec::with_capacity(grid.len() * time.levels());
        for n in 0..time.levels() {
            for i in 0..grid.len() {
                phi.push(w.phi(grid, i, time.time(n)));
            }
        }
        let phi_max = phi.iter().copied().fold(f64::MIN, f64::max);
        let ln_scale = 2.0 * w.s * phi_max;
        let theta_sq = phi.iter().map(|p| (2.0 * w.s * (p - phi_max)).exp()).collect();
        Ok(WeightTable {
            grid: *grid,
            time: *time,
            s: w.s,
            lambda: w.lambda,
            ln_scale,
            phi,
            theta_sq,
        })
    }

    /// Injects arbitrary `φ` and rescaled `θ²` tables.
    pub fn from_tables(
        grid: GridSpec,
        time: TimeGrid,
        s: f64,
        lambda: f64,
        ln_scale: f64,
        phi: Vec<f64>,
        theta_sq: Vec<f64>,
    ) -> Result<Self> {
        let size = grid.len() * time.levels();
        if phi.len() != size || theta_sq.len() != size {
            return Err(invalid(format!("weight tables need {size} values")));
        }
        Ok(WeightTable {
            grid,
            time,
            s,
            lambda,
            ln_scale,
            phi,
            theta_sq,
        })
    }

    pub fn phi(&self, n: usize, i: usize) -> f64 {
        self.phi[n * self.grid.len() + i]
    }

    pub fn theta_sq(&self, n: usize, i: usize) -> f64 {
        self.theta_sq[n * self.grid.len() + i]
    }

    /// `max_i θ(x_i, T) / max θ`
    pub fn terminal_suppression(&self) -> f64 {
        let k = self.time.steps();
        (0..self.grid.len())
            .map(|i| self.theta_sq(k, i).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Boundary data entering the non-homogeneous estimate.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundarySeries<'a> {
    pub left: Option<&'a [f64]>,
    pub right: Option<&'a [f64]>,
}

/// The four left-side integrals of one path, as mantissas.
pub fn path_lhs(y: &SpaceTimeField, g: &SpaceTimeData, w: &WeightTable) -> [f64; 4] {
    let grid = &w.grid;
    let (nn, h) = (grid.n(), grid.h());
    let dt = w.time.dt();
    let (s, l) = (w.s, w.lambda);
    let mut out = [0.0; 4];
    for n in 0..w.time.steps() {
        let v = y.level(n);
        let mut acc = [0.0; 4];
        for i in 0..=nn {
            let (phi, th) = (w.phi(n, i), w.theta_sq(n, i));
            let dp = (v[i + 1] - v[i]) / h;
            acc[1] += s * l * l * phi * th * dp * dp;
            let gv = g.value(n, i);
            acc[3] += s * l * l * phi * th * gv * gv;
            if i >= 1 {
                let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
                acc[0] += th / (s * phi) * lap * lap;
                acc[2] += s.powi(3) * l.powi(4) * phi.powi(3) * th * v[i] * v[i];
            }
        }
        for (o, a) in out.iter_mut().zip(acc) {
            *o += dt * h * a;
        }
    }
    out
}

/// The five right-side integrals of one path, as mantissas. `c_lambda`
/// replaces the unknown constant in the exponential prefactors.
pub fn path_rhs(
    y: &SpaceTimeField,
    f: &SpaceTimeData,
    g: &SpaceTimeData,
    w: &WeightTable,
    boundary: BoundarySeries<'_>,
    c_lambda: f64,
) -> [f64; 5] {
    let grid = &w.grid;
    let (nn, h) = (grid.n(), grid.h());
    let dt = w.time.dt();
    let (s, l) = (w.s, w.lambda);
    let mut out = [0.0; 5];
    for n in 0..w.time.steps() {
        let v = y.level(n);
        let (mut src, mut dg) = (0.0, 0.0);
        for i in 0..=nn {
            let (phi, th) = (w.phi(n, i), w.theta_sq(n, i));
            let d = (g.value(n, i + 1) - g.value(n, i)) / h;
            dg += s * phi * th * d * d;
            if i >= 1 {
                let fv = f.value(n, i);
                src += th * fv * fv;
            }
        }
        out[0] += dt * h * src;
        out[1] += dt * h * dg;
        let flux = (v[nn + 1] - v[nn]) / h;
        out[2] += dt * s * l * w.phi(n, nn + 1) * w.theta_sq(n, nn + 1) * flux * flux;
    }
    let prefactor = (c_lambda * s - w.ln_scale).exp();
    let last = y.level(w.time.steps());
    let terminal: f64 = h * last[1..=nn].iter().map(|v| v * v).sum::<f64>();
    out[3] = s * s * prefactor * terminal;
    let data: f64 = [boundary.left, boundary.right]
        .iter()
        .flatten()
        .fold(0.0, |acc, series| acc + h1_time_norm(series, dt).powi(2));
    out[4] = s.powi(3) * prefactor * data;
    out
}

/// Per-path left and right sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTerms {
    pub lhs: [f64; 4],
    pub rhs: [f64; 5],
}

/// Ensemble estimates of every term for one weight, and the ratio of the sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanReport {
    pub s: f64,
    pub lambda: f64,
    pub h: f64,
    pub samples: usize,
    pub beta: f64,
    /// Every term below is a mantissa; multiply by `e^{ln_scale}` for its value.
    pub ln_scale: f64,
    pub lhs: [Estimate; 4],
    pub rhs: [Estimate; 5],
    /// `false` when the terminal term is reported but left out of the right-side sum.
    pub terminal_in_sum: bool,
    /// `max θ(·, T) / max θ`
    pub terminal_suppression: f64,
    pub lhs_sum: f64,
    pub rhs_sum: f64,
    /// `lhs_sum / rhs_sum`; `None` when degenerate.
    pub ratio: Option<f64>,
    pub ratio_std_error: Option<f64>,
    /// Both sums vanish.
    pub degenerate: bool,
}

impl CarlemanReport {
    /// Aggregates path terms in path order.
    pub fn from_paths(
        paths: &[PathTerms],
        table: &WeightTable,
        beta: f64,
        terminal_in_sum: bool,
    ) -> Self {
        let column = |get: &dyn Fn(&PathTerms) -> f64| {
            let v: Vec<f64> = paths.iter().map(get).collect();
            crate::forward::expectation(&v)
        };
        let lhs: [Estimate; 4] = std::array::from_fn(|k| column(&|p| p.lhs[k]));
        let rhs: [Estimate; 5] = std::array::from_fn(|k| column(&|p| p.rhs[k]));
        let rhs_of = |p: &PathTerms| -> f64 {
            p.rhs
                .iter()
                .enumerate()
                .filter(|&(k, _)| terminal_in_sum || k != 3)
                .map(|(_, v)| v)
                .sum()
        };
        let lhs_sum: f64 = lhs.iter().map(|e| e.mean).sum();
        let rhs_sum: f64 = rhs
            .iter()
            .enumerate()
            .filter(|&(k, _)| terminal_in_sum || k != 3)
            .map(|(_, e)| e.mean)
            .sum();
        let degenerate = lhs_sum == 0.0 && rhs_sum == 0.0;
        let ratio = (!degenerate && rhs_sum > 0.0).then(|| lhs_sum / rhs_sum);
        let ratio_std_error = ratio.and_then(|r| {
            let m = paths.len();
            if m < 2 {
                return None;
            }
            // delta method on L/R with per-path residuals L_k - r R_k
            let resid: Vec<f64> = paths
                .iter()
                .map(|p| p.lhs.iter().sum::<f64>() - r * rhs_of(p))
                .collect();
            crate::forward::expectation(&resid).std_error.map(|se| se / rhs_sum)
        });
        CarlemanReport {
            s: table.s,
            lambda: table.lambda,
            h: table.grid.h(),
            samples: paths.len(),
            beta,
            ln_scale: table.ln_scale,
            lhs,
            rhs,
            terminal_in_sum,
            terminal_suppression: table.terminal_suppression(),
            lhs_sum,
            rhs_sum,
            ratio,
            ratio_std_error,
            degenerate,
        }
    }
}
