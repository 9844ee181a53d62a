//! Weighted integrals of both sides of the discrete Carleman estimates,
//! estimated over Monte-Carlo ensembles, and sweeps of their ratio over
//! `(s, λ, h)`.

mod terms;

pub use terms::{
    path_lhs, path_rhs, BoundarySeries, CarlemanReport, PathTerms, WeightTable, LHS_TERMS, RHS_TERMS,
};

use crate::error::{invalid, LabError, Result};
use crate::forward::{ensemble_map, Ensemble, Estimate, SpdeProblem};
use crate::forward::{expectation, uniform_at};
use crate::grid::GridSpec;
use crate::time::{SpaceTimeData, SpaceTimeField, TimeGrid};
use crate::weights::WeightSpec;

/// Ensemble estimates of the four left-side integrals (mantissas relative to
/// `e^{ln_scale}` of the weight table).
pub fn weighted_lhs(e: &Ensemble, w: &WeightSpec, g: &SpaceTimeData) -> Result<[Estimate; 4]> {
    let table = ensemble_table(e, w)?;
    let rows: Vec<[f64; 4]> = e.solutions.iter().map(|y| path_lhs(y, g, &table)).collect();
    Ok(std::array::from_fn(|k| {
        expectation(&rows.iter().map(|r| r[k]).collect::<Vec<_>>())
    }))
}

/// Ensemble estimates of the five right-side integrals.
pub fn weighted_rhs(
    e: &Ensemble,
    w: &WeightSpec,
    f: &SpaceTimeData,
    g: &SpaceTimeData,
    boundary: BoundarySeries<'_>,
    c_lambda: f64,
) -> Result<[Estimate; 5]> {
    let table = ensemble_table(e, w)?;
    let rows: Vec<[f64; 5]> = e
        .solutions
        .iter()
        .map(|y| path_rhs(y, f, g, &table, boundary, c_lambda))
        .collect();
    Ok(std::array::from_fn(|k| {
        expectation(&rows.iter().map(|r| r[k]).collect::<Vec<_>>())
    }))
}

fn ensemble_table(e: &Ensemble, w: &WeightSpec) -> Result<WeightTable> {
    let first = e.solutions.first().ok_or_else(|| invalid("empty ensemble"))?;
    WeightTable::new(w, first.grid(), first.time())
}

/// Smallest `β` making `θ(·, T) ≤ tol · max θ` for the regular weight, or a
/// precondition error when no `β` can (that needs `s max φ > ln(1/tol)`).
pub fn suppression_beta(x_star: f64, t0: f64, lambda: f64, s: f64, length: f64, horizon: f64, tol: f64) -> Result<f64> {
    let psi_max = (length - x_star).powi(2).max(x_star * x_star);
    let phi_max = (lambda * psi_max).exp();
    let need = (1.0 / tol).ln();
    let target = phi_max - need / s;
    if !(target > 0.0) {
        return Err(LabError::Precondition(format!(
            "terminal suppression to {tol:e} needs s*max(phi) > {need:.3}, got {:.3}",
            s * phi_max
        )));
    }
    let gap = horizon - t0;
    Ok(((psi_max - target.ln() / lambda) / (gap * gap)).max(0.0))
}

/// Forcing family for the sweep: `y(0) = 0`, homogeneous boundary values,
/// and randomized smooth `f`, `g` built from sine modes that vanish at both
/// ends of the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanFamily {
    pub length: f64,
    pub horizon: f64,
    /// Fixed time steps, shared by every mesh so paths coincide across `h`.
    pub steps: usize,
    pub x_star: f64,
    pub t0: f64,
    /// Used as is without suppression, as a lower bound with it.
    pub beta: f64,
    /// Relative size of `θ(·, T)`; `Some` leaves the terminal term out of the sum.
    pub suppression: Option<f64>,
    pub c_lambda: f64,
    pub modes: usize,
    pub coefficient_seed: u64,
}

impl Default for CarlemanFamily {
    fn default() -> Self {
        CarlemanFamily {
            length: 0.5,
            horizon: 1.0,
            steps: 400,
            x_star: -0.05,
            t0: 0.5,
            beta: 1.0,
            suppression: Some(1e-8),
            c_lambda: 1.0,
            modes: 3,
            coefficient_seed: 0xC0FFEE,
        }
    }
}

impl CarlemanFamily {
    fn coefficient(&self, k: u64) -> f64 {
        let u = uniform_at(self.coefficient_seed, k);
        let sign = if uniform_at(self.coefficient_seed ^ 0xA5A5, k) < 0.5 { -1.0 } else { 1.0 };
        sign * (0.5 + u)
    }

    /// Mesh of step `h`; `L / h` must be an integer above 2.
    pub fn grid_for(&self, h: f64) -> Result<GridSpec> {
        let cells = (self.length / h).round();
        if cells < 3.0 || ((cells * h - self.length) / self.length).abs() > 1e-9 {
            return Err(invalid(format!("h = {h} does not divide L = {}", self.length)));
        }
        GridSpec::new(self.length, cells as usize - 1)
    }

    pub fn time(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    fn series(&self, grid: &GridSpec, time: &TimeGrid, offset: u64, amplitude: f64) -> SpaceTimeData {
        let (l, t_end) = (self.length, self.horizon);
        let coeffs: Vec<(f64, f64)> = (0..self.modes as u64)
            .map(|k| (self.coefficient(offset + 2 * k), self.coefficient(offset + 2 * k + 1)))
            .collect();
        let table = SpaceTimeField::from_fn(*grid, *time, |x, t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| {
                    let k1 = (k + 1) as f64;
                    a * (k1 * std::f64::consts::PI * x / l).sin()
                        * (1.0 + 0.5 * b * (2.0 * std::f64::consts::PI * k1 * t / t_end).sin())
                        / k1
                })
                .sum::<f64>()
                * amplitude
        });
        SpaceTimeData::Table(table)
    }

    pub fn drift_source(&self, grid: &GridSpec, time: &TimeGrid) -> SpaceTimeData {
        self.series(grid, time, 0, 1.0)
    }

    pub fn noise_source(&self, grid: &GridSpec, time: &TimeGrid) -> SpaceTimeData {
        self.series(grid, time, 1000, 1.0)
    }

    pub fn problem(&self, h: f64) -> Result<SpdeProblem> {
        let grid = self.grid_for(h)?;
        let time = self.time()?;
        Ok(SpdeProblem::new(grid, time).with_sources(self.drift_source(&grid, &time), self.noise_source(&grid, &time)))
    }

    /// The regular weight for one cell, with `β` raised for suppression when requested.
    pub fn weight(&self, s: f64, lambda: f64) -> Result<WeightSpec> {
        let beta = match self.suppression {
            Some(tol) => suppression_beta(self.x_star, self.t0, lambda, s, self.length, self.horizon, tol)?
                .max(self.beta),
            None => self.beta,
        };
        Ok(WeightSpec::regular(self.x_star, self.t0, beta, lambda, s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub s_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub h_grid: Vec<f64>,
    pub samples: usize,
    /// Admissible window `s ≤ sqrt(eps_cfg / h)`.
    pub eps_cfg: f64,
    pub master_seed: u64,
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipRecord {
    pub h: f64,
    pub s: f64,
    pub lambda: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub reports: Vec<CarlemanReport>,
    pub skipped: Vec<SkipRecord>,
    /// Indices of reports whose ratio exceeds the running maximum of earlier
    /// reports (same `λ`) by more than three standard errors.
    pub flagged: Vec<usize>,
}

impl SweepTable {
    /// Largest ratio per `h` at fixed `λ`, in sweep order.
    pub fn max_ratio_per_h(&self, lambda: f64) -> Vec<(f64, Option<f64>)> {
        let mut out: Vec<(f64, Option<f64>)> = Vec::new();
        for r in self.reports.iter().filter(|r| r.lambda == lambda) {
            let entry = match out.iter_mut().find(|(h, _)| *h == r.h) {
                Some(e) => e,
                None => {
                    out.push((r.h, None));
                    out.last_mut().unwrap()
                }
            };
            if let Some(v) = r.ratio {
                entry.1 = Some(entry.1.map_or(v, |m: f64| m.max(v)));
            }
        }
        out
    }

    /// `max / min` of the per-`h` maxima at fixed `λ`.
    pub fn uniformity_spread(&self, lambda: f64) -> Option<f64> {
        let maxes: Vec<f64> = self.max_ratio_per_h(lambda).iter().filter_map(|(_, m)| *m).collect();
        if maxes.len() < 2 {
            return None;
        }
        let hi = maxes.iter().copied().fold(f64::MIN, f64::max);
        let lo = maxes.iter().copied().fold(f64::MAX, f64::min);
        Some(hi / lo)
    }

    pub fn all_degenerate(&self) -> bool {
        self.reports.iter().all(|r| r.degenerate)
    }
}

/// Runs the sweep. Paths are shared by every `(s, λ)` cell of one mesh and,
/// since the time grid is fixed, by every mesh.
pub fn carleman_sweep(family: &CarlemanFamily, cfg: &SweepConfig) -> Result<SweepTable> {
    if cfg.samples == 0 {
        return Err(invalid("need at least one sample path"));
    }
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for &h in &cfg.h_grid {
        let problem = family.problem(h)?;
        let window = (cfg.eps_cfg / h).sqrt();
        let mut cells = Vec::new();
        for &lambda in &cfg.lambda_grid {
            for &s in &cfg.s_grid {
                if s > window {
                    skipped.push(SkipRecord {
                        h,
                        s,
                        lambda,
                        reason: format!("s = {s} exceeds sqrt(eps_cfg/h) = {window:.4}"),
                    });
                    continue;
                }
                match family.weight(s, lambda).and_then(|w| {
                    let table = WeightTable::new(&w, &problem.grid, &problem.time)?;
                    Ok((w, table))
                }) {
                    Ok(cell) => cells.push(cell),
                    Err(e) => skipped.push(SkipRecord {
                        h,
                        s,
                        lambda,
                        reason: e.to_string(),
                    }),
                }
            }
        }
        if cells.is_empty() {
            continue;
        }
        let per_path = ensemble_map(&problem, cfg.samples, cfg.master_seed, cfg.parallel, |_, _, y| {
            cells
                .iter()
                .map(|(_, table)| PathTerms {
                    lhs: path_lhs(y, &problem.g, table),
                    rhs: path_rhs(y, &problem.f, &problem.g, table, BoundarySeries::default(), family.c_lambda),
                })
                .collect::<Vec<_>>()
        })?;
        for (k, (w, table)) in cells.iter().enumerate() {
            let column: Vec<PathTerms> = per_path.iter().map(|row| row[k]).collect();
            reports.push(CarlemanReport::from_paths(
                &column,
                table,
                w.beta(),
                family.suppression.is_none(),
            ));
        }
    }
    let flagged = flag_outliers(&reports);
    Ok(SweepTable {
        reports,
        skipped,
        flagged,
    })
}

fn flag_outliers(reports: &[CarlemanReport]) -> Vec<usize> {
    let mut flagged = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        let (Some(v), Some(se)) = (r.ratio, r.ratio_std_error) else {
            continue;
        };
        let running = reports[..k]
            .iter()
            .filter(|p| p.lambda == r.lambda)
            .filter_map(|p| p.ratio)
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
        if let Some(m) = running {
            if v > m + 3.0 * se {
                flagged.push(k);
            }
        }
    }
    flagged
}
