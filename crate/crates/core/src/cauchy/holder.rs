use num_complex::Complex64;

use super::data::{lateral_trace, region_norm_sq, ObservationRegion};
use crate::error::{invalid, Result};
use crate::forward::{ensemble_map, expectation, SpdeProblem};
use crate::grid::{DiscreteField, GridSpec};
use crate::time::{h1_time_norm, l2_time_norm, SpaceTimeData, TimeGrid};
use crate::weights::{level_sets, minimal_level_count, LevelSetSpec, SpatialProfile};

/// Solutions `y_i^n = Re(q^n z^i)`, `q = e^{iω dt}`, of the discrete heat
/// equation that decay from the left end toward `x_{N+1}`. Higher `ω` gives
/// faster decay, so the lateral data at the right end shrinks by orders of
/// magnitude while the solution norm is held fixed. With `c ≠ 0` the same
/// initial and boundary data drive the stochastic equation.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicFamily {
    pub length: f64,
    pub horizon: f64,
    pub steps: usize,
    /// Multiplicative noise coefficient.
    pub c: f64,
    pub region: ObservationRegion,
    /// Common value of `‖y‖_{L²_F(0,T;H²)}` after normalization.
    pub amplitude: f64,
}

impl Default for HarmonicFamily {
    fn default() -> Self {
        HarmonicFamily {
            length: 1.0,
            horizon: 1.0,
            steps: 800,
            c: 0.1,
            region: ObservationRegion::new(0.5, 0.1),
            amplitude: 1.0,
        }
    }
}

/// `num` frequencies spaced geometrically on `[lo, hi]`.
pub fn geometric_frequencies(lo: f64, hi: f64, num: usize) -> Vec<f64> {
    if num < 2 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (num - 1) as f64;
    let mut out: Vec<f64> = (0..num).map(|k| lo * (r * k as f64).exp()).collect();
    out[num - 1] = hi;
    out
}

/// A one-parameter family of forward problems for the Hölder experiment.
pub trait CauchyFamily: Sync {
    fn grid_for(&self, h: f64) -> Result<GridSpec>;
    fn time(&self) -> Result<TimeGrid>;
    fn region(&self) -> ObservationRegion;
    /// Every member is rescaled so that its solution norm equals this.
    fn amplitude(&self) -> f64;
    fn problem(&self, scale: f64, grid: GridSpec) -> Result<SpdeProblem>;
}

impl CauchyFamily for HarmonicFamily {
    fn grid_for(&self, h: f64) -> Result<GridSpec> {
        HarmonicFamily::grid_for(self, h)
    }
    fn time(&self) -> Result<TimeGrid> {
        HarmonicFamily::time(self)
    }
    fn region(&self) -> ObservationRegion {
        self.region
    }
    fn amplitude(&self) -> f64 {
        self.amplitude
    }
    fn problem(&self, scale: f64, grid: GridSpec) -> Result<SpdeProblem> {
        HarmonicFamily::problem(self, scale, grid)
    }
}

impl HarmonicFamily {
    pub fn default_frequencies() -> Vec<f64> {
        geometric_frequencies(1.0, 400.0, 12)
    }

    pub fn grid_for(&self, h: f64) -> Result<GridSpec> {
        let n = (self.length / h).round() as i64 - 1;
        if n < 1 || ((n + 1) as f64 * h - self.length).abs() > 1e-9 * self.length {
            return Err(invalid(format!("h = {h} does not divide L = {}", self.length)));
        }
        GridSpec::new(self.length, n as usize)
    }

    pub fn time(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    /// Spatial ratio `z` with `|z| < 1` for frequency `omega`.
    pub fn decay_ratio(omega: f64, h: f64, dt: f64) -> Complex64 {
        let q = Complex64::from_polar(1.0, omega * dt);
        let w = 2.0 + (1.0 - q.inv()) * (h * h / dt);
        let root = (w * w - 4.0).sqrt();
        let (z1, z2) = ((w - root) / 2.0, (w + root) / 2.0);
        if z1.norm() <= z2.norm() {
            z1
        } else {
            z2
        }
    }

    /// The unnormalized member for `omega` on `grid`.
    pub fn problem(&self, omega: f64, grid: GridSpec) -> Result<SpdeProblem> {
        let time = self.time()?;
        let z = Self::decay_ratio(omega, grid.h(), time.dt());
        let last = grid.n() + 1;
        let initial: Vec<f64> = (0..=last).map(|i| z.powu(i as u32).re).collect();
        let q = |n: usize| Complex64::from_polar(1.0, omega * time.time(n));
        let left = (0..time.levels()).map(|n| q(n).re).collect();
        let zl = z.powu(last as u32);
        let right = (0..time.levels()).map(|n| (q(n) * zl).re).collect();
        Ok(SpdeProblem::new(grid, time)
            .with_initial(DiscreteField::new(grid, initial)?)
            .with_noise_coefficient(SpaceTimeData::Constant(self.c))
            .with_boundary(Some(left), Some(right)))
    }
}

/// Parameters of the level-set construction behind the stability estimate,
/// recorded for context.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelContext {
    pub d_sup: f64,
    /// Smallest `N` with `d > 4 ‖d‖ / N` on `G₀`.
    pub n_level: usize,
    pub beta_band: (f64, f64),
    /// Midpoint of `beta_band`.
    pub beta: f64,
    /// `t₀ = √2 ε + j ε / √N` for `j = 0..=m`, the last one below `T − √2 ε`.
    pub t0_tiling: Vec<f64>,
    /// Whether `G₀` lies inside `Q^(4)` near every tiled `t₀` on this mesh
    /// (λ = 1, β mid-band). `None` when no `t₀` fits in `[0, T]`.
    pub q4_inclusion: Option<bool>,
}

impl LevelContext {
    pub fn new(grid: &GridSpec, time: &TimeGrid, region: &ObservationRegion) -> Result<Self> {
        let profile = SpatialProfile::default_for(grid);
        let n_level = minimal_level_count(&profile, grid, region.x_left)?;
        let eps = region.epsilon;
        let beta_band = LevelSetSpec::beta_band(profile.sup_norm, eps);
        let step = eps / (n_level as f64).sqrt();
        let start = std::f64::consts::SQRT_2 * eps;
        let end = time.horizon() - start;
        let t0_tiling = if step > 0.0 && start <= end {
            let m = ((end - start) / step).floor() as usize;
            (0..=m).map(|j| start + j as f64 * step).collect()
        } else {
            Vec::new()
        };
        let beta = 0.5 * (beta_band.0 + beta_band.1);
        let mut q4_inclusion = None;
        for &t0 in &t0_tiling {
            let (spec, masks) = level_sets(&profile, 1.0, beta, eps, n_level, t0, grid, time)?;
            let holds = masks.check_inclusion(&spec, region.x_left).holds;
            q4_inclusion = Some(q4_inclusion.unwrap_or(true) && holds);
        }
        Ok(LevelContext {
            d_sup: profile.sup_norm,
            n_level,
            beta_band,
            beta,
            t0_tiling,
            q4_inclusion,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderRecord {
    pub h: f64,
    pub epsilon: f64,
    pub x_left: f64,
    /// The family parameter that produced the record.
    pub scale: f64,
    pub samples: usize,
    pub m_bound: f64,
    pub xi_norm: f64,
    pub eta_norm: f64,
    /// `‖ξ‖ + ‖η‖`
    pub data_norm: f64,
    pub interior_norm: f64,
    /// Filled in from the fit over all records of the experiment.
    pub kappa: f64,
    pub r_squared: f64,
    /// `interior / (C M^κ data^{1-κ})` with `C` from the fit intercept.
    pub bound_ratio: f64,
    pub context: LevelContext,
}

/// Least-squares line `log I = intercept + slope · log D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// `1 - slope`
    pub kappa: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl PowerFit {
    pub fn kappa_in_unit_interval(&self) -> bool {
        self.kappa > 0.0 && self.kappa < 1.0
    }

    /// `C` in `I ≤ C M^κ D^{1-κ}` read off the intercept.
    pub fn constant(&self, m_bound: f64) -> f64 {
        self.intercept.exp() / m_bound.powf(self.kappa)
    }
}

pub fn fit_power_law(data: &[f64], interior: &[f64]) -> Result<PowerFit> {
    if data.len() != interior.len() || data.len() < 2 {
        return Err(invalid("need at least two (data, interior) pairs of equal length"));
    }
    if data.iter().chain(interior).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(invalid("power-law fit needs positive finite norms"));
    }
    let xs: Vec<f64> = data.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = interior.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("data norms are all equal; slope undefined"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerFit {
        slope,
        intercept,
        kappa: 1.0 - slope,
        r_squared,
        points: xs.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderExperiment {
    pub records: Vec<HolderRecord>,
    /// `(scale, reason)` for members left out of the fit.
    pub skipped: Vec<(f64, String)>,
    pub fit: Option<PowerFit>,
    /// `log10(max data / min data)` over the kept records.
    pub decades: f64,
}

/// Runs every member on the mesh `h`, normalizes each to the family amplitude
/// and fits the Hölder exponent.
pub fn holder_experiment(
    family: &impl CauchyFamily,
    scales: &[f64],
    h: f64,
    samples: usize,
    master_seed: u64,
    parallel: bool,
) -> Result<HolderExperiment> {
    let grid = family.grid_for(h)?;
    let time = family.time()?;
    let region = family.region();
    region.validate(&grid, &time)?;
    let context = LevelContext::new(&grid, &time, &region)?;
    let whole = ObservationRegion::whole();
    let dt = time.dt();

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &omega in scales {
        let problem = family.problem(omega, grid)?;
        let rows = ensemble_map(&problem, samples, master_seed, parallel, |_, _, y| {
            let (xi, eta) = lateral_trace(y);
            [
                region_norm_sq(y, &whole),
                region_norm_sq(y, &region),
                h1_time_norm(&xi, dt).powi(2),
                l2_time_norm(&eta, dt).powi(2),
            ]
        })?;
        let col = |j: usize| expectation(&rows.iter().map(|r| r[j]).collect::<Vec<_>>());
        let (m_sq, int_sq, xi_sq, eta_sq) = (col(0), col(1), col(2), col(3));
        let data_sq = expectation(&rows.iter().map(|r| r[2] + r[3]).collect::<Vec<_>>());
        if !(m_sq.mean > 0.0) {
            skipped.push((omega, "solution norm is zero".to_string()));
            continue;
        }
        if !(data_sq.mean > 0.0) || data_sq.std_error.is_some_and(|se| data_sq.mean <= 3.0 * se) {
            skipped.push((omega, "data norm statistically zero".to_string()));
            continue;
        }
        let factor = family.amplitude() / m_sq.mean.sqrt();
        let (xi_norm, eta_norm) = (factor * xi_sq.mean.sqrt(), factor * eta_sq.mean.sqrt());
        records.push(HolderRecord {
            h: grid.h(),
            epsilon: region.epsilon,
            x_left: region.x_left,
            scale: omega,
            samples,
            m_bound: family.amplitude(),
            xi_norm,
            eta_norm,
            data_norm: xi_norm + eta_norm,
            interior_norm: factor * int_sq.mean.sqrt(),
            kappa: f64::NAN,
            r_squared: f64::NAN,
            bound_ratio: f64::NAN,
            context: context.clone(),
        });
    }

    let data: Vec<f64> = records.iter().map(|r| r.data_norm).collect();
    let interior: Vec<f64> = records.iter().map(|r| r.interior_norm).collect();
    let fit = if records.len() >= 2 {
        Some(fit_power_law(&data, &interior)?)
    } else {
        None
    };
    if let Some(f) = fit {
        let c = f.constant(family.amplitude());
        for r in &mut records {
            r.kappa = f.kappa;
            r.r_squared = f.r_squared;
            r.bound_ratio = r.interior_norm / (c * r.m_bound.powf(f.kappa) * r.data_norm.powf(1.0 - f.kappa));
        }
    }
    let decades = if data.is_empty() {
        0.0
    } else {
        let hi = data.iter().cloned().fold(f64::MIN, f64::max);
        let lo = data.iter().cloned().fold(f64::MAX, f64::min);
        (hi / lo).log10()
    };
    Ok(HolderExperiment {
        records,
        skipped,
        fit,
        decades,
    })
}
