use rayon::prelude::*;

use super::{check_gradient_domination, make_separable_source, SeparableSource};
use crate::error::{invalid, Result};
use crate::forward::{boundary_flux, expectation, path_seed, sample_on, Estimate, ForwardSolver, SpdeProblem};
use crate::forward::uniform_at;
use crate::grid::{DiscreteField, GridSpec};
use crate::time::{SpaceTimeData, SpaceTimeField, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityStatus {
    Ok,
    /// Both gaps vanish.
    Degenerate,
    /// The data gap is within three standard errors of zero while the
    /// source gap is not.
    ViolationCandidate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRecord {
    pub h: f64,
    pub samples: usize,
    /// `(E ∫_0^T ‖g̃‖²_{L²(G_h)} dt)^{1/2}`
    pub source_gap: f64,
    /// `E ∫_0^T |(D_h⁻ỹ)_{N+1}|² dt`
    pub flux_gap_sq: Estimate,
    /// `E ‖ỹ(T)‖²_{L²(G_h)}`
    pub terminal_gap_sq: Estimate,
    /// Square root of each mean, summed.
    pub data_gap: f64,
    pub data_gap_std_error: Option<f64>,
    pub ratio: Option<f64>,
    pub status: StabilityStatus,
}

/// Per-path quantities of one coupled pair of solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub source_sq: f64,
    pub flux_sq: f64,
    pub terminal_sq: f64,
}

/// The three squared norms of one path of the difference `ỹ = y1 - y2`.
pub fn gap_norms(y1: &SpaceTimeField, y2: &SpaceTimeField, g1: &SpaceTimeData, g2: &SpaceTimeData) -> GapSample {
    let grid = y1.grid();
    let time = y1.time();
    let (h, dt, k) = (grid.h(), time.dt(), time.steps());
    let (f1, f2) = (boundary_flux(y1), boundary_flux(y2));
    let flux_sq = dt * (0..k).map(|n| (f1[n] - f2[n]).powi(2)).sum::<f64>();
    let terminal_sq = h * (1..=grid.n())
        .map(|i| (y1.get(k, i) - y2.get(k, i)).powi(2))
        .sum::<f64>();
    let source_sq = dt * (0..k)
        .map(|n| h * (1..=grid.n()).map(|i| (g1.value(n, i) - g2.value(n, i)).powi(2)).sum::<f64>())
        .sum::<f64>();
    GapSample {
        source_sq,
        flux_sq,
        terminal_sq,
    }
}

/// Solves the problem with `g1` and with `g2` on the same Brownian path for
/// every path, then compares observations with sources.
pub fn stability_experiment(
    base: &SpdeProblem,
    g1: &SpaceTimeData,
    g2: &SpaceTimeData,
    samples: usize,
    master_seed: u64,
    parallel: bool,
) -> Result<StabilityRecord> {
    let paths = coupled_gaps(base, g1, g2, samples, master_seed, parallel)?;
    Ok(summarize(base.grid.h(), &paths))
}

/// Per-path gaps of the coupled pair, in path order.
pub fn coupled_gaps(
    base: &SpdeProblem,
    g1: &SpaceTimeData,
    g2: &SpaceTimeData,
    samples: usize,
    master_seed: u64,
    parallel: bool,
) -> Result<Vec<GapSample>> {
    if samples == 0 {
        return Err(invalid("need at least one sample path"));
    }
    let p1 = base.clone().with_sources(base.f.clone(), g1.clone());
    let p2 = base.clone().with_sources(base.f.clone(), g2.clone());
    let (s1, s2) = (ForwardSolver::new(&p1)?, ForwardSolver::new(&p2)?);
    let one = |k: usize| -> Result<GapSample> {
        let path = sample_on(base.time, path_seed(master_seed, k as u64));
        let y1 = s1.solve(&path)?;
        let y2 = s2.solve(&path)?;
        Ok(gap_norms(&y1, &y2, g1, g2))
    };
    if parallel {
        (0..samples).into_par_iter().map(one).collect()
    } else {
        (0..samples).map(one).collect()
    }
}

fn summarize(h: f64, paths: &[GapSample]) -> StabilityRecord {
    let col = |f: fn(&GapSample) -> f64| expectation(&paths.iter().map(f).collect::<Vec<_>>());
    let source = col(|p| p.source_sq);
    let flux = col(|p| p.flux_sq);
    let terminal = col(|p| p.terminal_sq);
    let source_gap = source.mean.sqrt();
    let data_gap = flux.mean.sqrt() + terminal.mean.sqrt();
    // delta method: se(sqrt X) ≈ se(X) / (2 sqrt X)
    let sqrt_se = |e: &Estimate| -> Option<f64> {
        let se = e.std_error?;
        Some(if e.mean > 0.0 { se / (2.0 * e.mean.sqrt()) } else { se.sqrt() })
    };
    let data_gap_std_error = match (sqrt_se(&flux), sqrt_se(&terminal)) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    let (status, ratio) = if data_gap == 0.0 && source_gap == 0.0 {
        (StabilityStatus::Degenerate, None)
    } else if data_gap <= 3.0 * data_gap_std_error.unwrap_or(0.0) || data_gap == 0.0 {
        (StabilityStatus::ViolationCandidate, None)
    } else {
        (StabilityStatus::Ok, Some(source_gap / data_gap))
    };
    StabilityRecord {
        h,
        samples: paths.len(),
        source_gap,
        flux_gap_sq: flux,
        terminal_gap_sq: terminal,
        data_gap,
        data_gap_std_error,
        ratio,
        status,
    }
}

/// Random separable source pairs sharing one spatial factor, on top of a
/// fixed drift `a y + b D_h⁺y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceFamily {
    pub length: f64,
    pub horizon: f64,
    /// Fixed across meshes so paths coincide.
    pub steps: usize,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
    /// Makes both members of every pair equal.
    pub zero_gap: bool,
}

impl Default for SourceFamily {
    fn default() -> Self {
        SourceFamily {
            length: 1.0,
            horizon: 1.0,
            steps: 200,
            a: 0.5,
            b: 0.25,
            seed: 2024,
            zero_gap: false,
        }
    }
}

impl SourceFamily {
    fn u(&self, pair: usize, k: u64) -> f64 {
        uniform_at(self.seed ^ (pair as u64).wrapping_mul(0x9E37_79B9), k)
    }

    pub fn grid_for(&self, h: f64) -> Result<GridSpec> {
        let cells = (self.length / h).round();
        if cells < 3.0 || ((cells * h - self.length) / self.length).abs() > 1e-9 {
            return Err(invalid(format!("h = {h} does not divide L = {}", self.length)));
        }
        GridSpec::new(self.length, cells as usize - 1)
    }

    pub fn problem(&self, h: f64) -> Result<SpdeProblem> {
        let grid = self.grid_for(h)?;
        let time = TimeGrid::new(self.horizon, self.steps)?;
        let y0 = DiscreteField::from_fn(grid, |x| (std::f64::consts::PI * x / self.length).sin());
        Ok(SpdeProblem::new(grid, time)
            .with_initial(y0)
            .with_drift(SpaceTimeData::Constant(self.a), SpaceTimeData::Constant(self.b)))
    }

    /// Pair `index` on the mesh of `problem`: `R(x) = c0 + c1 sin(k π x / L + φ)`
    /// with `c0 > c1`, and two smooth random time profiles.
    pub fn pair(&self, index: usize, grid: &GridSpec, time: &TimeGrid) -> Result<(SeparableSource, SeparableSource)> {
        let c0 = 1.5 + self.u(index, 0);
        let c1 = 0.9 * self.u(index, 1);
        let k = 1.0 + (3.0 * self.u(index, 2)).floor();
        let phase = std::f64::consts::TAU * self.u(index, 3);
        let l = self.length;
        let space = DiscreteField::from_fn(*grid, |x| c0 + c1 * (k * std::f64::consts::PI * x / l + phase).sin());
        let profile = |offset: u64| -> Vec<f64> {
            let amp: Vec<f64> = (0..3).map(|j| 2.0 * self.u(index, offset + j) - 1.0).collect();
            (0..time.levels())
                .map(|n| {
                    let t = time.time(n) / self.horizon;
                    amp[0] + amp[1] * (std::f64::consts::PI * t).cos() + amp[2] * (2.0 * std::f64::consts::PI * t).sin()
                })
                .collect()
        };
        let first = make_separable_source(profile(10), space.clone())?;
        let second = make_separable_source(profile(if self.zero_gap { 10 } else { 20 }), space)?;
        Ok((first, second))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A single mesh; nothing to compare.
    NotApplicable,
    InsufficientData,
    WithinBand,
    /// Outside the band, but not once three standard errors are allowed.
    Inconclusive,
    OutsideBand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityRow {
    pub h: f64,
    pub pair: usize,
    /// Gradient-domination constant of the pair.
    pub best_constant: f64,
    pub record: StabilityRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityTable {
    pub rows: Vec<UniformityRow>,
    /// `(h, max ratio over pairs, its standard error)`
    pub per_h_max: Vec<(f64, Option<(f64, f64)>)>,
    pub spread: Option<f64>,
    pub band: f64,
    pub verdict: Verdict,
}

/// Ratio standard error from the delta method on `source / data`.
fn ratio_se(r: &StabilityRecord) -> f64 {
    match (r.ratio, r.data_gap_std_error) {
        (Some(v), Some(se)) => v * se / r.data_gap,
        _ => f64::INFINITY,
    }
}

/// Runs `pairs` source pairs at every mesh step and compares the per-mesh
/// maximum ratios against a `band`-fold spread.
pub fn uniformity_sweep(
    family: &SourceFamily,
    h_grid: &[f64],
    pairs: usize,
    samples: usize,
    master_seed: u64,
    parallel: bool,
    band: f64,
) -> Result<UniformityTable> {
    let mut rows = Vec::new();
    let mut per_h_max = Vec::new();
    for &h in h_grid {
        let base = family.problem(h)?;
        let mut best: Option<(f64, f64)> = None;
        for pair in 0..pairs {
            let (s1, s2) = family.pair(pair, &base.grid, &base.time)?;
            let (g1, g2) = (s1.to_data(), s2.to_data());
            let dom = check_gradient_domination(&g1, &g2, &base.grid, &base.time);
            let record = stability_experiment(&base, &g1, &g2, samples, master_seed, parallel)?;
            if let Some(v) = record.ratio {
                if best.map_or(true, |(m, _)| v > m) {
                    best = Some((v, ratio_se(&record)));
                }
            }
            rows.push(UniformityRow {
                h,
                pair,
                best_constant: dom.best_constant,
                record,
            });
        }
        per_h_max.push((h, best));
    }
    let maxes: Vec<(f64, f64)> = per_h_max.iter().filter_map(|(_, m)| *m).collect();
    let (spread, verdict) = if h_grid.len() < 2 {
        (None, Verdict::NotApplicable)
    } else if maxes.len() < 2 {
        (None, Verdict::InsufficientData)
    } else {
        let hi = maxes.iter().copied().fold((f64::MIN, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        let lo = maxes.iter().copied().fold((f64::MAX, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        let spread = hi.0 / lo.0;
        let verdict = if spread <= band {
            Verdict::WithinBand
        } else if (hi.0 - 3.0 * hi.1) / (lo.0 + 3.0 * lo.1) <= band {
            Verdict::Inconclusive
        } else {
            Verdict::OutsideBand
        };
        (Some(spread), verdict)
    };
    Ok(UniformityTable {
        rows,
        per_h_max,
        spread,
        band,
        verdict,
    })
}
