use rayon::prelude::*;

use super::{path_seed, sample_on, ForwardSolver, SamplePath, SpdeProblem};
use crate::error::{invalid, Result};
use crate::time::SpaceTimeField;

/// `M` solves of one problem on independent Brownian paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub master_seed: u64,
    pub paths: Vec<SamplePath>,
    pub solutions: Vec<SpaceTimeField>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Mean and standard error of a per-path functional.
    pub fn expectation(&self, functional: impl Fn(&SamplePath, &SpaceTimeField) -> f64) -> Estimate {
        let values: Vec<f64> = self
            .paths
            .iter()
            .zip(&self.solutions)
            .map(|(p, y)| functional(p, y))
            .collect();
        expectation(&values)
    }
}

/// Runs `m` paths and keeps every solution. Memory grows as `m` full tables;
/// prefer [`ensemble_map`] for large runs.
pub fn ensemble_run(problem: &SpdeProblem, m: usize, master_seed: u64, parallel: bool) -> Result<Ensemble> {
    let out = ensemble_map(problem, m, master_seed, parallel, |_, path, y| (path.clone(), y.clone()))?;
    let (paths, solutions) = out.into_iter().unzip();
    Ok(Ensemble {
        master_seed,
        paths,
        solutions,
    })
}

/// Solves path `k = 0..m` with seed `path_seed(master_seed, k)` and applies
/// `f(k, path, solution)`. Results come back in path order whatever the
/// scheduling, so reductions over them are reproducible.
pub fn ensemble_map<T, F>(problem: &SpdeProblem, m: usize, master_seed: u64, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &SamplePath, &SpaceTimeField) -> T + Sync,
{
    if m == 0 {
        return Err(invalid("ensemble needs at least one path"));
    }
    ensemble_map_range(problem, 0..m, master_seed, parallel, f)
}

/// [`ensemble_map`] over the path indices in `range`, for processing a large
/// ensemble in chunks.
pub fn ensemble_map_range<T, F>(
    problem: &SpdeProblem,
    range: std::ops::Range<usize>,
    master_seed: u64,
    parallel: bool,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &SamplePath, &SpaceTimeField) -> T + Sync,
{
    let solver = ForwardSolver::new(problem)?;
    let one = |k: usize| -> Result<T> {
        let path = sample_on(problem.time, path_seed(master_seed, k as u64));
        let y = solver.solve(&path)?;
        Ok(f(k, &path, &y))
    };
    if parallel {
        range.into_par_iter().map(one).collect()
    } else {
        range.map(one).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(M)`; `None` when `M < 2`.
    pub std_error: Option<f64>,
    pub samples: usize,
}

impl Estimate {
    /// Standard error, or infinity when undefined.
    pub fn se_or_inf(&self) -> f64 {
        self.std_error.unwrap_or(f64::INFINITY)
    }
}

/// Mean `Σ/M` in the given order and the standard error of the mean.
pub fn expectation(values: &[f64]) -> Estimate {
    let m = values.len();
    if m == 0 {
        return Estimate {
            mean: f64::NAN,
            std_error: None,
            samples: 0,
        };
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let std_error = (m >= 2).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        (var / m as f64).sqrt()
    });
    Estimate {
        mean,
        std_error,
        samples: m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::solve_forward;
    use crate::grid::{DiscreteField, GridSpec};
    use crate::time::{SpaceTimeData, TimeGrid};

    fn noisy_problem() -> SpdeProblem {
        let g = GridSpec::new(1.0, 6).unwrap();
        let t = TimeGrid::new(0.5, 20).unwrap();
        SpdeProblem::new(g, t)
            .with_initial(DiscreteField::from_fn(g, |x| x * (1.0 - x)))
            .with_noise_coefficient(SpaceTimeData::Constant(0.8))
            .with_sources(SpaceTimeData::Zero, SpaceTimeData::Constant(1.0))
    }

    #[test]
    fn single_path_matches_direct_solve() {
        let p = noisy_problem();
        let e = ensemble_run(&p, 1, 5, false).unwrap();
        let direct = solve_forward(&p, &sample_on(p.time, path_seed(5, 0))).unwrap();
        assert_eq!(e.solutions[0], direct);
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let p = noisy_problem();
        let energy = |_: usize, _: &SamplePath, y: &SpaceTimeField| y.data().iter().map(|v| v * v).sum::<f64>();
        let a = ensemble_map(&p, 64, 9, false, energy).unwrap();
        let b = ensemble_map(&p, 64, 9, true, energy).unwrap();
        assert_eq!(a, b);
        let (ea, eb) = (expectation(&a), expectation(&b));
        assert_eq!(ea.mean.to_bits(), eb.mean.to_bits());
    }

    #[test]
    fn expectation_basics() {
        let c = expectation(&[2.5; 10]);
        assert_eq!(c.mean, 2.5);
        assert_eq!(c.std_error, Some(0.0));
        assert_eq!(expectation(&[1.0]).std_error, None);
    }

    #[test]
    fn brownian_variance_through_ensemble() {
        let g = GridSpec::new(1.0, 2).unwrap();
        let t = TimeGrid::new(1.5, 3).unwrap();
        let p = SpdeProblem::new(g, t);
        let v = ensemble_map(&p, 20_000, 1, true, |_, path, _| path.terminal_value().powi(2)).unwrap();
        let est = expectation(&v);
        assert!((est.mean - 1.5).abs() <= 3.0 * est.se_or_inf());
    }

    #[test]
    fn zero_problem_energy_is_zero() {
        let g = GridSpec::new(1.0, 4).unwrap();
        let t = TimeGrid::new(1.0, 8).unwrap();
        let p = SpdeProblem::new(g, t);
        let e = ensemble_run(&p, 5, 2, true).unwrap();
        let est = e.expectation(|_, y| y.data().iter().map(|v| v * v).sum());
        assert_eq!(est.mean, 0.0);
    }
}
