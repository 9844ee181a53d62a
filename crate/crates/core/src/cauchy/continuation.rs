use rayon::prelude::*;

use super::data::{region_norm_sq, CauchyData, ObservationRegion};
use crate::error::{invalid, LabError, Result};
use crate::forward::{SamplePath, TridiagonalFactor};
use crate::grid::{DiscreteField, GridSpec};
use crate::time::{SpaceTimeData, SpaceTimeField, TimeGrid};

/// Known coefficients of the homogeneous equation
/// `dy − Δ_h y dt = (a y + b D_h⁺y) dt + c y dB` and the region to recover.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationProblem {
    pub grid: GridSpec,
    pub time: TimeGrid,
    pub a: SpaceTimeData,
    pub b: SpaceTimeData,
    pub c: SpaceTimeData,
    pub region: ObservationRegion,
}

impl ContinuationProblem {
    pub fn new(grid: GridSpec, time: TimeGrid, region: ObservationRegion) -> Self {
        ContinuationProblem {
            grid,
            time,
            a: SpaceTimeData::Zero,
            b: SpaceTimeData::Zero,
            c: SpaceTimeData::Zero,
            region,
        }
    }

    pub fn with_coefficients(mut self, a: SpaceTimeData, b: SpaceTimeData, c: SpaceTimeData) -> Self {
        self.a = a;
        self.b = b;
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("a", &self.a), ("b", &self.b), ("c", &self.c)] {
            d.validate(name, &self.grid, &self.time)?;
        }
        self.region.validate(&self.grid, &self.time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationSettings {
    pub alpha: f64,
    pub max_iterations: usize,
    /// Stop once `‖r‖ ≤ tol ‖rhs‖`.
    pub tolerance: f64,
}

impl ContinuationSettings {
    pub fn new(alpha: f64) -> Self {
        ContinuationSettings {
            alpha,
            max_iterations: 2000,
            tolerance: 1e-12,
        }
    }
}

/// The path-wise affine map from interior initial data `u = y⁰_{1..N}` to
/// the flux series `√dt (D_h⁻y^n)_{N+1}`, `n = 0..K`, of the solution with
/// `y_0 ≡ 0` and `y_{N+1} = ξ`. The Dirichlet trace matches `ξ` by
/// construction, so only the flux enters the misfit.
pub struct FluxOperator<'a> {
    problem: &'a ContinuationProblem,
    factor: TridiagonalFactor,
    /// Diagonal and super-diagonal of the explicit step `B_n`, per level.
    diag: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

impl<'a> FluxOperator<'a> {
    pub fn new(problem: &'a ContinuationProblem, path: &'a SamplePath) -> Result<Self> {
        problem.validate()?;
        if path.time != problem.time {
            return Err(invalid("sample path and problem use different time grids"));
        }
        let n = problem.grid.n();
        let h = problem.grid.h();
        let dt = problem.time.dt();
        let mu = dt / (h * h);
        let mut diag = Vec::with_capacity(problem.time.steps());
        let mut upper = Vec::with_capacity(problem.time.steps());
        for k in 0..problem.time.steps() {
            let db = path.increments[k];
            let mut d = vec![0.0; n];
            let mut u = vec![0.0; n];
            for i in 1..=n {
                let (a, b, c) = (problem.a.value(k, i), problem.b.value(k, i), problem.c.value(k, i));
                d[i - 1] = 1.0 + dt * a - dt * b / h + c * db;
                u[i - 1] = dt * b / h;
            }
            diag.push(d);
            upper.push(u);
        }
        Ok(FluxOperator {
            problem,
            factor: TridiagonalFactor::new(n, 1.0 + 2.0 * mu, -mu),
            diag,
            upper,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.problem.grid.n()
    }

    pub fn outputs(&self) -> usize {
        self.problem.time.steps()
    }

    fn flux_weight(&self) -> f64 {
        self.problem.time.dt().sqrt() / self.problem.grid.h()
    }

    /// Full solution for initial interior data `u` and right boundary `xi`.
    pub fn solve(&self, u: &[f64], xi: &[f64]) -> SpaceTimeField {
        let p = self.problem;
        let n = p.grid.n();
        let mu = p.time.dt() / (p.grid.h() * p.grid.h());
        let mut y = SpaceTimeField::zeros(p.grid, p.time);
        {
            let l0 = y.level_mut(0);
            l0[1..=n].copy_from_slice(u);
            l0[n + 1] = xi[0];
        }
        let mut rhs = vec![0.0; n];
        for k in 0..p.time.steps() {
            {
                let prev = y.level(k);
                for i in 0..n {
                    rhs[i] = self.diag[k][i] * prev[i + 1] + self.upper[k][i] * prev[i + 2];
                }
            }
            rhs[n - 1] += mu * xi[k + 1];
            self.factor.solve_in_place(&mut rhs);
            let next = y.level_mut(k + 1);
            next[1..=n].copy_from_slice(&rhs);
            next[n + 1] = xi[k + 1];
        }
        y
    }

    /// Weighted flux series of a full solution.
    pub fn weighted_flux(&self, y: &SpaceTimeField) -> Vec<f64> {
        let n = self.problem.grid.n();
        let w = self.flux_weight();
        (0..self.outputs()).map(|k| w * (y.get(k, n + 1) - y.get(k, n))).collect()
    }

    /// Linear part `A u` (zero boundary data).
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.unknowns();
        let w = self.flux_weight();
        let mut cur = u.to_vec();
        let mut out = Vec::with_capacity(self.outputs());
        for k in 0..self.outputs() {
            out.push(-w * cur[n - 1]);
            if k + 1 < self.outputs() {
                self.step(k, &mut cur);
            }
        }
        out
    }

    fn step(&self, k: usize, cur: &mut [f64]) {
        let n = cur.len();
        for i in 0..n {
            let right = if i + 1 < n { cur[i + 1] } else { 0.0 };
            cur[i] = self.diag[k][i] * cur[i] + self.upper[k][i] * right;
        }
        self.factor.solve_in_place(cur);
    }

    /// Transpose `Aᵀ v` by a backward sweep through the transposed steps.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let n = self.unknowns();
        let w = self.flux_weight();
        let kk = self.outputs();
        let mut p = vec![0.0; n];
        p[n - 1] = -w * v[kk - 1];
        for k in (0..kk - 1).rev() {
            // p ← B_kᵀ M⁻¹ p; M is symmetric
            self.factor.solve_in_place(&mut p);
            for i in (0..n).rev() {
                let lower = if i > 0 { self.upper[k][i - 1] * p[i - 1] } else { 0.0 };
                p[i] = self.diag[k][i] * p[i] + lower;
            }
            p[n - 1] -= w * v[k];
        }
        p
    }

    /// `|⟨A u, v⟩ − ⟨u, Aᵀ v⟩| / (‖A u‖ ‖v‖)`
    pub fn adjoint_mismatch(&self, u: &[f64], v: &[f64]) -> f64 {
        let au = self.apply(u);
        let atv = self.apply_transpose(v);
        let lhs: f64 = au.iter().zip(v).map(|(a, b)| a * b).sum();
        let rhs: f64 = u.iter().zip(&atv).map(|(a, b)| a * b).sum();
        let scale = dot(&au, &au).sqrt() * dot(v, v).sqrt();
        if scale == 0.0 {
            (lhs - rhs).abs()
        } else {
            (lhs - rhs).abs() / scale
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `R u` for the squared `H¹` norm of `u` extended by zero at both ends:
/// `uᵀ R u = h Σ_{i=0..=N} |D_h⁺u|² + h Σ_{i=1..=N} u²`.
fn h1_gram(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 { u[i - 1] } else { 0.0 };
            let r = if i + 1 < n { u[i + 1] } else { 0.0 };
            h * u[i] + (2.0 * u[i] - l - r) / h
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Continuation {
    pub initial: DiscreteField,
    pub solution: SpaceTimeField,
    /// `solution` with every value outside `G_{0,h} × (ε, T − ε)` set to zero.
    pub interior: SpaceTimeField,
    pub iterations: usize,
    /// Relative residual `‖r_j‖ / ‖rhs‖` after each CG iteration.
    pub residual_history: Vec<f64>,
    /// Weighted flux misfit of the returned solution.
    pub misfit: f64,
}

impl Continuation {
    /// `sqrt(Σ_n dt ‖ŷ − y‖²_{H²(G_{0,h})})` over the observation window.
    pub fn interior_error(&self, truth: &SpaceTimeField, region: &ObservationRegion) -> f64 {
        region_norm_sq(&self.solution.sub(truth), region).sqrt()
    }
}

fn mask(y: &SpaceTimeField, region: &ObservationRegion) -> SpaceTimeField {
    let mut out = SpaceTimeField::zeros(*y.grid(), *y.time());
    let nodes = region.nodes(y.grid());
    for n in region.levels(y.time()) {
        let src = y.level(n);
        let dst = out.level_mut(n);
        for i in nodes.clone() {
            dst[i] = src[i];
        }
    }
    out
}

/// Tikhonov-regularized continuation for one path: minimizes
/// `‖flux(y[u]) − η‖² + alpha ‖u‖²_{H¹}` over interior initial data `u` by
/// conjugate gradients on the normal equations.
pub fn continue_solution(
    problem: &ContinuationProblem,
    xi: &[f64],
    eta: &[f64],
    path: &SamplePath,
    settings: &ContinuationSettings,
) -> Result<Continuation> {
    if !(settings.alpha > 0.0) {
        return Err(invalid(format!("alpha must be positive, got {}", settings.alpha)));
    }
    let levels = problem.time.levels();
    if xi.len() != levels || eta.len() != levels {
        return Err(invalid(format!("xi and eta need {levels} values")));
    }
    if xi.iter().chain(eta).any(|v| !v.is_finite()) {
        return Err(invalid("lateral data has a non-finite value"));
    }
    let op = FluxOperator::new(problem, path)?;
    let n = op.unknowns();
    let h = problem.grid.h();
    let w = problem.time.dt().sqrt();

    let offset = op.weighted_flux(&op.solve(&vec![0.0; n], xi));
    let target: Vec<f64> = (0..op.outputs()).map(|k| w * eta[k] - offset[k]).collect();
    let rhs = op.apply_transpose(&target);
    let normal = |u: &[f64]| -> Vec<f64> {
        let mut out = op.apply_transpose(&op.apply(u));
        for (o, r) in out.iter_mut().zip(h1_gram(u, h)) {
            *o += settings.alpha * r;
        }
        out
    };

    let rhs_norm = dot(&rhs, &rhs).sqrt();
    let mut u = vec![0.0; n];
    let mut history = Vec::new();
    if rhs_norm > 0.0 {
        let mut r = rhs.clone();
        let mut d = r.clone();
        let mut rr = dot(&r, &r);
        let mut converged = false;
        for _ in 0..settings.max_iterations {
            let q = normal(&d);
            let step = rr / dot(&d, &q);
            for i in 0..n {
                u[i] += step * d[i];
                r[i] -= step * q[i];
            }
            let rr_next = dot(&r, &r);
            history.push(rr_next.sqrt() / rhs_norm);
            if rr_next.sqrt() <= settings.tolerance * rhs_norm {
                converged = true;
                break;
            }
            let beta = rr_next / rr;
            for i in 0..n {
                d[i] = r[i] + beta * d[i];
            }
            rr = rr_next;
        }
        if !converged {
            return Err(LabError::NonConvergence(format!(
                "CG stopped after {} iterations at relative residual {:.3e}; history: {:?}",
                settings.max_iterations,
                history.last().copied().unwrap_or(1.0),
                history
            )));
        }
    }

    let solution = op.solve(&u, xi);
    let fitted = op.weighted_flux(&solution);
    let misfit = fitted.iter().zip(&eta[..op.outputs()]).map(|(f, e)| (f - w * e).powi(2)).sum::<f64>().sqrt();
    let mut initial = vec![0.0; problem.grid.len()];
    initial[1..=n].copy_from_slice(&u);
    initial[n + 1] = xi[0];
    Ok(Continuation {
        initial: DiscreteField::new(problem.grid, initial)?,
        interior: mask(&solution, &problem.region),
        solution,
        iterations: history.len(),
        residual_history: history,
        misfit,
    })
}

/// Path-wise continuation of an ensemble of lateral data; `paths[k]` must be
/// the Brownian path that produced series `k`.
pub fn continue_ensemble(
    problem: &ContinuationProblem,
    data: &CauchyData,
    paths: &[SamplePath],
    settings: &ContinuationSettings,
    parallel: bool,
) -> Result<Vec<Continuation>> {
    if paths.len() != data.paths() {
        return Err(invalid(format!("{} paths for {} data series", paths.len(), data.paths())));
    }
    let one = |k: usize| continue_solution(problem, &data.xi[k], &data.eta[k], &paths[k], settings);
    if parallel {
        (0..paths.len()).into_par_iter().map(one).collect()
    } else {
        (0..paths.len()).map(one).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::data::lateral_trace;
    use crate::forward::{path_seed, sample_on, solve_forward, uniform_at, SpdeProblem};
    use std::f64::consts::PI;

    fn setup() -> (ContinuationProblem, SamplePath) {
        let g = GridSpec::new(1.0, 16).unwrap();
        let t = TimeGrid::new(0.5, 60).unwrap();
        let p = ContinuationProblem::new(g, t, ObservationRegion::new(0.5, 0.1)).with_coefficients(
            SpaceTimeData::Constant(0.3),
            SpaceTimeData::Constant(-0.4),
            SpaceTimeData::Constant(0.5),
        );
        (p, sample_on(t, path_seed(17, 0)))
    }

    fn truth(p: &ContinuationProblem, path: &SamplePath) -> SpaceTimeField {
        let right: Vec<f64> = (0..p.time.levels()).map(|n| 0.3 * p.time.time(n)).collect();
        let y0 = DiscreteField::from_fn(p.grid, |x| (PI * x).sin() + 0.5 * (2.0 * PI * x).sin());
        let fwd = SpdeProblem::new(p.grid, p.time)
            .with_initial(y0)
            .with_drift(p.a.clone(), p.b.clone())
            .with_noise_coefficient(p.c.clone())
            .with_boundary(None, Some(right));
        solve_forward(&fwd, path).unwrap()
    }

    #[test]
    fn affine_map_reproduces_forward_solver() {
        let (p, path) = setup();
        let y = truth(&p, &path);
        let (xi, _) = lateral_trace(&y);
        let op = FluxOperator::new(&p, &path).unwrap();
        let u = &y.level(0)[1..=16];
        let z = op.solve(u, &xi);
        for (a, b) in z.data().iter().zip(y.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn transpose_passes_inner_product_test() {
        let (p, path) = setup();
        let op = FluxOperator::new(&p, &path).unwrap();
        for trial in 0..5u64 {
            let u: Vec<f64> = (0..op.unknowns()).map(|i| uniform_at(trial, i as u64) - 0.5).collect();
            let v: Vec<f64> = (0..op.outputs()).map(|i| uniform_at(trial + 100, i as u64) - 0.5).collect();
            assert!(op.adjoint_mismatch(&u, &v) < 1e-10);
        }
    }

    #[test]
    fn zero_data_gives_zero_reconstruction() {
        let (p, path) = setup();
        let zeros = vec![0.0; p.time.levels()];
        for alpha in [1e-2, 1e-6] {
            let c = continue_solution(&p, &zeros, &zeros, &path, &ContinuationSettings::new(alpha)).unwrap();
            assert!(c.solution.data().iter().all(|&v| v == 0.0));
            assert_eq!(c.iterations, 0);
        }
    }

    #[test]
    fn recovery_improves_as_alpha_shrinks() {
        let (p, path) = setup();
        let y = truth(&p, &path);
        let (xi, eta) = lateral_trace(&y);
        let mut last = f64::INFINITY;
        for alpha in [1e-2, 1e-4, 1e-6] {
            let c = continue_solution(&p, &xi, &eta, &path, &ContinuationSettings::new(alpha)).unwrap();
            let err = c.interior_error(&y, &p.region);
            assert!(err < last, "alpha {alpha}: {err} vs {last}");
            last = err;
        }
    }

    #[test]
    fn rejects_bad_input() {
        let (p, path) = setup();
        let zeros = vec![0.0; p.time.levels()];
        assert!(continue_solution(&p, &zeros, &zeros, &path, &ContinuationSettings::new(0.0)).is_err());
        assert!(continue_solution(&p, &zeros[1..], &zeros, &path, &ContinuationSettings::new(1.0)).is_err());
    }

    #[test]
    fn iteration_budget_reports_history() {
        let (p, path) = setup();
        let y = truth(&p, &path);
        let (xi, eta) = lateral_trace(&y);
        let s = ContinuationSettings {
            max_iterations: 1,
            tolerance: 1e-14,
            ..ContinuationSettings::new(1e-8)
        };
        match continue_solution(&p, &xi, &eta, &path, &s) {
            Err(LabError::NonConvergence(msg)) => assert!(msg.contains("history")),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
