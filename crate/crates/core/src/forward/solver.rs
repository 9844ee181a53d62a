use super::{SamplePath, SpdeProblem};
use crate::error::{invalid, Result};
use crate::time::SpaceTimeField;

/// LU factors of the constant symmetric tridiagonal matrix
/// `diag(d) + offdiag(e)` of size `n` (Thomas algorithm).
#[derive(Debug, Clone)]
pub struct TridiagonalFactor {
    off: f64,
    /// Modified super-diagonal `c'_i`.
    upper: Vec<f64>,
    /// `1 / (d - e c'_{i-1})`
    inv_pivot: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn new(n: usize, diag: f64, off: f64) -> Self {
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = diag - off * prev;
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = off * inv_pivot[i];
            prev = upper[i];
        }
        TridiagonalFactor {
            off,
            upper,
            inv_pivot,
        }
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        debug_assert_eq!(n, self.upper.len());
        let mut prev = 0.0;
        for i in 0..n {
            rhs[i] = (rhs[i] - self.off * prev) * self.inv_pivot[i];
            prev = rhs[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}

/// Semi-implicit Euler–Maruyama stepping for [`SpdeProblem`]:
///
/// ```text
/// (I - dt Δ_h) y^{n+1} = y^n + dt (a y^n + b D_h⁺y^n + f^n) + (c y^n + g^n) ΔB_n
/// ```
///
/// Diffusion is implicit; drift and noise use the left endpoint, so the
/// scheme is adapted. Boundary values are imposed at every level.
#[derive(Debug, Clone)]
pub struct ForwardSolver<'a> {
    problem: &'a SpdeProblem,
    factor: TridiagonalFactor,
}

impl<'a> ForwardSolver<'a> {
    pub fn new(problem: &'a SpdeProblem) -> Result<Self> {
        problem.validate()?;
        let h = problem.grid.h();
        let mu = problem.time.dt() / (h * h);
        Ok(ForwardSolver {
            problem,
            factor: TridiagonalFactor::new(problem.grid.n(), 1.0 + 2.0 * mu, -mu),
        })
    }

    pub fn problem(&self) -> &SpdeProblem {
        self.problem
    }

    pub fn solve(&self, path: &SamplePath) -> Result<SpaceTimeField> {
        let p = self.problem;
        let mut out = SpaceTimeField::zeros(p.grid, p.time);
        self.solve_into(path, &mut out)?;
        Ok(out)
    }

    /// Solves into a preallocated table (every level is overwritten).
    pub fn solve_into(&self, path: &SamplePath, out: &mut SpaceTimeField) -> Result<()> {
        let p = self.problem;
        if path.time != p.time {
            return Err(invalid("sample path and problem use different time grids"));
        }
        if out.grid() != &p.grid || out.time() != &p.time {
            return Err(invalid("output table has the wrong shape"));
        }
        let n_int = p.grid.n();
        let h = p.grid.h();
        let dt = p.time.dt();
        let mu = dt / (h * h);
        let mut rhs = vec![0.0; n_int];

        {
            let y0 = out.level_mut(0);
            y0.copy_from_slice(p.initial.values());
            y0[0] = p.gamma_left_at(0);
            y0[n_int + 1] = p.gamma_right_at(0);
        }
        let drift_free = p.a.is_zero() && p.b.is_zero() && p.f.is_zero();
        let noise_free = p.c.is_zero() && p.g.is_zero();

        for n in 0..p.time.steps() {
            let db = path.increments[n];
            let (left_next, right_next) = (p.gamma_left_at(n + 1), p.gamma_right_at(n + 1));
            {
                let y = out.level(n);
                for i in 1..=n_int {
                    let yi = y[i];
                    let mut v = yi;
                    if !drift_free {
                        let dp = (y[i + 1] - yi) / h;
                        v += dt * (p.a.value(n, i) * yi + p.b.value(n, i) * dp + p.f.value(n, i));
                    }
                    if !noise_free {
                        v += (p.c.value(n, i) * yi + p.g.value(n, i)) * db;
                    }
                    rhs[i - 1] = v;
                }
            }
            rhs[0] += mu * left_next;
            rhs[n_int - 1] += mu * right_next;
            self.factor.solve_in_place(&mut rhs);
            let next = out.level_mut(n + 1);
            next[0] = left_next;
            next[1..=n_int].copy_from_slice(&rhs);
            next[n_int + 1] = right_next;
        }
        Ok(())
    }
}

/// Solves one path of `problem`.
pub fn solve_forward(problem: &SpdeProblem, path: &SamplePath) -> Result<SpaceTimeField> {
    ForwardSolver::new(problem)?.solve(path)
}
