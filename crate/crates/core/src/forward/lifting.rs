use super::{solve_forward, SamplePath, SpdeProblem};
use crate::error::{invalid, Result};
use crate::grid::GridSpec;
use crate::time::{h1_time_norm, l2_time_norm, SpaceTimeField, TimeGrid};

/// Solution of the deterministic heat equation with zero initial data and the
/// given boundary values, used to homogenize the boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Lifting {
    pub u: SpaceTimeField,
    /// `(D_h⁻u)_{N+1}` at every time level.
    pub flux: Vec<f64>,
    pub bounds: LiftingBounds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftingBounds {
    /// `(∫_0^T ‖u‖²_{H¹(G_h)} dt)^{1/2}`
    pub u_norm: f64,
    /// `‖(D_h⁻u)_{N+1}‖_{L²(0,T)}`
    pub flux_norm: f64,
    /// `‖γ_1‖_{H¹(0,T)} + ‖γ_2‖_{H¹(0,T)}`
    pub data_norm: f64,
    /// `max(u_norm, flux_norm) / data_norm`; zero when the data vanish.
    pub constant: f64,
}

/// Implicit Euler solve of `du - Δ_h u dt = 0`, `u(0) = 0`,
/// `u_0 = γ_1`, `u_{N+1} = γ_2`.
pub fn solve_deterministic_lifting(
    gamma_left: &[f64],
    gamma_right: &[f64],
    grid: GridSpec,
    horizon: f64,
    steps: usize,
) -> Result<Lifting> {
    let time = TimeGrid::new(horizon, steps)?;
    if gamma_left.first().copied().unwrap_or(0.0) != 0.0 || gamma_right.first().copied().unwrap_or(0.0) != 0.0 {
        return Err(invalid("lifting needs gamma_1(0) = gamma_2(0) = 0"));
    }
    let p = SpdeProblem::new(grid, time).with_boundary(Some(gamma_left.to_vec()), Some(gamma_right.to_vec()));
    let u = solve_forward(&p, &SamplePath::frozen(time))?;
    let flux = boundary_flux(&u);
    let dt = time.dt();
    let u_norm = (dt * (0..time.steps()).map(|n| u.field(n).norms().h1_sq).sum::<f64>()).sqrt();
    let flux_norm = l2_time_norm(&flux, dt);
    let data_norm = h1_time_norm(gamma_left, dt) + h1_time_norm(gamma_right, dt);
    let constant = if data_norm > 0.0 {
        u_norm.max(flux_norm) / data_norm
    } else {
        0.0
    };
    Ok(Lifting {
        u,
        flux,
        bounds: LiftingBounds {
            u_norm,
            flux_norm,
            data_norm,
            constant,
        },
    })
}

/// `(D_h⁻y)_{N+1} = (y_{N+1} - y_N) / h` at every time level.
pub fn boundary_flux(y: &SpaceTimeField) -> Vec<f64> {
    let g = y.grid();
    let (n, h) = (g.n(), g.h());
    (0..y.time().levels())
        .map(|k| (y.get(k, n + 1) - y.get(k, n)) / h)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let l = solve_deterministic_lifting(&[0.0; 11], &[0.0; 11], g, 1.0, 10).unwrap();
        assert!(l.u.data().iter().all(|&v| v == 0.0));
        assert!(l.flux.iter().all(|&v| v == 0.0));
        assert_eq!(l.bounds.constant, 0.0);
    }

    #[test]
    fn ramp_is_bounded_and_linear() {
        let k = 200;
        let gr: Vec<f64> = (0..=k).map(|n| n as f64 / k as f64).collect();
        let zeros = vec![0.0; k + 1];
        let mut consts = Vec::new();
        for n in [7, 15, 31] {
            let g = GridSpec::new(1.0, n).unwrap();
            let l = solve_deterministic_lifting(&zeros, &gr, g, 1.0, k).unwrap();
            assert!(l.bounds.u_norm.is_finite() && l.bounds.flux_norm.is_finite());
            assert!(l.bounds.constant > 0.0);
            consts.push(l.bounds.constant);
            let doubled: Vec<f64> = gr.iter().map(|v| 2.0 * v).collect();
            let l2 = solve_deterministic_lifting(&zeros, &doubled, g, 1.0, k).unwrap();
            for (a, b) in l.u.data().iter().zip(l2.u.data()) {
                assert!((2.0 * a - b).abs() <= 1e-13 * (1.0 + b.abs()));
            }
        }
        let (lo, hi) = consts.iter().fold((f64::MAX, 0.0_f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi / lo < 2.0, "{consts:?}");
    }

    #[test]
    fn incompatible_data_rejected() {
        let g = GridSpec::new(1.0, 4).unwrap();
        assert!(solve_deterministic_lifting(&[1.0; 3], &[0.0; 3], g, 1.0, 2).is_err());
    }
}
