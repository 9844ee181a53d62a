use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, LabError, Result};
use crate::forward::{boundary_flux, ForwardSolver, SamplePath, SpdeProblem};
use crate::grid::DiscreteField;
use crate::time::{SpaceTimeData, SpaceTimeField};

/// Ridge estimate of the time profile `r` of a source `r(t) R(x)` from the
/// boundary flux and terminal state observed along one known path.
///
/// The forward map `r ↦ (flux at levels 1..=K, y(T) at interior nodes)` is
/// affine; its columns are built by one solve per unknown. Rows are weighted
/// by `dt` and `h` to match the observation norms. Returns `r` at levels
/// `0..K` (the value at `T` never enters the scheme).
pub fn reconstruct_time_profile(
    base: &SpdeProblem,
    space: &DiscreteField,
    path: &SamplePath,
    flux: &[f64],
    terminal: &DiscreteField,
    alpha: f64,
) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(invalid(format!("ridge parameter must be positive, got {alpha}")));
    }
    let (grid, time) = (base.grid, base.time);
    let k = time.steps();
    if flux.len() != time.levels() {
        return Err(invalid("flux series must have one value per time level"));
    }
    let rows = k + grid.n();
    let (wf, wt) = (time.dt().sqrt(), grid.h().sqrt());
    let observe = |y: &SpaceTimeField| -> Vec<f64> {
        let fl = boundary_flux(y);
        let mut v: Vec<f64> = fl[1..].iter().map(|x| wf * x).collect();
        v.extend((1..=grid.n()).map(|i| wt * y.get(k, i)));
        v
    };
    let offset = {
        let p = base.clone().with_sources(base.f.clone(), SpaceTimeData::Zero);
        observe(&ForwardSolver::new(&p)?.solve(path)?)
    };
    let linear = SpdeProblem {
        f: SpaceTimeData::Zero,
        initial: DiscreteField::zeros(grid),
        ..base.clone()
    };
    let mut a = DMatrix::zeros(rows, k);
    for col in 0..k {
        let mut unit = vec![0.0; time.levels()];
        unit[col] = 1.0;
        let p = linear.clone().with_sources(
            SpaceTimeData::Zero,
            SpaceTimeData::Separable {
                time: unit,
                space: space.values().to_vec(),
            },
        );
        let obs = observe(&ForwardSolver::new(&p)?.solve(path)?);
        a.set_column(col, &DVector::from_vec(obs));
    }
    let mut d: Vec<f64> = flux[1..].iter().map(|x| wf * x).collect();
    d.extend((1..=grid.n()).map(|i| wt * terminal.get(i)));
    let rhs = DVector::from_iterator(rows, d.iter().zip(&offset).map(|(x, o)| x - o));
    let normal = a.transpose() * &a + DMatrix::identity(k, k) * alpha;
    let chol = normal
        .cholesky()
        .ok_or_else(|| LabError::NonConvergence("normal matrix is not positive definite".into()))?;
    Ok(chol.solve(&(a.transpose() * rhs)).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::sample_on;
    use crate::inverse::SourceFamily;

    #[test]
    fn recovers_profile_from_exact_data() {
        let fam = SourceFamily {
            steps: 16,
            ..SourceFamily::default()
        };
        let p = fam.problem(1.0 / 8.0).unwrap();
        let (src, _) = fam.pair(0, &p.grid, &p.time).unwrap();
        let path = sample_on(p.time, 77);
        let truth = p.clone().with_sources(SpaceTimeData::Zero, src.to_data());
        let y = ForwardSolver::new(&truth).unwrap().solve(&path).unwrap();
        let flux = boundary_flux(&y);
        let est = reconstruct_time_profile(&p, &src.space, &path, &flux, &y.field(p.time.steps()), 1e-12).unwrap();
        let err = est.iter().zip(&src.r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-5, "max error {err}");
    }
}
