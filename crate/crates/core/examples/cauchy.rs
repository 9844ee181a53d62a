//! Lateral Cauchy problem. Fits the Hölder exponent linking the interior
//! norm to the size of the lateral data on a decaying time-harmonic family,
//! then continues one solution inward from its lateral data alone.

use carleman_lab::cauchy::{
    continue_solution, holder_experiment, lateral_trace, ContinuationProblem, ContinuationSettings, HarmonicFamily,
    ObservationRegion,
};
use carleman_lab::forward::{path_seed, sample_on, solve_forward, SpdeProblem};
use carleman_lab::grid::{DiscreteField, GridSpec};
use carleman_lab::time::{SpaceTimeData, TimeGrid};
use std::f64::consts::PI;

fn main() -> carleman_lab::Result<()> {
    let family = HarmonicFamily::default();
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let exp = holder_experiment(&family, &HarmonicFamily::default_frequencies(), h, 20, 1, true)?;
        let fit = exp.fit.expect("enough records");
        println!(
            "h = {h:.5}: kappa {:.4}, R² {:.4}, data spans {:.1} decades",
            fit.kappa, fit.r_squared, exp.decades
        );
        for r in exp.records.iter().step_by(3) {
            println!("    omega {:7.2}  data {:.3e}  interior {:.3e}", r.scale, r.data_norm, r.interior_norm);
        }
    }

    // continuation: y(0) unknown, only ξ and η at the right end observed
    let grid = GridSpec::new(1.0, 16)?;
    let time = TimeGrid::new(0.5, 60)?;
    let region = ObservationRegion::new(0.5, 0.1);
    let c = SpaceTimeData::Constant(0.5);
    let path = sample_on(time, path_seed(11, 0));
    let truth = solve_forward(
        &SpdeProblem::new(grid, time)
            .with_initial(DiscreteField::from_fn(grid, |x| (PI * x).sin() + 0.5 * (2.0 * PI * x).sin()))
            .with_noise_coefficient(c.clone())
            .with_boundary(None, Some((0..time.levels()).map(|n| 0.3 * time.time(n)).collect())),
        &path,
    )?;
    let (xi, eta) = lateral_trace(&truth);
    let problem = ContinuationProblem::new(grid, time, region).with_coefficients(SpaceTimeData::Zero, SpaceTimeData::Zero, c);
    println!("\ncontinuation on N = 16:");
    for alpha in [1e-2, 1e-4, 1e-6] {
        let rec = continue_solution(&problem, &xi, &eta, &path, &ContinuationSettings::new(alpha))?;
        println!(
            "  alpha {alpha:.0e}: interior error {:.3e}, CG iterations {}",
            rec.interior_error(&truth, &region),
            rec.iterations
        );
    }
    Ok(())
}
