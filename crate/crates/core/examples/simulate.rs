//! Monte-Carlo simulation of the stochastic heat equation with multiplicative
//! noise. Prints the sample mean and its standard error at the midpoint,
//! next to the deterministic solution that the mean should track.

use carleman_lab::forward::{ensemble_map, expectation, solve_forward, SamplePath, SpdeProblem};
use carleman_lab::grid::{DiscreteField, GridSpec};
use carleman_lab::time::{SpaceTimeData, TimeGrid};
use std::f64::consts::PI;

fn main() -> carleman_lab::Result<()> {
    let grid = GridSpec::new(1.0, 31)?;
    let time = TimeGrid::new(0.2, 200)?;
    let problem = SpdeProblem::new(grid, time)
        .with_initial(DiscreteField::from_fn(grid, |x| (PI * x).sin()))
        .with_drift(SpaceTimeData::Constant(0.5), SpaceTimeData::Zero)
        .with_noise_coefficient(SpaceTimeData::Constant(0.8));

    let mid = 16;
    let stride = 40;
    let samples = 2000;
    let traces = ensemble_map(&problem, samples, 42, true, |_, _, y| {
        (0..time.levels()).step_by(stride).map(|n| y.get(n, mid)).collect::<Vec<_>>()
    })?;
    let mean_solution = solve_forward(&problem, &SamplePath::frozen(time))?;

    println!("{:>6} {:>12} {:>10} {:>12}", "t", "E[y]", "std err", "noise-free");
    for (j, n) in (0..time.levels()).step_by(stride).enumerate() {
        let est = expectation(&traces.iter().map(|t| t[j]).collect::<Vec<_>>());
        println!(
            "{:6.3} {:12.6} {:10.2e} {:12.6}",
            time.time(n),
            est.mean,
            est.se_or_inf(),
            mean_solution.get(n, mid)
        );
    }
    Ok(())
}
