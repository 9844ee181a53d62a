//! Random separable source pairs: checks the gradient-domination condition,
//! measures the source-gap/data-gap ratio on four meshes, and reconstructs
//! the time profile of one source from its lateral flux and terminal data.

use carleman_lab::forward::{boundary_flux, path_seed, sample_on, solve_forward};
use carleman_lab::inverse::{check_gradient_domination, reconstruct_time_profile, uniformity_sweep, SourceFamily};

fn main() -> carleman_lab::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let family = SourceFamily::default();
    let h_grid = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let table = uniformity_sweep(&family, &h_grid, 8, samples, 3, true, 2.0)?;
    for (h, max) in &table.per_h_max {
        println!("h = {h:.5}  max ratio {:?}", max);
    }
    println!("spread {:?} -> {:?}", table.spread, table.verdict);

    // one pair on the coarsest mesh
    let base = family.problem(1.0 / 16.0)?;
    let (s1, s2) = family.pair(0, &base.grid, &base.time)?;
    let dom = check_gradient_domination(&s1.to_data(), &s2.to_data(), &base.grid, &base.time);
    println!("\npair 0: domination holds = {}, constant {:.3}", dom.holds, dom.best_constant);

    let path = sample_on(base.time, path_seed(3, 0));
    let forced = base.clone().with_sources(base.f.clone(), s1.to_data());
    let y = solve_forward(&forced, &path)?;
    let flux = boundary_flux(&y);
    let terminal = y.field(base.time.steps());
    let r = reconstruct_time_profile(&base, &s1.space, &path, &flux, &terminal, 1e-12)?;
    let err = r.iter().zip(&s1.r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("time profile recovered from one path, max error {err:.2e}");
    Ok(())
}
