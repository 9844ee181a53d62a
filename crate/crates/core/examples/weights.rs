//! Evaluates the exponential weight on a mesh, shows how fast the discrete
//! derivative expansions converge, and builds the nested level sets used to
//! localize the lateral Cauchy problem.

use carleman_lab::grid::GridSpec;
use carleman_lab::time::TimeGrid;
use carleman_lab::weights::{
    eval_weights, expansion_residuals, level_sets, max_direct_s, minimal_level_count, LevelSetSpec, SpatialProfile, WeightSpec,
};

fn main() -> carleman_lab::Result<()> {
    let time = TimeGrid::new(1.0, 20)?;
    let w = WeightSpec::regular(-0.5, 0.5, 1.0, 1.0, 4.0);

    println!("expansion residuals (s = 4, lambda = 1)");
    for n in [31, 63, 127, 255] {
        let grid = GridSpec::new(1.0, n)?;
        let r = expansion_residuals(&w, &grid, &time)?;
        println!("  h = 1/{:3}  first {:.3e}  second {:.3e}", n + 1, r.res1, r.res2);
    }

    let grid = GridSpec::new(1.0, 31)?;
    let tables = eval_weights(&w, &grid, &time)?;
    println!("\nweight tables: {} values, direct evaluation safe up to s = {:.1}", tables.theta.len(), max_direct_s(&w, &grid, &time));

    let profile = SpatialProfile::default_for(&grid);
    let epsilon = 0.4;
    let (lo, hi) = LevelSetSpec::beta_band(profile.sup_norm, epsilon);
    let n_level = minimal_level_count(&profile, &grid, 0.5)?;
    let (spec, masks) = level_sets(&profile, 1.0, 0.5 * (lo + hi), epsilon, n_level, 1.0, &grid, &TimeGrid::new(2.0, 64)?)?;
    println!("\nlevel sets: N = {n_level}, beta in ({lo:.3}, {hi:.3}), mu = {:?}", spec.mu);
    for k in 1..=4 {
        println!("  Q{k}: {} space-time nodes", masks.count(k));
    }
    println!("  nested: {}", masks.is_nested());
    Ok(())
}
