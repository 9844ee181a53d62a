//! Checks the discrete product rules and summation-by-parts identities on a
//! pair of random mesh functions for a range of mesh sizes.

use carleman_lab::forward::uniform_at;
use carleman_lab::grid::{verify_identities, DiscreteField, GridSpec};

fn main() -> carleman_lab::Result<()> {
    for n in [4, 16, 64, 256] {
        let grid = GridSpec::new(1.0, n)?;
        let u = DiscreteField::from_fn(grid, |x| (7.0 * x).sin() + x * x);
        let mut v: Vec<f64> = (0..grid.len()).map(|i| uniform_at(n as u64, i as u64) - 0.5).collect();
        // zero boundary values unlock the summation-by-parts checks
        v[0] = 0.0;
        v[n + 1] = 0.0;
        let report = verify_identities(&u, &DiscreteField::new(grid, v)?).require_complete()?;
        println!("N = {n:4}  worst normalized residual {:.2e}", report.max_residual());
        for c in &report.checks {
            println!("    {:28} {:.2e}", c.name, c.residual.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
