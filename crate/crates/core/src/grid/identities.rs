//! Residual checks for the product rules and summation-by-parts formulas
//! of the mesh calculus.

use super::DiscreteField;
use crate::error::{LabError, Result};

/// Identity names in report order.
pub const IDENTITY_NAMES: [&str; 11] = [
    "avg_plus_expansion",
    "avg_center_expansion",
    "center_diff_factorization",
    "laplacian_factorization",
    "avg_plus_product",
    "diff_plus_product",
    "laplacian_product",
    "sbp_center_diff_quadratic",
    "sbp_laplacian",
    "sbp_weighted_laplacian",
    "sbp_center_diff_laplacian",
];

/// The last three summation-by-parts formulas need `v_0 = v_{N+1} = 0`.
const NEEDS_ZERO_BOUNDARY: [&str; 3] = [
    "sbp_center_diff_quadratic",
    "sbp_weighted_laplacian",
    "sbp_center_diff_laplacian",
];

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    /// `max|lhs - rhs| / (1 + max|lhs| + max|rhs|)`, or `None` when skipped.
    pub residual: Option<f64>,
    pub max_lhs: f64,
    pub max_rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn skipped(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| c.residual.is_none())
            .map(|c| c.name)
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter_map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    /// Turns skipped checks into a precondition error.
    pub fn require_complete(self) -> Result<Self> {
        let skipped = self.skipped();
        if skipped.is_empty() {
            Ok(self)
        } else {
            Err(LabError::Precondition(format!(
                "v must vanish at both boundary nodes; skipped: {}",
                skipped.join(", ")
            )))
        }
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &'static str, lhs: &[f64], rhs: &[f64]) -> IdentityCheck {
    debug_assert_eq!(lhs.len(), rhs.len());
    let max_abs = |xs: &[f64]| xs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diff = lhs
        .iter()
        .zip(rhs)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let (max_lhs, max_rhs) = (max_abs(lhs), max_abs(rhs));
    IdentityCheck {
        name,
        residual: Some(diff / (1.0 + max_lhs + max_rhs)),
        max_lhs,
        max_rhs,
    }
}

fn zip3(a: &[f64], b: &[f64], c: &[f64], f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).zip(c).map(|((x, y), z)| f(*x, *y, *z)).collect()
}

fn interior_integral(vals: impl Iterator<Item = f64>, h: f64) -> f64 {
    h * vals.sum::<f64>()
}

/// Evaluates both sides of every identity for the pair `(u, v)`.
///
/// The pointwise identities hold for arbitrary fields. Three of the
/// summation-by-parts formulas assume `v` vanishes on the boundary; when it
/// does not they are reported as skipped.
pub fn verify_identities(u: &DiscreteField, v: &DiscreteField) -> IdentityReport {
    assert_eq!(u.grid(), v.grid(), "fields must share a grid");
    let grid = *u.grid();
    let h = grid.h();
    let n = grid.n();
    let mut checks = Vec::with_capacity(IDENTITY_NAMES.len());

    let u_int = u.interior();
    let u_minus = u.on_minus();
    let dpu = u.diff_plus();
    let dpv = v.diff_plus();
    let mpu = u.avg_plus();
    let mpv = v.avg_plus();
    let lapu = u.laplacian();
    let lapv = v.laplacian();
    let dcu = u.diff_center();
    let dcv = v.diff_center();
    let mcu = u.avg_center();
    let mcv = v.avg_center();
    let uv = u.pointwise_mul(v);

    checks.push(check(
        IDENTITY_NAMES[0],
        mpu.values(),
        &zip3(u_minus.values(), dpu.values(), dpu.values(), |a, d, _| a + h / 2.0 * d),
    ));
    checks.push(check(
        IDENTITY_NAMES[1],
        mcu.values(),
        &zip3(u_int.values(), lapu.values(), lapu.values(), |a, l, _| a + h * h / 4.0 * l),
    ));
    checks.push(check(IDENTITY_NAMES[2], dcu.values(), dpu.avg_minus().values()));
    checks.push(check(
        IDENTITY_NAMES[3],
        lapu.values(),
        u.diff_minus().diff_plus().values(),
    ));

    let rhs: Vec<f64> = (0..=n)
        .map(|i| mpu.get(i) * mpv.get(i) + h * h / 4.0 * dpu.get(i) * dpv.get(i))
        .collect();
    checks.push(check(IDENTITY_NAMES[4], uv.avg_plus().values(), &rhs));

    let rhs: Vec<f64> = (0..=n)
        .map(|i| dpu.get(i) * mpv.get(i) + mpu.get(i) * dpv.get(i))
        .collect();
    checks.push(check(IDENTITY_NAMES[5], uv.diff_plus().values(), &rhs));

    let rhs: Vec<f64> = (1..=n)
        .map(|i| {
            lapu.get(i) * mcv.get(i) + 2.0 * dcu.get(i) * dcv.get(i) + mcu.get(i) * lapv.get(i)
        })
        .collect();
    checks.push(check(IDENTITY_NAMES[6], uv.laplacian().values(), &rhs));

    let zero_boundary = v.get(0) == 0.0 && v.get(n + 1) == 0.0;
    let skipped = |name: &'static str| IdentityCheck {
        name,
        residual: None,
        max_lhs: 0.0,
        max_rhs: 0.0,
    };
    let scalar = |name: &'static str, lhs: f64, rhs: f64| check(name, &[lhs], &[rhs]);
    let dpv_sq = dpv.pointwise_mul(&dpv);

    // 2 ∫_G u v D v = -∫_G (D u) v² + h²/2 ∫_{G^-} (D⁺u) |D⁺v|²
    if zero_boundary {
        let lhs = 2.0 * interior_integral((1..=n).map(|i| u.get(i) * v.get(i) * dcv.get(i)), h);
        let rhs = -interior_integral((1..=n).map(|i| dcu.get(i) * v.get(i) * v.get(i)), h)
            + h * h / 2.0 * dpu.pointwise_mul(&dpv_sq).integrate();
        checks.push(scalar(IDENTITY_NAMES[7], lhs, rhs));
    } else {
        checks.push(skipped(IDENTITY_NAMES[7]));
    }

    // ∫_G u Δv = -∫_{G^-} D⁺u D⁺v - u_0 (D⁺v)_0 + u_{N+1} (D⁻v)_{N+1}; any v.
    let lhs = u_int.pointwise_mul(&lapv).integrate();
    let rhs = -dpu.pointwise_mul(&dpv).integrate() - u.get(0) * dpv.get(0)
        + u.get(n + 1) * v.diff_minus().get(n + 1);
    checks.push(scalar(IDENTITY_NAMES[8], lhs, rhs));

    // ∫_G u v Δv = -∫_{G^-} m⁺u |D⁺v|² + 1/2 ∫_G Δu v²
    if zero_boundary {
        let lhs = interior_integral((1..=n).map(|i| u.get(i) * v.get(i) * lapv.get(i)), h);
        let rhs = -mpu.pointwise_mul(&dpv_sq).integrate()
            + 0.5 * interior_integral((1..=n).map(|i| lapu.get(i) * v.get(i) * v.get(i)), h);
        checks.push(scalar(IDENTITY_NAMES[9], lhs, rhs));
    } else {
        checks.push(skipped(IDENTITY_NAMES[9]));
    }

    // 2 ∫_G u Dv Δv = -∫_{G^-} D⁺u |D⁺v|² + u_{N+1} |(D⁻v)_{N+1}|² - u_0 |(D⁺v)_0|²
    if zero_boundary {
        let lhs = 2.0 * u_int.pointwise_mul(&dcv).pointwise_mul(&lapv).integrate();
        let dmv_end = v.diff_minus().get(n + 1);
        let rhs = -dpu.pointwise_mul(&dpv_sq).integrate() + u.get(n + 1) * dmv_end * dmv_end
            - u.get(0) * dpv.get(0) * dpv.get(0);
        checks.push(scalar(IDENTITY_NAMES[10], lhs, rhs));
    } else {
        checks.push(skipped(IDENTITY_NAMES[10]));
    }

    debug_assert!(checks
        .iter()
        .filter(|c| c.residual.is_none())
        .all(|c| NEEDS_ZERO_BOUNDARY.contains(&c.name)));
    IdentityReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn zero_fields_give_zero_residuals() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let z = DiscreteField::zeros(g);
        let r = verify_identities(&z, &z).require_complete().unwrap();
        assert_eq!(r.checks.len(), IDENTITY_NAMES.len());
        assert!(r.checks.iter().all(|c| c.residual == Some(0.0)));
    }

    #[test]
    fn linear_and_vanishing_quadratic() {
        let g = GridSpec::new(2.0, 16).unwrap();
        let u = DiscreteField::from_fn(g, |x| 3.0 * x - 1.0);
        let v = DiscreteField::from_fn(g, |x| x * (2.0 - x));
        let r = verify_identities(&u, &v);
        assert!(r.skipped().is_empty());
        assert!(r.max_residual() <= 1e-12, "{r:?}");
    }

    #[test]
    fn nonzero_boundary_skips_three() {
        let g = GridSpec::new(1.0, 6).unwrap();
        let u = DiscreteField::from_fn(g, |x| x.exp());
        let v = DiscreteField::from_fn(g, |x| 1.0 + x);
        let r = verify_identities(&u, &v);
        assert_eq!(r.skipped(), NEEDS_ZERO_BOUNDARY.to_vec());
        assert!(r.get("sbp_laplacian").unwrap().residual.unwrap() <= 1e-12);
        let err = r.require_complete().unwrap_err();
        assert!(matches!(err, LabError::Precondition(ref m) if m.contains("sbp_weighted_laplacian")));
    }
}
