//! Uniform 1-D mesh and the exact finite-difference calculus on it.
//!
//! The mesh is `0 = x_0 < x_1 < ... < x_{N+1} = L` with `h = L / (N + 1)`.
//! Four node sets appear throughout:
//!
//! | set        | indices      | field type        |
//! |------------|--------------|-------------------|
//! | closure    | `0..=N+1`    | [`DiscreteField`] |
//! | `G_h^-`    | `0..=N`      | [`FieldOnMinus`]  |
//! | `G_h^+`    | `1..=N+1`    | [`FieldOnPlus`]   |
//! | interior   | `1..=N`      | [`InteriorField`] |
//!
//! One-sided operators return the staggered types, so mixing index ranges
//! is a type error instead of an off-by-one.

mod identities;
mod ops;

pub use identities::{verify_identities, IdentityCheck, IdentityReport, IDENTITY_NAMES};
pub use ops::{FieldOnMinus, FieldOnPlus, InteriorField};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    length: f64,
    interior: usize,
    h: f64,
}

impl GridSpec {
    /// Builds the mesh with `n` interior nodes on `[0, length]`.
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid(format!("grid length must be positive, got {length}")));
        }
        if n < 2 {
            return Err(invalid(format!("grid needs at least 2 interior nodes, got {n}")));
        }
        Ok(Self {
            length,
            interior: n,
            h: length / (n + 1) as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of interior nodes `N`.
    pub fn n(&self) -> usize {
        self.interior
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of nodes in the closure, `N + 2`.
    pub fn len(&self) -> usize {
        self.interior + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i`; the last node is pinned to `L` exactly.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.interior + 1 {
            self.length
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }
}

/// One real value per node of the closed mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "field needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().into_iter().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `alpha * self + beta * other`, node by node.
    pub fn lin_comb(&self, alpha: f64, other: &DiscreteField, beta: f64) -> DiscreteField {
        debug_assert_eq!(self.grid, other.grid);
        DiscreteField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        }
    }

    pub fn pointwise_mul(&self, other: &DiscreteField) -> DiscreteField {
        debug_assert_eq!(self.grid, other.grid);
        DiscreteField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    /// `h * sum_{i=1}^{N} u_i`
    pub fn integrate_gh(&self) -> f64 {
        self.grid.h * self.values[1..=self.grid.n()].iter().sum::<f64>()
    }

    pub fn norms(&self) -> Norms {
        Norms::of(self)
    }
}

/// Discrete norms of a field. The squared forms are kept alongside the roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
    pub h1: f64,
    pub h2: f64,
    pub l2_sq: f64,
    pub h1_sq: f64,
    pub h2_sq: f64,
}

impl Norms {
    pub fn of(u: &DiscreteField) -> Self {
        let n = u.grid.n();
        let l2_sq = u.pointwise_mul(u).integrate_gh();
        let dp = u.diff_plus();
        let grad_sq = dp.pointwise_mul(&dp).integrate();
        let lap = u.laplacian();
        let lap_sq = lap.pointwise_mul(&lap).integrate();
        let linf = u.values[1..=n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let h1_sq = grad_sq + l2_sq;
        let h2_sq = lap_sq + h1_sq;
        Norms {
            l2: l2_sq.sqrt(),
            linf,
            h1: h1_sq.sqrt(),
            h2: h2_sq.sqrt(),
            l2_sq,
            h1_sq,
            h2_sq,
        }
    }
}
