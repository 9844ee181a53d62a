use super::{DiscreteField, GridSpec};

macro_rules! staggered_field {
    ($(#[$doc:meta])* $name:ident, first = $first:expr, len_extra = $extra:expr) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            grid: GridSpec,
            values: Vec<f64>,
        }

        impl $name {
            /// Global node index of the first stored value.
            pub const FIRST: usize = $first;

            pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Self {
                assert_eq!(values.len(), grid.n() + $extra, "wrong length for {}", stringify!($name));
                Self { grid, values }
            }

            fn build(grid: GridSpec, f: impl Fn(usize) -> f64) -> Self {
                let values = (Self::FIRST..Self::FIRST + grid.n() + $extra).map(f).collect();
                Self { grid, values }
            }

            pub fn grid(&self) -> &GridSpec {
                &self.grid
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            /// Value at global node index `i`.
            pub fn get(&self, i: usize) -> f64 {
                self.values[i - Self::FIRST]
            }

            /// Global node indices covered by this field.
            pub fn indices(&self) -> std::ops::Range<usize> {
                Self::FIRST..Self::FIRST + self.values.len()
            }

            pub fn pointwise_mul(&self, other: &Self) -> Self {
                Self {
                    grid: self.grid,
                    values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
                }
            }

            pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
                Self {
                    grid: self.grid,
                    values: self.values.iter().map(|&v| f(v)).collect(),
                }
            }

            /// `h` times the sum of all stored values.
            pub fn integrate(&self) -> f64 {
                self.grid.h() * self.values.iter().sum::<f64>()
            }

            pub fn max_abs(&self) -> f64 {
                self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
        }
    };
}

staggered_field!(
    /// Values on `G_h^- = {x_0, ..., x_N}`; forward operators land here.
    FieldOnMinus, first = 0, len_extra = 1
);
staggered_field!(
    /// Values on `{x_1, ..., x_{N+1}}`; backward operators land here.
    FieldOnPlus, first = 1, len_extra = 1
);
staggered_field!(
    /// Values on the interior nodes `G_h = {x_1, ..., x_N}`.
    InteriorField, first = 1, len_extra = 0
);

impl DiscreteField {
    /// `(m_h^+ u)_i = (u_{i+1} + u_i) / 2`
    pub fn avg_plus(&self) -> FieldOnMinus {
        let u = &self.values;
        FieldOnMinus::build(self.grid, |i| (u[i + 1] + u[i]) / 2.0)
    }

    /// `(m_h^- u)_i = (u_i + u_{i-1}) / 2`
    pub fn avg_minus(&self) -> FieldOnPlus {
        let u = &self.values;
        FieldOnPlus::build(self.grid, |i| (u[i] + u[i - 1]) / 2.0)
    }

    /// `(m_h u)_i = (u_{i+1} + 2 u_i + u_{i-1}) / 4`
    pub fn avg_center(&self) -> InteriorField {
        let u = &self.values;
        InteriorField::build(self.grid, |i| (u[i + 1] + 2.0 * u[i] + u[i - 1]) / 4.0)
    }

    /// `(D_h^+ u)_i = (u_{i+1} - u_i) / h`
    pub fn diff_plus(&self) -> FieldOnMinus {
        let (u, h) = (&self.values, self.grid.h());
        FieldOnMinus::build(self.grid, |i| (u[i + 1] - u[i]) / h)
    }

    /// `(D_h^- u)_i = (u_i - u_{i-1}) / h`
    pub fn diff_minus(&self) -> FieldOnPlus {
        let (u, h) = (&self.values, self.grid.h());
        FieldOnPlus::build(self.grid, |i| (u[i] - u[i - 1]) / h)
    }

    /// `(D_h u)_i = (u_{i+1} - u_{i-1}) / (2h)`
    pub fn diff_center(&self) -> InteriorField {
        let (u, h) = (&self.values, self.grid.h());
        InteriorField::build(self.grid, |i| (u[i + 1] - u[i - 1]) / (2.0 * h))
    }

    /// `(Δ_h u)_i = (u_{i+1} - 2 u_i + u_{i-1}) / h²`
    pub fn laplacian(&self) -> InteriorField {
        let (u, h) = (&self.values, self.grid.h());
        InteriorField::build(self.grid, |i| (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h))
    }

    /// Restriction to the interior nodes.
    pub fn interior(&self) -> InteriorField {
        let u = &self.values;
        InteriorField::build(self.grid, |i| u[i])
    }

    /// Restriction to `G_h^-`.
    pub fn on_minus(&self) -> FieldOnMinus {
        let u = &self.values;
        FieldOnMinus::build(self.grid, |i| u[i])
    }
}

impl FieldOnMinus {
    /// `m_h^-` applied to a field on `G_h^-`, giving interior values.
    pub fn avg_minus(&self) -> InteriorField {
        InteriorField::build(self.grid, |i| (self.get(i) + self.get(i - 1)) / 2.0)
    }

    pub fn diff_minus(&self) -> InteriorField {
        let h = self.grid.h();
        InteriorField::build(self.grid, |i| (self.get(i) - self.get(i - 1)) / h)
    }
}

impl FieldOnPlus {
    pub fn avg_plus(&self) -> InteriorField {
        InteriorField::build(self.grid, |i| (self.get(i + 1) + self.get(i)) / 2.0)
    }

    /// `D_h^+` applied to a field on `{x_1..x_{N+1}}`, giving interior values.
    pub fn diff_plus(&self) -> InteriorField {
        let h = self.grid.h();
        InteriorField::build(self.grid, |i| (self.get(i + 1) - self.get(i)) / h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(1.0, n).unwrap()
    }

    #[test]
    fn constant_and_linear_fields() {
        let g = grid(3);
        let c = DiscreteField::from_fn(g, |_| 2.5);
        assert!(c.diff_plus().values().iter().all(|&v| v == 0.0));

        let x = DiscreteField::from_fn(g, |x| x);
        assert_eq!(x.diff_plus().values(), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(x.diff_plus().indices(), 0..4);
        assert_eq!(x.diff_minus().indices(), 1..5);
        assert_eq!(x.laplacian().indices(), 1..4);
    }

    #[test]
    fn laplacian_of_quadratic_is_two() {
        for n in [3, 7, 20, 63] {
            let g = grid(n);
            let q = DiscreteField::from_fn(g, |x| x * x);
            for v in q.laplacian().values() {
                assert!((v - 2.0).abs() < 1e-9 * (n * n) as f64, "{v}");
            }
        }
    }

    #[test]
    fn diff_plus_hand_values() {
        let g = grid(3);
        let u = DiscreteField::new(g, vec![0.0, 1.0 / 16.0, 4.0 / 16.0, 9.0 / 16.0, 1.0]).unwrap();
        assert_eq!(u.diff_plus().values(), &[0.25, 0.75, 1.25, 1.75]);
    }

    #[test]
    fn compositions_match_node_by_node() {
        let g = grid(9);
        let u = DiscreteField::from_fn(g, |x| (3.0 * x).sin() + x * x * x);
        let lap = u.laplacian();
        let composed = u.diff_minus().diff_plus();
        for i in lap.indices() {
            assert!((lap.get(i) - composed.get(i)).abs() <= 1e-12 * lap.max_abs().max(1.0));
        }
        let dc = u.diff_center();
        let composed = u.diff_plus().avg_minus();
        for i in dc.indices() {
            assert!((dc.get(i) - composed.get(i)).abs() <= 1e-14 * dc.max_abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn operators_are_linear(
            n in 2usize..40,
            seed_u in prop::collection::vec(-10.0f64..10.0, 42),
            seed_v in prop::collection::vec(-10.0f64..10.0, 42),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let g = grid(n);
            let u = DiscreteField::new(g, seed_u[..n + 2].to_vec()).unwrap();
            let v = DiscreteField::new(g, seed_v[..n + 2].to_vec()).unwrap();
            let w = u.lin_comb(alpha, &v, beta);
            let scale = 1.0 / (g.h() * g.h());
            let check = |a: &[f64], b: &[f64], c: &[f64]| {
                for ((x, y), z) in a.iter().zip(b).zip(c) {
                    let err = (x - (alpha * y + beta * z)).abs();
                    prop_assert!(err <= 1e-12 * scale * 100.0, "err {}", err);
                }
                Ok(())
            };
            check(w.diff_plus().values(), u.diff_plus().values(), v.diff_plus().values())?;
            check(w.diff_minus().values(), u.diff_minus().values(), v.diff_minus().values())?;
            check(w.diff_center().values(), u.diff_center().values(), v.diff_center().values())?;
            check(w.laplacian().values(), u.laplacian().values(), v.laplacian().values())?;
            check(w.avg_plus().values(), u.avg_plus().values(), v.avg_plus().values())?;
            check(w.avg_minus().values(), u.avg_minus().values(), v.avg_minus().values())?;
            check(w.avg_center().values(), u.avg_center().values(), v.avg_center().values())?;
        }
    }
}
