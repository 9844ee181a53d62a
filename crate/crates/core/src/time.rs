//! Uniform time grid and space-time tables.

use crate::error::{invalid, Result};
use crate::grid::{DiscreteField, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    dt: f64,
}

impl TimeGrid {
    /// `steps` uniform steps on `[0, horizon]`; `dt = horizon / steps`.
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(format!("time horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(invalid("need at least one time step"));
        }
        Ok(Self {
            horizon,
            steps,
            dt: horizon / steps as f64,
        })
    }

    /// Smallest uniform grid whose step does not exceed `dt`.
    pub fn with_max_step(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        if dt > horizon {
            return Err(invalid(format!("time step {dt} exceeds horizon {horizon}")));
        }
        let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
        Self::new(horizon, steps)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `K`; there are `K + 1` time levels.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.horizon
        } else {
            n as f64 * self.dt
        }
    }

    pub fn levels(&self) -> usize {
        self.steps + 1
    }
}

/// `(dt Σ_{n<K} v_n²)^{1/2}`, the left-endpoint rectangle rule.
pub fn l2_time_norm(series: &[f64], dt: f64) -> f64 {
    let k = series.len().saturating_sub(1);
    (dt * series[..k].iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// `(dt Σ_{n<K} v_n² + dt Σ_{n<K} ((v_{n+1} - v_n)/dt)²)^{1/2}` with forward
/// differences in time.
pub fn h1_time_norm(series: &[f64], dt: f64) -> f64 {
    let l2 = l2_time_norm(series, dt);
    let d: f64 = series.windows(2).map(|w| ((w[1] - w[0]) / dt).powi(2)).sum();
    (l2 * l2 + dt * d).sqrt()
}

/// One closed-mesh field per time level, stored level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: GridSpec,
    time: TimeGrid,
    data: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: GridSpec, time: TimeGrid) -> Self {
        Self {
            grid,
            time,
            data: vec![0.0; grid.len() * time.levels()],
        }
    }

    pub fn from_fn(grid: GridSpec, time: TimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid, time);
        for n in 0..time.levels() {
            let t = time.time(n);
            for (i, v) in out.level_mut(n).iter_mut().enumerate() {
                *v = f(grid.node(i), t);
            }
        }
        out
    }

    pub fn from_levels(grid: GridSpec, time: TimeGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() * time.levels() {
            return Err(invalid(format!(
                "space-time table needs {} values, got {}",
                grid.len() * time.levels(),
                data.len()
            )));
        }
        Ok(Self { grid, time, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn level(&self, n: usize) -> &[f64] {
        let w = self.grid.len();
        &self.data[n * w..(n + 1) * w]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        let w = self.grid.len();
        &mut self.data[n * w..(n + 1) * w]
    }

    pub fn get(&self, n: usize, i: usize) -> f64 {
        self.data[n * self.grid.len() + i]
    }

    pub fn field(&self, n: usize) -> DiscreteField {
        DiscreteField::new(self.grid, self.level(n).to_vec()).expect("level has grid length")
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `self - other`, level by level.
    pub fn sub(&self, other: &SpaceTimeField) -> SpaceTimeField {
        assert_eq!(self.data.len(), other.data.len());
        SpaceTimeField {
            grid: self.grid,
            time: self.time,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Coefficient or source data sampled on the closed mesh at every time level.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceTimeData {
    Zero,
    Constant(f64),
    /// Time-independent nodal values (length `N + 2`).
    Static(Vec<f64>),
    /// `time[n] * space[i]`.
    Separable { time: Vec<f64>, space: Vec<f64> },
    Table(SpaceTimeField),
}

impl SpaceTimeData {
    pub fn value(&self, n: usize, i: usize) -> f64 {
        match self {
            SpaceTimeData::Zero => 0.0,
            SpaceTimeData::Constant(c) => *c,
            SpaceTimeData::Static(v) => v[i],
            SpaceTimeData::Separable { time, space } => time[n] * space[i],
            SpaceTimeData::Table(t) => t.get(n, i),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SpaceTimeData::Zero => true,
            SpaceTimeData::Constant(c) => *c == 0.0,
            SpaceTimeData::Static(v) => v.iter().all(|&x| x == 0.0),
            SpaceTimeData::Separable { time, space } => {
                time.iter().all(|&x| x == 0.0) || space.iter().all(|&x| x == 0.0)
            }
            SpaceTimeData::Table(t) => t.data().iter().all(|&x| x == 0.0),
        }
    }

    /// Multiplies every value by `alpha`.
    pub fn scaled(&self, alpha: f64) -> SpaceTimeData {
        match self {
            SpaceTimeData::Zero => SpaceTimeData::Zero,
            SpaceTimeData::Constant(c) => SpaceTimeData::Constant(alpha * c),
            SpaceTimeData::Static(v) => SpaceTimeData::Static(v.iter().map(|x| alpha * x).collect()),
            SpaceTimeData::Separable { time, space } => SpaceTimeData::Separable {
                time: time.iter().map(|x| alpha * x).collect(),
                space: space.clone(),
            },
            SpaceTimeData::Table(t) => {
                let mut t = t.clone();
                t.scale(alpha);
                SpaceTimeData::Table(t)
            }
        }
    }

    /// Checks table shapes against the grids and that every value is finite.
    pub fn validate(&self, what: &str, grid: &GridSpec, time: &TimeGrid) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match self {
            SpaceTimeData::Zero => true,
            SpaceTimeData::Constant(c) => c.is_finite(),
            SpaceTimeData::Static(v) => {
                if v.len() != grid.len() {
                    return Err(invalid(format!("{what}: expected {} nodal values", grid.len())));
                }
                finite(v)
            }
            SpaceTimeData::Separable { time: tv, space } => {
                if tv.len() != time.levels() || space.len() != grid.len() {
                    return Err(invalid(format!("{what}: separable table has wrong shape")));
                }
                finite(tv) && finite(space)
            }
            SpaceTimeData::Table(t) => {
                if t.grid() != grid || t.time() != time {
                    return Err(invalid(format!("{what}: table grid mismatch")));
                }
                finite(t.data())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("{what}: non-finite value")))
        }
    }
}
