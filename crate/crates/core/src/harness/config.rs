//! Experiment configuration: a TOML document with one top-level `command`
//! key and flat sections of typed keys. Missing keys take per-command
//! defaults; every violation is collected with its key path.

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyIdentities,
    Simulate,
    VerifyCarleman,
    InverseSource,
    Cauchy,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::VerifyIdentities,
        Command::Simulate,
        Command::VerifyCarleman,
        Command::InverseSource,
        Command::Cauchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::Simulate => "simulate",
            Command::VerifyCarleman => "verify-carleman",
            Command::InverseSource => "inverse-source",
            Command::Cauchy => "cauchy",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub length: f64,
    /// Interior node counts; a sweep when longer than one.
    pub n: Vec<usize>,
}

impl GridConfig {
    pub fn steps(&self) -> Vec<f64> {
        self.n.iter().map(|&n| self.length / (n + 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeConfig {
    pub horizon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightConfig {
    pub x_star: f64,
    pub t0: f64,
    pub beta: f64,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
    pub eps_cfg: f64,
    /// Choose `β` so the terminal weight is this small relative to its
    /// maximum, and leave the terminal term out of the right side.
    pub suppress_terminal: bool,
    pub suppression_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub samples: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub f: f64,
    pub g: f64,
    /// `"sine"` or `"zero"`.
    pub initial: String,
    /// Number of random source pairs.
    pub pairs: usize,
    /// Sine modes in the randomized forcing.
    pub modes: usize,
    pub c_lambda: f64,
    /// Seed of the randomized family (forcing or source pairs).
    pub family_seed: u64,
    /// Allowed max/min ratio of per-mesh maxima.
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyConfig {
    pub x_left: f64,
    pub epsilon: f64,
    pub frequencies: Vec<f64>,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: String,
    /// Time levels between written rows of a simulated field.
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub weights: WeightConfig,
    pub ensemble: EnsembleConfig,
    pub problem: ProblemConfig,
    pub cauchy: CauchyConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Canonical TOML text. For a config produced by [`parse_config`],
    /// parsing this text gives back the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }

    /// Defaults for `command`. Values derived from others (`time.steps` for
    /// simulate, `output.stride`) are left at 0 and filled in by parsing.
    pub fn defaults(command: Command) -> Self {
        let (length, n, horizon, steps, samples) = match command {
            Command::VerifyIdentities => (1.0, vec![4, 8, 16, 32, 64, 128, 256, 512], 1.0, 1, 100),
            Command::Simulate => (1.0, vec![31], 1.0, 0, 1),
            Command::VerifyCarleman => (0.5, vec![15, 31, 63], 1.0, 400, 200),
            Command::InverseSource => (1.0, vec![15, 31, 63, 127], 1.0, 200, 100),
            Command::Cauchy => (1.0, vec![31, 63, 127], 1.0, 800, 20),
        };
        let (a, b, c) = match command {
            Command::InverseSource => (0.5, 0.25, 0.0),
            Command::Cauchy => (0.0, 0.0, 0.1),
            _ => (0.0, 0.0, 0.0),
        };
        ExperimentConfig {
            command,
            grid: GridConfig { length, n },
            time: TimeConfig { horizon, steps },
            weights: WeightConfig {
                x_star: -0.05,
                t0: 0.5,
                beta: 1.0,
                lambda: vec![1.0],
                s: vec![15.0, 17.0, 19.0],
                eps_cfg: 12.0,
                suppress_terminal: true,
                suppression_tol: 1e-8,
            },
            ensemble: EnsembleConfig {
                samples,
                master_seed: 0,
            },
            problem: ProblemConfig {
                a,
                b,
                c,
                f: 0.0,
                g: 0.0,
                initial: "sine".into(),
                pairs: 20,
                modes: 3,
                c_lambda: 1.0,
                family_seed: if command == Command::InverseSource { 2024 } else { 0xC0FFEE },
                band: 2.0,
            },
            cauchy: CauchyConfig {
                x_left: 0.5,
                epsilon: 0.1,
                frequencies: crate::cauchy::HarmonicFamily::default_frequencies(),
                amplitude: 1.0,
            },
            output: OutputConfig {
                dir: "results".into(),
                stride: 0,
            },
        }
    }
}

/// Typed reads from one section, recording problems by key path.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    errors: &'a mut Vec<String>,
    seen: Vec<&'static str>,
}

impl<'a> Section<'a> {
    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.table.and_then(|t| t.get(key))
    }

    fn float(&mut self, key: &'static str, out: &mut f64) -> bool {
        match self.raw(key) {
            None => false,
            Some(Value::Float(v)) => {
                *out = *v;
                true
            }
            Some(Value::Integer(v)) => {
                *out = *v as f64;
                true
            }
            Some(other) => {
                let p = self.path(key);
                self.errors.push(format!("{p}: expected a number, found {}", other.type_str()));
                false
            }
        }
    }

    fn uint(&mut self, key: &'static str, out: &mut u64) -> bool {
        match self.raw(key) {
            None => false,
            Some(Value::Integer(v)) if *v >= 0 => {
                *out = *v as u64;
                true
            }
            Some(other) => {
                let p = self.path(key);
                self.errors.push(format!("{p}: expected a non-negative integer, found {other}"));
                false
            }
        }
    }

    fn usize(&mut self, key: &'static str, out: &mut usize) -> bool {
        let mut v = 0u64;
        let hit = self.uint(key, &mut v);
        if hit {
            *out = v as usize;
        }
        hit
    }

    fn boolean(&mut self, key: &'static str, out: &mut bool) {
        match self.raw(key) {
            None => {}
            Some(Value::Boolean(v)) => *out = *v,
            Some(other) => {
                let p = self.path(key);
                self.errors.push(format!("{p}: expected true or false, found {}", other.type_str()));
            }
        }
    }

    fn string(&mut self, key: &'static str, out: &mut String) {
        match self.raw(key) {
            None => {}
            Some(Value::String(v)) => *out = v.clone(),
            Some(other) => {
                let p = self.path(key);
                self.errors.push(format!("{p}: expected a string, found {}", other.type_str()));
            }
        }
    }

    /// A number or a list of numbers.
    fn floats(&mut self, key: &'static str, out: &mut Vec<f64>) {
        let Some(raw) = self.raw(key) else { return };
        let items: Vec<&Value> = match raw {
            Value::Array(a) => a.iter().collect(),
            v => vec![v],
        };
        let mut vals = Vec::new();
        for (j, v) in items.iter().enumerate() {
            match v {
                Value::Float(x) => vals.push(*x),
                Value::Integer(x) => vals.push(*x as f64),
                other => {
                    let p = self.path(key);
                    self.errors.push(format!("{p}[{j}]: expected a number, found {}", other.type_str()));
                    return;
                }
            }
        }
        *out = vals;
    }

    /// A non-negative integer or a list of them.
    fn uints(&mut self, key: &'static str, out: &mut Vec<usize>) {
        let Some(raw) = self.raw(key) else { return };
        let items: Vec<&Value> = match raw {
            Value::Array(a) => a.iter().collect(),
            v => vec![v],
        };
        let mut vals = Vec::new();
        for (j, v) in items.iter().enumerate() {
            match v {
                Value::Integer(x) if *x >= 0 => vals.push(*x as usize),
                other => {
                    let p = self.path(key);
                    self.errors.push(format!("{p}[{j}]: expected a non-negative integer, found {other}"));
                    return;
                }
            }
        }
        *out = vals;
    }

    fn finish(self) {
        if let Some(t) = self.table {
            for key in t.keys() {
                if !self.seen.contains(&key.as_str()) {
                    self.errors.push(format!("{}.{key}: unknown key", self.name));
                }
            }
        }
    }
}

const SECTIONS: [&str; 7] = ["grid", "time", "weights", "ensemble", "problem", "cauchy", "output"];

/// Parses and validates a configuration, reporting every violation.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| LabError::Config(vec![format!("syntax: {}", e.message())]))?;
    let mut errors = Vec::new();

    let command = match doc.get("command") {
        Some(Value::String(s)) => match Command::from_name(s) {
            Some(c) => c,
            None => {
                let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                return Err(LabError::Config(vec![format!(
                    "command: unknown command {s:?}; expected one of {}",
                    names.join(", ")
                )]));
            }
        },
        Some(other) => {
            return Err(LabError::Config(vec![format!("command: expected a string, found {}", other.type_str())]));
        }
        None => return Err(LabError::Config(vec!["command: missing".into()])),
    };
    for (key, value) in &doc {
        if key == "command" {
            continue;
        }
        if !SECTIONS.contains(&key.as_str()) {
            errors.push(format!("{key}: unknown section"));
        } else if !value.is_table() {
            errors.push(format!("{key}: expected a section, found {}", value.type_str()));
        }
    }
    let table = |name: &str| doc.get(name).and_then(Value::as_table);

    let mut cfg = ExperimentConfig::defaults(command);
    let mut dt = None;
    let mut steps_given;
    {
        let mut s = Section { name: "grid", table: table("grid"), errors: &mut errors, seen: vec![] };
        s.float("length", &mut cfg.grid.length);
        s.uints("n", &mut cfg.grid.n);
        s.finish();
    }
    {
        let mut s = Section { name: "time", table: table("time"), errors: &mut errors, seen: vec![] };
        s.float("horizon", &mut cfg.time.horizon);
        // 0 asks for the derived value, as for `output.stride`
        steps_given = s.usize("steps", &mut cfg.time.steps) && cfg.time.steps != 0;
        let mut v = 0.0;
        if s.float("dt", &mut v) {
            dt = Some(v);
        }
        s.finish();
    }
    {
        let w = &mut cfg.weights;
        let mut s = Section { name: "weights", table: table("weights"), errors: &mut errors, seen: vec![] };
        s.float("x_star", &mut w.x_star);
        s.float("t0", &mut w.t0);
        s.float("beta", &mut w.beta);
        s.floats("lambda", &mut w.lambda);
        s.floats("s", &mut w.s);
        s.float("eps_cfg", &mut w.eps_cfg);
        s.boolean("suppress_terminal", &mut w.suppress_terminal);
        s.float("suppression_tol", &mut w.suppression_tol);
        s.finish();
    }
    {
        let mut s = Section { name: "ensemble", table: table("ensemble"), errors: &mut errors, seen: vec![] };
        s.usize("samples", &mut cfg.ensemble.samples);
        s.uint("master_seed", &mut cfg.ensemble.master_seed);
        s.finish();
    }
    {
        let p = &mut cfg.problem;
        let mut s = Section { name: "problem", table: table("problem"), errors: &mut errors, seen: vec![] };
        s.float("a", &mut p.a);
        s.float("b", &mut p.b);
        s.float("c", &mut p.c);
        s.float("f", &mut p.f);
        s.float("g", &mut p.g);
        s.string("initial", &mut p.initial);
        s.usize("pairs", &mut p.pairs);
        s.usize("modes", &mut p.modes);
        s.float("c_lambda", &mut p.c_lambda);
        s.uint("family_seed", &mut p.family_seed);
        s.float("band", &mut p.band);
        s.finish();
    }
    {
        let c = &mut cfg.cauchy;
        let mut s = Section { name: "cauchy", table: table("cauchy"), errors: &mut errors, seen: vec![] };
        s.float("x_left", &mut c.x_left);
        s.float("epsilon", &mut c.epsilon);
        s.floats("frequencies", &mut c.frequencies);
        s.float("amplitude", &mut c.amplitude);
        s.finish();
    }
    {
        let mut s = Section { name: "output", table: table("output"), errors: &mut errors, seen: vec![] };
        s.string("dir", &mut cfg.output.dir);
        s.usize("stride", &mut cfg.output.stride);
        s.finish();
    }

    // time steps: explicit, from dt, or (simulate) dt = h²/4
    if let Some(dt) = dt {
        if steps_given {
            errors.push("time: give steps or dt, not both".into());
        } else if !(dt > 0.0 && dt.is_finite()) {
            errors.push(format!("time.dt: must be positive, got {dt}"));
        } else {
            cfg.time.steps = (cfg.time.horizon / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            steps_given = true;
        }
    }
    if !steps_given && command == Command::Simulate {
        if let Some(&n) = cfg.grid.n.first() {
            let h = cfg.grid.length / (n + 1) as f64;
            cfg.time.steps = (cfg.time.horizon / (h * h / 4.0) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        }
    }
    if cfg.output.stride == 0 {
        cfg.output.stride = cfg.time.steps.div_ceil(20).max(1);
    }

    validate(&cfg, &mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(LabError::Config(errors))
    }
}

fn validate(cfg: &ExperimentConfig, errors: &mut Vec<String>) {
    let mut need = |ok: bool, msg: String| {
        if !ok {
            errors.push(msg);
        }
    };
    let g = &cfg.grid;
    need(g.length > 0.0 && g.length.is_finite(), format!("grid.length: must be positive, got {}", g.length));
    need(!g.n.is_empty(), "grid.n: needs at least one value".into());
    for (j, &n) in g.n.iter().enumerate() {
        need(n >= 2, format!("grid.n[{j}]: need at least 2 interior nodes, got {n}"));
    }
    let t = &cfg.time;
    need(t.horizon > 0.0 && t.horizon.is_finite(), format!("time.horizon: must be positive, got {}", t.horizon));
    need(t.steps >= 1, format!("time.steps: must be at least 1, got {}", t.steps));
    need(cfg.ensemble.samples >= 1, "ensemble.samples: must be at least 1".into());
    need(
        cfg.ensemble.master_seed <= i64::MAX as u64,
        format!("ensemble.master_seed: must not exceed {}", i64::MAX),
    );
    need(
        cfg.problem.family_seed <= i64::MAX as u64,
        format!("problem.family_seed: must not exceed {}", i64::MAX),
    );
    for (name, v) in [("a", cfg.problem.a), ("b", cfg.problem.b), ("c", cfg.problem.c), ("f", cfg.problem.f), ("g", cfg.problem.g)] {
        need(v.is_finite(), format!("problem.{name}: must be finite"));
    }
    need(
        matches!(cfg.problem.initial.as_str(), "sine" | "zero"),
        format!("problem.initial: expected \"sine\" or \"zero\", got {:?}", cfg.problem.initial),
    );

    match cfg.command {
        Command::Simulate => {
            need(g.n.len() == 1, format!("grid.n: simulate takes one mesh, got {}", g.n.len()));
        }
        Command::VerifyCarleman => {
            let w = &cfg.weights;
            need(w.x_star < 0.0, format!("weights.x_star: must lie left of the interval, got {}", w.x_star));
            need(
                w.t0 > 0.0 && w.t0 < t.horizon,
                format!("weights.t0: must lie in (0, {}), got {}", t.horizon, w.t0),
            );
            need(w.beta >= 0.0, format!("weights.beta: must be non-negative, got {}", w.beta));
            need(w.eps_cfg > 0.0, format!("weights.eps_cfg: must be positive, got {}", w.eps_cfg));
            need(!w.lambda.is_empty(), "weights.lambda: needs at least one value".into());
            need(!w.s.is_empty(), "weights.s: needs at least one value".into());
            for (j, &l) in w.lambda.iter().enumerate() {
                need(l > 0.0, format!("weights.lambda[{j}]: must be positive, got {l}"));
            }
            if w.suppress_terminal {
                need(
                    w.suppression_tol > 0.0 && w.suppression_tol < 1.0,
                    format!("weights.suppression_tol: must lie in (0, 1), got {}", w.suppression_tol),
                );
            }
            let h_min = g.steps().into_iter().fold(f64::INFINITY, f64::min);
            if h_min.is_finite() && w.eps_cfg > 0.0 {
                let bound = (w.eps_cfg / h_min).sqrt();
                for (j, &s) in w.s.iter().enumerate() {
                    need(s >= 0.0, format!("weights.s[{j}]: must be non-negative, got {s}"));
                    need(
                        s <= bound,
                        format!("weights.s[{j}]: {s} exceeds sqrt(eps_cfg/h_min) = {bound:.6}"),
                    );
                }
            }
            need(cfg.problem.modes >= 1, "problem.modes: must be at least 1".into());
        }
        Command::InverseSource => {
            need(cfg.problem.pairs >= 1, "problem.pairs: must be at least 1".into());
            need(cfg.problem.band >= 1.0, format!("problem.band: must be at least 1, got {}", cfg.problem.band));
        }
        Command::Cauchy => {
            let c = &cfg.cauchy;
            need(
                c.x_left > 0.0 && c.x_left < g.length,
                format!("cauchy.x_left: must lie in (0, {}), got {}", g.length, c.x_left),
            );
            need(
                c.epsilon >= 0.0 && 2.0 * c.epsilon < t.horizon,
                format!("cauchy.epsilon: must lie in [0, T/2), got {}", c.epsilon),
            );
            need(c.amplitude > 0.0, format!("cauchy.amplitude: must be positive, got {}", c.amplitude));
            need(c.frequencies.len() >= 2, "cauchy.frequencies: need at least two values".into());
            for (j, &w) in c.frequencies.iter().enumerate() {
                need(w > 0.0 && w.is_finite(), format!("cauchy.frequencies[{j}]: must be positive, got {w}"));
            }
            if c.x_left > 0.0 && c.x_left < g.length {
                let region = crate::cauchy::ObservationRegion::new(c.x_left, c.epsilon);
                let min_n = region.minimum_n(g.length);
                for (j, &n) in g.n.iter().enumerate() {
                    need(n >= min_n, format!("grid.n[{j}]: no node in (x_left, L]; need N >= {min_n}"));
                }
            }
        }
        Command::VerifyIdentities => {}
    }
}
