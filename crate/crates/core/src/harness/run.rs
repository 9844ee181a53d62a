use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::config::{Command, ExperimentConfig};
use super::output::{render_csv, write_atomic, Cell, ResultTable};
use crate::carleman::{carleman_sweep, CarlemanFamily, SweepConfig, LHS_TERMS, RHS_TERMS};
use crate::cauchy::{holder_experiment, HarmonicFamily, ObservationRegion};
use crate::error::{invalid, LabError, Result};
use crate::forward::{ensemble_map_range, path_seed, uniform_at, SpdeProblem};
use crate::grid::{verify_identities, DiscreteField, GridSpec};
use crate::inverse::{uniformity_sweep, SourceFamily};
use crate::time::{SpaceTimeData, TimeGrid};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Overrides `output.dir`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub table: ResultTable,
    pub summary: Map<String, Value>,
}

/// SHA-256 of the canonical serialization.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one experiment and writes `<command>.csv` and `run-manifest.json`
/// into the output directory.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(invalid("thread count must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| invalid(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();

    std::fs::create_dir_all(&dir).map_err(|e| {
        LabError::Io(std::io::Error::new(
            e.kind(),
            format!("cannot create output directory {}: {e}", dir.display()),
        ))
    })?;
    let started = Instant::now();
    let (table, summary) = pool.install(|| compute(cfg))?;
    let wall = started.elapsed().as_secs_f64();

    let hash = config_hash(cfg);
    let header = vec![
        format!("carleman-lab {VERSION}"),
        format!("command: {}", cfg.command.name()),
        format!("config_sha256: {hash}"),
        format!("master_seed: {}", cfg.ensemble.master_seed),
    ];
    let csv_path = dir.join(format!("{}.csv", cfg.command.name()));
    write_atomic(&csv_path, render_csv(&header, &table)?.as_bytes())?;

    let manifest = json!({
        "tool": "carleman-lab",
        "version": VERSION,
        "command": cfg.command.name(),
        "config_sha256": hash,
        "master_seed": cfg.ensemble.master_seed,
        "threads": threads,
        "wall_time_seconds": wall,
        "finished_unix_seconds": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        "rows": table.rows.len(),
        "results": file_name(&csv_path),
        "summary": Value::Object(summary.clone()),
        "config": cfg.to_toml(),
    });
    let manifest_path = dir.join("run-manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&manifest_path, text.as_bytes())?;
    Ok(RunOutcome {
        csv: csv_path,
        manifest: manifest_path,
        table,
        summary,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Builds the result table without touching the file system.
pub fn compute(cfg: &ExperimentConfig) -> Result<(ResultTable, Map<String, Value>)> {
    match cfg.command {
        Command::VerifyIdentities => identities(cfg),
        Command::Simulate => simulate(cfg),
        Command::VerifyCarleman => carleman(cfg),
        Command::InverseSource => inverse(cfg),
        Command::Cauchy => cauchy(cfg),
    }
}

/// Entries in `[-1, 1]`; `pinned` zeroes both boundary values.
fn random_field(grid: GridSpec, seed: u64, pinned: bool) -> DiscreteField {
    let mut vals: Vec<f64> = (0..grid.len()).map(|i| 2.0 * uniform_at(seed, i as u64) - 1.0).collect();
    if pinned {
        vals[0] = 0.0;
        vals[grid.n() + 1] = 0.0;
    }
    DiscreteField::new(grid, vals).expect("finite values")
}

fn identities(cfg: &ExperimentConfig) -> Result<(ResultTable, Map<String, Value>)> {
    let mut table = ResultTable::new(&["n", "identity", "pairs", "max_residual"]);
    let mut worst: f64 = 0.0;
    for &n in &cfg.grid.n {
        let grid = GridSpec::new(cfg.grid.length, n)?;
        let mut per_name: Vec<(&'static str, f64)> = Vec::new();
        for k in 0..cfg.ensemble.samples as u64 {
            let u = random_field(grid, path_seed(cfg.ensemble.master_seed, 2 * k), false);
            let v = random_field(grid, path_seed(cfg.ensemble.master_seed, 2 * k + 1), true);
            let report = verify_identities(&u, &v).require_complete()?;
            for c in report.checks {
                let r = c.residual.unwrap_or(f64::NAN);
                match per_name.iter_mut().find(|(name, _)| *name == c.name) {
                    Some(entry) => entry.1 = entry.1.max(r),
                    None => per_name.push((c.name, r)),
                }
            }
        }
        for (name, r) in per_name {
            worst = worst.max(r);
            table.push(vec![n.into(), name.into(), cfg.ensemble.samples.into(), r.into()]);
        }
    }
    let mut summary = Map::new();
    summary.insert("max_residual".into(), json!(worst));
    Ok((table, summary))
}

fn simulate(cfg: &ExperimentConfig) -> Result<(ResultTable, Map<String, Value>)> {
    let grid = GridSpec::new(cfg.grid.length, cfg.grid.n[0])?;
    let time = TimeGrid::new(cfg.time.horizon, cfg.time.steps)?;
    let p = &cfg.problem;
    let l = cfg.grid.length;
    let initial = match p.initial.as_str() {
        "sine" => DiscreteField::from_fn(grid, |x| (std::f64::consts::PI * x / l).sin()),
        _ => DiscreteField::zeros(grid),
    };
    let constant = |v: f64| if v == 0.0 { SpaceTimeData::Zero } else { SpaceTimeData::Constant(v) };
    let problem = SpdeProblem::new(grid, time)
        .with_initial(initial)
        .with_drift(constant(p.a), constant(p.b))
        .with_noise_coefficient(constant(p.c))
        .with_sources(constant(p.f), constant(p.g));

    let stride = cfg.output.stride.max(1);
    let mut levels: Vec<usize> = (0..time.levels()).step_by(stride).collect();
    if *levels.last().unwrap() != time.steps() {
        levels.push(time.steps());
    }
    let width = grid.len();
    let mut sum = vec![0.0; levels.len() * width];
    let mut sum_sq = vec![0.0; levels.len() * width];
    let m = cfg.ensemble.samples;
    const CHUNK: usize = 256;
    for start in (0..m).step_by(CHUNK) {
        let chunk = ensemble_map_range(&problem, start..(start + CHUNK).min(m), cfg.ensemble.master_seed, true, |_, _, y| {
            levels.iter().flat_map(|&n| y.level(n).to_vec()).collect::<Vec<f64>>()
        })?;
        for sample in chunk {
            for (j, v) in sample.into_iter().enumerate() {
                sum[j] += v;
                sum_sq[j] += v * v;
            }
        }
    }
    let mut table = ResultTable::new(&["t", "x", "mean", "std_error"]);
    let mf = m as f64;
    for (row, &n) in levels.iter().enumerate() {
        for i in 0..width {
            let j = row * width + i;
            let mean = sum[j] / mf;
            let se = (m >= 2).then(|| ((sum_sq[j] - mf * mean * mean).max(0.0) / (mf - 1.0) / mf).sqrt());
            table.push(vec![time.time(n).into(), grid.node(i).into(), mean.into(), se.into()]);
        }
    }
    let mut summary = Map::new();
    summary.insert("samples".into(), json!(m));
    summary.insert("steps".into(), json!(time.steps()));
    summary.insert("dt".into(), json!(time.dt()));
    Ok((table, summary))
}

fn carleman(cfg: &ExperimentConfig) -> Result<(ResultTable, Map<String, Value>)> {
    let w = &cfg.weights;
    let family = CarlemanFamily {
        length: cfg.grid.length,
        horizon: cfg.time.horizon,
        steps: cfg.time.steps,
        x_star: w.x_star,
        t0: w.t0,
        beta: w.beta,
        suppression: w.suppress_terminal.then_some(w.suppression_tol),
        c_lambda: cfg.problem.c_lambda,
        modes: cfg.problem.modes,
        coefficient_seed: cfg.problem.family_seed,
    };
    let sweep = SweepConfig {
        s_grid: w.s.clone(),
        lambda_grid: w.lambda.clone(),
        h_grid: cfg.grid.steps(),
        samples: cfg.ensemble.samples,
        eps_cfg: w.eps_cfg,
        master_seed: cfg.ensemble.master_seed,
        parallel: true,
    };
    let result = carleman_sweep(&family, &sweep)?;

    let mut cols = vec!["h", "s", "lambda", "samples", "beta", "ln_scale"];
    let lhs_names: Vec<String> = LHS_TERMS.iter().map(|n| format!("lhs_{n}")).collect();
    let rhs_names: Vec<String> = RHS_TERMS.iter().map(|n| format!("rhs_{n}")).collect();
    cols.extend(lhs_names.iter().map(String::as_str));
    cols.extend(rhs_names.iter().map(String::as_str));
    cols.extend(["lhs_sum", "rhs_sum", "ratio", "ratio_std_error", "terminal_in_sum", "status"]);
    let mut table = ResultTable::new(&cols);
    for (k, r) in result.reports.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            r.h.into(),
            r.s.into(),
            r.lambda.into(),
            r.samples.into(),
            r.beta.into(),
            r.ln_scale.into(),
        ];
        row.extend(r.lhs.iter().map(|e| Cell::from(e.mean)));
        row.extend(r.rhs.iter().map(|e| Cell::from(e.mean)));
        let status = if r.degenerate {
            "degenerate"
        } else if result.flagged.contains(&k) {
            "flagged"
        } else {
            "ok"
        };
        row.extend([
            r.lhs_sum.into(),
            r.rhs_sum.into(),
            r.ratio.into(),
            r.ratio_std_error.into(),
            Cell::from(if r.terminal_in_sum { "true" } else { "false" }),
            status.into(),
        ]);
        table.push(row);
    }
    for s in &result.skipped {
        let mut row: Vec<Cell> = vec![s.h.into(), s.s.into(), s.lambda.into()];
        row.resize(cols.len() - 1, Cell::Missing);
        row.push(format!("skipped: {}", s.reason).into());
        table.push(row);
    }
    let mut summary = Map::new();
    let spreads: Vec<Value> = w
        .lambda
        .iter()
        .map(|&l| json!({ "lambda": l, "spread": result.uniformity_spread(l) }))
        .collect();
    summary.insert("uniformity".into(), Value::Array(spreads));
    summary.insert("skipped".into(), json!(result.skipped.len()));
    summary.insert("flagged".into(), json!(result.flagged.len()));
    Ok((table, summary))
}

fn inverse(cfg: &ExperimentConfig) -> Result<(ResultTable, Map<String, Value>)> {
    let family = SourceFamily {
        length: cfg.grid.length,
        horizon: cfg.time.horizon,
        steps: cfg.time.steps,
        a: cfg.problem.a,
        b: cfg.problem.b,
        seed: cfg.problem.family_seed,
        zero_gap: false,
    };
    let result = uniformity_sweep(
        &family,
        &cfg.grid.steps(),
        cfg.problem.pairs,
        cfg.ensemble.samples,
        cfg.ensemble.master_seed,
        true,
        cfg.problem.band,
    )?;
    let mut table = ResultTable::new(&[
        "h",
        "pair",
        "gradient_constant",
        "source_gap",
        "data_gap",
        "data_gap_std_error",
        "ratio",
        "status",
    ]);
    for r in &result.rows {
        let rec = &r.record;
        table.push(vec![
            r.h.into(),
            r.pair.into(),
            r.best_constant.into(),
            rec.source_gap.into(),
            rec.data_gap.into(),
            rec.data_gap_std_error.into(),
            rec.ratio.into(),
            format!("{:?}", rec.status).into(),
        ]);
    }
    let mut summary = Map::new();
    summary.insert("spread".into(), json!(result.spread));
    summary.insert("band".into(), json!(result.band));
    summary.insert("verdict".into(), json!(format!("{:?}", result.verdict)));
    Ok((table, summary))
}

fn cauchy(cfg: &ExperimentConfig) -> Result<(ResultTable, Map<String, Value>)> {
    let c = &cfg.cauchy;
    let family = HarmonicFamily {
        length: cfg.grid.length,
        horizon: cfg.time.horizon,
        steps: cfg.time.steps,
        c: cfg.problem.c,
        region: ObservationRegion::new(c.x_left, c.epsilon),
        amplitude: c.amplitude,
    };
    let mut table = ResultTable::new(&[
        "h",
        "scale",
        "samples",
        "epsilon",
        "x_left",
        "m_bound",
        "xi_norm",
        "eta_norm",
        "data_norm",
        "interior_norm",
        "kappa",
        "r_squared",
        "bound_ratio",
        "beta",
        "n_level",
        "t0_count",
        "q4_inclusion",
    ]);
    let mut fits = Vec::new();
    for h in cfg.grid.steps() {
        let exp = holder_experiment(&family, &c.frequencies, h, cfg.ensemble.samples, cfg.ensemble.master_seed, true)?;
        for r in &exp.records {
            table.push(vec![
                r.h.into(),
                r.scale.into(),
                r.samples.into(),
                r.epsilon.into(),
                r.x_left.into(),
                r.m_bound.into(),
                r.xi_norm.into(),
                r.eta_norm.into(),
                r.data_norm.into(),
                r.interior_norm.into(),
                r.kappa.into(),
                r.r_squared.into(),
                r.bound_ratio.into(),
                r.context.beta.into(),
                r.context.n_level.into(),
                r.context.t0_tiling.len().into(),
                r.context.q4_inclusion.map(|b| if b { "holds" } else { "fails" }).into(),
            ]);
        }
        fits.push(json!({
            "h": h,
            "kappa": exp.fit.map(|f| f.kappa),
            "r_squared": exp.fit.map(|f| f.r_squared),
            "decades": exp.decades,
            "skipped": exp.skipped.len(),
            "q4_inclusion": exp.records.first().and_then(|r| r.context.q4_inclusion),
        }));
    }
    // coarsest configured mesh on which the level-set inclusion holds
    let coarsest = cfg
        .grid
        .n
        .iter()
        .zip(&fits)
        .filter(|(_, f)| f["q4_inclusion"] == json!(true))
        .map(|(&n, _)| n)
        .min();
    let mut summary = Map::new();
    summary.insert("fits".into(), Value::Array(fits));
    summary.insert("q4_inclusion_min_n".into(), json!(coarsest));
    Ok((table, summary))
}
