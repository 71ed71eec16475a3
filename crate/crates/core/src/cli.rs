//! Command-line front end.
//!
//! Every command reads a [`RunConfig`] (JSON file plus flag overrides),
//! validates it before computing anything, and writes one report under the
//! output directory. Reports carry a deterministic `payload` and a separate
//! `metadata` object holding the timestamp.

use std::cell::RefCell;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bubble::{compute_constants, critical_exponent, ConstantsTable, QuadSettings};
use crate::error::{Error, Result};
use crate::green::{
    check_boundary_expansion, check_directional_monotonicity, check_interaction_ordering, random_interior_point,
    validate_a3, AxisGreen, BallDomain, BoundaryFamily,
};
use crate::pde::{
    config_sites, expansion_gap, projection_rate, reduced_gradient, Field, GridSpec, Harness,
};
use crate::reduced::{bounds_report, find_t0_r0, in_d, stationarity_identities, Configuration, T0R0Options};
use crate::saddle::{
    coercivity_scan, k0_start, solve_critical_point, solve_saddle, verify_bounds, CoercivityOptions, SaddleOptions,
    SaddleReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_QUADRATURE: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_RESOLUTION: i32 = 5;

/// Exit code of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) | Error::Domain(_) => EXIT_CONFIG,
        Error::Quadrature(_) => EXIT_QUADRATURE,
        Error::Resolution(_) => EXIT_RESOLUTION,
        Error::Singularity(_) | Error::Numerical(_) | Error::Search(_) | Error::Divergence { .. } => EXIT_SOLVER,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    /// Ball center; the origin when absent.
    pub center: Option<Vec<f64>>,
    pub radius: f64,
    pub eps: Vec<f64>,
    #[serde(rename = "penalty_M")]
    pub penalty_m: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub grid_nz: usize,
    pub grid_nr: usize,
    /// Recompute each gap on the doubled grid.
    pub refine: bool,
    pub seed: u64,
    /// Axis samples of the convexity check.
    pub a3_resolution: usize,
    /// Random pairs of the directional monotonicity check.
    pub pairs: usize,
    pub coercivity_levels: Vec<f64>,
    pub coercivity_samples: usize,
    /// Saddle report consumed by `verify`; recomputed when absent.
    pub saddle_report: Option<PathBuf>,
    /// Inline configuration for `verify`, taking precedence over the report.
    pub configuration: Option<Configuration>,
    pub out: PathBuf,
    pub format: Format,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            center: None,
            radius: 1.0,
            eps: vec![0.1, 0.05, 0.025],
            penalty_m: 100.0,
            tol: 1e-8,
            max_iter: 50,
            grid_nz: 513,
            grid_nr: 257,
            refine: true,
            seed: 7,
            a3_resolution: 256,
            pairs: 1000,
            coercivity_levels: vec![10.0, 20.0, 40.0],
            coercivity_samples: 100,
            saddle_report: None,
            configuration: None,
            out: PathBuf::from("out"),
            format: Format::Json,
            trace: false,
        }
    }
}

impl RunConfig {
    /// Checks every field against the preconditions of the modules.
    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::Config(format!("N ≥ 3 required, got N = {}", self.dim)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config(format!("radius must be positive, got {}", self.radius)));
        }
        if let Some(c) = &self.center {
            if c.len() != self.dim || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("center must be a finite point of R^{}", self.dim)));
            }
        }
        let top = critical_exponent(self.dim) - 2.0;
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && *e < top)) {
            return Err(Error::Config(format!("ε values must lie in (0, {top}), got {:?}", self.eps)));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!("ε list must be strictly decreasing, got {:?}", self.eps)));
        }
        if !self.penalty_m.is_finite() {
            return Err(Error::Config("penalty M must be finite".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) || self.max_iter == 0 {
            return Err(Error::Config("solver tolerance and iteration cap must be positive".into()));
        }
        if self.grid_nz < 5 || self.grid_nr < 3 {
            return Err(Error::Config(format!(
                "grid {}×{} too small (at least 5×3)",
                self.grid_nz, self.grid_nr
            )));
        }
        if self.a3_resolution < 16 || self.pairs == 0 {
            return Err(Error::Config("assumption sample counts too small".into()));
        }
        if self.coercivity_levels.windows(2).any(|w| w[1] <= w[0]) || self.coercivity_samples == 0 {
            return Err(Error::Config("coercivity levels must increase and samples be positive".into()));
        }
        if let Some(c) = &self.configuration {
            c.validate().map_err(|e| Error::Config(format!("inline configuration: {e}")))?;
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<BallDomain> {
        let center = self.center.clone().unwrap_or_else(|| vec![0.0; self.dim]);
        BallDomain::new(self.dim, center, self.radius)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            nz: self.grid_nz,
            nr: self.grid_nr,
        }
    }

    fn saddle_options(&self) -> SaddleOptions {
        SaddleOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..Default::default()
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "subcrit", version, about = "Four-bubble nodal solutions of slightly subcritical problems on balls")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Dimension constants of the energy expansion.
    Constants,
    /// Sampled checks of the domain hypotheses.
    Assumptions,
    /// Locate and certify the four-bubble saddle point.
    Saddle,
    /// Grid-based verification of the approximate solution.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Assumptions => "assumptions",
            Command::Saddle => "saddle",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub radius: Option<f64>,
    /// ε value; repeat for a list.
    #[arg(long, global = true)]
    pub eps: Vec<f64>,
    #[arg(long = "penalty-M", global = true)]
    pub penalty_m: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "grid-nz", global = true)]
    pub grid_nz: Option<usize>,
    #[arg(long = "grid-nr", global = true)]
    pub grid_nr: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Saddle report consumed by `verify`.
    #[arg(long = "saddle-report", global = true)]
    pub saddle_report: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the per-iteration solver trace to trace.csv.
    #[arg(long, global = true)]
    pub trace: bool,
}

impl Flags {
    /// Configuration file contents with the flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.radius {
            c.radius = v;
        }
        if !self.eps.is_empty() {
            c.eps = self.eps.clone();
        }
        if let Some(v) = self.penalty_m {
            c.penalty_m = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.grid_nz {
            c.grid_nz = v;
        }
        if let Some(v) = self.grid_nr {
            c.grid_nr = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.saddle_report {
            c.saddle_report = Some(v.clone());
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        c.trace |= self.trace;
        Ok(c)
    }
}

/// Outcome of a command: its payload and whether every gated check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub payload: Value,
    pub exit: i32,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Numerical(format!("serialisation failed: {e}")))
}

pub fn cmd_constants(cfg: &RunConfig) -> Result<Outcome> {
    let table = compute_constants(cfg.dim, &QuadSettings::default())?;
    Ok(Outcome {
        payload: to_value(&table)?,
        exit: EXIT_OK,
    })
}

fn boundary_families(d: &BallDomain) -> Vec<BoundaryFamily> {
    let n = d.dim;
    let unit = |k: usize| (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    let shifted = |k: usize, s: f64| -> Vec<f64> {
        d.center
            .iter()
            .enumerate()
            .map(|(i, c)| c + if i == k { s * d.radius } else { 0.0 })
            .collect()
    };
    let mut oblique = vec![0.0; n];
    oblique[0] = -1.0;
    oblique[1] = 0.5;
    vec![
        BoundaryFamily {
            direction: unit(0),
            y: d.center.clone(),
        },
        BoundaryFamily {
            direction: unit(1),
            y: shifted(0, 0.2),
        },
        BoundaryFamily {
            direction: oblique,
            y: shifted(1, -0.3),
        },
    ]
}

pub fn cmd_assumptions(cfg: &RunConfig) -> Result<Outcome> {
    let domain = cfg.domain()?;
    let axis = AxisGreen::new(domain.clone())?;
    let a3 = validate_a3(&axis, cfg.a3_resolution, None)?;
    let depths: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|d| d * domain.radius).collect();
    let expansion = check_boundary_expansion(&domain, &boundary_families(&domain), &depths, 0.15)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.pairs)
        .map(|_| {
            (
                random_interior_point(&domain, 0.98, &mut rng),
                random_interior_point(&domain, 0.98, &mut rng),
            )
        })
        .collect();
    let directional = check_directional_monotonicity(&domain, &pairs)?;
    let (a, b) = (axis.section.a, axis.section.b);
    let margin = 0.02 * (b - a);
    let quads: Vec<[f64; 4]> = (0..cfg.pairs)
        .map(|_| {
            let mut q = [0.0; 4];
            for v in q.iter_mut() {
                *v = rng.gen_range(a + margin..b - margin);
            }
            q.sort_by(f64::total_cmp);
            q
        })
        .filter(|q| q.windows(2).all(|w| w[1] - w[0] > 1e-9))
        .collect();
    let ordering = check_interaction_ordering(&axis, &quads)?;
    let mut failed = Vec::new();
    if !a3.convexity.pass {
        failed.push(a3.convexity.check.clone());
    }
    if !a3.monotonicity.pass {
        failed.push(a3.monotonicity.check.clone());
    }
    if !expansion.pass() {
        failed.push("boundary_expansion".to_string());
    }
    if !directional.pass {
        failed.push(directional.check.clone());
    }
    if !ordering.pass {
        failed.push(ordering.check.clone());
    }
    let pass = failed.is_empty();
    let payload = json!({
        "pass": pass,
        "failed": failed,
        "min_d2h": a3.convexity.worst_value,
        "max_monotonicity": a3.monotonicity.worst_value,
        "d2h_midpoint": a3.d2h_midpoint,
        "a3": to_value(&a3)?,
        "boundary_expansion": to_value(&expansion)?,
        "directional_monotonicity": to_value(&directional)?,
        "interaction_ordering": to_value(&ordering)?,
    });
    Ok(Outcome {
        payload,
        exit: if pass { EXIT_OK } else { EXIT_ASSUMPTION },
    })
}

/// Result of the saddle pipeline.
#[derive(Debug, Clone)]
pub struct SaddleRun {
    pub payload: Value,
    pub report: SaddleReport,
    pub assumptions_ok: bool,
}

pub fn saddle_pipeline(cfg: &RunConfig) -> Result<SaddleRun> {
    let axis = AxisGreen::new(cfg.domain()?)?;
    let a3 = validate_a3(&axis, cfg.a3_resolution, None)?;
    let found = find_t0_r0(&axis, &T0R0Options::default())?;
    let bounds = bounds_report(&axis, found.t0, found.r0)?;
    let start = k0_start(found.t0, found.r0)?;
    let mut report = solve_saddle(&axis, &start, &cfg.saddle_options())?;
    let bounds_ok = verify_bounds(&report, &bounds);
    report.bounds_ok = bounds_ok;
    if !bounds_ok {
        report.warnings.push(format!(
            "value {} outside [{}, {}]",
            report.value, bounds.lower, bounds.upper
        ));
    }
    let identities = stationarity_identities(&report.config, &axis)?;
    let identities_ok = identities.iter().all(|v| (v - 1.0).abs() <= 1e-6);
    let in_working_set = in_d(&report.config, &axis, cfg.penalty_m)?;
    let coercivity = coercivity_scan(
        &axis,
        &start,
        &cfg.coercivity_levels,
        &CoercivityOptions {
            samples: cfg.coercivity_samples,
            seed: cfg.seed,
            ..Default::default()
        },
    )?;
    let payload = json!({
        "assumptions_ok": a3.pass(),
        "t0_r0": to_value(&found)?,
        "bounds": to_value(&bounds)?,
        "start": to_value(&start)?,
        "saddle": to_value(&report)?,
        "bounds_ok": bounds_ok,
        "identities_ok": identities_ok,
        "in_D": in_working_set,
        "penalty_M": cfg.penalty_m,
        "coercivity": to_value(&coercivity)?,
    });
    Ok(SaddleRun {
        payload,
        report,
        assumptions_ok: a3.pass(),
    })
}

pub fn cmd_saddle(cfg: &RunConfig) -> Result<Outcome> {
    let run = saddle_pipeline(cfg)?;
    if !run.assumptions_ok {
        return Ok(Outcome {
            payload: run.payload,
            exit: EXIT_ASSUMPTION,
        });
    }
    if cfg.trace {
        write_trace(&cfg.out, &run.report)?;
    }
    Ok(Outcome {
        payload: run.payload,
        exit: EXIT_OK,
    })
}

fn write_trace(dir: &Path, report: &SaddleReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
    let path = dir.join("trace.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for row in &report.trace {
        w.serialize(row).map_err(|e| Error::Config(format!("trace: {e}")))?;
    }
    w.flush().map_err(|e| Error::Config(format!("trace: {e}")))
}

/// Saddle configuration for `verify`: inline, from a report file, or
/// recomputed.
fn verify_configuration(cfg: &RunConfig) -> Result<Configuration> {
    if let Some(c) = &cfg.configuration {
        return Ok(c.clone());
    }
    if let Some(p) = &cfg.saddle_report {
        let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
        let node = v
            .pointer("/payload/saddle/config")
            .or_else(|| v.pointer("/saddle/config"))
            .or_else(|| v.pointer("/config"))
            .ok_or_else(|| Error::Config(format!("{}: no saddle configuration found", p.display())))?;
        return serde_json::from_value(node.clone()).map_err(|e| Error::Config(format!("{}: {e}", p.display())));
    }
    Ok(saddle_pipeline(cfg)?.report.config)
}

fn residual_rows(
    domain: &BallDomain,
    saddle: &Configuration,
    cfg: &RunConfig,
    table: &ConstantsTable,
) -> Result<Value> {
    let mut rows = Vec::new();
    for &e in &cfg.eps {
        let h = Harness::for_sites(domain, cfg.grid(), &config_sites(saddle, e, table)?)?;
        let v = h.assemble_v(saddle, e, table)?;
        let grad = reduced_gradient(&h, saddle, e, table, 1e-4)?;
        rows.push(json!({
            "epsilon": e,
            "residual_l2": h.residual_norm(&v, e)?,
            "residual_dual": h.residual_dual_norm(&v, e)?,
            "reduced_gradient_norm": grad.iter().map(|x| x * x).sum::<f64>().sqrt(),
            "sup_norm": v.sup_norm(),
        }));
    }
    // Comparisons at the middle ε of the list.
    let e = cfg.eps[cfg.eps.len() / 2];
    let h = Harness::for_sites(domain, cfg.grid(), &config_sites(saddle, e, table)?)?;
    let v = h.assemble_v(saddle, e, table)?;
    let scale = v.sup_norm();
    let rng = RefCell::new(ChaCha8Rng::seed_from_u64(cfg.seed));
    let noise = Field::interior_from_fn(h.grid(), |_, _| scale * rng.borrow_mut().gen_range(-1.0..1.0));
    let mut perturbed = saddle.clone();
    for l in perturbed.lambda.iter_mut() {
        *l *= 1.1;
    }
    let hp = Harness::for_sites(domain, cfg.grid(), &config_sites(&perturbed, e, table)?)?;
    let vp = hp.assemble_v(&perturbed, e, table)?;
    let base = h.residual_norm(&v, e)?;
    Ok(json!({
        "rows": rows,
        "comparison_epsilon": e,
        "random_over_saddle": h.residual_norm(&noise, e)? / base,
        "saddle_over_perturbed": base / hp.residual_norm(&vp, e)?,
        "saddle_over_perturbed_dual": h.residual_dual_norm(&v, e)? / hp.residual_dual_norm(&vp, e)?,
    }))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let domain = cfg.domain()?;
    let axis = AxisGreen::new(domain.clone())?;
    let table = compute_constants(cfg.dim, &QuadSettings::default())?;
    let saddle = verify_configuration(cfg)?;
    if saddle.k != 4 || !saddle.is_alternating() || saddle.lambda.len() != 4 {
        return Err(Error::Config("verify needs an alternating four-bubble configuration".into()));
    }
    let c = domain.center[0];
    let projection = projection_rate(&domain, 1.0, c, &cfg.eps, cfg.grid())?;
    let single = solve_critical_point(
        &axis,
        &Configuration::new(vec![1], vec![1.0], vec![c])?,
        &SaddleOptions {
            target_index: 0,
            ..cfg.saddle_options()
        },
    )?;
    let gap_one = expansion_gap(&axis, &single.config, &cfg.eps, &table, cfg.grid(), cfg.refine)?;
    let gap_four = expansion_gap(&axis, &saddle, &cfg.eps, &table, cfg.grid(), cfg.refine)?;
    let residual = residual_rows(&domain, &saddle, cfg, &table)?;
    let payload = json!({
        "grid": to_value(&cfg.grid())?,
        "epsilon": cfg.eps,
        "saddle_config": to_value(&saddle)?,
        "projection": to_value(&projection)?,
        "projection_stable": projection.constant_spread <= 2.0,
        "expansion_k1": to_value(&gap_one)?,
        "expansion_k4": to_value(&gap_four)?,
        "residual": residual,
    });
    Ok(Outcome {
        payload,
        exit: EXIT_OK,
    })
}

/// Flattens a JSON value into `(path, value)` rows.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let join = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    walk(&join(k), x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&join(&i.to_string()), x, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

fn metadata(command: &str) -> Value {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": secs,
    })
}

/// Writes `<command>.json` or `<command>.csv` and returns its path.
pub fn write_report(cfg: &RunConfig, command: &str, payload: &Value) -> Result<PathBuf> {
    let io = |p: &Path, e: std::io::Error| Error::Config(format!("{}: {e}", p.display()));
    fs::create_dir_all(&cfg.out).map_err(|e| io(&cfg.out, e))?;
    match cfg.format {
        Format::Json => {
            let path = cfg.out.join(format!("{command}.json"));
            let doc = json!({ "payload": payload, "metadata": metadata(command) });
            let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?;
            fs::write(&path, text + "\n").map_err(|e| io(&path, e))?;
            Ok(path)
        }
        Format::Csv => {
            let path = cfg.out.join(format!("{command}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let mut rows = vec![("key".to_string(), "value".to_string())];
            rows.extend(flatten(payload));
            rows.extend(
                flatten(&metadata(command))
                    .into_iter()
                    .map(|(k, v)| (format!("metadata.{k}"), v)),
            );
            for (k, v) in rows {
                w.write_record([k, v]).map_err(|e| Error::Config(e.to_string()))?;
            }
            w.flush().map_err(|e| io(&path, e))?;
            Ok(path)
        }
    }
}

/// Runs one command with a resolved configuration; returns the exit code.
pub fn execute(command: Command, cfg: &RunConfig) -> i32 {
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let result = match command {
        Command::Constants => cmd_constants(cfg),
        Command::Assumptions => cmd_assumptions(cfg),
        Command::Saddle => cmd_saddle(cfg),
        Command::Verify => cmd_verify(cfg),
    };
    match result.and_then(|o| write_report(cfg, command.name(), &o.payload).map(|p| (o, p))) {
        Ok((o, path)) => {
            println!("wrote {}", path.display());
            if o.exit == EXIT_ASSUMPTION {
                eprintln!("assumption check failed; see {}", path.display());
            }
            o.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.flags.resolve() {
        Ok(cfg) => execute(cli.command, &cfg),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
