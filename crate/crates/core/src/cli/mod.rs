//! The `om-diffusion` command line: one subcommand per workflow, configured by a flat
//! TOML file (see [`ExperimentConfig`]) and writing CSV/JSON with 12 significant digits.
//!
//! Exit codes: 0 ok, 2 configuration, 3 domain, 4 no convergence, 5 degenerate statistics.

mod config;

pub use config::{
    CartanConfig, CurveConfig, DriftConfig, ExperimentConfig, FamilyConfig, MppConfig, OmConfig, OutputConfig,
    SdeConfig, TransportConfig, WeightConfig,
};

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{self, MetricFamily};
use crate::lagrangian::{
    action, lagrangian_series, weighted_action, weighted_lagrangian, LagrangianSample, WeightedVariant,
};
use crate::mpp::{l2_distance, minimize_action_direct, solve_mpp_bvp};
use crate::sde::{
    asymptotic_prediction, calibrate_constant, lambda1_dirichlet, ratio_experiment_with, reference_constant,
    tube_probability_with, DiffusionSpec, McOptions,
};
use crate::transport::{cartan_expansion_check, parallel_transport_with_steps, write_curve_csv, Curve};

/// Version of every JSON document the CLI writes.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;
pub const EXIT_DEGENERATE: i32 = 5;

/// Maps a library error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::UnsupportedDimension(_)
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => EXIT_CONFIG,
        Error::OutOfDomain { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::SingularMetric { .. }
        | Error::NonPositiveWeight { .. } => EXIT_DOMAIN,
        Error::NoConvergence { .. } | Error::StepFailure(_) | Error::NotOrthonormal { .. } => EXIT_NO_CONVERGENCE,
        Error::DegenerateRatio => EXIT_DEGENERATE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "om-diffusion", version, about = "Onsager–Machlup functionals and small-ball probabilities for diffusions on evolving manifolds")]
pub struct Cli {
    /// Worker threads for Monte Carlo (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Experiment config (TOML with flat dotted keys).
    #[arg(long, short)]
    pub config: PathBuf,

    /// Override a config key, e.g. `--set family.alpha=-2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lagrangian series along the configured curve and its action.
    OmEval(ConfigArgs),
    /// Most probable path between `mpp.x0` and `mpp.x1` by shooting.
    Mpp {
        #[command(flatten)]
        args: ConfigArgs,
        /// Cross-check against the direct minimiser.
        #[arg(long)]
        oracle: bool,
    },
    /// Monte Carlo tube probabilities over `sde.epsilons` with the asymptotic prediction.
    Smallball {
        #[command(flatten)]
        args: ConfigArgs,
        /// Estimate P(tube around curve) / P(tube around curve_b) instead.
        #[arg(long)]
        ratio: bool,
    },
    /// First Dirichlet eigenvalue of −½Δ in the unit ball of ℝⁿ.
    Lambda1 {
        n: usize,
    },
    /// Second-order expansion of the metric in normal coordinates.
    CartanCheck(ConfigArgs),
    /// Orthonormality of the parallel-transported frame along the configured curve.
    TransportCheck(ConfigArgs),
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Executes a parsed command, writing its summary to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    if cli.threads == Some(0) {
        return Err(Error::Config("--threads must be positive".into()));
    }
    match &cli.command {
        Command::Lambda1 { n } => {
            let l = lambda1_dirichlet(*n)?;
            writeln!(out, "{l:.10}")?;
            Ok(())
        }
        Command::OmEval(a) => with_config(a, out, cmd_om_eval),
        Command::Mpp { args, oracle } => with_config(args, out, |cfg, dir| cmd_mpp(cfg, dir, *oracle)),
        Command::Smallball { args, ratio } => {
            with_config(args, out, |cfg, dir| cmd_smallball(cfg, dir, *ratio, cli.threads))
        }
        Command::CartanCheck(a) => with_config(a, out, cmd_cartan_check),
        Command::TransportCheck(a) => with_config(a, out, cmd_transport_check),
    }
}

fn with_config(
    args: &ConfigArgs,
    out: &mut dyn Write,
    cmd: impl FnOnce(&ExperimentConfig, &Path) -> Result<Value>,
) -> Result<()> {
    let cfg = ExperimentConfig::from_path(&args.config, &args.overrides)?;
    let dir = args.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&dir)?;
    let report = cmd(&cfg, &dir)?;
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    Ok(())
}

/// Rounds every float to 12 significant digits and stamps the schema version.
fn finalize(command: &str, mut report: Value) -> Value {
    fn round(v: &mut Value) {
        match v {
            Value::Number(n) if n.is_f64() => {
                if let Some(r) = n.as_f64().map(crate::round12).and_then(serde_json::Number::from_f64) {
                    *n = r;
                }
            }
            Value::Array(a) => a.iter_mut().for_each(round),
            Value::Object(o) => o.values_mut().for_each(round),
            _ => {}
        }
    }
    round(&mut report);
    if let Value::Object(o) = &mut report {
        o.insert("schema_version".into(), json!(SCHEMA_VERSION));
        o.insert("command".into(), json!(command));
    }
    report
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn cmd_om_eval(cfg: &ExperimentConfig, dir: &Path) -> Result<Value> {
    let family = cfg.build_family()?;
    let drift = cfg.build_drift()?;
    let curve = cfg.build_curve()?;
    let weight = cfg.build_weight()?;
    let (family, drift, curve) = (&*family, &*drift, &*curve);

    let series: Vec<LagrangianSample> = if weight.is_unit() {
        lagrangian_series(family, drift, curve, cfg.om.samples)?
    } else {
        let steps = cfg.om.samples;
        (0..=steps)
            .map(|k| {
                let t = cfg.horizon * k as f64 / steps as f64;
                let x = curve.position(t);
                weighted_lagrangian(family, drift, &weight, t, x.as_slice(), &curve.velocity(t), WeightedVariant::TimeChanged)
            })
            .collect::<Result<_>>()?
    };
    let mut w = csv::Writer::from_path(dir.join("om_series.csv"))?;
    w.write_record([
        "t",
        "kinetic",
        "div_term",
        "scalar_term",
        "trace_term",
        "weight_term",
        "kinetic_coefficient",
        "total",
    ])?;
    for s in &series {
        let row = [s.t, s.kinetic, s.div_term, s.scalar_term, s.trace_term, s.weight_term, s.kinetic_coefficient, s.total];
        w.write_record(row.iter().map(|v| crate::fmt_num(*v)))?;
    }
    w.flush()?;

    let mut report = json!({
        "family": family.name(),
        "horizon": cfg.horizon,
        "quadrature_steps": cfg.om.steps,
        "action": action(family, drift, curve, cfg.om.steps)?,
    });
    if !weight.is_unit() {
        report["weighted_action"] = json!({
            "time_changed": weighted_action(family, drift, &weight, curve, cfg.om.steps, WeightedVariant::TimeChanged)?,
            "printed": weighted_action(family, drift, &weight, curve, cfg.om.steps, WeightedVariant::Printed)?,
        });
    }
    let report = finalize("om-eval", report);
    write_json(&dir.join("om_action.json"), &report)?;
    Ok(report)
}

fn endpoints(cfg: &ExperimentConfig, family: &dyn MetricFamily) -> Result<(DVector<f64>, DVector<f64>)> {
    let (x0, x1) = if cfg.mpp.x0.is_empty() || cfg.mpp.x1.is_empty() {
        let c = cfg.build_curve()?;
        (c.position(0.0), c.position(cfg.horizon))
    } else {
        (DVector::from_column_slice(&cfg.mpp.x0), DVector::from_column_slice(&cfg.mpp.x1))
    };
    geometry::check_point(family, 0.0, x0.as_slice())?;
    geometry::check_point(family, cfg.horizon, x1.as_slice())?;
    Ok((x0, x1))
}

pub fn cmd_mpp(cfg: &ExperimentConfig, dir: &Path, oracle: bool) -> Result<Value> {
    let family = cfg.build_family()?;
    let drift = cfg.build_drift()?;
    let (family, drift) = (&*family, &*drift);
    let (x0, x1) = endpoints(cfg, family)?;
    let sol = solve_mpp_bvp(family, drift, x0.as_slice(), x1.as_slice(), cfg.horizon, None)?;
    write_curve_csv(&sol.curve, cfg.mpp.samples, BufWriter::new(File::create(dir.join("mpp_curve.csv"))?))?;
    let mut report = json!({
        "family": family.name(),
        "horizon": cfg.horizon,
        "x0": vec_of(&x0),
        "x1": vec_of(&x1),
        "action": sol.action,
        "terminal_error": sol.terminal_error,
        "shots": sol.shots,
        "initial_velocity": vec_of(&sol.initial_velocity),
        "critical_curves": sol.critical_curves,
    });
    if oracle {
        let direct = minimize_action_direct(family, drift, x0.as_slice(), x1.as_slice(), cfg.horizon, cfg.mpp.knots)?;
        report["oracle"] = json!({
            "knots": cfg.mpp.knots,
            "action": direct.action,
            "iterations": direct.iterations,
            "gradient_norm": direct.gradient_norm,
            "l2_gap": l2_distance(&sol.curve, &direct.curve, 1000)?,
            "relative_action_gap": (sol.action - direct.action).abs() / sol.action.abs().max(1e-300),
        });
    }
    let report = finalize("mpp", report);
    write_json(&dir.join("mpp_report.json"), &report)?;
    Ok(report)
}

pub fn cmd_smallball(cfg: &ExperimentConfig, dir: &Path, ratio: bool, threads: Option<usize>) -> Result<Value> {
    let family = cfg.build_family()?;
    let drift = cfg.build_drift()?;
    let curve = cfg.build_curve()?;
    let weight = cfg.build_weight()?;
    let (family, drift, curve) = (&*family, &*drift, &*curve);
    let x0 = match &cfg.sde.x0 {
        Some(x) => DVector::from_column_slice(x),
        None => curve.position(0.0),
    };
    let mut spec = DiffusionSpec::new(family, drift, x0, cfg.horizon)?;
    if let Some(dt) = cfg.sde.dt {
        spec = spec.with_dt(dt)?;
    }
    let opts = McOptions { threads, bridge_correction: cfg.sde.bridge_correction };
    let (n_paths, seed) = (cfg.sde.n_paths, cfg.sde.seed);

    if ratio {
        if !weight.is_unit() {
            return Err(Error::Config("weight.kind must be 'unit' for --ratio".into()));
        }
        let curve_b = cfg.build_curve_b()?;
        let eps = *cfg.sde.epsilons.first().ok_or_else(|| Error::Config("sde.epsilons is empty".into()))?;
        let r = ratio_experiment_with(&spec, curve, &*curve_b, eps, n_paths, seed, &opts)?;
        let report = finalize("smallball --ratio", json!({ "family": family.name(), "horizon": cfg.horizon, "ratio": r }));
        write_json(&dir.join("ratio.json"), &report)?;
        return Ok(report);
    }

    let mut estimates = Vec::new();
    let mut rows = Vec::new();
    let mut w = csv::Writer::from_path(dir.join("smallball.csv"))?;
    w.write_record(["epsilon", "p_hat", "ci_lo", "ci_hi", "predicted_exponent", "eps2_log_p_hat"])?;
    for &eps in &cfg.sde.epsilons {
        let est = tube_probability_with(&spec, curve, eps, &weight, n_paths, seed, &opts)?;
        let mut pred = asymptotic_prediction(family, drift, curve, &weight, eps)?;
        if let Some(c) = reference_constant(family.dim()) {
            pred = pred.with_constant(c);
        }
        let exponent = -pred.decay_exponent - pred.action;
        let eps2_log = eps * eps * est.p_hat.ln();
        w.write_record([eps, est.p_hat, est.ci95.0, est.ci95.1, exponent, eps2_log].iter().map(|v| crate::fmt_num(*v)))?;
        rows.push(json!({
            "estimate": est,
            "prediction": pred,
            "predicted_exponent": exponent,
            "eps2_log_p_hat": if eps2_log.is_finite() { json!(eps2_log) } else { Value::Null },
        }));
        estimates.push(est);
    }
    w.flush()?;
    let calibration = match calibrate_constant(family, drift, curve, &weight, &estimates) {
        Ok(c) => json!(c),
        Err(Error::DegenerateRatio | Error::InvalidArgument(_)) => Value::Null,
        Err(e) => return Err(e),
    };
    let report = finalize(
        "smallball",
        json!({
            "family": family.name(),
            "horizon": cfg.horizon,
            "weight": weight.label(),
            "results": rows,
            "reference_constant": reference_constant(family.dim()),
            "calibration": calibration,
        }),
    );
    write_json(&dir.join("smallball.json"), &report)?;
    Ok(report)
}

pub fn cmd_cartan_check(cfg: &ExperimentConfig, dir: &Path) -> Result<Value> {
    let family = cfg.build_family()?;
    let center = cfg.cartan.center.clone().unwrap_or_else(|| vec![0.0; family.dim()]);
    let report = cartan_expansion_check(&*family, cfg.cartan.t, &center)?;
    let report = finalize("cartan-check", json!({ "family": family.name(), "report": report }));
    write_json(&dir.join("cartan.json"), &report)?;
    Ok(report)
}

pub fn cmd_transport_check(cfg: &ExperimentConfig, dir: &Path) -> Result<Value> {
    let family = cfg.build_family()?;
    let curve = cfg.build_curve()?;
    let (family, curve): (&dyn MetricFamily, &dyn Curve) = (&*family, &*curve);
    let x0 = curve.position(0.0);
    let frame0 = geometry::orthonormal_frame(family, 0.0, x0.as_slice())?;
    let steps = cfg.transport.steps;
    let coarse = parallel_transport_with_steps(family, curve, &frame0, steps)?;
    let fine = parallel_transport_with_steps(family, curve, &frame0, 2 * steps)?;
    let (d1, d2) = (coarse.orthonormality_defect(family, curve), fine.orthonormality_defect(family, curve));
    coarse.write_csv(BufWriter::new(File::create(dir.join("transport_frames.csv"))?))?;
    let report = finalize(
        "transport-check",
        json!({
            "family": family.name(),
            "horizon": cfg.horizon,
            "steps": steps,
            "defect": d1,
            "defect_half_step": d2,
            "reduction_factor": if d2 > 0.0 { json!(d1 / d2) } else { Value::Null },
        }),
    );
    write_json(&dir.join("transport.json"), &report)?;
    Ok(report)
}
