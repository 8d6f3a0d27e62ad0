//! Experiment configuration: a TOML file of flat dotted keys (`family.name = "sphere"`),
//! optionally patched with `--set key=value` overrides.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    ConformalFamily, ConstantField, EuclideanFamily, FlatTorus, LinearField, MetricFamily, RicciFlowSphere,
    VectorField, ZeroField,
};
use crate::lagrangian::WeightFunction;
use crate::transport::{AnalyticCurve, Curve, SplineCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub horizon: f64,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub drift: DriftConfig,
    #[serde(default)]
    pub curve: CurveConfig,
    /// Second curve for `smallball --ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_b: Option<CurveConfig>,
    #[serde(default)]
    pub weight: WeightConfig,
    #[serde(default)]
    pub sde: SdeConfig,
    #[serde(default)]
    pub om: OmConfig,
    #[serde(default)]
    pub mpp: MppConfig,
    #[serde(default)]
    pub cartan: CartanConfig,
    #[serde(default)]
    pub transport: TransportConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// `name` ∈ {euclidean, conformal, torus, sphere}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    pub name: String,
    pub dim: usize,
    /// conformal: `g = e^{2 rate t} δ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// sphere: `∂_t g = α Ric`, default 0 (static round sphere).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// sphere: initial scale `c(0)`, default 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    /// torus: `g_ii(t) = coeffs_i e^{rates_i t}` on `Π [0, periods_i]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<f64>>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self { name: "euclidean".into(), dim: 1, rate: None, alpha: None, c0: None, coeffs: None, rates: None, periods: None }
    }
}

/// `kind` ∈ {zero, constant, linear}; `linear` is `Z(x) = matrix·x + offset` with a row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self { kind: "zero".into(), value: None, matrix: None, offset: None }
    }
}

/// `kind` ∈ {constant (point), line (start, end), affine (start, velocity), csv (path)}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self { kind: "constant".into(), point: None, start: None, end: None, velocity: None, path: None }
    }
}

/// `kind` ∈ {unit, constant (value), exponential (rate: f = e^{rate t})}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self { kind: "unit".into(), value: None, rate: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdeConfig {
    pub epsilons: Vec<f64>,
    pub n_paths: u64,
    pub seed: u64,
    /// Defaults to `T / 4000`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Start point; defaults to `curve(0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub bridge_correction: bool,
}

fn yes() -> bool {
    true
}

impl Default for SdeConfig {
    fn default() -> Self {
        Self { epsilons: vec![0.5], n_paths: 100_000, seed: 0, dt: None, x0: None, bridge_correction: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OmConfig {
    /// Simpson intervals for the action (even).
    pub steps: usize,
    /// Intervals of the written Lagrangian series.
    pub samples: usize,
}

impl Default for OmConfig {
    fn default() -> Self {
        Self { steps: 1000, samples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MppConfig {
    #[serde(default)]
    pub x0: Vec<f64>,
    #[serde(default)]
    pub x1: Vec<f64>,
    /// Intervals of the direct minimiser used by `--oracle`.
    pub knots: usize,
    /// Rows of the written curve CSV.
    pub samples: usize,
}

impl Default for MppConfig {
    fn default() -> Self {
        Self { x0: Vec::new(), x1: Vec::new(), knots: 200, samples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CartanConfig {
    #[serde(default)]
    pub t: f64,
    /// Defaults to the chart origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    pub steps: usize,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self { steps: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from(".") }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// A minimal config on `[0, horizon]`; everything else takes its default.
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            family: FamilyConfig::default(),
            drift: DriftConfig::default(),
            curve: CurveConfig::default(),
            curve_b: None,
            weight: WeightConfig::default(),
            sde: SdeConfig::default(),
            om: OmConfig::default(),
            mpp: MppConfig::default(),
            cartan: CartanConfig::default(),
            transport: TransportConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses and validates. Relative CSV paths are resolved against `base_dir`.
    pub fn parse(text: &str, overrides: &[String], base_dir: Option<&Path>) -> Result<Self> {
        // deserialising the file on its own first gives line-numbered diagnostics
        let _: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let mut table: toml::Table = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let mut cfg: ExperimentConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        if let Some(base) = base_dir {
            for c in std::iter::once(&mut cfg.curve).chain(cfg.curve_b.as_mut()) {
                if let Some(p) = c.path.as_mut() {
                    if p.is_relative() {
                        *p = base.join(&*p);
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides, path.parent()).map_err(|e| match e {
            Error::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Flat `dotted.key = value` lines in a fixed order; `parse(emit())` reproduces `self`.
    pub fn emit(&self) -> Result<String> {
        let value = toml::Value::try_from(self).map_err(|e| config_err(e.to_string()))?;
        let mut out = String::new();
        flatten("", &value, &mut out);
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("horizon", self.horizon)?;
        let n = self.family.dim;
        if !(1..=10).contains(&n) {
            return Err(config_err(format!("family.dim must lie in 1..=10, got {n}")));
        }
        match self.family.name.as_str() {
            "euclidean" | "conformal" => {}
            "sphere" if (2..=3).contains(&n) => {}
            "sphere" => return Err(config_err(format!("family.dim must be 2 or 3 for the sphere, got {n}"))),
            "torus" => {
                for (key, v) in [
                    ("family.coeffs", &self.family.coeffs),
                    ("family.rates", &self.family.rates),
                    ("family.periods", &self.family.periods),
                ] {
                    if let Some(v) = v {
                        check_len(key, v, n)?;
                    }
                }
            }
            other => {
                return Err(config_err(format!(
                    "family.name: unknown family '{other}' (expected euclidean, conformal, torus or sphere)"
                )))
            }
        }
        if let Some(c0) = self.family.c0 {
            positive("family.c0", c0)?;
        }
        match self.drift.kind.as_str() {
            "zero" => {}
            "constant" => check_len("drift.value", require("drift.value", &self.drift.value)?, n)?,
            "linear" => {
                check_len("drift.matrix", require("drift.matrix", &self.drift.matrix)?, n * n)?;
                if let Some(o) = &self.drift.offset {
                    check_len("drift.offset", o, n)?;
                }
            }
            other => return Err(config_err(format!("drift.kind: unknown kind '{other}'"))),
        }
        validate_curve("curve", &self.curve, n)?;
        if let Some(c) = &self.curve_b {
            validate_curve("curve_b", c, n)?;
        }
        match self.weight.kind.as_str() {
            "unit" => {}
            "constant" => positive("weight.value", *require("weight.value", &self.weight.value)?)?,
            "exponential" => {
                let r = *require("weight.rate", &self.weight.rate)?;
                if !r.is_finite() {
                    return Err(config_err("weight.rate must be finite"));
                }
            }
            other => return Err(config_err(format!("weight.kind: unknown kind '{other}'"))),
        }
        for &e in &self.sde.epsilons {
            positive("sde.epsilons", e)?;
        }
        if self.sde.n_paths == 0 {
            return Err(config_err("sde.n_paths must be at least 1"));
        }
        if let Some(dt) = self.sde.dt {
            positive("sde.dt", dt)?;
            if dt > self.horizon {
                return Err(config_err("sde.dt must not exceed the horizon"));
            }
        }
        if let Some(x0) = &self.sde.x0 {
            check_len("sde.x0", x0, n)?;
        }
        if self.om.steps < 2 || self.om.steps % 2 != 0 {
            return Err(config_err(format!("om.steps must be even and at least 2, got {}", self.om.steps)));
        }
        if self.om.samples == 0 || self.mpp.samples == 0 {
            return Err(config_err("om.samples and mpp.samples must be positive"));
        }
        if self.mpp.knots < 2 {
            return Err(config_err("mpp.knots must be at least 2"));
        }
        for (key, v) in [("mpp.x0", &self.mpp.x0), ("mpp.x1", &self.mpp.x1)] {
            if !v.is_empty() {
                check_len(key, v, n)?;
            }
        }
        if let Some(c) = &self.cartan.center {
            check_len("cartan.center", c, n)?;
        }
        if self.transport.steps == 0 {
            return Err(config_err("transport.steps must be positive"));
        }
        Ok(())
    }

    pub fn build_family(&self) -> Result<Box<dyn MetricFamily>> {
        let f = &self.family;
        let n = f.dim;
        let horizon = self.horizon;
        Ok(match f.name.as_str() {
            "euclidean" => Box::new(EuclideanFamily::new(n, horizon)?),
            "conformal" => Box::new(ConformalFamily::linear(n, f.rate.unwrap_or(0.0), horizon)?),
            "torus" => Box::new(FlatTorus::new(
                f.coeffs.clone().unwrap_or_else(|| vec![1.0; n]),
                f.rates.clone().unwrap_or_else(|| vec![0.0; n]),
                f.periods.clone().unwrap_or_else(|| vec![2.0 * std::f64::consts::PI; n]),
                horizon,
            )?),
            "sphere" => Box::new(RicciFlowSphere::new(n, f.alpha.unwrap_or(0.0), f.c0.unwrap_or(1.0), horizon)?),
            other => return Err(config_err(format!("family.name: unknown family '{other}'"))),
        })
    }

    pub fn build_drift(&self) -> Result<Box<dyn VectorField>> {
        let n = self.family.dim;
        let d = &self.drift;
        Ok(match d.kind.as_str() {
            "zero" => Box::new(ZeroField(n)),
            "constant" => Box::new(ConstantField(DVector::from_column_slice(require("drift.value", &d.value)?))),
            "linear" => {
                let m = DMatrix::from_row_slice(n, n, require("drift.matrix", &d.matrix)?);
                let o = d.offset.clone().map(DVector::from_vec).unwrap_or_else(|| DVector::zeros(n));
                Box::new(LinearField::new(m, o))
            }
            other => return Err(config_err(format!("drift.kind: unknown kind '{other}'"))),
        })
    }

    /// The tube centre; a `constant` curve without `point` sits at the chart origin.
    pub fn build_curve(&self) -> Result<Box<dyn Curve>> {
        build_curve("curve", &self.curve, self.horizon, self.family.dim)
    }

    pub fn build_curve_b(&self) -> Result<Box<dyn Curve>> {
        let c = self.curve_b.as_ref().ok_or_else(|| config_err("curve_b is required for --ratio"))?;
        build_curve("curve_b", c, self.horizon, self.family.dim)
    }

    pub fn build_weight(&self) -> Result<WeightFunction> {
        let w = &self.weight;
        Ok(match w.kind.as_str() {
            "unit" => WeightFunction::unit(),
            "constant" => WeightFunction::constant(*require("weight.value", &w.value)?),
            "exponential" => WeightFunction::exponential(*require("weight.rate", &w.rate)?),
            other => return Err(config_err(format!("weight.kind: unknown kind '{other}'"))),
        })
    }
}

fn require<'a, T>(key: &str, v: &'a Option<T>) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| config_err(format!("{key} is required")))
}

fn check_len(key: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(config_err(format!("{key} must have {n} entries, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(format!("{key} must be finite")));
    }
    Ok(())
}

fn validate_curve(prefix: &str, c: &CurveConfig, n: usize) -> Result<()> {
    let key = |k: &str| format!("{prefix}.{k}");
    match c.kind.as_str() {
        "constant" => {
            if let Some(p) = &c.point {
                check_len(&key("point"), p, n)?;
            }
        }
        "line" => {
            check_len(&key("start"), require(&key("start"), &c.start)?, n)?;
            check_len(&key("end"), require(&key("end"), &c.end)?, n)?;
        }
        "affine" => {
            check_len(&key("start"), require(&key("start"), &c.start)?, n)?;
            check_len(&key("velocity"), require(&key("velocity"), &c.velocity)?, n)?;
        }
        "csv" => {
            let p = require(&key("path"), &c.path)?;
            if !p.is_file() {
                return Err(config_err(format!("{}: file {} does not exist", key("path"), p.display())));
            }
        }
        other => return Err(config_err(format!("{}: unknown kind '{other}'", key("kind")))),
    }
    Ok(())
}

fn build_curve(prefix: &str, c: &CurveConfig, horizon: f64, n: usize) -> Result<Box<dyn Curve>> {
    let v = |x: &Option<Vec<f64>>, k: &str| -> Result<DVector<f64>> {
        Ok(DVector::from_column_slice(require(&format!("{prefix}.{k}"), x)?))
    };
    Ok(match c.kind.as_str() {
        "constant" => {
            let p = c.point.as_deref().map(DVector::from_column_slice).unwrap_or_else(|| DVector::zeros(n));
            Box::new(AnalyticCurve::constant(p, horizon))
        }
        "line" => Box::new(AnalyticCurve::line(v(&c.start, "start")?, v(&c.end, "end")?, horizon)),
        "affine" => Box::new(AnalyticCurve::affine(v(&c.start, "start")?, v(&c.velocity, "velocity")?, horizon)),
        "csv" => {
            let s = SplineCurve::from_csv_path(require(&format!("{prefix}.path"), &c.path)?)?;
            if s.horizon() < horizon * (1.0 - 1e-12) {
                return Err(config_err(format!("{prefix}.path: curve ends at {} before the horizon {horizon}", s.horizon())));
            }
            Box::new(s)
        }
        other => return Err(config_err(format!("{prefix}.kind: unknown kind '{other}'"))),
    })
}

/// Applies `a.b.c=value`; the value is read as a TOML literal, or as a bare string.
fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| config_err(format!("override '{item}' is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("override key '{key}' is malformed")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override key '{key}': '{part}' is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut String) {
    match value {
        toml::Value::Table(t) => {
            // scalars before sub-tables so the file reads top-down
            let (tables, leaves): (Vec<_>, Vec<_>) = t.iter().partition(|(_, v)| v.is_table());
            for (k, v) in leaves.into_iter().chain(tables) {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        leaf => {
            out.push_str(prefix);
            out.push_str(" = ");
            out.push_str(&leaf.to_string());
            out.push('\n');
        }
    }
}
