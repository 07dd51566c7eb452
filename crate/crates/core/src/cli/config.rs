//! Run configuration: a TOML file, then `--param`, `--grid` and `--tol`
//! overrides on top of it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::error::Error;
use crate::lattice::SolitonSpec;
use crate::verify::{GridSpec, Tolerances};
use crate::weierstrass::Invariants;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub mask_radius: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -2.0,
            x_max: 2.0,
            n_points: 801,
            mask_radius: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub report: String,
    pub series: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            report: "report.toml".into(),
            series: "build.csv".into(),
        }
    }
}

/// Everything a subcommand may need. Defaults are the figure parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub g2: f64,
    pub g3: f64,
    pub deltas: Vec<f64>,
    /// Velocity of the traveling-wave lift; the time check runs only if set.
    pub b: Option<f64>,
    pub t_samples: Vec<f64>,
    /// Modulus for `eval sn`; taken from the roots when absent.
    pub k2: Option<f64>,
    /// Also write u = z_x to the series files.
    pub with_u: bool,
    pub grid: GridConfig,
    pub tolerances: BTreeMap<String, f64>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            g2: 0.3,
            g3: 0.7,
            deltas: vec![-0.02, 0.04],
            b: None,
            t_samples: vec![0.0, 0.1, 0.2],
            k2: None,
            with_u: false,
            grid: GridConfig::default(),
            tolerances: BTreeMap::new(),
            output: OutputConfig::default(),
        }
    }
}

fn config_error(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Parses `key = value` as TOML, retrying a bare comma list as an array and
/// anything else as a string.
fn parse_assignment(key: &str, value: &str) -> Result<toml::Table, CliError> {
    let key = key.trim();
    if key.is_empty() {
        return Err(config_error("--param", "empty key"));
    }
    let value = value.trim();
    let candidates = [
        value.to_string(),
        format!("[{value}]"),
        toml::Value::String(value.to_string()).to_string(),
    ];
    for v in &candidates {
        if let Ok(t) = format!("{key} = {v}").parse::<toml::Table>() {
            return Ok(t);
        }
    }
    Err(config_error(key, format!("cannot parse override value `{value}`")))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Command-line overrides, applied in this order after the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub params: Vec<String>,
    pub grid: Option<String>,
    pub tols: Vec<String>,
}

fn split_pair<'a>(flag: &str, s: &'a str) -> Result<(&'a str, &'a str), CliError> {
    s.split_once('=')
        .ok_or_else(|| config_error(flag, format!("expected key=value, got `{s}`")))
}

impl RunConfig {
    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io {
                    path: p.to_path_buf(),
                    source: e,
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| config_error(p.display().to_string(), e.message().to_string()))?
            }
            None => toml::Table::new(),
        };
        for p in &ov.params {
            let (k, v) = split_pair("--param", p)?;
            merge(&mut table, parse_assignment(k, v)?);
        }
        if let Some(g) = &ov.grid {
            let parts: Vec<&str> = g.split(',').map(str::trim).collect();
            let [lo, hi, n] = parts[..] else {
                return Err(config_error("--grid", format!("expected min,max,n, got `{g}`")));
            };
            let num = |field: &str, s: &str| {
                s.parse::<f64>()
                    .map_err(|_| config_error(field, format!("`{s}` is not a number")))
            };
            let n: i64 = n
                .parse()
                .map_err(|_| config_error("grid.n_points", format!("`{n}` is not an integer")))?;
            let mut grid = toml::Table::new();
            grid.insert("x_min".into(), num("grid.x_min", lo)?.into());
            grid.insert("x_max".into(), num("grid.x_max", hi)?.into());
            grid.insert("n_points".into(), n.into());
            let mut over = toml::Table::new();
            over.insert("grid".into(), grid.into());
            merge(&mut table, over);
        }
        for t in &ov.tols {
            let (k, v) = split_pair("--tol", t)?;
            let field = format!("tolerances.{}", k.trim());
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| config_error(&field, format!("`{v}` is not a number")))?;
            let mut tol = toml::Table::new();
            tol.insert(k.trim().to_string(), v.into());
            let mut over = toml::Table::new();
            over.insert("tolerances".into(), tol.into());
            merge(&mut table, over);
        }
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self, CliError> {
        // deserialize key by key so that a type error names its field
        let mut cfg = RunConfig::default();
        for (k, v) in table {
            let field = k.clone();
            // a single number is a one-element list
            let v = match (k.as_str(), v) {
                ("deltas" | "t_samples", v @ (toml::Value::Float(_) | toml::Value::Integer(_))) => {
                    toml::Value::Array(vec![v])
                }
                (_, v) => v,
            };
            let mut one = toml::Table::new();
            one.insert(k, v);
            let partial: PartialConfig = one
                .try_into()
                .map_err(|e: toml::de::Error| config_error(&field, e.message().to_string()))?;
            partial.apply(&mut cfg);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("g2", self.g2), ("g3", self.g3)] {
            if !v.is_finite() {
                return Err(config_error(name, format!("must be finite, got {v}")));
            }
        }
        for (i, d) in self.deltas.iter().enumerate() {
            if !d.is_finite() {
                return Err(config_error(format!("deltas[{i}]"), format!("must be finite, got {d}")));
            }
        }
        if let Some(b) = self.b {
            if !b.is_finite() {
                return Err(config_error("b", format!("must be finite, got {b}")));
            }
        }
        for (i, t) in self.t_samples.iter().enumerate() {
            if !t.is_finite() {
                return Err(config_error(
                    format!("t_samples[{i}]"),
                    format!("must be finite, got {t}"),
                ));
            }
        }
        if let Some(k2) = self.k2 {
            if !(0.0..=1.0).contains(&k2) {
                return Err(config_error("k2", format!("must lie in [0, 1], got {k2}")));
            }
        }
        self.tolerances()?;
        self.grid()?;
        Ok(())
    }

    pub fn invariants(&self) -> Result<Invariants, CliError> {
        Invariants::new(self.g2, self.g3).map_err(|e| config_error("g2/g3", e.to_string()))
    }

    pub fn spec(&self) -> Result<SolitonSpec, CliError> {
        self.spec_with(&self.deltas)
    }

    pub fn spec_with(&self, deltas: &[f64]) -> Result<SolitonSpec, CliError> {
        let inv = self.invariants()?;
        SolitonSpec::new(inv, deltas).map_err(|e| match e {
            Error::DegenerateDeltas { i, j, .. } => config_error(format!("deltas[{i}], deltas[{j}]"), e.to_string()),
            Error::PoleProximity { x } => {
                let i = deltas.iter().position(|&d| d == x).unwrap_or(0);
                config_error(
                    format!("deltas[{i}]"),
                    format!("delta = {x} sits on a pole of the lattice"),
                )
            }
            other => CliError::Numeric(other),
        })
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let g = &self.grid;
        GridSpec::new(g.x_min, g.x_max, g.n_points, g.mask_radius).map_err(|e| config_error("grid", e.to_string()))
    }

    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut tol = Tolerances::default();
        // `all` first, so that named entries refine it
        let ordered = self
            .tolerances
            .iter()
            .filter(|(k, _)| k.as_str() == "all")
            .chain(self.tolerances.iter().filter(|(k, _)| k.as_str() != "all"));
        for (name, &v) in ordered {
            if v.is_nan() || v < 0.0 {
                return Err(config_error(
                    format!("tolerances.{name}"),
                    format!("must be a non-negative number, got {v}"),
                ));
            }
            if !tol.set(name, v) {
                return Err(config_error(format!("tolerances.{name}"), "unknown identity name"));
            }
        }
        Ok(tol)
    }

    pub fn out_dir(&self, cli_out: Option<&Path>) -> PathBuf {
        cli_out
            .map(Path::to_path_buf)
            .unwrap_or_else(|| self.output.dir.clone())
    }
}

/// One top-level key at a time; absent fields leave the config untouched.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    g2: Option<f64>,
    g3: Option<f64>,
    deltas: Option<Vec<f64>>,
    b: Option<f64>,
    t_samples: Option<Vec<f64>>,
    k2: Option<f64>,
    with_u: Option<bool>,
    grid: Option<PartialGrid>,
    tolerances: Option<BTreeMap<String, f64>>,
    output: Option<OutputConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialGrid {
    x_min: Option<f64>,
    x_max: Option<f64>,
    n_points: Option<usize>,
    mask_radius: Option<f64>,
}

impl PartialConfig {
    fn apply(self, cfg: &mut RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { cfg.$f = v; })*};
        }
        take!(g2, g3, deltas, t_samples, with_u, output);
        if self.b.is_some() {
            cfg.b = self.b;
        }
        if self.k2.is_some() {
            cfg.k2 = self.k2;
        }
        if let Some(t) = self.tolerances {
            cfg.tolerances.extend(t);
        }
        if let Some(g) = self.grid {
            let grid = &mut cfg.grid;
            grid.x_min = g.x_min.unwrap_or(grid.x_min);
            grid.x_max = g.x_max.unwrap_or(grid.x_max);
            grid.n_points = g.n_points.unwrap_or(grid.n_points);
            grid.mask_radius = g.mask_radius.unwrap_or(grid.mask_radius);
        }
    }
}
