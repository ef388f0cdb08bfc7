use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const SCHEMA: &str = include_str!("../schema/config.schema.json");

fn default_epsilon() -> f64 {
    3e-3
}
fn default_modes() -> usize {
    15
}
fn default_n_local() -> usize {
    20
}
fn default_n_global() -> usize {
    2000
}
fn default_dt_fraction() -> f64 {
    1.0 / 40.0
}
fn default_true() -> bool {
    true
}
fn default_out() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScanAxis {
    Dl,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Variant {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClosedForm {
    Resonance,
    Sum,
    Difference,
    Zeroth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Static,
    Dce,
    Zeroth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SpectrumParams {
    /// Wall susceptibility alpha/L.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Wall offset dL/L.
    #[arg(long, conflicts_with = "l1", allow_hyphen_values = true)]
    #[serde(default)]
    pub dl: Option<f64>,
    /// Left cavity length L1/L, instead of --dl.
    #[arg(long)]
    #[serde(default)]
    pub l1: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub v: f64,
    #[arg(long, default_value_t = 15)]
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    #[arg(long, requires = "range")]
    #[serde(default)]
    pub scan: Option<ScanAxis>,
    /// Scan grid `start:stop:count`.
    #[arg(long, requires = "scan", allow_hyphen_values = true)]
    #[serde(default)]
    pub range: Option<String>,
    /// Also write differences between consecutive wavenumbers.
    #[arg(long)]
    #[serde(default)]
    pub differences: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct CouplingsParams {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub l0: f64,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub v: f64,
    #[arg(long, default_value_t = 15)]
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    /// Compare against a half-step finite difference.
    #[arg(long)]
    #[serde(default)]
    pub check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct DriveParams {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub l0: f64,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub v: f64,
    /// Drive frequency: a number or a combination such as `2w1`, `w1+w2`, `w2-w1`.
    #[arg(long, default_value = "2w1")]
    pub omega: String,
    #[arg(long, default_value_t = 3e-3, allow_hyphen_values = true)]
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Stop times `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub tf_grid: String,
    #[arg(long, default_value_t = 15)]
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    /// Initial occupations, e.g. `1=50,2=0.5`.
    #[arg(long, default_value = "")]
    #[serde(default)]
    pub n0: String,
    #[arg(long, value_enum, default_value = "B")]
    #[serde(default = "default_variant")]
    pub variant: Variant,
    /// Integration step as a fraction of the shortest period.
    #[arg(long, default_value_t = 1.0 / 40.0)]
    #[serde(default = "default_dt_fraction")]
    pub dt_fraction: f64,
}

fn default_variant() -> Variant {
    Variant::B
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct MsaParams {
    #[command(flatten)]
    #[serde(flatten)]
    pub drive: DriveParams,
    #[arg(long, value_enum)]
    #[serde(default)]
    pub closed_form: Option<ClosedForm>,
    /// For the zeroth-mode scheme: treat the exchange as exactly resonant.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "default_true")]
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct EntangleParams {
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub l0: f64,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub tf_grid: Option<String>,
    #[arg(long, default_value_t = 3e-3, allow_hyphen_values = true)]
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[arg(long, default_value_t = 20)]
    #[serde(default = "default_n_local")]
    pub n_local: usize,
    #[arg(long, default_value_t = 2000)]
    #[serde(default = "default_n_global")]
    pub n_global: usize,
    /// Quench duration.
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub dt: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    #[serde(default = "default_true")]
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitMapParams {
    pub circuit: dce_core::circuit::CircuitParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Command {
    Spectrum(SpectrumParams),
    Couplings(CouplingsParams),
    Evolve(DriveParams),
    Msa(MsaParams),
    Entangle(EntangleParams),
    CircuitMap(CircuitMapParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Couplings(_) => "couplings",
            Command::Evolve(_) => "evolve",
            Command::Msa(_) => "msa",
            Command::Entangle(_) => "entangle",
            Command::CircuitMap(_) => "circuit-map",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct OutputSpec {
    /// Directory for CSV, manifest and plot files.
    #[arg(long = "out", default_value = ".")]
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    #[serde(default)]
    pub svg: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_out(), svg: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Grid axes are applied to `base.params` as a cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub base: serde_json::Value,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub values: Vec<serde_json::Value>,
}

fn check_version(v: u32) -> Result<(), CliError> {
    if v != SCHEMA_VERSION {
        return Err(CliError::config("schema_version", format!("unsupported version {v}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

pub fn parse_run(text: &str) -> Result<RunConfig, CliError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?;
    run_from_value(raw)
}

pub fn run_from_value(raw: serde_json::Value) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_value(raw.clone()).map_err(|e| CliError::config("config", e.to_string()))?;
    check_version(cfg.schema_version)?;
    let resolved = serde_json::to_value(&cfg).expect("config serializes");
    unknown_keys("", &raw, &resolved)?;
    cfg.command.validate()?;
    Ok(cfg)
}

/// Rejects keys of `raw` that did not survive deserialization.
fn unknown_keys(path: &str, raw: &serde_json::Value, resolved: &serde_json::Value) -> Result<(), CliError> {
    if let (Some(r), Some(k)) = (raw.as_object(), resolved.as_object()) {
        for (key, value) in r {
            let here = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
            match k.get(key) {
                None => return Err(CliError::config(&here, "unknown field")),
                Some(inner) if key != "circuit" => unknown_keys(&here, value, inner)?,
                Some(_) => {}
            }
        }
    }
    Ok(())
}

pub fn parse_sweep(text: &str) -> Result<SweepConfig, CliError> {
    let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?;
    check_version(cfg.schema_version)?;
    if cfg.axes.is_empty() {
        return Err(CliError::config("axes", "at least one axis is required"));
    }
    let params = cfg.base.get("params").and_then(|p| p.as_object());
    for axis in &cfg.axes {
        if axis.values.is_empty() {
            return Err(CliError::config(&format!("axes.{}", axis.param), "no values"));
        }
        let declared = params.is_some_and(|p| p.contains_key(&axis.param)) || known_param(&cfg.base, &axis.param);
        if !declared {
            return Err(CliError::config(&format!("axes.{}", axis.param), "not a parameter of the base command"));
        }
    }
    Ok(cfg)
}

/// Parameters with defaults that a sweep may set even when the base omits them.
fn known_param(base: &serde_json::Value, name: &str) -> bool {
    let fields: &[&str] = match base.get("command").and_then(|c| c.as_str()) {
        Some("spectrum") => &["alpha", "dl", "l1", "v", "n_modes", "scan", "range", "differences"],
        Some("couplings") => &["alpha", "l0", "v", "n_modes", "check"],
        Some("evolve") => &["alpha", "l0", "v", "omega", "epsilon", "tf_grid", "n_modes", "n0", "variant", "dt_fraction"],
        Some("msa") => &["alpha", "l0", "v", "omega", "epsilon", "tf_grid", "n_modes", "n0", "variant", "dt_fraction", "closed_form", "matched"],
        Some("entangle") => &["protocol", "alpha", "l0", "tf_grid", "epsilon", "n_local", "n_global", "dt", "matched"],
        _ => &[],
    };
    fields.contains(&name)
}

/// `start:stop:count`, endpoints included.
pub fn parse_grid(field: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::config(field, format!("expected start:stop:count, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

/// Sparse occupations `m=value,...` expanded to `n_modes` entries.
pub fn parse_occupations(text: &str, n_modes: usize) -> Result<Vec<f64>, CliError> {
    let mut out = vec![0.0; n_modes];
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (m, v) = item.split_once('=').ok_or_else(|| CliError::config("n0", format!("expected m=value, got `{item}`")))?;
        let m: usize = m.trim().parse().map_err(|_| CliError::config("n0", format!("bad mode index `{m}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::config("n0", format!("bad occupation `{v}`")))?;
        if m >= n_modes {
            return Err(CliError::config("n0", format!("mode {m} beyond n_modes = {n_modes}")));
        }
        if !(v >= 0.0) {
            return Err(CliError::config("n0", format!("occupation of mode {m} must be >= 0")));
        }
        out[m] = v;
    }
    Ok(out)
}

/// Linear combination of mode frequencies `wN` and constants, such as
/// `2w1`, `w1+w2`, `w2 - w1`, `3*w1 - 0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyExpr {
    pub terms: Vec<(f64, Option<usize>)>,
}

impl FrequencyExpr {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::config("omega", format!("{why} in `{text}`"));
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(bad("empty expression"));
        }
        let mut terms = Vec::new();
        let mut rest = s.as_str();
        let mut sign = 1.0;
        if let Some(r) = rest.strip_prefix('-') {
            sign = -1.0;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        loop {
            let end = rest.find(['+', '-']).map(|i| {
                // keep exponents such as 1e-3 inside the term
                let mut i = i;
                while i > 0 && rest.as_bytes()[i - 1].eq_ignore_ascii_case(&b'e') && rest[..i - 1].chars().last().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    match rest[i + 1..].find(['+', '-']) {
                        Some(j) => i = i + 1 + j,
                        None => return rest.len(),
                    }
                }
                i
            });
            let end = end.unwrap_or(rest.len());
            let term = &rest[..end];
            if term.is_empty() {
                return Err(bad("missing term"));
            }
            terms.push(Self::term(term).map(|(c, m)| (sign * c, m)).ok_or_else(|| bad(&format!("cannot read term `{term}`")))?);
            if end == rest.len() {
                break;
            }
            sign = if rest.as_bytes()[end] == b'-' { -1.0 } else { 1.0 };
            rest = &rest[end + 1..];
        }
        Ok(Self { terms })
    }

    fn term(t: &str) -> Option<(f64, Option<usize>)> {
        match t.find(['w', 'W']) {
            Some(i) => {
                let coeff = t[..i].trim_end_matches('*');
                let c = if coeff.is_empty() { 1.0 } else { coeff.parse().ok()? };
                let m = t[i + 1..].parse().ok()?;
                Some((c, Some(m)))
            }
            None => t.parse().ok().map(|c| (c, None)),
        }
    }

    pub fn highest_mode(&self) -> Option<usize> {
        self.terms.iter().filter_map(|t| t.1).max()
    }

    pub fn eval(&self, omega: &[f64]) -> Result<f64, CliError> {
        let mut w = 0.0;
        for &(c, m) in &self.terms {
            w += match m {
                Some(m) => c * omega.get(m).ok_or_else(|| CliError::config("omega", format!("w{m} beyond the {} computed modes", omega.len())))?,
                None => c,
            };
        }
        Ok(w)
    }
}

fn finite(field: &str, v: f64) -> Result<(), CliError> {
    if !v.is_finite() {
        return Err(CliError::config(field, "must be finite"));
    }
    Ok(())
}

fn non_negative(field: &str, v: f64) -> Result<(), CliError> {
    finite(field, v)?;
    if v < 0.0 {
        return Err(CliError::config(field, format!("{v} must be >= 0")));
    }
    Ok(())
}

fn offset(field: &str, v: f64) -> Result<(), CliError> {
    finite(field, v)?;
    if v.abs() >= 1.0 {
        return Err(CliError::config(field, format!("|{v}| must be below 1 (units of L)")));
    }
    Ok(())
}

fn positive_count(field: &str, n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::config(field, "must be at least 1"));
    }
    Ok(())
}

impl DriveParams {
    fn validate(&self) -> Result<(), CliError> {
        non_negative("alpha", self.alpha)?;
        offset("l0", self.l0)?;
        non_negative("v", self.v)?;
        finite("epsilon", self.epsilon)?;
        positive_count("n_modes", self.n_modes)?;
        parse_grid("tf_grid", &self.tf_grid)?;
        if parse_grid("tf_grid", &self.tf_grid)?.iter().any(|&t| t < 0.0) {
            return Err(CliError::config("tf_grid", "stop times must be >= 0"));
        }
        parse_occupations(&self.n0, self.n_modes)?;
        let expr = FrequencyExpr::parse(&self.omega)?;
        if expr.highest_mode().is_some_and(|m| m >= self.n_modes) {
            return Err(CliError::config("omega", format!("refers to a mode beyond n_modes = {}", self.n_modes)));
        }
        if !(self.dt_fraction > 0.0 && self.dt_fraction <= 0.25) {
            return Err(CliError::config("dt_fraction", "must lie in (0, 0.25]"));
        }
        Ok(())
    }
}

impl Command {
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Command::Spectrum(p) => {
                non_negative("alpha", p.alpha)?;
                non_negative("v", p.v)?;
                positive_count("n_modes", p.n_modes)?;
                match (p.dl, p.l1) {
                    (Some(_), Some(_)) => return Err(CliError::config("dl", "give either dl or l1, not both")),
                    (Some(d), None) => offset("dl", d)?,
                    (None, Some(l)) => {
                        if !(l > 0.0 && l < 1.0) {
                            return Err(CliError::config("l1", "must lie in (0, 1)"));
                        }
                    }
                    (None, None) if p.scan != Some(ScanAxis::Dl) => return Err(CliError::config("dl", "dl or l1 is required")),
                    _ => {}
                }
                match (&p.scan, &p.range) {
                    (Some(axis), Some(r)) => {
                        let grid = parse_grid("range", r)?;
                        for v in grid {
                            match axis {
                                ScanAxis::Dl => offset("range", v)?,
                                ScanAxis::Alpha => non_negative("range", v)?,
                            }
                        }
                    }
                    (None, None) => {}
                    _ => return Err(CliError::config("scan", "scan and range go together")),
                }
            }
            Command::Couplings(p) => {
                non_negative("alpha", p.alpha)?;
                offset("l0", p.l0)?;
                non_negative("v", p.v)?;
                positive_count("n_modes", p.n_modes)?;
            }
            Command::Evolve(p) => p.validate()?,
            Command::Msa(p) => p.drive.validate()?,
            Command::Entangle(p) => {
                non_negative("alpha", p.alpha)?;
                offset("l0", p.l0)?;
                finite("epsilon", p.epsilon)?;
                non_negative("dt", p.dt)?;
                positive_count("n_local", p.n_local)?;
                if p.n_global < 3 {
                    return Err(CliError::config("n_global", "must be at least 3"));
                }
                match (&p.protocol, &p.tf_grid) {
                    (Protocol::Static, _) => {}
                    (_, None) => return Err(CliError::config("tf_grid", "required for this protocol")),
                    (_, Some(g)) => {
                        parse_grid("tf_grid", g)?;
                    }
                }
                if p.protocol == Protocol::Zeroth && !(p.alpha > 0.0) {
                    return Err(CliError::config("alpha", "the zeroth-mode protocol needs alpha > 0"));
                }
            }
            Command::CircuitMap(_) => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("g", "0:10:3").unwrap(), vec![0.0, 5.0, 10.0]);
        assert_eq!(parse_grid("g", "2:9:1").unwrap(), vec![2.0]);
        assert!(parse_grid("g", "0:1").is_err());
        assert!(parse_grid("g", "0:1:0").is_err());
    }

    #[test]
    fn occupations() {
        assert_eq!(parse_occupations("1=50, 3=0.5", 4).unwrap(), vec![0.0, 50.0, 0.0, 0.5]);
        assert_eq!(parse_occupations("", 2).unwrap(), vec![0.0, 0.0]);
        assert!(parse_occupations("4=1", 4).is_err());
        assert!(parse_occupations("1=-1", 4).is_err());
    }

    #[test]
    fn frequency_expressions() {
        let w = [0.5, 2.0, 3.0, 7.0];
        let eval = |s: &str| FrequencyExpr::parse(s).unwrap().eval(&w).unwrap();
        assert_eq!(eval("2w1"), 4.0);
        assert_eq!(eval("w1+w2"), 5.0);
        assert_eq!(eval("w2-w1"), 1.0);
        assert_eq!(eval(" 3*w1 - 0.5 "), 5.5);
        assert_eq!(eval("-w0+w3"), 6.5);
        assert_eq!(eval("1.5"), 1.5);
        assert_eq!(eval("1e-3+w0"), 0.501);
        assert!(FrequencyExpr::parse("2x1").is_err());
        assert!(FrequencyExpr::parse("w1++w2").is_err());
        assert!(FrequencyExpr::parse("w9").unwrap().eval(&w).is_err());
    }

    #[test]
    fn run_config_round_trip() {
        let text = r#"{"schema_version":1,"command":"spectrum","params":{"alpha":0.5,"dl":0.2}}"#;
        let cfg = parse_run(text).unwrap();
        match &cfg.command {
            Command::Spectrum(p) => assert_eq!(p.n_modes, 15),
            other => panic!("{other:?}"),
        }
        let again = parse_run(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn field_level_errors() {
        let err = parse_run(r#"{"schema_version":1,"command":"spectrum","params":{"alpha":-1,"dl":0.2}}"#).unwrap_err();
        assert!(err.to_string().contains("alpha"));
        let err = parse_run(r#"{"schema_version":1,"command":"spectrum","params":{"alpha":1,"dl":0.2,"bogus":1}}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = parse_run(r#"{"schema_version":7,"command":"spectrum","params":{"alpha":1,"dl":0.2}}"#).unwrap_err();
        assert!(err.to_string().contains("schema_version"));
    }
}
