use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::artifacts::run_and_write;
use crate::config::{run_from_value, SweepConfig, SCHEMA_VERSION};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct FailedPoint {
    pub point: usize,
    pub values: Vec<Value>,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
struct SweepManifest<'a> {
    schema_version: u32,
    code_version: &'a str,
    config: &'a SweepConfig,
    points: usize,
    succeeded: usize,
    failed: Vec<FailedPoint>,
    duration_seconds: f64,
}

pub struct SweepSummary {
    pub dir: PathBuf,
    pub points: usize,
    pub failed: Vec<FailedPoint>,
}

/// Cartesian product of the axis values, first axis slowest.
pub fn grid_points(cfg: &SweepConfig) -> Vec<Vec<Value>> {
    let mut points = vec![Vec::new()];
    for axis in &cfg.axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    points
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepSummary, CliError> {
    let start = Instant::now();
    let root = cfg.output.dir.clone();
    fs::create_dir_all(&root)?;
    let points = grid_points(cfg);
    let results: Vec<Result<String, FailedPoint>> = points
        .par_iter()
        .enumerate()
        .map(|(i, values)| run_point(cfg, &root, i, values))
        .collect();

    let mut index = String::from("point");
    for axis in &cfg.axes {
        write!(index, ",{}", axis.param).unwrap();
    }
    index.push_str(",dir\n");
    let mut failed = Vec::new();
    for (i, (values, r)) in points.iter().zip(results).enumerate() {
        match r {
            Ok(dir) => {
                write!(index, "{i}").unwrap();
                for v in values {
                    write!(index, ",{}", csv_field(v)).unwrap();
                }
                writeln!(index, ",{dir}").unwrap();
            }
            Err(f) => failed.push(f),
        }
    }
    fs::write(root.join("index.csv"), index)?;
    let manifest = SweepManifest {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        points: points.len(),
        succeeded: points.len() - failed.len(),
        failed: failed.clone(),
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    fs::write(root.join("sweep.manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    Ok(SweepSummary { dir: root, points: points.len(), failed })
}

fn run_point(cfg: &SweepConfig, root: &Path, i: usize, values: &[Value]) -> Result<String, FailedPoint> {
    let name = format!("point_{i:04}");
    let fail = |e: CliError| FailedPoint { point: i, values: values.to_vec(), error: e.to_string(), exit_code: e.exit_code() };
    let mut raw = cfg.base.clone();
    let obj = raw.as_object_mut().ok_or_else(|| fail(CliError::config("base", "must be an object")))?;
    obj.entry("schema_version").or_insert(Value::from(SCHEMA_VERSION));
    let params = obj.entry("params").or_insert_with(|| Value::Object(Default::default()));
    for (axis, v) in cfg.axes.iter().zip(values) {
        params[&axis.param] = v.clone();
    }
    obj.insert(
        "output".into(),
        serde_json::json!({ "dir": root.join(&name), "svg": cfg.output.svg }),
    );
    let run = run_from_value(raw).map_err(fail)?;
    run_and_write(&run).map_err(fail)?;
    Ok(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Axis, OutputSpec};

    #[test]
    fn first_axis_varies_slowest() {
        let cfg = SweepConfig {
            schema_version: SCHEMA_VERSION,
            base: serde_json::json!({}),
            axes: vec![
                Axis { param: "a".into(), values: vec![1.into(), 2.into()] },
                Axis { param: "b".into(), values: vec!["x".into(), "y".into(), "z".into()] },
            ],
            output: OutputSpec::default(),
        };
        let p = grid_points(&cfg);
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], vec![Value::from(1), Value::from("y")]);
        assert_eq!(p[3], vec![Value::from(2), Value::from("x")]);
    }
}
