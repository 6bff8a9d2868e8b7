//! Solver settings from defaults, an optional TOML file and `key=value`
//! overrides, applied in that order.

use std::path::Path;

use msp_core::baselines::SolverConfig;
use toml::{Table, Value};

use crate::Failure;

fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// `value` as a TOML literal when it parses as one, else as a string.
fn literal(value: &str) -> Value {
    format!("v = {value}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()))
}

fn set_path(table: &mut Table, path: &str, value: Value) -> Result<(), Failure> {
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().filter(|k| !k.is_empty()).ok_or_else(|| Failure::usage(format!("empty key in `{path}`")))?;
    let mut cur = table;
    for k in keys {
        cur = match cur.entry(k).or_insert_with(|| Value::Table(Table::new())) {
            Value::Table(t) => t,
            _ => return Err(Failure::usage(format!("`{k}` in `{path}` is not a section"))),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

pub fn solver_config(file: Option<&Path>, overrides: &[String]) -> Result<SolverConfig, Failure> {
    let mut table = Table::try_from(SolverConfig::default()).map_err(|e| Failure::internal(e.to_string()))?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        let top: Table = text
            .parse()
            .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
        merge(&mut table, top);
    }
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("override `{o}` is not KEY=VALUE")))?;
        set_path(&mut table, key.trim(), literal(value.trim()))?;
    }
    let cfg: SolverConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Failure::usage(format!("solver settings: {}", e.message())))?;
    cfg.ea.validate()?;
    cfg.pso.validate()?;
    cfg.sa.validate()?;
    Ok(cfg)
}
