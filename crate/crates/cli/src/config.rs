//! Flat `key = value` configuration files.
//!
//! ```text
//! # 50-node field, no periodic re-clustering
//! n_nodes = 50
//! recluster_period = never
//! ```
//!
//! Missing keys keep their defaults. When `field_side` is set but `base_x` /
//! `base_y` are not, the base station follows the field: `(A/2, A + 90)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fttc::{ConfigViolation, NetworkConfig, Position};

use crate::error::{CliError, ConfigError};

pub const KEYS: &[&str] = &[
    "n_nodes",
    "field_side",
    "base_x",
    "base_y",
    "comm_range",
    "initial_energy",
    "message_bits",
    "recluster_period",
    "ft_depth",
    "rng_seed",
    "max_rounds",
    "fallback_clusters",
    "rotation",
];

pub fn load_config(path: &Path) -> Result<NetworkConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(CliError::Config)
}

enum Value {
    Int(i128),
    Float(f64),
    Never,
    Bool(bool),
}

fn parse_value(raw: &str) -> Option<Value> {
    match raw {
        "true" => return Some(Value::Bool(true)),
        "false" => return Some(Value::Bool(false)),
        "never" | "inf" => return Some(Value::Never),
        _ => {}
    }
    if let Ok(i) = raw.parse::<i128>() {
        return Some(Value::Int(i));
    }
    raw.parse::<f64>().ok().map(Value::Float)
}

pub fn parse_config(text: &str) -> Result<NetworkConfig, ConfigError> {
    let mut config = NetworkConfig::default();
    let mut base_x = None;
    let mut base_y = None;
    let mut violations = Vec::new();
    let mut seen: Vec<&str> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                message: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if seen.contains(&key) {
            return Err(ConfigError::Parse {
                line,
                message: format!("`{key}` set twice"),
            });
        }
        seen.push(key);
        let parse_err = |expected: &str| ConfigError::Parse {
            line,
            message: format!("`{key}`: expected {expected}, got `{value}`"),
        };
        let parsed = parse_value(value);

        let mut bad = |requirement: &'static str| {
            violations.push(ConfigViolation {
                field: key,
                requirement,
            })
        };
        match key {
            "rotation" => match parsed {
                Some(Value::Bool(b)) => config.rotation = b,
                _ => return Err(parse_err("true or false")),
            },
            "recluster_period" => match parsed {
                Some(Value::Never) => config.recluster_period = None,
                Some(Value::Int(i)) => match u64::try_from(i) {
                    Ok(p) => config.recluster_period = Some(p),
                    Err(_) => bad("recluster_period ≥ 1 or never"),
                },
                _ => return Err(parse_err("an integer or `never`")),
            },
            "field_side" | "base_x" | "base_y" | "comm_range" | "initial_energy" => {
                let v = match parsed {
                    Some(Value::Int(i)) => i as f64,
                    Some(Value::Float(f)) => f,
                    _ => return Err(parse_err("a number")),
                };
                match key {
                    "field_side" => config.field_side = v,
                    "base_x" => base_x = Some(v),
                    "base_y" => base_y = Some(v),
                    "comm_range" => config.comm_range = v,
                    _ => config.initial_energy = v,
                }
            }
            _ => {
                let Some(Value::Int(i)) = parsed else {
                    return Err(parse_err("an integer"));
                };
                if i < 0 {
                    bad("a non-negative integer");
                    continue;
                }
                let Ok(v) = u64::try_from(i) else {
                    bad("an integer below 2^64");
                    continue;
                };
                match key {
                    "n_nodes" => config.n_nodes = v as usize,
                    "message_bits" => config.message_bits = v,
                    "ft_depth" => config.ft_depth = v as usize,
                    "rng_seed" => config.rng_seed = v,
                    "max_rounds" => config.max_rounds = v,
                    _ => config.fallback_clusters = v as usize,
                }
            }
        }
    }

    let default_base = NetworkConfig::default_base_station(config.field_side);
    config.base_station = Position::new(
        base_x.unwrap_or(default_base.x),
        base_y.unwrap_or(default_base.y),
    );
    if let Err(errors) = config.validate() {
        violations.extend(errors);
    }
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::InvalidValue(violations))
    }
}

/// Render a config in the file format; `parse_config` reads it back unchanged.
pub fn to_config_string(config: &NetworkConfig) -> String {
    let mut out = String::new();
    let mut put = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    put("n_nodes", config.n_nodes.to_string());
    put("field_side", format!("{:?}", config.field_side));
    put("base_x", format!("{:?}", config.base_station.x));
    put("base_y", format!("{:?}", config.base_station.y));
    put("comm_range", format!("{:?}", config.comm_range));
    put("initial_energy", format!("{:?}", config.initial_energy));
    put("message_bits", config.message_bits.to_string());
    put(
        "recluster_period",
        config
            .recluster_period
            .map_or_else(|| "never".to_string(), |p| p.to_string()),
    );
    put("ft_depth", config.ft_depth.to_string());
    put("rng_seed", config.rng_seed.to_string());
    put("max_rounds", config.max_rounds.to_string());
    put("fallback_clusters", config.fallback_clusters.to_string());
    put("rotation", config.rotation.to_string());
    out
}
