use serde_json::{Map, Value};

use super::builtin::{trapezoid_mass, TABLE_MASS_TOL};
use super::{make_builtin, JumpDistribution};
use crate::error::{Error, Result};

fn normalize_weights(params: &mut Map<String, Value>, family: &str) -> Result<()> {
    let (key, grid) = match family {
        "tabulated_pmf" => ("weights", None),
        "tabulated_pdf" => ("density", Some("x")),
        _ => return Ok(()),
    };
    let read = |k: &str| -> Option<Vec<f64>> { params.get(k)?.as_array()?.iter().map(Value::as_f64).collect() };
    let Some(w) = read(key) else { return Ok(()) };
    let mass = match grid {
        None => w.iter().sum::<f64>(),
        Some(g) => match read(g) {
            Some(x) if x.len() == w.len() && x.len() >= 2 => trapezoid_mass(&x, &w),
            _ => return Ok(()),
        },
    };
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::UnnormalizedTable { mass });
    }
    if (mass - 1.0).abs() > TABLE_MASS_TOL {
        log::warn!("{family}: table mass {mass} renormalized to 1");
    }
    let scaled = w.iter().map(|v| Value::from(v / mass)).collect();
    params.insert(key.to_string(), Value::Array(scaled));
    Ok(())
}

/// Builds a law from `{"family": ..., "params": {...}}`. Tabulated laws may
/// also put their fields at top level. Tabulated weights are renormalized.
pub fn dist_from_value(v: &Value) -> Result<JumpDistribution> {
    let obj = v.as_object().ok_or_else(|| Error::Spec("distribution must be a JSON object".into()))?;
    let family = obj
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Spec("distribution needs a string `family`".into()))?;
    let mut params = match obj.get("params") {
        Some(Value::Object(p)) => p.clone(),
        Some(_) => return Err(Error::Spec("`params` must be an object".into())),
        None => Map::new(),
    };
    for (k, val) in obj {
        if k != "family" && k != "params" {
            params.entry(k.clone()).or_insert_with(|| val.clone());
        }
    }
    normalize_weights(&mut params, family)?;
    make_builtin(family, &Value::Object(params))
}

pub fn dist_from_json(text: &str) -> Result<JumpDistribution> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Spec(format!("distribution JSON: {e}")))?;
    dist_from_value(&v)
}

/// Inline JSON when `arg` starts with `{`, otherwise a path to a JSON file.
pub fn load_dist(arg: &str) -> Result<JumpDistribution> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        dist_from_json(trimmed)
    } else {
        let text = std::fs::read_to_string(arg).map_err(|e| Error::Spec(format!("reading {arg}: {e}")))?;
        dist_from_json(&text)
    }
}
