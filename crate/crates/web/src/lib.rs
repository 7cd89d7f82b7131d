//! Browser bindings. Every export takes and returns JSON strings so the page
//! needs no generated type glue.
//!
//! Configs are partial documents shaped like the TOML files, e.g.
//! `{"traffic": {"pedestrian_density": 0.8}, "street": {"cow_range": 60}}`;
//! omitted fields take their defaults.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mmwave_relay::blockage::{cow_coverage_probability, joint_blockage_ue_ap, min_blocking_bus_height_ue_ap};
use mmwave_relay::config::ConfigSource;
use mmwave_relay::strategy::strategy_means as analytic_means;
use mmwave_relay::Scenario;

fn parse(config_json: &str) -> Result<toml::Table, String> {
    if config_json.trim().is_empty() {
        return Ok(toml::Table::new());
    }
    serde_json::from_str(config_json).map_err(|e| format!("config JSON: {e}"))
}

fn build(src: &ConfigSource) -> Result<Scenario, String> {
    let (street, traffic) = src.resolve().and_then(|c| c.into_parts()).map_err(|e| e.to_string())?;
    Scenario::checked(street, traffic).map_err(|e| e.to_string())
}

fn scenario(config_json: &str) -> Result<Scenario, String> {
    build(&ConfigSource::from_table(parse(config_json)?))
}

#[derive(Serialize)]
struct Means {
    baseline: f64,
    conservative: f64,
    aggressive: f64,
    coverage: f64,
}

fn means(s: &Scenario) -> Result<Means, String> {
    let m = analytic_means(s).map_err(|e| e.to_string())?;
    Ok(Means {
        baseline: m.baseline,
        conservative: m.conservative,
        aggressive: m.aggressive,
        coverage: cow_coverage_probability(s),
    })
}

pub fn strategy_means_json(config_json: &str) -> Result<String, String> {
    let m = means(&scenario(config_json)?)?;
    serde_json::to_string(&m).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepPoint {
    x: f64,
    #[serde(flatten)]
    means: Means,
}

/// Analytic means at `steps` evenly spaced values of a dotted config path.
pub fn sweep_json(config_json: &str, path: &str, start: f64, stop: f64, steps: u32) -> Result<String, String> {
    if steps < 2 || stop.partial_cmp(&start) != Some(std::cmp::Ordering::Greater) {
        return Err("need at least two steps and stop > start".into());
    }
    let doc = parse(config_json)?;
    let mut points = Vec::with_capacity(steps as usize);
    for i in 0..steps {
        let x = start + (stop - start) * i as f64 / (steps - 1) as f64;
        let mut src = ConfigSource::from_table(doc.clone());
        src.set_number(path, x).map_err(|e| e.to_string())?;
        let s = build(&src).map_err(|e| format!("at {path} = {x}: {e}"))?;
        points.push(SweepPoint { x, means: means(&s)? });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Blockage {
    p_human: f64,
    p_vehicle: f64,
    p_joint: f64,
    min_blocking_bus_height: f64,
}

pub fn blockage_json(config_json: &str, x0: f64) -> Result<String, String> {
    let s = scenario(config_json)?;
    let p = joint_blockage_ue_ap(&s, x0);
    serde_json::to_string(&Blockage {
        p_human: p.p_human,
        p_vehicle: p.p_vehicle,
        p_joint: p.p_joint,
        min_blocking_bus_height: min_blocking_bus_height_ue_ap(&s.street),
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = strategyMeans)]
pub fn strategy_means(config_json: &str) -> Result<String, JsError> {
    strategy_means_json(config_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sweep(config_json: &str, path: &str, start: f64, stop: f64, steps: u32) -> Result<String, JsError> {
    sweep_json(config_json, path, start, stop, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn blockage(config_json: &str, x0: f64) -> Result<String, JsError> {
    blockage_json(config_json, x0).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn means_are_ordered() {
        let v: Value = serde_json::from_str(&strategy_means_json("{}").unwrap()).unwrap();
        let get = |k: &str| v[k].as_f64().unwrap();
        assert!(get("aggressive") >= get("conservative"));
        assert!(get("conservative") >= get("baseline"));
    }

    #[test]
    fn sweep_has_requested_points() {
        let out =
            sweep_json(r#"{"traffic": {"vehicle_density": 4}}"#, "traffic.pedestrian_density", 0.1, 1.0, 4).unwrap();
        let v: Vec<Value> = serde_json::from_str(&out).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v[0]["baseline"].as_f64().unwrap() > v[3]["baseline"].as_f64().unwrap());
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(strategy_means_json("{not json").is_err());
        assert!(strategy_means_json(r#"{"street": {"sidewalk_width": -1}}"#).is_err());
        assert!(sweep_json("{}", "street.cow_range", 10.0, 5.0, 3).is_err());
    }

    #[test]
    fn tall_buses_block() {
        let v: Value =
            serde_json::from_str(&blockage_json(r#"{"street": {"bus": {"height": 4.5}}}"#, 75.0).unwrap()).unwrap();
        assert!(v["p_vehicle"].as_f64().unwrap() > 0.0);
        assert!(v["p_joint"].as_f64().unwrap() >= v["p_human"].as_f64().unwrap());
    }
}
