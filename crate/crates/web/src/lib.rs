//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and are plain Rust, so they are tested natively.

use serde_json::json;
use wasm_bindgen::prelude::*;

use ghzdyn::analytic::TwoSidedVariant;
use ghzdyn::channels::{apply_channels, parse_channel_spec, ChannelFamily};
use ghzdyn::concurrence::{tau3, tau3_pure};
use ghzdyn::harness::{ghz_prediction, sweep, SweepSpec};
use ghzdyn::states::{ghz, pure_density, random_ghz_type, seeded_rng};

pub const MAX_POINTS: usize = 401;

fn family(name: &str) -> Result<ChannelFamily, String> {
    name.parse().map_err(|e: ghzdyn::Error| e.to_string())
}

fn check_points(points: usize) -> Result<(), String> {
    if (2..=MAX_POINTS).contains(&points) {
        Ok(())
    } else {
        Err(format!("points must lie in 2..={MAX_POINTS}, got {points}"))
    }
}

/// One channel on qubit 3 of GHZ over `p` in `[0, 1]`: the sweep table.
pub fn single_sided_curve_json(family_name: &str, points: usize) -> Result<String, String> {
    check_points(points)?;
    let spec = SweepSpec::new(1, family(family_name)?, points);
    sweep(&spec).and_then(|t| t.to_json()).map_err(|e| e.to_string())
}

/// Channels on qubits 2 and 3 over a `points x points` grid.
pub fn two_sided_map_json(family_a: &str, family_b: &str, points: usize) -> Result<String, String> {
    check_points(points)?;
    if points * points > 101 * 101 {
        return Err("grid too large; use at most 101 points per side".into());
    }
    let mut spec = SweepSpec::new(2, family(family_a)?, points);
    spec.families = vec![family(family_a)?, family(family_b)?];
    sweep(&spec).and_then(|t| t.to_json()).map_err(|e| e.to_string())
}

/// `state` is `ghz` or `ghz-lu:seed=N`; `channels` holds channel specs
/// separated by whitespace or semicolons.
pub fn evaluate_json(state: &str, channels: &str) -> Result<String, String> {
    let psi = match state.trim() {
        "ghz" => ghz(),
        s => {
            let seed = s
                .strip_prefix("ghz-lu:seed=")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| format!("unknown state '{s}' (expected ghz or ghz-lu:seed=N)"))?;
            random_ghz_type(&mut seeded_rng(seed))
        }
    };
    let specs = channels
        .split(|c: char| c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_channel_spec(s).map_err(|e| format!("channel '{s}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let placed: Vec<_> = specs.iter().map(|s| (s.channel(), s.slot)).collect();
    let report = if placed.is_empty() {
        tau3_pure(&psi)
    } else {
        apply_channels(&pure_density(&psi), &placed).and_then(|rho| tau3(&rho))
    }
    .map_err(|e| e.to_string())?;
    let prediction = if state.trim() == "ghz" {
        Some(ghz_prediction(&placed, TwoSidedVariant::Squared).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let out = json!({
        "channels": specs.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "report": report,
        "prediction": prediction,
    });
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn single_sided_curve(family_name: &str, points: usize) -> Result<String, JsValue> {
    single_sided_curve_json(family_name, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn two_sided_map(family_a: &str, family_b: &str, points: usize) -> Result<String, JsValue> {
    two_sided_map_json(family_a, family_b, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn evaluate(state: &str, channels: &str) -> Result<String, JsValue> {
    evaluate_json(state, channels).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn version() -> String {
    ghzdyn::VERSION.to_string()
}
