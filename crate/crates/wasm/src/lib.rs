//! Browser bindings for the sensitivity-bounds engine.
//!
//! Three operations back the interactive demo page in `www/`: the
//! sensitivity-per-photon curve, the figure-of-merit map, and the
//! quantum-enhancement loss sweep. Each takes and returns JSON strings so
//! the page needs no extra glue beyond `JSON.parse`.

use serde::Deserialize;
use wasm_bindgen::prelude::*;

use resb_core::bounds::Probe;
use resb_core::gaussian::{Estimand, LossBudget};
use resb_core::lineshape::{Family, LineshapeSpec};
use resb_core::sensitivity::{
    eqef_loss_sweep, fom_map, sensitivity_per_photon, LossSweep, SensitivityQuery,
};

#[derive(Deserialize)]
struct CurveParams {
    s: f64,
    t_res: f64,
    t_off: f64,
    #[serde(default = "default_family")]
    family: String,
    #[serde(default = "default_m")]
    m: u32,
    #[serde(default = "default_eta")]
    eta_p1: f64,
    #[serde(default = "default_eta")]
    eta_p2: f64,
    #[serde(default = "default_eta")]
    eta_r: f64,
}

fn default_family() -> String {
    "lorentzian".into()
}

fn default_m() -> u32 {
    1
}

fn default_eta() -> f64 {
    1.0
}

fn family_of(name: &str, m: u32) -> Result<Family, String> {
    match name {
        "lorentzian" => Ok(Family::Lorentzian),
        "butterworth" => Ok(Family::Butterworth { m }),
        other => Err(format!("unknown family {other:?}")),
    }
}

fn build_query(p: &CurveParams, estimand: Estimand) -> Result<SensitivityQuery, String> {
    let spec = LineshapeSpec::new(family_of(&p.family, p.m)?, p.t_res, p.t_off)
        .map_err(|e| e.to_string())?;
    let losses = LossBudget::new(p.eta_p1, p.eta_p2, p.eta_r)
        .map_err(|e| e.to_string())?;
    SensitivityQuery::new(spec, estimand, Probe::Btmss { s: p.s }, losses)
        .map_err(|e| e.to_string())
}

/// Sensitivity per photon over the trusted wavelength range for both
/// estimands, with the transmission and phase response alongside.
///
/// Input: `{"s": 2, "t_res": 1, "t_off": 0, "family": "lorentzian", "m": 1,
/// "eta_p1": 1, "eta_p2": 1, "eta_r": 1}`.
#[wasm_bindgen]
pub fn sensitivity_curve_json(params: &str) -> Result<String, JsError> {
    sensitivity_curve_json_impl(params).map_err(|e| JsError::new(&e))
}

fn sensitivity_curve_json_impl(params: &str) -> Result<String, String> {
    let p: CurveParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    let qt = build_query(&p, Estimand::Transmission)?;
    let qp = SensitivityQuery { estimand: Estimand::Phase, ..qt.clone() };
    let n = 601;
    let mut lambda = Vec::with_capacity(n);
    let mut s_t = Vec::with_capacity(n);
    let mut s_phi = Vec::with_capacity(n);
    let mut transmission = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    for i in 0..n {
        let l = -3.0 + 6.0 * i as f64 / (n - 1) as f64;
        lambda.push(l);
        s_t.push(sensitivity_per_photon(&qt, l).map_err(|e| e.to_string())?);
        s_phi.push(sensitivity_per_photon(&qp, l).map_err(|e| e.to_string())?);
        transmission.push(qt.model.transmission(l));
        phase.push(qt.model.phase(l).map_err(|e| e.to_string())?);
    }
    Ok(serde_json::json!({
        "lambda": lambda,
        "s_transmission": s_t,
        "s_phase": s_phi,
        "transmission": transmission,
        "phase": phase,
    })
    .to_string())
}

#[derive(Deserialize)]
struct MapParams {
    s: f64,
    #[serde(default = "default_family")]
    family: String,
    #[serde(default = "default_m")]
    m: u32,
    #[serde(default = "default_map_n")]
    grid_n: usize,
    #[serde(default = "default_eta")]
    eta_p1: f64,
    #[serde(default = "default_eta")]
    eta_p2: f64,
    #[serde(default = "default_eta")]
    eta_r: f64,
}

fn default_map_n() -> usize {
    25
}

/// Figure-of-merit map over `(T_res, T_off)` with the unit contour.
///
/// Input: `{"s": 2, "family": "lorentzian", "grid_n": 25}`.
#[wasm_bindgen]
pub fn fom_map_json(params: &str) -> Result<String, JsError> {
    fom_map_json_impl(params).map_err(|e| JsError::new(&e))
}

fn fom_map_json_impl(params: &str) -> Result<String, String> {
    let p: MapParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    let family = family_of(&p.family, p.m)?;
    let losses = LossBudget::new(p.eta_p1, p.eta_p2, p.eta_r)
        .map_err(|e| e.to_string())?;
    let map = fom_map(&family, p.s, &losses, p.grid_n.clamp(2, 61))
        .map_err(|e| e.to_string())?;
    // NaN (the degenerate diagonal) is not valid JSON; the page treats null
    // as "no value"
    let values: Vec<Vec<Option<f64>>> = (0..map.t_res.len())
        .map(|i| {
            (0..map.t_off.len())
                .map(|j| {
                    let v = map.value(i, j);
                    v.is_finite().then_some(v)
                })
                .collect()
        })
        .collect();
    Ok(serde_json::json!({
        "t_res": map.t_res,
        "t_off": map.t_off,
        "values": values,
        "unity_contour": map.unity_contour,
    })
    .to_string())
}

#[derive(Deserialize)]
struct SweepParams {
    s: f64,
    t_res: f64,
    t_off: f64,
    #[serde(default = "default_family")]
    family: String,
    #[serde(default = "default_m")]
    m: u32,
    /// "probe" or "reference".
    arm: String,
    #[serde(default = "default_sweep_n")]
    points: usize,
}

fn default_sweep_n() -> usize {
    40
}

/// Quantum enhancement factor versus one external transmission.
///
/// Input: `{"s": 2, "t_res": 1, "t_off": 0, "arm": "reference"}`.
#[wasm_bindgen]
pub fn eqef_sweep_json(params: &str) -> Result<String, JsError> {
    eqef_sweep_json_impl(params).map_err(|e| JsError::new(&e))
}

fn eqef_sweep_json_impl(params: &str) -> Result<String, String> {
    let p: SweepParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    let spec = LineshapeSpec::new(family_of(&p.family, p.m)?, p.t_res, p.t_off)
        .map_err(|e| e.to_string())?;
    let q = SensitivityQuery::new(spec, Estimand::Transmission, Probe::Btmss { s: p.s }, LossBudget::LOSSLESS)
        .map_err(|e| e.to_string())?;
    let arm = match p.arm.as_str() {
        "probe" => LossSweep::Probe,
        "reference" => LossSweep::Reference,
        other => return Err(format!("unknown arm {other:?}")),
    };
    let curve = eqef_loss_sweep(&q, arm, p.points.clamp(2, 200))
        .map_err(|e| e.to_string())?;
    let (eta, eqef): (Vec<f64>, Vec<f64>) = curve.samples.into_iter().unzip();
    Ok(serde_json::json!({
        "eta": eta,
        "eqef": eqef,
        "monotone_nondecreasing": curve.monotone_nondecreasing,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_round_trips_json() {
        let out = sensitivity_curve_json_impl(r#"{"s": 2.0, "t_res": 1.0, "t_off": 0.0}"#).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["lambda"].as_array().unwrap().len(), 601);
        let s_phi = v["s_phase"].as_array().unwrap();
        let mid = s_phi[300].as_f64().unwrap();
        assert!((mid - 4.0 * 4.0_f64.cosh()).abs() < 1e-6);
    }

    #[test]
    fn map_marks_diagonal_null() {
        let out = fom_map_json_impl(r#"{"s": 1.0, "grid_n": 5}"#).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["values"][2][2].is_null());
        assert!(v["values"][3][1].as_f64().unwrap() > 1.0);
    }

    #[test]
    fn sweep_reports_reference_arm() {
        let out =
            eqef_sweep_json_impl(r#"{"s": 2.0, "t_res": 1.0, "t_off": 0.0, "arm": "reference", "points": 10}"#)
                .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let eqef = v["eqef"].as_array().unwrap();
        assert!(eqef.last().unwrap().as_f64().unwrap() > 1.0);
        // at eta_r = 0.5 the squeezed and coherent probes tie
        assert!((eqef[4].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bad_params_error() {
        assert!(sensitivity_curve_json_impl("{").is_err());
        assert!(eqef_sweep_json_impl(r#"{"s": 1.0, "t_res": 0.5, "t_off": 0.1, "arm": "sideways"}"#).is_err());
    }
}
