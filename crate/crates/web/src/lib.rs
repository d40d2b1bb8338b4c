//! WebAssembly bindings for the demo page in `www/`. Every export takes plain
//! values and returns a JSON string.

use cann::discovery::report;
use cann::stress::predict_curve;
use cann::{builtin_dataset, mlp_forward, mlp_train, recover_named_model, train_cann, AdamConfig, CannError, DeformationMode, NamedModel};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const BASELINE_LAYERS: [usize; 3] = [1, 8, 1];

#[derive(Serialize)]
struct Curve {
    mode: DeformationMode,
    lambda: Vec<f64>,
    p1: Vec<f64>,
}

#[derive(Serialize)]
struct Extrapolation {
    mode: DeformationMode,
    data_lambda: Vec<f64>,
    data_stress: Vec<f64>,
    lambda: Vec<f64>,
    cann: Vec<f64>,
    baseline: Vec<f64>,
    saturation_bound: f64,
    cann_model: String,
    cann_mse: f64,
    baseline_mse: f64,
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(2);
    (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect()
}

fn config(epochs: usize, seed: u32) -> AdamConfig {
    AdamConfig { epochs, seed: seed.into(), ..AdamConfig::default() }
}

fn to_js<T: Serialize>(value: &T) -> Result<String, CannError> {
    Ok(serde_json::to_string(value)?)
}

/// Uniaxial, equibiaxial and pure-shear curves of a classical model given as
/// JSON, e.g. `{"family":"MooneyRivlin","mu1":0.3,"mu2":0.05}`.
pub fn named_curves(model_json: &str, lambda_max: f64, steps: usize) -> Result<String, CannError> {
    let model: NamedModel = serde_json::from_str(model_json)?;
    let w = recover_named_model(&model)?;
    let lambda = grid(1.0, lambda_max, steps);
    let curves = DeformationMode::ALL
        .iter()
        .map(|&mode| {
            let p1 = predict_curve(&w, mode, &lambda)?.iter().map(|r| r.p1).collect();
            Ok(Curve { mode, lambda: lambda.clone(), p1 })
        })
        .collect::<Result<Vec<_>, CannError>>()?;
    to_js(&curves)
}

/// Trains the eight-term network on a built-in dataset and returns the full
/// discovery report, per-term stresses included.
pub fn fit_report(dataset: &str, epochs: usize, seed: u32) -> Result<String, CannError> {
    let data = builtin_dataset(dataset)?;
    let record = train_cann(&data, &config(epochs, seed))?;
    report(&record, &data, None)?.to_json()
}

/// Trains both networks on a single-mode dataset and evaluates them out to
/// twice the largest measured stretch.
pub fn extrapolation(dataset: &str, epochs: usize, seed: u32) -> Result<String, CannError> {
    let data = builtin_dataset(dataset)?;
    let modes = data.modes();
    let [mode] = modes[..] else {
        return Err(CannError::Domain(format!("{dataset} has more than one loading mode")));
    };
    let config = config(epochs, seed);
    let cann = train_cann(&data, &config)?;
    let mlp = mlp_train(&data, &config, &BASELINE_LAYERS)?;
    let lambda = grid(1.0, 2.0 * data.max_lambda(), 200);
    let out = Extrapolation {
        mode,
        data_lambda: data.samples.iter().map(|s| s.lambda).collect(),
        data_stress: data.samples.iter().map(|s| s.stress).collect(),
        cann: predict_curve(&cann.final_weights, mode, &lambda)?.iter().map(|r| r.p1).collect(),
        baseline: lambda.iter().map(|&l| mlp_forward(&mlp.params, l)).collect::<Result<_, _>>()?,
        lambda,
        saturation_bound: mlp.params.saturation_bound(),
        cann_model: cann::classify(&cann.final_weights, cann::discovery::default_threshold(&cann.final_weights))?.model_name,
        cann_mse: cann.final_loss,
        baseline_mse: mlp.final_loss,
    };
    to_js(&out)
}

fn js(r: Result<String, CannError>) -> Result<String, JsError> {
    r.map_err(|e| {
        let mut msg = e.to_string();
        let mut cause = std::error::Error::source(&e);
        while let Some(c) = cause {
            msg = format!("{msg}: {c}");
            cause = c.source();
        }
        JsError::new(&msg)
    })
}

#[wasm_bindgen(js_name = namedModelCurves)]
pub fn named_model_curves(model_json: &str, lambda_max: f64, steps: usize) -> Result<String, JsError> {
    js(named_curves(model_json, lambda_max, steps))
}

#[wasm_bindgen(js_name = fitCann)]
pub fn fit_cann(dataset: &str, epochs: usize, seed: u32) -> Result<String, JsError> {
    js(fit_report(dataset, epochs, seed))
}

#[wasm_bindgen(js_name = extrapolate)]
pub fn extrapolate(dataset: &str, epochs: usize, seed: u32) -> Result<String, JsError> {
    js(extrapolation(dataset, epochs, seed))
}
