//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Curves are returned as flat `Float64Array`s of interleaved columns so the
//! page can plot them without any glue code.

use casimir_torque::barash::QuadratureSpec;
use casimir_torque::experiment::{simulate_rotation, DiskSpec, ExperimentError, RotationMode, RotationSetup};
use casimir_torque::materials::{MaterialDatabase, MaterialError};
use casimir_torque::observables::{fit_sin2theta, theta_grid, torque_vs_theta, ObservableError};
use casimir_torque::scenario::Scenario;
use thiserror::Error;
use wasm_bindgen::prelude::*;

const PLOT_SAMPLES: usize = 200;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{0}")]
    Input(String),
}

fn check(what: &str, v: f64) -> Result<(), DemoError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(DemoError::Input(format!("{what} must be positive, got {v}")))
    }
}

fn scenario(plate1: &str, plate2: &str, medium: &str, distance: f64) -> Result<Scenario, DemoError> {
    check("distance", distance)?;
    Ok(Scenario::from_names(&MaterialDatabase::bundled(), plate1, plate2, medium)?.with_distance(distance))
}

/// Names in the bundled material table.
pub fn names() -> Vec<String> {
    MaterialDatabase::bundled().names().map(String::from).collect()
}

/// `[ξ, ε∥, ε⊥, ...]` on a log grid.
pub fn permittivity_curve(name: &str, xi_min: f64, xi_max: f64, points: usize) -> Result<Vec<f64>, DemoError> {
    check("xi_min", xi_min)?;
    if !(xi_max > xi_min) || points < 2 {
        return Err(DemoError::Input("need xi_max > xi_min and at least 2 points".into()));
    }
    let db = MaterialDatabase::bundled();
    let m = db.get(name)?;
    let step = (xi_max / xi_min).ln() / (points - 1) as f64;
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let xi = xi_min * (step * i as f64).exp();
        let (par, perp) = m.epsilon_pair(xi);
        out.extend([xi, par, perp]);
    }
    Ok(out)
}

/// `[θ, M, ...]` over [0, π] at preview accuracy.
pub fn torque_curve(
    plate1: &str,
    plate2: &str,
    medium: &str,
    distance: f64,
    points: usize,
) -> Result<Vec<f64>, DemoError> {
    if points < 2 {
        return Err(DemoError::Input("need at least 2 angles".into()));
    }
    let s = scenario(plate1, plate2, medium, distance)?;
    let samples = torque_vs_theta(&s, &theta_grid(points), &QuadratureSpec::preview())?;
    Ok(samples.iter().flat_map(|p| [p.theta, p.torque]).collect())
}

/// `[t, θ, ...]` for the disk released at `theta0`. The torque amplitude is
/// fitted from five preview samples.
pub fn rotation(
    plate1: &str,
    plate2: &str,
    medium: &str,
    distance: f64,
    viscosity: f64,
    theta0: f64,
    t_end: f64,
) -> Result<Vec<f64>, DemoError> {
    check("viscosity", viscosity)?;
    let s = scenario(plate1, plate2, medium, distance)?;
    let samples = torque_vs_theta(&s, &theta_grid(5), &QuadratureSpec::preview())?;
    let a = fit_sin2theta(&samples)?.a;
    let disk = DiskSpec::from_scenario(&s)?;
    let setup = RotationSetup::for_disk(&disk, distance, viscosity)?;
    check("t_end", t_end)?;
    // the adaptive steps are far apart; resample on an even grid for plotting
    let dt = t_end / PLOT_SAMPLES as f64;
    let mut out = vec![0.0, theta0];
    let mut theta = theta0;
    for i in 1..=PLOT_SAMPLES {
        let seg = simulate_rotation(theta, &setup, a, RotationMode::QuasiStatic, dt)?;
        theta = seg.last().map_or(theta, |p| p.theta);
        out.extend([dt * i as f64, theta]);
    }
    Ok(out)
}

fn js(e: DemoError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = materialNames)]
pub fn material_names() -> Vec<String> {
    names()
}

#[wasm_bindgen(js_name = permittivityCurve)]
pub fn permittivity_curve_js(name: &str, xi_min: f64, xi_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    permittivity_curve(name, xi_min, xi_max, points).map_err(js)
}

#[wasm_bindgen(js_name = torqueCurve)]
pub fn torque_curve_js(plate1: &str, plate2: &str, medium: &str, distance: f64, points: usize) -> Result<Vec<f64>, JsError> {
    torque_curve(plate1, plate2, medium, distance, points).map_err(js)
}

#[wasm_bindgen(js_name = rotationTrajectory)]
pub fn rotation_js(
    plate1: &str,
    plate2: &str,
    medium: &str,
    distance: f64,
    viscosity: f64,
    theta0: f64,
    t_end: f64,
) -> Result<Vec<f64>, JsError> {
    rotation(plate1, plate2, medium, distance, viscosity, theta0, t_end).map_err(js)
}
