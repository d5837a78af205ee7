//! Torque, force, sin 2θ fits, distance scans and parameter sensitivity.
//!
//! Derivatives of Ω are central differences evaluated on one shared
//! quadrature grid with steps h and h/2 and combined by Richardson
//! extrapolation. Sign conventions: positive torque drives θ upward,
//! positive force is repulsive.

use std::f64::consts::FRAC_PI_4;

use thiserror::Error;

use crate::barash::{matsubara_sum, BarashError, Probe, ProbeSums, QuadratureSpec};
use crate::materials::UniaxialMaterial;
pub use crate::scenario::Scenario;

/// Default angular step for ∂Ω/∂θ, rad.
pub const THETA_STEP: f64 = 1e-3;
/// Default relative step for ∂Ω/∂d.
pub const DISTANCE_STEP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error(transparent)]
    Quadrature(#[from] BarashError),
    #[error("sin 2θ fit is degenerate: every sample sits on a zero of sin 2θ")]
    DegenerateFit,
    #[error("{0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueSample {
    pub theta: f64,
    /// N·m
    pub torque: f64,
    /// N·m, ≥ 0
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub distance: f64,
    /// N, positive = repulsive
    pub force: f64,
    pub error_estimate: f64,
}

/// Least-squares amplitude of M(θ) = a sin 2θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeFit {
    pub a: f64,
    pub rms_residual: f64,
}

/// Which slot of the scenario a sensitivity variant replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Plate1,
    Plate2,
    Medium,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialOverride {
    pub slot: Slot,
    pub material: UniaxialMaterial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub variant: String,
    pub torque: f64,
    pub force: f64,
    pub torque_rel_change: f64,
    pub force_rel_change: f64,
}

/// Central-difference stencil with steps h and h/2 on a shared grid.
struct Stencil {
    step: f64,
}

impl Stencil {
    /// Offsets in probe order: +h, −h, +h/2, −h/2.
    fn offsets(&self) -> [f64; 4] {
        let h = self.step;
        [h, -h, 0.5 * h, -0.5 * h]
    }

    /// Richardson-extrapolated derivative and its error estimate from four
    /// consecutive probe sums starting at `first`.
    fn derivative(&self, sums: &ProbeSums, first: usize) -> (f64, f64) {
        let h = self.step;
        let diff = |v: &[f64]| {
            let d1 = (v[first] - v[first + 1]) / (2.0 * h);
            let d2 = (v[first + 2] - v[first + 3]) / h;
            (d1, d2, (4.0 * d2 - d1) / 3.0)
        };
        let (d1, d2, fine) = diff(&sums.values);
        let (_, _, coarse) = diff(&sums.coarse);
        let scale = sums.magnitude[first..first + 4]
            .iter()
            .copied()
            .fold(0.0, f64::max);
        let rounding = 64.0 * f64::EPSILON * scale / h;
        (fine, (d2 - d1).abs() + (fine - coarse).abs() + rounding)
    }
}

fn theta_probes(scenario: &Scenario, stencil: &Stencil) -> Vec<Probe> {
    stencil
        .offsets()
        .iter()
        .map(|o| Probe {
            theta: scenario.theta + o,
            distance: scenario.distance,
        })
        .collect()
}

fn distance_probes(scenario: &Scenario, stencil: &Stencil) -> Vec<Probe> {
    stencil
        .offsets()
        .iter()
        .map(|o| Probe {
            theta: scenario.theta,
            distance: scenario.distance + o,
        })
        .collect()
}

/// M = −S ∂Ω/∂θ at the scenario's (θ, d).
pub fn torque(scenario: &Scenario, spec: &QuadratureSpec) -> Result<TorqueSample, ObservableError> {
    let stencil = Stencil { step: THETA_STEP };
    let probes = theta_probes(scenario, &stencil);
    let sums = matsubara_sum(scenario, &probes, scenario.distance, spec)?;
    let (deriv, err) = stencil.derivative(&sums, 0);
    let s = scenario.area();
    Ok(TorqueSample {
        theta: scenario.theta,
        torque: -s * deriv,
        error_estimate: s * err,
    })
}

/// F = −S ∂Ω/∂d at the scenario's (θ, d).
pub fn force(scenario: &Scenario, spec: &QuadratureSpec) -> Result<ForceSample, ObservableError> {
    let stencil = Stencil {
        step: DISTANCE_STEP * scenario.distance,
    };
    let probes = distance_probes(scenario, &stencil);
    let sums = matsubara_sum(scenario, &probes, scenario.distance, spec)?;
    let (deriv, err) = stencil.derivative(&sums, 0);
    let s = scenario.area();
    Ok(ForceSample {
        distance: scenario.distance,
        force: -s * deriv,
        error_estimate: s * err,
    })
}

/// Torque and force at one point from a single Matsubara sum.
pub fn torque_and_force(
    scenario: &Scenario,
    spec: &QuadratureSpec,
) -> Result<(TorqueSample, ForceSample), ObservableError> {
    let angular = Stencil { step: THETA_STEP };
    let radial = Stencil {
        step: DISTANCE_STEP * scenario.distance,
    };
    let mut probes = theta_probes(scenario, &angular);
    probes.extend(distance_probes(scenario, &radial));
    let sums = matsubara_sum(scenario, &probes, scenario.distance, spec)?;
    let s = scenario.area();
    let (dt, et) = angular.derivative(&sums, 0);
    let (dd, ed) = radial.derivative(&sums, 4);
    Ok((
        TorqueSample {
            theta: scenario.theta,
            torque: -s * dt,
            error_estimate: s * et,
        },
        ForceSample {
            distance: scenario.distance,
            force: -s * dd,
            error_estimate: s * ed,
        },
    ))
}

/// One torque sample per angle, at the scenario's distance.
pub fn torque_vs_theta(
    scenario: &Scenario,
    thetas: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<TorqueSample>, ObservableError> {
    if thetas.is_empty() {
        return Err(ObservableError::InvalidInput("theta list is empty".into()));
    }
    thetas
        .iter()
        .map(|&t| torque(&scenario.clone().with_theta(t), spec))
        .collect()
}

/// `count` equally spaced angles covering [0, π] inclusive.
pub fn theta_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| std::f64::consts::PI * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Unweighted least squares for M = a sin 2θ:
/// a = Σ Mᵢ sin 2θᵢ / Σ sin² 2θᵢ.
pub fn fit_sin2theta(samples: &[TorqueSample]) -> Result<AmplitudeFit, ObservableError> {
    let (num, den) = samples.iter().fold((0.0, 0.0), |(n, d), s| {
        let b = (2.0 * s.theta).sin();
        (n + s.torque * b, d + b * b)
    });
    // sin 2θ at multiples of π/2 is ~1e-16, not zero
    if den <= 1e-20 * samples.len().max(1) as f64 {
        return Err(ObservableError::DegenerateFit);
    }
    let a = num / den;
    let ss: f64 = samples
        .iter()
        .map(|s| (s.torque - a * (2.0 * s.theta).sin()).powi(2))
        .sum();
    Ok(AmplitudeFit {
        a,
        rms_residual: (ss / samples.len() as f64).sqrt(),
    })
}

/// Torque at θ = π/4 for each separation.
pub fn torque_vs_distance(
    scenario: &Scenario,
    distances: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<(f64, TorqueSample)>, ObservableError> {
    if let Some(bad) = distances.iter().find(|d| !(**d > 0.0)) {
        return Err(ObservableError::InvalidInput(format!("distances must be positive, got {bad}")));
    }
    distances
        .iter()
        .map(|&d| {
            let s = scenario.clone().with_distance(d).with_theta(FRAC_PI_4);
            torque(&s, spec).map(|m| (d, m))
        })
        .collect()
}

/// Force at the scenario's θ for each separation.
pub fn force_vs_distance(
    scenario: &Scenario,
    distances: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<ForceSample>, ObservableError> {
    if let Some(bad) = distances.iter().find(|d| !(**d > 0.0)) {
        return Err(ObservableError::InvalidInput(format!("distances must be positive, got {bad}")));
    }
    distances
        .iter()
        .map(|&d| force(&scenario.clone().with_distance(d), spec))
        .collect()
}

pub fn apply_override(scenario: &Scenario, variant: &MaterialOverride) -> Scenario {
    let mut s = scenario.clone();
    let slot = match variant.slot {
        Slot::Plate1 => &mut s.plate1,
        Slot::Plate2 => &mut s.plate2,
        Slot::Medium => &mut s.medium,
    };
    *slot = variant.material.clone();
    s
}

/// Baseline torque and force plus one row per variant.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub baseline_torque: TorqueSample,
    pub baseline_force: ForceSample,
    pub rows: Vec<SensitivityRow>,
}

/// Relative change of torque and force at the scenario point when one
/// material is swapped for a variant.
pub fn sensitivity_scan(
    scenario: &Scenario,
    variants: &[MaterialOverride],
    spec: &QuadratureSpec,
) -> Result<SensitivityReport, ObservableError> {
    let (m0, f0) = torque_and_force(scenario, spec)?;
    let rows = variants
        .iter()
        .map(|v| {
            let (m, f) = torque_and_force(&apply_override(scenario, v), spec)?;
            Ok(SensitivityRow {
                variant: v.material.name.clone(),
                torque: m.torque,
                force: f.force,
                torque_rel_change: (m.torque - m0.torque) / m0.torque,
                force_rel_change: (f.force - f0.force) / f0.force,
            })
        })
        .collect::<Result<_, ObservableError>>()?;
    Ok(SensitivityReport {
        baseline_torque: m0,
        baseline_force: f0,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample(theta: f64, torque: f64) -> TorqueSample {
        TorqueSample {
            theta,
            torque,
            error_estimate: 0.0,
        }
    }

    #[test]
    fn exact_sinusoid_fit() {
        let samples: Vec<_> = theta_grid(9).into_iter().map(|t| sample(t, 3.0 * (2.0 * t).sin())).collect();
        let fit = fit_sin2theta(&samples).unwrap();
        assert!((fit.a - 3.0).abs() < 1e-14);
        assert!(fit.rms_residual < 1e-14);
    }

    #[test]
    fn noisy_sinusoid_fit() {
        // 8 symmetric nodes θ = (2k+1)π/16, alternating ±0.1 noise.
        let samples: Vec<_> = (0..8)
            .map(|k| {
                let t = (2 * k + 1) as f64 * PI / 16.0;
                let noise = if k % 2 == 0 { 0.1 } else { -0.1 };
                sample(t, 3.0 * (2.0 * t).sin() + noise)
            })
            .collect();
        // hand value: a = 3 + 0.1 Σ(±sin 2θ)/Σ sin² 2θ
        let (mut num, mut den) = (0.0, 0.0);
        for (k, s) in samples.iter().enumerate() {
            let b = (2.0 * s.theta).sin();
            num += if k % 2 == 0 { 0.1 } else { -0.1 } * b;
            den += b * b;
        }
        let fit = fit_sin2theta(&samples).unwrap();
        assert!((fit.a - (3.0 + num / den)).abs() < 1e-14);
        assert!((fit.a - 3.0).abs() < 0.05);
    }

    #[test]
    fn degenerate_fit_rejected() {
        let samples = vec![sample(0.0, 1.0), sample(PI / 2.0, 2.0), sample(PI, 0.5)];
        assert_eq!(fit_sin2theta(&samples), Err(ObservableError::DegenerateFit));
    }

    #[test]
    fn theta_grid_endpoints() {
        let g = theta_grid(17);
        assert_eq!(g.len(), 17);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[16], PI);
        assert!((g[8] - PI / 2.0).abs() < 1e-15);
    }
}
