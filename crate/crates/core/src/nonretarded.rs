//! Non-retarded torque for weakly birefringent plates,
//!
//! ```text
//! M = −ħ ω̄ S sin 2θ / (64 π² d²)
//! ```
//!
//! with the characteristic frequency ω̄ computed two ways: as the double
//! integral over ξ and the damped variable x, and with the x-integral done
//! in closed form (a logarithm). The two routes share nothing except the
//! permittivity models and serve as a check on each other.

use std::f64::consts::PI;

use thiserror::Error;

use crate::constants::HBAR;
use crate::materials::UniaxialMaterial;
use crate::quadrature::{integrate_adaptive, GaussLegendre, QuadratureFailure};

/// Upper limit of the damped variable x.
pub const X_MAX: f64 = 60.0;
/// ξ below this is integrated on a linear grid, above it on a log grid.
pub const XI_SPLIT: f64 = 1e10;
/// Upper frequency limit, rad/s.
pub const XI_MAX: f64 = 1e19;
/// Relative tolerance of the outer ξ-quadrature.
pub const OMEGA_BAR_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonRetardedError {
    #[error("ω̄ quadrature failed: {0}")]
    Quadrature(#[from] QuadratureFailure),
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaBarMethod {
    Numeric,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaBarResult {
    /// rad/s
    pub omega_bar: f64,
    pub method: OmegaBarMethod,
    /// Error estimate of the outer quadrature, rad/s.
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Eps {
    d1: f64,
    d2: f64,
    p1: f64,
    p2: f64,
    e3: f64,
}

fn eps_at(plate1: &UniaxialMaterial, plate2: &UniaxialMaterial, medium: &UniaxialMaterial, xi: f64) -> Eps {
    let (a1, p1) = plate1.epsilon_pair(xi);
    let (a2, p2) = plate2.epsilon_pair(xi);
    Eps {
        d1: a1 - p1,
        d2: a2 - p2,
        p1,
        p2,
        e3: medium.perpendicular.at(xi),
    }
}

/// ∫₀^∞ dξ f(ξ): linear panel below `XI_SPLIT`, ln ξ above.
fn integrate_xi<F: Fn(f64) -> f64>(f: F) -> Result<(f64, f64), QuadratureFailure> {
    let (low, e_low) = integrate_adaptive(&f, 0.0, XI_SPLIT, OMEGA_BAR_REL_TOL, 0.0, 200)?;
    let (high, e_high) = integrate_adaptive(
        |s: f64| {
            let xi = s.exp();
            xi * f(xi)
        },
        XI_SPLIT.ln(),
        XI_MAX.ln(),
        OMEGA_BAR_REL_TOL,
        OMEGA_BAR_REL_TOL * low.abs(),
        4000,
    )?;
    Ok((low + high, e_low + e_high))
}

/// ω̄ by nested quadrature in ξ and x ∈ [0, `X_MAX`].
pub fn omega_bar_numeric(
    plate1: &UniaxialMaterial,
    plate2: &UniaxialMaterial,
    medium: &UniaxialMaterial,
) -> Result<OmegaBarResult, NonRetardedError> {
    let rule = GaussLegendre::new(16);
    let x_nodes = rule.composite_nodes(&[0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, X_MAX], 2);
    let (omega_bar, error) = integrate_xi(|xi| {
        let e = eps_at(plate1, plate2, medium, xi);
        let num = e.d2 * e.d1 * e.e3 * e.e3;
        if num == 0.0 {
            return 0.0;
        }
        let alpha = (e.p1 + e.e3) * (e.p2 + e.e3);
        let beta = (e.p1 - e.e3) * (e.p2 - e.e3);
        let inner: f64 = x_nodes
            .iter()
            .map(|&(x, w)| {
                let ex = (-x).exp();
                let den = alpha - beta * ex;
                w * x * ex / (den * den)
            })
            .sum();
        num * inner
    })?;
    Ok(OmegaBarResult {
        omega_bar,
        method: OmegaBarMethod::Numeric,
        error,
    })
}

/// −ln(1 − t)/t, continuous through t = 0.
fn log_ratio(t: f64) -> f64 {
    if t.abs() < 1e-9 {
        1.0 + 0.5 * t
    } else {
        -(-t).ln_1p() / t
    }
}

/// ω̄ with the x-integral in closed form:
/// ∫₀^∞ x e^{−x}/(α − β e^{−x})² dx = −ln(1 − β/α)/(αβ).
/// Where ε⊥ = ε₃ (β = 0) the limit 1/α² is used.
pub fn omega_bar_closed(
    plate1: &UniaxialMaterial,
    plate2: &UniaxialMaterial,
    medium: &UniaxialMaterial,
) -> Result<OmegaBarResult, NonRetardedError> {
    let (omega_bar, error) = integrate_xi(|xi| {
        let e = eps_at(plate1, plate2, medium, xi);
        let alpha = (e.p1 + e.e3) * (e.p2 + e.e3);
        let beta = (e.p1 - e.e3) * (e.p2 - e.e3);
        e.d2 * e.d1 * e.e3 * e.e3 * log_ratio(beta / alpha) / (alpha * alpha)
    })?;
    Ok(OmegaBarResult {
        omega_bar,
        method: OmegaBarMethod::ClosedForm,
        error,
    })
}

/// Non-retarded torque, N·m.
pub fn torque_nonretarded(theta: f64, distance: f64, area: f64, omega_bar: f64) -> Result<f64, NonRetardedError> {
    if !(distance > 0.0) {
        return Err(NonRetardedError::NonPositiveDistance(distance));
    }
    Ok(-HBAR * omega_bar * area * (2.0 * theta).sin() / (64.0 * PI * PI * distance * distance))
}
