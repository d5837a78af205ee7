use std::f64::consts::PI;

use thiserror::Error;

use crate::materials::{MaterialDatabase, MaterialError, UniaxialMaterial};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid scenario: {0}")]
pub struct ScenarioError(pub String);

/// Full problem statement: two plates, the gap medium, geometry and
/// temperature. The disk (plate 1) has area S = πR².
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub plate1: UniaxialMaterial,
    pub plate2: UniaxialMaterial,
    pub medium: UniaxialMaterial,
    /// Gap d, m.
    pub distance: f64,
    /// Angle between the optical axes, rad.
    pub theta: f64,
    /// K.
    pub temperature: f64,
    /// Disk radius R, m.
    pub disk_radius: f64,
    /// Disk thickness h, m.
    pub disk_thickness: f64,
}

impl Scenario {
    /// 40 µm diameter, 20 µm thick disk at 100 nm, θ = π/4, 300 K.
    pub fn new(plate1: UniaxialMaterial, plate2: UniaxialMaterial, medium: UniaxialMaterial) -> Self {
        Self {
            plate1,
            plate2,
            medium,
            distance: 100e-9,
            theta: PI / 4.0,
            temperature: 300.0,
            disk_radius: 20e-6,
            disk_thickness: 20e-6,
        }
    }

    pub fn from_names(
        db: &MaterialDatabase,
        plate1: &str,
        plate2: &str,
        medium: &str,
    ) -> Result<Self, MaterialError> {
        Ok(Self::new(
            db.get(plate1)?.clone(),
            db.get(plate2)?.clone(),
            db.get(medium)?.clone(),
        ))
    }

    pub fn with_distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    /// Interaction area S = πR².
    pub fn area(&self) -> f64 {
        PI * self.disk_radius * self.disk_radius
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let checks = [
            ("distance", self.distance),
            ("temperature", self.temperature),
            ("disk radius", self.disk_radius),
            ("disk thickness", self.disk_thickness),
        ];
        for (what, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(ScenarioError(format!("{what} must be positive, got {v}")));
            }
        }
        if !self.theta.is_finite() {
            return Err(ScenarioError(format!("theta must be finite, got {}", self.theta)));
        }
        Ok(())
    }
}
