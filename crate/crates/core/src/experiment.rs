//! Levitation experiment: buoyancy-corrected weight, float height,
//! viscous drag and the rotation of the floating disk.
//!
//! The disk obeys `I θ̈ + γ_d θ̇ = a sin 2θ` with the gap drag
//! `γ_d = (π/2) R⁴ η / d`. Inertia is tiny compared with the drag, so
//! the full equation is stiff (I/γ_d is microseconds while the motion
//! takes minutes); it is integrated with a linearly implicit Rosenbrock
//! pair. The quasi-static equation `γ_d θ̇ = a sin 2θ` is non-stiff and
//! uses Dormand-Prince 5(4).

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::barash::QuadratureSpec;
use crate::constants::G_ACCEL;
use crate::observables::{force, ObservableError};
use crate::scenario::Scenario;

/// Separation bracket searched for the float height, m.
pub const EQUILIBRIUM_BRACKET: (f64, f64) = (5e-9, 2e-6);
/// Log-spaced points used to locate the stable crossing before bisection.
pub const EQUILIBRIUM_SCAN_POINTS: usize = 12;
/// Bisection stops once hi/lo < 1 + this.
pub const EQUILIBRIUM_REL_TOL: f64 = 1e-3;
/// Rotation stops once within this many radians of the equilibrium angle.
pub const SETTLE_TOLERANCE: f64 = 1e-4;
const ODE_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error("no levitation: force + weight has no stable zero in [{lo:e}, {hi:e}] m")]
    NoLevitation { lo: f64, hi: f64 },
    #[error("material `{0}` has no density")]
    MissingDensity(String),
    #[error("step size underflow at t = {t:e} s (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t = {t:e} s")]
    TooManySteps { t: f64 },
    #[error("{0}")]
    InvalidInput(String),
}

fn positive(what: &str, v: f64) -> Result<(), ExperimentError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ExperimentError::InvalidInput(format!("{what} must be positive, got {v}")))
    }
}

/// Solid cylindrical disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskSpec {
    pub radius: f64,
    pub thickness: f64,
    /// kg/m³
    pub density: f64,
    pub material: String,
}

impl DiskSpec {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self, ExperimentError> {
        let density = scenario
            .plate1
            .density
            .ok_or_else(|| ExperimentError::MissingDensity(scenario.plate1.name.clone()))?;
        Ok(Self {
            radius: scenario.disk_radius,
            thickness: scenario.disk_thickness,
            density,
            material: scenario.plate1.name.clone(),
        })
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn mass(&self) -> f64 {
        self.density * self.area() * self.thickness
    }

    /// ½ m R² about the symmetry axis; fluid added mass is neglected.
    pub fn moment_of_inertia(&self) -> f64 {
        0.5 * self.mass() * self.radius * self.radius
    }
}

/// Weight minus buoyancy, N (negative = downward).
pub fn net_weight(disk: &DiskSpec, liquid_density: f64) -> Result<f64, ExperimentError> {
    positive("disk density", disk.density)?;
    if !(liquid_density >= 0.0) {
        return Err(ExperimentError::InvalidInput(format!(
            "liquid density must be non-negative, got {liquid_density}"
        )));
    }
    Ok(-disk.area() * disk.thickness * (disk.density - liquid_density) * G_ACCEL)
}

/// Torque coefficient of the liquid film in the gap, N·m·s:
/// (π/2) R⁴ η / d.
pub fn gap_drag_coefficient(radius: f64, distance: f64, viscosity: f64) -> Result<f64, ExperimentError> {
    positive("radius", radius)?;
    positive("distance", distance)?;
    positive("viscosity", viscosity)?;
    Ok(FRAC_PI_2 * radius.powi(4) * viscosity / distance)
}

/// Torque coefficient of a disk spinning in unbounded liquid, N·m·s:
/// (32/3) η R³.
pub fn bulk_drag_coefficient(radius: f64, viscosity: f64) -> Result<f64, ExperimentError> {
    positive("radius", radius)?;
    if !(viscosity >= 0.0 && viscosity.is_finite()) {
        return Err(ExperimentError::InvalidInput(format!(
            "viscosity must be non-negative, got {viscosity}"
        )));
    }
    Ok(32.0 / 3.0 * viscosity * radius.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    /// Float height d*, m.
    pub distance: f64,
    /// Net weight balanced at d*, N.
    pub weight: f64,
    /// Number of force evaluations used.
    pub evaluations: usize,
}

/// Stable float height: the zero of F(d) + W where the net vertical force
/// changes from upward (below d*) to downward (above d*).
pub fn equilibrium_distance(scenario: &Scenario, spec: &QuadratureSpec) -> Result<Equilibrium, ExperimentError> {
    let disk = DiskSpec::from_scenario(scenario)?;
    let weight = net_weight(&disk, scenario.medium.density.unwrap_or(0.0))?;
    let (lo, hi) = EQUILIBRIUM_BRACKET;
    let mut evaluations = 0;
    let mut net = |d: f64| -> Result<f64, ExperimentError> {
        evaluations += 1;
        Ok(force(&scenario.clone().with_distance(d), spec)?.force + weight)
    };

    let ratio = (hi / lo).powf(1.0 / (EQUILIBRIUM_SCAN_POINTS - 1) as f64);
    let mut prev = (lo, net(lo)?);
    let mut bracket = None;
    for i in 1..EQUILIBRIUM_SCAN_POINTS {
        let d = if i + 1 == EQUILIBRIUM_SCAN_POINTS { hi } else { lo * ratio.powi(i as i32) };
        let f = net(d)?;
        if prev.1 > 0.0 && f <= 0.0 {
            bracket = Some((prev.0, d));
            break;
        }
        prev = (d, f);
    }
    let (mut a, mut b) = bracket.ok_or(ExperimentError::NoLevitation { lo, hi })?;
    while b / a > 1.0 + EQUILIBRIUM_REL_TOL {
        let mid = (a * b).sqrt();
        if net(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Equilibrium {
        distance: (a * b).sqrt(),
        weight,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationMode {
    /// I θ̈ + γ θ̇ = a sin 2θ
    Full,
    /// γ θ̇ = a sin 2θ
    QuasiStatic,
}

/// Parameters of the rotation equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSetup {
    /// kg·m²
    pub moment_of_inertia: f64,
    /// N·m·s
    pub drag: f64,
}

impl RotationSetup {
    pub fn for_disk(disk: &DiskSpec, distance: f64, viscosity: f64) -> Result<Self, ExperimentError> {
        Ok(Self {
            moment_of_inertia: disk.moment_of_inertia(),
            drag: gap_drag_coefficient(disk.radius, distance, viscosity)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    /// In [0, 2π).
    pub theta: f64,
    pub theta_dot: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryPoint>,
}

impl Trajectory {
    fn push(&mut self, t: f64, theta: f64, theta_dot: f64) {
        self.samples.push(TrajectoryPoint {
            t,
            theta: theta.rem_euclid(2.0 * PI),
            theta_dot,
        });
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.samples.last()
    }
}

/// Nearest stable angle of a sin 2θ to `theta`: multiples of π for a < 0,
/// π/2 + multiples of π for a > 0.
pub fn stable_angle(theta: f64, amplitude: f64) -> Option<f64> {
    if amplitude == 0.0 {
        return None;
    }
    let offset = if amplitude < 0.0 { 0.0 } else { FRAC_PI_2 };
    Some(((theta - offset) / PI).round() * PI + offset)
}

/// Integrates the disk rotation from rest at `theta0` until `t_end` or
/// until θ settles within `SETTLE_TOLERANCE` of the stable angle.
pub fn simulate_rotation(
    theta0: f64,
    setup: &RotationSetup,
    amplitude: f64,
    mode: RotationMode,
    t_end: f64,
) -> Result<Trajectory, ExperimentError> {
    positive("drag coefficient", setup.drag)?;
    positive("end time", t_end)?;
    if !theta0.is_finite() || !amplitude.is_finite() {
        return Err(ExperimentError::InvalidInput("theta0 and amplitude must be finite".into()));
    }
    let target = stable_angle(theta0, amplitude);
    match mode {
        RotationMode::QuasiStatic => quasi_static(theta0, setup.drag, amplitude, t_end, target),
        RotationMode::Full => {
            positive("moment of inertia", setup.moment_of_inertia)?;
            full(theta0, setup, amplitude, t_end, target)
        }
    }
}

fn settled(theta: f64, target: Option<f64>) -> bool {
    target.is_some_and(|t| (theta - t).abs() < SETTLE_TOLERANCE)
}

fn next_step(h: f64, err: f64, order: f64) -> f64 {
    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-1.0 / order)).clamp(0.2, 5.0) };
    h * factor
}

// Dormand-Prince 5(4) tableau (autonomous, so the nodes c_i are not needed)
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn quasi_static(
    theta0: f64,
    drag: f64,
    amplitude: f64,
    t_end: f64,
    target: Option<f64>,
) -> Result<Trajectory, ExperimentError> {
    let rate = amplitude / drag;
    let f = |theta: f64| rate * (2.0 * theta).sin();
    let mut traj = Trajectory::default();
    let (mut t, mut y) = (0.0, theta0);
    traj.push(t, y, f(y));
    if settled(y, target) {
        return Ok(traj);
    }
    let scale = if rate != 0.0 { 1.0 / rate.abs() } else { t_end };
    let mut h = (1e-3 * scale).min(t_end);
    let mut steps = 0;
    while t < t_end {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(ExperimentError::TooManySteps { t });
        }
        h = h.min(t_end - t);
        let mut k = [0.0; 7];
        for i in 0..7 {
            let yi = y + h * (0..i).map(|j| DP_A[i][j] * k[j]).sum::<f64>();
            k[i] = f(yi);
        }
        let y5 = y + h * (0..7).map(|i| DP_B5[i] * k[i]).sum::<f64>();
        let y4 = y + h * (0..7).map(|i| DP_B4[i] * k[i]).sum::<f64>();
        let tol = ODE_TOL + ODE_TOL * y.abs().max(y5.abs());
        let err = (y5 - y4).abs() / tol;
        if err <= 1.0 {
            t += h;
            y = y5;
            traj.push(t, y, f(y));
            if settled(y, target) {
                break;
            }
        }
        let h_new = next_step(h, err, 5.0);
        if h_new < 1e-14 * t.max(scale) {
            return Err(ExperimentError::StepSizeUnderflow { t, h: h_new });
        }
        h = h_new;
    }
    Ok(traj)
}

fn full(
    theta0: f64,
    setup: &RotationSetup,
    amplitude: f64,
    t_end: f64,
    target: Option<f64>,
) -> Result<Trajectory, ExperimentError> {
    let inertia = setup.moment_of_inertia;
    let drag = setup.drag;
    let rhs = |y: [f64; 2]| [y[1], (amplitude * (2.0 * y[0]).sin() - drag * y[1]) / inertia];
    let jacobian = |y: [f64; 2]| [[0.0, 1.0], [2.0 * amplitude * (2.0 * y[0]).cos() / inertia, -drag / inertia]];

    // Rosenbrock 2(3) of Shampine & Reichelt (MATLAB ode23s), autonomous form.
    let gamma = 1.0 / (2.0 + 2f64.sqrt());
    let e32 = 6.0 + 2f64.sqrt();

    let mut traj = Trajectory::default();
    let (mut t, mut y) = (0.0, [theta0, 0.0]);
    traj.push(t, y[0], y[1]);
    if settled(y[0], target) {
        return Ok(traj);
    }
    let relax = inertia / drag;
    let mut h = (1e-2 * relax).min(t_end);
    let mut steps = 0;
    while t < t_end {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(ExperimentError::TooManySteps { t });
        }
        h = h.min(t_end - t);
        let j = jacobian(y);
        // W = I − hγJ
        let w = [[1.0 - h * gamma * j[0][0], -h * gamma * j[0][1]], [-h * gamma * j[1][0], 1.0 - h * gamma * j[1][1]]];
        let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
        let solve = |b: [f64; 2]| [(w[1][1] * b[0] - w[0][1] * b[1]) / det, (w[0][0] * b[1] - w[1][0] * b[0]) / det];

        let f0 = rhs(y);
        let k1 = solve(f0);
        let f1 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k2r = solve([f1[0] - k1[0], f1[1] - k1[1]]);
        let k2 = [k2r[0] + k1[0], k2r[1] + k1[1]];
        let y_new = [y[0] + h * k2[0], y[1] + h * k2[1]];
        let f2 = rhs(y_new);
        let k3 = solve([
            f2[0] - e32 * (k2[0] - f1[0]) - 2.0 * (k1[0] - f0[0]),
            f2[1] - e32 * (k2[1] - f1[1]) - 2.0 * (k1[1] - f0[1]),
        ]);
        let est = [h / 6.0 * (k1[0] - 2.0 * k2[0] + k3[0]), h / 6.0 * (k1[1] - 2.0 * k2[1] + k3[1])];
        // θ̇ is measured against the quasi-static rate scale so that the
        // initial θ̇ = 0 does not force absurdly small steps
        let omega_scale = (amplitude / drag).abs();
        let err = (est[0].abs() / (ODE_TOL + ODE_TOL * y[0].abs().max(y_new[0].abs())))
            .max(est[1].abs() / (ODE_TOL * omega_scale.max(y[1].abs()).max(y_new[1].abs()) + f64::MIN_POSITIVE));
        if err <= 1.0 {
            t += h;
            y = y_new;
            traj.push(t, y[0], y[1]);
            if settled(y[0], target) {
                break;
            }
        }
        let h_new = next_step(h, err, 3.0);
        if h_new < 1e-14 * t.max(relax) {
            return Err(ExperimentError::StepSizeUnderflow { t, h: h_new });
        }
        h = h_new;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn disk(density: f64) -> DiskSpec {
        DiskSpec {
            radius: 20e-6,
            thickness: 20e-6,
            density,
            material: "test".into(),
        }
    }

    #[test]
    fn weights_of_bundled_disks() {
        // −π R² h (ρ_disk − ρ_liquid) g by hand
        let w = net_weight(&disk(2643.0), 789.0).unwrap();
        assert_relative_eq!(w, -PI * 4e-10 * 2e-5 * 1854.0 * 9.81, max_relative = 1e-14);
        assert!((w + 4.57e-10).abs() < 0.01e-10);
        let w = net_weight(&disk(2760.0), 789.0).unwrap();
        assert!((w + 4.86e-10).abs() < 0.01e-10);
        assert_eq!(net_weight(&disk(789.0), 789.0).unwrap(), 0.0);
    }

    #[test]
    fn drag_coefficients() {
        let gap = gap_drag_coefficient(20e-6, 100e-9, 1.2e-3).unwrap();
        assert_relative_eq!(gap, 3.016e-15, max_relative = 1e-3);
        assert_eq!(gap_drag_coefficient(40e-6, 100e-9, 1.2e-3).unwrap(), 16.0 * gap);
        assert_relative_eq!(gap_drag_coefficient(20e-6, 50e-9, 1.2e-3).unwrap(), 2.0 * gap, max_relative = 1e-15);
        let bulk = bulk_drag_coefficient(20e-6, 1.2e-3).unwrap();
        assert_relative_eq!(bulk, 1.024e-16, max_relative = 1e-3);
        assert_eq!(bulk_drag_coefficient(20e-6, 0.0).unwrap(), 0.0);
        assert!(gap_drag_coefficient(-1.0, 1e-7, 1e-3).is_err());
    }

    #[test]
    fn stable_angles() {
        assert_eq!(stable_angle(PI / 4.0 - 0.1, -1.0), Some(0.0));
        assert_eq!(stable_angle(PI / 4.0 + 0.01, 1.0), Some(FRAC_PI_2));
        assert_eq!(stable_angle(3.0, -1.0), Some(PI));
        assert_eq!(stable_angle(1.0, 0.0), None);
    }

    #[test]
    fn quasi_static_matches_closed_form() {
        let setup = RotationSetup {
            moment_of_inertia: 1e-20,
            drag: 3e-15,
        };
        let a = -5e-19;
        let theta0 = PI / 4.0;
        let traj = simulate_rotation(theta0, &setup, a, RotationMode::QuasiStatic, 600.0).unwrap();
        assert!(traj.samples.len() > 2);
        for p in &traj.samples {
            let exact = (theta0.tan() * (2.0 * a * p.t / setup.drag).exp()).atan();
            assert!((p.theta - exact).abs() < 1e-6, "t={} {} vs {}", p.t, p.theta, exact);
        }
    }

    #[test]
    fn resting_at_equilibrium_stays() {
        let setup = RotationSetup {
            moment_of_inertia: 1e-20,
            drag: 3e-15,
        };
        for mode in [RotationMode::Full, RotationMode::QuasiStatic] {
            for a in [-5e-19, 5e-19, 0.0] {
                let traj = simulate_rotation(0.0, &setup, a, mode, 100.0).unwrap();
                assert!(traj.samples.iter().all(|p| p.theta == 0.0 && p.theta_dot == 0.0));
            }
            let traj = simulate_rotation(0.7, &setup, 0.0, mode, 100.0).unwrap();
            assert!(traj.samples.iter().all(|p| p.theta == 0.7));
            assert_eq!(traj.last().unwrap().t, 100.0);
        }
    }

    #[test]
    fn full_mode_tracks_quasi_static() {
        let setup = RotationSetup {
            moment_of_inertia: 1.4e-20,
            drag: 3.6e-15,
        };
        let a = -6e-19;
        let full = simulate_rotation(PI / 4.0, &setup, a, RotationMode::Full, 2000.0).unwrap();
        let gd = setup.drag;
        let mut prev = f64::INFINITY;
        for p in &full.samples {
            let exact = ((PI / 4.0).tan() * (2.0 * a * p.t / gd).exp()).atan();
            assert!((p.theta - exact).abs() < 1e-3);
            assert!(p.theta <= prev);
            prev = p.theta;
        }
    }
}
