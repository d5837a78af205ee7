//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Every tolerance is a named constant below.

use std::error::Error;
use std::f64::consts::{FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use casimir_torque::barash::{free_energy, matsubara_term, QuadratureSpec};
use casimir_torque::constants::{ETHANOL_VISCOSITY, K_B};
use casimir_torque::experiment::{
    bulk_drag_coefficient, equilibrium_distance, gap_drag_coefficient, simulate_rotation, DiskSpec,
    RotationMode, RotationSetup,
};
use casimir_torque::materials::{MaterialDatabase, Oscillator, OscillatorModel, UniaxialMaterial};
use casimir_torque::nonretarded::{omega_bar_closed, omega_bar_numeric, torque_nonretarded};
use casimir_torque::observables::{
    fit_sin2theta, force, sensitivity_scan, theta_grid, torque, torque_vs_theta, MaterialOverride,
    Slot,
};
use casimir_torque::scenario::Scenario;

type Res<T> = Result<T, Box<dyn Error>>;

// 1
const QUARTZ_VACUUM_AMPLITUDE: f64 = 5.3e-20;
const CALCITE_VACUUM_AMPLITUDE: f64 = 7e-19;
const AMPLITUDE_BAND: f64 = 0.25;
const FIT_RESIDUAL_MAX: f64 = 0.02;
const THETA_POINTS: usize = 17;
// 2
const OMEGA_BAR_AGREEMENT: f64 = 1e-6;
const SCALING_TOL: f64 = 4.0 * f64::EPSILON;
// 3
const ATTRACTIVE_DISTANCES: [f64; 2] = [2e-9, 5e-9];
const EQUILIBRIUM_BAND: (f64, f64) = (60e-9, 160e-9);
const STABILITY_OFFSET: f64 = 0.05;
// 4
const MEDIUM_RATIO_BAND: (f64, f64) = (1.5, 2.5);
const SHORT_DISTANCES: [f64; 3] = [2e-9, 5e-9, 10e-9];
// 5
const SENSITIVITY_MAX: f64 = 0.14;
// 6
const DRAG_RATIO_TOL: f64 = 1e-12;
const DRAG_RATIO_REFERENCE: f64 = 29.45;
const DRAG_RATIO_REFERENCE_TOL: f64 = 0.01;
// 7
const ROTATION_WINDOW_S: f64 = 600.0;
const MIN_ROTATION_RAD: f64 = 0.1;
const CLOSED_FORM_TOL_RAD: f64 = 1e-6;
// 8
const PERIODICITY_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-6;
const SERIES_TOL: f64 = 1e-6;
const TEMPERATURE_TOL: f64 = 0.05;

const D100: f64 = 100e-9;

fn db() -> MaterialDatabase {
    MaterialDatabase::bundled()
}

fn scenario(plate1: &str, medium: &str) -> Res<Scenario> {
    Ok(Scenario::from_names(&db(), plate1, "BaTiO3", medium)?)
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Self {
            pass: true,
            detail: String::new(),
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&what);
        if !ok {
            self.detail.push_str(" [x]");
            self.pass = false;
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Res<Check> {
    let mut c = Check::new();
    let mut amps = Vec::new();
    for (plate, reference) in [("quartz", QUARTZ_VACUUM_AMPLITUDE), ("calcite", CALCITE_VACUUM_AMPLITUDE)] {
        let s = scenario(plate, "vacuum")?.with_distance(D100);
        let fit = fit_sin2theta(&torque_vs_theta(&s, &theta_grid(THETA_POINTS), &spec())?)?;
        c.require(
            rel(fit.a.abs(), reference) <= AMPLITUDE_BAND,
            format!("{plate} |a|={:.3e} vs {reference:e}", fit.a.abs()),
        );
        c.require(
            fit.rms_residual < FIT_RESIDUAL_MAX * fit.a.abs(),
            format!("{plate} rms/|a|={:.1e}", fit.rms_residual / fit.a.abs()),
        );
        amps.push(fit.a);
    }
    c.require(amps[0] * amps[1] < 0.0, "opposite signs".into());
    Ok(c)
}

fn criterion_2() -> Res<Check> {
    let mut c = Check::new();
    let db = db();
    for p1 in ["quartz", "calcite"] {
        for med in ["vacuum", "ethanol"] {
            let (a, b, m) = (db.get(p1)?, db.get("BaTiO3")?, db.get(med)?);
            let n = omega_bar_numeric(a, b, m)?.omega_bar;
            let k = omega_bar_closed(a, b, m)?.omega_bar;
            c.require(rel(n, k) <= OMEGA_BAR_AGREEMENT, format!("{p1}/{med} Δω̄/ω̄={:.1e}", rel(n, k)));
        }
    }
    let base = torque_nonretarded(FRAC_PI_4, D100, 1e-9, 1e15)?;
    let mut worst: f64 = 0.0;
    for theta in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let m = torque_nonretarded(theta, D100, 1e-9, 1e15)?;
        worst = worst.max(rel(m / (2.0 * theta).sin(), base));
    }
    for d in [1e-9, 7e-9, 3e-7] {
        let m = torque_nonretarded(FRAC_PI_4, d, 1e-9, 1e15)?;
        worst = worst.max(rel(m * d * d / (D100 * D100), base));
    }
    c.require(worst <= SCALING_TOL, format!("sin2θ/d⁻² scaling dev {worst:.1e}"));
    Ok(c)
}

fn criterion_3() -> Res<Check> {
    let mut c = Check::new();
    let q = scenario("quartz", "ethanol")?;
    for d in ATTRACTIVE_DISTANCES {
        let f = force(&q.clone().with_distance(d), &spec())?.force;
        c.require(f < 0.0, format!("F({:.0}nm)={f:.2e}", d * 1e9));
    }
    let f = force(&q.clone().with_distance(D100), &spec())?.force;
    c.require(f > 0.0, format!("F(100nm)={f:.2e}"));
    for plate in ["quartz", "calcite"] {
        let s = scenario(plate, "ethanol")?;
        let eq = equilibrium_distance(&s, &spec())?;
        let d = eq.distance;
        c.require(
            (EQUILIBRIUM_BAND.0..=EQUILIBRIUM_BAND.1).contains(&d),
            format!("{plate} d*={:.1}nm", d * 1e9),
        );
        let below = force(&s.clone().with_distance(d * (1.0 - STABILITY_OFFSET)), &spec())?.force + eq.weight;
        let above = force(&s.clone().with_distance(d * (1.0 + STABILITY_OFFSET)), &spec())?.force + eq.weight;
        c.require(below > 0.0 && above < 0.0, format!("{plate} stable"));
    }
    Ok(c)
}

fn criterion_4() -> Res<Check> {
    let mut c = Check::new();
    for plate in ["quartz", "calcite"] {
        let vac = scenario(plate, "vacuum")?;
        let eth = scenario(plate, "ethanol")?;
        let ratio = torque(&vac, &spec())?.torque / torque(&eth, &spec())?.torque;
        c.require(
            ratio > 0.0 && (MEDIUM_RATIO_BAND.0..=MEDIUM_RATIO_BAND.1).contains(&ratio),
            format!("{plate} vac/eth={ratio:.3}"),
        );
        for d in SHORT_DISTANCES {
            let mv = torque(&vac.clone().with_distance(d), &spec())?.torque;
            let me = torque(&eth.clone().with_distance(d), &spec())?.torque;
            c.require(me.abs() > mv.abs(), format!("{plate} {:.0}nm eth/vac={:.2}", d * 1e9, me / mv));
        }
    }
    Ok(c)
}

fn criterion_5() -> Res<Check> {
    let mut c = Check::new();
    let db = db();
    let s = scenario("quartz", "ethanol")?;
    let variants: Vec<MaterialOverride> = ["BaTiO3_wIR_0.7e14", "BaTiO3_wIR_1.0e14"]
        .iter()
        .map(|name| {
            Ok(MaterialOverride {
                slot: Slot::Plate2,
                material: db.get(name)?.clone(),
            })
        })
        .collect::<Res<_>>()?;
    for row in sensitivity_scan(&s, &variants, &spec())?.rows {
        c.require(
            row.torque_rel_change.abs() < SENSITIVITY_MAX,
            format!("{} ΔM={:+.1}%", row.variant, 100.0 * row.torque_rel_change),
        );
        c.require(
            row.force_rel_change.abs() < SENSITIVITY_MAX,
            format!("{} ΔF={:+.1}%", row.variant, 100.0 * row.force_rel_change),
        );
    }
    Ok(c)
}

fn criterion_6() -> Res<Check> {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for (r, d) in [(20e-6, 100e-9), (5e-6, 30e-9), (1e-4, 1e-6), (3e-6, 2e-9)] {
        let ratio = gap_drag_coefficient(r, d, ETHANOL_VISCOSITY)? / bulk_drag_coefficient(r, ETHANOL_VISCOSITY)?;
        worst = worst.max(rel(ratio, 3.0 * PI / 64.0 * r / d));
    }
    c.require(worst <= DRAG_RATIO_TOL, format!("identity dev {worst:.1e}"));
    let ratio = gap_drag_coefficient(20e-6, 100e-9, ETHANOL_VISCOSITY)? / bulk_drag_coefficient(20e-6, ETHANOL_VISCOSITY)?;
    c.require(
        rel(ratio, DRAG_RATIO_REFERENCE) < DRAG_RATIO_REFERENCE_TOL,
        format!("R=20µm d=100nm ratio={ratio:.3}"),
    );
    Ok(c)
}

fn criterion_7() -> Res<Check> {
    let mut c = Check::new();
    let s = scenario("calcite", "ethanol")?;
    let eq = equilibrium_distance(&s, &spec())?;
    let at_gap = s.clone().with_distance(eq.distance);
    let a = fit_sin2theta(&torque_vs_theta(&at_gap, &theta_grid(5), &spec())?)?.a;
    let disk = DiskSpec::from_scenario(&s)?;
    let setup = RotationSetup::for_disk(&disk, eq.distance, ETHANOL_VISCOSITY)?;
    let theta0 = FRAC_PI_4;

    let full = simulate_rotation(theta0, &setup, a, RotationMode::Full, ROTATION_WINDOW_S)?;
    let rates: Vec<f64> = full.samples.iter().skip(1).map(|p| p.theta_dot).collect();
    let monotone = full.samples.windows(2).all(|w| w[1].theta <= w[0].theta);
    let one_sign = rates.iter().all(|r| *r < 0.0);
    let end = full.samples.last().ok_or("empty trajectory")?;
    c.require(monotone && one_sign, "monotone, no overshoot".into());
    c.require(
        theta0 - end.theta > MIN_ROTATION_RAD && end.t <= ROTATION_WINDOW_S,
        format!("Δθ({:.0}s)={:.3}rad", end.t, theta0 - end.theta),
    );

    let qs = simulate_rotation(theta0, &setup, a, RotationMode::QuasiStatic, ROTATION_WINDOW_S)?;
    let worst = qs
        .samples
        .iter()
        .map(|p| (p.theta - (theta0.tan() * (2.0 * a * p.t / setup.drag).exp()).atan()).abs())
        .fold(0.0, f64::max);
    c.require(worst <= CLOSED_FORM_TOL_RAD, format!("closed-form dev {worst:.1e}rad"));
    Ok(c)
}

fn isotropic(name: &str, eps_static: f64) -> UniaxialMaterial {
    let model = OscillatorModel::new(vec![Oscillator::undamped(eps_static - 1.0, 2e16).expect("valid")]);
    UniaxialMaterial::isotropic(name, model, None)
}

fn criterion_8() -> Res<Check> {
    let mut c = Check::new();
    let spec = spec();

    // isotropic disk on birefringent plate
    let db = db();
    let iso = Scenario::new(isotropic("iso", 4.3), db.get("BaTiO3")?.clone(), UniaxialMaterial::vacuum());
    let reference = torque(&scenario("quartz", "vacuum")?, &spec)?.torque.abs();
    let m = torque(&iso, &spec)?;
    c.require(
        m.torque.abs() <= m.error_estimate.max(1e-12 * reference),
        format!("isotropic M={:.1e} err={:.1e}", m.torque, m.error_estimate),
    );

    let s = scenario("calcite", "ethanol")?;
    let theta = 0.6;
    let base = free_energy(theta, D100, &s, &spec)?.value;
    let shifted = free_energy(theta + PI, D100, &s, &spec)?.value;
    c.require(rel(shifted, base) <= PERIODICITY_TOL, format!("period π dev {:.1e}", rel(shifted, base)));
    let reflected = free_energy(-theta, D100, &s, &spec)?.value;
    c.require(rel(reflected, base) <= SYMMETRY_TOL, format!("θ→−θ dev {:.1e}", rel(reflected, base)));
    let mut swapped = s.clone();
    std::mem::swap(&mut swapped.plate1, &mut swapped.plate2);
    let sw = free_energy(theta, D100, &swapped, &spec)?.value;
    c.require(rel(sw, base) <= SYMMETRY_TOL, format!("swap dev {:.1e}", rel(sw, base)));

    // n = 0 term of isotropic plates: −k_B T Li₃(Δ₁Δ₂)/(16π d²)
    let (e1, e2) = (4.3, 12.0);
    let iso_pair = Scenario::new(isotropic("a", e1), isotropic("b", e2), UniaxialMaterial::vacuum());
    let delta = (e1 - 1.0) / (e1 + 1.0) * (e2 - 1.0) / (e2 + 1.0);
    let li3: f64 = (1..2000).map(|k| delta.powi(k) / (k as f64).powi(3)).sum();
    let expected = -K_B * iso_pair.temperature * li3 / (16.0 * PI * D100 * D100);
    let got = matsubara_term(0, 0.3, D100, &iso_pair, &spec)?.value;
    c.require(rel(got, expected) <= SERIES_TOL, format!("n=0 series dev {:.1e}", rel(got, expected)));

    let warm = scenario("quartz", "vacuum")?;
    let m300 = torque(&warm, &spec)?.torque;
    let m30 = torque(&warm.clone().with_temperature(30.0), &spec)?.torque;
    c.require(rel(m30, m300) < TEMPERATURE_TOL, format!("M(30K)/M(300K)-1={:+.2e}", m30 / m300 - 1.0));
    Ok(c)
}

fn main() {
    let criteria: [(&str, fn() -> Res<Check>); 8] = [
        ("torque vs angle in vacuum", criterion_1),
        ("non-retarded oracle", criterion_2),
        ("force sign and float height", criterion_3),
        ("vacuum/ethanol torque ratio", criterion_4),
        ("BaTiO3 infrared sensitivity", criterion_5),
        ("gap/bulk drag ratio", criterion_6),
        ("overdamped rotation", criterion_7),
        ("property suite", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(Ok(c)) => (c.pass, c.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} ({name}): {} [{:.1}s] {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
