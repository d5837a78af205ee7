use std::f64::consts::{FRAC_PI_2, PI};

use casimir_torque::barash::{log_integrand, KernelContext};
use casimir_torque::experiment::{
    bulk_drag_coefficient, gap_drag_coefficient, net_weight, simulate_rotation, DiskSpec, RotationMode, RotationSetup,
};
use casimir_torque::materials::{load_material_db, MaterialDatabase, Oscillator, OscillatorModel, UniaxialMaterial};
use casimir_torque::observables::{fit_sin2theta, TorqueSample};
use proptest::prelude::*;

fn oscillator() -> impl Strategy<Value = Oscillator> {
    (0.01f64..5000.0, 1e12f64..1e17, 0.0f64..2.0).prop_map(|(c, w, g)| Oscillator::new(c, w, g).unwrap())
}

fn model() -> impl Strategy<Value = OscillatorModel> {
    prop::collection::vec(oscillator(), 0..4).prop_map(OscillatorModel::new)
}

fn material(name: String) -> impl Strategy<Value = UniaxialMaterial> {
    (model(), model(), prop::option::of(100.0f64..20_000.0), any::<bool>()).prop_map(
        move |(par, perp, density, iso)| {
            if iso {
                UniaxialMaterial::isotropic(name.clone(), par, density)
            } else {
                UniaxialMaterial::uniaxial(name.clone(), par, perp, density)
            }
        },
    )
}

proptest! {
    #[test]
    fn permittivity_decreases_towards_one(m in model(), a in 0.0f64..1e18, b in 0.0f64..1e18) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (e_lo, e_hi) = (m.at(lo), m.at(hi));
        prop_assert!(e_hi <= e_lo * (1.0 + 1e-15));
        prop_assert!(e_hi >= 1.0);
        prop_assert!(e_lo <= m.static_value() * (1.0 + 1e-15));
    }

    #[test]
    fn database_json_round_trip(
        mats in prop::collection::vec(0usize..1000, 1..5)
            .prop_flat_map(|ids| {
                let mut names: Vec<String> = ids.iter().map(|i| format!("m{i}")).collect();
                names.sort();
                names.dedup();
                names.into_iter().map(material).collect::<Vec<_>>()
            })
    ) {
        let mut db = MaterialDatabase::default();
        for m in &mats {
            db.insert(m.clone()).unwrap();
        }
        let back = load_material_db(db.to_json().as_bytes()).unwrap();
        prop_assert_eq!(back, db);
    }

    #[test]
    fn integrand_is_pi_periodic_in_theta(
        r in 1e5f64..3e7,
        phi in 0.0f64..std::f64::consts::TAU,
        theta in 0.0f64..PI,
        eps in prop::array::uniform5(1.0f64..50.0),
    ) {
        let mut ctx = KernelContext {
            xi: 3e14,
            eps1_par: eps[0],
            eps1_perp: eps[1],
            eps2_par: eps[2],
            eps2_perp: eps[3],
            eps3: eps[4],
            distance: 50e-9,
            theta,
            temperature: 300.0,
        };
        let a = log_integrand(r, phi, &ctx);
        ctx.theta = theta + PI;
        let b = log_integrand(r, phi, &ctx);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs() + 1e-300);
    }

    #[test]
    fn matched_plates_do_not_interact(r in 1e5f64..3e7, phi in 0.0f64..6.3, theta in 0.0f64..PI, e in 1.0f64..30.0) {
        let ctx = KernelContext {
            xi: 1e15,
            eps1_par: e,
            eps1_perp: e,
            eps2_par: e,
            eps2_perp: e,
            eps3: e,
            distance: 10e-9,
            theta,
            temperature: 300.0,
        };
        prop_assert_eq!(log_integrand(r, phi, &ctx), 0.0);
    }

    #[test]
    fn gap_to_bulk_drag_ratio(radius in 1e-6f64..1e-3, d in 1e-9f64..1e-5, eta in 1e-4f64..1.0) {
        let ratio = gap_drag_coefficient(radius, d, eta).unwrap() / bulk_drag_coefficient(radius, eta).unwrap();
        let expected = 3.0 * PI / 64.0 * radius / d;
        prop_assert!((ratio - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn weight_is_linear_in_density_contrast(rho in 1000.0f64..10_000.0, liquid in 0.0f64..2000.0) {
        let disk = DiskSpec { radius: 20e-6, thickness: 20e-6, density: rho, material: "x".into() };
        let w = net_weight(&disk, liquid).unwrap();
        let w0 = net_weight(&disk, 0.0).unwrap();
        prop_assert!((w / w0 - (rho - liquid) / rho).abs() < 1e-12);
    }

    #[test]
    fn sin2theta_fit_recovers_amplitude(a in -1e-18f64..1e-18, n in 5usize..40) {
        let samples: Vec<TorqueSample> = (0..n)
            .map(|i| {
                let theta = PI * i as f64 / (n - 1) as f64;
                TorqueSample { theta, torque: a * (2.0 * theta).sin(), error_estimate: 0.0 }
            })
            .collect();
        let fit = fit_sin2theta(&samples).unwrap();
        prop_assert!((fit.a - a).abs() <= 1e-12 * a.abs() + 1e-40);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quasi_static_rotation_matches_closed_form(
        amplitude in prop_oneof![-1e-18f64..-1e-20, 1e-20f64..1e-18],
        theta0 in 0.05f64..(FRAC_PI_2 - 0.05),
    ) {
        let setup = RotationSetup { moment_of_inertia: 1e-20, drag: 3e-15 };
        let traj = simulate_rotation(theta0, &setup, amplitude, RotationMode::QuasiStatic, 300.0).unwrap();
        for p in &traj.samples {
            let exact = (theta0.tan() * (2.0 * amplitude * p.t / setup.drag).exp()).atan();
            prop_assert!((p.theta - exact).abs() < 1e-6, "t={} θ={} exact={}", p.t, p.theta, exact);
        }
        // monotone, no overshoot
        let sign = amplitude.signum() * (2.0 * theta0).sin().signum();
        prop_assert!(traj.samples.windows(2).all(|w| (w[1].theta - w[0].theta) * sign >= 0.0));
    }
}
