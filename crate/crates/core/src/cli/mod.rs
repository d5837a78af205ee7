//! Command-line front end.
//!
//! Every run resolves its arguments into a [`RunConfig`], computes a
//! [`Table`], and writes it with a header that echoes the resolved
//! configuration, the constants table and a command line that reproduces
//! the file.

pub mod output;

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::barash::{BarashError, QuadratureSpec};
use crate::constants::{CONSTANTS_VERSION, C, ETHANOL_VISCOSITY, G_ACCEL, HBAR, K_B};
use crate::experiment::{
    equilibrium_distance, net_weight, simulate_rotation, DiskSpec, ExperimentError, RotationMode, RotationSetup,
};
use crate::materials::{average_crossovers, load_material_db, MaterialDatabase, MaterialError, UniaxialMaterial};
use crate::nonretarded::{omega_bar_closed, omega_bar_numeric, torque_nonretarded, NonRetardedError};
use crate::observables::{
    fit_sin2theta, force_vs_distance, sensitivity_scan, theta_grid, torque_vs_distance, torque_vs_theta,
    MaterialOverride, ObservableError, Slot,
};
use crate::scenario::Scenario;
pub use output::{Cell, Format, Header, Table};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<MaterialError> for CliError {
    fn from(e: MaterialError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<BarashError> for CliError {
    fn from(e: BarashError) -> Self {
        match e {
            BarashError::InvalidSpec(_) | BarashError::Scenario(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ObservableError> for CliError {
    fn from(e: ObservableError) -> Self {
        match e {
            ObservableError::Quadrature(b) => b.into(),
            ObservableError::InvalidInput(_) => CliError::Config(e.to_string()),
            ObservableError::DegenerateFit => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Observable(o) => o.into(),
            ExperimentError::MissingDensity(_) | ExperimentError::InvalidInput(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<NonRetardedError> for CliError {
    fn from(e: NonRetardedError) -> Self {
        match e {
            NonRetardedError::NonPositiveDistance(_) => CliError::Config(e.to_string()),
            NonRetardedError::Quadrature(_) => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "casimir-torque",
    version,
    about = "Casimir-Lifshitz torque and force between birefringent plates"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Material database (JSON); the bundled table is used when omitted.
    #[arg(long, global = true)]
    pub materials: Option<PathBuf>,
    /// Disk material (top plate).
    #[arg(long, global = true, default_value = "quartz")]
    pub plate1: String,
    /// Substrate material (bottom plate).
    #[arg(long, global = true, default_value = "BaTiO3")]
    pub plate2: String,
    /// Medium filling the gap.
    #[arg(long, global = true, default_value = "ethanol")]
    pub medium: String,
    #[arg(long, global = true, default_value_t = 100e-9)]
    pub distance_m: f64,
    #[arg(long, global = true, default_value_t = FRAC_PI_4, allow_hyphen_values = true)]
    pub theta_rad: f64,
    #[arg(long, global = true, default_value_t = 300.0)]
    pub temperature_k: f64,
    #[arg(long, global = true, default_value_t = 20e-6)]
    pub radius_m: f64,
    #[arg(long, global = true, default_value_t = 20e-6)]
    pub thickness_m: f64,
    /// Relative tolerance of each Matsubara term.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub rel_tol: f64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Leave the generation time out of the header.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Theta,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    QuasiStatic,
}

impl From<ModeArg> for RotationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => RotationMode::Full,
            ModeArg::QuasiStatic => RotationMode::QuasiStatic,
        }
    }
}

/// `slot=material`, e.g. `plate2=BaTiO3_wIR_0.7e14`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantArg {
    pub slot: Slot,
    pub material: String,
}

fn slot_name(slot: Slot) -> &'static str {
    match slot {
        Slot::Plate1 => "plate1",
        Slot::Plate2 => "plate2",
        Slot::Medium => "medium",
    }
}

fn parse_variant(s: &str) -> Result<VariantArg, String> {
    let (slot, material) = s
        .split_once('=')
        .ok_or_else(|| format!("expected slot=material, got `{s}`"))?;
    let slot = match slot {
        "plate1" => Slot::Plate1,
        "plate2" => Slot::Plate2,
        "medium" => Slot::Medium,
        other => return Err(format!("unknown slot `{other}` (plate1, plate2, medium)")),
    };
    if material.is_empty() {
        return Err("empty material name".into());
    }
    Ok(VariantArg {
        slot,
        material: material.to_string(),
    })
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// ε(iξ) of the three scenario materials on a log grid.
    EpsTable {
        #[arg(long, default_value_t = 1e12)]
        xi_min_rad_s: f64,
        #[arg(long, default_value_t = 1e18)]
        xi_max_rad_s: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
    },
    /// Torque against angle (over [0, π]) or against distance (θ = π/4).
    TorqueScan {
        #[arg(long, value_enum, default_value_t = Axis::Theta)]
        axis: Axis,
        #[arg(long, default_value_t = 17)]
        points: usize,
        #[arg(long, default_value_t = 2e-9)]
        d_min_m: f64,
        #[arg(long, default_value_t = 200e-9)]
        d_max_m: f64,
    },
    /// Force against distance at the scenario angle.
    ForceScan {
        #[arg(long, default_value_t = 2e-9)]
        d_min_m: f64,
        #[arg(long, default_value_t = 200e-9)]
        d_max_m: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Float height where the force balances the disk's net weight.
    Equilibrium,
    /// Rotation of the disk from rest at --theta-rad.
    Dynamics {
        #[arg(long, value_enum, default_value_t = ModeArg::QuasiStatic)]
        mode: ModeArg,
        #[arg(long, default_value_t = 600.0)]
        t_end_s: f64,
        /// Torque amplitude a in M = a sin 2θ; fitted at the gap when omitted.
        #[arg(long, allow_hyphen_values = true)]
        amplitude_n_m: Option<f64>,
        #[arg(long, default_value_t = ETHANOL_VISCOSITY)]
        viscosity_pa_s: f64,
        /// Use the float height instead of --distance-m.
        #[arg(long)]
        at_equilibrium: bool,
    },
    /// Characteristic frequency ω̄ by both routes and the non-retarded torque.
    Oracle,
    /// Torque and force with materials swapped for variants.
    Sensitivity {
        /// slot=material; defaults to the two BaTiO3 infrared variants.
        #[arg(long = "variant", value_parser = parse_variant)]
        variants: Vec<VariantArg>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EpsTable { .. } => "eps-table",
            Command::TorqueScan { .. } => "torque-scan",
            Command::ForceScan { .. } => "force-scan",
            Command::Equilibrium => "equilibrium",
            Command::Dynamics { .. } => "dynamics",
            Command::Oracle => "oracle",
            Command::Sensitivity { .. } => "sensitivity",
        }
    }

    /// Subcommand arguments as (flag, value) pairs, bare flags with `None`.
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::EpsTable {
                xi_min_rad_s,
                xi_max_rad_s,
                points,
            } => vec![
                ("--xi-min-rad-s", Some(num(*xi_min_rad_s))),
                ("--xi-max-rad-s", Some(num(*xi_max_rad_s))),
                ("--points", Some(points.to_string())),
            ],
            Command::TorqueScan {
                axis,
                points,
                d_min_m,
                d_max_m,
            } => vec![
                ("--axis", Some(value_name(axis))),
                ("--points", Some(points.to_string())),
                ("--d-min-m", Some(num(*d_min_m))),
                ("--d-max-m", Some(num(*d_max_m))),
            ],
            Command::ForceScan {
                d_min_m,
                d_max_m,
                points,
            } => vec![
                ("--d-min-m", Some(num(*d_min_m))),
                ("--d-max-m", Some(num(*d_max_m))),
                ("--points", Some(points.to_string())),
            ],
            Command::Equilibrium | Command::Oracle => vec![],
            Command::Dynamics {
                mode,
                t_end_s,
                amplitude_n_m,
                viscosity_pa_s,
                at_equilibrium,
            } => {
                let mut v = vec![
                    ("--mode", Some(value_name(mode))),
                    ("--t-end-s", Some(num(*t_end_s))),
                    ("--viscosity-pa-s", Some(num(*viscosity_pa_s))),
                ];
                if let Some(a) = amplitude_n_m {
                    v.push(("--amplitude-n-m", Some(num(*a))));
                }
                if *at_equilibrium {
                    v.push(("--at-equilibrium", None));
                }
                v
            }
            Command::Sensitivity { variants } => variants
                .iter()
                .map(|v| ("--variant", Some(format!("{}={}", slot_name(v.slot), v.material))))
                .collect(),
        }
    }
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

/// Shortest representation that parses back to the same f64.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn shell_quote(s: &str) -> String {
    let plain = !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_-./=:+,@%".contains(c));
    if plain {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

/// Fully resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub common: CommonArgs,
    pub scenario: Scenario,
    pub quadrature: QuadratureSpec,
    pub database: MaterialDatabase,
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let Cli { common, mut command } = cli;
        let database = match &common.materials {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                load_material_db(&bytes)?
            }
            None => MaterialDatabase::bundled(),
        };
        let mut scenario = Scenario::from_names(&database, &common.plate1, &common.plate2, &common.medium)?;
        scenario.distance = common.distance_m;
        scenario.theta = common.theta_rad;
        scenario.temperature = common.temperature_k;
        scenario.disk_radius = common.radius_m;
        scenario.disk_thickness = common.thickness_m;
        scenario.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let quadrature = QuadratureSpec {
            rel_tol: common.rel_tol,
            ..QuadratureSpec::default()
        };
        quadrature.validate()?;

        if let Command::Sensitivity { variants } = &mut command {
            if variants.is_empty() {
                *variants = ["BaTiO3_wIR_0.7e14", "BaTiO3_wIR_1.0e14"]
                    .iter()
                    .map(|m| VariantArg {
                        slot: Slot::Plate2,
                        material: m.to_string(),
                    })
                    .collect();
            }
            for v in variants.iter() {
                database.get(&v.material)?;
            }
        }
        Ok(Self {
            command,
            common,
            scenario,
            quadrature,
            database,
        })
    }

    /// Argument vector (without the program name) that reproduces this run.
    pub fn rerun_args(&self) -> Vec<String> {
        let c = &self.common;
        let mut args = Vec::new();
        if let Some(p) = &c.materials {
            args.push(format!("--materials={}", p.display()));
        }
        args.push(format!("--plate1={}", c.plate1));
        args.push(format!("--plate2={}", c.plate2));
        args.push(format!("--medium={}", c.medium));
        args.push(format!("--distance-m={}", num(c.distance_m)));
        args.push(format!("--theta-rad={}", num(c.theta_rad)));
        args.push(format!("--temperature-k={}", num(c.temperature_k)));
        args.push(format!("--radius-m={}", num(c.radius_m)));
        args.push(format!("--thickness-m={}", num(c.thickness_m)));
        args.push(format!("--rel-tol={}", num(c.rel_tol)));
        args.push(format!("--format={}", value_name(&c.format)));
        if let Some(p) = &c.out {
            args.push(format!("--out={}", p.display()));
        }
        if c.no_timestamp {
            args.push("--no-timestamp".into());
        }
        args.push(self.command.name().into());
        for (flag, value) in self.command.flags() {
            match value {
                Some(v) => args.push(format!("{flag}={v}")),
                None => args.push(flag.into()),
            }
        }
        args
    }

    pub fn config_json(&self) -> Value {
        let c = &self.common;
        let q = &self.quadrature;
        let params: serde_json::Map<String, Value> = self
            .command
            .flags()
            .into_iter()
            .map(|(flag, v)| {
                let value = match v {
                    None => json!(true),
                    Some(v) => match (v.parse::<u64>(), v.parse::<f64>()) {
                        (Ok(i), _) => json!(i),
                        (_, Ok(x)) => json!(x),
                        _ => Value::String(v),
                    },
                };
                (flag.trim_start_matches("--").replace('-', "_"), value)
            })
            .fold(serde_json::Map::new(), |mut m, (k, v)| {
                // repeated flags collect into an array
                match m.get_mut(&k) {
                    Some(Value::Array(a)) => a.push(v),
                    Some(prev) => *prev = json!([prev.clone(), v]),
                    None => {
                        m.insert(k, v);
                    }
                }
                m
            });
        json!({
            "command": self.command.name(),
            "materials": c.materials.as_ref().map_or("bundled".to_string(), |p| p.display().to_string()),
            "plate1": c.plate1,
            "plate2": c.plate2,
            "medium": c.medium,
            "distance_m": c.distance_m,
            "theta_rad": c.theta_rad,
            "temperature_k": c.temperature_k,
            "radius_m": c.radius_m,
            "thickness_m": c.thickness_m,
            "quadrature": {
                "rel_tol": q.rel_tol,
                "u_max": q.u_max,
                "panels_phi": q.panels_phi,
                "max_matsubara": q.max_matsubara,
                "term_stop_ratio": q.term_stop_ratio,
            },
            "params": params,
        })
    }

    pub fn header(&self, generated: Option<String>) -> Header {
        let rerun = std::iter::once("casimir-torque".to_string())
            .chain(self.rerun_args().iter().map(|a| shell_quote(a)))
            .collect::<Vec<_>>()
            .join(" ");
        Header {
            command: self.command.name().to_string(),
            config: self.config_json(),
            constants: constants_json(),
            rerun,
            generated,
        }
    }
}

fn constants_json() -> Value {
    json!({
        "version": CONSTANTS_VERSION,
        "hbar_j_s": HBAR,
        "k_b_j_k": K_B,
        "c_m_s": C,
        "g_m_s2": G_ACCEL,
    })
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Config(format!("need 0 < min < max, got [{lo:e}, {hi:e}]")));
    }
    match points {
        0 => Err(CliError::Config("points must be positive".into())),
        1 => Ok(vec![lo]),
        _ => {
            let step = (hi / lo).ln() / (points - 1) as f64;
            Ok((0..points)
                .map(|i| if i + 1 == points { hi } else { lo * (step * i as f64).exp() })
                .collect())
        }
    }
}

/// Runs the computation and returns the output table.
pub fn execute(config: &RunConfig) -> Result<Table, CliError> {
    let scenario = &config.scenario;
    let spec = &config.quadrature;
    match &config.command {
        Command::EpsTable {
            xi_min_rad_s,
            xi_max_rad_s,
            points,
        } => eps_table(scenario, *xi_min_rad_s, *xi_max_rad_s, *points),
        Command::TorqueScan {
            axis,
            points,
            d_min_m,
            d_max_m,
        } => {
            if *points == 0 {
                return Err(CliError::Config("points must be positive".into()));
            }
            match axis {
                Axis::Theta => {
                    let samples = torque_vs_theta(scenario, &theta_grid(*points), spec)?;
                    let mut t = Table::new(["theta_rad", "torque_n_m", "error_n_m"]);
                    for s in &samples {
                        t.push(vec![s.theta.into(), s.torque.into(), s.error_estimate.into()]);
                    }
                    if let Ok(fit) = fit_sin2theta(&samples) {
                        t.note("fit_amplitude_n_m", fit.a);
                        t.note("fit_rms_residual_n_m", fit.rms_residual);
                    }
                    Ok(t)
                }
                Axis::Distance => {
                    let grid = log_grid(*d_min_m, *d_max_m, *points)?;
                    let mut t = Table::new(["distance_m", "torque_n_m", "error_n_m"]);
                    for (d, s) in torque_vs_distance(scenario, &grid, spec)? {
                        t.push(vec![d.into(), s.torque.into(), s.error_estimate.into()]);
                    }
                    Ok(t)
                }
            }
        }
        Command::ForceScan {
            d_min_m,
            d_max_m,
            points,
        } => {
            let grid = log_grid(*d_min_m, *d_max_m, *points)?;
            let samples = force_vs_distance(scenario, &grid, spec)?;
            let weight = DiskSpec::from_scenario(scenario)
                .ok()
                .map(|disk| net_weight(&disk, scenario.medium.density.unwrap_or(0.0)))
                .transpose()?;
            let mut t = match weight {
                Some(_) => Table::new(["distance_m", "force_n", "error_n", "net_force_n"]),
                None => Table::new(["distance_m", "force_n", "error_n"]),
            };
            for s in &samples {
                let mut row = vec![s.distance.into(), s.force.into(), s.error_estimate.into()];
                if let Some(w) = weight {
                    row.push((s.force + w).into());
                }
                t.push(row);
            }
            if let Some(w) = weight {
                t.note("net_weight_n", w);
            }
            Ok(t)
        }
        Command::Equilibrium => {
            let eq = equilibrium_distance(scenario, spec)?;
            let mut t = Table::new(["distance_m", "net_weight_n", "force_evaluations"]);
            t.push(vec![eq.distance.into(), eq.weight.into(), eq.evaluations.into()]);
            Ok(t)
        }
        Command::Dynamics {
            mode,
            t_end_s,
            amplitude_n_m,
            viscosity_pa_s,
            at_equilibrium,
        } => {
            let disk = DiskSpec::from_scenario(scenario)?;
            let distance = if *at_equilibrium {
                equilibrium_distance(scenario, spec)?.distance
            } else {
                scenario.distance
            };
            let amplitude = match amplitude_n_m {
                Some(a) => *a,
                None => {
                    let at_gap = scenario.clone().with_distance(distance);
                    fit_sin2theta(&torque_vs_theta(&at_gap, &theta_grid(5), spec)?)?.a
                }
            };
            let setup = RotationSetup::for_disk(&disk, distance, *viscosity_pa_s)?;
            let traj = simulate_rotation(scenario.theta, &setup, amplitude, (*mode).into(), *t_end_s)?;
            let mut t = Table::new(["t_s", "theta_rad", "theta_dot_rad_s"]);
            for p in &traj.samples {
                t.push(vec![p.t.into(), p.theta.into(), p.theta_dot.into()]);
            }
            t.note("distance_m", distance);
            t.note("amplitude_n_m", amplitude);
            t.note("drag_n_m_s", setup.drag);
            t.note("moment_of_inertia_kg_m2", setup.moment_of_inertia);
            Ok(t)
        }
        Command::Oracle => {
            let numeric = omega_bar_numeric(&scenario.plate1, &scenario.plate2, &scenario.medium)?;
            let closed = omega_bar_closed(&scenario.plate1, &scenario.plate2, &scenario.medium)?;
            let mut t = Table::new(["method", "omega_bar_rad_s", "error_rad_s", "torque_nonretarded_n_m"]);
            for (name, r) in [("numeric", numeric), ("closed_form", closed)] {
                let m = torque_nonretarded(scenario.theta, scenario.distance, scenario.area(), r.omega_bar)?;
                t.push(vec![name.into(), r.omega_bar.into(), r.error.into(), m.into()]);
            }
            let scale = closed.omega_bar.abs().max(f64::MIN_POSITIVE);
            t.note("relative_difference", (numeric.omega_bar - closed.omega_bar).abs() / scale);
            Ok(t)
        }
        Command::Sensitivity { variants } => {
            let overrides = variants
                .iter()
                .map(|v| {
                    Ok(MaterialOverride {
                        slot: v.slot,
                        material: config.database.get(&v.material)?.clone(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let report = sensitivity_scan(scenario, &overrides, spec)?;
            let mut t = Table::new([
                "variant",
                "slot",
                "torque_n_m",
                "force_n",
                "torque_rel_change",
                "force_rel_change",
            ]);
            t.push(vec![
                "baseline".into(),
                "-".into(),
                report.baseline_torque.torque.into(),
                report.baseline_force.force.into(),
                0.0.into(),
                0.0.into(),
            ]);
            for (row, v) in report.rows.iter().zip(variants) {
                t.push(vec![
                    row.variant.clone().into(),
                    slot_name(v.slot).into(),
                    row.torque.into(),
                    row.force.into(),
                    row.torque_rel_change.into(),
                    row.force_rel_change.into(),
                ]);
            }
            Ok(t)
        }
    }
}

fn eps_table(scenario: &Scenario, lo: f64, hi: f64, points: usize) -> Result<Table, CliError> {
    let grid = log_grid(lo, hi, points)?;
    let mut materials: Vec<&UniaxialMaterial> = Vec::new();
    for m in [&scenario.plate1, &scenario.plate2, &scenario.medium] {
        if !materials.iter().any(|k| k.name == m.name) {
            materials.push(m);
        }
    }
    let mut columns = vec!["xi_rad_s".to_string()];
    for m in &materials {
        columns.extend(["par", "perp", "avg"].iter().map(|s| format!("{}_{s}", m.name)));
    }
    let mut t = Table::new(columns);
    for &xi in &grid {
        let mut row = vec![Cell::Num(xi)];
        for m in &materials {
            let (par, perp) = m.epsilon_pair(xi);
            row.extend([par.into(), perp.into(), m.epsilon_average(xi).into()]);
        }
        t.push(row);
    }
    let medium = &scenario.medium;
    for plate in [&scenario.plate1, &scenario.plate2] {
        if plate.name == medium.name {
            continue;
        }
        let crossings = average_crossovers(plate, medium, lo, hi, 10 * points.max(2));
        for (i, xi) in crossings.into_iter().enumerate() {
            t.note(format!("crossover_{}_avg_vs_{}_{}_rad_s", plate.name, medium.name, i + 1), xi);
        }
    }
    Ok(t)
}

/// Parses, runs and writes; returns the table that was written.
pub fn run<I, T>(args: I) -> Result<Table, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    run_parsed(cli)
}

fn run_parsed(cli: Cli) -> Result<Table, CliError> {
    let config = RunConfig::resolve(cli)?;
    let table = execute(&config)?;
    let generated = (!config.common.no_timestamp)
        .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let text = output::render(config.common.format, &config.header(generated), &table);
    match &config.common.out {
        Some(path) => output::write_atomic(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(table)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_parsed(cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("casimir-torque: {e}");
            e.exit_code()
        }
    }
}
