//! Dielectric response at imaginary frequency, the Matsubara ladder and the
//! material database.
//!
//! Permittivities follow the sum-of-oscillators form
//!
//! ```text
//! ε(iξ) = 1 + Σ_j C_j / (1 + (ξ/ω_j)² + g_j ξ/ω_j)
//! ```
//!
//! which is ≥ 1 and non-increasing in ξ for undamped oscillators.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{HBAR, K_B};

/// Bundled database: the two-oscillator parameters for quartz, calcite,
/// BaTiO3 (plus its two ω_IR literature variants), ethanol and vacuum.
pub const BUNDLED_DATABASE: &str = include_str!("../data/materials.json");

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("failed to parse material database: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate material name `{0}`")]
    DuplicateName(String),
    #[error("material entry {entry}: missing required field `{field}`")]
    MissingField { entry: String, field: &'static str },
    #[error("material entry {entry}: supply either `isotropic` or the `parallel`/`perpendicular` pair, not both")]
    ConflictingModels { entry: String },
    #[error("invalid oscillator (C={strength}, ω={frequency}, g={damping}): need C > 0, ω > 0, g ≥ 0")]
    InvalidOscillator {
        strength: f64,
        frequency: f64,
        damping: f64,
    },
    #[error("material entry {entry}: density must be positive, got {density}")]
    InvalidDensity { entry: String, density: f64 },
    #[error("imaginary frequency must be non-negative, got {0}")]
    NegativeFrequency(f64),
    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
}

/// One Lorentz-type oscillator evaluated on the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    /// Dimensionless absorption strength C_j.
    pub strength: f64,
    /// Characteristic angular frequency ω_j, rad/s.
    pub frequency: f64,
    /// Dimensionless damping g_j.
    pub damping: f64,
}

impl Oscillator {
    pub fn new(strength: f64, frequency: f64, damping: f64) -> Result<Self, MaterialError> {
        let valid = strength.is_finite()
            && frequency.is_finite()
            && damping.is_finite()
            && strength > 0.0
            && frequency > 0.0
            && damping >= 0.0;
        if !valid {
            return Err(MaterialError::InvalidOscillator {
                strength,
                frequency,
                damping,
            });
        }
        Ok(Self {
            strength,
            frequency,
            damping,
        })
    }

    pub fn undamped(strength: f64, frequency: f64) -> Result<Self, MaterialError> {
        Self::new(strength, frequency, 0.0)
    }

    #[inline]
    fn term(&self, xi: f64) -> f64 {
        let x = xi / self.frequency;
        self.strength / (1.0 + x * x + self.damping * x)
    }
}

/// Sum-of-oscillators permittivity. An empty list is vacuum (ε ≡ 1).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OscillatorModel {
    oscillators: Vec<Oscillator>,
}

impl OscillatorModel {
    pub fn new(oscillators: Vec<Oscillator>) -> Self {
        Self { oscillators }
    }

    pub fn vacuum() -> Self {
        Self::default()
    }

    /// The common infrared + ultraviolet undamped pair.
    pub fn two_oscillator(
        c_ir: f64,
        omega_ir: f64,
        c_uv: f64,
        omega_uv: f64,
    ) -> Result<Self, MaterialError> {
        Ok(Self::new(vec![
            Oscillator::undamped(c_ir, omega_ir)?,
            Oscillator::undamped(c_uv, omega_uv)?,
        ]))
    }

    pub fn oscillators(&self) -> &[Oscillator] {
        &self.oscillators
    }

    pub fn is_undamped(&self) -> bool {
        self.oscillators.iter().all(|o| o.damping == 0.0)
    }

    /// ε(iξ) without the sign check on ξ; callers guarantee ξ ≥ 0.
    #[inline]
    pub fn at(&self, xi: f64) -> f64 {
        debug_assert!(xi >= 0.0);
        1.0 + self.oscillators.iter().map(|o| o.term(xi)).sum::<f64>()
    }

    /// Static limit 1 + Σ C_j.
    pub fn static_value(&self) -> f64 {
        self.at(0.0)
    }

    /// Returns a copy with every oscillator whose frequency equals `from`
    /// moved to `to`.
    pub fn with_frequency_replaced(&self, from: f64, to: f64) -> Result<Self, MaterialError> {
        let oscillators = self
            .oscillators
            .iter()
            .map(|o| {
                let f = if o.frequency == from { to } else { o.frequency };
                Oscillator::new(o.strength, f, o.damping)
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { oscillators })
    }
}

/// Evaluates ε(iξ) for ξ ≥ 0.
pub fn eval_epsilon(model: &OscillatorModel, xi: f64) -> Result<f64, MaterialError> {
    if xi.is_nan() || xi < 0.0 {
        return Err(MaterialError::NegativeFrequency(xi));
    }
    Ok(model.at(xi))
}

/// Matsubara frequency ξ_n = 2π k_B T n / ħ.
pub fn matsubara_xi(n: usize, temperature: f64) -> Result<f64, MaterialError> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(MaterialError::NonPositiveTemperature(temperature));
    }
    Ok(n as f64 * matsubara_spacing(temperature))
}

#[inline]
pub(crate) fn matsubara_spacing(temperature: f64) -> f64 {
    2.0 * PI * K_B * temperature / HBAR
}

/// A uniaxial dielectric: one model along the optical axis, one across it.
#[derive(Debug, Clone, PartialEq)]
pub struct UniaxialMaterial {
    pub name: String,
    pub parallel: OscillatorModel,
    pub perpendicular: OscillatorModel,
    /// Mass density in kg/m³, when known.
    pub density: Option<f64>,
}

impl UniaxialMaterial {
    pub fn uniaxial(
        name: impl Into<String>,
        parallel: OscillatorModel,
        perpendicular: OscillatorModel,
        density: Option<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            parallel,
            perpendicular,
            density,
        }
    }

    pub fn isotropic(name: impl Into<String>, model: OscillatorModel, density: Option<f64>) -> Self {
        Self {
            name: name.into(),
            parallel: model.clone(),
            perpendicular: model,
            density,
        }
    }

    pub fn vacuum() -> Self {
        Self::isotropic("vacuum", OscillatorModel::vacuum(), None)
    }

    pub fn is_isotropic(&self) -> bool {
        self.parallel == self.perpendicular
    }

    /// (ε∥, ε⊥) at imaginary frequency iξ.
    #[inline]
    pub fn epsilon_pair(&self, xi: f64) -> (f64, f64) {
        (self.parallel.at(xi), self.perpendicular.at(xi))
    }

    /// Isotropic average of the two principal values, ½(ε∥ + ε⊥).
    pub fn epsilon_average(&self, xi: f64) -> f64 {
        let (p, s) = self.epsilon_pair(xi);
        0.5 * (p + s)
    }
}

/// Frequencies in [lo, hi] where the averaged permittivities of `a` and `b`
/// cross, located on a log grid of `samples` points and refined by
/// bisection in ln ξ.
pub fn average_crossovers(a: &UniaxialMaterial, b: &UniaxialMaterial, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    if !(lo > 0.0 && hi > lo) || samples < 2 {
        return Vec::new();
    }
    let gap = |xi: f64| a.epsilon_average(xi) - b.epsilon_average(xi);
    let step = (hi / lo).ln() / (samples - 1) as f64;
    let at = |i: usize| lo * (step * i as f64).exp();
    let mut out = Vec::new();
    for i in 1..samples {
        let (mut x0, mut x1) = (at(i - 1), at(i));
        let (g0, g1) = (gap(x0), gap(x1));
        if g0 == 0.0 {
            out.push(x0);
            continue;
        }
        if g0.signum() == g1.signum() || g1 == 0.0 {
            continue;
        }
        while x1 / x0 > 1.0 + 1e-12 {
            let mid = (x0 * x1).sqrt();
            if gap(mid).signum() == g0.signum() {
                x0 = mid;
            } else {
                x1 = mid;
            }
        }
        out.push((x0 * x1).sqrt());
    }
    out
}

/// Named collection of materials, ordered by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialDatabase {
    entries: BTreeMap<String, UniaxialMaterial>,
}

impl MaterialDatabase {
    pub fn bundled() -> Self {
        load_material_db(BUNDLED_DATABASE.as_bytes()).expect("bundled material database is valid")
    }

    pub fn get(&self, name: &str) -> Result<&UniaxialMaterial, MaterialError> {
        self.entries
            .get(name)
            .ok_or_else(|| MaterialError::UnknownMaterial(name.to_owned()))
    }

    pub fn insert(&mut self, material: UniaxialMaterial) -> Result<(), MaterialError> {
        if self.entries.contains_key(&material.name) {
            return Err(MaterialError::DuplicateName(material.name));
        }
        self.entries.insert(material.name.clone(), material);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &UniaxialMaterial> {
        self.entries.values()
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<RawEntry> = self.entries.values().map(RawEntry::from_material).collect();
        serde_json::to_string_pretty(&raw).expect("material database serializes")
    }
}

// On-disk representation. Everything is optional here so that missing
// fields produce a dedicated diagnostic instead of a generic serde error.

#[derive(Debug, Serialize, Deserialize)]
struct RawOscillator {
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oscillators: Option<Vec<RawOscillator>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density_kg_m3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parallel: Option<RawModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    perpendicular: Option<RawModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    isotropic: Option<RawModel>,
}

impl RawModel {
    fn from_model(model: &OscillatorModel) -> Self {
        Self {
            oscillators: Some(
                model
                    .oscillators
                    .iter()
                    .map(|o| RawOscillator {
                        strength: Some(o.strength),
                        omega_rad_s: Some(o.frequency),
                        g: Some(o.damping),
                    })
                    .collect(),
            ),
        }
    }

    fn into_model(self, entry: &str) -> Result<OscillatorModel, MaterialError> {
        let missing = |field| MaterialError::MissingField {
            entry: entry.to_owned(),
            field,
        };
        let oscillators = self.oscillators.ok_or_else(|| missing("oscillators"))?;
        oscillators
            .into_iter()
            .map(|o| {
                Oscillator::new(
                    o.strength.ok_or_else(|| missing("C"))?,
                    o.omega_rad_s.ok_or_else(|| missing("omega_rad_s"))?,
                    o.g.unwrap_or(0.0),
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .map(OscillatorModel::new)
    }
}

impl RawEntry {
    fn from_material(m: &UniaxialMaterial) -> Self {
        let (parallel, perpendicular, isotropic) = if m.is_isotropic() {
            (None, None, Some(RawModel::from_model(&m.parallel)))
        } else {
            (
                Some(RawModel::from_model(&m.parallel)),
                Some(RawModel::from_model(&m.perpendicular)),
                None,
            )
        };
        Self {
            name: Some(m.name.clone()),
            density_kg_m3: m.density,
            parallel,
            perpendicular,
            isotropic,
        }
    }

    fn into_material(self, index: usize) -> Result<UniaxialMaterial, MaterialError> {
        let label = self.name.clone().unwrap_or_else(|| format!("#{index}"));
        let name = self.name.ok_or_else(|| MaterialError::MissingField {
            entry: label.clone(),
            field: "name",
        })?;
        if let Some(density) = self.density_kg_m3 {
            if !(density.is_finite() && density > 0.0) {
                return Err(MaterialError::InvalidDensity {
                    entry: label,
                    density,
                });
            }
        }
        match (self.isotropic, self.parallel, self.perpendicular) {
            (Some(iso), None, None) => Ok(UniaxialMaterial::isotropic(
                name,
                iso.into_model(&label)?,
                self.density_kg_m3,
            )),
            (Some(_), _, _) => Err(MaterialError::ConflictingModels { entry: label }),
            (None, Some(par), Some(perp)) => Ok(UniaxialMaterial::uniaxial(
                name,
                par.into_model(&label)?,
                perp.into_model(&label)?,
                self.density_kg_m3,
            )),
            (None, None, _) => Err(MaterialError::MissingField {
                entry: label,
                field: "parallel",
            }),
            (None, Some(_), None) => Err(MaterialError::MissingField {
                entry: label,
                field: "perpendicular",
            }),
        }
    }
}

/// Parses a material database document (a JSON array of entries).
/// A blank document yields an empty database.
pub fn load_material_db(source: &[u8]) -> Result<MaterialDatabase, MaterialError> {
    let mut db = MaterialDatabase::default();
    if source.iter().all(u8::is_ascii_whitespace) {
        return Ok(db);
    }
    let raw: Vec<RawEntry> = serde_json::from_slice(source)?;
    for (i, entry) in raw.into_iter().enumerate() {
        db.insert(entry.into_material(i)?)?;
    }
    Ok(db)
}
