//! Retarded Helmholtz free energy per unit area Ω(θ, d) of two uniaxial
//! plates, summed over Matsubara frequencies.
//!
//! Each Matsubara term is a 2-D integral over the in-plane wave vector. The
//! radial variable is replaced by `u = 2ρ₃d` (so `r dr = u du / 4d²`) and
//! integrated on Gauss-Legendre panels sized to the `e^{−u}` decay; the
//! azimuth uses composite Gauss-Legendre panels on [0, π) since the
//! integrand is π-periodic in φ. Grids are refined by doubling until two
//! successive estimates agree to the requested tolerance.
//!
//! Several (θ, d) probes can be evaluated on one shared grid. Finite
//! differences of Ω taken this way are free of grid-to-grid noise.

mod kernel;

pub use kernel::{log_integrand, rho_factors, KernelContext, RhoSet};

use std::f64::consts::PI;

use thiserror::Error;

use crate::constants::{C, K_B};
use crate::materials::matsubara_spacing;
use crate::quadrature::GaussLegendre;
use crate::scenario::{Scenario, ScenarioError};
use kernel::{NodeCommon, Permittivities};

/// Gauss-Legendre points per panel, in both variables.
const PANEL_ORDER: usize = 8;
/// Maximum number of grid doublings per Matsubara term.
const MAX_REFINEMENTS: u32 = 4;
/// Radial breakpoints (offsets from u₀) below the cutoff.
const U_BREAKS: [f64; 7] = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
/// Smallest u₀ that gets graded panels; below it the region near u₀ carries
/// a negligible share of the integral.
const GRADE_FLOOR: f64 = 1.0 / 256.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarashError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(String),
    #[error("Matsubara term n={n} did not converge after {refinements} refinements: relative change {achieved:e} > {requested:e}")]
    NotConverged {
        n: usize,
        refinements: u32,
        achieved: f64,
        requested: f64,
    },
    #[error("Matsubara series not truncated within {max_matsubara} terms (last |term|/|sum| = {last_ratio:e})")]
    TruncationNotReached { max_matsubara: usize, last_ratio: f64 },
}

/// Accuracy and truncation settings for the free-energy quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Relative tolerance for each Matsubara term.
    pub rel_tol: f64,
    /// Width of the radial window in u = 2ρ₃d above its lower end.
    pub u_max: f64,
    /// Azimuthal panels on the full circle at the coarsest level.
    pub panels_phi: usize,
    /// Hard cap on the number of Matsubara terms.
    pub max_matsubara: usize,
    /// The series stops after three consecutive terms below this fraction
    /// of the running sum.
    pub term_stop_ratio: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            u_max: 60.0,
            panels_phi: 32,
            max_matsubara: 2000,
            term_stop_ratio: 1e-7,
        }
    }
}

impl QuadratureSpec {
    /// A cheaper configuration for interactive previews.
    pub fn preview() -> Self {
        Self {
            rel_tol: 1e-4,
            u_max: 40.0,
            panels_phi: 16,
            max_matsubara: 2000,
            term_stop_ratio: 1e-5,
        }
    }

    pub fn validate(&self) -> Result<(), BarashError> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(BarashError::InvalidSpec(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.u_max >= 30.0) {
            return Err(BarashError::InvalidSpec(format!("u_max must be ≥ 30, got {}", self.u_max)));
        }
        if self.panels_phi < 16 || self.panels_phi % 2 != 0 {
            return Err(BarashError::InvalidSpec(format!(
                "panels_phi must be even and ≥ 16, got {}",
                self.panels_phi
            )));
        }
        if self.max_matsubara == 0 {
            return Err(BarashError::InvalidSpec("max_matsubara must be positive".into()));
        }
        if !(self.term_stop_ratio > 0.0) {
            return Err(BarashError::InvalidSpec(format!(
                "term_stop_ratio must be > 0, got {}",
                self.term_stop_ratio
            )));
        }
        Ok(())
    }
}

/// One evaluation point of Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub theta: f64,
    pub distance: f64,
}

/// A value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Free energy per unit area, J/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy {
    pub value: f64,
    pub error_estimate: f64,
    /// Number of Matsubara terms summed (n = 0..terms).
    pub terms: usize,
}

/// Per-probe results of a truncated Matsubara sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSums {
    /// Sums on the accepted (finest) grids.
    pub values: Vec<f64>,
    /// Same sums on the next-coarser grids.
    pub coarse: Vec<f64>,
    /// Σ|term| for each probe (rounding scale).
    pub magnitude: Vec<f64>,
    /// Estimated truncation error of the first probe.
    pub truncation: f64,
    pub terms: usize,
}

/// Per-term values for every probe, fine and coarse.
#[derive(Debug, Clone)]
struct TermValues {
    fine: Vec<f64>,
    coarse: Vec<f64>,
}

struct TermIntegrator<'a> {
    scenario: &'a Scenario,
    spec: &'a QuadratureSpec,
    probes: &'a [Probe],
    grid_distance: f64,
    rule: GaussLegendre,
    /// (sin θ, cos θ) per probe
    trig: Vec<(f64, f64)>,
}

impl<'a> TermIntegrator<'a> {
    fn new(
        scenario: &'a Scenario,
        spec: &'a QuadratureSpec,
        probes: &'a [Probe],
        grid_distance: f64,
    ) -> Self {
        Self {
            scenario,
            spec,
            probes,
            grid_distance,
            rule: GaussLegendre::new(PANEL_ORDER),
            trig: probes.iter().map(|p| p.theta.sin_cos()).collect(),
        }
    }

    fn permittivities(&self, xi: f64) -> Permittivities {
        let s = self.scenario;
        let (eps1_par, eps1_perp) = s.plate1.epsilon_pair(xi);
        let (eps2_par, eps2_perp) = s.plate2.epsilon_pair(xi);
        let q = xi / C;
        Permittivities {
            eps1_par,
            eps1_perp,
            eps2_par,
            eps2_perp,
            eps3: s.medium.perpendicular.at(xi),
            q2: q * q,
        }
    }

    /// ∫ r dr ∫₀^{2π} dφ ln(D/D∞) for every probe at refinement `level`.
    fn integrate_level(&self, perm: &Permittivities, level: u32, out: &mut [f64]) {
        let d0 = self.grid_distance;
        let u0 = 2.0 * d0 * perm.q2.sqrt() * perm.eps3.sqrt();
        let mut breaks = vec![u0];
        // a plate or axis with ε below ε₃ puts a square-root branch point
        // just under u₀, a fixed fraction of u₀ away: grade towards it
        if u0 >= GRADE_FLOOR {
            let mut w = u0 / 4.0;
            while w < U_BREAKS[1] {
                breaks.push(u0 + w);
                w *= 2.0;
            }
        }
        breaks.extend(U_BREAKS[1..].iter().map(|b| u0 + b));
        breaks.push(u0 + self.spec.u_max);
        let u_nodes = self.rule.composite_nodes(&breaks, 1 << level);
        let phi_nodes = self
            .rule
            .composite_nodes(&[0.0, PI], (self.spec.panels_phi / 2) << level);

        out.iter_mut().for_each(|v| *v = 0.0);
        let ratios: Vec<f64> = self.probes.iter().map(|p| p.distance / d0).collect();
        let mut row = vec![0.0; self.probes.len()];
        for &(u, wu) in &u_nodes {
            let rho3 = u / (2.0 * d0);
            let r2 = (rho3 * rho3 - perm.q2 * perm.eps3).max(0.0);
            let decays: Vec<f64> = ratios.iter().map(|k| (-u * k).exp()).collect();
            row.iter_mut().for_each(|v| *v = 0.0);
            for &(phi, wp) in &phi_nodes {
                let node = NodeCommon::new(r2, phi, perm);
                let mut cached: Option<(f64, kernel::DPolynomial)> = None;
                for (j, probe) in self.probes.iter().enumerate() {
                    let poly = match cached {
                        Some((t, poly)) if t == probe.theta => poly,
                        _ => {
                            let (s, c) = self.trig[j];
                            let poly = node.polynomial(s, c, perm);
                            cached = Some((probe.theta, poly));
                            poly
                        }
                    };
                    row[j] += wp * poly.log_ratio(decays[j]);
                }
            }
            // r dr = u du / (4 d₀²); the φ-integral over [0, π) is doubled.
            let jac = wu * u / (4.0 * d0 * d0) * 2.0;
            for (o, v) in out.iter_mut().zip(&row) {
                *o += jac * v;
            }
        }
    }

    /// Weighted Matsubara term `n` for every probe, refined until the first
    /// probe meets `rel_tol`.
    fn term(&self, n: usize) -> Result<TermValues, BarashError> {
        let t = self.scenario.temperature;
        let xi = n as f64 * matsubara_spacing(t);
        let perm = self.permittivities(xi);
        let weight = if n == 0 { 0.5 } else { 1.0 } * K_B * t / (4.0 * PI * PI);
        let m = self.probes.len();

        let mut coarse = vec![0.0; m];
        let mut fine = vec![0.0; m];
        self.integrate_level(&perm, 0, &mut coarse);
        let mut achieved = f64::INFINITY;
        for level in 1..=MAX_REFINEMENTS {
            self.integrate_level(&perm, level, &mut fine);
            let change = (fine[0] - coarse[0]).abs();
            achieved = if fine[0] != 0.0 { change / fine[0].abs() } else { change };
            if change <= self.spec.rel_tol * fine[0].abs() || change == 0.0 {
                return Ok(TermValues {
                    fine: fine.iter().map(|v| v * weight).collect(),
                    coarse: coarse.iter().map(|v| v * weight).collect(),
                });
            }
            std::mem::swap(&mut coarse, &mut fine);
        }
        Err(BarashError::NotConverged {
            n,
            refinements: MAX_REFINEMENTS,
            achieved,
            requested: self.spec.rel_tol,
        })
    }
}

fn compute_terms(integrator: &TermIntegrator<'_>, ns: std::ops::Range<usize>) -> Vec<Result<TermValues, BarashError>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ns.into_par_iter().map(|n| integrator.term(n)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ns.map(|n| integrator.term(n)).collect()
    }
}

fn chunk_size() -> usize {
    #[cfg(feature = "parallel")]
    {
        (2 * rayon::current_num_threads()).max(4)
    }
    #[cfg(not(feature = "parallel"))]
    {
        4
    }
}

/// Sums Matsubara terms for several probes on shared grids whose radial
/// scale is set by `grid_distance`. Truncation follows the first probe.
///
/// Terms are computed in ordered chunks (concurrently when the `parallel`
/// feature is on) and reduced in index order, so the result does not depend
/// on scheduling.
pub fn matsubara_sum(
    scenario: &Scenario,
    probes: &[Probe],
    grid_distance: f64,
    spec: &QuadratureSpec,
) -> Result<ProbeSums, BarashError> {
    scenario.validate()?;
    spec.validate()?;
    if probes.is_empty() {
        return Err(BarashError::InvalidSpec("at least one probe is required".into()));
    }
    for p in probes {
        if !(p.distance > 0.0 && p.distance.is_finite() && p.theta.is_finite()) {
            return Err(BarashError::Scenario(ScenarioError(format!(
                "probe needs finite θ and d > 0, got θ={} d={}",
                p.theta, p.distance
            ))));
        }
    }
    let integrator = TermIntegrator::new(scenario, spec, probes, grid_distance);
    let m = probes.len();
    let mut values = vec![0.0; m];
    let mut coarse = vec![0.0; m];
    let mut magnitude = vec![0.0; m];
    let mut quiet = 0usize;
    let mut last_ratio = f64::INFINITY;
    let mut tail: Vec<f64> = Vec::new();
    let mut next = 0usize;
    let chunk = chunk_size();
    while next < spec.max_matsubara {
        let end = (next + chunk).min(spec.max_matsubara);
        for (offset, term) in compute_terms(&integrator, next..end).into_iter().enumerate() {
            let term = term?;
            let n = next + offset;
            for j in 0..m {
                values[j] += term.fine[j];
                coarse[j] += term.coarse[j];
                magnitude[j] += term.fine[j].abs();
            }
            let t0 = term.fine[0].abs();
            last_ratio = if values[0] != 0.0 { t0 / values[0].abs() } else if t0 == 0.0 { 0.0 } else { f64::INFINITY };
            tail.push(t0);
            quiet = if last_ratio < spec.term_stop_ratio || (t0 == 0.0 && values[0] == 0.0) {
                quiet + 1
            } else {
                0
            };
            if quiet >= 3 && n >= 3 {
                // geometric tail bound from the last few terms
                let k = tail.len();
                let truncation = tail[k - 3..].iter().sum::<f64>();
                return Ok(ProbeSums {
                    values,
                    coarse,
                    magnitude,
                    truncation,
                    terms: n + 1,
                });
            }
        }
        next = end;
    }
    Err(BarashError::TruncationNotReached {
        max_matsubara: spec.max_matsubara,
        last_ratio,
    })
}

/// One weighted summand of Ω (J/m²), including the ½ weight for n = 0.
pub fn matsubara_term(
    n: usize,
    theta: f64,
    distance: f64,
    scenario: &Scenario,
    spec: &QuadratureSpec,
) -> Result<Estimate, BarashError> {
    scenario.validate()?;
    spec.validate()?;
    let probes = [Probe { theta, distance }];
    let integrator = TermIntegrator::new(scenario, spec, &probes, distance);
    let t = integrator.term(n)?;
    Ok(Estimate {
        value: t.fine[0],
        error: (t.fine[0] - t.coarse[0]).abs(),
    })
}

/// Ω(θ, d) in J/m², normalized so that Ω → 0 as d → ∞.
pub fn free_energy(
    theta: f64,
    distance: f64,
    scenario: &Scenario,
    spec: &QuadratureSpec,
) -> Result<FreeEnergy, BarashError> {
    let sums = matsubara_sum(scenario, &[Probe { theta, distance }], distance, spec)?;
    Ok(FreeEnergy {
        value: sums.values[0],
        error_estimate: (sums.values[0] - sums.coarse[0]).abs() + sums.truncation,
        terms: sums.terms,
    })
}
