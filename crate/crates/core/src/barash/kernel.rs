//! Pointwise log-integrand of the free energy for two uniaxial plates with
//! in-plane optical axes across an isotropic gap.
//!
//! Plate 1 has its axis along x, plate 2 along (cos θ, −sin θ). For an
//! in-plane wave vector of modulus `r` at azimuth φ the integrand is
//! `ln(D(d) / D(∞))`, where `D·γ` is a quadratic polynomial in
//! `e = exp(−2ρ₃d)`. Keeping the polynomial form lets `ln1p` resolve the
//! integrand accurately even when it is far below machine epsilon relative
//! to one, and lets several separations share one evaluation.

use crate::constants::C;
use crate::materials::UniaxialMaterial;
use crate::scenario::Scenario;

/// Permittivities of the three media at one Matsubara frequency, plus the
/// frequency itself and the geometry of the evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelContext {
    pub xi: f64,
    pub eps1_par: f64,
    pub eps1_perp: f64,
    pub eps2_par: f64,
    pub eps2_perp: f64,
    pub eps3: f64,
    pub distance: f64,
    pub theta: f64,
    pub temperature: f64,
}

impl KernelContext {
    pub fn from_materials(
        xi: f64,
        plate1: &UniaxialMaterial,
        plate2: &UniaxialMaterial,
        medium: &UniaxialMaterial,
        distance: f64,
        theta: f64,
        temperature: f64,
    ) -> Self {
        let (eps1_par, eps1_perp) = plate1.epsilon_pair(xi);
        let (eps2_par, eps2_perp) = plate2.epsilon_pair(xi);
        Self {
            xi,
            eps1_par,
            eps1_perp,
            eps2_par,
            eps2_perp,
            eps3: medium.perpendicular.at(xi),
            distance,
            theta,
            temperature,
        }
    }

    pub fn from_scenario(xi: f64, scenario: &Scenario) -> Self {
        Self::from_materials(
            xi,
            &scenario.plate1,
            &scenario.plate2,
            &scenario.medium,
            scenario.distance,
            scenario.theta,
            scenario.temperature,
        )
    }

    /// (ξ/c)², in 1/m².
    #[inline]
    pub fn q2(&self) -> f64 {
        let q = self.xi / C;
        q * q
    }
}

/// Decay constants (1/m) of the ordinary (ρ₁, ρ₂, ρ₃) and extraordinary
/// (ρ̃₁, ρ̃₂) waves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSet {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho1_tilde: f64,
    pub rho2_tilde: f64,
}

pub fn rho_factors(r: f64, phi: f64, ctx: &KernelContext) -> RhoSet {
    debug_assert!(r >= 0.0);
    let q2 = ctx.q2();
    let r2 = r * r;
    let c1 = r * phi.cos();
    let c2 = r * (phi + ctx.theta).cos();
    RhoSet {
        rho1: (r2 + q2 * ctx.eps1_perp).sqrt(),
        rho2: (r2 + q2 * ctx.eps2_perp).sqrt(),
        rho3: (r2 + q2 * ctx.eps3).sqrt(),
        rho1_tilde: (r2 + (ctx.eps1_par / ctx.eps1_perp - 1.0) * c1 * c1 + q2 * ctx.eps1_par)
            .sqrt(),
        rho2_tilde: (r2 + (ctx.eps2_par / ctx.eps2_perp - 1.0) * c2 * c2 + q2 * ctx.eps2_par)
            .sqrt(),
    }
}

/// `ln(D(d)/D(∞))` at in-plane wave number `r` (1/m) and azimuth `phi`.
pub fn log_integrand(r: f64, phi: f64, ctx: &KernelContext) -> f64 {
    let perm = Permittivities::from(ctx);
    let node = NodeCommon::new(r * r, phi, &perm);
    let poly = node.polynomial(ctx.theta.sin(), ctx.theta.cos(), &perm);
    poly.log_ratio((-2.0 * node.rho3 * ctx.distance).exp())
}

/// Frequency-dependent inputs to the kernel.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Permittivities {
    pub eps1_par: f64,
    pub eps1_perp: f64,
    pub eps2_par: f64,
    pub eps2_perp: f64,
    pub eps3: f64,
    pub q2: f64,
}

impl From<&KernelContext> for Permittivities {
    fn from(ctx: &KernelContext) -> Self {
        Self {
            eps1_par: ctx.eps1_par,
            eps1_perp: ctx.eps1_perp,
            eps2_par: ctx.eps2_par,
            eps2_perp: ctx.eps2_perp,
            eps3: ctx.eps3,
            q2: ctx.q2(),
        }
    }
}

/// Quantities at one (r, φ) node that do not depend on θ or d.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeCommon {
    r2: f64,
    sin_phi: f64,
    cos_phi: f64,
    rho1: f64,
    pub rho3: f64,
    /// (ρ̃₁ − ρ₁) ε₁⊥ / (ρ₁² − r² sin²φ), in the cancelled form
    /// (ε₁∥ − ε₁⊥)/(ρ̃₁ + ρ₁) which stays finite where ρ₁² = r² sin²φ.
    x1: f64,
    /// r² sin²φ
    s1: f64,
}

impl NodeCommon {
    #[inline]
    pub fn new(r2: f64, phi: f64, p: &Permittivities) -> Self {
        let (sin_phi, cos_phi) = phi.sin_cos();
        let rho1 = (r2 + p.q2 * p.eps1_perp).sqrt();
        let rho3 = (r2 + p.q2 * p.eps3).sqrt();
        let c2 = r2 * cos_phi * cos_phi;
        let rho1t = (r2 + (p.eps1_par / p.eps1_perp - 1.0) * c2 + p.q2 * p.eps1_par).sqrt();
        let denom = rho1t + rho1;
        let x1 = if denom > 0.0 {
            (p.eps1_par - p.eps1_perp) / denom
        } else {
            0.0
        };
        Self {
            r2,
            sin_phi,
            cos_phi,
            rho1,
            rho3,
            x1,
            s1: r2 * sin_phi * sin_phi,
        }
    }

    /// Coefficients of `D·γ = k0 + k1 e + k2 e²` for plate 2 rotated by θ.
    #[inline]
    pub fn polynomial(&self, sin_t: f64, cos_t: f64, p: &Permittivities) -> DPolynomial {
        let Self {
            r2,
            sin_phi,
            cos_phi,
            rho1,
            rho3,
            x1,
            s1,
        } = *self;
        let (e1, e2, e3) = (p.eps1_perp, p.eps2_perp, p.eps3);

        let sin_sum = sin_phi * cos_t + cos_phi * sin_t;
        let cos_sum = cos_phi * cos_t - sin_phi * sin_t;
        let rho2 = (r2 + p.q2 * e2).sqrt();
        let c2 = r2 * cos_sum * cos_sum;
        let s2 = r2 * sin_sum * sin_sum;
        let rho2t = (r2 + (p.eps2_par / e2 - 1.0) * c2 + p.q2 * p.eps2_par).sqrt();
        let denom2 = rho2t + rho2;
        let x2 = if denom2 > 0.0 {
            (p.eps2_par - e2) / denom2
        } else {
            0.0
        };

        let r32 = rho3 * rho3;
        let big_p = (rho1 + rho3) * (rho2 + rho3);
        let big_q = (rho1 - rho3) * (rho2 - rho3);
        let a1 = e3 * rho1 + e1 * rho3;
        let b1 = e3 * rho1 - e1 * rho3;
        let a2 = e3 * rho2 + e2 * rho3;
        let b2 = e3 * rho2 - e2 * rho3;
        let m1 = s1 - rho1 * rho3;
        let p1 = s1 + rho1 * rho3;
        let g1 = a1 - x1 * m1;
        let h1 = b1 - x1 * p1;

        let a0 = big_p * a2 * g1;
        let a_1 = -(big_p * b1 * b2 + big_q * a1 * a2)
            - 2.0
                * x1
                * (e2 - e3)
                * (s1 * (r2 * rho1 - rho2 * r32) + rho1 * r32 * (r2 - 2.0 * s1 + rho1 * rho2));
        let a_2 = big_q * b2 * h1;

        let b0 = big_p * g1;
        let b_1 = 2.0 * (e1 - e3) * (r2 * rho2 - rho1 * r32 - 2.0 * rho2 * r32)
            + 2.0 * x1 * (s1 * (rho1 * rho2 + r32) - rho1 * rho1 * r32 + rho1 * rho2 * r32);
        let b_2 = big_q * h1;

        let c0 = -rho2 * rho3 * big_p * g1;
        let c_1 = 2.0
            * rho2
            * r32
            * ((e1 - e3) * (r2 + rho1 * rho2)
                + x1 * (rho1 * rho1 * rho2 + rho1 * r32 + s1 * (rho1 - rho2)));
        let c_2 = rho2 * rho3 * big_q * h1;

        let e_1 = 4.0 * rho1 * rho2 * r32 * x1;
        let g = 2.0 * r2 * sin_phi * cos_t * sin_sum + r32 * sin_t * sin_t;

        DPolynomial {
            k0: a0 - x2 * (b0 * s2 + c0),
            k1: a_1 - x2 * (b_1 * s2 - e_1 * g + c_1),
            k2: a_2 - x2 * (b_2 * s2 + c_2),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DPolynomial {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

impl DPolynomial {
    /// ln(D(e)/D(0)) for e = exp(−2ρ₃d).
    #[inline]
    pub fn log_ratio(&self, e: f64) -> f64 {
        ((self.k1 + self.k2 * e) * e / self.k0).ln_1p()
    }
}
