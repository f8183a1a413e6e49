//! Pointwise constitutive kernels for von Mises viscoplasticity.
//!
//! Two laws are supported. The ideal law caps the reference viscosity at the
//! yield viscosity with a pointwise `min` and adds a small floor viscosity;
//! the composite law is the scaled harmonic mean of the two.
//!
//! All kernels take the second invariant `ε_II = sqrt(ε̇:ε̇/2)` of the strain
//! rate. Wherever `ε_II` sits in a denominator it is replaced by
//! `max(ε_II, eii_floor)`.
//!
//! The stress-velocity tangent writes its deflation with the denominator
//! `max(τ_y, τ_II)`. This is the same as rescaling `τ ← τ / max(1, τ_II/τ_y)`
//! and dividing by `τ_y`, which is the form used by [`StressUpdate`].

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::tensor::SymTensor;
use crate::Point;

/// Default regularisation of `ε_II` in denominators (nondimensional).
pub const DEFAULT_EII_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Ideal,
    Composite,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::Ideal => write!(f, "ideal"),
            Law::Composite => write!(f, "composite"),
        }
    }
}

/// A scalar coefficient field evaluated at quadrature points.
#[derive(Clone)]
pub struct ScalarField(Arc<dyn Fn(Point) -> f64 + Send + Sync>);

impl ScalarField {
    pub fn new(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value)
    }

    #[inline]
    pub fn eval(&self, x: Point) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RheologyError {
    #[error("the composite law requires mu_min = 0, got {0}")]
    CompositeWithFloor(f64),
    #[error("mu_min must be nonnegative, got {0}")]
    NegativeFloor(f64),
    #[error("eii_floor must be positive, got {0}")]
    BadStrainRateFloor(f64),
}

/// Rheology parameters with position-dependent yield stress and reference
/// viscosity.
#[derive(Clone, Debug)]
pub struct RheologyParams {
    pub law: Law,
    pub tau_y: ScalarField,
    pub mu_r: ScalarField,
    pub mu_min: f64,
    pub eii_floor: f64,
}

impl RheologyParams {
    pub fn new(
        law: Law,
        tau_y: ScalarField,
        mu_r: ScalarField,
        mu_min: f64,
    ) -> Result<Self, RheologyError> {
        if mu_min < 0.0 {
            return Err(RheologyError::NegativeFloor(mu_min));
        }
        if law == Law::Composite && mu_min != 0.0 {
            return Err(RheologyError::CompositeWithFloor(mu_min));
        }
        Ok(Self { law, tau_y, mu_r, mu_min, eii_floor: DEFAULT_EII_FLOOR })
    }

    pub fn constant(law: Law, tau_y: f64, mu_r: f64, mu_min: f64) -> Result<Self, RheologyError> {
        Self::new(law, ScalarField::constant(tau_y), ScalarField::constant(mu_r), mu_min)
    }

    pub fn with_eii_floor(mut self, floor: f64) -> Result<Self, RheologyError> {
        if !(floor > 0.0) {
            return Err(RheologyError::BadStrainRateFloor(floor));
        }
        self.eii_floor = floor;
        Ok(self)
    }

    /// Freeze the coefficient fields at `x`.
    #[inline]
    pub fn at(&self, x: Point) -> LocalRheology {
        LocalRheology {
            law: self.law,
            tau_y: self.tau_y.eval(x),
            mu_r: self.mu_r.eval(x),
            mu_min: self.mu_min,
            eii_floor: self.eii_floor,
        }
    }
}

/// Rheology parameters frozen at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalRheology {
    pub law: Law,
    pub tau_y: f64,
    pub mu_r: f64,
    pub mu_min: f64,
    pub eii_floor: f64,
}

/// 4th-order tangent acting on symmetric tensors:
///
/// `T v = floor_coeff·v + scalar_coeff·(v − deflation_scale·(a⊗b)_sym v)`
///
/// with `(a⊗b)_sym v = ½[(a:v) b + (b:v) a]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentTensor {
    /// `2 μ̲`; never deflated.
    pub floor_coeff: f64,
    /// `φ′(ε_II) / (2 ε_II)`, twice the yield-limited viscosity.
    pub scalar_coeff: f64,
    pub deflation_a: SymTensor,
    pub deflation_b: SymTensor,
    pub deflation_scale: f64,
}

impl TangentTensor {
    pub fn isotropic(floor_coeff: f64, scalar_coeff: f64) -> Self {
        Self {
            floor_coeff,
            scalar_coeff,
            deflation_a: SymTensor::ZERO,
            deflation_b: SymTensor::ZERO,
            deflation_scale: 0.0,
        }
    }

    #[inline]
    pub fn apply(&self, v: &SymTensor) -> SymTensor {
        let iso = self.floor_coeff + self.scalar_coeff;
        if self.deflation_scale == 0.0 {
            return iso * *v;
        }
        let av = self.deflation_a.ddot(v);
        let bv = self.deflation_b.ddot(v);
        let d = 0.5 * self.scalar_coeff * self.deflation_scale;
        iso * *v - (d * bv) * self.deflation_a - (d * av) * self.deflation_b
    }

    /// `w : T v`.
    #[inline]
    pub fn bilinear(&self, v: &SymTensor, w: &SymTensor) -> f64 {
        w.ddot(&self.apply(v))
    }

    /// Total isotropic multiplier `floor_coeff + scalar_coeff`.
    pub fn isotropic_part(&self) -> f64 {
        self.floor_coeff + self.scalar_coeff
    }
}

/// Ingredients of the stress update
/// `τ̃ = shift + coeff·ε̇(ũ) − deflation·(ε̇⊗τ)_sym ε̇(ũ)`,
/// where `shift = −τ + coeff·ε̇(u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressUpdate {
    pub coeff: f64,
    /// `(ε̇(u), τ)` with `τ` as stored (not rescaled).
    pub pair: (SymTensor, SymTensor),
    /// `ψ / (2 ε_II² max(1, τ_II/τ_y))`.
    pub deflation: f64,
    pub shift: SymTensor,
}

impl StressUpdate {
    #[inline]
    pub fn apply(&self, eps_update: &SymTensor) -> SymTensor {
        let (eps, tau) = &self.pair;
        let sym = 0.5 * eps.ddot(eps_update) * *tau + 0.5 * tau.ddot(eps_update) * *eps;
        self.shift + self.coeff * *eps_update - self.deflation * sym
    }
}

/// `ε_II = sqrt(½ ε̇:ε̇)`.
#[inline]
pub fn second_invariant(eps: &SymTensor) -> f64 {
    eps.second_invariant()
}

impl LocalRheology {
    #[inline]
    fn floored(&self, eii: f64) -> f64 {
        eii.max(self.eii_floor)
    }

    /// Ideal-law indicator of `2 μ_r σ > τ_y`.
    #[inline]
    pub fn is_yielding(&self, sigma: f64) -> bool {
        2.0 * self.mu_r * sigma > self.tau_y
    }

    /// Viscosity without the floor `μ̲`; `φ′(σ)/(4σ)`.
    #[inline]
    pub fn yield_limited_viscosity(&self, eii: f64) -> f64 {
        match self.law {
            Law::Ideal => (self.tau_y / (2.0 * self.floored(eii))).min(self.mu_r),
            Law::Composite => self.tau_y * self.mu_r / (2.0 * eii * self.mu_r + self.tau_y),
        }
    }

    /// Effective viscosity.
    #[inline]
    pub fn viscosity(&self, eii: f64) -> f64 {
        match self.law {
            Law::Ideal => self.mu_min + self.yield_limited_viscosity(eii),
            Law::Composite => self.yield_limited_viscosity(eii),
        }
    }

    /// Energy density `φ(σ)` (without the `2μ̲σ²` floor term).
    pub fn phi(&self, sigma: f64) -> f64 {
        let (ty, mr) = (self.tau_y, self.mu_r);
        match self.law {
            Law::Ideal => {
                if 2.0 * mr * sigma <= ty {
                    2.0 * mr * sigma * sigma + ty * ty / (2.0 * mr)
                } else {
                    2.0 * ty * sigma
                }
            }
            Law::Composite => 2.0 * ty * sigma - ty * ty / mr * (ty + 2.0 * mr * sigma).ln(),
        }
    }

    pub fn phi_prime(&self, sigma: f64) -> f64 {
        let (ty, mr) = (self.tau_y, self.mu_r);
        match self.law {
            Law::Ideal => 2.0 * (2.0 * mr * sigma).min(ty),
            Law::Composite => 4.0 * mr * ty * sigma / (2.0 * mr * sigma + ty),
        }
    }

    /// Second derivative; at the ideal kink `2μ_r σ = τ_y` this returns 0.
    pub fn phi_second(&self, sigma: f64) -> f64 {
        let (ty, mr) = (self.tau_y, self.mu_r);
        match self.law {
            Law::Ideal => {
                if 2.0 * mr * sigma < ty {
                    4.0 * mr
                } else {
                    0.0
                }
            }
            Law::Composite => {
                let d = 2.0 * mr * sigma + ty;
                4.0 * mr * ty * ty / (d * d)
            }
        }
    }

    /// Newton deflation factor `ψ = (φ′ − σφ″)/φ′`, in `[0, 1]`.
    pub fn psi(&self, eii: f64) -> f64 {
        match self.law {
            Law::Ideal => {
                if self.is_yielding(eii) {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Composite => {
                let s = 2.0 * self.mu_r * eii;
                s / (s + self.tau_y)
            }
        }
    }

    /// Constitutive stress `φ′(ε_II)/(2ε_II) ε̇`.
    pub fn stress(&self, eps: &SymTensor) -> SymTensor {
        (2.0 * self.yield_limited_viscosity(eps.second_invariant())) * *eps
    }

    /// Picard operator `(2μ̲ + φ′/(2ε_II)) 𝕀`.
    pub fn picard_tangent(&self, eii: f64) -> TangentTensor {
        TangentTensor::isotropic(2.0 * self.mu_min, 2.0 * self.yield_limited_viscosity(eii))
    }

    /// Standard Newton tangent with the rank-one `ε̇⊗ε̇ / (2ε_II²)` deflation.
    pub fn newton_tangent(&self, eps: &SymTensor) -> TangentTensor {
        let eii = eps.second_invariant();
        let mut t = self.picard_tangent(eii);
        let scale = self.psi(eii);
        if scale > 0.0 {
            let a = (1.0 / (SQRT_2 * self.floored(eii))) * *eps;
            t.deflation_a = a;
            t.deflation_b = a;
            t.deflation_scale = scale;
        }
        t
    }

    /// Stress-velocity Newton tangent with the symmetrised deflation
    /// `(ε̇⊗τ)_sym / (2 ε_II max(τ_y, τ_II))`.
    pub fn svn_tangent(&self, eps: &SymTensor, tau: &SymTensor) -> TangentTensor {
        let eii = eps.second_invariant();
        let mut t = self.picard_tangent(eii);
        let scale = match self.law {
            Law::Ideal => {
                if self.is_yielding(eii) {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Composite => 1.0,
        };
        if scale > 0.0 {
            let tau_ii = tau.second_invariant();
            t.deflation_a = (1.0 / (SQRT_2 * self.floored(eii))) * *eps;
            t.deflation_b = (1.0 / (SQRT_2 * self.tau_y.max(tau_ii))) * *tau;
            t.deflation_scale = scale;
        }
        t
    }

    /// The three ingredients of the stress update for the current state.
    pub fn stress_update(&self, eps: &SymTensor, tau: &SymTensor) -> StressUpdate {
        let eii = eps.second_invariant();
        let coeff = 2.0 * self.yield_limited_viscosity(eii);
        let rescale = (tau.second_invariant() / self.tau_y).max(1.0);
        let e = self.floored(eii);
        let deflation = self.psi(eii) / (2.0 * e * e * rescale);
        StressUpdate { coeff, pair: (*eps, *tau), deflation, shift: coeff * *eps - *tau }
    }
}

/// Pointwise viscosity at `x`.
pub fn viscosity(params: &RheologyParams, eii: f64, x: Point) -> f64 {
    params.at(x).viscosity(eii)
}

pub fn picard_tangent(params: &RheologyParams, eii: f64, x: Point) -> TangentTensor {
    params.at(x).picard_tangent(eii)
}

pub fn newton_tangent(params: &RheologyParams, eps: &SymTensor, x: Point) -> TangentTensor {
    params.at(x).newton_tangent(eps)
}

pub fn svn_tangent(params: &RheologyParams, eps: &SymTensor, tau: &SymTensor, x: Point) -> TangentTensor {
    params.at(x).svn_tangent(eps, tau)
}

pub fn stress_update_coefficients(
    params: &RheologyParams,
    eps: &SymTensor,
    tau: &SymTensor,
    x: Point,
) -> StressUpdate {
    params.at(x).stress_update(eps, tau)
}
