//! The two benchmark configurations, their nondimensionalization and the
//! coefficient fields used by the solver.
//!
//! Dimensional inputs use kilometres for lengths, mm/yr for velocities and SI
//! units for viscosity (Pa·s) and stress (Pa). The solver sees quantities
//! scaled by `H₀`, `U₀`, `η₀` and the stress scale `η₀U₀/H₀`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fem::{DirichletSet, MixedSpace};
use crate::mesh::Side;
use crate::rheology::{Law, RheologyError, RheologyParams, ScalarField};
use crate::Point;

pub const SECONDS_PER_YEAR: f64 = 365.25 * 24.0 * 3600.0;

pub fn mm_per_year_to_m_per_s(v: f64) -> f64 {
    v * 1e-3 / SECONDS_PER_YEAR
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Two-layer compression with a weak notch on the layer interface.
    Example1,
    /// Weak circular inclusion in a strong matrix.
    Example2,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Example1 => "example1",
            ProblemKind::Example2 => "example2",
        })
    }
}

/// Characteristic length, velocity and viscosity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scales {
    /// metres
    pub length: f64,
    /// m/s
    pub velocity: f64,
    /// Pa·s
    pub viscosity: f64,
}

impl Scales {
    /// `η₀ U₀ / H₀` in Pa.
    pub fn stress(&self) -> f64 {
        self.viscosity * self.velocity / self.length
    }
}

/// Dimensional problem description. Every field can be overridden from a
/// configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub lx_km: f64,
    pub ly_km: f64,
    /// Strong material: upper layer (example 1) or matrix (example 2), Pa·s.
    pub mu1: f64,
    /// Weak material: lower layer and notch, or inclusion, Pa·s.
    pub mu2: f64,
    /// Yield stress at the surface, Pa.
    pub tau_y: f64,
    /// Viscosity floor used with the ideal law, Pa·s.
    pub mu_min: f64,
    pub u0_mm_per_yr: f64,
    pub h0_km: f64,
    pub u_scale_mm_per_yr: f64,
    pub eta0: f64,
    /// Height of the layer interface above the bottom (example 1).
    pub interface_y_km: f64,
    pub notch_center_x_km: f64,
    pub notch_width_km: f64,
    pub notch_height_km: f64,
    pub inclusion_center_km: [f64; 2],
    pub inclusion_radius_km: f64,
    /// Exponent `s` in `μ₂ + (μ₁ − μ₂)·exp(−s d²)` with `d` the
    /// nondimensional distance to the strong material; `None` keeps sharp
    /// interfaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface_sharpness: Option<f64>,
    pub depth_dependent_yield: bool,
    pub friction_angle_deg: f64,
    /// kg/m³
    pub density: f64,
    /// m/s²
    pub gravity: f64,
    /// Measure the lithostatic term from the top surface (`Ly − y`) rather
    /// than from the bottom (`y`).
    pub depth_from_top: bool,
}

impl ProblemSpec {
    pub fn example1() -> Self {
        Self {
            kind: ProblemKind::Example1,
            lx_km: 120.0,
            ly_km: 30.0,
            mu1: 1e24,
            mu2: 1e21,
            tau_y: 1e8,
            mu_min: 1e19,
            u0_mm_per_yr: 2.5,
            h0_km: 30.0,
            u_scale_mm_per_yr: 2.5,
            eta0: 1e22,
            interface_y_km: 7.5,
            notch_center_x_km: 60.0,
            notch_width_km: 4.0,
            notch_height_km: 2.0,
            inclusion_center_km: [2.0, 1.0],
            inclusion_radius_km: 0.1,
            interface_sharpness: None,
            depth_dependent_yield: false,
            friction_angle_deg: 30.0,
            density: 2700.0,
            gravity: 9.81,
            depth_from_top: true,
        }
    }

    pub fn example2() -> Self {
        Self {
            kind: ProblemKind::Example2,
            lx_km: 4.0,
            ly_km: 2.0,
            mu1: 1e24,
            mu2: 1e17,
            tau_y: 3e7,
            mu_min: 1e17,
            u0_mm_per_yr: 1.0,
            h0_km: 1.0,
            u_scale_mm_per_yr: 1.0,
            eta0: 1e22,
            ..Self::example1()
        }
    }

    pub fn defaults(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Example1 => Self::example1(),
            ProblemKind::Example2 => Self::example2(),
        }
    }

    pub fn scales(&self) -> Scales {
        Scales {
            length: self.h0_km * 1e3,
            velocity: mm_per_year_to_m_per_s(self.u_scale_mm_per_yr),
            viscosity: self.eta0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("lx_km", self.lx_km),
            ("ly_km", self.ly_km),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("tau_y", self.tau_y),
            ("h0_km", self.h0_km),
            ("u_scale_mm_per_yr", self.u_scale_mm_per_yr),
            ("eta0", self.eta0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.mu_min >= 0.0) {
            return Err(format!("mu_min must be nonnegative, got {}", self.mu_min));
        }
        if self.depth_dependent_yield && !(0.0..90.0).contains(&self.friction_angle_deg) {
            return Err(format!("friction_angle_deg must lie in [0, 90), got {}", self.friction_angle_deg));
        }
        if let Some(s) = self.interface_sharpness {
            if !(s >= 0.0) {
                return Err(format!("interface_sharpness must be nonnegative, got {s}"));
            }
        }
        Ok(())
    }

    /// Scaled problem used by the solver.
    pub fn nondimensionalize(&self) -> Result<ScaledProblem, String> {
        self.validate()?;
        let sc = self.scales();
        let km = |v: f64| v * 1e3 / sc.length;
        let visc = |v: f64| v / sc.viscosity;
        let (lx, ly) = (km(self.lx_km), km(self.ly_km));
        let (mu1, mu2) = (visc(self.mu1), visc(self.mu2));
        let geometry = match self.kind {
            ProblemKind::Example1 => {
                let half = 0.5 * km(self.notch_width_km);
                let xc = km(self.notch_center_x_km);
                let yi = km(self.interface_y_km);
                Geometry::Notch { interface_y: yi, x0: xc - half, x1: xc + half, top: yi + km(self.notch_height_km) }
            }
            ProblemKind::Example2 => Geometry::Inclusion {
                center: [km(self.inclusion_center_km[0]), km(self.inclusion_center_km[1])],
                radius: km(self.inclusion_radius_km),
            },
        };
        let g = geometry;
        let distance = move |p: Point| g.distance_to_strong(p);
        let mu_r = match self.interface_sharpness {
            None => ScalarField::new(move |p| if distance(p) <= 0.0 { mu1 } else { mu2 }),
            Some(s) => smooth_interface_viscosity(mu1, mu2, distance, s),
        };
        let tau_y = if self.depth_dependent_yield {
            let stress = sc.stress();
            let (tau0, rho, grav) = (self.tau_y, self.density, self.gravity);
            let theta = self.friction_angle_deg.to_radians();
            let length = sc.length;
            let from_top = self.depth_from_top;
            ScalarField::new(move |p: Point| {
                let depth = if from_top { (ly - p[1]) * length } else { p[1] * length };
                depth_dependent_yield(tau0, rho, grav, theta, depth) / stress
            })
        } else {
            ScalarField::constant(self.tau_y / sc.stress())
        };
        let u0 = mm_per_year_to_m_per_s(self.u0_mm_per_yr) / sc.velocity;
        let normal_velocity = match self.kind {
            ProblemKind::Example1 => vec![(Side::Left, -u0), (Side::Right, -u0), (Side::Bottom, 0.0)],
            ProblemKind::Example2 => vec![(Side::Left, -u0), (Side::Right, -u0), (Side::Bottom, 0.5 * u0)],
        };
        Ok(ScaledProblem {
            kind: self.kind,
            lx,
            ly,
            u0,
            mu_min: visc(self.mu_min),
            mu_r,
            tau_y,
            geometry,
            normal_velocity,
            scales: sc,
        })
    }
}

/// `τ_y0 cos θ + ρ g depth sin θ` (Pa, with `depth` in metres and `θ` in
/// radians).
pub fn depth_dependent_yield(tau_y0: f64, rho: f64, g: f64, theta: f64, depth: f64) -> f64 {
    tau_y0 * theta.cos() + rho * g * depth * theta.sin()
}

/// `μ_outside + (μ_inside − μ_outside)·exp(−s d²)` for `d > 0`, `μ_inside`
/// for `d ≤ 0`.
pub fn smooth_interface_viscosity(
    mu_inside: f64,
    mu_outside: f64,
    distance: impl Fn(Point) -> f64 + Send + Sync + 'static,
    sharpness: f64,
) -> ScalarField {
    ScalarField::new(move |p| blend(mu_inside, mu_outside, distance(p), sharpness))
}

#[inline]
pub fn blend(mu_inside: f64, mu_outside: f64, d: f64, sharpness: f64) -> f64 {
    if d <= 0.0 {
        mu_inside
    } else {
        mu_outside + (mu_inside - mu_outside) * (-sharpness * d * d).exp()
    }
}

/// Material layout in nondimensional coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    /// Upper layer above `interface_y`, with a weak rectangle
    /// `[x0, x1] × [interface_y, top]` cut into its base.
    Notch { interface_y: f64, x0: f64, x1: f64, top: f64 },
    Inclusion { center: Point, radius: f64 },
}

impl Geometry {
    /// Distance to the strong material; zero inside it.
    pub fn distance_to_strong(&self, p: Point) -> f64 {
        let [x, y] = p;
        match *self {
            Geometry::Notch { interface_y, x0, x1, top } => {
                let in_column = x > x0 && x < x1;
                if y >= interface_y && !(in_column && y < top) {
                    0.0
                } else if y >= interface_y {
                    (x - x0).min(x1 - x).min(top - y)
                } else if in_column {
                    let dx = (x - x0).min(x1 - x);
                    dx.hypot(interface_y - y).min(top - y)
                } else {
                    interface_y - y
                }
            }
            Geometry::Inclusion { center, radius } => {
                let r = (x - center[0]).hypot(y - center[1]);
                (radius - r).max(0.0)
            }
        }
    }

    /// Material id: 0 strong, 1 weak layer or inclusion, 2 notch.
    pub fn region(&self, p: Point) -> u32 {
        let [x, y] = p;
        match *self {
            Geometry::Notch { interface_y, x0, x1, top } => {
                if y < interface_y {
                    1
                } else if x > x0 && x < x1 && y < top {
                    2
                } else {
                    0
                }
            }
            Geometry::Inclusion { .. } => {
                if self.distance_to_strong(p) > 0.0 {
                    1
                } else {
                    0
                }
            }
        }
    }
}

/// Nondimensional problem ready for discretisation.
#[derive(Clone, Debug)]
pub struct ScaledProblem {
    pub kind: ProblemKind,
    pub lx: f64,
    pub ly: f64,
    pub u0: f64,
    pub mu_min: f64,
    pub mu_r: ScalarField,
    pub tau_y: ScalarField,
    pub geometry: Geometry,
    /// Prescribed `u · n` per Dirichlet side.
    pub normal_velocity: Vec<(Side, f64)>,
    pub scales: Scales,
}

impl ScaledProblem {
    /// Rheology for `law`; the composite law is used without a floor.
    pub fn rheology(&self, law: Law) -> Result<RheologyParams, RheologyError> {
        let mu_min = match law {
            Law::Ideal => self.mu_min,
            Law::Composite => 0.0,
        };
        RheologyParams::new(law, self.tau_y.clone(), self.mu_r.clone(), mu_min)
    }

    pub fn boundary_conditions(&self, space: &MixedSpace) -> DirichletSet {
        let mut bc = DirichletSet::new(space);
        for &(side, v) in &self.normal_velocity {
            bc.add_normal(space, side, v);
        }
        bc
    }

    /// Point toward which meshes are graded.
    pub fn focus(&self) -> Point {
        match self.geometry {
            Geometry::Notch { interface_y, x0, x1, top } => [0.5 * (x0 + x1), 0.5 * (interface_y + top)],
            Geometry::Inclusion { center, .. } => center,
        }
    }

    pub fn region_fn(&self) -> Arc<dyn Fn(Point) -> u32 + Send + Sync> {
        let g = self.geometry;
        Arc::new(move |p| g.region(p))
    }
}
