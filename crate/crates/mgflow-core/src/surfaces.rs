//! The four target geometries and their magnetic-field endomorphisms.
//!
//! Each surface supplies the pieces the discrete flow needs:
//!
//! * `project_tangent` — the metric-orthogonal projection onto the tangent
//!   space (identity for the flat intrinsic models);
//! * `tension_correction` — the term added to the raw second difference of a
//!   curve so that, after projection, it approximates the curve's tension
//!   field: `+|v|² p` on the sphere and `+⟨v,v⟩_M p` on the hyperboloid,
//!   where ⟨·,·⟩_M is the Minkowski form (these make the result tangential,
//!   since a constrained curve satisfies ⟨γ″, γ⟩ = −⟨γ′, γ′⟩ in the ambient
//!   product defining the constraint);
//! * `lorentz` — the skew endomorphism Z with ⟨η, Z(ξ)⟩ = Ω(η, ξ):
//!   a quarter-turn scaled by the strength on the flat models, `B₀ p × v` on
//!   the sphere, and `B₀ X(p, v)` on the hyperboloid with the
//!   Minkowski-adapted cross product [`Vec3::mcross`];
//! * `retract` — exact re-normalization onto the constraint set (identity on
//!   the flat models: the torus evolves on the universal cover and its
//!   coordinates are wrapped only when writing output);
//! * `metric_dot` — Euclidean, except the hyperboloid's induced metric
//!   `−⟨·,·⟩_M`, which is positive-definite on tangent vectors;
//! * `potential_eval` — a global 1-form potential A with dA = Ω where one
//!   exists (it never does for a constant-strength field on a compact
//!   surface, whose total flux is nonzero);
//! * `small_energy_threshold` — the kinetic-energy level `r(N)²/(16π)` below
//!   which a loop is guaranteed to shrink to a point, with
//!   `r(N) = min(injectivity radius, 1/(2√κ))` for curvature κ > 0.

use crate::fp;
use crate::{CoreError, Result, Vec3};
use alloc::format;

/// Absolute tolerance for on-surface checks. Retraction after every
/// integrator stage keeps constraint drift far below this.
pub const ON_SURFACE_TOL: f64 = 1e-9;

const TAU: f64 = core::f64::consts::TAU;

/// One of the four constant-curvature model surfaces.
///
/// `Plane` and `FlatTorus` use intrinsic coordinates (φ, z) stored in the
/// `x`, `y` components of [`Vec3`] (the third component stays zero);
/// `Sphere` and `Hyperboloid` use ambient ℝ³ coordinates. The hyperboloid is
/// the upper sheet {p₁² − p₂² − p₃² = 1, p₁ ≥ 1}.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SurfaceModel {
    Plane,
    FlatTorus { periods: (f64, f64) },
    Sphere,
    Hyperboloid,
}

impl SurfaceModel {
    /// The standard torus with both periods equal to 2π.
    pub fn flat_torus_default() -> Self {
        SurfaceModel::FlatTorus { periods: (TAU, TAU) }
    }

    /// Gauss curvature: 0, 0, +1, −1.
    pub fn curvature(&self) -> f64 {
        match self {
            SurfaceModel::Plane | SurfaceModel::FlatTorus { .. } => 0.0,
            SurfaceModel::Sphere => 1.0,
            SurfaceModel::Hyperboloid => -1.0,
        }
    }

    /// Number of meaningful point coordinates (2 intrinsic, 3 ambient).
    pub fn coord_dim(&self) -> usize {
        match self {
            SurfaceModel::Plane | SurfaceModel::FlatTorus { .. } => 2,
            SurfaceModel::Sphere | SurfaceModel::Hyperboloid => 3,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, SurfaceModel::FlatTorus { .. } | SurfaceModel::Sphere)
    }

    /// Injectivity radius: ∞ for the plane and hyperboloid, half the shortest
    /// period for the torus, π for the unit sphere.
    pub fn injectivity_radius(&self) -> f64 {
        match self {
            SurfaceModel::Plane | SurfaceModel::Hyperboloid => f64::INFINITY,
            SurfaceModel::FlatTorus { periods } => 0.5 * periods.0.min(periods.1),
            SurfaceModel::Sphere => core::f64::consts::PI,
        }
    }

    /// Check the surface constraint at `p` within [`ON_SURFACE_TOL`].
    pub fn validate_point(&self, p: Vec3) -> Result<()> {
        if !p.is_finite() {
            return Err(CoreError::InvalidPoint(format!("non-finite point {p:?}")));
        }
        match self {
            SurfaceModel::Plane | SurfaceModel::FlatTorus { .. } => Ok(()),
            SurfaceModel::Sphere => {
                let defect = fp::abs(p.dot(p) - 1.0);
                if defect <= ON_SURFACE_TOL {
                    Ok(())
                } else {
                    Err(CoreError::InvalidPoint(format!(
                        "|p|^2 deviates from 1 by {defect:.3e}"
                    )))
                }
            }
            SurfaceModel::Hyperboloid => {
                let defect = fp::abs(p.mdot(p) - 1.0);
                if defect <= ON_SURFACE_TOL && p.x > 0.0 {
                    Ok(())
                } else {
                    Err(CoreError::InvalidPoint(format!(
                        "Minkowski square deviates from 1 by {defect:.3e} (p1={})",
                        p.x
                    )))
                }
            }
        }
    }
}

/// The magnetic field, given either by a constant strength B₀ (the 2-form is
/// B₀ times the area form) or by the exact potential A = ε·sin(z)·dφ on the
/// standard flat torus.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MagneticField {
    ConstantStrength { b0: f64 },
    ExactPotential { epsilon: f64 },
}

impl MagneticField {
    /// Supremum of the operator norm of Z over the surface: |B₀| for a
    /// constant field (Z is pointwise an isometry composed with scaling on
    /// all four models), |ε| for the sinusoidal exact field.
    pub fn sup_norm(&self) -> f64 {
        match self {
            MagneticField::ConstantStrength { b0 } => fp::abs(*b0),
            MagneticField::ExactPotential { epsilon } => fp::abs(*epsilon),
        }
    }

    /// The exact sinusoidal potential is only defined on the standard torus
    /// (periods 2π × 2π); constant strengths are valid everywhere.
    pub fn validate_for(&self, surface: &SurfaceModel) -> Result<()> {
        match self {
            MagneticField::ConstantStrength { b0 } => {
                if b0.is_finite() {
                    Ok(())
                } else {
                    Err(CoreError::InvalidParameter(format!("non-finite b0 {b0}")))
                }
            }
            MagneticField::ExactPotential { epsilon } => {
                if !epsilon.is_finite() {
                    return Err(CoreError::InvalidParameter(format!(
                        "non-finite epsilon {epsilon}"
                    )));
                }
                match surface {
                    SurfaceModel::FlatTorus { periods }
                        if fp::abs(periods.0 - TAU) <= 1e-12
                            && fp::abs(periods.1 - TAU) <= 1e-12 =>
                    {
                        Ok(())
                    }
                    _ => Err(CoreError::InvalidField(
                        "the sinusoidal exact potential is defined on the 2\u{3c0} x 2\u{3c0} flat torus only"
                            .into(),
                    )),
                }
            }
        }
    }
}

/// Value of the global 1-form potential A at a point, when one exists.
///
/// Components are given in the surface's chart: (φ, z) for the flat models;
/// for the hyperboloid the chart is (φ = atan2(p₃, p₂), ρ) and `a_z` carries
/// the (identically zero) ρ-component. When `exists` is false the total flux
/// of the 2-form on a compact surface is nonzero and no global potential can
/// exist; both components are reported as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PotentialValue {
    pub exists: bool,
    pub a_phi: f64,
    pub a_z: f64,
}

const NO_POTENTIAL: PotentialValue = PotentialValue { exists: false, a_phi: 0.0, a_z: 0.0 };

// ---------------------------------------------------------------------------
// Raw kernels: trusted inputs (callers maintain the on-surface invariant).
// ---------------------------------------------------------------------------

#[inline(always)]
pub(crate) fn project_tangent_raw(surface: &SurfaceModel, p: Vec3, v: Vec3) -> Vec3 {
    match surface {
        SurfaceModel::Plane | SurfaceModel::FlatTorus { .. } => Vec3::new(v.x, v.y, 0.0),
        SurfaceModel::Sphere => v - p * v.dot(p),
        SurfaceModel::Hyperboloid => v - p * v.mdot(p),
    }
}

#[inline(always)]
pub(crate) fn tension_correction_raw(surface: &SurfaceModel, p: Vec3, v: Vec3) -> Vec3 {
    match surface {
        SurfaceModel::Plane | SurfaceModel::FlatTorus { .. } => Vec3::default(),
        SurfaceModel::Sphere => p * v.dot(v),
        SurfaceModel::Hyperboloid => p * v.mdot(v),
    }
}

#[inline(always)]
pub(crate) fn lorentz_raw(
    surface: &SurfaceModel,
    field: &MagneticField,
    p: Vec3,
    v: Vec3,
) -> Vec3 {
    match field {
        MagneticField::ConstantStrength { b0 } => match surface {
            SurfaceModel::Plane | SurfaceModel::FlatTorus { .. } => {
                Vec3::new(b0 * v.y, -b0 * v.x, 0.0)
            }
            SurfaceModel::Sphere => p.cross(v) * *b0,
            SurfaceModel::Hyperboloid => p.mcross(v) * *b0,
        },
        MagneticField::ExactPotential { epsilon } => {
            // A = eps*sin(z) dphi  =>  pointwise strength B(z) = -eps*cos(z).
            let b = -epsilon * fp::cos(p.y);
            Vec3::new(b * v.y, -b * v.x, 0.0)
        }
    }
}

#[inline(always)]
pub(crate) fn retract_raw(surface: &SurfaceModel, p: Vec3) -> Result<Vec3> {
    match surface {
        SurfaceModel::Plane | SurfaceModel::FlatTorus { .. } => {
            if p.is_finite() {
                Ok(Vec3::new(p.x, p.y, 0.0))
            } else {
                Err(CoreError::DegeneratePoint(format!("non-finite point {p:?}")))
            }
        }
        SurfaceModel::Sphere => {
            let n2 = p.dot(p);
            if n2 > 1e-16 && n2.is_finite() {
                Ok(p / fp::sqrt(n2))
            } else {
                Err(CoreError::DegeneratePoint(format!(
                    "cannot normalize |p|^2 = {n2:.3e} onto the sphere"
                )))
            }
        }
        SurfaceModel::Hyperboloid => {
            let q = p.mdot(p);
            if q > 1e-16 && q.is_finite() && p.x > 0.0 {
                Ok(p / fp::sqrt(q))
            } else {
                Err(CoreError::DegeneratePoint(format!(
                    "cannot normalize Minkowski square {q:.3e} (p1={}) onto the hyperboloid",
                    p.x
                )))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Checked operations (the public contract).
// ---------------------------------------------------------------------------

/// Metric-orthogonal projection of an ambient vector onto the tangent space
/// at `p`. Idempotent; identity (up to zeroing the unused component) on the
/// flat intrinsic models.
pub fn project_tangent(surface: &SurfaceModel, p: Vec3, v: Vec3) -> Result<Vec3> {
    surface.validate_point(p)?;
    Ok(project_tangent_raw(surface, p, v))
}

/// The term added to a raw second difference of on-surface samples so that
/// the projected result approximates the curve's tension field:
/// zero on the flat models, `+|v|²·p` on the sphere, `+⟨v,v⟩_M·p` on the
/// hyperboloid (equivalently `−|v|²_g·p` with the induced metric norm).
pub fn tension_correction(surface: &SurfaceModel, p: Vec3, v: Vec3) -> Result<Vec3> {
    surface.validate_point(p)?;
    Ok(tension_correction_raw(surface, p, v))
}

/// The Lorentz endomorphism Z at `p` applied to a tangent vector `v`.
/// Linear in `v`, metric-skew (⟨Z(v), v⟩ = 0), and for constant strength an
/// isometry scaled by B₀ (|Z(v)| = |B₀||v|).
pub fn lorentz(
    surface: &SurfaceModel,
    field: &MagneticField,
    p: Vec3,
    v: Vec3,
) -> Result<Vec3> {
    field.validate_for(surface)?;
    surface.validate_point(p)?;
    Ok(lorentz_raw(surface, field, p, v))
}

/// Exact re-normalization onto the constraint set: identity on the flat
/// models (the torus evolves on the universal cover; wrapping into the
/// fundamental domain happens only when output is written), `p/|p|` on the
/// sphere, `p/√⟨p,p⟩_M` on the hyperboloid. Fails (flagging numerical
/// blow-up) when the point cannot be normalized.
pub fn retract(surface: &SurfaceModel, p_raw: Vec3) -> Result<Vec3> {
    retract_raw(surface, p_raw)
}

/// Riemannian inner product of tangent vectors at `p`: Euclidean everywhere
/// except the hyperboloid, whose induced metric is `−⟨·,·⟩_M` (positive-
/// definite on tangent vectors).
pub fn metric_dot(surface: &SurfaceModel, _p: Vec3, v: Vec3, w: Vec3) -> f64 {
    match surface {
        SurfaceModel::Hyperboloid => -v.mdot(w),
        _ => v.dot(w),
    }
}

/// Evaluate the global 1-form potential A (with dA = Ω) at `p`, when one
/// exists:
///
/// * constant strength on the plane: A = B₀·φ dz, so (a_φ, a_z) = (0, B₀·φ);
/// * constant strength on the hyperboloid (non-compact, so always exact):
///   A = B₀(1 − p₁) dφ in the (φ, ρ) chart — smooth at the vertex since
///   1 − cosh ρ = O(ρ²);
/// * the sinusoidal exact field on the torus: (a_φ, a_z) = (ε sin z, 0);
/// * any zero-strength constant field: the zero potential.
///
/// A constant strength B₀ ≠ 0 on a compact surface (torus, sphere) has total
/// flux B₀·area ≠ 0, so no global potential exists.
pub fn potential_eval(
    surface: &SurfaceModel,
    field: &MagneticField,
    p: Vec3,
) -> PotentialValue {
    match (field, surface) {
        (MagneticField::ConstantStrength { b0 }, SurfaceModel::Plane) => {
            PotentialValue { exists: true, a_phi: 0.0, a_z: b0 * p.x }
        }
        (MagneticField::ConstantStrength { b0 }, SurfaceModel::Hyperboloid) => {
            PotentialValue { exists: true, a_phi: b0 * (1.0 - p.x), a_z: 0.0 }
        }
        (MagneticField::ConstantStrength { b0 }, _) => {
            if *b0 == 0.0 {
                PotentialValue { exists: true, a_phi: 0.0, a_z: 0.0 }
            } else {
                NO_POTENTIAL
            }
        }
        (MagneticField::ExactPotential { epsilon }, SurfaceModel::FlatTorus { .. }) => {
            PotentialValue { exists: true, a_phi: epsilon * fp::sin(p.y), a_z: 0.0 }
        }
        // Ill-formed combination, rejected upstream by `validate_for`;
        // report absence rather than panic.
        (MagneticField::ExactPotential { .. }, _) => NO_POTENTIAL,
    }
}

/// Whether a global potential exists for this field/surface pair (constant
/// over the surface, so no point is needed).
pub fn potential_exists(surface: &SurfaceModel, field: &MagneticField) -> bool {
    potential_eval(surface, field, Vec3::new(1.0, 0.0, 0.0)).exists
}

/// The radius `r(N) = min(injrad(N), 1/(2√κ))` (positive-curvature case)
/// gating the small-energy convergence criterion; infinite for the
/// non-compact models.
pub fn convergence_radius(surface: &SurfaceModel) -> f64 {
    let kappa = surface.curvature();
    let injrad = surface.injectivity_radius();
    if kappa > 0.0 {
        injrad.min(0.5 / fp::sqrt(kappa))
    } else {
        injrad
    }
}

/// Kinetic-energy threshold `r(N)²/(16π)` below which a closed loop flows to
/// a point: 1/(64π) on the unit sphere, π/16 on the 2π × 2π torus; +∞ (the
/// bound is vacuous) for the non-compact plane and hyperboloid.
pub fn small_energy_threshold(surface: &SurfaceModel) -> f64 {
    if !surface.is_compact() {
        return f64::INFINITY;
    }
    let r = convergence_radius(surface);
    r * r / (16.0 * core::f64::consts::PI)
}
