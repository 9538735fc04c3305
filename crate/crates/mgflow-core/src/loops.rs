//! Closed discrete curves: uniform sampling, first/second differences,
//! energies, winding, and the standard initial-condition generators.
//!
//! A loop is `n` samples at parameters `s_i = i·h`, `h = circle_length/n`,
//! indexed cyclically. On the flat torus the samples live on the universal
//! cover: the constructor lifts its input to a connected path in ℝ² (moving
//! samples by whole periods only, so input that is already connected is
//! stored verbatim) and reads the winding numbers off the seam once. The
//! difference stencils then take plain coordinate differences, closing the
//! seam between sample `n−1` and sample `0` with the fixed winding offset;
//! coordinates are never reduced modulo the periods during computation (see
//! [`DiscreteLoop::wrapped_samples`] for output-time reduction), so a curve
//! may grow past the fundamental domain without its differences aliasing.

use crate::fp;
use crate::surfaces::{self, potential_eval, MagneticField, SurfaceModel};
use crate::{CoreError, Result, Vec3};
use alloc::format;
use alloc::vec::Vec;

const TAU: f64 = core::f64::consts::TAU;

/// Minimum number of samples: the compact difference stencils and the
/// quadrature below are meaningless on fewer points.
pub const MIN_SAMPLES: usize = 8;

/// A uniformly sampled closed curve on one of the model surfaces.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteLoop {
    surface: SurfaceModel,
    samples: Vec<Vec3>,
    circle_length: f64,
    /// Winding numbers, fixed at construction; `(0, 0)` off the torus.
    winding: (i64, i64),
}

impl DiscreteLoop {
    /// Validate raw samples: at least [`MIN_SAMPLES`] points, a positive
    /// finite parameter period, and every sample on the surface. Flat-torus
    /// samples are lifted onto the universal cover (nearest-image reading of
    /// consecutive differences; already-connected input is kept verbatim)
    /// and the winding numbers are fixed here once and for all.
    pub fn new(surface: SurfaceModel, mut samples: Vec<Vec3>, circle_length: f64) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(CoreError::InvalidLoop(format!(
                "{} samples provided, at least {MIN_SAMPLES} required",
                samples.len()
            )));
        }
        if !(circle_length.is_finite() && circle_length > 0.0) {
            return Err(CoreError::InvalidLoop(format!(
                "circle_length must be positive and finite, got {circle_length}"
            )));
        }
        if let SurfaceModel::FlatTorus { periods } = &surface {
            if !(periods.0.is_finite() && periods.0 > 0.0 && periods.1.is_finite() && periods.1 > 0.0)
            {
                return Err(CoreError::InvalidParameter(format!(
                    "torus periods must be positive and finite, got {periods:?}"
                )));
            }
        }
        for (i, &p) in samples.iter().enumerate() {
            surface.validate_point(p).map_err(|e| {
                CoreError::InvalidLoop(format!("sample {i} is not on the surface: {e}"))
            })?;
        }
        let winding = match &surface {
            SurfaceModel::FlatTorus { periods } => lift_to_cover(&mut samples, *periods),
            _ => (0, 0),
        };
        Ok(DiscreteLoop { surface, samples, circle_length, winding })
    }

    pub fn surface(&self) -> &SurfaceModel {
        &self.surface
    }

    pub fn samples(&self) -> &[Vec3] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut Vec<Vec3> {
        &mut self.samples
    }

    pub fn circle_length(&self) -> f64 {
        self.circle_length
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Sample spacing `circle_length / n`.
    pub fn h(&self) -> f64 {
        self.circle_length / self.samples.len() as f64
    }

    /// Winding numbers fixed at construction (`(0, 0)` off the torus). The
    /// flow updates samples in place and never re-reads them from the
    /// geometry, so the homotopy class survives even when a growing curve
    /// becomes under-resolved.
    pub(crate) fn winding_numbers(&self) -> (i64, i64) {
        self.winding
    }

    /// Coordinate displacement between consecutive cover images of the loop,
    /// `γ(s + L) − γ(s)`: the winding numbers times the periods. Zero off
    /// the torus. The stencils add this across the index seam.
    pub(crate) fn closure(&self) -> Vec3 {
        match &self.surface {
            SurfaceModel::FlatTorus { periods } => Vec3::planar(
                self.winding.0 as f64 * periods.0,
                self.winding.1 as f64 * periods.1,
            ),
            _ => Vec3::ZERO,
        }
    }

    /// Re-run the constructor checks (useful after deserializing).
    pub fn revalidate(&self) -> Result<()> {
        DiscreteLoop::new(self.surface.clone(), self.samples.clone(), self.circle_length)
            .map(|_| ())
    }

    /// The samples with torus coordinates reduced into the fundamental
    /// domain `[0, P_φ) × [0, P_z)`; other surfaces are returned as stored.
    /// Only output formatting should use this — all computation stays on the
    /// universal cover.
    pub fn wrapped_samples(&self) -> Vec<Vec3> {
        match &self.surface {
            SurfaceModel::FlatTorus { periods } => self
                .samples
                .iter()
                .map(|p| Vec3::planar(fp::wrap_into(p.x, periods.0), fp::wrap_into(p.y, periods.1)))
                .collect(),
            _ => self.samples.clone(),
        }
    }
}

/// Move each torus sample by whole periods so consecutive samples differ by
/// less than half a period per coordinate — the nearest-image reading of the
/// input — and return the winding numbers read off the seam. Input that is
/// already a connected cover path is left untouched bit for bit. Because the
/// shift is measured against the already-lifted predecessor, each moved
/// sample receives its total offset in one multiply and subtract, so
/// precision does not depend on how often the path crossed the boundary.
fn lift_to_cover(samples: &mut [Vec3], periods: (f64, f64)) -> (i64, i64) {
    let n = samples.len();
    for i in 1..n {
        let prev = samples[i - 1];
        let kx = fp::round((samples[i].x - prev.x) / periods.0);
        let ky = fp::round((samples[i].y - prev.y) / periods.1);
        if kx != 0.0 || ky != 0.0 {
            samples[i] =
                Vec3::planar(samples[i].x - kx * periods.0, samples[i].y - ky * periods.1);
        }
    }
    let first = samples[0];
    let last = samples[n - 1];
    let wx = -fp::round((first.x - last.x) / periods.0);
    let wy = -fp::round((first.y - last.y) / periods.1);
    (wx as i64, wy as i64)
}

/// Central-difference velocity `(γ_{i+1} − γ_{i−1})/(2h)` at every sample,
/// projected onto the tangent space.
pub fn velocity(lp: &DiscreteLoop) -> Vec<Vec3> {
    let mut out = Vec::new();
    velocity_into(lp.surface(), lp.samples(), lp.h(), lp.closure(), &mut out);
    out
}

pub(crate) fn velocity_into(
    surface: &SurfaceModel,
    samples: &[Vec3],
    h: f64,
    closure: Vec3,
    out: &mut Vec<Vec3>,
) {
    let n = samples.len();
    out.clear();
    out.reserve(n);
    let inv2h = 1.0 / (2.0 * h);
    match surface {
        SurfaceModel::Plane => {
            for i in 0..n {
                let d = samples[(i + 1) % n] - samples[(i + n - 1) % n];
                out.push(Vec3::planar(d.x * inv2h, d.y * inv2h));
            }
        }
        SurfaceModel::FlatTorus { .. } => {
            // Plain cover differences; the two stencils that straddle the
            // index seam pick up the loop's closure offset (the backward
            // neighbor of sample 0 is γ_{n−1} − closure, the forward
            // neighbor of sample n−1 is γ_0 + closure — both show up here
            // with a plus sign).
            for i in 0..n {
                let mut d = samples[(i + 1) % n] - samples[(i + n - 1) % n];
                if i == 0 || i + 1 == n {
                    d = d + closure;
                }
                out.push(Vec3::planar(d.x * inv2h, d.y * inv2h));
            }
        }
        SurfaceModel::Sphere => {
            for i in 0..n {
                let p = samples[i];
                let v = (samples[(i + 1) % n] - samples[(i + n - 1) % n]) * inv2h;
                out.push(v - p * v.dot(p));
            }
        }
        SurfaceModel::Hyperboloid => {
            for i in 0..n {
                let p = samples[i];
                let v = (samples[(i + 1) % n] - samples[(i + n - 1) % n]) * inv2h;
                out.push(v - p * v.mdot(p));
            }
        }
    }
}

/// Discrete tension field: compact second difference
/// `(γ_{i+1} − 2γ_i + γ_{i−1})/h²`, plus the surface's quadratic correction
/// evaluated on the central-difference velocity, projected onto the tangent
/// space.
pub fn tension(lp: &DiscreteLoop) -> Vec<Vec3> {
    let vel = velocity(lp);
    let mut out = Vec::new();
    tension_into(lp.surface(), lp.samples(), &vel, lp.h(), lp.closure(), &mut out);
    out
}

pub(crate) fn tension_into(
    surface: &SurfaceModel,
    samples: &[Vec3],
    vel: &[Vec3],
    h: f64,
    closure: Vec3,
    out: &mut Vec<Vec3>,
) {
    let n = samples.len();
    out.clear();
    out.reserve(n);
    let inv_h2 = 1.0 / (h * h);
    match surface {
        SurfaceModel::Plane => {
            for i in 0..n {
                let p = samples[i];
                let d = samples[(i + 1) % n] + samples[(i + n - 1) % n] - p * 2.0;
                out.push(Vec3::planar(d.x * inv_h2, d.y * inv_h2));
            }
        }
        SurfaceModel::FlatTorus { .. } => {
            // Cover differences with the closure offset across the seam, as
            // in `velocity_into`: both seam corrections enter with a plus.
            for i in 0..n {
                let p = samples[i];
                let mut fwd = samples[(i + 1) % n] - p;
                let mut bwd = p - samples[(i + n - 1) % n];
                if i + 1 == n {
                    fwd = fwd + closure;
                }
                if i == 0 {
                    bwd = bwd + closure;
                }
                out.push(Vec3::planar((fwd.x - bwd.x) * inv_h2, (fwd.y - bwd.y) * inv_h2));
            }
        }
        SurfaceModel::Sphere => {
            for i in 0..n {
                let p = samples[i];
                let second = (samples[(i + 1) % n] + samples[(i + n - 1) % n] - p * 2.0) * inv_h2;
                let corrected = second + p * vel[i].dot(vel[i]);
                out.push(corrected - p * corrected.dot(p));
            }
        }
        SurfaceModel::Hyperboloid => {
            for i in 0..n {
                let p = samples[i];
                let second = (samples[(i + 1) % n] + samples[(i + n - 1) % n] - p * 2.0) * inv_h2;
                let corrected = second + p * vel[i].mdot(vel[i]);
                out.push(corrected - p * corrected.mdot(p));
            }
        }
    }
}

/// Kinetic energy `½ Σ |v_i|²_g h` with the central-difference velocity.
pub fn kinetic_energy(lp: &DiscreteLoop) -> f64 {
    let vel = velocity(lp);
    let h = lp.h();
    let mut acc = 0.0;
    for (i, v) in vel.iter().enumerate() {
        acc += surfaces::metric_dot(lp.surface(), lp.samples()[i], *v, *v);
    }
    0.5 * acc * h
}

/// The potential term `∫ γ*A = Σ A(γ_i)(v_i) h`, when a global potential
/// exists for the field on this surface; `None` otherwise. On the
/// hyperboloid the chart rate dφ/ds is `(p₂ v₃ − p₃ v₂)/(p₂² + p₃²)`.
pub fn magnetic_energy(lp: &DiscreteLoop, field: &MagneticField) -> Option<f64> {
    if !surfaces::potential_exists(lp.surface(), field) {
        return None;
    }
    let vel = velocity(lp);
    let h = lp.h();
    let mut acc = 0.0;
    match lp.surface() {
        SurfaceModel::Plane | SurfaceModel::FlatTorus { .. } => {
            for (i, &p) in lp.samples().iter().enumerate() {
                let a = potential_eval(lp.surface(), field, p);
                acc += a.a_phi * vel[i].x + a.a_z * vel[i].y;
            }
        }
        SurfaceModel::Sphere => {
            // Only the zero field admits a potential here, and it is zero.
        }
        SurfaceModel::Hyperboloid => {
            for (i, &p) in lp.samples().iter().enumerate() {
                let denom = p.y * p.y + p.z * p.z;
                if denom < 1e-30 {
                    // At the vertex the potential component vanishes
                    // quadratically while the chart rate blows up linearly;
                    // the product tends to zero.
                    continue;
                }
                let a = potential_eval(lp.surface(), field, p);
                let dphi_ds = (p.y * vel[i].z - p.z * vel[i].y) / denom;
                acc += a.a_phi * dphi_ds;
            }
        }
    }
    Some(acc * h)
}

/// Winding numbers of a flat-torus loop, fixed when the loop was constructed
/// (nearest-image lift of the input samples) and invariant under the in-place
/// sample updates of the flow — a continuous deformation of a closed loop
/// cannot leave its homotopy class, so recomputing from possibly
/// under-resolved evolved samples would only lose information. On the other
/// surfaces every loop is contractible and the result is `(0, 0)`. The
/// `Result` is kept for signature stability; the current construction always
/// succeeds.
pub fn winding(lp: &DiscreteLoop) -> Result<(i64, i64)> {
    Ok(lp.winding_numbers())
}

/// Maximum pairwise Euclidean distance between samples, in the stored
/// representation (universal cover for the torus, ambient ℝ³ for the sphere
/// and hyperboloid). A loop with nonzero winding spans at least a period and
/// therefore never has small diameter.
pub fn diameter(lp: &DiscreteLoop) -> f64 {
    let samples = lp.samples();
    let mut best = 0.0f64;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let d2 = {
                let d = samples[j] - samples[i];
                d.dot(d)
            };
            if d2 > best {
                best = d2;
            }
        }
    }
    fp::sqrt(best)
}

/// Minimum and maximum of the pointwise metric speed `|v_i|_g`.
pub fn speed_stats(lp: &DiscreteLoop) -> (f64, f64) {
    let vel = velocity(lp);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (i, v) in vel.iter().enumerate() {
        let s2 = surfaces::metric_dot(lp.surface(), lp.samples()[i], *v, *v);
        let s = fp::sqrt(s2.max(0.0));
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (lo, hi)
}

/// Families of initial loops.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LoopGenerator {
    /// Flat-torus oscillation mode `φ = a·cos(k·s)`, `z = b·sin(k·s)`: a
    /// contractible loop (winding (0,0)) that the flow damps or amplifies
    /// one frequency at a time.
    FourierMode { k: i64, a: f64, b: f64 },
    /// Flat-torus graph loop `φ = s`, `z = μ·cos(2πs/L)`.
    TorusGraph { mu: f64 },
    /// Sphere latitude circle at polar angle θ₀ (θ = 0 is the north pole).
    SphereLatitude { theta0: f64 },
    /// Hyperboloid latitude circle at radial parameter θ₀ ≥ 0
    /// (p₁ = cosh θ₀).
    HyperbolicLatitude { theta0: f64 },
    /// Plane circle of the given radius about a center, traversed clockwise:
    /// `(c₁ + r·cos α, c₂ − r·sin α)`, matching the orientation of the
    /// stationary orbits for positive field strength.
    PlaneCircle { radius: f64, center: (f64, f64) },
    /// Explicit sample list (must match the requested sample count).
    ExplicitSamples { samples: Vec<Vec3> },
}

/// Build an `n`-sample loop of the given family on `surface` with parameter
/// period `circle_length`, validating the family/surface pairing and closure.
pub fn make_loop(
    gen: &LoopGenerator,
    surface: &SurfaceModel,
    n: usize,
    circle_length: f64,
) -> Result<DiscreteLoop> {
    if !(circle_length.is_finite() && circle_length > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "circle_length must be positive and finite, got {circle_length}"
        )));
    }
    if n < MIN_SAMPLES {
        return Err(CoreError::InvalidParameter(format!(
            "n = {n} is below the minimum of {MIN_SAMPLES}"
        )));
    }
    let h = circle_length / n as f64;
    let mut samples = Vec::with_capacity(n);
    match (gen, surface) {
        (LoopGenerator::FourierMode { k, a, b }, SurfaceModel::FlatTorus { .. }) => {
            if !(a.is_finite() && b.is_finite()) {
                return Err(CoreError::InvalidParameter(
                    "mode amplitudes must be finite".into(),
                ));
            }
            if *k == 0 {
                return Err(CoreError::InvalidParameter(
                    "mode frequency k must be a nonzero integer".into(),
                ));
            }
            // Closure needs the oscillation to complete whole turns over the
            // parameter circle.
            let kf = *k as f64;
            let turns = kf * circle_length / TAU;
            if fp::abs(turns - fp::round(turns)) > 1e-9 {
                return Err(CoreError::InvalidParameter(format!(
                    "mode k = {k} does not close over circle_length {circle_length}"
                )));
            }
            for i in 0..n {
                let s = i as f64 * h;
                samples.push(Vec3::planar(a * fp::cos(kf * s), b * fp::sin(kf * s)));
            }
        }
        (LoopGenerator::FourierMode { .. }, other) => {
            return Err(CoreError::InvalidParameter(format!(
                "FourierMode loops live on the flat torus, not {other:?}"
            )))
        }
        (LoopGenerator::TorusGraph { mu }, SurfaceModel::FlatTorus { periods }) => {
            if !mu.is_finite() {
                return Err(CoreError::InvalidParameter("mu must be finite".into()));
            }
            let phi_periods = circle_length / periods.0;
            if fp::abs(phi_periods - fp::round(phi_periods)) > 1e-9 {
                return Err(CoreError::InvalidParameter(format!(
                    "graph loop does not close: circle_length {circle_length} is not a \
                     multiple of the φ-period {}",
                    periods.0
                )));
            }
            for i in 0..n {
                let s = i as f64 * h;
                samples.push(Vec3::planar(s, mu * fp::cos(TAU * s / circle_length)));
            }
        }
        (LoopGenerator::TorusGraph { .. }, other) => {
            return Err(CoreError::InvalidParameter(format!(
                "TorusGraph loops live on the flat torus, not {other:?}"
            )))
        }
        (LoopGenerator::SphereLatitude { theta0 }, SurfaceModel::Sphere) => {
            if !(theta0.is_finite() && (0.0..=core::f64::consts::PI).contains(theta0)) {
                return Err(CoreError::InvalidParameter(format!(
                    "latitude angle must lie in [0, \u{3c0}], got {theta0}"
                )));
            }
            let (st, ct) = (fp::sin(*theta0), fp::cos(*theta0));
            for i in 0..n {
                let alpha = TAU * i as f64 / n as f64;
                samples.push(Vec3::new(st * fp::cos(alpha), st * fp::sin(alpha), ct));
            }
        }
        (LoopGenerator::SphereLatitude { .. }, other) => {
            return Err(CoreError::InvalidParameter(format!(
                "SphereLatitude loops live on the sphere, not {other:?}"
            )))
        }
        (LoopGenerator::HyperbolicLatitude { theta0 }, SurfaceModel::Hyperboloid) => {
            if !(theta0.is_finite() && *theta0 >= 0.0) {
                return Err(CoreError::InvalidParameter(format!(
                    "radial parameter must be nonnegative, got {theta0}"
                )));
            }
            let (sh, ch) = (fp::sinh(*theta0), fp::cosh(*theta0));
            for i in 0..n {
                let alpha = TAU * i as f64 / n as f64;
                samples.push(Vec3::new(ch, sh * fp::cos(alpha), sh * fp::sin(alpha)));
            }
        }
        (LoopGenerator::HyperbolicLatitude { .. }, other) => {
            return Err(CoreError::InvalidParameter(format!(
                "HyperbolicLatitude loops live on the hyperboloid, not {other:?}"
            )))
        }
        (LoopGenerator::PlaneCircle { radius, center }, SurfaceModel::Plane) => {
            if !(radius.is_finite() && *radius > 0.0 && center.0.is_finite() && center.1.is_finite())
            {
                return Err(CoreError::InvalidParameter(format!(
                    "circle needs a positive finite radius and finite center, got \
                     radius {radius}, center {center:?}"
                )));
            }
            for i in 0..n {
                let alpha = TAU * i as f64 / n as f64;
                samples.push(Vec3::planar(
                    center.0 + radius * fp::cos(alpha),
                    center.1 - radius * fp::sin(alpha),
                ));
            }
        }
        (LoopGenerator::PlaneCircle { .. }, other) => {
            return Err(CoreError::InvalidParameter(format!(
                "PlaneCircle loops live on the plane, not {other:?}"
            )))
        }
        (LoopGenerator::ExplicitSamples { samples: given }, _) => {
            if given.len() != n {
                return Err(CoreError::InvalidParameter(format!(
                    "explicit sample list has {} points but n = {n} was requested",
                    given.len()
                )));
            }
            samples.extend_from_slice(given);
        }
    }
    DiscreteLoop::new(surface.clone(), samples, circle_length)
}
