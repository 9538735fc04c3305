//! Closed-form reference solutions used to cross-check the integrator:
//! torus mode dynamics, the drifting graph solution, the one-dimensional
//! latitude reduction on the curved models, stationary latitude orbits, and
//! the circular orbits of the plane.

use crate::loops::DiscreteLoop;
use crate::surfaces::SurfaceModel;
use crate::{fp, CoreError, Result, Vec3};
use alloc::vec::Vec;

const TAU: f64 = core::f64::consts::TAU;
const PI: f64 = core::f64::consts::PI;

/// Parameters of the two-exponential torus mode solution
/// `φ = (A₊(t)+A₋(t))·cos(k·s)`, `z = (A₊(t)−A₋(t))·sin(k·s)`
/// with `A±(0) = (a ± b)/2` and `A±(t) = A±(0)·exp(λ± t)`,
/// `λ± = −(k² ± k·B₀)`. This contractible loop shrinks to a point for
/// `|B₀| < |k|`, freezes one rotating component exactly at `|B₀| = |k|`
/// (leaving a stationary loop), and blows up beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusModeParams {
    pub k: i64,
    pub a: f64,
    pub b: f64,
    pub b0: f64,
}

impl TorusModeParams {
    /// Decay rates `(λ₊, λ₋) = (−(k² + k·B₀), −(k² − k·B₀))` of the two
    /// rotating mode components. `λ₋` crosses zero at `B₀ = k`, the
    /// instability threshold of the winding-k circle.
    pub fn decay_rates(&self) -> (f64, f64) {
        let k = self.k as f64;
        (-(k * k + k * self.b0), -(k * k - k * self.b0))
    }

    fn mode_amplitudes(&self, t: f64) -> (f64, f64) {
        let (lp, lm) = self.decay_rates();
        (0.5 * (self.a + self.b) * fp::exp(lp * t), 0.5 * (self.a - self.b) * fp::exp(lm * t))
    }
}

/// The mode solution at time `t`, parameter `s`, as universal-cover
/// coordinates `(φ, z)`.
pub fn torus_mode_point(p: &TorusModeParams, t: f64, s: f64) -> (f64, f64) {
    let k = p.k as f64;
    let (ap, am) = p.mode_amplitudes(t);
    ((ap + am) * fp::cos(k * s), (ap - am) * fp::sin(k * s))
}

/// Sampled mode solution on the standard 2π × 2π torus.
pub fn torus_mode_loop(
    p: &TorusModeParams,
    t: f64,
    n: usize,
    circle_length: f64,
) -> Result<DiscreteLoop> {
    if p.k == 0 {
        return Err(CoreError::InvalidParameter("mode index k must be nonzero".into()));
    }
    let turns = p.k as f64 * circle_length / TAU;
    if fp::abs(turns - fp::round(turns)) > 1e-9 {
        return Err(CoreError::InvalidParameter(alloc::format!(
            "mode k = {} does not close over circle_length {circle_length}",
            p.k
        )));
    }
    let h = circle_length / n as f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let (phi, z) = torus_mode_point(p, t, i as f64 * h);
        samples.push(Vec3::planar(phi, z));
    }
    DiscreteLoop::new(SurfaceModel::flat_torus_default(), samples, circle_length)
}

/// Accumulated magnetic coupling `∫₀ᵀ ∫ ⟨γ̇, Z(γ′)⟩ ds dt` along the mode
/// solution:
///
/// `π k B₀ [ A₊(0)²(e^{2λ₊T} − 1) − A₋(0)²(e^{2λ₋T} − 1) ]`.
///
/// It vanishes at `T = 0` and, for `0 < B₀ < k`, converges to
/// `−π a b k B₀` as `T → ∞`.
pub fn torus_magnetic_term(p: &TorusModeParams, t: f64) -> f64 {
    let k = p.k as f64;
    let (lp, lm) = p.decay_rates();
    let ap0 = 0.5 * (p.a + p.b);
    let am0 = 0.5 * (p.a - p.b);
    PI * k * p.b0
        * (ap0 * ap0 * (fp::exp(2.0 * lp * t) - 1.0) - am0 * am0 * (fp::exp(2.0 * lm * t) - 1.0))
}

/// The drifting graph solution with initial condition `φ = s`,
/// `z = μ·cos(s)` on the standard torus (winding-1 in φ):
///
/// `φ(t,s) = s + (μ/2)·sin(s)·(e^{(B₀−1)t} − e^{−(B₀+1)t})`
/// `z(t,s) = B₀·t + (μ/2)·cos(s)·(e^{(B₀−1)t} + e^{−(B₀+1)t})`
///
/// The mean height drifts at exactly `B₀` for all time; the profile decays
/// for `B₀ < 1` and grows for `B₀ > 1`.
pub fn torus_drift_point(mu: f64, b0: f64, t: f64, s: f64) -> (f64, f64) {
    let grow = fp::exp((b0 - 1.0) * t);
    let decay = fp::exp(-(b0 + 1.0) * t);
    (
        s + 0.5 * mu * fp::sin(s) * (grow - decay),
        b0 * t + 0.5 * mu * fp::cos(s) * (grow + decay),
    )
}

/// Sampled drift solution on the standard torus with `circle_length = 2π`.
pub fn torus_drift_loop(mu: f64, b0: f64, t: f64, n: usize) -> Result<DiscreteLoop> {
    let h = TAU / n as f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let (phi, z) = torus_drift_point(mu, b0, t, i as f64 * h);
        samples.push(Vec3::planar(phi, z));
    }
    DiscreteLoop::new(SurfaceModel::flat_torus_default(), samples, TAU)
}

/// Which curved model a latitude reduction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatitudeKind {
    Sphere,
    Hyperbolic,
}

/// Right-hand side of the one-dimensional latitude reduction for circles
/// `s ↦ (latitude θ, azimuth s)` at unit azimuthal parameter rate:
///
/// * sphere: `θ̇ = sin θ (B₀ − cos θ)`
/// * hyperboloid: `θ̇ = sinh θ (B₀ − cosh θ)`
///
/// Fixed points: the poles/vertex, and `cos θ* = B₀` (respectively
/// `cosh θ* = B₀`) when that equation has a solution. Linearizing gives
/// escape rate `sin²θ*` at the interior sphere equilibrium (unstable) and
/// contraction rate `−(B₀² − 1)` on the hyperboloid (stable).
pub fn latitude_rate(kind: LatitudeKind, b0: f64, theta: f64) -> f64 {
    match kind {
        LatitudeKind::Sphere => fp::sin(theta) * (b0 - fp::cos(theta)),
        LatitudeKind::Hyperbolic => fp::sinh(theta) * (b0 - fp::cosh(theta)),
    }
}

/// Interior equilibrium latitude, when one exists: `arccos B₀` on the sphere
/// (for |B₀| ≤ 1), `arcosh B₀` on the hyperboloid (for B₀ ≥ 1).
pub fn latitude_equilibrium(kind: LatitudeKind, b0: f64) -> Option<f64> {
    match kind {
        LatitudeKind::Sphere => {
            if (-1.0..=1.0).contains(&b0) {
                Some(fp::acos(b0))
            } else {
                None
            }
        }
        LatitudeKind::Hyperbolic => {
            if b0 >= 1.0 {
                Some(fp::acosh(b0))
            } else {
                None
            }
        }
    }
}

/// Classical fourth-order integration of the latitude reduction with fixed
/// step `dt`; returns `steps + 1` values starting with `theta0`. Matching
/// `dt` with the surface-flow run aligns the two time grids exactly.
pub fn latitude_ode_solve(
    kind: LatitudeKind,
    b0: f64,
    theta0: f64,
    dt: f64,
    steps: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut th = theta0;
    out.push(th);
    for _ in 0..steps {
        let k1 = latitude_rate(kind, b0, th);
        let k2 = latitude_rate(kind, b0, th + 0.5 * dt * k1);
        let k3 = latitude_rate(kind, b0, th + 0.5 * dt * k2);
        let k4 = latitude_rate(kind, b0, th + dt * k3);
        th += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(th);
    }
    out
}

/// A latitude circle that is itself a stationary orbit when traversed at the
/// right angular rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatitudeOrbit {
    /// Azimuthal angular rate ω (`ω cos θ₀ = B₀` on the sphere,
    /// `ω cosh θ₀ = B₀` on the hyperboloid). May be negative.
    pub omega: f64,
    /// Parameter period `2π/|ω|` over which the circle closes once.
    pub circle_length: f64,
}

/// Solve for the rate that makes the latitude circle at `theta0` stationary.
/// Fails on the sphere's equator (no rate works unless B₀ = 0, and then all
/// do) and for `B₀ = 0` away from geodesic latitudes (the rate degenerates).
pub fn latitude_geodesic(kind: LatitudeKind, b0: f64, theta0: f64) -> Result<LatitudeOrbit> {
    let denom = match kind {
        LatitudeKind::Sphere => fp::cos(theta0),
        LatitudeKind::Hyperbolic => fp::cosh(theta0),
    };
    if fp::abs(denom) < 1e-12 {
        return Err(CoreError::UndefinedRate);
    }
    let omega = b0 / denom;
    if omega == 0.0 {
        return Err(CoreError::NoClosedOrbit);
    }
    Ok(LatitudeOrbit { omega, circle_length: TAU / fp::abs(omega) })
}

/// Sampled stationary latitude orbit.
pub fn latitude_geodesic_loop(
    kind: LatitudeKind,
    b0: f64,
    theta0: f64,
    n: usize,
) -> Result<DiscreteLoop> {
    let orbit = latitude_geodesic(kind, b0, theta0)?;
    let sign = if orbit.omega < 0.0 { -1.0 } else { 1.0 };
    let mut samples = Vec::with_capacity(n);
    match kind {
        LatitudeKind::Sphere => {
            let (st, ct) = (fp::sin(theta0), fp::cos(theta0));
            for i in 0..n {
                let alpha = sign * TAU * i as f64 / n as f64;
                samples.push(Vec3::new(st * fp::cos(alpha), st * fp::sin(alpha), ct));
            }
            DiscreteLoop::new(SurfaceModel::Sphere, samples, orbit.circle_length)
        }
        LatitudeKind::Hyperbolic => {
            let (sh, ch) = (fp::sinh(theta0), fp::cosh(theta0));
            for i in 0..n {
                let alpha = sign * TAU * i as f64 / n as f64;
                samples.push(Vec3::new(ch, sh * fp::cos(alpha), sh * fp::sin(alpha)));
            }
            DiscreteLoop::new(SurfaceModel::Hyperboloid, samples, orbit.circle_length)
        }
    }
}

/// A circular orbit of the plane: radius, parameter period, and curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneCircleOrbit {
    pub radius: f64,
    pub circle_length: f64,
}

/// The stationary circular orbit at a given speed: radius `speed/|B₀|`,
/// traversed as `γ(s) = R·(cos(B₀ s), −sin(B₀ s))` over one period
/// `2π/|B₀|` (clockwise for positive strength).
pub fn plane_circle(speed: f64, b0: f64) -> Result<PlaneCircleOrbit> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(CoreError::InvalidParameter(format_speed(speed)));
    }
    if b0 == 0.0 || !b0.is_finite() {
        return Err(CoreError::NoClosedOrbit);
    }
    Ok(PlaneCircleOrbit { radius: speed / fp::abs(b0), circle_length: TAU / fp::abs(b0) })
}

fn format_speed(speed: f64) -> alloc::string::String {
    alloc::format!("orbit speed must be positive and finite, got {speed}")
}

/// Point on the stationary circular orbit (centered at the origin).
pub fn plane_circle_point(speed: f64, b0: f64, s: f64) -> Result<(f64, f64)> {
    let orbit = plane_circle(speed, b0)?;
    Ok((orbit.radius * fp::cos(b0 * s), -orbit.radius * fp::sin(b0 * s)))
}

/// Sampled stationary circular orbit.
pub fn plane_circle_loop(speed: f64, b0: f64, n: usize) -> Result<DiscreteLoop> {
    let orbit = plane_circle(speed, b0)?;
    let h = orbit.circle_length / n as f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let s = i as f64 * h;
        samples.push(Vec3::planar(
            orbit.radius * fp::cos(b0 * s),
            -orbit.radius * fp::sin(b0 * s),
        ));
    }
    DiscreteLoop::new(SurfaceModel::Plane, samples, orbit.circle_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::{self, make_loop, LoopGenerator};
    use crate::surfaces::{lorentz, MagneticField};

    #[test]
    fn mode_solution_at_time_zero_matches_the_generator() {
        let p = TorusModeParams { k: 1, a: 2.0, b: 1.0, b0: 0.5 };
        let from_gen = make_loop(
            &LoopGenerator::FourierMode { k: 1, a: 2.0, b: 1.0 },
            &SurfaceModel::flat_torus_default(),
            64,
            TAU,
        )
        .unwrap();
        let from_mode = torus_mode_loop(&p, 0.0, 64, TAU).unwrap();
        for (x, y) in from_gen.samples().iter().zip(from_mode.samples()) {
            assert!((*x - *y).norm() <= 1e-14);
        }
    }

    #[test]
    fn mode_rates_worked_values() {
        let p = TorusModeParams { k: 1, a: 2.0, b: 1.0, b0: 0.5 };
        let (lp, lm) = p.decay_rates();
        assert!((lp - (-1.5)).abs() <= 1e-15);
        assert!((lm - (-0.5)).abs() <= 1e-15);
        // At the threshold the slow component freezes.
        let p = TorusModeParams { k: 1, a: 2.0, b: 1.0, b0: 1.0 };
        assert_eq!(p.decay_rates().1, 0.0);
    }

    /// Finite-difference check that the closed form satisfies
    /// φ̇ = φ″ − B₀ z′ and ż = z″ + B₀ φ′ pointwise.
    #[test]
    fn mode_solution_satisfies_the_flow_equations() {
        let p = TorusModeParams { k: 2, a: 0.7, b: -0.4, b0: 0.8 };
        let dt = 1e-5;
        let ds = 1e-4;
        for &(t, s) in &[(0.1, 0.3), (0.55, 2.0), (1.3, 5.1)] {
            let (phi_p, z_p) = torus_mode_point(&p, t + dt, s);
            let (phi_m, z_m) = torus_mode_point(&p, t - dt, s);
            let phi_t = (phi_p - phi_m) / (2.0 * dt);
            let z_t = (z_p - z_m) / (2.0 * dt);

            let (phi0, z0) = torus_mode_point(&p, t, s);
            let (phi_r, z_r) = torus_mode_point(&p, t, s + ds);
            let (phi_l, z_l) = torus_mode_point(&p, t, s - ds);
            let phi_s = (phi_r - phi_l) / (2.0 * ds);
            let z_s = (z_r - z_l) / (2.0 * ds);
            let phi_ss = (phi_r - 2.0 * phi0 + phi_l) / (ds * ds);
            let z_ss = (z_r - 2.0 * z0 + z_l) / (ds * ds);

            assert!((phi_t - (phi_ss - p.b0 * z_s)).abs() <= 1e-5, "phi at ({t},{s})");
            assert!((z_t - (z_ss + p.b0 * phi_s)).abs() <= 1e-5, "z at ({t},{s})");
        }
    }

    #[test]
    fn drift_solution_satisfies_the_flow_equations() {
        let (mu, b0) = (1.0, 0.5);
        let dt = 1e-5;
        let ds = 1e-4;
        for &(t, s) in &[(0.2, 0.9), (1.7, 4.2)] {
            let f = |t: f64, s: f64| torus_drift_point(mu, b0, t, s);
            let (phi_p, z_p) = f(t + dt, s);
            let (phi_m, z_m) = f(t - dt, s);
            let (phi0, z0) = f(t, s);
            let (phi_r, z_r) = f(t, s + ds);
            let (phi_l, z_l) = f(t, s - ds);
            let phi_t = (phi_p - phi_m) / (2.0 * dt);
            let z_t = (z_p - z_m) / (2.0 * dt);
            let phi_s = (phi_r - phi_l) / (2.0 * ds);
            let z_s = (z_r - z_l) / (2.0 * ds);
            let phi_ss = (phi_r - 2.0 * phi0 + phi_l) / (ds * ds);
            let z_ss = (z_r - 2.0 * z0 + z_l) / (ds * ds);
            assert!((phi_t - (phi_ss - b0 * z_s)).abs() <= 1e-5);
            assert!((z_t - (z_ss + b0 * phi_s)).abs() <= 1e-5);
        }
        // Mean height drifts at exactly b0.
        let m = 4096;
        let mean_z = |t: f64| {
            let mut acc = 0.0;
            for i in 0..m {
                acc += torus_drift_point(mu, b0, t, TAU * i as f64 / m as f64).1;
            }
            acc / m as f64
        };
        assert!((mean_z(3.0) - 3.0 * b0).abs() <= 1e-12);
    }

    #[test]
    fn magnetic_term_worked_values() {
        let p = TorusModeParams { k: 1, a: 1.0, b: 1.0, b0: 1.0 };
        assert_eq!(torus_magnetic_term(&p, 0.0), 0.0);
        for &t in &[0.5, 1.0, 3.0] {
            let want = -PI + PI * fp::exp(-4.0 * t);
            assert!((torus_magnetic_term(&p, t) - want).abs() <= 1e-12);
        }
        // Independent oracle: differentiate in T and compare with the
        // integrand computed by quadrature from the closed-form curve.
        let p = TorusModeParams { k: 1, a: 2.0, b: 1.0, b0: 0.5 };
        let t = 0.8;
        let dt = 1e-5;
        let rate_fd = (torus_magnetic_term(&p, t + dt) - torus_magnetic_term(&p, t - dt))
            / (2.0 * dt);
        let m = 8192;
        let mut rate_quad = 0.0;
        for i in 0..m {
            let s = TAU * i as f64 / m as f64;
            let eps = 1e-6;
            let (phi_p, z_p) = torus_mode_point(&p, t + eps, s);
            let (phi_m, z_m) = torus_mode_point(&p, t - eps, s);
            let ds = 1e-6;
            let (phi_r, z_r) = torus_mode_point(&p, t, s + ds);
            let (phi_l, z_l) = torus_mode_point(&p, t, s - ds);
            let phi_t = (phi_p - phi_m) / (2.0 * eps);
            let z_t = (z_p - z_m) / (2.0 * eps);
            let phi_s = (phi_r - phi_l) / (2.0 * ds);
            let z_s = (z_r - z_l) / (2.0 * ds);
            // <gdot, Z(g')> with Z(v) = B0 (v_z, -v_phi).
            rate_quad += p.b0 * (phi_t * z_s - z_t * phi_s);
        }
        rate_quad *= TAU / m as f64;
        assert!(
            (rate_fd - rate_quad).abs() <= 1e-4,
            "d/dT closed form {rate_fd} vs quadrature {rate_quad}"
        );
    }

    #[test]
    fn latitude_fixed_points_and_linearized_rates() {
        // Sphere, B0 = 0.5: equilibrium at pi/3, escape rate sin^2 = 0.75.
        let b0 = 0.5;
        let th = latitude_equilibrium(LatitudeKind::Sphere, b0).unwrap();
        assert!((th - PI / 3.0).abs() <= 1e-15);
        assert!(latitude_rate(LatitudeKind::Sphere, b0, th).abs() <= 1e-15);
        let d = 1e-6;
        let slope = (latitude_rate(LatitudeKind::Sphere, b0, th + d)
            - latitude_rate(LatitudeKind::Sphere, b0, th - d))
            / (2.0 * d);
        assert!((slope - 0.75).abs() <= 1e-9, "unstable rate {slope}");

        // Hyperboloid, B0 = 2: equilibrium arcosh 2, contraction rate -3.
        let b0 = 2.0;
        let th = latitude_equilibrium(LatitudeKind::Hyperbolic, b0).unwrap();
        assert!((th - 1.3169578969248166).abs() <= 1e-12);
        let slope = (latitude_rate(LatitudeKind::Hyperbolic, b0, th + d)
            - latitude_rate(LatitudeKind::Hyperbolic, b0, th - d))
            / (2.0 * d);
        assert!((slope - (-3.0)).abs() <= 1e-8, "stable rate {slope}");

        assert!(latitude_equilibrium(LatitudeKind::Sphere, 1.5).is_none());
        assert!(latitude_equilibrium(LatitudeKind::Hyperbolic, 0.5).is_none());
    }

    #[test]
    fn latitude_ode_converges_to_the_expected_limits() {
        // Hyperboloid B0 = 2 from both sides of the stable equilibrium.
        let th_star = latitude_equilibrium(LatitudeKind::Hyperbolic, 2.0).unwrap();
        for &th0 in &[0.5, 2.5] {
            let path = latitude_ode_solve(LatitudeKind::Hyperbolic, 2.0, th0, 1e-3, 8000);
            assert!((path.last().unwrap() - th_star).abs() <= 1e-9);
        }
        // Sphere B0 = 0.5: below the unstable equilibrium, fall to the north
        // pole; above it, fall to the south pole.
        let below = latitude_ode_solve(LatitudeKind::Sphere, 0.5, 0.5, 1e-3, 20_000);
        assert!(*below.last().unwrap() <= 1e-4);
        let above = latitude_ode_solve(LatitudeKind::Sphere, 0.5, 1.2, 1e-3, 20_000);
        assert!((PI - above.last().unwrap()).abs() <= 1e-4);
        // Step-halving self-consistency.
        let coarse = latitude_ode_solve(LatitudeKind::Sphere, 0.5, 1.2, 2e-3, 1000);
        let fine = latitude_ode_solve(LatitudeKind::Sphere, 0.5, 1.2, 1e-3, 2000);
        assert!((coarse.last().unwrap() - fine.last().unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn stationary_latitude_orbits_have_small_residual() {
        // Sphere: omega = b0 / cos(theta0).
        let orbit = latitude_geodesic(LatitudeKind::Sphere, 0.5, PI / 3.0).unwrap();
        assert!((orbit.omega - 1.0).abs() <= 1e-15);
        let lp = latitude_geodesic_loop(LatitudeKind::Sphere, 0.5, PI / 3.0, 256).unwrap();
        let field = MagneticField::ConstantStrength { b0: 0.5 };
        let vel = loops::velocity(&lp);
        let tau = loops::tension(&lp);
        let mut worst = 0.0f64;
        for (i, &p) in lp.samples().iter().enumerate() {
            let z = lorentz(&SurfaceModel::Sphere, &field, p, vel[i]).unwrap();
            worst = worst.max((tau[i] - z).norm());
        }
        assert!(worst <= 2e-3, "pointwise residual {worst}");

        // Hyperboloid with a negative strength: rate flips sign.
        let orbit = latitude_geodesic(LatitudeKind::Hyperbolic, -2.0, 0.7).unwrap();
        assert!(orbit.omega < 0.0);
        let lp = latitude_geodesic_loop(LatitudeKind::Hyperbolic, -2.0, 0.7, 256).unwrap();
        let field = MagneticField::ConstantStrength { b0: -2.0 };
        let vel = loops::velocity(&lp);
        let tau = loops::tension(&lp);
        let mut worst = 0.0f64;
        for (i, &p) in lp.samples().iter().enumerate() {
            let z = lorentz(&SurfaceModel::Hyperboloid, &field, p, vel[i]).unwrap();
            worst = worst.max((tau[i] - z).norm());
        }
        assert!(worst <= 2e-2, "pointwise residual {worst}");

        assert!(matches!(
            latitude_geodesic(LatitudeKind::Sphere, 0.5, PI / 2.0),
            Err(CoreError::UndefinedRate)
        ));
    }

    #[test]
    fn plane_orbit_radius_and_stationarity() {
        let orbit = plane_circle(1.0, 0.5).unwrap();
        assert!((orbit.radius - 2.0).abs() <= 1e-15);
        assert!((orbit.circle_length - 2.0 * TAU).abs() <= 1e-12);
        assert!(matches!(plane_circle(1.0, 0.0), Err(CoreError::NoClosedOrbit)));

        for &b0 in &[0.5, -0.5, 2.0] {
            let lp = plane_circle_loop(1.0, b0, 256).unwrap();
            let field = MagneticField::ConstantStrength { b0 };
            let vel = loops::velocity(&lp);
            let tau = loops::tension(&lp);
            let mut worst = 0.0f64;
            for (i, &p) in lp.samples().iter().enumerate() {
                let z = lorentz(&SurfaceModel::Plane, &field, p, vel[i]).unwrap();
                worst = worst.max((tau[i] - z).norm());
            }
            assert!(worst <= 2e-3, "b0 = {b0}: pointwise residual {worst}");
            // Unit speed up to the sinc factor of the central difference.
            let (lo, hi) = loops::speed_stats(&lp);
            let h = lp.h();
            let expected = (b0 * h).sin().abs() / (b0.abs() * h);
            assert!((lo - expected).abs() <= 1e-12 && (hi - expected).abs() <= 1e-12);
        }
    }
}
