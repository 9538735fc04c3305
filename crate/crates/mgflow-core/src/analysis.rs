//! Diagnostics for flow runs: the geodesic residual, the energy balance, the
//! small-loop Ottarsson inequality between speed and tension, the kinetic
//! decay and maximum-principle bounds, a pointwise parabolic identity for the
//! energy density, the second variation of the energy, and classification of
//! limits.

use crate::flow::{Classification, FlowOutcome, FlowState};
use crate::loops::{self, DiscreteLoop};
use crate::surfaces::{
    self, lorentz_raw, metric_dot, project_tangent_raw, retract_raw, MagneticField,
};
use crate::{CoreError, Result, Vec3};
use alloc::format;
use alloc::vec::Vec;

const QUARTER_PI_SQ_INV: f64 = 1.0 / (4.0 * core::f64::consts::PI * core::f64::consts::PI);

/// One row of run diagnostics, written at every record boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsRecord {
    pub time: f64,
    /// `½ ∫ |γ′|²_g ds`.
    pub kinetic: f64,
    /// Potential line integral, when the field has a global potential.
    pub magnetic: Option<f64>,
    /// Accumulated `∫∫ |γ̇|² ds dt` up to this time.
    pub dissipation: f64,
    /// Accumulated `∫∫ ⟨γ̇, Z(γ′)⟩ ds dt` up to this time.
    pub flux_term: f64,
    /// `√(∫ |τ − Z(γ′)|² ds)`: L² distance from stationarity.
    pub residual_l2: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub diameter: f64,
    /// `∫ |γ′|² ds`, the speed side of the small-loop inequality.
    pub ottarsson_lhs: f64,
    /// `∫ |τ|² ds`, the tension side of the small-loop inequality.
    pub ottarsson_rhs: f64,
}

/// Compute the full diagnostics row for a state.
pub fn diagnostics_record(state: &FlowState, field: &MagneticField) -> DiagnosticsRecord {
    let lp = &state.curve;
    let surface = lp.surface();
    let h = lp.h();
    let vel = loops::velocity(lp);
    let ten = loops::tension(lp);
    let samples = lp.samples();

    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut res2 = 0.0;
    let mut smin = f64::INFINITY;
    let mut smax = 0.0f64;
    for i in 0..lp.n() {
        let p = samples[i];
        let v2 = metric_dot(surface, p, vel[i], vel[i]);
        lhs += v2;
        rhs += metric_dot(surface, p, ten[i], ten[i]);
        let r = ten[i] - lorentz_raw(surface, field, p, vel[i]);
        res2 += metric_dot(surface, p, r, r);
        let speed = crate::fp::sqrt(v2.max(0.0));
        smin = smin.min(speed);
        smax = smax.max(speed);
    }
    lhs *= h;
    rhs *= h;
    res2 *= h;

    DiagnosticsRecord {
        time: state.time,
        kinetic: 0.5 * lhs,
        magnetic: loops::magnetic_energy(lp, field),
        dissipation: state.dissipation,
        flux_term: state.magnetic_flux_term,
        residual_l2: crate::fp::sqrt(res2.max(0.0)),
        speed_min: smin,
        speed_max: smax,
        diameter: loops::diameter(lp),
        ottarsson_lhs: lhs,
        ottarsson_rhs: rhs,
    }
}

/// L² distance from stationarity, `√(Σ |τᵢ − Z(γ′ᵢ)|²_g h)`; zero to O(h²)
/// exactly on discrete stationary loops.
pub fn geodesic_residual(lp: &DiscreteLoop, field: &MagneticField) -> f64 {
    let surface = lp.surface();
    let vel = loops::velocity(lp);
    let ten = loops::tension(lp);
    let mut acc = 0.0;
    for (i, &p) in lp.samples().iter().enumerate() {
        let r = ten[i] - lorentz_raw(surface, field, p, vel[i]);
        acc += metric_dot(surface, p, r, r);
    }
    crate::fp::sqrt((acc * lp.h()).max(0.0))
}

/// Largest violation of the energy balance
/// `kinetic(t) + dissipation(t) + flux_term(t) = kinetic(0)` over a series,
/// reported as an absolute defect.
pub fn energy_identity_defect(series: &[DiagnosticsRecord], e0_kinetic: f64) -> f64 {
    let mut worst = 0.0f64;
    for rec in series {
        let defect = crate::fp::abs(rec.kinetic + rec.dissipation + rec.flux_term - e0_kinetic);
        worst = worst.max(defect);
    }
    worst
}

/// Both sides of the small-loop inequality between speed and tension, with
/// satisfaction flags for the general constant `1/4π²` and for the optimal
/// flat-torus constant `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OttarssonCheck {
    /// `∫ |γ′|² ds`.
    pub lhs: f64,
    /// `∫ |τ|² ds`.
    pub rhs: f64,
    /// `(1/4π²)·lhs ≤ rhs`.
    pub satisfied_quarter_pi2: bool,
    /// `lhs ≤ rhs` (the optimal constant on flat tori).
    pub satisfied_constant_one: bool,
}

/// Evaluate the small-loop inequality on a single loop. The inequality only
/// holds for loops inside a convexity ball; winding loops (for which the
/// tension can vanish at positive speed) violate it, which is reported, not
/// an error.
pub fn ottarsson_check(lp: &DiscreteLoop) -> OttarssonCheck {
    let surface = lp.surface();
    let h = lp.h();
    let vel = loops::velocity(lp);
    let ten = loops::tension(lp);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (i, &p) in lp.samples().iter().enumerate() {
        lhs += metric_dot(surface, p, vel[i], vel[i]);
        rhs += metric_dot(surface, p, ten[i], ten[i]);
    }
    lhs *= h;
    rhs *= h;
    OttarssonCheck {
        lhs,
        rhs,
        satisfied_quarter_pi2: QUARTER_PI_SQ_INV * lhs <= rhs,
        satisfied_constant_one: lhs <= rhs,
    }
}

/// Result of checking the kinetic decay bound
/// `∫|γ′_t|² ≤ e^{(z_sup² − constant)·(t−t₀)} · ∫|γ′_0|² + slack`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    /// Whether the small-energy hypothesis held at the initial record:
    /// diameter below the convexity radius and kinetic energy below the
    /// surface's small-energy threshold.
    pub applicable: bool,
    /// Whether the bound held at every record (evaluated regardless of
    /// applicability).
    pub holds: bool,
    /// Largest excess of the measured value over the bound.
    pub max_violation: f64,
}

/// Check the exponential kinetic decay bound along a series. `z_sup` is the
/// field's sup norm; `constant` selects the decay constant (`1/4π²` in
/// general, `1` on flat surfaces where it is optimal); `slack` absorbs
/// discretization error, conventionally `10·(dt + h²)`.
pub fn kinetic_decay_check(
    lp0: &DiscreteLoop,
    series: &[DiagnosticsRecord],
    z_sup: f64,
    constant: f64,
    slack: f64,
) -> DecayCheck {
    let applicable = loops::diameter(lp0) < surfaces::convergence_radius(lp0.surface())
        && loops::kinetic_energy(lp0) <= surfaces::small_energy_threshold(lp0.surface());
    let mut max_violation = 0.0f64;
    if let Some(first) = series.first() {
        let rate = z_sup * z_sup - constant;
        for rec in series {
            let bound = crate::fp::exp(rate * (rec.time - first.time)) * first.ottarsson_lhs;
            max_violation = max_violation.max(rec.ottarsson_lhs - (bound + slack));
        }
    }
    DecayCheck { applicable, holds: max_violation <= 0.0, max_violation }
}

/// Sup-norm residual of the parabolic identity for the energy density
/// `e = ½|γ′|²`: along the flow, `∂ₜe = Δe − |τ|² + ⟨Z(γ′), τ⟩` pointwise on
/// flat surfaces. Takes three consecutive states at evenly spaced times and
/// differences `e` centrally in time and space; O(dt² + h²) on smooth flows.
pub fn bochner1_residual(
    prev: &FlowState,
    mid: &FlowState,
    next: &FlowState,
    field: &MagneticField,
) -> Result<f64> {
    let surface = mid.curve.surface();
    let n = mid.curve.n();
    if prev.curve.surface() != surface || next.curve.surface() != surface {
        return Err(CoreError::Precondition(
            "the three states must live on the same surface".into(),
        ));
    }
    if prev.curve.n() != n || next.curve.n() != n {
        return Err(CoreError::Precondition(
            "the three states must share one sample count".into(),
        ));
    }
    let dt_a = mid.time - prev.time;
    let dt_b = next.time - mid.time;
    if !(dt_a > 0.0 && dt_b > 0.0) {
        return Err(CoreError::Precondition(
            "states must be ordered by strictly increasing time".into(),
        ));
    }
    if crate::fp::abs(dt_a - dt_b) > 1e-9 * dt_a.max(dt_b) {
        return Err(CoreError::Precondition(format!(
            "states must be evenly spaced in time (got spacings {dt_a} and {dt_b})"
        )));
    }
    let dt = 0.5 * (dt_a + dt_b);
    let h = mid.curve.h();

    let energy_density = |state: &FlowState| -> Vec<f64> {
        let vel = loops::velocity(&state.curve);
        state
            .curve
            .samples()
            .iter()
            .zip(&vel)
            .map(|(&p, &v)| 0.5 * metric_dot(state.curve.surface(), p, v, v))
            .collect()
    };
    let e_prev = energy_density(prev);
    let e_mid = energy_density(mid);
    let e_next = energy_density(next);

    let vel = loops::velocity(&mid.curve);
    let ten = loops::tension(&mid.curve);
    let samples = mid.curve.samples();
    let mut worst = 0.0f64;
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        let e_t = (e_next[i] - e_prev[i]) / (2.0 * dt);
        let lap = (e_mid[ip] - 2.0 * e_mid[i] + e_mid[im]) / (h * h);
        let p = samples[i];
        let tau2 = metric_dot(surface, p, ten[i], ten[i]);
        let ztau =
            metric_dot(surface, p, lorentz_raw(surface, field, p, vel[i]), ten[i]);
        worst = worst.max(crate::fp::abs(e_t - lap + tau2 - ztau));
    }
    Ok(worst)
}

/// A per-sample tangent vector field along a loop, the direction of a
/// variation.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationField {
    pub components: Vec<Vec3>,
}

impl VariationField {
    pub fn new(components: Vec<Vec3>) -> Self {
        VariationField { components }
    }
}

/// Second variation of the energy at `lp` in direction `eta`: the quadratic
/// form
/// `∫ (|∇η|² − K(|η|²|γ′|² − ⟨η,γ′⟩²) + ⟨(∇_η Z)(γ′), η⟩ + ⟨Z(∇η), η⟩) ds`
/// with `K` the surface curvature. Nonnegative values at a stationary loop
/// indicate stability in the direction `eta`.
pub fn second_variation(
    lp: &DiscreteLoop,
    field: &MagneticField,
    eta: &VariationField,
) -> Result<f64> {
    second_variation_bilinear(lp, field, eta, eta)
}

/// The bilinear form underlying [`second_variation`], with the derivative
/// terms on the `eta` slot. On flat surfaces with a constant field it is
/// symmetric in `(eta, zeta)` up to rounding; curvature projections break
/// exact discrete symmetry elsewhere.
pub fn second_variation_bilinear(
    lp: &DiscreteLoop,
    field: &MagneticField,
    eta: &VariationField,
    zeta: &VariationField,
) -> Result<f64> {
    let n = lp.n();
    if eta.components.len() != n || zeta.components.len() != n {
        return Err(CoreError::InvalidParameter(format!(
            "variation fields must have one vector per sample ({n}), got {} and {}",
            eta.components.len(),
            zeta.components.len()
        )));
    }
    field.validate_for(lp.surface())?;
    let surface = lp.surface();
    let h = lp.h();
    let samples = lp.samples();
    let vel = loops::velocity(lp);
    let kappa = surface.curvature();

    // Tangency defense: project both variation fields at each base point.
    let project_all = |vf: &VariationField| -> Vec<Vec3> {
        vf.components
            .iter()
            .zip(samples)
            .map(|(&v, &p)| project_tangent_raw(surface, p, v))
            .collect()
    };
    let eta_t = project_all(eta);
    let zeta_t = project_all(zeta);

    let mut acc = 0.0;
    for i in 0..n {
        let p = samples[i];
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        // Covariant derivative of the variation field: plain centered
        // difference of the ambient components, projected back.
        let grad_eta = project_tangent_raw(surface, p, (eta_t[ip] - eta_t[im]) / (2.0 * h));
        let grad_zeta = project_tangent_raw(surface, p, (zeta_t[ip] - zeta_t[im]) / (2.0 * h));

        let mut term = metric_dot(surface, p, grad_eta, grad_zeta);
        if kappa != 0.0 {
            let ee = metric_dot(surface, p, eta_t[i], zeta_t[i]);
            let vv = metric_dot(surface, p, vel[i], vel[i]);
            let ev = metric_dot(surface, p, eta_t[i], vel[i]);
            let zv = metric_dot(surface, p, zeta_t[i], vel[i]);
            term -= kappa * (ee * vv - ev * zv);
        }
        // Field derivative along eta by a centered difference at displaced,
        // re-retracted base points.
        let eps = 1e-5 * (1.0 + p.norm());
        let pp = retract_raw(surface, p + eta_t[i] * eps)?;
        let pm = retract_raw(surface, p - eta_t[i] * eps)?;
        let wp = lorentz_raw(surface, field, pp, project_tangent_raw(surface, pp, vel[i]));
        let wm = lorentz_raw(surface, field, pm, project_tangent_raw(surface, pm, vel[i]));
        let dz = project_tangent_raw(surface, p, (wp - wm) / (2.0 * eps));
        term += metric_dot(surface, p, dz, zeta_t[i]);
        term += metric_dot(surface, p, lorentz_raw(surface, field, p, grad_eta), zeta_t[i]);

        acc += term;
    }
    Ok(acc * h)
}

/// Result of the maximum-principle bound on top speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBoundCheck {
    pub holds: bool,
    /// Largest excess of `max|γ′_t|²` over the allowed envelope.
    pub max_violation: f64,
}

/// Check `max_s |γ′_t|² ≤ max_s |γ′_0|² · e^{½ z_sup² (t−t₀)} + slack` at
/// every record.
pub fn sup_bound_check(series: &[DiagnosticsRecord], z_sup: f64, slack: f64) -> SupBoundCheck {
    let mut max_violation = 0.0f64;
    if let Some(first) = series.first() {
        let m0 = first.speed_max * first.speed_max;
        for rec in series {
            let bound = m0 * crate::fp::exp(0.5 * z_sup * z_sup * (rec.time - first.time));
            let value = rec.speed_max * rec.speed_max;
            max_violation = max_violation.max(value - (bound + slack));
        }
    }
    SupBoundCheck { holds: max_violation <= 0.0, max_violation }
}

/// What a finished run converged to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    /// The loop collapsed to a point (the trivial stationary state).
    pub trivial: bool,
    /// Winding numbers of the final curve; `None` if they could not be
    /// resolved to integers (possible for diverged states).
    pub winding: Option<(i64, i64)>,
    /// Final L² residual from the last diagnostics record.
    pub residual_l2: f64,
    /// `speed_max − speed_min` at the last record; stationary loops are
    /// traversed at constant speed, so small values corroborate convergence.
    pub speed_variation: f64,
    /// Diameter at the last record.
    pub diameter: f64,
}

/// Summarize the limit of a run. Meaningful for converged outcomes; for
/// diverged or timed-out runs it reports the same fields, which then describe
/// the last recorded state rather than a limit.
pub fn classify_limit(outcome: &FlowOutcome) -> LimitReport {
    let (residual_l2, speed_variation, diameter) = match outcome.series.last() {
        Some(rec) => (rec.residual_l2, rec.speed_max - rec.speed_min, rec.diameter),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    LimitReport {
        trivial: outcome.classification == Classification::ConvergedPoint,
        winding: loops::winding(&outcome.final_state.curve).ok(),
        residual_l2,
        speed_variation,
        diameter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{latitude_geodesic_loop, LatitudeKind};
    use crate::flow::{run, FlowConfig, Stepper};
    use crate::loops::{make_loop, LoopGenerator};
    use crate::surfaces::SurfaceModel;

    const TAU: f64 = core::f64::consts::TAU;
    const PI: f64 = core::f64::consts::PI;

    fn torus() -> SurfaceModel {
        SurfaceModel::flat_torus_default()
    }

    fn straight_torus_loop(n: usize) -> DiscreteLoop {
        make_loop(&LoopGenerator::TorusGraph { mu: 0.0 }, &torus(), n, TAU).unwrap()
    }

    fn constant_torus_loop(n: usize) -> DiscreteLoop {
        let samples = alloc::vec![Vec3::planar(0.3, 1.1); n];
        DiscreteLoop::new(torus(), samples, TAU).unwrap()
    }

    #[test]
    fn residual_worked_values() {
        // Straight geodesic, no field: residual vanishes to rounding.
        let lp = straight_torus_loop(64);
        let r = geodesic_residual(&lp, &MagneticField::ConstantStrength { b0: 0.0 });
        assert!(r <= 1e-10, "straight loop residual {r}");

        // Stationary latitude orbit at matched angular rate.
        let lp = latitude_geodesic_loop(LatitudeKind::Sphere, 0.5, PI / 3.0, 256).unwrap();
        let r = geodesic_residual(&lp, &MagneticField::ConstantStrength { b0: 0.5 });
        assert!(r <= 5e-3, "latitude orbit residual {r}");

        // The surviving threshold mode is stationary at strength 1.
        let lp = make_loop(
            &LoopGenerator::FourierMode { k: 1, a: 0.5, b: -0.5 },
            &torus(),
            256,
            TAU,
        )
        .unwrap();
        let r = geodesic_residual(&lp, &MagneticField::ConstantStrength { b0: 1.0 });
        assert!(r <= 5e-3, "threshold mode residual {r}");
    }

    #[test]
    fn speed_tension_inequality_near_equality_on_small_circles() {
        // Chart circle: tension is minus the position, so both sides agree up
        // to differencing factors that vanish as h^2.
        let eps = 0.3;
        let lp = make_loop(
            &LoopGenerator::FourierMode { k: 1, a: eps, b: eps },
            &torus(),
            16384,
            TAU,
        )
        .unwrap();
        let check = ottarsson_check(&lp);
        assert!(
            (check.lhs - check.rhs).abs() <= 1e-6,
            "near-equality violated: lhs {} rhs {}",
            check.lhs,
            check.rhs
        );
        assert!(check.satisfied_constant_one && check.satisfied_quarter_pi2);
        // The discrete gap has a definite sign: the second difference damps
        // slightly less than the central difference.
        assert!(check.lhs < check.rhs);

        // Constant loop: both sides vanish.
        let check = ottarsson_check(&constant_torus_loop(64));
        assert_eq!((check.lhs, check.rhs), (0.0, 0.0));
        assert!(check.satisfied_constant_one && check.satisfied_quarter_pi2);

        // Winding geodesic: positive speed, zero tension; both constants
        // fail, which is exactly why the inequality needs the small-ball
        // hypothesis.
        let check = ottarsson_check(&straight_torus_loop(64));
        assert!(check.lhs > 1.0 && check.rhs <= 1e-20);
        assert!(!check.satisfied_constant_one && !check.satisfied_quarter_pi2);
    }

    #[test]
    fn energy_defect_is_algebraically_exact_on_synthetic_series() {
        let mk = |kinetic: f64, dissipation: f64, flux_term: f64| DiagnosticsRecord {
            time: 0.0,
            kinetic,
            magnetic: None,
            dissipation,
            flux_term,
            residual_l2: 0.0,
            speed_min: 0.0,
            speed_max: 0.0,
            diameter: 0.0,
            ottarsson_lhs: 0.0,
            ottarsson_rhs: 0.0,
        };
        let series = [mk(1.0, 0.0, 0.0), mk(0.7, 0.2, 0.1), mk(0.5, 0.4, 0.2)];
        assert!((energy_identity_defect(&series, 1.0) - 0.1).abs() <= 1e-15);
        // With a larger initial energy the worst row is now the first.
        assert!((energy_identity_defect(&series, 1.1) - 0.1).abs() <= 1e-15);
    }

    #[test]
    fn decay_bound_applies_to_small_loops_and_holds_on_runs() {
        // Small mode circle: gate satisfied, measured decay e^{-3t} well
        // under the certified envelope e^{-0.75t}.
        let eps = 0.05;
        let lp = make_loop(
            &LoopGenerator::FourierMode { k: 1, a: eps, b: eps },
            &torus(),
            64,
            TAU,
        )
        .unwrap();
        let field = MagneticField::ConstantStrength { b0: 0.5 };
        let config = FlowConfig { t_max: 2.0, tol_point: 1e-6, ..FlowConfig::default() };
        let h = lp.h();
        let dt = crate::flow::stable_dt(&lp, 0.9);
        let lp0 = lp.clone();
        let outcome = run(lp, &field, &config).unwrap();
        let slack = 10.0 * (dt + h * h);
        let check = kinetic_decay_check(&lp0, &outcome.series, field.sup_norm(), 1.0, slack);
        assert!(check.applicable, "small circle must pass the gate");
        assert!(check.holds, "violation {}", check.max_violation);

        // Pure heat flow obeys the fieldless envelope too.
        let lp = make_loop(
            &LoopGenerator::FourierMode { k: 1, a: eps, b: eps },
            &torus(),
            64,
            TAU,
        )
        .unwrap();
        let lp0 = lp.clone();
        let field0 = MagneticField::ConstantStrength { b0: 0.0 };
        let outcome = run(lp, &field0, &config).unwrap();
        let check = kinetic_decay_check(&lp0, &outcome.series, 0.0, 1.0, slack);
        assert!(check.applicable && check.holds);

        // A big latitude orbit fails the small-energy gate (its energy is
        // constant, so no decay should be asserted).
        let lp = latitude_geodesic_loop(LatitudeKind::Sphere, 0.5, PI / 3.0, 64).unwrap();
        let rec_state = FlowState::new(lp.clone());
        let series = [diagnostics_record(&rec_state, &field)];
        let check = kinetic_decay_check(&lp, &series, field.sup_norm(), QUARTER_PI_SQ_INV, slack);
        assert!(!check.applicable, "large orbit must fail the hypothesis gate");
    }

    #[test]
    fn parabolic_identity_residual_vanishes_on_stationary_states() {
        // Exactly stationary discrete state: every term is identically zero.
        let field = MagneticField::ConstantStrength { b0: 0.0 };
        let mk = |time: f64, lp: &DiscreteLoop| {
            let mut st = FlowState::new(lp.clone());
            st.time = time;
            st
        };
        let lp = straight_torus_loop(64);
        let r = bochner1_residual(&mk(0.0, &lp), &mk(0.1, &lp), &mk(0.2, &lp), &field).unwrap();
        assert!(r <= 1e-12, "straight-line residual {r}");

        let lp = constant_torus_loop(64);
        let r = bochner1_residual(&mk(0.0, &lp), &mk(0.1, &lp), &mk(0.2, &lp), &field).unwrap();
        assert_eq!(r, 0.0);

        // Uneven spacing and mismatched grids are rejected.
        let a = mk(0.0, &lp);
        let b = mk(0.1, &lp);
        let c = mk(0.3, &lp);
        assert!(matches!(
            bochner1_residual(&a, &b, &c, &field),
            Err(CoreError::Precondition(_))
        ));
        let other = mk(0.2, &straight_torus_loop(128));
        assert!(matches!(
            bochner1_residual(&a, &b, &other, &field),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn parabolic_identity_residual_is_small_along_a_real_run() {
        // Three consecutive integrator states on a decaying mode.
        let lp = make_loop(&LoopGenerator::FourierMode { k: 1, a: 0.4, b: 0.1 }, &torus(), 128, TAU)
            .unwrap();
        let field = MagneticField::ConstantStrength { b0: 0.5 };
        let dt = crate::flow::stable_dt(&lp, 0.9);
        let h = lp.h();
        let mut state = FlowState::new(lp);
        let mut stepper = Stepper::new(&state.curve, field.clone(), dt).unwrap();
        let prev = state.clone();
        stepper.step(&mut state).unwrap();
        let mid = state.clone();
        stepper.step(&mut state).unwrap();
        let r = bochner1_residual(&prev, &mid, &state, &field).unwrap();
        assert!(r <= 10.0 * h * h, "run residual {r} vs h^2 scale {}", h * h);
    }

    #[test]
    fn second_variation_worked_values() {
        let n = 256;
        let h = TAU / n as f64;
        let shat = h.sin() / h;

        // Constant loop, eta = (cos s, 0): only the gradient term survives,
        // giving pi times the squared differencing factor.
        let lp = constant_torus_loop(n);
        let eta = VariationField::new(
            (0..n).map(|i| Vec3::planar((TAU * i as f64 / n as f64).cos(), 0.0)).collect(),
        );
        let field = MagneticField::ConstantStrength { b0: 0.8 };
        let got = second_variation(&lp, &field, &eta).unwrap();
        assert!((got - PI * shat * shat).abs() <= 1e-12, "got {got}");
        assert!((got - PI).abs() <= 1e-3);

        // Constant loop, constant field direction: everything vanishes.
        let eta = VariationField::new(alloc::vec![Vec3::planar(0.7, -0.2); n]);
        let got = second_variation(&lp, &field, &eta).unwrap();
        assert!(got.abs() <= 1e-15, "got {got}");

        // Great circle on the sphere, no field, eta the polar axis: the
        // curvature term gives -2 pi (the classical instability of closed
        // geodesics on positively curved surfaces).
        let equator = make_loop(
            &LoopGenerator::SphereLatitude { theta0: PI / 2.0 },
            &SurfaceModel::Sphere,
            n,
            TAU,
        )
        .unwrap();
        let eta = VariationField::new(alloc::vec![Vec3::new(0.0, 0.0, 1.0); n]);
        let field0 = MagneticField::ConstantStrength { b0: 0.0 };
        let got = second_variation(&equator, &field0, &eta).unwrap();
        assert!((got + TAU * shat * shat).abs() <= 1e-12, "got {got}");
        assert!((got + TAU).abs() <= 2e-2);

        // Winding torus geodesic with a rotating variation: the gradient and
        // field terms combine to 2 pi (s-hat^2 + B0 s-hat), exactly in the
        // discrete scheme.
        let lp = straight_torus_loop(n);
        let eta = VariationField::new(
            (0..n)
                .map(|i| {
                    let s = TAU * i as f64 / n as f64;
                    Vec3::planar(s.cos(), s.sin())
                })
                .collect(),
        );
        let b0 = 0.8;
        let field = MagneticField::ConstantStrength { b0 };
        let got = second_variation(&lp, &field, &eta).unwrap();
        let want = TAU * (shat * shat + b0 * shat);
        assert!((got - want).abs() <= 1e-12, "got {got}, want {want}");

        // Quadratic form: flipping the sign of eta cannot change the value.
        let flipped = VariationField::new(eta.components.iter().map(|v| -*v).collect());
        let got_flipped = second_variation(&lp, &field, &flipped).unwrap();
        assert!((got - got_flipped).abs() <= 1e-12);
    }

    #[test]
    fn top_speed_bound_holds_for_heat_flow_and_synthetic_series() {
        // Pure heat flow: top speed decays, the envelope is flat.
        let lp = make_loop(&LoopGenerator::FourierMode { k: 1, a: 0.5, b: 0.2 }, &torus(), 64, TAU)
            .unwrap();
        let field = MagneticField::ConstantStrength { b0: 0.0 };
        let config = FlowConfig { t_max: 1.0, tol_point: 1e-9, ..FlowConfig::default() };
        let outcome = run(lp, &field, &config).unwrap();
        let check = sup_bound_check(&outcome.series, 0.0, 1e-9);
        assert!(check.holds, "violation {}", check.max_violation);

        // Synthetic series that outruns the envelope.
        let mk = |time: f64, speed_max: f64| DiagnosticsRecord {
            time,
            kinetic: 0.0,
            magnetic: None,
            dissipation: 0.0,
            flux_term: 0.0,
            residual_l2: 0.0,
            speed_min: 0.0,
            speed_max,
            diameter: 0.0,
            ottarsson_lhs: 0.0,
            ottarsson_rhs: 0.0,
        };
        let series = [mk(0.0, 1.0), mk(1.0, 10.0)];
        let check = sup_bound_check(&series, 1.0, 0.0);
        assert!(!check.holds);
        // Violation is 100 - e^{0.5}.
        assert!((check.max_violation - (100.0 - 0.5f64.exp())).abs() <= 1e-12);
    }

    #[test]
    fn limit_reports_describe_converged_runs() {
        // Collapse to a point. Keep the point tolerance above the residual
        // tolerance so the diameter rule fires before the shrinking circle's
        // residual does.
        let lp = make_loop(
            &LoopGenerator::PlaneCircle { radius: 0.05, center: (1.0, 2.0) },
            &SurfaceModel::Plane,
            64,
            TAU,
        )
        .unwrap();
        let field = MagneticField::ConstantStrength { b0: 0.5 };
        let config = FlowConfig { tol_point: 1e-2, ..FlowConfig::default() };
        let outcome = run(lp, &field, &config).unwrap();
        let report = classify_limit(&outcome);
        assert!(report.trivial);
        assert_eq!(report.winding, Some((0, 0)));
        assert!(report.diameter <= 1e-2);

        // Nontrivial stationary mode at the threshold strength. The grid must
        // be fine enough that the surviving rotating component's discrete
        // decay rate (~ h^2/12) leaves a residual plateau below the stop
        // tolerance.
        let lp = make_loop(&LoopGenerator::FourierMode { k: 1, a: 2.0, b: 1.0 }, &torus(), 256, TAU)
            .unwrap();
        let field = MagneticField::ConstantStrength { b0: 1.0 };
        let config = FlowConfig { tol_residual: 2e-4, t_max: 60.0, ..FlowConfig::default() };
        let outcome = run(lp, &field, &config).unwrap();
        assert_eq!(outcome.classification, Classification::ConvergedNontrivial);
        let report = classify_limit(&outcome);
        assert!(!report.trivial);
        assert_eq!(report.winding, Some((0, 0)));
        assert!(report.residual_l2 <= 2e-4);
        assert!(report.speed_variation <= 1e-4, "variation {}", report.speed_variation);
    }
}
