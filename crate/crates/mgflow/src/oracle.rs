//! Closed-form reference output: sampled analytic solutions and the 1-D
//! latitude ODE series, rendered as CSV for external comparison against
//! simulator artifacts.

use mgflow_core::analytic::{
    latitude_geodesic_loop, latitude_ode_solve, plane_circle_loop, torus_drift_loop,
    torus_mode_loop, LatitudeKind, TorusModeParams,
};

use crate::artifacts::{fmt_f64, loop_csv};

const TAU: f64 = std::f64::consts::TAU;

/// Parameters accepted by `mgflow oracle`; each case reads the subset it
/// needs and rejects requests with missing required options.
#[derive(Debug, Clone, Default)]
pub struct OracleParams {
    pub k: Option<i64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub b0: Option<f64>,
    pub mu: Option<f64>,
    pub theta0: Option<f64>,
    pub speed: Option<f64>,
    pub t: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub n: Option<usize>,
    pub geometry: Option<String>,
    pub circle_length: Option<f64>,
}

const CASES: &str =
    "torus-mode, torus-drift, sphere-theta, hyperbolic-theta, latitude-geodesic, plane-circle";

fn require<T: Copy>(case: &str, flag: &str, value: Option<T>) -> Result<T, String> {
    value.ok_or_else(|| format!("oracle case {case:?} requires --{flag}"))
}

fn theta_series_csv(kind: LatitudeKind, p: &OracleParams, case: &str) -> Result<String, String> {
    let b0 = require(case, "b0", p.b0)?;
    let theta0 = require(case, "theta0", p.theta0)?;
    let dt = p.dt.unwrap_or(1e-3);
    let t_end = p.t_end.unwrap_or(10.0);
    if !(dt.is_finite() && dt > 0.0 && t_end.is_finite() && t_end > 0.0) {
        return Err(format!("oracle case {case:?}: --dt and --t-end must be positive"));
    }
    let steps = (t_end / dt).ceil() as usize;
    let thetas = latitude_ode_solve(kind, b0, theta0, dt, steps);
    let mut out = String::from("t,theta\n");
    for (i, theta) in thetas.iter().enumerate() {
        out.push_str(&fmt_f64(i as f64 * dt));
        out.push(',');
        out.push_str(&fmt_f64(*theta));
        out.push('\n');
    }
    Ok(out)
}

/// Render the requested closed form as CSV text.
pub fn oracle_csv(case: &str, p: &OracleParams) -> Result<String, String> {
    let n = p.n.unwrap_or(256);
    match case {
        "torus-mode" => {
            let params = TorusModeParams {
                k: require(case, "k", p.k)?,
                a: require(case, "a", p.a)?,
                b: require(case, "b", p.b)?,
                b0: require(case, "b0", p.b0)?,
            };
            let t = p.t.unwrap_or(0.0);
            let circle_length = p.circle_length.unwrap_or(TAU);
            let lp = torus_mode_loop(&params, t, n, circle_length).map_err(|e| e.to_string())?;
            Ok(loop_csv(&lp))
        }
        "torus-drift" => {
            let mu = require(case, "mu", p.mu)?;
            let b0 = require(case, "b0", p.b0)?;
            let t = p.t.unwrap_or(0.0);
            let lp = torus_drift_loop(mu, b0, t, n).map_err(|e| e.to_string())?;
            Ok(loop_csv(&lp))
        }
        "sphere-theta" => theta_series_csv(LatitudeKind::Sphere, p, case),
        "hyperbolic-theta" => theta_series_csv(LatitudeKind::Hyperbolic, p, case),
        "latitude-geodesic" => {
            let geometry = p
                .geometry
                .as_deref()
                .ok_or_else(|| format!("oracle case {case:?} requires --geometry"))?;
            let kind = match geometry {
                "sphere" => LatitudeKind::Sphere,
                "hyperbolic" | "hyperboloid" => LatitudeKind::Hyperbolic,
                other => {
                    return Err(format!(
                        "oracle case {case:?}: unknown geometry {other:?} (expected sphere or \
                         hyperbolic)"
                    ))
                }
            };
            let b0 = require(case, "b0", p.b0)?;
            let theta0 = require(case, "theta0", p.theta0)?;
            let lp = latitude_geodesic_loop(kind, b0, theta0, n).map_err(|e| e.to_string())?;
            Ok(loop_csv(&lp))
        }
        "plane-circle" => {
            let b0 = require(case, "b0", p.b0)?;
            let speed = p.speed.unwrap_or(1.0);
            let lp = plane_circle_loop(speed, b0, n).map_err(|e| e.to_string())?;
            Ok(loop_csv(&lp))
        }
        other => Err(format!("unknown oracle case {other:?} (expected one of {CASES})")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_mode_emits_a_chart_loop() {
        let params = OracleParams {
            k: Some(1),
            a: Some(1.0),
            b: Some(1.0),
            b0: Some(0.5),
            n: Some(16),
            ..Default::default()
        };
        let text = oracle_csv("torus-mode", &params).unwrap();
        assert!(text.starts_with("s,x1,x2\n"));
        assert_eq!(text.lines().count(), 17);
    }

    #[test]
    fn theta_series_has_matching_step_count() {
        let params = OracleParams {
            b0: Some(0.5),
            theta0: Some(0.5),
            dt: Some(0.1),
            t_end: Some(1.0),
            ..Default::default()
        };
        let text = oracle_csv("sphere-theta", &params).unwrap();
        assert!(text.starts_with("t,theta\n"));
        assert_eq!(text.lines().count(), 12);
        let last = text.lines().last().unwrap();
        let theta: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
        assert!(theta < 0.5, "attracted toward the pole for B0 = 0.5: {theta}");
    }

    #[test]
    fn latitude_geodesic_needs_geometry() {
        let params =
            OracleParams { b0: Some(2.0), theta0: Some(0.9), n: Some(16), ..Default::default() };
        assert!(oracle_csv("latitude-geodesic", &params).unwrap_err().contains("--geometry"));
        let with_geom =
            OracleParams { geometry: Some("hyperbolic".to_string()), ..params };
        let text = oracle_csv("latitude-geodesic", &with_geom).unwrap();
        assert!(text.starts_with("s,x1,x2,x3\n"));
    }

    #[test]
    fn unknown_case_and_missing_params_are_rejected() {
        assert!(oracle_csv("torus-spiral", &OracleParams::default())
            .unwrap_err()
            .contains("unknown oracle case"));
        assert!(oracle_csv("torus-mode", &OracleParams::default())
            .unwrap_err()
            .contains("requires --k"));
        assert!(oracle_csv("plane-circle", &OracleParams::default())
            .unwrap_err()
            .contains("requires --b0"));
    }
}
