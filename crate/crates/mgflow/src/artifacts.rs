//! On-disk artifact formats: the diagnostics CSV, loop-sample CSVs, the run
//! manifest, and integrator checkpoints. All floats are written with 17
//! significant digits so every value round-trips bit-exactly, and every CSV
//! carries a header row.

use std::fs;
use std::io;
use std::path::Path;

use mgflow_core::analysis::DiagnosticsRecord;
use mgflow_core::flow::{Classification, FlowState};
use mgflow_core::loops::DiscreteLoop;
use serde::{Deserialize, Serialize};

/// 17-significant-digit float formatting (`d.dddddddddddddddde±exp`).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column order of `diagnostics.csv`.
pub const DIAGNOSTICS_HEADER: &str = "time,kinetic,magnetic,dissipation,flux_term,residual_l2,\
                                      speed_min,speed_max,diameter,ottarsson_lhs,ottarsson_rhs";

/// One diagnostics row; `magnetic` prints as `NA` when the field has no
/// global potential.
pub fn diagnostics_row(rec: &DiagnosticsRecord) -> String {
    let magnetic = match rec.magnetic {
        Some(m) => fmt_f64(m),
        None => "NA".to_string(),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        fmt_f64(rec.time),
        fmt_f64(rec.kinetic),
        magnetic,
        fmt_f64(rec.dissipation),
        fmt_f64(rec.flux_term),
        fmt_f64(rec.residual_l2),
        fmt_f64(rec.speed_min),
        fmt_f64(rec.speed_max),
        fmt_f64(rec.diameter),
        fmt_f64(rec.ottarsson_lhs),
        fmt_f64(rec.ottarsson_rhs),
    )
}

/// Loop samples as CSV: `s,x1,x2` in chart coordinates for the flat models
/// (torus samples wrapped into the fundamental domain), `s,x1,x2,x3` in
/// ambient coordinates for the sphere and hyperboloid.
pub fn loop_csv(lp: &DiscreteLoop) -> String {
    let h = lp.h();
    let mut out = String::new();
    if lp.surface().coord_dim() == 2 {
        out.push_str("s,x1,x2\n");
        for (i, p) in lp.wrapped_samples().iter().enumerate() {
            out.push_str(&fmt_f64(i as f64 * h));
            out.push(',');
            out.push_str(&fmt_f64(p.x));
            out.push(',');
            out.push_str(&fmt_f64(p.y));
            out.push('\n');
        }
    } else {
        out.push_str("s,x1,x2,x3\n");
        for (i, p) in lp.samples().iter().enumerate() {
            out.push_str(&fmt_f64(i as f64 * h));
            out.push(',');
            out.push_str(&fmt_f64(p.x));
            out.push(',');
            out.push_str(&fmt_f64(p.y));
            out.push(',');
            out.push_str(&fmt_f64(p.z));
            out.push('\n');
        }
    }
    out
}

/// Write [`loop_csv`] to a file.
pub fn write_loop_csv(path: &Path, lp: &DiscreteLoop) -> io::Result<()> {
    fs::write(path, loop_csv(lp))
}

/// Stable snake_case name of a classification (matches its serde tag).
pub fn classification_str(c: Classification) -> &'static str {
    match c {
        Classification::ConvergedPoint => "converged_point",
        Classification::ConvergedNontrivial => "converged_nontrivial",
        Classification::Diverged => "diverged",
        Classification::Timeout => "timeout",
    }
}

/// Parse a classification name; accepts the snake_case tag and the bare
/// variant name in any case.
pub fn parse_classification(s: &str) -> Option<Classification> {
    let key: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
    match key.as_str() {
        "convergedpoint" | "point" => Some(Classification::ConvergedPoint),
        "convergednontrivial" | "nontrivial" => Some(Classification::ConvergedNontrivial),
        "diverged" => Some(Classification::Diverged),
        "timeout" => Some(Classification::Timeout),
        _ => None,
    }
}

/// Artifact paths inside the output directory, as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactPaths {
    pub diagnostics: String,
    pub final_loop: String,
    pub snapshots: Vec<String>,
    pub checkpoint: String,
}

/// Final-record summary embedded in the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalSummary {
    pub time: f64,
    pub kinetic: f64,
    pub residual_l2: f64,
    pub diameter: f64,
    pub speed_max: f64,
}

impl FinalSummary {
    pub fn from_record(rec: &DiagnosticsRecord) -> Self {
        FinalSummary {
            time: rec.time,
            kinetic: rec.kinetic,
            residual_l2: rec.residual_l2,
            diameter: rec.diameter,
            speed_max: rec.speed_max,
        }
    }
}

/// `manifest.json`: what a run produced and how it ended. Every listed path
/// is relative to the output directory and exists when the run succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// FNV-1a hash of the full canonical config.
    pub config_hash: String,
    /// FNV-1a hash of the trajectory-determining config blocks.
    pub physics_hash: String,
    pub classification: Classification,
    pub wall_seconds: f64,
    pub artifacts: ArtifactPaths,
    #[serde(rename = "final")]
    pub final_summary: FinalSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup: Option<String>,
}

/// Checkpoint format discriminator.
pub const CHECKPOINT_FORMAT: &str = "mgflow-state-v1";

/// `checkpoint.json`: a serialized [`FlowState`] plus enough bookkeeping to
/// resume. JSON float serialization is shortest-round-trip, so the resumed
/// state is bit-identical to the saved one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Always [`CHECKPOINT_FORMAT`].
    pub format: String,
    /// [`physics_hash`](crate::config::ScenarioConfig::physics_hash) of the
    /// generating config; resuming under different physics is refused.
    pub physics_hash: String,
    /// Diagnostics rows (including the initial record) already on disk for
    /// this trajectory.
    pub records_written: usize,
    pub state: FlowState,
}

/// Serialize a value as pretty JSON with a trailing newline.
pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Read and shape-check a checkpoint file.
pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read checkpoint {}: {e}", path.display()))?;
    let cp: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| format!("cannot parse checkpoint {}: {e}", path.display()))?;
    if cp.format != CHECKPOINT_FORMAT {
        return Err(format!(
            "checkpoint {} has format {:?}, expected {CHECKPOINT_FORMAT:?}",
            path.display(),
            cp.format
        ));
    }
    Ok(cp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mgflow_core::flow::FlowState;
    use mgflow_core::loops::{make_loop, LoopGenerator};
    use mgflow_core::surfaces::SurfaceModel;

    const TAU: f64 = std::f64::consts::TAU;

    #[test]
    fn float_formatting_round_trips_exactly() {
        for x in [0.1, -1.0 / 3.0, 1e-300, std::f64::consts::PI, 4.9e-324, 0.0, -2.5e17] {
            let printed = fmt_f64(x);
            assert_eq!(printed.parse::<f64>().unwrap(), x, "{printed}");
        }
    }

    #[test]
    fn diagnostics_row_matches_header_arity() {
        let rec = DiagnosticsRecord {
            time: 0.5,
            kinetic: 1.0,
            magnetic: None,
            dissipation: 0.25,
            flux_term: -0.1,
            residual_l2: 1e-3,
            speed_min: 0.9,
            speed_max: 1.1,
            diameter: 2.0,
            ottarsson_lhs: 2.0,
            ottarsson_rhs: 2.1,
        };
        let row = diagnostics_row(&rec);
        assert_eq!(row.split(',').count(), DIAGNOSTICS_HEADER.split(',').count());
        assert!(row.contains(",NA,"));
        let with_potential = DiagnosticsRecord { magnetic: Some(0.75), ..rec };
        assert!(!diagnostics_row(&with_potential).contains("NA"));
    }

    #[test]
    fn torus_loop_csv_wraps_into_fundamental_domain() {
        let lp = make_loop(
            &LoopGenerator::FourierMode { k: 1, a: 2.0, b: 1.0 },
            &SurfaceModel::flat_torus_default(),
            8,
            TAU,
        )
        .unwrap();
        let text = loop_csv(&lp);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("s,x1,x2"));
        assert_eq!(lines.count(), 8);
        for line in text.lines().skip(1) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert!((0.0..TAU).contains(&cols[1]), "{line}");
            assert!((0.0..TAU).contains(&cols[2]), "{line}");
        }
    }

    #[test]
    fn ambient_loop_csv_has_four_columns() {
        let lp = make_loop(
            &LoopGenerator::SphereLatitude { theta0: 1.0 },
            &SurfaceModel::Sphere,
            8,
            TAU,
        )
        .unwrap();
        let text = loop_csv(&lp);
        assert!(text.starts_with("s,x1,x2,x3\n"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn classification_names_round_trip() {
        for c in [
            Classification::ConvergedPoint,
            Classification::ConvergedNontrivial,
            Classification::Diverged,
            Classification::Timeout,
        ] {
            assert_eq!(parse_classification(classification_str(c)), Some(c));
            assert_eq!(
                serde_json::to_value(c).unwrap().as_str().unwrap(),
                classification_str(c)
            );
        }
        assert_eq!(parse_classification("ConvergedPoint"), Some(Classification::ConvergedPoint));
        assert_eq!(parse_classification("sideways"), None);
    }

    #[test]
    fn checkpoint_round_trips_states_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let lp = make_loop(
            &LoopGenerator::FourierMode { k: 1, a: 0.3, b: 0.7 },
            &SurfaceModel::flat_torus_default(),
            16,
            TAU,
        )
        .unwrap();
        let state = FlowState {
            curve: lp,
            time: 0.1 + 0.2,
            dissipation: 1.0 / 3.0,
            magnetic_flux_term: -1e-17,
        };
        let cp = Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            physics_hash: "0123456789abcdef".to_string(),
            records_written: 7,
            state,
        };
        let path = dir.path().join("checkpoint.json");
        write_json_pretty(&path, &cp).unwrap();
        let back = read_checkpoint(&path).unwrap();
        assert_eq!(back, cp);
    }

    #[test]
    fn checkpoint_format_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("checkpoint.json");
        let lp = make_loop(
            &LoopGenerator::PlaneCircle { radius: 1.0, center: (0.0, 0.0) },
            &SurfaceModel::Plane,
            8,
            TAU,
        )
        .unwrap();
        let cp = Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            physics_hash: "x".to_string(),
            records_written: 0,
            state: FlowState::new(lp),
        };
        let text = serde_json::to_string(&cp).unwrap().replace(CHECKPOINT_FORMAT, "mgflow-state-v0");
        std::fs::write(&path, text).unwrap();
        let err = read_checkpoint(&path).unwrap_err();
        assert!(err.contains("mgflow-state-v0"), "{err}");
    }
}
