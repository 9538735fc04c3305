//! JSON scenario configuration: schema, validation that reports every
//! violation with a dotted field path, conversion to the core types, and
//! stable content hashes for manifests and checkpoints.

use std::fmt;
use std::path::Path;

use mgflow_core::flow::{DtPolicy, FlowConfig};
use mgflow_core::loops::{make_loop, DiscreteLoop, LoopGenerator, MIN_SAMPLES};
use mgflow_core::surfaces::{MagneticField, SurfaceModel};
use mgflow_core::Vec3;
use serde::{Deserialize, Serialize};

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

fn default_periods() -> (f64, f64) {
    (TAU, TAU)
}

fn default_circle_length() -> f64 {
    TAU
}

fn default_safety() -> f64 {
    0.9
}

fn default_t_max() -> f64 {
    50.0
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_divergence_threshold() -> f64 {
    1e6
}

fn default_record_stride() -> usize {
    100
}

fn default_output_stride() -> usize {
    10
}

fn default_formats() -> Vec<String> {
    vec!["csv".to_string()]
}

/// A complete scenario: what to integrate, how, and where the artifacts go.
///
/// The JSON layout mirrors the struct layout; enum blocks are tagged by a
/// `"kind"` field in `snake_case` (e.g. `{"kind": "flat_torus"}`). Parsing
/// and re-serializing a config reproduces an equal value (round-trip
/// equality), so hashes computed from the canonical serialization are stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub surface: SurfaceBlock,
    pub field: FieldBlock,
    pub initial: InitialBlock,
    pub discretization: DiscretizationBlock,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Target geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceBlock {
    Plane,
    FlatTorus {
        #[serde(default = "default_periods")]
        periods: (f64, f64),
    },
    Sphere,
    Hyperboloid,
}

/// Magnetic field family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldBlock {
    ConstantStrength { b0: f64 },
    ExactPotential { epsilon: f64 },
}

/// Initial loop: a generator family plus the parameter circle length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    pub generator: GeneratorBlock,
    #[serde(default = "default_circle_length")]
    pub circle_length: f64,
}

/// Initial-loop families, mirroring [`LoopGenerator`]. Explicit samples are
/// given as `[x1, x2, x3]` triples; chart surfaces (plane, torus) use the
/// first two entries and require the third to be zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorBlock {
    FourierMode { k: i64, a: f64, b: f64 },
    TorusGraph { mu: f64 },
    SphereLatitude { theta0: f64 },
    HyperbolicLatitude { theta0: f64 },
    PlaneCircle { radius: f64, center: (f64, f64) },
    ExplicitSamples { samples: Vec<[f64; 3]> },
}

/// Sample count and time-step policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationBlock {
    pub n: usize,
    #[serde(default)]
    pub dt_policy: DtPolicyBlock,
}

/// Time-step choice, mirroring [`DtPolicy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DtPolicyBlock {
    FixedCfl {
        #[serde(default = "default_safety")]
        safety: f64,
    },
    Explicit {
        dt: f64,
    },
}

impl Default for DtPolicyBlock {
    fn default() -> Self {
        DtPolicyBlock::FixedCfl { safety: default_safety() }
    }
}

/// Stopping parameters and record cadence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_tolerance")]
    pub tol_residual: f64,
    #[serde(default = "default_tolerance")]
    pub tol_point: f64,
    #[serde(default = "default_divergence_threshold")]
    pub divergence_threshold: f64,
    #[serde(default = "default_record_stride")]
    pub record_stride: usize,
}

impl Default for RunBlock {
    fn default() -> Self {
        RunBlock {
            t_max: default_t_max(),
            tol_residual: default_tolerance(),
            tol_point: default_tolerance(),
            divergence_threshold: default_divergence_threshold(),
            record_stride: default_record_stride(),
        }
    }
}

/// Artifact destination and cadence. `stride` counts diagnostics records
/// between loop snapshots (snapshot written at records 0, stride, 2·stride…).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Output directory; the CLI `--out` flag overrides it.
    #[serde(default)]
    pub directory: Option<String>,
    #[serde(default = "default_output_stride")]
    pub stride: usize,
    /// Data-artifact formats; only `"csv"` is supported.
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { directory: None, stride: default_output_stride(), formats: default_formats() }
    }
}

impl SurfaceBlock {
    pub fn to_core(&self) -> SurfaceModel {
        match self {
            SurfaceBlock::Plane => SurfaceModel::Plane,
            SurfaceBlock::FlatTorus { periods } => SurfaceModel::FlatTorus { periods: *periods },
            SurfaceBlock::Sphere => SurfaceModel::Sphere,
            SurfaceBlock::Hyperboloid => SurfaceModel::Hyperboloid,
        }
    }
}

impl FieldBlock {
    pub fn to_core(&self) -> MagneticField {
        match self {
            FieldBlock::ConstantStrength { b0 } => MagneticField::ConstantStrength { b0: *b0 },
            FieldBlock::ExactPotential { epsilon } => {
                MagneticField::ExactPotential { epsilon: *epsilon }
            }
        }
    }
}

impl GeneratorBlock {
    pub fn to_core(&self) -> LoopGenerator {
        match self {
            GeneratorBlock::FourierMode { k, a, b } => {
                LoopGenerator::FourierMode { k: *k, a: *a, b: *b }
            }
            GeneratorBlock::TorusGraph { mu } => LoopGenerator::TorusGraph { mu: *mu },
            GeneratorBlock::SphereLatitude { theta0 } => {
                LoopGenerator::SphereLatitude { theta0: *theta0 }
            }
            GeneratorBlock::HyperbolicLatitude { theta0 } => {
                LoopGenerator::HyperbolicLatitude { theta0: *theta0 }
            }
            GeneratorBlock::PlaneCircle { radius, center } => {
                LoopGenerator::PlaneCircle { radius: *radius, center: *center }
            }
            GeneratorBlock::ExplicitSamples { samples } => LoopGenerator::ExplicitSamples {
                samples: samples.iter().map(|s| Vec3::new(s[0], s[1], s[2])).collect(),
            },
        }
    }
}

impl DtPolicyBlock {
    pub fn to_core(&self) -> DtPolicy {
        match self {
            DtPolicyBlock::FixedCfl { safety } => DtPolicy::FixedCfl { safety: *safety },
            DtPolicyBlock::Explicit { dt } => DtPolicy::Explicit { dt: *dt },
        }
    }
}

impl ScenarioConfig {
    pub fn surface(&self) -> SurfaceModel {
        self.surface.to_core()
    }

    pub fn field(&self) -> MagneticField {
        self.field.to_core()
    }

    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            dt_policy: self.discretization.dt_policy.to_core(),
            t_max: self.run.t_max,
            tol_residual: self.run.tol_residual,
            tol_point: self.run.tol_point,
            divergence_threshold: self.run.divergence_threshold,
            record_stride: self.run.record_stride,
        }
    }

    /// Build the configured initial loop (construction re-checks closure and
    /// on-surface constraints beyond what [`validate`](Self::validate) can
    /// see statically).
    pub fn initial_loop(&self) -> mgflow_core::Result<DiscreteLoop> {
        make_loop(
            &self.initial.generator.to_core(),
            &self.surface(),
            self.discretization.n,
            self.initial.circle_length,
        )
    }

    /// Collect every violation as a `path: message` line; an empty result
    /// means the configuration is accepted.
    pub fn validate(&self) -> Vec<String> {
        let mut errs: Vec<String> = Vec::new();
        self.validate_surface(&mut errs);
        self.validate_field(&mut errs);
        self.validate_initial(&mut errs);
        self.validate_discretization(&mut errs);
        self.validate_run(&mut errs);
        self.validate_output(&mut errs);
        errs
    }

    fn validate_surface(&self, errs: &mut Vec<String>) {
        if let SurfaceBlock::FlatTorus { periods } = &self.surface {
            let ok = |p: f64| p.is_finite() && p > 0.0;
            if !(ok(periods.0) && ok(periods.1)) {
                errs.push(format!(
                    "surface.periods: both periods must be positive and finite (got ({}, {}))",
                    periods.0, periods.1
                ));
            }
        }
    }

    fn validate_field(&self, errs: &mut Vec<String>) {
        match &self.field {
            FieldBlock::ConstantStrength { b0 } => {
                if !b0.is_finite() {
                    errs.push(format!("field.b0: must be finite (got {b0})"));
                }
            }
            FieldBlock::ExactPotential { epsilon } => {
                if !epsilon.is_finite() {
                    errs.push(format!("field.epsilon: must be finite (got {epsilon})"));
                }
                let on_standard_torus = matches!(
                    &self.surface,
                    SurfaceBlock::FlatTorus { periods }
                        if (periods.0 - TAU).abs() <= 1e-12 && (periods.1 - TAU).abs() <= 1e-12
                );
                if !on_standard_torus {
                    errs.push(
                        "field.kind: the exact potential field requires surface.kind = \
                         flat_torus with periods (2\u{3c0}, 2\u{3c0})"
                            .to_string(),
                    );
                }
            }
        }
    }

    fn validate_initial(&self, errs: &mut Vec<String>) {
        let circle_length = self.initial.circle_length;
        if !(circle_length.is_finite() && circle_length > 0.0) {
            errs.push(format!(
                "initial.circle_length: must be positive and finite (got {circle_length})"
            ));
        }
        let surface_kind = match &self.surface {
            SurfaceBlock::Plane => "plane",
            SurfaceBlock::FlatTorus { .. } => "flat_torus",
            SurfaceBlock::Sphere => "sphere",
            SurfaceBlock::Hyperboloid => "hyperboloid",
        };
        let require_surface = |errs: &mut Vec<String>, generator: &str, wanted: &str| {
            if surface_kind != wanted {
                errs.push(format!(
                    "initial.generator.kind: {generator} requires surface.kind = {wanted} \
                     (got {surface_kind})"
                ));
            }
        };
        match &self.initial.generator {
            GeneratorBlock::FourierMode { k, a, b } => {
                require_surface(errs, "fourier_mode", "flat_torus");
                if *k == 0 {
                    errs.push("initial.generator.k: must be a nonzero integer".to_string());
                } else if circle_length.is_finite() && circle_length > 0.0 {
                    let turns = *k as f64 * circle_length / TAU;
                    if (turns - turns.round()).abs() > 1e-9 {
                        errs.push(format!(
                            "initial.generator.k: mode k = {k} does not close over \
                             circle_length {circle_length}"
                        ));
                    }
                }
                if !(a.is_finite() && b.is_finite()) {
                    errs.push(format!(
                        "initial.generator.a: amplitudes must be finite (got a = {a}, b = {b})"
                    ));
                }
            }
            GeneratorBlock::TorusGraph { mu } => {
                require_surface(errs, "torus_graph", "flat_torus");
                if !mu.is_finite() {
                    errs.push(format!("initial.generator.mu: must be finite (got {mu})"));
                }
                if let SurfaceBlock::FlatTorus { periods } = &self.surface {
                    if periods.0 > 0.0 && circle_length.is_finite() && circle_length > 0.0 {
                        let phi_periods = circle_length / periods.0;
                        if (phi_periods - phi_periods.round()).abs() > 1e-9 {
                            errs.push(format!(
                                "initial.circle_length: graph loop does not close: {circle_length} \
                                 is not a multiple of the \u{3c6}-period {}",
                                periods.0
                            ));
                        }
                    }
                }
            }
            GeneratorBlock::SphereLatitude { theta0 } => {
                require_surface(errs, "sphere_latitude", "sphere");
                if !(theta0.is_finite() && (0.0..=PI).contains(theta0)) {
                    errs.push(format!(
                        "initial.generator.theta0: must lie in [0, \u{3c0}] (got {theta0})"
                    ));
                }
            }
            GeneratorBlock::HyperbolicLatitude { theta0 } => {
                require_surface(errs, "hyperbolic_latitude", "hyperboloid");
                if !(theta0.is_finite() && *theta0 >= 0.0) {
                    errs.push(format!(
                        "initial.generator.theta0: must be nonnegative and finite (got {theta0})"
                    ));
                }
            }
            GeneratorBlock::PlaneCircle { radius, center } => {
                require_surface(errs, "plane_circle", "plane");
                if !(radius.is_finite() && *radius > 0.0) {
                    errs.push(format!(
                        "initial.generator.radius: must be positive and finite (got {radius})"
                    ));
                }
                if !(center.0.is_finite() && center.1.is_finite()) {
                    errs.push(format!(
                        "initial.generator.center: must be finite (got ({}, {}))",
                        center.0, center.1
                    ));
                }
            }
            GeneratorBlock::ExplicitSamples { samples } => {
                if samples.len() != self.discretization.n {
                    errs.push(format!(
                        "initial.generator.samples: expected discretization.n = {} samples, \
                         got {}",
                        self.discretization.n,
                        samples.len()
                    ));
                }
                let chart_dim = self.surface.to_core().coord_dim();
                for (i, s) in samples.iter().enumerate() {
                    if !s.iter().all(|c| c.is_finite()) {
                        errs.push(format!(
                            "initial.generator.samples[{i}]: coordinates must be finite"
                        ));
                        break;
                    }
                    if chart_dim == 2 && s[2] != 0.0 {
                        errs.push(format!(
                            "initial.generator.samples[{i}]: third coordinate must be 0 in a \
                             two-coordinate chart (got {})",
                            s[2]
                        ));
                        break;
                    }
                }
            }
        }
    }

    fn validate_discretization(&self, errs: &mut Vec<String>) {
        let n = self.discretization.n;
        if n < MIN_SAMPLES {
            errs.push(format!("discretization.n: must be at least {MIN_SAMPLES} (got {n})"));
        }
        match &self.discretization.dt_policy {
            DtPolicyBlock::FixedCfl { safety } => {
                if !(safety.is_finite() && *safety > 0.0 && *safety <= 1.0) {
                    errs.push(format!(
                        "discretization.dt_policy.safety: must lie in (0, 1] (got {safety})"
                    ));
                }
            }
            DtPolicyBlock::Explicit { dt } => {
                if !(dt.is_finite() && *dt > 0.0) {
                    errs.push(format!(
                        "discretization.dt_policy.dt: must be positive and finite (got {dt})"
                    ));
                } else if n >= MIN_SAMPLES
                    && self.initial.circle_length.is_finite()
                    && self.initial.circle_length > 0.0
                {
                    let h = self.initial.circle_length / n as f64;
                    let stable = h * h / 4.0;
                    if *dt > stable * 1.0001 {
                        errs.push(format!(
                            "discretization.dt_policy.dt: {dt} exceeds the stability limit \
                             h\u{b2}/4 = {stable:.6e} for n = {n}"
                        ));
                    }
                }
            }
        }
    }

    fn validate_run(&self, errs: &mut Vec<String>) {
        let positive = |errs: &mut Vec<String>, path: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{path}: must be positive and finite (got {v})"));
            }
        };
        positive(errs, "run.t_max", self.run.t_max);
        positive(errs, "run.tol_residual", self.run.tol_residual);
        positive(errs, "run.tol_point", self.run.tol_point);
        positive(errs, "run.divergence_threshold", self.run.divergence_threshold);
        if self.run.record_stride < 1 {
            errs.push("run.record_stride: must be at least 1".to_string());
        }
    }

    fn validate_output(&self, errs: &mut Vec<String>) {
        if self.output.stride < 1 {
            errs.push("output.stride: must be at least 1".to_string());
        }
        if self.output.formats.is_empty() {
            errs.push("output.formats: must list at least one format".to_string());
        }
        for (i, f) in self.output.formats.iter().enumerate() {
            if f != "csv" {
                errs.push(format!(
                    "output.formats[{i}]: unsupported format {f:?} (supported: \"csv\")"
                ));
            }
        }
    }

    /// FNV-1a hash of the canonical serialization of the whole config.
    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serialization cannot fail");
        format!("{:016x}", fnv1a64(text.as_bytes()))
    }

    /// FNV-1a hash of the trajectory-determining blocks only (surface, field,
    /// initial loop, discretization). Run-block fields such as `t_max` may
    /// change between a checkpoint and its resume, so they stay out.
    pub fn physics_hash(&self) -> String {
        let physics = (&self.surface, &self.field, &self.initial, &self.discretization);
        let text = serde_json::to_string(&physics).expect("config serialization cannot fail");
        format!("{:016x}", fnv1a64(text.as_bytes()))
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Why a configuration was rejected.
#[derive(Debug)]
pub enum ConfigError {
    /// The file could not be read.
    Io { path: String, message: String },
    /// The file is not valid JSON for the schema.
    Parse { path: String, message: String },
    /// The file parsed but violates the contract; one line per violation.
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => {
                write!(f, "cannot read config {path}: {message}")
            }
            ConfigError::Parse { path, message } => {
                write!(f, "cannot parse config {path}: {message}")
            }
            ConfigError::Invalid(violations) => {
                writeln!(f, "invalid configuration:")?;
                for v in violations {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Read, parse, and validate a scenario config, reporting every violation.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let config: ScenarioConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let violations = config.validate();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}
