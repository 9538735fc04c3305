//! Magnetic-geodesic heat flow on constant-curvature model surfaces.
//!
//! This crate integrates the evolution
//!
//! ```text
//!     dγ/dt = τ(γ) − Z(γ′)
//! ```
//!
//! for closed curves γ : S¹ → N, where τ(γ) is the tension field (the
//! L²-gradient of the kinetic energy, up to sign) and Z is a skew-symmetric
//! bundle endomorphism encoding a magnetic 2-form Ω through
//! ⟨η, Z(ξ)⟩ = Ω(η, ξ). Stationary points satisfy τ(γ) = Z(γ′): they are
//! closed trajectories of a charged particle in the field, so the flow is a
//! curve-straightening process that bends toward the Lorentz force balance.
//!
//! Four target geometries are supported:
//!
//! * the Euclidean plane and the flat torus ℝ²/(L₁ℤ × L₂ℤ), in intrinsic
//!   coordinates (φ, z) (the torus evolves on the universal cover);
//! * the round unit sphere in ℝ³;
//! * the hyperboloid {p₁² − p₂² − p₃² = 1, p₁ ≥ 1} with the positive-definite
//!   metric induced by the Minkowski form (curvature −1).
//!
//! Modules:
//!
//! * [`surfaces`] — geometry kernels: tangent projection, tension correction,
//!   the Lorentz endomorphism, retraction, metric, magnetic potentials.
//! * [`loops`] — discrete closed curves: periodic stencils, energies,
//!   winding numbers, initial-condition generators.
//! * [`flow`] — explicit RK4 time integration with retraction, stability
//!   control, energy-ledger accumulators, outcome classification, rescaling.
//! * [`analysis`] — diagnostics: geodesic residual, energy-identity defect,
//!   the loop Poincaré (Ottarsson-type) inequality, decay and maximum-principle
//!   bounds, a Bochner-identity residual, second variation, limit reports.
//! * [`analytic`] — closed-form reference solutions and 1-D ODE oracles used
//!   as ground truth by the test and verification suites.
//!
//! The crate is `no_std`-compatible: disable default features and enable
//! `libm` to route float math through the `libm` crate (allocation is still
//! required). The `serde` feature derives serialization for the value types
//! so that configuration files and checkpoints can round-trip losslessly.
//!
//! # Example
//!
//! Flow a latitude circle on the sphere and watch it settle:
//!
//! ```
//! use mgflow_core::flow::{run, FlowConfig};
//! use mgflow_core::loops::{make_loop, LoopGenerator};
//! use mgflow_core::surfaces::{MagneticField, SurfaceModel};
//!
//! let surface = SurfaceModel::Sphere;
//! let field = MagneticField::ConstantStrength { b0: 0.5 };
//! let lp = make_loop(&LoopGenerator::SphereLatitude { theta0: 1.0 }, &surface, 64,
//!                    core::f64::consts::TAU)?;
//! let outcome = run(lp, &field, &FlowConfig { t_max: 10.0, ..FlowConfig::default() })?;
//! println!("{:?} at t = {}", outcome.classification, outcome.final_state.time);
//! for rec in &outcome.series {
//!     println!("t = {:.3}  E = {:.6}  residual = {:.2e}", rec.time, rec.kinetic, rec.residual_l2);
//! }
//! # Ok::<(), mgflow_core::CoreError>(())
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("mgflow-core needs float math: enable the `std` (default) or `libm` feature");

extern crate alloc;

pub mod analysis;
pub mod analytic;
mod error;
pub(crate) mod fp;
pub mod flow;
pub mod loops;
pub mod surfaces;
mod vec3;

pub use error::CoreError;
pub use vec3::Vec3;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, CoreError>;
