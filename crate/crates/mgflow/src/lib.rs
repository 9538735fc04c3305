//! Scenario runner around [`mgflow_core`]: JSON scenario configs, CSV and
//! JSON artifacts with checkpoint/resume, concurrent parameter sweeps,
//! closed-form oracle output, and the numbered verification suite driven by
//! the `mgflow` command-line tool.
//!
//! The layering is strict: `mgflow_core` owns the geometry and the
//! integrator and stays `no_std`-compatible; everything in this crate is
//! plumbing between that kernel and the filesystem/CLI.
//!
//! * [`config`] — the scenario schema, validation, and content hashes.
//! * [`artifacts`] — on-disk formats: diagnostics/loop CSV, manifest,
//!   checkpoint.
//! * [`runner`] — run one scenario (fresh or resumed) or a value sweep.
//! * [`oracle`] — closed-form reference CSV.
//! * [`verify`] — the twelve-criterion acceptance suite.

pub mod artifacts;
pub mod config;
pub mod oracle;
pub mod runner;
pub mod verify;
