//! Acceptance suite: runs the fast verification suite once and exposes each
//! criterion as its own test so failures are attributable at a glance.
//!
//! Every test prints its criterion's one-line verdict (visible with
//! `--nocapture`, or automatically on failure) and asserts that it passed.

use std::sync::LazyLock;

use mgflow::verify::{format_line, run_suite, CriterionResult, Suite};

static RESULTS: LazyLock<Vec<CriterionResult>> = LazyLock::new(|| run_suite(Suite::Fast));

fn check(index: usize) {
    let r = RESULTS
        .iter()
        .find(|r| r.index == index)
        .unwrap_or_else(|| panic!("criterion {index} missing from suite results"));
    println!("{}", format_line(r));
    assert!(r.pass, "{}", format_line(r));
}

#[test]
fn criterion_01_threshold_modes_classify_as_point_nontrivial_or_diverged() {
    check(1);
}

#[test]
fn criterion_02_torus_modes_track_their_closed_forms() {
    check(2);
}

#[test]
fn criterion_03_flux_ledger_matches_the_closed_form_magnetic_term() {
    check(3);
}

#[test]
fn criterion_04_graph_drift_raises_mean_height_at_the_field_rate() {
    check(4);
}

#[test]
fn criterion_05_sphere_latitudes_follow_the_polar_angle_ode() {
    check(5);
}

#[test]
fn criterion_06_hyperbolic_latitudes_settle_on_the_attractor_circle() {
    check(6);
}

#[test]
fn criterion_07_energy_identity_defect_stays_within_slack_and_refines() {
    check(7);
}

#[test]
fn criterion_08_exact_potential_energy_descends() {
    check(8);
}

#[test]
fn criterion_09_parabolic_rescaling_commutes_with_the_flow() {
    check(9);
}

#[test]
fn criterion_10_small_loops_decay_kinetically_to_points() {
    check(10);
}

#[test]
fn criterion_11_speed_maximum_principle_holds_on_every_run() {
    check(11);
}

#[test]
fn criterion_12_kernel_invariants_residual_chains_and_second_variation_hold() {
    check(12);
}
