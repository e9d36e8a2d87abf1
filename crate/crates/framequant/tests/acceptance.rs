//! Acceptance suite: one test per quantitative criterion, each printing a
//! pass/fail line. `verify-all` in the CLI aggregates exactly the same
//! checks through `framequant::verify`.

use framequant::verify::{self, CriterionRun, DEFAULT_SEED};

fn assert_criterion(run: CriterionRun) {
    let r = &run.result;
    println!(
        "criterion {:02} [{}] {} — {}",
        r.id,
        r.name,
        if r.passed { "PASS" } else { "FAIL" },
        r.details
    );
    assert!(r.passed, "criterion {} ({}) failed: {}", r.id, r.name, r.details);
}

#[test]
fn criterion_01_error_plateau() {
    assert_criterion(verify::criterion_plateau());
}

#[test]
fn criterion_02_half_ratio_identity() {
    assert_criterion(verify::criterion_half_ratio());
}

#[test]
fn criterion_03_route_triangle() {
    assert_criterion(verify::criterion_route_triangle());
}

#[test]
fn criterion_04_average_lower_bound() {
    assert_criterion(verify::criterion_average_lower_bound());
}

#[test]
fn criterion_05_magic_ratio_decay() {
    assert_criterion(verify::criterion_magic_ratio());
}

#[test]
fn criterion_06_step_size_exponent() {
    assert_criterion(verify::criterion_step_exponent());
}

#[test]
fn criterion_07_high_d_exponents() {
    assert_criterion(verify::criterion_highd_exponents(DEFAULT_SEED));
}

#[test]
fn criterion_08_wnh_statistics() {
    assert_criterion(verify::criterion_wnh(DEFAULT_SEED));
}

#[test]
fn criterion_09_identity_suite() {
    assert_criterion(verify::criterion_identities(DEFAULT_SEED));
}

#[test]
fn criterion_10_discrepancy_suite() {
    assert_criterion(verify::criterion_discrepancy(DEFAULT_SEED));
}

#[test]
fn criterion_11_determinism() {
    assert_criterion(verify::criterion_determinism(DEFAULT_SEED));
}
