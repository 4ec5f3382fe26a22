//! One test per acceptance criterion; each prints its PASS/FAIL line.

use kstab::acceptance::{default_data_dir, run, Corpus};

fn check(id: u32) {
    let corpus = Corpus::load(&default_data_dir()).expect("shipped corpus loads");
    let outcome = run(id, &corpus);
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_factorization_round_trip() {
    check(1);
}

#[test]
fn criterion_02_section_degree_bounds() {
    check(2);
}

#[test]
fn criterion_03_spread_scales_with_level() {
    check(3);
}

#[test]
fn criterion_04_futaki_calibration() {
    check(4);
}

#[test]
fn criterion_05_leading_coefficient_sign() {
    check(5);
}

#[test]
fn criterion_06_equivariant_chow_equality() {
    check(6);
}

#[test]
fn criterion_07_trace_norm_pairing_bound() {
    check(7);
}

#[test]
fn criterion_08_chow_weight_below_pairing() {
    check(8);
}

#[test]
fn criterion_09_bergman_normalization() {
    check(9);
}

#[test]
fn criterion_10_expansion_coefficient() {
    check(10);
}

#[test]
fn criterion_11_theta_decay() {
    check(11);
}

#[test]
fn criterion_12_moment_cross_check() {
    check(12);
}

#[test]
fn criterion_13_balancing_iteration() {
    check(13);
}
