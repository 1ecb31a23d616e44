//! The acceptance battery, one test per criterion. Each test prints its
//! PASS/FAIL line straight to stderr so it shows up even when output is
//! captured.

use std::io::Write;

use smp_core::verify::{criterion, VerifyOptions};

fn check(id: u8) {
    let r = criterion(id, &VerifyOptions::default());
    let _ = writeln!(std::io::stderr(), "{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn c01_one_out_of_two_success() {
    check(1);
}

#[test]
fn c02_ne_rrr_completeness() {
    check(2);
}

#[test]
fn c03_ne_rrr_soundness() {
    check(3);
}

#[test]
fn c04_swap_test() {
    check(4);
}

#[test]
fn c05_fingerprint_equality() {
    check(5);
}

#[test]
fn c06_haar_survival_mean() {
    check(6);
}

#[test]
fn c07_projection_lower_tail() {
    check(7);
}

#[test]
fn c08_dephasing() {
    check(8);
}

#[test]
fn c09_state_transfer_contract() {
    check(9);
}

#[test]
fn c10_disj_rrr_completeness() {
    check(10);
}

#[test]
fn c11_disj_rrr_soundness() {
    check(11);
}

#[test]
fn c12_code_distance() {
    check(12);
}

#[test]
fn c13_message_lengths() {
    check(13);
}
