//! End-to-end acceptance suite.
//!
//! Each numbered check validates one analytical pillar against an
//! independent route at a pinned tolerance, printing one pass/fail line per
//! check. `capa validate` runs the same checks from the CLI.

use capa::validate::{
    check_determinism, check_dmt_identities, check_figures, check_mimo_adr, check_mimo_outage,
    check_miso_adr, check_miso_outage, check_moschopoulos, check_normalization, check_simo_miso_gap,
    check_spda, CheckReport,
};

const SEED: u64 = 20_240_607;

fn assert_check(report: CheckReport) {
    let verdict = if report.passed { "PASS" } else { "FAIL" };
    println!(
        "[{verdict}] criterion {:2} — {} ({:.1}s)",
        report.id, report.name, report.seconds
    );
    for line in &report.details {
        println!("         {line}");
    }
    assert!(report.passed, "criterion {} failed", report.id);
}

#[test]
fn criterion_01_gamma_series_law() {
    assert_check(check_moschopoulos(SEED));
}

#[test]
fn criterion_02_miso_outage() {
    assert_check(check_miso_outage(SEED));
}

#[test]
fn criterion_03_miso_rate() {
    assert_check(check_miso_adr(SEED));
}

#[test]
fn criterion_04_simo_miso_gap() {
    assert_check(check_simo_miso_gap(SEED));
}

#[test]
fn criterion_05_mimo_rate_asymptote() {
    assert_check(check_mimo_adr(SEED));
}

#[test]
fn criterion_06_mimo_outage_asymptote() {
    assert_check(check_mimo_outage(SEED));
}

#[test]
fn criterion_07_dmt_identities() {
    assert_check(check_dmt_identities(SEED));
}

#[test]
fn criterion_08_spda_equivalence_and_degradation() {
    assert_check(check_spda(SEED));
}

#[test]
fn criterion_09_normalization() {
    assert_check(check_normalization(SEED));
}

#[test]
fn criterion_10_figure_orderings() {
    assert_check(check_figures(SEED, 20_000));
}

#[test]
fn criterion_11_determinism() {
    assert_check(check_determinism(SEED));
}
