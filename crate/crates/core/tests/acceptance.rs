//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use rydcool::atomdata::SpeciesData;
use rydcool::par::Execution;
use rydcool::selftest::{self, CriterionResult};

fn check(r: CriterionResult) {
    println!("{r}");
    assert!(r.passed, "{r}");
}

#[test]
fn criterion_1_c6_reproduction() {
    check(selftest::c6_reproduction(&SpeciesData::rb87()));
}

#[test]
fn criterion_2_asymmetric_pair() {
    check(selftest::asymmetric_pair(&SpeciesData::rb87()));
}

#[test]
fn criterion_3_channel_identities() {
    check(selftest::channel_identities());
}

#[test]
fn criterion_4_worked_coupling() {
    check(selftest::worked_coupling(&SpeciesData::rb87()));
}

#[test]
fn criterion_5_swap_efficiency() {
    check(selftest::swap_efficiency_check());
}

#[test]
fn criterion_6_counter_rotating_convergence() {
    check(selftest::counter_rotating_convergence(Execution::Parallel));
}

#[test]
fn criterion_7_dressing_oracle() {
    check(selftest::dressing_oracle(&SpeciesData::rb87()));
}

#[test]
fn criterion_8_adiabatic_protocol() {
    check(selftest::adiabatic_protocol(&SpeciesData::rb87()));
}

#[test]
fn criterion_9_property_suites() {
    check(selftest::property_suites());
}

#[test]
fn c6_map_trends() {
    check(selftest::c6_map_trends(&SpeciesData::rb87(), Execution::Parallel));
}
