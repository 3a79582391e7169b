mod common;

use common::{check, CASES};

fn suite(name: &str) {
    assert_eq!(check(name), Ok(CASES), "{name}");
}

#[test]
fn monomial_group_laws() {
    suite("monomial group laws");
}

#[test]
fn lattice_round_trip() {
    suite("lattice round trip");
}

#[test]
fn right_negativity_closure() {
    suite("right-negativity closure");
}

#[test]
fn leq_partial_order() {
    suite("leq partial order");
}

#[test]
fn beta_homomorphism() {
    suite("beta homomorphism");
}

#[test]
fn iota_and_restriction_homomorphisms() {
    suite("iota and restriction homomorphisms");
}

#[test]
fn string_decomposition_round_trip() {
    suite("string decomposition round trip");
}

#[test]
fn fm_coefficient_positivity() {
    suite("FM coefficient positivity");
    assert!(common::FM_EVALUATED.load(std::sync::atomic::Ordering::Relaxed) > 0);
}
