//! Randomized invariants, shared by the property tests and the acceptance
//! harness. Every suite runs `CASES` cases.

#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use minaff::affinization::CharacterEngine;
use minaff::poly::LaurentPoly;
use minaff::qchar::{iota, restrict_character};
use minaff::sl2::{beta, recompose, string_decompose, Sl2Monomial};
use minaff::{a_monomial, decompose_in_a_lattice, leq, ALatticePoint, CartanData, Monomial};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 1024;

type Check = std::result::Result<(), TestCaseError>;

fn c(n: usize) -> CartanData {
    CartanData::type_c(n).unwrap()
}

fn factor(n: usize) -> impl Strategy<Value = (usize, i32, i32)> {
    (1..=n, -8i32..=8, prop_oneof![-2i32..=-1, 1i32..=2])
}

fn monomial(n: usize) -> impl Strategy<Value = Monomial> {
    prop::collection::vec(factor(n), 0..6).prop_map(Monomial::from_factors)
}

fn lattice_point(n: usize) -> impl Strategy<Value = ALatticePoint> {
    prop::collection::vec(((1..=n, -6i32..=6), -3i64..=3), 0..6).prop_map(|v| {
        let mut p = ALatticePoint::default();
        for (k, c) in v {
            *p.v.entry(k).or_insert(0) += c;
        }
        p.v.retain(|_, c| *c != 0);
        p
    })
}

/// Products of `A^{-1}`s: right-negative by construction.
fn a_inverse_product(n: usize) -> impl Strategy<Value = Monomial> {
    prop::collection::vec((1..=n, -6i32..=6), 1..5).prop_map(move |v| {
        let cd = c(n);
        v.iter().fold(Monomial::one(), |m, &(i, s)| {
            m.mul(&a_monomial(&cd, i, s).unwrap().inv())
        })
    })
}

fn poly(n: usize) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((monomial(n), -3i64..=3), 1..4).prop_map(LaurentPoly::from_terms)
}

/// Dominant monomials with one to three fundamental factors.
fn small_dominant(n: usize) -> impl Strategy<Value = Monomial> {
    prop::collection::vec((1..=n, -4i32..=4), 1..=3)
        .prop_map(|v| Monomial::from_factors(v.into_iter().map(|(i, s)| (i, s, 1))))
}

fn group_laws((a, b, x): (Monomial, Monomial, Monomial)) -> Check {
    prop_assert_eq!(a.mul(&b).mul(&x), a.mul(&b.mul(&x)));
    prop_assert_eq!(a.mul(&b), b.mul(&a));
    prop_assert_eq!(a.mul(&Monomial::one()), a.clone());
    prop_assert!(a.div(&a).is_one());
    prop_assert_eq!(a.mul(&a.inv()), Monomial::one());
    prop_assert_eq!(a.pow(2), a.mul(&a));
    let text = serde_json::to_string(&a).unwrap();
    prop_assert_eq!(serde_json::from_str::<Monomial>(&text).unwrap(), a.clone());
    if !a.is_one() {
        prop_assert_eq!(a.to_string().parse::<Monomial>().unwrap(), a);
    }
    Ok(())
}

fn lattice_round_trip((n, p, m): (usize, ALatticePoint, Monomial)) -> Check {
    let cd = c(n);
    let r = p.recompose(&cd);
    prop_assert_eq!(decompose_in_a_lattice(&cd, &r), Some(p));
    // and the other way round, for arbitrary monomials
    if let Some(q) = decompose_in_a_lattice(&cd, &m) {
        prop_assert_eq!(q.recompose(&cd), m);
    }
    Ok(())
}

fn right_negativity((a, b, x, y): (Monomial, Monomial, Monomial, Monomial)) -> Check {
    prop_assert!(a.is_right_negative().unwrap());
    prop_assert!(a.mul(&b).is_right_negative().unwrap());
    if !x.is_one()
        && !y.is_one()
        && x.is_right_negative().unwrap()
        && y.is_right_negative().unwrap()
    {
        prop_assert!(x.mul(&y).is_right_negative().unwrap());
    }
    Ok(())
}

fn leq_order((a, p, q): (Monomial, Monomial, Monomial)) -> Check {
    let cd = c(3);
    let b = a.mul(&p);
    let x = b.mul(&q);
    prop_assert!(leq(&cd, &a, &a));
    prop_assert!(leq(&cd, &b, &a));
    prop_assert!(!leq(&cd, &a, &b));
    prop_assert!(leq(&cd, &x, &b) && leq(&cd, &x, &a));
    Ok(())
}

fn beta_homomorphism((p, q, j): (LaurentPoly, LaurentPoly, usize)) -> Check {
    prop_assert_eq!(beta(&p.mul(&q), j), beta(&p, j).mul(&beta(&q, j)));
    prop_assert_eq!(beta(&p.add(&q), j), beta(&p, j).add(&beta(&q, j)));
    Ok(())
}

fn iota_restriction((p, q): (LaurentPoly, LaurentPoly)) -> Check {
    prop_assert_eq!(iota(&iota(&p, 3), 3), p.clone());
    prop_assert_eq!(iota(&p.mul(&q), 3), iota(&p, 3).mul(&iota(&q, 3)));
    prop_assert_eq!(
        restrict_character(&p.mul(&q), 3),
        restrict_character(&p, 3).mul(&restrict_character(&q, 3))
    );
    Ok(())
}

fn string_round_trip(v: Vec<(i32, i32)>) -> Check {
    let m = Sl2Monomial::from_shifts(v);
    let strings = string_decompose(&m).unwrap();
    prop_assert_eq!(recompose(&strings), m);
    Ok(())
}

/// Cases of the positivity suite that had a computable character.
pub static FM_EVALUATED: AtomicUsize = AtomicUsize::new(0);

fn fm_positivity((n, m): (usize, Monomial)) -> Check {
    static ENGINES: OnceLock<[CharacterEngine; 2]> = OnceLock::new();
    let engines = ENGINES.get_or_init(|| [CharacterEngine::new(c(2)), CharacterEngine::new(c(3))]);
    let m = Monomial::from_factors(m.factors().map(|(i, s, e)| (i.min(n), s, e)));
    let eng = &engines[n - 2];
    // products of fundamentals need not be special or anti-special
    if let Ok(ch) = eng.character(&m) {
        FM_EVALUATED.fetch_add(1, Ordering::Relaxed);
        prop_assert_eq!(ch.coef(&m), 1);
        prop_assert!(ch.iter().all(|(_, k)| k >= 1));
        prop_assert!(ch.iter().all(|(t, _)| leq(eng.cartan(), t, &m)));
    }
    Ok(())
}

fn run<S: Strategy>(s: S, f: impl Fn(S::Value) -> Check) -> Result<u32, String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&s, f).map(|_| CASES).map_err(|e| e.to_string())
}

pub const SUITES: [&str; 8] = [
    "monomial group laws",
    "lattice round trip",
    "right-negativity closure",
    "leq partial order",
    "beta homomorphism",
    "iota and restriction homomorphisms",
    "string decomposition round trip",
    "FM coefficient positivity",
];

/// Runs one suite; returns the number of cases.
pub fn check(name: &str) -> Result<u32, String> {
    match name {
        "monomial group laws" => run((monomial(3), monomial(3), monomial(3)), group_laws),
        "lattice round trip" => run(
            (2usize..=4).prop_flat_map(|n| (Just(n), lattice_point(n), monomial(n))),
            lattice_round_trip,
        ),
        "right-negativity closure" => run(
            (
                a_inverse_product(3),
                a_inverse_product(3),
                monomial(3),
                monomial(3),
            ),
            right_negativity,
        ),
        "leq partial order" => run(
            (monomial(3), a_inverse_product(3), a_inverse_product(3)),
            leq_order,
        ),
        "beta homomorphism" => run((poly(3), poly(3), 1usize..=3), beta_homomorphism),
        "iota and restriction homomorphisms" => run((poly(3), poly(3)), iota_restriction),
        "string decomposition round trip" => run(
            prop::collection::vec((-6i32..=6, 1i32..=2), 1..5),
            string_round_trip,
        ),
        "FM coefficient positivity" => run((2usize..=3, small_dominant(3)), fm_positivity),
        other => Err(format!("unknown suite {other}")),
    }
}
