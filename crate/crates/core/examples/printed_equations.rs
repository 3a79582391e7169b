//! Verifies every printed C3, C4 and dual equation by exact q-character
//! arithmetic and prints one line per equation.
//!
//! `--classical` also checks the restricted ordinary-character identities
//! (the last C4 instance streams a character of ~13M terms; a few minutes);
//! `--mode full|dominant|auto` picks the comparison.

use std::time::Instant;

use minaff::affinization::{
    c3_examples, c4_examples, dual_examples, make_equation, verify_equation_with, CharacterEngine,
    VerifyMode, VerifyOptions,
};
use minaff::CartanData;

fn main() -> minaff::Result<()> {
    let classical = std::env::args().any(|a| a == "--classical");
    let mode = match std::env::args().skip_while(|a| a != "--mode").nth(1) {
        Some(m) => m.parse()?,
        None => VerifyMode::Auto,
    };
    let opts = VerifyOptions { mode, classical };
    let suites = [
        ("C3", c3_examples()),
        ("C4", c4_examples()),
        ("dual", dual_examples()),
    ];
    for (name, suite) in suites {
        let t = Instant::now();
        for (i, p) in suite.iter().enumerate() {
            let engine = CharacterEngine::new(CartanData::type_c(p.params.n)?);
            let eq = make_equation(p.family, &p.params)?;
            let t = Instant::now();
            let r = verify_equation_with(&eq, &engine, opts)?;
            println!(
                "{name:<4} #{:<2} {:<9} {:<4} {:<8?} lhs terms {:>8}  residual {}  classical {:<5}  {:.2?}",
                i + 1,
                r.family,
                if r.verdict { "ok" } else { "FAIL" },
                r.mode,
                r.lhs_terms,
                r.residual_terms,
                r.classical_ok.map_or("-".to_string(), |b| b.to_string()),
                t.elapsed()
            );
        }
        println!("{name} suite: {:.2?}", t.elapsed());
    }
    Ok(())
}
