//! q-characters of minimal affinizations: full Frenkel–Mukhin runs,
//! truncated runs with a certificate, specialness, and the involution iota.
//!
//!     cargo run --release --example qcharacters -- T:0:1,1,0

use minaff::affinization::{highest_weight, CharacterEngine, ModuleLabel};
use minaff::qchar::{
    certify_truncation, enumerate_dominant, frenkel_mukhin, iota, is_special, TruncationRegion,
    DEFAULT_BUDGET,
};
use minaff::{CartanData, Monomial};

fn main() -> minaff::Result<()> {
    let label: ModuleLabel = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("T:0:1,1,0")
        .parse()?;
    let n = label.rank();
    let cd = CartanData::type_c(n)?;
    let engine = CharacterEngine::new(cd.clone());

    let m = highest_weight(&label, &cd)?;
    let chi = engine.label_character(&label)?;
    let dim: i64 = chi.iter().map(|(_, c)| c).sum();
    println!("{}  highest {m}", label.pretty());
    println!("  {} monomials, dimension {dim}", chi.len());
    for (d, c) in enumerate_dominant(&chi) {
        println!("  dominant: {c} x {d}");
    }
    for (t, _) in chi.iter().filter(|(t, _)| t.is_antidominant()) {
        println!("  antidominant: {t}");
    }
    // iota carries chi(L(m)) onto the character of the mirrored label
    let mirrored = engine.label_character(&label.mirror())?;
    println!(
        "  iota(chi) = chi({}): {}",
        label.mirror().pretty(),
        iota(&chi, n) == *mirrored
    );

    // truncate just below the top shift
    let top = m.max_shift().unwrap_or(0);
    let region = TruncationRegion::global(top - 2);
    let q = frenkel_mukhin(&cd, &m, Some(&region), DEFAULT_BUDGET)?;
    let mons: Vec<Monomial> = q.poly.monomials().cloned().collect();
    let cert = certify_truncation(&cd, &m, &region, &mons);
    println!(
        "\ntruncated to {region}: {} monomials, certificate ok = {}",
        q.len(),
        cert.ok
    );
    for v in &cert.violations {
        println!("  violation: {v}");
    }
    let full = frenkel_mukhin(&cd, &m, None, DEFAULT_BUDGET)?;
    println!("full run special: {}", is_special(&full)?);
    Ok(())
}
