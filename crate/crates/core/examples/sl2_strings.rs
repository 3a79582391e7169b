//! Rank one: q-strings, general position, and q-characters of arbitrary
//! dominant monomials as products over string decompositions.

use minaff::sl2::{kr_qchar, sl2_qchar, string_decompose, Sl2Monomial};

fn main() -> minaff::Result<()> {
    for k in 1..=3 {
        println!("KR(a=0, k={k}): {}", kr_qchar(0, k));
    }

    let m = Sl2Monomial::from_shifts([(0, 1), (2, 1), (4, 1), (8, 1), (2, 1)]);
    let strings = string_decompose(&m)?;
    println!("\n{m}");
    for s in &strings {
        println!(
            "  string top {} length {} members {:?}",
            s.top(),
            s.length,
            s.members()
        );
    }
    let q = sl2_qchar(&m)?;
    println!("  q-character: {} terms", q.len());
    Ok(())
}
