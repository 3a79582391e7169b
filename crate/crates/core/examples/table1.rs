//! Predicted vs computed dominant monomials of each summand of the
//! M-system identities, and which right-hand products are simple.

use minaff::affinization::{
    make_equation, simplicity_census, table1_sample, verify_table1, CharacterEngine,
};
use minaff::CartanData;

fn main() -> minaff::Result<()> {
    for (fid, p) in table1_sample() {
        let engine = CharacterEngine::new(CartanData::type_c(p.n)?);
        let eq = make_equation(fid, &p)?;
        let r = verify_table1(&eq, &engine)?;
        println!("{} {}", if r.ok { "ok  " } else { "FAIL" }, r.equation);
        for (name, pred) in ["lhs", "rhs1", "rhs2"].iter().zip(&r.predicted) {
            println!("       {name:<4} {}", pred.join(" + "));
        }
        for v in simplicity_census(&eq, &engine)? {
            println!(
                "       {}: {} ({} dominant)",
                v.summand, v.verdict, v.dominant_count
            );
        }
    }
    Ok(())
}
