//! The label mirror T <-> T~ (shifts negated) and the dual identities it
//! induces; iota sends the mirror's highest monomial to the lowest one.

use minaff::affinization::{
    c3_examples, highest_weight, make_equation, CharacterEngine, ModuleLabel,
};
use minaff::qchar::iota_monomial;
use minaff::CartanData;

fn main() -> minaff::Result<()> {
    let cd = CartanData::type_c(3)?;
    let engine = CharacterEngine::new(cd.clone());
    for text in ["T:-2:1,1,0", "T:0:0,2,0", "Tt:0:1,0,1"] {
        let l: ModuleLabel = text.parse()?;
        let d = l.mirror();
        let m = highest_weight(&l, &cd)?;
        let dm = highest_weight(&d, &cd)?;
        let chi = engine.label_character(&l)?;
        let lowest = iota_monomial(&dm, 3);
        println!("{:<22} {m}", l.pretty());
        println!(
            "{:<22} {dm}   (negated shifts: {})",
            d.pretty(),
            m.negate_shifts() == dm
        );
        println!(
            "  iota of the mirror's highest = {lowest}, lowest term of chi: {}",
            chi.contains(&lowest)
        );
    }

    println!();
    for p in c3_examples() {
        let eq = make_equation(p.family, &p.params)?;
        let d = eq.mirror();
        println!(
            "{:<8} {}\n{:<8} {}",
            p.family.name(),
            eq.pretty(),
            d.family.name(),
            d.pretty()
        );
    }
    Ok(())
}
