//! Cartan data of C_n, Y/A monomials, the A-lattice and the Nakajima order.

use minaff::{a_monomial, decompose_in_a_lattice, leq, CartanData, Monomial};

fn main() -> minaff::Result<()> {
    let cd = CartanData::type_c(3)?;
    println!(
        "C_3 symmetrizers d = {:?}",
        cd.nodes().map(|i| cd.di(i)).collect::<Vec<_>>()
    );
    println!("C = {}", cd.to_json()["C"]);
    println!("B = {:?}", cd.b_matrix());

    let m: Monomial = "1_0 1_2 3_5".parse()?;
    println!(
        "\nm = {m}, dominant {}, weight {:?}",
        m.is_dominant(),
        m.weight(3)
    );

    // lower by A_{1,3}^{-1} and A_{2,4}^{-1}
    let a = a_monomial(&cd, 1, 3)?.mul(&a_monomial(&cd, 2, 4)?);
    let low = m.div(&a);
    println!("m A_{{1,3}}^-1 A_{{2,4}}^-1 = {low}");
    println!(
        "  <= m: {}   m <= it: {}",
        leq(&cd, &low, &m),
        leq(&cd, &m, &low)
    );
    let p = decompose_in_a_lattice(&cd, &low.div(&m)).expect("in the A-lattice");
    println!("  quotient in the A-lattice: {:?}", p.v);
    println!("  right-negative: {}", low.div(&m).is_right_negative()?);

    println!("\nJSON form: {}", serde_json::to_string(&m).unwrap());
    Ok(())
}
