//! The initial seed of A (or A~ with `--dual`) on a finite window, as JSON
//! summary or Graphviz (`--dot`), and one exchange relation.

use minaff::cluster::{build_initial_seed, Algebra};
use minaff::CartanData;

fn main() -> minaff::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let algebra = if args.iter().any(|a| a == "--dual") {
        Algebra::Atilde
    } else {
        Algebra::A
    };
    let cd = CartanData::type_c(3)?;
    let seed = build_initial_seed(algebra, &cd, 3, None)?;
    if args.iter().any(|a| a == "--dot") {
        print!("{}", seed.quiver.to_dot());
        return Ok(());
    }
    println!(
        "{algebra}: {} vertices, {} arrows, loops {}, 2-cycles {}",
        seed.quiver.len(),
        seed.quiver.arrow_count(),
        seed.quiver.has_loops(),
        seed.quiver.two_cycles().len()
    );
    for &v in seed.quiver.vertices().iter().take(6) {
        let var = seed.var(v).unwrap();
        println!(
            "  {v:?}  {}  tainted {}",
            var.label.as_ref().map_or("-".into(), |l| l.pretty()),
            seed.is_tainted(v)
        );
    }
    let v = seed.quiver.vertices()[0];
    let (_, rec) = seed.mutate(v)?;
    println!("\nmutating {v:?}: {}  (exact {})", rec.pretty(), rec.exact);
    Ok(())
}
