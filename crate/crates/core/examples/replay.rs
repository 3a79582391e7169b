//! Compiles a mutation schedule, replays it with q-character payloads, and
//! checks every exact exchange relation against the M-system.
//!
//!     cargo run --release --example replay -- 2 1,0,1

use minaff::affinization::{highest_weight, parse_k, CharacterEngine};
use minaff::cluster::{
    build_initial_seed, classify_record, compile_schedule, payload_matches, required_depth,
    run_schedule, verify_match, Algebra, Case,
};
use minaff::CartanData;

fn main() -> minaff::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let case: Case = args.first().map_or("1", |s| s.as_str()).parse()?;
    let k = parse_k(args.get(1).map_or("1,1,0", |s| s.as_str()))?;
    let cd = CartanData::type_c(k.len())?;
    let engine = CharacterEngine::new(cd.clone());

    for algebra in [Algebra::A, Algebra::Atilde] {
        let schedule = compile_schedule(case, &cd, &k)?;
        let depth = required_depth(algebra, &cd, &schedule, 64)?;
        let seed = build_initial_seed(algebra, &cd, depth, Some(&engine))?;
        let run = run_schedule(&seed, &schedule)?;
        let target = schedule.target_in(algebra);
        println!(
            "{algebra}: columns {} at depth {depth}",
            schedule.column_string()
        );
        for rec in run.exact_records() {
            let c = classify_record(rec, &cd, algebra)?;
            let checked = match &c.matched {
                Some(m) => verify_match(m, &engine)?.to_string(),
                None => "-".into(),
            };
            println!(
                "  #{:<3} {:<10?} {:<8} verified {:<5} payload {:?}\n        {}",
                rec.step,
                c.class,
                c.matched.as_ref().map_or("", |m| m.family.as_str()),
                checked,
                payload_matches(rec, &engine)?,
                rec.pretty()
            );
        }
        println!(
            "  target {} reached: {}\n",
            target.pretty(),
            run.reaches(&highest_weight(&target, &cd)?)
        );
    }
    Ok(())
}
