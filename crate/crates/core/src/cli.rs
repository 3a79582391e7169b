//! Command-line front end. `run` parses arguments, dispatches, and returns
//! the process exit code; the `minaff` binary is a thin wrapper around it.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 engine
//! error. Errors are written to stderr as one JSON object.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::affinization::{
    c3_examples, c4_examples, dual_examples, highest_weight, make_equation, matches_printed,
    parse_k, table1_sample, verify_equation_with, verify_table1, CharacterEngine, EqParams,
    FamilyId, ModuleLabel, PrintedEquation, VerifyMode, VerifyOptions,
};
use crate::cache::{CharCache, CACHE_ENV};
use crate::cartan::CartanData;
use crate::cluster::{
    build_initial_seed, classify_record, compile_schedule, payload_matches, required_depth,
    run_schedule, run_schedule_checked, verify_match, Algebra, Case, RecordClass,
};
use crate::error::{Error, Result};
use crate::qchar::{enumerate_dominant, iota_monomial, TruncationRegion, DEFAULT_BUDGET};
use crate::sl2::kr_qchar;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ENGINE: i32 = 3;

/// Largest window depth tried when looking for the depth a schedule needs.
const MAX_DEPTH: usize = 64;

#[derive(Parser, Debug)]
#[command(
    name = "minaff",
    version,
    about = "q-characters of minimal affinizations of type C_n"
)]
pub struct Cli {
    /// Machine-readable JSON output (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Do not read or write the on-disk character cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Cache directory [default: $MINAFF_CACHE_DIR; no cache if unset].
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Cap on monomials expanded by one Frenkel–Mukhin run.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cartan data of type C_n.
    Cartan {
        /// Rank (n >= 1).
        #[arg(long)]
        n: usize,
    },
    /// Highest monomial of a module label.
    Hw(LabelArgs),
    /// q-character of a module label.
    Qchar {
        #[command(flatten)]
        label: LabelArgs,
        /// Truncation region, `s<=B` or `s<=[b1,..,bn]`.
        #[arg(long)]
        trunc: Option<String>,
    },
    /// Verify equations: a printed suite, or one catalog instance.
    Verify(VerifyArgs),
    /// The dual of a label or of a catalog equation.
    Dual {
        /// Rank.
        #[arg(long)]
        n: usize,
        /// Module label to mirror; otherwise give an equation.
        #[arg(long, conflicts_with = "family")]
        label: Option<String>,
        #[command(flatten)]
        eq: EqArgs,
    },
    /// Initial seed of `A` or `A~` on a finite window.
    Seed {
        /// A or Atilde.
        #[arg(long, default_value = "A")]
        algebra: String,
        /// Rank (n >= 2).
        #[arg(long)]
        n: usize,
        /// Rows kept per column.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Attach q-character payloads.
        #[arg(long)]
        payloads: bool,
        /// GraphViz dump of the quiver instead of JSON.
        #[arg(long)]
        dot: bool,
    },
    /// Compile a mutation schedule.
    Schedule(ScheduleArgs),
    /// Run a schedule and match every exchange relation with the system.
    Replay {
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Window depth [default: the smallest that reaches the target].
        #[arg(long)]
        depth: Option<usize>,
        /// Carry q-characters through the mutations and verify matches.
        #[arg(long)]
        payloads: bool,
    },
    /// Inspect or clear the character cache.
    Cache {
        #[arg(value_parser = ["stats", "clear", "path"], default_value = "stats")]
        action: String,
    },
}

#[derive(Args, Debug)]
pub struct LabelArgs {
    /// Rank.
    #[arg(long)]
    pub n: usize,
    /// `VARIANT:s:k1,..,kn` (VARIANT in T, Tt, S, St); `sl2:a:k` for n = 1.
    #[arg(long)]
    pub label: String,
}

#[derive(Args, Debug, Default)]
pub struct EqArgs {
    /// Equation family, e.g. eqn1, eqn511, eqn5211d.
    #[arg(long)]
    pub family: Option<String>,
    /// Spectral shift.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    pub s: i32,
    /// k-vector of the second left-hand module.
    #[arg(long)]
    pub k: Option<String>,
    /// Node indices used by the families that take them.
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// c3-examples, c4-examples, c3-dual-examples or table1-sample.
    #[arg(long, conflicts_with = "family")]
    pub suite: Option<String>,
    /// Rank of a single instance.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub eq: EqArgs,
    /// auto, full or dominant.
    #[arg(long, default_value = "auto")]
    pub mode: String,
    /// Also check the restricted ordinary-character identity.
    #[arg(long)]
    pub classical: bool,
    /// Compare the report with this golden file.
    #[arg(long)]
    pub golden: Option<PathBuf>,
    /// Write the report to the golden file instead of comparing.
    #[arg(long, requires = "golden")]
    pub update_golden: bool,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    /// 1 or 2.
    #[arg(long)]
    pub case: String,
    /// Target k-vector, e.g. 1,0,1.
    #[arg(long)]
    pub k: String,
    /// Rank; defaults to the length of `k`.
    #[arg(long)]
    pub n: Option<usize>,
    /// A or Atilde.
    #[arg(long, default_value = "A")]
    pub algebra: String,
}

/// Result of a command: the report and whether it passed.
struct Outcome {
    report: Value,
    text: String,
    pass: bool,
    /// Print `text` even in JSON mode.
    raw: bool,
}

impl Outcome {
    fn ok(report: Value, text: String) -> Self {
        Outcome {
            report,
            text,
            pass: true,
            raw: false,
        }
    }
}

/// Usage errors (bad input) versus engine errors.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidRank(_)
        | Error::NodeOutOfRange { .. }
        | Error::InvalidLabel(_)
        | Error::ConstraintViolated(_)
        | Error::NotDominant(_)
        | Error::Parse(_)
        | Error::WindowTooSmall { .. } => EXIT_USAGE,
        _ => EXIT_ENGINE,
    }
}

pub fn error_json(e: &Error) -> Value {
    let mut v = json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    });
    if let Error::WindowTooSmall { given, required } = e {
        v["given_depth"] = json!(given);
        v["required_depth"] = json!(required);
    }
    v
}

/// Runs the command line `args` (program name first), writing the report to
/// `out` and errors to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_PASS;
            }
            let v = json!({
                "error": "Usage",
                "message": e.to_string().trim_end(),
                "exit_code": EXIT_USAGE,
            });
            let _ = writeln!(err, "{v}");
            return EXIT_USAGE;
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            let written = if cli.pretty || o.raw {
                writeln!(out, "{}", o.text.trim_end())
            } else {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&o.report).expect("report serializes")
                )
            };
            if let Err(e) = written {
                if e.kind() == std::io::ErrorKind::BrokenPipe {
                    return EXIT_PASS;
                }
                let _ = writeln!(err, "{}", error_json(&Error::Io(e.to_string())));
                return EXIT_ENGINE;
            }
            if o.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            exit_code(&e)
        }
    }
}

fn cache(cli: &Cli) -> Result<Option<CharCache>> {
    if cli.no_cache {
        return Ok(None);
    }
    match &cli.cache_dir {
        Some(d) => Ok(Some(CharCache::new(d)?)),
        None => CharCache::from_env(),
    }
}

fn engine(cli: &Cli, n: usize) -> Result<CharacterEngine> {
    Ok(CharacterEngine::new(CartanData::type_c(n)?)
        .with_budget(cli.budget)
        .with_disk_cache(cache(cli)?))
}

fn label_for(n: usize, text: &str) -> Result<ModuleLabel> {
    let l: ModuleLabel = text.parse()?;
    if l.rank() != n {
        return Err(Error::InvalidLabel(format!(
            "{text}: k-vector has {} entries, rank is {n}",
            l.rank()
        )));
    }
    Ok(l)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Cartan { n } => {
            let cd = CartanData::type_c(*n)?;
            let rows: Vec<String> =
                cd.c.iter()
                    .map(|r| r.iter().map(|x| format!("{x:>3}")).collect::<String>())
                    .collect();
            let text = format!("C = \n{}\nd = {:?}", rows.join("\n"), cd.d);
            Ok(Outcome::ok(cd.to_json(), text))
        }
        Command::Hw(a) => cmd_hw(a),
        Command::Qchar { label, trunc } => cmd_qchar(cli, label, trunc.as_deref()),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Dual { n, label, eq } => cmd_dual(*n, label.as_deref(), eq),
        Command::Seed {
            algebra,
            n,
            depth,
            payloads,
            dot,
        } => {
            let algebra: Algebra = algebra.parse()?;
            let cd = CartanData::type_c(*n)?;
            let eng = if *payloads {
                Some(engine(cli, *n)?)
            } else {
                None
            };
            let seed = build_initial_seed(algebra, &cd, *depth, eng.as_ref())?;
            if *dot {
                // DOT text in both output modes
                let dot = seed.quiver.to_dot();
                return Ok(Outcome {
                    raw: true,
                    ..Outcome::ok(Value::Null, dot)
                });
            }
            let text = format!(
                "{algebra} seed, n = {n}, depth {depth}: {} vertices, {} arrows",
                seed.quiver.len(),
                seed.quiver.arrow_count()
            );
            Ok(Outcome::ok(seed.to_json(), text))
        }
        Command::Schedule(a) => cmd_schedule(a),
        Command::Replay {
            schedule,
            depth,
            payloads,
        } => cmd_replay(cli, schedule, *depth, *payloads),
        Command::Cache { action } => cmd_cache(cli, action),
    }
}

fn cmd_hw(a: &LabelArgs) -> Result<Outcome> {
    let cd = CartanData::type_c(a.n)?;
    let l = label_for(a.n, &a.label)?;
    let m = highest_weight(&l, &cd)?;
    let w = m.weight(a.n);
    let dim = cd.weyl_dimension(&w);
    let report = json!({
        "label": l.to_string(),
        "highest": m,
        "weight": w,
        "classical_dimension": dim.to_string(),
    });
    Ok(Outcome::ok(
        report,
        format!("{} : {m}  (weight {w:?}, dim {dim})", l.pretty()),
    ))
}

fn cmd_qchar(cli: &Cli, a: &LabelArgs, trunc: Option<&str>) -> Result<Outcome> {
    if a.n == 1 {
        return qchar_sl2(&a.label);
    }
    let eng = engine(cli, a.n)?;
    let l = label_for(a.n, &a.label)?;
    let m = highest_weight(&l, eng.cartan())?;
    let region: Option<TruncationRegion> = trunc.map(str::parse).transpose()?;
    let (poly, source) = match &region {
        None => ((*eng.label_character(&l)?).clone(), "full".to_string()),
        Some(r) => {
            let (p, s) = eng.truncated_character(&l, r)?;
            (p, format!("{s:?}").to_lowercase())
        }
    };
    let dominant = enumerate_dominant(&poly);
    let antidominant = poly.iter().filter(|(m, _)| m.is_antidominant()).count();
    let dim: i64 = poly.iter().map(|(_, c)| c).sum();
    let method = CharacterEngine::method_for(&l).map(|m| format!("{m:?}").to_lowercase());
    let report = json!({
        "label": l.to_string(),
        "highest": m,
        "terms": poly,
        "complete": region.is_none(),
        "region": region,
        "summary": {
            "term_count": poly.len(),
            "dimension": dim,
            "source": source,
            "method": method,
            "dominant": dominant.iter().map(|(m, c)| json!({"m": m, "c": c})).collect::<Vec<_>>(),
            "special": dominant.len() == 1 && dominant[0].1 == 1,
            "anti_special": region.is_none().then_some(antidominant == 1),
        },
    });
    let mut text = format!(
        "{}  highest {m}\n{} terms, dimension {dim}, {} dominant: {}",
        l.pretty(),
        poly.len(),
        dominant.len(),
        dominant
            .iter()
            .map(|(m, c)| if *c == 1 {
                m.to_string()
            } else {
                format!("{c}*{m}")
            })
            .collect::<Vec<_>>()
            .join(", ")
    );
    if poly.len() <= 40 {
        text.push_str(&format!("\n{poly}"));
    }
    Ok(Outcome::ok(report, text))
}

/// `sl2:a:k`: the rank-one Kirillov–Reshetikhin module.
fn qchar_sl2(text: &str) -> Result<Outcome> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidLabel(format!("rank 1 labels look like sl2:a:k, got {text:?}"));
    if parts.len() != 3 || parts[0] != "sl2" {
        return Err(bad());
    }
    let a: i32 = parts[1].parse().map_err(|_| bad())?;
    let k: u32 = parts[2].parse().map_err(|_| bad())?;
    let p = kr_qchar(a, k);
    let report = json!({
        "label": text,
        "terms": p,
        "complete": true,
        "region": null,
        "summary": {"term_count": p.len(), "dimension": p.len()},
    });
    Ok(Outcome::ok(report, format!("{} terms: {p}", p.len())))
}

fn eq_params(n: usize, eq: &EqArgs) -> Result<(FamilyId, EqParams)> {
    let family: FamilyId = eq
        .family
        .as_deref()
        .ok_or_else(|| Error::Parse("--family is required".into()))?
        .parse()?;
    let k = parse_k(
        eq.k.as_deref()
            .ok_or_else(|| Error::Parse("--k is required".into()))?,
    )?;
    if k.len() != n {
        return Err(Error::Parse(format!(
            "--k has {} entries, rank is {n}",
            k.len()
        )));
    }
    let mut p = EqParams::new(eq.s, k);
    p.i = eq.i;
    p.j = eq.j;
    p.l = eq.l;
    p.m = eq.m;
    Ok((family, p))
}

struct Job {
    family: FamilyId,
    params: EqParams,
    printed: Option<&'static str>,
}

impl From<PrintedEquation> for Job {
    fn from(p: PrintedEquation) -> Self {
        Job {
            family: p.family,
            params: p.params,
            printed: Some(p.printed),
        }
    }
}

fn suite_jobs(name: &str) -> Result<Vec<Job>> {
    let jobs = match name {
        "c3-examples" => c3_examples().into_iter().map(Job::from).collect(),
        "c4-examples" => c4_examples().into_iter().map(Job::from).collect(),
        "c3-dual-examples" | "dual-examples" => {
            dual_examples().into_iter().map(Job::from).collect()
        }
        "table1-sample" => table1_sample()
            .into_iter()
            .map(|(family, params)| Job {
                family,
                params,
                printed: None,
            })
            .collect(),
        _ => {
            return Err(Error::Parse(format!(
                "unknown suite {name:?} (c3-examples, c4-examples, c3-dual-examples, table1-sample)"
            )))
        }
    };
    Ok(jobs)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<Outcome> {
    let mode: VerifyMode = a.mode.parse()?;
    let opts = VerifyOptions {
        mode,
        classical: a.classical,
    };
    let (name, jobs) = match &a.suite {
        Some(s) => (s.clone(), suite_jobs(s)?),
        None => {
            let n =
                a.n.ok_or_else(|| Error::Parse("--n is required with --family".into()))?;
            let (family, params) = eq_params(n, &a.eq)?;
            (
                "custom".to_string(),
                vec![Job {
                    family,
                    params,
                    printed: None,
                }],
            )
        }
    };
    let table1 = name == "table1-sample";

    // one engine per rank, shared by the workers
    let mut ranks: Vec<usize> = jobs.iter().map(|j| j.params.n).collect();
    ranks.sort();
    ranks.dedup();
    let engines: Vec<(usize, CharacterEngine)> = ranks
        .into_iter()
        .map(|n| Ok((n, engine(cli, n)?)))
        .collect::<Result<_>>()?;
    let engine_for = |n: usize| &engines.iter().find(|(r, _)| *r == n).unwrap().1;

    let results: Vec<Result<(Value, bool, String)>> = jobs
        .par_iter()
        .map(|job| {
            let eng = engine_for(job.params.n);
            let eq = make_equation(job.family, &job.params)?;
            if table1 {
                let r = verify_table1(&eq, eng)?;
                let line = format!(
                    "{:<4} {:<9} {}",
                    if r.ok { "ok" } else { "FAIL" },
                    r.family,
                    r.equation
                );
                return Ok((serde_json::to_value(&r).unwrap(), r.ok, line));
            }
            let r = verify_equation_with(&eq, eng, opts)?;
            let printed_ok = match job.printed {
                Some(p) => Some(matches_printed(&eq, p, eng.cartan())?),
                None => None,
            };
            let pass = r.verdict && printed_ok != Some(false);
            let v = json!({
                "family": r.family,
                "n": r.n,
                "s": r.s,
                "k": r.k,
                "equation": r.equation,
                "printed": job.printed,
                "printed_match": printed_ok,
                "mode": r.mode,
                "slot_sources": r.slot_sources,
                "lhs_terms": r.lhs_terms,
                "residual_terms": r.residual_terms,
                "residual_sample": r.residual_sample,
                "dominant_census": r.dominant_census,
                "classical_ok": r.classical_ok,
                "verdict": if pass { "pass" } else { "fail" },
            });
            let line = format!(
                "{:<4} {:<9} residual {:<3} {}",
                if pass { "ok" } else { "FAIL" },
                r.family,
                r.residual_terms,
                r.equation
            );
            Ok((v, pass, line))
        })
        .collect();

    let mut entries = vec![];
    let mut lines = vec![];
    let mut all = true;
    for r in results {
        let (v, pass, line) = r?;
        all &= pass;
        entries.push(v);
        lines.push(line);
    }
    let passed = entries.len() - lines.iter().filter(|l| l.starts_with("FAIL")).count();
    let mut report = json!({
        "suite": name,
        "equations": entries,
        "passed": passed,
        "total": lines.len(),
        "verdict": if all { "pass" } else { "fail" },
    });
    lines.push(format!("{name}: {passed}/{} passed", jobs.len()));

    if let Some(path) = &a.golden {
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
        let rendered = serde_json::to_string_pretty(&report).unwrap() + "\n";
        if a.update_golden {
            std::fs::write(path, rendered).map_err(io)?;
        } else {
            let want = std::fs::read_to_string(path).map_err(io)?;
            let same = serde_json::from_str::<Value>(&want)
                .map(|w| w == report)
                .unwrap_or(false);
            report["golden"] = json!({"path": path.display().to_string(), "match": same});
            lines.push(format!(
                "golden {}: {}",
                path.display(),
                if same { "match" } else { "MISMATCH" }
            ));
            all &= same;
        }
    }
    Ok(Outcome {
        report,
        text: lines.join("\n"),
        pass: all,
        raw: false,
    })
}

fn cmd_dual(n: usize, label: Option<&str>, eq: &EqArgs) -> Result<Outcome> {
    let cd = CartanData::type_c(n)?;
    if let Some(text) = label {
        let l = label_for(n, text)?;
        let d = l.mirror();
        let m = highest_weight(&l, &cd)?;
        let dm = highest_weight(&d, &cd)?;
        // the label mirror negates shifts; iota is an involution
        let mirror_ok = m.negate_shifts() == dm && dm.negate_shifts() == m;
        let iota_ok = iota_monomial(&iota_monomial(&m, n), n) == m;
        let report = json!({
            "label": l.to_string(),
            "dual": d.to_string(),
            "highest": m,
            "dual_highest": dm,
            "lowest": iota_monomial(&m, n),
            "mirror_consistent": mirror_ok,
            "iota_involutive": iota_ok,
        });
        let text = format!("{} -> {}   {m} -> {dm}", l.pretty(), d.pretty());
        return Ok(Outcome {
            report,
            text,
            pass: mirror_ok && iota_ok,
            raw: false,
        });
    }
    let (family, params) = eq_params(n, eq)?;
    let e = make_equation(family, &params)?;
    let d = e.mirror();
    let back = d.mirror() == e;
    let report = json!({
        "equation": e.pretty(),
        "family": family.name(),
        "dual": d.pretty(),
        "dual_family": d.family.name(),
        "involutive": back,
    });
    let text = format!("{}\n{}", e.pretty(), d.pretty());
    Ok(Outcome {
        report,
        text,
        pass: back,
        raw: false,
    })
}

fn parse_schedule(a: &ScheduleArgs) -> Result<(Case, Algebra, CartanData, Vec<u32>)> {
    let case: Case = a.case.parse()?;
    let algebra: Algebra = a.algebra.parse()?;
    let k = parse_k(&a.k)?;
    let n = a.n.unwrap_or(k.len());
    if n != k.len() {
        return Err(Error::Parse(format!(
            "--k has {} entries, rank is {n}",
            k.len()
        )));
    }
    Ok((case, algebra, CartanData::type_c(n)?, k))
}

fn cmd_schedule(a: &ScheduleArgs) -> Result<Outcome> {
    let (case, algebra, cd, k) = parse_schedule(a)?;
    let s = compile_schedule(case, &cd, &k)?;
    let target = s.target_in(algebra);
    let depth = required_depth(algebra, &cd, &s, MAX_DEPTH)?;
    let report = json!({
        "case": a.case,
        "algebra": algebra.name(),
        "n": cd.rank,
        "k": k,
        "columns": s.columns(),
        "steps": s.steps,
        "target": target.to_string(),
        "target_highest": highest_weight(&target, &cd)?,
        "required_depth": depth,
    });
    let text = format!(
        "{}\ntarget {}, required depth {depth}",
        s.column_string(),
        target.pretty()
    );
    Ok(Outcome::ok(report, text))
}

fn cmd_replay(
    cli: &Cli,
    a: &ScheduleArgs,
    depth: Option<usize>,
    payloads: bool,
) -> Result<Outcome> {
    let (case, algebra, cd, k) = parse_schedule(a)?;
    let s = compile_schedule(case, &cd, &k)?;
    let eng = engine(cli, cd.rank)?;
    let run = match depth {
        Some(d) => {
            let seed = build_initial_seed(algebra, &cd, d, payloads.then_some(&eng))?;
            run_schedule_checked(&seed, &s)?
        }
        None => {
            let d = required_depth(algebra, &cd, &s, MAX_DEPTH)?;
            let seed = build_initial_seed(algebra, &cd, d, payloads.then_some(&eng))?;
            run_schedule(&seed, &s)?
        }
    };
    let depth = run.seed.window().map(|w| w.depth).unwrap_or(0);

    let mut records = vec![];
    let cols = if s.steps.is_empty() {
        "(empty)".to_string()
    } else {
        s.column_string()
    };
    let mut lines = vec![format!("schedule {cols} at depth {depth}")];
    let (mut matched, mut auxiliary, mut unmatched, mut inexact) = (0, 0, 0, 0);
    let mut verified_all = true;
    for rec in &run.records {
        let c = classify_record(rec, &cd, algebra)?;
        match c.class {
            RecordClass::Matched => matched += 1,
            RecordClass::Auxiliary => auxiliary += 1,
            RecordClass::Unmatched => unmatched += 1,
            RecordClass::Inexact => {
                inexact += 1;
                continue;
            }
        }
        let (verified, payload_ok) = if payloads {
            let v = match &c.matched {
                Some(m) => Some(verify_match(m, &eng)?),
                None => None,
            };
            (v, payload_matches(rec, &eng)?)
        } else {
            (None, None)
        };
        verified_all &=
            verified != Some(false) && payload_ok != Some(false) && rec.payload_divided == payloads;
        records.push(json!({
            "step": rec.step,
            "vertex": rec.vertex,
            "provenance": rec.provenance,
            "relation": rec.pretty(),
            "new": rec.new.label.as_ref().map(|l| l.to_string()),
            "new_highest": rec.new.hw,
            "class": c.class,
            "family": c.matched.as_ref().map(|m| m.family.clone()),
            "match": c.matched.as_ref().map(|m| m.pretty()),
            "verified": verified,
            "payload_matches": payload_ok,
        }));
        lines.push(format!(
            "#{:<3} {:<10} {:<9} {}",
            rec.step,
            format!("{:?}", c.class).to_lowercase(),
            c.matched.as_ref().map_or("-", |m| m.family.as_str()),
            rec.pretty()
        ));
    }
    let target = s.target_in(algebra);
    let reached = run.reaches(&highest_weight(&target, &cd)?);
    let pass = unmatched == 0 && reached && verified_all;
    let report = json!({
        "case": a.case,
        "algebra": algebra.name(),
        "n": cd.rank,
        "k": k,
        "depth": depth,
        "payloads": payloads,
        "columns": s.columns(),
        "target": target.to_string(),
        "target_reached": reached,
        "records": records,
        "summary": {
            "mutations": run.records.len(),
            "inexact": inexact,
            "matched": matched,
            "auxiliary": auxiliary,
            "unmatched": unmatched,
        },
        "verdict": if pass { "pass" } else { "fail" },
    });
    lines.push(format!(
        "{matched} matched, {auxiliary} auxiliary, {unmatched} unmatched, {inexact} outside the window; target {} {}",
        target.pretty(),
        if reached { "reached" } else { "NOT reached" }
    ));
    Ok(Outcome {
        report,
        text: lines.join("\n"),
        pass,
        raw: false,
    })
}

fn cmd_cache(cli: &Cli, action: &str) -> Result<Outcome> {
    let c = cache(cli)?.ok_or_else(|| {
        Error::Parse(format!(
            "no cache directory (set {CACHE_ENV} or --cache-dir)"
        ))
    })?;
    let dir = c.dir().display().to_string();
    let (report, text) = match action {
        "clear" => {
            let removed = c.clear()?;
            (
                json!({"dir": dir, "removed": removed}),
                format!("removed {removed} entries from {dir}"),
            )
        }
        "path" => (json!({"dir": dir}), dir.clone()),
        _ => {
            let e = c.entries()?;
            let bytes: u64 = e.iter().map(|(_, b)| b).sum();
            (
                json!({"dir": dir, "entries": e.len(), "bytes": bytes}),
                format!("{dir}: {} entries, {bytes} bytes", e.len()),
            )
        }
    };
    Ok(Outcome::ok(report, text))
}
