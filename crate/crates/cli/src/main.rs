use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use npstrata::classify::{classify, lookup_family, match_datum};
use npstrata::degeneration::{degenerations, is_pel_decomposable, pel_decomposable_set};
use npstrata::golden::GoldenFile;
use npstrata::kottwitz::{class_label, congruence_class_of, congruence_classes};
use npstrata::mass::{growth_table, local_factor, to_tsv, MassInput, PrimeCase};
use npstrata::monodromy::parse_list;
use npstrata::qr::{cross_check_all, qr_mu_ordinary_closed_form, slope_half_bound_holds};
use npstrata::report::{analyze, regenerate, verify_tables, SCHEMA};
use npstrata::{Error, MonodromyDatum, NewtonPolygon};
use serde_json::{json, Value};

const GOLDEN_ENV: &str = "NPSTRATA_GOLDEN";

/// Newton polygon strata of cyclic covers of the projective line.
#[derive(Parser)]
#[command(name = "npstrata", version)]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the command's machine-readable output to this file.
    #[arg(long, global = true, value_name = "PATH")]
    emit: Option<PathBuf>,
    /// Reference tables to use instead of the built-in copy
    /// (also settable through NPSTRATA_GOLDEN).
    #[arg(long, global = true, value_name = "PATH")]
    golden: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full report for one datum and one residue class of p.
    Analyze {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        prime: PrimeArgs,
    },
    /// Recompute the reference tables and compare them cell by cell.
    Tables {
        /// Restrict to one family, e.g. M17.
        #[arg(long)]
        family: Option<String>,
    },
    /// Smooth-occurrence verdicts for a special family.
    Classify {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        prime: OptionalPrime,
    },
    /// Degenerations of compact type and decomposable polygons.
    Degenerations {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        prime: OptionalPrime,
        /// Test one polygon for decomposability (needs a residue class).
        #[arg(long)]
        polygon: Option<String>,
    },
    /// Local factor of the mass formula, or a table over several q.
    Mass {
        #[arg(long)]
        case: String,
        #[arg(long)]
        n: u32,
        #[arg(long, conflicts_with = "qs")]
        q: Option<u64>,
        /// Comma-separated ascending prime powers.
        #[arg(long)]
        qs: Option<String>,
    },
    /// The quadratic-residue family for a prime m ≡ 3 mod 4.
    Qr {
        #[arg(long)]
        m: u32,
        /// Compare the closed form with the orbit computation at every
        /// non-residue class.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Args)]
struct DatumArgs {
    /// Registry id such as M17.
    #[arg(long, conflicts_with_all = ["m", "a"])]
    family: Option<String>,
    #[arg(long, requires = "a")]
    m: Option<i64>,
    /// Inertia type, comma separated.
    #[arg(long, requires = "m")]
    a: Option<String>,
}

#[derive(Args)]
struct PrimeArgs {
    /// A prime (or any integer) reduced mod m.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "p_class", required_unless_present = "p_class")]
    p: Option<i64>,
    /// A residue naming its congruence class.
    #[arg(long)]
    p_class: Option<i64>,
}

#[derive(Args)]
struct OptionalPrime {
    #[arg(long, allow_negative_numbers = true, conflicts_with = "p_class")]
    p: Option<i64>,
    #[arg(long)]
    p_class: Option<i64>,
}

impl PrimeArgs {
    fn residue(&self) -> i64 {
        self.p.or(self.p_class).expect("clap enforces one of --p, --p-class")
    }
}

impl OptionalPrime {
    fn residue(&self) -> Option<i64> {
        self.p.or(self.p_class)
    }
}

enum Failure {
    Usage(String),
    Math(String),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::UnknownFamily(_) | Error::Golden(_) => Failure::Usage(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    json: bool,
    emit: Option<PathBuf>,
    golden: Option<PathBuf>,
}

impl Ctx {
    fn golden(&self) -> Result<GoldenFile, Failure> {
        let path = self
            .golden
            .clone()
            .or_else(|| std::env::var_os(GOLDEN_ENV).map(PathBuf::from));
        match path {
            Some(p) => Ok(GoldenFile::load(&p)?),
            None => Ok(GoldenFile::builtin()),
        }
    }

    /// Prints `text` or `value` depending on `--json`, and writes `value` to
    /// `--emit` when given.
    fn output(&self, text: &str, value: &Value) -> Outcome {
        if self.json {
            println!("{}", pretty(value));
        } else {
            print!("{text}");
        }
        if let Some(path) = &self.emit {
            write_file(path, &format!("{}\n", pretty(value)))?;
        }
        Ok(())
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn resolve(args: &DatumArgs) -> Result<MonodromyDatum, Failure> {
    if let Some(id) = &args.family {
        return Ok(lookup_family(id)?.datum);
    }
    match (args.m, &args.a) {
        (Some(m), Some(a)) => {
            let a = parse_list(a)?;
            Ok(MonodromyDatum::new(m, a.len(), &a)?)
        }
        _ => Err(Failure::Usage("give --family or both --m and --a".into())),
    }
}

fn cmd_analyze(ctx: &Ctx, datum: &DatumArgs, prime: &PrimeArgs) -> Outcome {
    let d = resolve(datum)?;
    let report = analyze(&d, prime.residue())?;
    let value = serde_json::to_value(&report).expect("report serializes");
    ctx.output(&report.to_string(), &value)
}

fn cmd_tables(ctx: &Ctx, family: Option<&str>) -> Outcome {
    let golden = ctx.golden()?;
    let outcome = verify_tables(&golden, family)?;
    if ctx.json {
        println!("{}", pretty(&json!({ "schema": SCHEMA, "tables": outcome })));
    } else {
        println!(
            "{} family-class cells in {} families checked",
            outcome.cells, outcome.families
        );
        for k in &outcome.known {
            println!("known divergence  {k}");
        }
        for m in &outcome.mismatches {
            println!("MISMATCH  {m}");
        }
    }
    if let Some(path) = &ctx.emit {
        let mut fresh = regenerate(&golden)?;
        if let Some(id) = family {
            let keep = golden.family(id)?.id.clone();
            fresh.families.retain(|f| f.id == keep);
        }
        let text = serde_json::to_string_pretty(&fresh).expect("tables serialize");
        write_file(path, &format!("{text}\n"))?;
    }
    if outcome.ok() {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn classes_for(d: &MonodromyDatum, residue: Option<i64>) -> Result<Vec<Vec<u32>>, Failure> {
    Ok(match residue {
        Some(p) => vec![congruence_class_of(d.m(), p)?],
        None => congruence_classes(d.m()),
    })
}

fn cmd_classify(ctx: &Ctx, datum: &DatumArgs, prime: &OptionalPrime) -> Outcome {
    let d = resolve(datum)?;
    let id = match_datum(&d).ok_or_else(|| Failure::from(Error::NotSpecial(d.to_string())))?;
    let mut text = format!("{id}  {d}\n");
    let mut rows = Vec::new();
    for class in classes_for(&d, prime.residue())? {
        let label = class_label(d.m(), &class);
        let statuses = classify(&d, i64::from(class[0]))?;
        text.push_str(&format!("{label}\n"));
        for s in &statuses {
            text.push_str(&format!("  {} : {}\n", s.polygon, s.verdict));
        }
        rows.push(json!({
            "class": class,
            "label": label,
            "verdicts": statuses.iter().map(|s| json!({
                "polygon": s.polygon.to_string(),
                "verdict": s.verdict,
                "justification": s.justification,
            })).collect::<Vec<_>>(),
        }));
    }
    let value = json!({ "schema": SCHEMA, "family": id, "datum": d, "classes": rows });
    ctx.output(&text, &value)
}

fn cmd_degenerations(ctx: &Ctx, datum: &DatumArgs, prime: &OptionalPrime, polygon: Option<&str>) -> Outcome {
    let d = resolve(datum)?;
    let degs = degenerations(&d);
    let mut text = format!("{d}\n");
    if degs.is_empty() {
        text.push_str("no degenerations of compact type\n");
    }
    for g in &degs {
        text.push_str(&format!(
            "  {g}   r={}  genus {} + {}·{}\n",
            g.r,
            g.alpha1.genus(),
            g.r,
            g.alpha2.genus()
        ));
    }
    let mut value = json!({
        "schema": SCHEMA,
        "datum": d,
        "degenerations": degs.iter().map(|g| json!({
            "rendered": g.to_string(),
            "subset": g.subset,
            "alpha1": g.alpha1,
            "alpha2": g.alpha2,
            "r": g.r,
        })).collect::<Vec<_>>(),
    });
    if let Some(p) = prime.residue() {
        let class = congruence_class_of(d.m(), p)?;
        let set = pel_decomposable_set(&d, p)?;
        let strings: Vec<String> = set.iter().map(ToString::to_string).collect();
        text.push_str(&format!(
            "decomposable at {}: {}\n",
            class_label(d.m(), &class),
            if strings.is_empty() { "∅".to_string() } else { strings.join(", ") }
        ));
        value["class"] = json!(class);
        value["decomposable"] = json!(strings);
        if let Some(poly) = polygon {
            let nu: NewtonPolygon = poly.parse()?;
            let witness = is_pel_decomposable(&d, p, &nu)?;
            match &witness {
                Some(w) => text.push_str(&format!(
                    "{nu} = {} ⊕ ({})^{} along {}\n",
                    w.nu1, w.nu2, w.degeneration.r, w.degeneration
                )),
                None => text.push_str(&format!("{nu} is not decomposable\n")),
            }
            value["query"] = json!({
                "polygon": nu.to_string(),
                "decomposable": witness.is_some(),
                "witness": witness.map(|w| json!({
                    "degeneration": w.degeneration.to_string(),
                    "nu1": w.nu1.to_string(),
                    "nu2": w.nu2.to_string(),
                })),
            });
        }
    } else if polygon.is_some() {
        return Err(Failure::Usage("--polygon needs --p or --p-class".into()));
    }
    ctx.output(&text, &value)
}

fn cmd_mass(ctx: &Ctx, case: &str, n: u32, q: Option<u64>, qs: Option<&str>) -> Outcome {
    let case: PrimeCase = case.parse()?;
    match (q, qs) {
        (Some(q), None) => {
            let input = MassInput::new(case, n, q)?;
            let lambda = local_factor(&input)?;
            let value = json!({ "schema": SCHEMA, "case": case, "n": n, "q": q, "lambda": lambda.to_string() });
            if ctx.json {
                println!("{}", pretty(&value));
            } else {
                println!("{lambda}");
            }
            if let Some(path) = &ctx.emit {
                write_file(path, &to_tsv(&[(q, lambda)]))?;
            }
            Ok(())
        }
        (None, Some(list)) => {
            let qs: Vec<u64> = parse_list(list)?
                .into_iter()
                .map(|x| u64::try_from(x).map_err(|_| Failure::Usage(format!("q = {x} must be positive"))))
                .collect::<Result<_, _>>()?;
            let rows = growth_table(case, n, &qs)?;
            let tsv = to_tsv(&rows);
            if ctx.json {
                let value = json!({
                    "schema": SCHEMA,
                    "case": case,
                    "n": n,
                    "rows": rows.iter().map(|(q, l)| json!({ "q": q, "lambda": l.to_string() })).collect::<Vec<_>>(),
                });
                println!("{}", pretty(&value));
            } else {
                print!("{tsv}");
            }
            if let Some(path) = &ctx.emit {
                write_file(path, &tsv)?;
            }
            Ok(())
        }
        _ => Err(Failure::Usage("give exactly one of --q or --qs".into())),
    }
}

fn cmd_qr(ctx: &Ctx, m: u32, check: bool) -> Outcome {
    let form = qr_mu_ordinary_closed_form(m)?;
    let data = &form.data;
    let mut text = format!(
        "m={m} N={} a={}\nc1={} c2={} E1={} E2={} genus={}\nμ-ordinary at non-residues: {}\nDieudonné module: {}\nslope 1/2 multiplicity {} (≥ 2√g: {})\nknown p-rank results assume p ≥ {}\n",
        data.n,
        parse_free(&data.a),
        data.c1,
        data.c2,
        data.e1,
        data.e2,
        data.genus,
        form.polygon,
        form.dm,
        form.slope_half_multiplicity,
        slope_half_bound_holds(&form),
        data.p_lower_bound,
    );
    let mut value = json!({
        "schema": SCHEMA,
        "family": data,
        "mu_ordinary": form.polygon.to_string(),
        "dieudonne": form.dm.to_string(),
        "slope_half_multiplicity": form.slope_half_multiplicity,
        "slope_half_bound": slope_half_bound_holds(&form),
    });
    let mut failed = false;
    if check {
        let checks = cross_check_all(m)?;
        for c in &checks {
            text.push_str(&format!(
                "p ≡ {} mod {m}: computed {}  {}\n",
                c.residue,
                c.computed,
                if c.ok() { "oracle OK" } else { "oracle MISMATCH" }
            ));
            failed |= !c.ok();
        }
        value["checks"] = json!(checks);
    }
    ctx.output(&text, &value)?;
    if failed {
        Err(Failure::Mismatch)
    } else {
        Ok(())
    }
}

fn parse_free(a: &[u32]) -> String {
    a.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx {
        json: cli.json,
        emit: cli.emit,
        golden: cli.golden,
    };
    match &cli.command {
        Command::Analyze { datum, prime } => cmd_analyze(&ctx, datum, prime),
        Command::Tables { family } => cmd_tables(&ctx, family.as_deref()),
        Command::Classify { datum, prime } => cmd_classify(&ctx, datum, prime),
        Command::Degenerations { datum, prime, polygon } => {
            cmd_degenerations(&ctx, datum, prime, polygon.as_deref())
        }
        Command::Mass { case, n, q, qs } => cmd_mass(&ctx, case, *n, *q, qs.as_deref()),
        Command::Qr { m, check } => cmd_qr(&ctx, *m, *check),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
