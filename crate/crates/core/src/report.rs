//! Full analysis of one datum at one residue class, and regeneration and
//! verification of the reference tables.

use std::collections::BTreeSet;
use std::fmt;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::classify::{classify, match_datum, Verdict};
use crate::degeneration::{degenerations, parse_degeneration, pel_decomposable_set, DegenerationKey};
use crate::dieudonne::{mu_ordinary_module, CombinatorialBT1, DmExpr, ModuleInvariants};
use crate::error::{Error, Result};
use crate::golden::{GoldenCell, GoldenFamily, GoldenFile};
use crate::kottwitz::{
    class_label, congruence_class_of, congruence_classes, mu_ordinary, newton_polygon_set, orbit_decomposition,
    unique_maximum, unique_minimum,
};
use crate::monodromy::MonodromyDatum;
use crate::newton::NewtonPolygon;

pub const SCHEMA: &str = "npg/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub datum: MonodromyDatum,
    pub family: Option<String>,
    pub residue: u32,
    pub class: Vec<u32>,
    pub class_label: String,
    pub signature: Vec<u32>,
    pub genus: u32,
    pub orbits: Vec<OrbitReport>,
    pub mu_ordinary: String,
    pub np_set: Vec<String>,
    pub basic: String,
    pub dieudonne: DmReport,
    pub degenerations: Vec<String>,
    pub decomposable: Vec<String>,
    pub classification: Option<Vec<VerdictRow>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub cycle: Vec<u32>,
    pub dual: Vec<u32>,
    pub g: u32,
    pub f_values: Vec<u32>,
    pub mu_ordinary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmReport {
    pub invariants: ModuleInvariants,
    pub eo_type: Vec<u32>,
    pub summand_form: String,
    pub components: Vec<ComponentRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRow {
    pub word: String,
    pub multiplicity: usize,
    pub template: String,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub polygon: String,
    pub verdict: Verdict,
    pub justification: String,
}

fn strings(v: &[NewtonPolygon]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn inconsistent(what: String) -> Error {
    Error::Inconsistent(what)
}

fn dm_report(module: &CombinatorialBT1) -> Result<DmReport> {
    Ok(DmReport {
        invariants: module.invariants(),
        eo_type: module.eo_type()?.0,
        summand_form: module.summand_form(),
        components: module
            .decompose()
            .into_iter()
            .map(|c| ComponentRow {
                word: c.word.to_string(),
                multiplicity: c.multiplicity,
                template: c.template.name(),
                rank: c.labels.len(),
            })
            .collect(),
    })
}

/// Everything computable about `d` at the residue class of `p`. The
/// cross-module invariants are re-checked and a violation is an error.
pub fn analyze(d: &MonodromyDatum, p: i64) -> Result<Report> {
    let m = d.m();
    let class = congruence_class_of(m, p)?;
    // every output depends on p only through its class; use its smallest member
    let p = i64::from(class[0]);
    let sig = d.signature();
    let genus = d.genus();
    let orbits = orbit_decomposition(m, p, &sig)?;
    let orbit_rows: Vec<OrbitReport> = orbits
        .iter()
        .map(|o| OrbitReport {
            cycle: o.cycle().to_vec(),
            dual: orbits[o.dual_index()].cycle().to_vec(),
            g: o.g(),
            f_values: o.f_values().to_vec(),
            mu_ordinary: o.mu_ordinary().polygon.to_string(),
        })
        .collect();

    let mu = mu_ordinary(d, p)?;
    let set = newton_polygon_set(d, p)?;
    let basic = unique_maximum(&set).ok_or(Error::NotUnique("basic polygon"))?;
    if unique_minimum(&set).as_ref() != Some(&mu) {
        return Err(inconsistent(format!("μ-ordinary {mu} is not the unique minimum")));
    }
    for nu in &set {
        if !nu.is_symmetric() || !nu.has_integral_breakpoints() || nu.height() != 2 * genus {
            return Err(inconsistent(format!("polygon {nu} fails symmetry/integrality/height")));
        }
    }

    let module = mu_ordinary_module(d, p)?;
    if module.p_rank() != mu.p_rank() {
        return Err(inconsistent(format!(
            "p-rank {} of the μ-ordinary module differs from polygon p-rank {}",
            module.p_rank(),
            mu.p_rank()
        )));
    }
    if module.a_number() != module.a_number_via_kernels() {
        return Err(inconsistent("a-number computations disagree".into()));
    }

    let family = match_datum(d);
    let classification = match family {
        Some(_) => Some(
            classify(d, p)?
                .into_iter()
                .map(|s| VerdictRow {
                    polygon: s.polygon.to_string(),
                    verdict: s.verdict,
                    justification: s.justification,
                })
                .collect(),
        ),
        None => None,
    };

    Ok(Report {
        schema: SCHEMA.to_string(),
        datum: d.clone(),
        family,
        residue: class[0],
        class_label: class_label(m, &class),
        class,
        signature: sig.values().to_vec(),
        genus,
        orbits: orbit_rows,
        mu_ordinary: mu.to_string(),
        np_set: strings(&set),
        basic: basic.to_string(),
        dieudonne: dm_report(&module)?,
        degenerations: degenerations(d).iter().map(ToString::to_string).collect(),
        decomposable: strings(&pel_decomposable_set(d, p)?),
        classification,
    })
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.family.as_deref().unwrap_or("-");
        writeln!(f, "datum      {}  family {name}", self.datum)?;
        writeln!(f, "class      {}", self.class_label)?;
        let sig: Vec<String> = self.signature.iter().map(u32::to_string).collect();
        writeln!(f, "signature  ({})  genus {}", sig.join(","), self.genus)?;
        writeln!(f, "orbits")?;
        for o in &self.orbits {
            let cyc: Vec<String> = o.cycle.iter().map(u32::to_string).collect();
            let fv: Vec<String> = o.f_values.iter().map(u32::to_string).collect();
            writeln!(
                f,
                "  {{{}}}  g={}  f=({})  μ={}",
                cyc.join(","),
                o.g,
                fv.join(","),
                o.mu_ordinary
            )?;
        }
        writeln!(f, "μ-ordinary {}", self.mu_ordinary)?;
        writeln!(f, "basic      {}", self.basic)?;
        writeln!(f, "NP set     {}", self.np_set.join("  |  "))?;
        let inv = &self.dieudonne.invariants;
        let eo: Vec<String> = self.dieudonne.eo_type.iter().map(u32::to_string).collect();
        writeln!(
            f,
            "μ-ord DM   {}  rank {} p-rank {} a-number {} EO [{}]",
            self.dieudonne.summand_form,
            inv.rank,
            inv.p_rank,
            inv.a_number,
            eo.join(",")
        )?;
        if self.degenerations.is_empty() {
            writeln!(f, "degenerations  none")?;
        } else {
            writeln!(f, "degenerations  {}", self.degenerations.join(", "))?;
        }
        writeln!(f, "decomposable   {}", display_set(&self.decomposable))?;
        if let Some(rows) = &self.classification {
            writeln!(f, "classification")?;
            for r in rows {
                writeln!(f, "  {:<28} {}", r.polygon, r.verdict)?;
            }
        }
        Ok(())
    }
}

fn display_set(v: &[String]) -> String {
    if v.is_empty() {
        "∅".to_string()
    } else {
        v.join(", ")
    }
}

/// A reference cell that the computation does not reproduce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub family: String,
    pub cell: String,
    pub field: String,
    pub expected: String,
    pub got: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: expected {}, got {}",
            self.family, self.cell, self.field, self.expected, self.got
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TableOutcome {
    pub families: usize,
    pub cells: usize,
    pub mismatches: Vec<Mismatch>,
    /// Differences declared in the reference file, reproduced exactly.
    pub known: Vec<Mismatch>,
}

impl TableOutcome {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Computed counterpart of one reference cell.
fn compute_cell(d: &MonodromyDatum, class: &[u32], omit_mu: bool) -> Result<(Vec<String>, Vec<String>, CombinatorialBT1)> {
    let p = i64::from(class[0]);
    let set = newton_polygon_set(d, p)?;
    let mu = mu_ordinary(d, p)?;
    let mut dec = pel_decomposable_set(d, p)?;
    if omit_mu {
        dec.retain(|nu| *nu != mu);
    }
    Ok((strings(&set), strings(&dec), mu_ordinary_module(d, p)?))
}

struct FamilyCheck {
    cells: usize,
    mismatches: Vec<Mismatch>,
    known: Vec<Mismatch>,
}

impl FamilyCheck {
    fn record(&mut self, fam: &GoldenFamily, class: Option<&[u32]>, field: &str, expected: String, got: String) {
        let cell = match class {
            Some(c) => class_label(fam.m, c),
            None => "-".to_string(),
        };
        let declared = fam.divergence(class, field).is_some_and(|d| d.computed == got);
        let entry = Mismatch {
            family: fam.id.clone(),
            cell,
            field: field.to_string(),
            expected,
            got,
        };
        if declared {
            self.known.push(entry);
        } else {
            self.mismatches.push(entry);
        }
    }
}

fn check_family(fam: &GoldenFamily) -> FamilyCheck {
    let mut out = FamilyCheck {
        cells: 0,
        mismatches: Vec::new(),
        known: Vec::new(),
    };
    let d = match fam.datum() {
        Ok(d) => d,
        Err(e) => {
            out.record(fam, None, "datum", format!("{:?}", fam.a), e.to_string());
            return out;
        }
    };
    let m = d.m();

    if let Some(listed) = &fam.degenerations {
        let computed: BTreeSet<DegenerationKey> = degenerations(&d).iter().map(|g| g.key()).collect();
        let expected = listed
            .iter()
            .map(|s| parse_degeneration(m, s))
            .collect::<Result<BTreeSet<_>>>();
        if expected.as_ref().ok() != Some(&computed) {
            out.record(
                fam,
                None,
                "degenerations",
                display_set(listed),
                display_set(&degenerations(&d).iter().map(ToString::to_string).collect::<Vec<_>>()),
            );
        }
    }

    let classes = congruence_classes(m);
    let listed: BTreeSet<Vec<u32>> = fam.cells.iter().map(|c| c.class.clone()).collect();
    if listed != classes.iter().cloned().collect::<BTreeSet<_>>() {
        out.record(fam, None, "classes", format!("{listed:?}"), format!("{classes:?}"));
    }

    for cell in &fam.cells {
        if !classes.contains(&cell.class) {
            continue;
        }
        out.cells += 1;
        let class = Some(cell.class.as_slice());
        let (set, dec, module) = match compute_cell(&d, &cell.class, cell.decomposable_omits_mu_ordinary) {
            Ok(x) => x,
            Err(e) => {
                out.record(fam, class, "computation", "success".into(), e.to_string());
                continue;
            }
        };
        if set != cell.np_set {
            out.record(fam, class, "np_set", cell.np_set.join(" | "), set.join(" | "));
        }
        if let Some(expected) = &cell.decomposable {
            if *expected != dec {
                out.record(fam, class, "decomposable", display_set(expected), display_set(&dec));
            }
        }
        if let Some(form) = &cell.mu_ordinary_dm {
            match form.parse::<DmExpr>().map(|e| e.module()) {
                Ok(reference) => {
                    let same = reference.is_isomorphic(&module)
                        && reference.invariants() == module.invariants()
                        && reference.eo_type().ok() == module.eo_type().ok();
                    if !same {
                        out.record(fam, class, "mu_ordinary_dm", form.clone(), module.summand_form());
                    }
                }
                Err(e) => out.record(fam, class, "mu_ordinary_dm", form.clone(), e.to_string()),
            }
        }
    }
    out
}

/// Recomputes every cell of `golden` (optionally one family) and lists the
/// cells that differ. Families are checked in parallel; the mismatch list is
/// in file order.
pub fn verify_tables(golden: &GoldenFile, family: Option<&str>) -> Result<TableOutcome> {
    let families: Vec<&GoldenFamily> = match family {
        Some(id) => vec![golden.family(id)?],
        None => golden.families.iter().collect(),
    };
    let results: Vec<FamilyCheck> = thread::scope(|s| {
        let handles: Vec<_> = families
            .iter()
            .map(|fam| s.spawn(move || check_family(fam)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("table worker panicked"))
            .collect()
    });
    let mut outcome = TableOutcome {
        families: families.len(),
        ..TableOutcome::default()
    };
    for r in results {
        outcome.cells += r.cells;
        outcome.mismatches.extend(r.mismatches);
        outcome.known.extend(r.known);
    }
    Ok(outcome)
}

/// The reference file as the computation would write it, keeping the ids
/// and provenance of `golden`.
pub fn regenerate(golden: &GoldenFile) -> Result<GoldenFile> {
    let mut out = golden.clone();
    for fam in &mut out.families {
        let d = fam.datum()?;
        if fam.degenerations.is_some() {
            fam.degenerations = Some(degenerations(&d).iter().map(ToString::to_string).collect());
        }
        fam.known_divergences.clear();
        let old = std::mem::take(&mut fam.cells);
        for class in congruence_classes(d.m()) {
            let prior = old.iter().find(|c| c.class == class);
            let omit = prior.is_some_and(|c| c.decomposable_omits_mu_ordinary) || (prior.is_none() && class == [1]);
            let (set, dec, module) = compute_cell(&d, &class, omit)?;
            let keep_dec = prior.is_none_or(|c| c.decomposable.is_some());
            fam.cells.push(GoldenCell {
                provenance: prior
                    .map(|c| c.provenance.clone())
                    .unwrap_or_else(|| format!("{} {}", fam.id, class_label(d.m(), &class))),
                class,
                np_set: set,
                decomposable: keep_dec.then_some(dec),
                mu_ordinary_dm: Some(module.summand_form()),
                decomposable_omits_mu_ordinary: omit,
            });
        }
    }
    Ok(out)
}
