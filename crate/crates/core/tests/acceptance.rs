//! One line per acceptance criterion. A criterion may only fail with exactly
//! the discrepancies listed in `KNOWN`; anything else fails the target.
//! Runs without the test harness so the lines are always shown.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use common::oracle_for;
use npstrata::classify::{classify, lookup_family, registry, Verdict};
use npstrata::degeneration::{degenerations, parse_degeneration, pel_decomposable_set, DegenerationKey};
use npstrata::dieudonne::{mu_ordinary_module, CombinatorialBT1, DmExpr};
use npstrata::golden::{GoldenFamily, GoldenFile};
use npstrata::kottwitz::{
    basic_polygon, class_label, congruence_classes, mu_ordinary, newton_polygon_set, orbit_decomposition,
};
use npstrata::mass::{growth_table, local_factor, unsimplified_split, MassInput, PrimeCase};
use npstrata::qr::{cross_check_all, qr_mu_ordinary_closed_form};
use npstrata::{MonodromyDatum, NewtonPolygon};

const GOLDEN_BUDGET: Duration = Duration::from_secs(2);
const ORACLE_BUDGET: Duration = Duration::from_secs(1);
const MASS_QS: [u64; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

/// Discrepancies with the published values that the computation does not
/// reproduce, by criterion. Each is explained in the project notes.
const KNOWN: &[(u32, &str)] = &[
    (1, "M[20] p ≡ 7 mod 12: expected ord^4 ⊕ ss^3 | ord^2 ⊕ ss^5, got ord^4 ⊕ ss^3 | ord^2 ⊕ (1/4,3/4) ⊕ ss"),
    (3, "M[17] p ≡ 3,5 mod 7: expected [0,1,2,2,2,2], got [0,1,1,2,2,2]"),
    (4, "M[12] degenerations: expected (1,1,4)+(2,1,3), got ∅"),
    (4, "M[12] p ≡ 5 mod 6: expected ss^4, got ∅"),
    (5, "M[20] p ≡ 7 mod 12: ord^2 ⊕ ss^5 not in the polygon set"),
];

struct Outcome {
    checked: usize,
    failures: Vec<String>,
    note: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            checked: 0,
            failures: Vec::new(),
            note: String::new(),
        }
    }

    fn check(&mut self, ok: bool, failure: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(failure());
        }
    }
}

fn join(v: &[String]) -> String {
    if v.is_empty() {
        "∅".to_string()
    } else {
        v.join(" | ")
    }
}

fn strings(polys: &[NewtonPolygon]) -> Vec<String> {
    polys.iter().map(ToString::to_string).collect()
}

fn golden() -> GoldenFile {
    GoldenFile::builtin()
}

fn datum(fam: &GoldenFamily) -> MonodromyDatum {
    fam.datum().unwrap()
}

fn family(id: &str) -> MonodromyDatum {
    lookup_family(id).unwrap().datum
}

fn module(expr: &str) -> CombinatorialBT1 {
    expr.parse::<DmExpr>().unwrap().module()
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    for fam in golden().families {
        let d = datum(&fam);
        for cell in &fam.cells {
            let got = strings(&newton_polygon_set(&d, i64::from(cell.class[0])).unwrap());
            let want: BTreeSet<&String> = cell.np_set.iter().collect();
            out.check(got.iter().collect::<BTreeSet<_>>() == want, || {
                format!(
                    "{} {}: expected {}, got {}",
                    fam.id,
                    class_label(fam.m, &cell.class),
                    join(&cell.np_set),
                    join(&got)
                )
            });
        }
    }
    let elapsed = start.elapsed();
    out.check(elapsed < GOLDEN_BUDGET, || format!("took {elapsed:?}"));
    out.note = format!("{:.0?}", elapsed);
    out
}

/// `(label, F(label), V(label))` with `None` for 0.
type Row = (&'static str, Option<&'static str>, Option<&'static str>);

fn compare_table(out: &mut Outcome, name: &str, m: &CombinatorialBT1, rows: &[Row]) {
    let json = m.to_json();
    for &(label, f, v) in rows {
        for (map, want) in [("F", f), ("V", v)] {
            let got = json[map][label].as_str();
            out.check(got == want, || format!("{name}: {map}({label}) = {got:?}, printed {want:?}"));
        }
    }
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let m17 = family("M17");
    let m19 = family("M19");

    // split class, local-local part: each printed table matches its own p
    let p2 = mu_ordinary_module(&m17, 2).unwrap();
    let p4 = mu_ordinary_module(&m17, 4).unwrap();
    compare_table(
        &mut out,
        "M[17] p ≡ 2,4 t=0",
        &p2,
        &[("e1", Some("e2"), Some("e4")), ("e2", None, None), ("e4", None, Some("e2"))],
    );
    compare_table(
        &mut out,
        "M[17] p ≡ 2,4 t=1",
        &p4,
        &[("e'3", Some("e'5"), Some("e'6")), ("e'5", Some("e'6"), None), ("e'6", None, None)],
    );
    out.check(p2.is_isomorphic(&module("L^3 ⊕ E/E(F-V^2) ⊕ E/E(F^2-V)")), || {
        format!("M[17] p ≡ 2,4: decomposition {}", p2.summand_form())
    });

    let p3 = mu_ordinary_module(&m17, 3).unwrap();
    compare_table(
        &mut out,
        "M[17] p ≡ 3,5 t=0",
        &p3,
        &[
            ("e1", Some("e3"), None),
            ("e3", Some("e2"), None),
            ("e2", None, None),
            ("e6", Some("e4"), Some("e2")),
            ("e4", None, None),
            ("e5", Some("e1"), Some("e4")),
        ],
    );
    compare_table(
        &mut out,
        "M[17] p ≡ 3,5 t=1",
        &p3,
        &[
            ("e'1", None, None),
            ("e'3", Some("e'2"), Some("e'1")),
            ("e'2", None, None),
            ("e'6", None, Some("e'2")),
            ("e'4", None, Some("e'6")),
            ("e'5", Some("e'1"), Some("e'4")),
        ],
    );
    out.check(p3.a_number() == 4, || format!("M[17] p ≡ 3,5: a-number {}", p3.a_number()));

    let m19p2 = mu_ordinary_module(&m19, 2).unwrap();
    compare_table(
        &mut out,
        "M[19] p ≡ 2,5 t=0",
        &m19p2,
        &[
            ("e1", Some("e2"), None),
            ("e2", None, None),
            ("e4", None, Some("e2")),
            ("e8", Some("e7"), Some("e4")),
            ("e7", Some("e5"), None),
            ("e5", Some("e1"), None),
        ],
    );
    compare_table(
        &mut out,
        "M[19] p ≡ 2,5 t=1",
        &m19p2,
        &[
            ("e'1", None, None),
            ("e'2", None, Some("e'1")),
            ("e'4", None, Some("e'2")),
            ("e'8", None, Some("e'4")),
            ("e'7", Some("e'5"), Some("e'8")),
            ("e'5", Some("e'1"), None),
        ],
    );
    out.check(m19p2.a_number() == 3, || format!("M[19] p ≡ 2,5: a-number {}", m19p2.a_number()));
    let m19p4 = mu_ordinary_module(&m19, 4).unwrap();
    out.check(m19p4.is_isomorphic(&module("L ⊕ E/E(F^2-V)^2 ⊕ E/E(F-V^2)^2")), || {
        format!("M[19] p ≡ 4,7: decomposition {}", m19p4.summand_form())
    });

    for fam in golden().families {
        if !["M[11]", "M[16]", "M[17]", "M[18]", "M[19]"].contains(&fam.id.as_str()) {
            continue;
        }
        let d = datum(&fam);
        for cell in &fam.cells {
            let Some(form) = &cell.mu_ordinary_dm else { continue };
            let want = module(form);
            let got = mu_ordinary_module(&d, i64::from(cell.class[0])).unwrap();
            let tuple = |m: &CombinatorialBT1| (m.invariants(), m.eo_type().unwrap());
            out.check(tuple(&got) == tuple(&want) && got.is_isomorphic(&want), || {
                format!(
                    "{} {}: printed {form}, got {}",
                    fam.id,
                    class_label(fam.m, &cell.class),
                    got.summand_form()
                )
            });
        }
    }
    out
}

fn eo(m: &CombinatorialBT1) -> Vec<u32> {
    m.eo_type().unwrap().0
}

fn show(v: &[u32]) -> String {
    format!("[{}]", v.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let m17 = family("M17");
    for (p, label, want) in [(2, "p ≡ 2,4 mod 7", vec![1, 2, 3, 3, 4, 4]), (3, "p ≡ 3,5 mod 7", vec![0, 1, 2, 2, 2, 2])] {
        let got = eo(&mu_ordinary_module(&m17, p).unwrap());
        out.check(got == want, || format!("M[17] {label}: expected {}, got {}", show(&want), show(&got)));
    }
    for r in 1..=6u32 {
        let got = eo(&module(&format!("N_{{{r},1}}")));
        let want: Vec<u32> = (0..r).collect();
        out.check(got == want, || format!("N_{{{r},1}}: got {}", show(&got)));
    }
    for r in 2..=6u32 {
        let got = eo(&module(&format!("N_{{{r},2}}")));
        let mut want: Vec<u32> = (0..r - 1).collect();
        want.push(r - 2);
        out.check(got == want, || format!("N_{{{r},2}}: got {}", show(&got)));
    }
    for g in 1..=8u32 {
        let got = eo(&module(&format!("L^{g}")));
        let want: Vec<u32> = (1..=g).collect();
        out.check(got == want, || format!("L^{g}: got {}", show(&got)));
    }
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    for fam in golden().families {
        let d = datum(&fam);
        if let Some(listed) = &fam.degenerations {
            let computed: BTreeSet<DegenerationKey> = degenerations(&d).iter().map(|g| g.key()).collect();
            let expected: BTreeSet<DegenerationKey> =
                listed.iter().map(|s| parse_degeneration(fam.m, s).unwrap()).collect();
            out.check(computed == expected, || {
                let got: Vec<String> = degenerations(&d).iter().map(ToString::to_string).collect();
                format!("{} degenerations: expected {}, got {}", fam.id, join(listed), join(&got))
            });
        }
        for cell in &fam.cells {
            let Some(listed) = &cell.decomposable else { continue };
            let p = i64::from(cell.class[0]);
            let mut got = pel_decomposable_set(&d, p).unwrap();
            if cell.decomposable_omits_mu_ordinary {
                let mu = mu_ordinary(&d, p).unwrap();
                got.retain(|nu| *nu != mu);
            }
            let got = strings(&got);
            out.check(got.iter().collect::<BTreeSet<_>>() == listed.iter().collect(), || {
                format!(
                    "{} {}: expected {}, got {}",
                    fam.id,
                    class_label(fam.m, &cell.class),
                    join(listed),
                    join(&got)
                )
            });
        }
    }

    let m7 = family("M7");
    out.check(degenerations(&m7).is_empty(), || "M[7] has degenerations".into());
    let m15 = family("M15");
    let expect = [(1, "ord^5"), (3, "ord^2 ⊕ ss^3"), (5, "ord^3 ⊕ ss^2"), (7, "ss^5")];
    for (p, want) in expect {
        let got: BTreeSet<String> = strings(&pel_decomposable_set(&m15, p).unwrap()).into_iter().collect();
        let want = BTreeSet::from([want.to_string()]);
        out.check(got == want, || format!("M[15] p ≡ {p} mod 8: decomposable {got:?}"));
    }
    out
}

fn verdict_of(id: &str, p: i64, polygon: &str) -> Option<Verdict> {
    classify(&family(id), p)
        .unwrap()
        .into_iter()
        .find(|s| s.polygon.to_string() == polygon)
        .map(|s| s.verdict)
}

fn criterion_5() -> Outcome {
    use Verdict::*;
    let mut out = Outcome::new();
    let rows: &[(&str, i64, &str, Verdict)] = &[
        // smooth supersingular curves for large p
        ("M15", 7, "ss^5", SmoothBasicLargeP),
        ("M18", 3, "ss^6", SmoothBasicLargeP),
        ("M18", 9, "ss^6", SmoothBasicLargeP),
        ("M19", 2, "ss^7", SmoothBasicLargeP),
        ("M19", 8, "ss^7", SmoothBasicLargeP),
        ("M20", 11, "ss^7", SmoothBasicLargeP),
        // μ-ordinary rows
        ("M11", 2, "(1/4,3/4)", SmoothMuOrdinary),
        ("M15", 3, "ord^2 ⊕ ss^3", SmoothMuOrdinary),
        ("M15", 7, "ord^2 ⊕ ss^3", SmoothMuOrdinary),
        ("M16", 2, "(1/4,3/4) ⊕ ss^2", SmoothMuOrdinary),
        ("M18", 3, "(1/4,3/4) ⊕ ss^2", SmoothMuOrdinary),
        ("M16", 4, "ord^2 ⊕ ss^4", SmoothMuOrdinary),
        ("M17", 6, "ord^2 ⊕ ss^4", SmoothMuOrdinary),
        ("M18", 9, "ord^2 ⊕ ss^4", SmoothMuOrdinary),
        ("M17", 2, "ord^3 ⊕ (1/3,2/3)", SmoothMuOrdinary),
        ("M17", 3, "(1/3,2/3)^2", SmoothMuOrdinary),
        ("M19", 2, "(1/3,2/3)^2 ⊕ ss", SmoothMuOrdinary),
        ("M19", 4, "ord ⊕ (1/3,2/3)^2", SmoothMuOrdinary),
        ("M20", 7, "ord^4 ⊕ ss^3", SmoothMuOrdinary),
        ("M20", 5, "ord^3 ⊕ ss^4", SmoothMuOrdinary),
        ("M19", 8, "ord^2 ⊕ ss^5", SmoothMuOrdinary),
        ("M20", 11, "ord^2 ⊕ ss^5", SmoothMuOrdinary),
        // basic and PEL-indecomposable rows
        ("M15", 3, "(1/4,3/4) ⊕ ss", SmoothIndecomposable),
        ("M17", 2, "(1/6,5/6)", SmoothIndecomposable),
        ("M19", 4, "ord ⊕ ss^6", SmoothIndecomposable),
        ("M20", 7, "ord^2 ⊕ ss^5", SmoothIndecomposable),
        ("M20", 5, "ord ⊕ (1/4,3/4) ⊕ ss^2", SmoothIndecomposable),
        // hyperelliptic-free m = 3 case
        ("M10", 2, "(1/4,3/4)", SmoothIndecomposable),
        ("M10", 2, "ss^4", OpenSupersingular),
    ];
    for &(id, p, polygon, want) in rows {
        let got = verdict_of(id, p, polygon);
        let m = lookup_family(id).unwrap().datum.m();
        out.check(got == Some(want), || match got {
            None => format!("{} p ≡ {p} mod {m}: {polygon} not in the polygon set", lookup_family(id).unwrap().id),
            Some(v) => format!("{} p ≡ {p} mod {m}: {polygon} is {v}, expected {want}", lookup_family(id).unwrap().id),
        });
    }
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    for rec in registry() {
        let d = &rec.datum;
        for class in congruence_classes(d.m()) {
            for o in orbit_decomposition(d.m(), i64::from(class[0]), &d.signature()).unwrap() {
                let dfs: BTreeSet<NewtonPolygon> = o.admissible_polygons().into_iter().collect();
                let oracle = oracle_for(&o, d.m(), d.a());
                out.check(dfs == oracle, || {
                    format!("{} {} orbit {:?}", rec.id, class_label(d.m(), &class), o.cycle())
                });
            }
        }
    }
    let elapsed = start.elapsed();
    out.check(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"));
    out.note = format!("{:.0?}", elapsed);
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    for m in [7u32, 11, 19, 23] {
        let checks = cross_check_all(m).unwrap();
        out.check(checks.len() == (m as usize - 1) / 2, || format!("m={m}: {} residues", checks.len()));
        for c in checks {
            out.check(c.ok(), || format!("m={m} p ≡ {}: closed form {}, computed {}", c.residue, c.closed_form, c.computed));
        }
    }
    for (m, want) in [(7, "ss^3"), (11, "ord^10 ⊕ ss^5"), (19, "ord^54 ⊕ ss^9")] {
        let got = qr_mu_ordinary_closed_form(m).unwrap().polygon.to_string();
        out.check(got == want, || format!("m={m}: {got}"));
    }
    out
}

fn pow(q: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(q), e as usize)
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    for n in 1..=6u32 {
        for q in MASS_QS {
            let lambda = local_factor(&MassInput::new(PrimeCase::Split, n, q).unwrap()).unwrap();
            // q^{-n(n-1)/2} · Π_{i=1}^{n} (q^n - q^{i-1}) / (q^n - 1)
            let mut direct = BigRational::one();
            for i in 1..=n {
                direct *= BigRational::from_integer(pow(q, n) - pow(q, i - 1));
            }
            direct /= BigRational::from_integer(pow(q, n) - 1);
            direct /= BigRational::from_integer(pow(q, n * (n - 1) / 2));
            let exact = BigRational::from_integer(lambda.clone());
            out.check(direct == exact && unsimplified_split(n, q) == exact, || {
                format!("split n={n} q={q}: λ={lambda}, direct {direct}")
            });
        }
    }
    for n in (2..=8u32).step_by(2) {
        for q in MASS_QS {
            let lambda = local_factor(&MassInput::new(PrimeCase::Inert, n, q).unwrap()).unwrap();
            let top: BigInt = pow(q, n) - 1;
            let (quot, rem) = top.div_rem(&BigInt::from(q + 1));
            out.check(rem.is_zero() && quot == lambda, || format!("inert n={n} q={q}: λ={lambda}"));
        }
    }
    for (case, ns) in [(PrimeCase::Split, vec![2, 3, 4, 5, 6]), (PrimeCase::Inert, vec![2, 4, 6, 8])] {
        for n in ns {
            let rows = growth_table(case, n, &MASS_QS);
            out.check(
                rows.as_ref().is_ok_and(|r| r.windows(2).all(|w| w[0].1 < w[1].1)),
                || format!("{case} n={n}: not strictly increasing"),
            );
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    for fam in golden().families {
        let d = datum(&fam);
        for cell in &fam.cells {
            let p = i64::from(cell.class[0]);
            let at = || format!("{} {}", fam.id, class_label(fam.m, &cell.class));
            let set = newton_polygon_set(&d, p).unwrap();
            for nu in &set {
                out.check(nu.is_symmetric() && nu.has_integral_breakpoints() && nu.height() == 2 * d.genus(), || {
                    format!("{}: malformed {nu}", at())
                });
            }
            let mu = mu_ordinary(&d, p).unwrap();
            let minimal: Vec<&NewtonPolygon> = set
                .iter()
                .filter(|a| set.iter().all(|b| b.lies_on_or_above(a)))
                .collect();
            out.check(minimal == [&mu], || format!("{}: lies-below minima {minimal:?}", at()));
            let basic = basic_polygon(&d, p).unwrap();
            let maximal: Vec<&NewtonPolygon> = set
                .iter()
                .filter(|a| set.iter().all(|b| a.lies_on_or_above(b)))
                .collect();
            out.check(maximal == [&basic], || format!("{}: maxima {maximal:?}", at()));
            let module = mu_ordinary_module(&d, p).unwrap();
            out.check(mu.p_rank() == module.p_rank(), || {
                format!("{}: p-rank {} vs {}", at(), mu.p_rank(), module.p_rank())
            });
            out.check(module.a_number() == module.a_number_via_kernels(), || {
                format!("{}: a-number {} vs {}", at(), module.a_number(), module.a_number_via_kernels())
            });
        }
    }
    out
}

type Criterion = (u32, &'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "golden Newton polygon sets", "exact, < 2 s", criterion_1),
        (2, "μ-ordinary Dieudonné modules", "exact", criterion_2),
        (3, "Ekedahl–Oort anchors", "exact", criterion_3),
        (4, "decomposability tables", "exact", criterion_4),
        (5, "smooth-occurrence classification", "exact", criterion_5),
        (6, "DFS vs brute-force oracle", "exact, < 1 s", criterion_6),
        (7, "quadratic-residue closed form", "exact", criterion_7),
        (8, "mass-formula local factors", "exact", criterion_8),
        (9, "structural properties", "exact", criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (k, name, tolerance, run) in criteria {
        let out = run();
        let known: BTreeSet<&str> = KNOWN.iter().filter(|(c, _)| *c == k).map(|(_, s)| *s).collect();
        let failed: BTreeSet<&str> = out.failures.iter().map(String::as_str).collect();
        let status = if failed.is_empty() { "PASS" } else { "FAIL" };
        let timing = if out.note.is_empty() { String::new() } else { format!(", {}", out.note) };
        println!(
            "criterion {k} {status}  {name}  [{tolerance}]  {}/{} checks{timing}",
            out.checked - out.failures.len(),
            out.checked
        );
        for f in &out.failures {
            let tag = if known.contains(f.as_str()) { "known divergence" } else { "unexpected" };
            println!("    {tag}: {f}");
        }
        for s in &known {
            if !failed.contains(s) {
                println!("    now reproduced: {s}");
            }
        }
        if failed != known {
            unexpected.push(k);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with undocumented outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
