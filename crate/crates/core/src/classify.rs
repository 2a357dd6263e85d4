//! Registry of the twenty special families and the smooth-occurrence
//! classifier for their Newton polygons.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::degeneration::is_pel_decomposable;
use crate::error::{Error, Result};
use crate::golden::{canonical_id, GoldenFamily, GoldenFile};
use crate::kottwitz::{congruence_class_of, is_totally_ordered, mu_ordinary, newton_polygon_set, unique_maximum};
use crate::monodromy::MonodromyDatum;
use crate::newton::NewtonPolygon;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRecord {
    pub id: String,
    pub datum: MonodromyDatum,
    pub dimension: u32,
    pub golden: GoldenFamily,
}

pub fn registry() -> Vec<FamilyRecord> {
    GoldenFile::builtin()
        .families
        .into_iter()
        .map(|f| FamilyRecord {
            id: f.id.clone(),
            datum: f.datum().expect("validated on load"),
            dimension: f.datum().expect("validated on load").family_dimension(),
            golden: f,
        })
        .collect()
}

pub fn lookup_family(id: &str) -> Result<FamilyRecord> {
    let want = canonical_id(id).ok_or_else(|| Error::UnknownFamily(id.to_string()))?;
    registry()
        .into_iter()
        .find(|r| r.id == want)
        .ok_or_else(|| Error::UnknownFamily(id.to_string()))
}

/// The registry id of a datum equivalent to `d`, if any.
pub fn match_datum(d: &MonodromyDatum) -> Option<String> {
    registry()
        .into_iter()
        .find(|r| r.datum.is_equivalent(d))
        .map(|r| r.id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Hyperelliptic (`m = 2`) families, where every polygon listed is
    /// already known to occur on a smooth curve.
    SmoothKnown,
    SmoothMuOrdinary,
    SmoothIndecomposable,
    SmoothPurity,
    SmoothBasicLargeP,
    OpenSupersingular,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::SmoothKnown => "SMOOTH_KNOWN",
            Verdict::SmoothMuOrdinary => "SMOOTH_MU_ORDINARY",
            Verdict::SmoothIndecomposable => "SMOOTH_INDECOMPOSABLE",
            Verdict::SmoothPurity => "SMOOTH_PURITY",
            Verdict::SmoothBasicLargeP => "SMOOTH_BASIC_LARGE_P",
            Verdict::OpenSupersingular => "OPEN_SUPERSINGULAR",
        }
    }

    pub fn is_smooth(self) -> bool {
        self != Verdict::OpenSupersingular
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceStatus {
    pub polygon: NewtonPolygon,
    pub verdict: Verdict,
    pub justification: String,
}

/// Five-branch-point families whose basic-locus argument needs `p` split.
fn needs_split_prime(id: &str, m: u32, p: u32) -> bool {
    match id {
        "M[6]" | "M[8]" | "M[14]" => p == m - 1,
        "M[16]" => p != 1,
        _ => false,
    }
}

/// Verdict for every polygon of the family at `p`, μ-ordinary first.
pub fn classify(d: &MonodromyDatum, p: i64) -> Result<Vec<OccurrenceStatus>> {
    let id = match_datum(d).ok_or_else(|| Error::NotSpecial(d.to_string()))?;
    let residue = crate::arith::unit_residue(p, d.m())?;
    let set = newton_polygon_set(d, p)?;

    if d.m() == 2 {
        return Ok(set
            .into_iter()
            .map(|polygon| OccurrenceStatus {
                polygon,
                verdict: Verdict::SmoothKnown,
                justification: "hyperelliptic family: all strata already known to contain smooth curves".into(),
            })
            .collect());
    }

    let mu = mu_ordinary(d, p)?;
    let basic = unique_maximum(&set).ok_or(Error::NotUnique("basic polygon"))?;
    let dimension = d.family_dimension();
    let ordered = is_totally_ordered(&set);

    let first_pass = |nu: &NewtonPolygon| -> Result<Option<(Verdict, String)>> {
        if *nu == mu {
            return Ok(Some((
                Verdict::SmoothMuOrdinary,
                "μ-ordinary stratum is open and dense; generic curve is smooth".into(),
            )));
        }
        if is_pel_decomposable(d, p, nu)?.is_none() {
            return Ok(Some((
                Verdict::SmoothIndecomposable,
                "not of the form ν₁ ⊕ ν₂^r over any compact-type degeneration".into(),
            )));
        }
        Ok(None)
    };
    let basic_smooth = first_pass(&basic)?.is_some();

    let mut out = Vec::with_capacity(set.len());
    for nu in set {
        let (verdict, justification) = match first_pass(&nu)? {
            Some(v) => v,
            None if dimension >= 2 && !basic.is_supersingular() && basic_smooth && ordered => (
                Verdict::SmoothPurity,
                format!("lies between μ-ordinary and smooth basic {basic}; purity of the Newton stratification"),
            ),
            None if dimension == 1
                && nu == basic
                && nu.is_supersingular()
                && !needs_split_prime(&id, d.m(), residue) =>
            (
                Verdict::SmoothBasicLargeP,
                "basic supersingular stratum in a one-dimensional family; holds for all sufficiently large p in the class".into(),
            ),
            None if nu.is_supersingular() => (
                Verdict::OpenSupersingular,
                "decomposable supersingular polygon; smooth occurrence not decided here".into(),
            ),
            None => {
                return Err(Error::Unclassified(format!("{id}, p ≡ {residue}: {nu}")));
            }
        };
        out.push(OccurrenceStatus {
            polygon: nu,
            verdict,
            justification,
        });
    }
    Ok(out)
}

/// Residue classes of `p` for the family, with the verdict list of each.
pub fn classify_all(d: &MonodromyDatum) -> Result<Vec<(Vec<u32>, Vec<OccurrenceStatus>)>> {
    crate::kottwitz::congruence_classes(d.m())
        .into_iter()
        .map(|class| {
            let p = i64::from(class[0]);
            debug_assert_eq!(congruence_class_of(d.m(), p).ok().as_ref(), Some(&class));
            classify(d, p).map(|v| (class, v))
        })
        .collect()
}
