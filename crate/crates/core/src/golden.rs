//! The shipped reference tables: Newton polygon sets, decomposable sets,
//! boundary degenerations and μ-ordinary Dieudonné modules of the twenty
//! special families, one cell per congruence class of `p`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monodromy::MonodromyDatum;

const BUILTIN: &str = include_str!("../data/golden.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub families: Vec<GoldenFamily>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenFamily {
    pub id: String,
    pub m: u32,
    pub a: Vec<u32>,
    /// `None` where the reference lists no degenerations for the family.
    pub degenerations: Option<Vec<String>>,
    pub cells: Vec<GoldenCell>,
    /// Reference entries the computation is known not to reproduce, with the
    /// value it produces instead.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known_divergences: Vec<Divergence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// Congruence class of the cell; absent for family-level fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<Vec<u32>>,
    pub field: String,
    pub computed: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenCell {
    pub class: Vec<u32>,
    pub np_set: Vec<String>,
    /// `None` where the reference lists no decomposability row.
    pub decomposable: Option<Vec<String>>,
    pub mu_ordinary_dm: Option<String>,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub decomposable_omits_mu_ordinary: bool,
}

impl GoldenFile {
    pub fn builtin() -> GoldenFile {
        Self::parse(BUILTIN).expect("shipped golden data is well formed")
    }

    pub fn parse(text: &str) -> Result<GoldenFile> {
        let file: GoldenFile =
            serde_json::from_str(text).map_err(|e| Error::Golden(e.to_string()))?;
        if file.schema != "npg-golden/1" {
            return Err(Error::Golden(format!("unsupported schema {:?}", file.schema)));
        }
        for fam in &file.families {
            fam.datum()?;
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<GoldenFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Golden(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn family(&self, id: &str) -> Result<&GoldenFamily> {
        let want = canonical_id(id).ok_or_else(|| Error::UnknownFamily(id.to_string()))?;
        self.families
            .iter()
            .find(|f| f.id == want)
            .ok_or_else(|| Error::UnknownFamily(id.to_string()))
    }
}

impl GoldenFamily {
    pub fn datum(&self) -> Result<MonodromyDatum> {
        MonodromyDatum::from_residues(self.m, &self.a)
    }

    pub fn cell(&self, class: &[u32]) -> Option<&GoldenCell> {
        self.cells.iter().find(|c| c.class == class)
    }

    pub fn divergence(&self, class: Option<&[u32]>, field: &str) -> Option<&Divergence> {
        self.known_divergences
            .iter()
            .find(|d| d.field == field && d.class.as_deref() == class)
    }
}

/// Accepts `M17`, `m17`, `M[17]` and returns `M[17]`.
pub fn canonical_id(id: &str) -> Option<String> {
    let t = id.trim();
    let rest = t.strip_prefix('M').or_else(|| t.strip_prefix('m'))?;
    let digits = rest
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .unwrap_or(rest);
    let k: u32 = digits.parse().ok()?;
    Some(format!("M[{k}]"))
}
