//! Combinatorial mod-p Dieudonné modules.
//!
//! A module is a finite basis with partial maps `F` and `V` sending basis
//! elements to basis elements (or to zero). Every subspace we ever need is
//! spanned by a subset of the basis, so the linear algebra over `F̄_p`
//! reduces to set manipulation.
//!
//! Indecomposable summands are read off as cyclic words in `F` and `V⁻¹`:
//! from each basis element follow `F` when it is defined, otherwise step
//! backwards along `V` (the element is then in `im V = ker F`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kottwitz::orbit_decomposition;
use crate::monodromy::MonodromyDatum;

/// Label of a basis element: character `τ`, layer `t`, and copy index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub tau: u32,
    pub layer: u32,
    pub copy: u32,
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}{}", "'".repeat(self.layer as usize), self.tau)?;
        if self.copy > 0 {
            write!(f, "#{}", self.copy)?;
        }
        Ok(())
    }
}

/// A labelled run of basis elements, used for the two-row `F`/`V` tables.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Block {
    title: String,
    start: usize,
    len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinatorialBT1 {
    labels: Vec<BasisLabel>,
    f: Vec<Option<usize>>,
    v: Vec<Option<usize>>,
    blocks: Vec<Block>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleInvariants {
    pub rank: u32,
    pub p_rank: u32,
    pub a_number: u32,
}

/// Elementary sequence `ψ(1..g)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EoType(pub Vec<u32>);

impl fmt::Display for EoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// A subset of the basis, as a membership mask.
pub type BasisSubset = Vec<bool>;

impl CombinatorialBT1 {
    /// Checks injectivity of `F` and `V` and the exactness conditions
    /// `ker F = im V`, `ker V = im F` on basis subsets.
    pub fn new(
        labels: Vec<BasisLabel>,
        f: Vec<Option<usize>>,
        v: Vec<Option<usize>>,
    ) -> Result<Self> {
        let module = CombinatorialBT1 {
            labels,
            f,
            v,
            blocks: Vec::new(),
        };
        module.validate()?;
        Ok(module)
    }

    fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if self.f.len() != n || self.v.len() != n {
            return Err(Error::InvalidModule("map tables do not match basis size".into()));
        }
        for (name, map) in [("F", &self.f), ("V", &self.v)] {
            let mut hit = vec![false; n];
            for &target in map.iter().flatten() {
                if target >= n {
                    return Err(Error::InvalidModule(format!("{name} target out of range")));
                }
                if std::mem::replace(&mut hit[target], true) {
                    return Err(Error::InvalidModule(format!(
                        "{name} is not injective at {}",
                        self.labels[target]
                    )));
                }
            }
        }
        let im_f = self.image(&self.f);
        let im_v = self.image(&self.v);
        for b in 0..n {
            if self.f[b].is_none() != im_v[b] {
                return Err(Error::InvalidModule(format!(
                    "ker F ≠ im V at {}",
                    self.labels[b]
                )));
            }
            if self.v[b].is_none() != im_f[b] {
                return Err(Error::InvalidModule(format!(
                    "ker V ≠ im F at {}",
                    self.labels[b]
                )));
            }
        }
        Ok(())
    }

    fn image(&self, map: &[Option<usize>]) -> Vec<bool> {
        let mut im = vec![false; self.labels.len()];
        for &t in map.iter().flatten() {
            im[t] = true;
        }
        im
    }

    /// Module spanned by the given cyclic words, one component per word.
    pub fn from_words(words: &[CyclicWord]) -> Self {
        let mut acc = CombinatorialBT1 {
            labels: Vec::new(),
            f: Vec::new(),
            v: Vec::new(),
            blocks: Vec::new(),
        };
        for (c, w) in words.iter().enumerate() {
            let start = acc.labels.len();
            let n = w.0.len();
            for i in 0..n {
                acc.labels.push(BasisLabel {
                    tau: i as u32 + 1,
                    layer: 0,
                    copy: c as u32,
                });
                acc.f.push(None);
                acc.v.push(None);
            }
            for (i, letter) in w.0.iter().enumerate() {
                let here = start + i;
                let next = start + (i + 1) % n;
                match letter {
                    Letter::F => acc.f[here] = Some(next),
                    Letter::VInv => acc.v[next] = Some(here),
                }
            }
        }
        debug_assert!(acc.validate().is_ok());
        acc
    }

    pub fn direct_sum(&self, other: &CombinatorialBT1) -> CombinatorialBT1 {
        let shift = self.labels.len();
        let mut out = self.clone();
        out.labels.extend(other.labels.iter().copied());
        out.f.extend(other.f.iter().map(|t| t.map(|i| i + shift)));
        out.v.extend(other.v.iter().map(|t| t.map(|i| i + shift)));
        out.blocks.extend(other.blocks.iter().map(|b| Block {
            title: b.title.clone(),
            start: b.start + shift,
            len: b.len,
        }));
        out
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn f_map(&self) -> &[Option<usize>] {
        &self.f
    }

    pub fn v_map(&self) -> &[Option<usize>] {
        &self.v
    }

    pub fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Number of basis elements lying on a cycle of `F`.
    pub fn p_rank(&self) -> u32 {
        (0..self.rank())
            .filter(|&start| {
                let mut b = start;
                for _ in 0..self.rank() {
                    match self.f[b] {
                        Some(next) if next == start => return true,
                        Some(next) => b = next,
                        None => return false,
                    }
                }
                false
            })
            .count() as u32
    }

    /// `rank − |im F ∪ im V|`.
    pub fn a_number(&self) -> u32 {
        let im_f = self.image(&self.f);
        let im_v = self.image(&self.v);
        (0..self.rank()).filter(|&b| !im_f[b] && !im_v[b]).count() as u32
    }

    /// `|ker F ∩ ker V|`; agrees with [`CombinatorialBT1::a_number`] by exactness.
    pub fn a_number_via_kernels(&self) -> u32 {
        (0..self.rank())
            .filter(|&b| self.f[b].is_none() && self.v[b].is_none())
            .count() as u32
    }

    pub fn invariants(&self) -> ModuleInvariants {
        ModuleInvariants {
            rank: self.rank() as u32,
            p_rank: self.p_rank(),
            a_number: self.a_number(),
        }
    }

    fn v_image(&self, w: &BasisSubset) -> BasisSubset {
        let mut out = vec![false; self.rank()];
        for (b, &inside) in w.iter().enumerate() {
            if let (true, Some(t)) = (inside, self.v[b]) {
                out[t] = true;
            }
        }
        out
    }

    fn f_preimage(&self, w: &BasisSubset) -> BasisSubset {
        (0..self.rank())
            .map(|b| self.f[b].is_none_or(|t| w[t]))
            .collect()
    }

    /// Coarsest filtration containing `0` and the whole module that is stable
    /// under `W ↦ V(W)` and `W ↦ F⁻¹(W)`, ascending.
    pub fn canonical_filtration(&self) -> Result<Vec<BasisSubset>> {
        let n = self.rank();
        let mut found: Vec<BasisSubset> = vec![vec![false; n], vec![true; n]];
        let mut queue = found.clone();
        while let Some(w) = queue.pop() {
            for next in [self.v_image(&w), self.f_preimage(&w)] {
                if !found.contains(&next) {
                    found.push(next.clone());
                    queue.push(next);
                }
            }
        }
        found.sort_by_key(|w| w.iter().filter(|&&x| x).count());
        for pair in found.windows(2) {
            let nested = pair[0].iter().zip(&pair[1]).all(|(&a, &b)| !a || b);
            if !nested {
                return Err(Error::InvalidModule(
                    "canonical filtration is not totally ordered".into(),
                ));
            }
        }
        Ok(found)
    }

    /// Ekedahl–Oort type: `ψ(dim C) = dim V(C)` on each canonical step,
    /// extended across gaps with slope 0 or 1.
    pub fn eo_type(&self) -> Result<EoType> {
        let n = self.rank();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidModule("odd rank".into()));
        }
        let g = n / 2;
        let points: Vec<(usize, usize)> = self
            .canonical_filtration()?
            .iter()
            .map(|c| {
                let dim = c.iter().filter(|&&x| x).count();
                let v_dim = (0..n).filter(|&b| c[b] && self.v[b].is_some()).count();
                (dim, v_dim)
            })
            .collect();
        let mut psi = vec![0u32; n + 1];
        for pair in points.windows(2) {
            let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
            let rising = if y1 == y0 {
                false
            } else if y1 - y0 == x1 - x0 {
                true
            } else {
                return Err(Error::EoInterpolation(format!(
                    "ψ({x0}) = {y0}, ψ({x1}) = {y1}"
                )));
            };
            for x in x0..=x1 {
                psi[x] = (if rising { y0 + (x - x0) } else { y0 }) as u32;
            }
        }
        Ok(EoType(psi[1..=g].to_vec()))
    }

    /// Connected components of the `F`/`V` graph with their cyclic words.
    pub fn decompose(&self) -> Vec<Component> {
        let n = self.rank();
        let mut v_inv = vec![None; n];
        for (b, t) in self.v.iter().enumerate() {
            if let Some(t) = t {
                v_inv[*t] = Some(b);
            }
        }
        let step = |b: usize| -> (Letter, usize) {
            match self.f[b] {
                Some(t) => (Letter::F, t),
                None => (
                    Letter::VInv,
                    v_inv[b].expect("exactness: ker F = im V"),
                ),
            }
        };
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut basis = Vec::new();
            let mut letters = Vec::new();
            let mut b = start;
            while !seen[b] {
                seen[b] = true;
                basis.push(b);
                let (letter, next) = step(b);
                letters.push(letter);
                b = next;
            }
            let sub = self.restrict(&basis);
            let (word, multiplicity) = CyclicWord(letters).primitive_root();
            out.push(Component {
                labels: basis.iter().map(|&i| self.labels[i]).collect(),
                invariants: sub.invariants(),
                template: Template::recognize(&word),
                word,
                multiplicity,
            });
        }
        out
    }

    fn restrict(&self, basis: &[usize]) -> CombinatorialBT1 {
        let pos: BTreeMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        CombinatorialBT1 {
            labels: basis.iter().map(|&b| self.labels[b]).collect(),
            f: basis.iter().map(|&b| self.f[b].map(|t| pos[&t])).collect(),
            v: basis.iter().map(|&b| self.v[b].map(|t| pos[&t])).collect(),
            blocks: Vec::new(),
        }
    }

    /// Multiset of primitive cyclic words; two modules are isomorphic iff
    /// these agree.
    pub fn word_multiset(&self) -> Vec<CyclicWord> {
        let mut words: Vec<CyclicWord> = self
            .decompose()
            .into_iter()
            .flat_map(|c| std::iter::repeat_n(c.word, c.multiplicity))
            .collect();
        words.sort();
        words
    }

    pub fn is_isomorphic(&self, other: &CombinatorialBT1) -> bool {
        self.word_multiset() == other.word_multiset()
    }

    /// Summand form such as `L^3 ⊕ N_{3,2}`.
    pub fn summand_form(&self) -> String {
        DmExpr::from_words(&self.word_multiset()).to_string()
    }

    /// Two-row `F`/`V` tables, one per orbit layer.
    pub fn render_tables(&self) -> String {
        let show = |t: Option<usize>| t.map_or("0".to_string(), |i| self.labels[i].to_string());
        let blocks = if self.blocks.is_empty() {
            vec![Block {
                title: "basis".into(),
                start: 0,
                len: self.rank(),
            }]
        } else {
            self.blocks.clone()
        };
        let mut out = String::new();
        for block in blocks {
            let range = block.start..block.start + block.len;
            let rows = [
                std::iter::once(block.title.clone())
                    .chain(range.clone().map(|i| self.labels[i].to_string()))
                    .collect::<Vec<_>>(),
                std::iter::once("F".to_string())
                    .chain(range.clone().map(|i| show(self.f[i])))
                    .collect(),
                std::iter::once("V".to_string())
                    .chain(range.clone().map(|i| show(self.v[i])))
                    .collect(),
            ];
            let cols = rows[0].len();
            let widths: Vec<usize> = (0..cols)
                .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
                .collect();
            for row in &rows {
                let cells: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(cell, &w)| format!("{cell:<w$}"))
                    .collect();
                out.push_str(&format!("| {} |\n", cells.join(" | ")));
            }
            out.push('\n');
        }
        out
    }

    /// `{"basis": [...], "F": {label: label|null}, "V": {...}}`.
    pub fn to_json(&self) -> Value {
        let name = |i: usize| self.labels[i].to_string();
        let table = |map: &[Option<usize>]| -> Value {
            let obj: serde_json::Map<String, Value> = map
                .iter()
                .enumerate()
                .map(|(i, t)| (name(i), t.map_or(Value::Null, |t| Value::String(name(t)))))
                .collect();
            Value::Object(obj)
        };
        json!({
            "basis": (0..self.rank()).map(name).collect::<Vec<_>>(),
            "F": table(&self.f),
            "V": table(&self.v),
        })
    }
}

/// Reduction mod p of the μ-ordinary Dieudonné module: for every orbit `o`
/// and layer `t`, `E(t) − E(t+1)` copies of `N_t(o)` with
/// `F(e_τ) = e_{τ^σ}` iff `f(τ) ≤ E(t+1)` and `V(e_{τ^σ}) = e_τ` otherwise.
pub fn mu_ordinary_module(d: &MonodromyDatum, p: i64) -> Result<CombinatorialBT1> {
    let orbits = orbit_decomposition(d.m(), p, &d.signature())?;
    let mut labels = Vec::new();
    let mut f = Vec::new();
    let mut v = Vec::new();
    let mut blocks = Vec::new();
    for o in orbits.iter().filter(|o| o.g() > 0) {
        let data = o.mu_ordinary();
        let cycle = o.cycle();
        let len = cycle.len();
        for t in 0..=data.s {
            let bound = data.e[t + 1];
            for copy in 0..data.e[t] - bound {
                let start = labels.len();
                for &tau in cycle {
                    labels.push(BasisLabel {
                        tau,
                        layer: t as u32,
                        copy,
                    });
                    f.push(None);
                    v.push(None);
                }
                for (i, &fv) in o.f_values().iter().enumerate() {
                    let here = start + i;
                    let next = start + (i + 1) % len;
                    if fv <= bound {
                        f[here] = Some(next);
                    } else {
                        v[next] = Some(here);
                    }
                }
                blocks.push(Block {
                    title: format!("t={t}, E(t+1)={bound}"),
                    start,
                    len,
                });
            }
        }
    }
    let mut module = CombinatorialBT1::new(labels, f, v)?;
    module.blocks = blocks;
    Ok(module)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    F,
    VInv,
}

/// Cyclic word over `{F, V⁻¹}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicWord(pub Vec<Letter>);

impl CyclicWord {
    /// `F^a V^{-b}`.
    pub fn f_then_v(a: usize, b: usize) -> Self {
        let mut w = vec![Letter::F; a];
        w.extend(std::iter::repeat_n(Letter::VInv, b));
        CyclicWord(w)
    }

    /// Lexicographically minimal rotation (`F < V⁻¹`).
    pub fn canonical(&self) -> CyclicWord {
        let n = self.0.len();
        (0..n)
            .map(|r| CyclicWord(self.0[r..].iter().chain(&self.0[..r]).copied().collect()))
            .min()
            .unwrap_or_else(|| self.clone())
    }

    /// Shortest `u` with `self = u^k` (canonical), and `k`.
    pub fn primitive_root(&self) -> (CyclicWord, usize) {
        let n = self.0.len();
        for d in 1..=n {
            if n.is_multiple_of(d) && (0..n).all(|i| self.0[i] == self.0[i % d]) {
                return (CyclicWord(self.0[..d].to_vec()).canonical(), n / d);
            }
        }
        (self.canonical(), 1)
    }

    /// Maximal runs `(letter, length)`.
    pub fn runs(&self) -> Vec<(Letter, usize)> {
        let mut runs: Vec<(Letter, usize)> = Vec::new();
        for &l in &self.0 {
            match runs.last_mut() {
                Some((last, k)) if *last == l => *k += 1,
                _ => runs.push((l, 1)),
            }
        }
        runs
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .runs()
            .into_iter()
            .map(|(l, k)| match (l, k) {
                (Letter::F, 1) => "F".to_string(),
                (Letter::F, k) => format!("F^{k}"),
                (Letter::VInv, k) => format!("V^-{k}"),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for CyclicWord {
    type Err = Error;

    /// Parses `F^3 V^-1 F V^-1`; `V^-1` may be written `V^-` or `v`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bytes: Vec<char> = compact.chars().collect();
        let mut i = 0;
        let mut letters = Vec::new();
        while i < bytes.len() {
            let (letter, mut j) = match bytes[i] {
                'F' => (Letter::F, i + 1),
                'v' => (Letter::VInv, i + 1),
                'V' if compact[i..].starts_with("V^-") => (Letter::VInv, i + 3),
                _ => return Err(Error::Parse(format!("bad cyclic word `{s}`"))),
            };
            if letter == Letter::F && bytes.get(j) == Some(&'^') {
                j += 1;
            }
            let digits: String = bytes[j..].iter().take_while(|c| c.is_ascii_digit()).collect();
            let k = if digits.is_empty() {
                1
            } else {
                digits
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?
            };
            letters.extend(std::iter::repeat_n(letter, k));
            i = j + digits.len();
        }
        if letters.is_empty() {
            return Err(Error::Parse("empty cyclic word".into()));
        }
        Ok(CyclicWord(letters))
    }
}

/// Known shapes of an indecomposable summand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Template {
    /// `F` fixes a line: the étale half of `L`.
    EtaleLine,
    /// `V` fixes a line: the multiplicative half of `L`.
    MultiplicativeLine,
    /// `E/E(F^r − V^r)`.
    NR1(usize),
    /// `E/E(F^a − V^b)` with `a ≠ b`.
    Cyclic { f: usize, v: usize },
    Generic(String),
}

impl Template {
    pub fn recognize(word: &CyclicWord) -> Template {
        match word.runs().as_slice() {
            [(Letter::F, 1)] => Template::EtaleLine,
            [(Letter::VInv, 1)] => Template::MultiplicativeLine,
            [(Letter::F, a), (Letter::VInv, b)] if a == b => Template::NR1(*a),
            [(Letter::F, a), (Letter::VInv, b)] => Template::Cyclic { f: *a, v: *b },
            _ => Template::Generic(word.to_string()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Template::EtaleLine => "étale part of L".into(),
            Template::MultiplicativeLine => "multiplicative part of L".into(),
            Template::NR1(r) => format!("N_{{{r},1}}"),
            Template::Cyclic { f, v } => format!("E/E(F^{f}-V^{v})"),
            Template::Generic(w) => format!("generic: {w}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub labels: Vec<BasisLabel>,
    /// Primitive word; the cycle itself reads `word^multiplicity` and splits
    /// into that many isomorphic copies over an algebraic closure.
    pub word: CyclicWord,
    pub multiplicity: usize,
    pub invariants: ModuleInvariants,
    pub template: Template,
}

/// A direct sum of named building blocks, e.g. `L^3 ⊕ N_{3,2}` or
/// `E/E(F^4-V^2) ⊕ E/E(V^4-F^2) ⊕ E/E(F-V)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmExpr {
    terms: Vec<(DmTerm, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum DmTerm {
    L,
    NR1(usize),
    NR2(usize),
    /// `E/E(F^a − V^b)`.
    Cyclic(usize, usize),
    Word(CyclicWord),
}

impl DmTerm {
    fn words(&self) -> Vec<CyclicWord> {
        match self {
            DmTerm::L => vec![CyclicWord::f_then_v(1, 0), CyclicWord::f_then_v(0, 1)],
            DmTerm::NR1(r) => vec![CyclicWord::f_then_v(*r, *r)],
            DmTerm::NR2(r) => vec![
                CyclicWord::f_then_v(r - 1, 1),
                CyclicWord::f_then_v(1, r - 1),
            ],
            DmTerm::Cyclic(a, b) => vec![CyclicWord::f_then_v(*a, *b)],
            DmTerm::Word(w) => vec![w.clone()],
        }
    }
}

impl DmExpr {
    pub fn module(&self) -> CombinatorialBT1 {
        let words: Vec<CyclicWord> = self
            .terms
            .iter()
            .flat_map(|(t, k)| {
                let ws = t.words();
                (0..*k).flat_map(move |_| ws.clone())
            })
            .collect();
        CombinatorialBT1::from_words(&words)
    }

    /// Groups a multiset of primitive words into named blocks.
    pub fn from_words(words: &[CyclicWord]) -> DmExpr {
        let mut pool: BTreeMap<CyclicWord, usize> = BTreeMap::new();
        for w in words {
            *pool.entry(w.canonical()).or_insert(0) += 1;
        }
        fn take(pool: &mut BTreeMap<CyclicWord, usize>, w: &CyclicWord, k: usize) {
            *pool.get_mut(w).expect("present") -= k;
        }
        let mut terms: Vec<(DmTerm, usize)> = Vec::new();
        let et = CyclicWord::f_then_v(1, 0);
        let mu = CyclicWord::f_then_v(0, 1);
        let l = pool.get(&et).copied().unwrap_or(0).min(pool.get(&mu).copied().unwrap_or(0));
        if l > 0 {
            take(&mut pool, &et, l);
            take(&mut pool, &mu, l);
            terms.push((DmTerm::L, l));
        }
        for r in 3..=words.iter().map(|w| w.0.len()).max().unwrap_or(0) {
            let a = CyclicWord::f_then_v(r - 1, 1);
            let b = CyclicWord::f_then_v(1, r - 1);
            let k = pool.get(&a).copied().unwrap_or(0).min(pool.get(&b).copied().unwrap_or(0));
            if k > 0 {
                take(&mut pool, &a, k);
                take(&mut pool, &b, k);
                terms.push((DmTerm::NR2(r), k));
            }
        }
        for (w, k) in pool {
            if k == 0 {
                continue;
            }
            let term = match w.runs().as_slice() {
                [(Letter::F, a), (Letter::VInv, b)] if a == b => DmTerm::NR1(*a),
                [(Letter::F, a), (Letter::VInv, b)] => DmTerm::Cyclic(*a, *b),
                _ => DmTerm::Word(w),
            };
            terms.push((term, k));
        }
        terms.sort();
        DmExpr { terms }
    }
}

impl fmt::Display for DmExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, k)| {
                let base = match t {
                    DmTerm::L => "L".to_string(),
                    DmTerm::NR1(r) => format!("N_{{{r},1}}"),
                    DmTerm::NR2(r) => format!("N_{{{r},2}}"),
                    DmTerm::Cyclic(a, b) => format!("E/E(F^{a}-V^{b})"),
                    DmTerm::Word(w) => format!("word({w})"),
                };
                if *k == 1 {
                    base
                } else {
                    format!("{base}^{k}")
                }
            })
            .collect();
        f.write_str(&parts.join(" ⊕ "))
    }
}

impl FromStr for DmExpr {
    type Err = Error;

    /// Accepts `L`, `N_{r,1}`, `N_{r,2}`, `E/E(F^a-V^b)`, `E/E(V^b-F^a)`
    /// and `word(...)`, each with an optional `^k`, joined by `⊕` or `+`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut terms = Vec::new();
        for raw in compact.split(['⊕', '+']) {
            let (body, k) = split_power(raw)?;
            let term = if body == "L" {
                DmTerm::L
            } else if let Some(inner) = body.strip_prefix("N_{").and_then(|b| b.strip_suffix('}')) {
                let (r, kind) = inner
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad term `{raw}`")))?;
                let r: usize = r.parse().map_err(|_| Error::Parse(format!("bad term `{raw}`")))?;
                match kind {
                    "1" if r >= 1 => DmTerm::NR1(r),
                    "2" if r >= 2 => DmTerm::NR2(r),
                    _ => return Err(Error::Parse(format!("bad term `{raw}`"))),
                }
            } else if let Some(inner) = body.strip_prefix("E/E(").and_then(|b| b.strip_suffix(')')) {
                let (lhs, rhs) = inner
                    .split_once('-')
                    .ok_or_else(|| Error::Parse(format!("bad term `{raw}`")))?;
                let power = |t: &str, letter: char| -> Result<usize> {
                    let rest = t
                        .strip_prefix(letter)
                        .ok_or_else(|| Error::Parse(format!("bad term `{raw}`")))?;
                    if rest.is_empty() {
                        return Ok(1);
                    }
                    rest.trim_start_matches('^')
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad term `{raw}`")))
                };
                if lhs.starts_with('F') {
                    DmTerm::Cyclic(power(lhs, 'F')?, power(rhs, 'V')?)
                } else {
                    DmTerm::Cyclic(power(rhs, 'F')?, power(lhs, 'V')?)
                }
            } else if let Some(inner) = body.strip_prefix("word(").and_then(|b| b.strip_suffix(')')) {
                DmTerm::Word(inner.parse::<CyclicWord>()?.canonical())
            } else {
                return Err(Error::Parse(format!("unrecognized module term `{raw}`")));
            };
            terms.push((term, k));
        }
        Ok(DmExpr { terms })
    }
}

fn split_power(term: &str) -> Result<(&str, usize)> {
    // `^k` only counts when it follows a closing bracket or `L`
    if let Some((body, exp)) = term.rsplit_once('^') {
        if body.ends_with('}') || body.ends_with(')') || body == "L" {
            let k = exp
                .trim_start_matches('{')
                .trim_end_matches('}')
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in `{term}`")))?;
            return Ok((body, k));
        }
    }
    Ok((term, 1))
}
