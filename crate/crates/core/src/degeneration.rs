//! Degenerations of compact type: splitting an inertia type at a node into
//! two smaller monodromy data, and the Newton polygons they contribute.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kottwitz::newton_polygon_set;
use crate::monodromy::{parse_list, MonodromyDatum};
use crate::newton::{sort_polygons, NewtonPolygon};

/// `a` split along a subset `T`: `α₁ = (a_T, -Σa_T)` over `m` and
/// `α₂ = (Σa_T / r, a_j / r for j ∉ T)` over `m/r`, where
/// `r = gcd(m, Σa_T)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Degeneration {
    pub parent: MonodromyDatum,
    /// One-based positions of the entries kept on the first component.
    pub subset: Vec<usize>,
    pub alpha1: MonodromyDatum,
    pub alpha2: MonodromyDatum,
    pub r: u32,
}

/// Identity of a degeneration up to equivalence of each side. For `r = 1`
/// the two sides live over the same modulus and are unordered.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegenerationKey {
    pub r: u32,
    pub sides: (Vec<u32>, Vec<u32>),
}

impl DegenerationKey {
    pub fn new(r: u32, alpha1: &MonodromyDatum, alpha2: &MonodromyDatum) -> Self {
        let x = alpha1.normalize().a().to_vec();
        let y = alpha2.normalize().a().to_vec();
        let sides = if r == 1 && y < x { (y, x) } else { (x, y) };
        DegenerationKey { r, sides }
    }
}

impl Degeneration {
    /// `Ind_{m/r}^m α₂ = (r·α₂(i))`.
    pub fn induced(&self) -> Vec<u32> {
        self.alpha2.a().iter().map(|&x| x * self.r).collect()
    }

    pub fn key(&self) -> DegenerationKey {
        DegenerationKey::new(self.r, &self.alpha1, &self.alpha2)
    }

    /// `g(α₁) + r·g(α₂)`, which must equal the parent genus.
    pub fn split_genus(&self) -> u32 {
        self.alpha1.genus() + self.r * self.alpha2.genus()
    }
}

impl fmt::Display for Degeneration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r == 1 {
            write!(f, "{}+{}", self.alpha1.tuple_string(), self.alpha2.tuple_string())
        } else {
            write!(
                f,
                "{}+Ind_{}^{}{}",
                self.alpha1.tuple_string(),
                self.alpha2.m(),
                self.parent.m(),
                self.alpha2.tuple_string()
            )
        }
    }
}

/// Parses `(α₁)+(α₂)` or `(α₁)+Ind_{k}^{m}(α₂)` (braces optional) for a
/// parent of degree `m`.
pub fn parse_degeneration(m: u32, s: &str) -> Result<DegenerationKey> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("degeneration {s:?}"));
    let (left, right) = compact.split_once(")+").ok_or_else(bad)?;
    let left = left.strip_prefix('(').ok_or_else(bad)?;
    let alpha1 = datum_over(m, left)?;
    let (m2, body) = match right.strip_prefix("Ind_") {
        Some(rest) => {
            let (sub, rest) = rest.split_once('^').ok_or_else(bad)?;
            let open = rest.find('(').ok_or_else(bad)?;
            let sup = &rest[..open];
            let unbrace = |t: &str| t.trim_matches(|c| c == '{' || c == '}').parse::<u32>();
            let k = unbrace(sub).map_err(|_| bad())?;
            if unbrace(sup).map_err(|_| bad())? != m || k == 0 || !m.is_multiple_of(k) {
                return Err(bad());
            }
            (k, &rest[open..])
        }
        None => (m, right),
    };
    let body = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .ok_or_else(bad)?;
    let alpha2 = datum_over(m2, body)?;
    Ok(DegenerationKey::new(m / m2, &alpha1, &alpha2))
}

fn datum_over(m: u32, list: &str) -> Result<MonodromyDatum> {
    let a = parse_list(list)?;
    MonodromyDatum::new(i64::from(m), a.len(), &a)
}

/// Every degeneration of compact type with both sides having at least three
/// branch points, one representative per [`DegenerationKey`], in order of
/// first discovery over subsets.
pub fn degenerations(d: &MonodromyDatum) -> Vec<Degeneration> {
    let n = d.n();
    let m = d.m();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if n < 4 {
        return out;
    }
    for mask in 1u64..(1u64 << n) {
        let size = mask.count_ones() as usize;
        if size < 2 || size > n - 2 {
            continue;
        }
        let (inside, outside): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| mask & (1 << i) != 0);
        let sum: u64 = inside.iter().map(|&i| u64::from(d.a()[i])).sum();
        let node = (sum % u64::from(m)) as u32;
        if node == 0 {
            continue;
        }
        let last = m - node;
        let r = m.gcd(&last);
        if outside.iter().any(|&j| !d.a()[j].is_multiple_of(r)) {
            continue;
        }
        let mut a1: Vec<u32> = inside.iter().map(|&i| d.a()[i]).collect();
        a1.push(last);
        let mut a2 = vec![node / r];
        a2.extend(outside.iter().map(|&j| d.a()[j] / r));
        let (Ok(alpha1), Ok(alpha2)) = (
            MonodromyDatum::from_residues(m, &a1),
            MonodromyDatum::from_residues(m / r, &a2),
        ) else {
            continue;
        };
        let deg = Degeneration {
            parent: d.clone(),
            subset: inside.iter().map(|&i| i + 1).collect(),
            alpha1,
            alpha2,
            r,
        };
        debug_assert_eq!(deg.split_genus(), d.genus());
        if seen.insert(deg.key()) {
            out.push(deg);
        }
    }
    out
}

/// `ν₁ ⊕ ν₂^r` for every pair of polygons on the two sides of `deg`.
pub fn products(deg: &Degeneration, p: i64) -> Result<Vec<(NewtonPolygon, NewtonPolygon, NewtonPolygon)>> {
    let left = newton_polygon_set(&deg.alpha1, p)?;
    let right = newton_polygon_set(&deg.alpha2, p)?;
    let mut out = Vec::with_capacity(left.len() * right.len());
    for nu1 in &left {
        for nu2 in &right {
            out.push((nu1.merge(&nu2.scale(deg.r)), nu1.clone(), nu2.clone()));
        }
    }
    Ok(out)
}

/// Polygons of the form `ν₁ ⊕ ν₂^r` over some degeneration, sorted from
/// lowest to highest.
pub fn pel_decomposable_set(d: &MonodromyDatum, p: i64) -> Result<Vec<NewtonPolygon>> {
    crate::arith::unit_residue(p, d.m())?;
    let mut out = Vec::new();
    for deg in degenerations(d) {
        out.extend(products(&deg, p)?.into_iter().map(|(nu, _, _)| nu));
    }
    sort_polygons(&mut out);
    Ok(out)
}

/// A decomposition `ν = ν₁ ⊕ ν₂^r` along a specific degeneration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub degeneration: Degeneration,
    pub nu1: NewtonPolygon,
    pub nu2: NewtonPolygon,
}

pub fn is_pel_decomposable(d: &MonodromyDatum, p: i64, nu: &NewtonPolygon) -> Result<Option<Witness>> {
    crate::arith::unit_residue(p, d.m())?;
    for deg in degenerations(d) {
        if let Some((_, nu1, nu2)) = products(&deg, p)?.into_iter().find(|(x, _, _)| x == nu) {
            return Ok(Some(Witness {
                degeneration: deg,
                nu1,
                nu2,
            }));
        }
    }
    Ok(None)
}

/// `(2,5,1)+(7,4,5)` style list of all degenerations.
pub fn render_all(d: &MonodromyDatum) -> Vec<String> {
    degenerations(d).iter().map(ToString::to_string).collect()
}
