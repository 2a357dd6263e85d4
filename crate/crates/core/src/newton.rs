//! Exact Newton polygons: multisets of slopes in `[0, 1]` with multiplicities,
//! drawn as lower convex lattice paths from the origin.
//!
//! Text forms follow the usual shorthand: `ord^k`, `ss^k`, `(s/t,(t-s)/t)^k`
//! for a dual slope pair each of multiplicity `t·k`, and `G_{a,b}^k` for the
//! pure polygon of slope `a/(a+b)` with multiplicity `(a+b)·k`. Summands are
//! joined with `⊕` (the parser also accepts `+`).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for slopes, rises and polygon values.
pub type Q = Ratio<i64>;

/// A slope `c/t` in `[0, 1]`, always stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slope(Q);

impl Slope {
    pub fn new(numerator: i64, denominator: i64) -> Result<Slope> {
        if denominator <= 0 || numerator < 0 || numerator > denominator {
            return Err(Error::Parse(format!(
                "slope {numerator}/{denominator} outside [0,1]"
            )));
        }
        Ok(Slope(Q::new(numerator, denominator)))
    }

    pub fn from_ratio(q: Q) -> Result<Slope> {
        Slope::new(*q.numer(), *q.denom())
    }

    pub fn zero() -> Slope {
        Slope(Q::zero())
    }

    pub fn one() -> Slope {
        Slope(Q::one())
    }

    pub fn half() -> Slope {
        Slope(Q::new(1, 2))
    }

    pub fn numerator(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn value(&self) -> Q {
        self.0
    }

    /// `1 - λ`.
    pub fn dual(&self) -> Slope {
        Slope(Q::one() - self.0)
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub slope: Slope,
    pub multiplicity: u32,
}

/// A Newton polygon. Segments have strictly increasing slopes and positive
/// multiplicities; the empty polygon is allowed (rank-0 pieces).
///
/// The derived `Ord` is structural and only used for deduplication; see
/// [`NewtonPolygon::cmp_linear`] for the order used in reports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NewtonPolygon {
    segments: Vec<Segment>,
}

/// Classical invariants of a polygon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonInvariants {
    pub p_rank: u32,
    pub supersingular: bool,
    pub ordinary: bool,
    pub height: u32,
    pub rise: String,
}

impl NewtonPolygon {
    pub fn zero() -> Self {
        NewtonPolygon::default()
    }

    /// Builds a polygon from `(slope, multiplicity)` pairs in any order; equal
    /// slopes are combined and zero multiplicities dropped.
    pub fn from_segments<I: IntoIterator<Item = (Slope, u32)>>(parts: I) -> Self {
        let mut map: BTreeMap<Slope, u32> = BTreeMap::new();
        for (slope, mult) in parts {
            if mult > 0 {
                *map.entry(slope).or_insert(0) += mult;
            }
        }
        NewtonPolygon {
            segments: map
                .into_iter()
                .map(|(slope, multiplicity)| Segment {
                    slope,
                    multiplicity,
                })
                .collect(),
        }
    }

    /// From `(numerator, denominator, multiplicity)` triples.
    pub fn from_triples(triples: &[(i64, i64, u32)]) -> Result<Self> {
        let parts = triples
            .iter()
            .map(|&(c, t, k)| Slope::new(c, t).map(|s| (s, k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_segments(parts))
    }

    pub fn ord(k: u32) -> Self {
        Self::from_segments([(Slope::zero(), k), (Slope::one(), k)])
    }

    pub fn ss(k: u32) -> Self {
        Self::from_segments([(Slope::half(), 2 * k)])
    }

    /// `(s/t, (t-s)/t)^k`: slopes `s/t` and `(t-s)/t`, each of multiplicity `t·k`.
    pub fn dual_pair(s: i64, t: i64, k: u32) -> Result<Self> {
        let lo = Slope::new(s, t)?;
        let mult = lo.denominator() as u32 * k;
        Ok(Self::from_segments([(lo, mult), (lo.dual(), mult)]))
    }

    /// `G_{a,b}^k`: slope `a/(a+b)` with multiplicity `(a+b)·k`.
    pub fn pure(a: i64, b: i64, k: u32) -> Result<Self> {
        if a < 0 || b < 0 || a + b == 0 || a.gcd(&b) != 1 {
            return Err(Error::Parse(format!("G_{{{a},{b}}} needs coprime a,b ≥ 0")));
        }
        Ok(Self::from_segments([(Slope::new(a, a + b)?, (a + b) as u32 * k)]))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_zero(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn multiplicity(&self, slope: Slope) -> u32 {
        self.segments
            .iter()
            .find(|s| s.slope == slope)
            .map_or(0, |s| s.multiplicity)
    }

    pub fn height(&self) -> u32 {
        self.segments.iter().map(|s| s.multiplicity).sum()
    }

    pub fn rise(&self) -> Q {
        self.segments
            .iter()
            .map(|s| s.slope.value() * Q::from_integer(i64::from(s.multiplicity)))
            .fold(Q::zero(), |a, b| a + b)
    }

    /// Union of slope multisets.
    pub fn merge(&self, other: &NewtonPolygon) -> NewtonPolygon {
        Self::from_segments(
            self.segments
                .iter()
                .chain(other.segments.iter())
                .map(|s| (s.slope, s.multiplicity)),
        )
    }

    /// Replaces every slope `λ` by `1 - λ`.
    pub fn reflect(&self) -> NewtonPolygon {
        Self::from_segments(
            self.segments
                .iter()
                .map(|s| (s.slope.dual(), s.multiplicity)),
        )
    }

    pub fn is_symmetric(&self) -> bool {
        self.reflect() == *self
    }

    /// `ν^r`.
    pub fn scale(&self, r: u32) -> NewtonPolygon {
        assert!(r >= 1, "scale factor must be positive");
        Self::from_segments(
            self.segments
                .iter()
                .map(|s| (s.slope, s.multiplicity * r)),
        )
    }

    /// Every slope `c/t` has multiplicity divisible by `t`.
    pub fn has_integral_breakpoints(&self) -> bool {
        self.segments
            .iter()
            .all(|s| i64::from(s.multiplicity) % s.slope.denominator() == 0)
    }

    /// Abscissae of the vertices, including both endpoints.
    pub fn breakpoints(&self) -> Vec<u32> {
        let mut xs = vec![0];
        let mut x = 0;
        for s in &self.segments {
            x += s.multiplicity;
            xs.push(x);
        }
        xs
    }

    /// Value of the convex piecewise-linear graph at abscissa `x ∈ [0, height]`.
    pub fn value_at(&self, x: Q) -> Q {
        let mut remaining = x;
        let mut y = Q::zero();
        for s in &self.segments {
            let run = Q::from_integer(i64::from(s.multiplicity));
            if remaining <= run {
                return y + s.slope.value() * remaining;
            }
            y += s.slope.value() * run;
            remaining -= run;
        }
        y
    }

    /// True iff both polygons share endpoints and the graph of `self` is
    /// pointwise on or above the graph of `other`.
    pub fn lies_on_or_above(&self, other: &NewtonPolygon) -> bool {
        if self.height() != other.height() || self.rise() != other.rise() {
            return false;
        }
        let mut xs = self.breakpoints();
        xs.extend(other.breakpoints());
        xs.sort_unstable();
        xs.dedup();
        xs.into_iter().all(|x| {
            let x = Q::from_integer(i64::from(x));
            self.value_at(x) >= other.value_at(x)
        })
    }

    pub fn p_rank(&self) -> u32 {
        self.multiplicity(Slope::zero())
    }

    pub fn is_supersingular(&self) -> bool {
        !self.is_zero() && self.segments.iter().all(|s| s.slope == Slope::half())
    }

    pub fn is_ordinary(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.slope == Slope::zero() || s.slope == Slope::one())
    }

    pub fn invariants(&self) -> PolygonInvariants {
        PolygonInvariants {
            p_rank: self.p_rank(),
            supersingular: self.is_supersingular(),
            ordinary: self.is_ordinary(),
            height: self.height(),
            rise: self.rise().to_string(),
        }
    }

    /// Linear extension of the "lies below" order: compares the values at
    /// every integer abscissa lexicographically, so a polygon lying below
    /// another sorts first. Ties fall back to the structural order.
    pub fn cmp_linear(&self, other: &NewtonPolygon) -> Ordering {
        let h = self.height().max(other.height());
        for x in 0..=h {
            let x = Q::from_integer(i64::from(x));
            match self.value_at(x).cmp(&other.value_at(x)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.cmp(other)
    }

    /// JSON triples `[numerator, denominator, multiplicity]`, slopes ascending.
    pub fn to_triples(&self) -> Vec<(i64, i64, u32)> {
        self.segments
            .iter()
            .map(|s| (s.slope.numerator(), s.slope.denominator(), s.multiplicity))
            .collect()
    }
}

/// Sorts a list of polygons by [`NewtonPolygon::cmp_linear`] and removes duplicates.
pub fn sort_polygons(polys: &mut Vec<NewtonPolygon>) {
    polys.sort_by(|a, b| a.cmp_linear(b));
    polys.dedup();
}

impl Serialize for NewtonPolygon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_triples().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NewtonPolygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let triples = Vec::<(i64, i64, u32)>::deserialize(d)?;
        NewtonPolygon::from_triples(&triples).map_err(serde::de::Error::custom)
    }
}

fn with_exponent(base: &str, k: u32) -> String {
    if k == 1 {
        base.to_string()
    } else {
        format!("{base}^{k}")
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut left: BTreeMap<Slope, u32> = self
            .segments
            .iter()
            .map(|s| (s.slope, s.multiplicity))
            .collect();
        let mut terms = Vec::new();
        // Pairing into `ord`, `ss` and `(s,1-s)` only reads well when every
        // slope has its partner; lopsided polygons keep the `G_{a,b}` form.
        let lower: Vec<Slope> = if self.is_symmetric() {
            left.keys()
                .copied()
                .filter(|s| s.value() <= Q::new(1, 2))
                .collect()
        } else {
            Vec::new()
        };
        for lo in lower {
            let t = lo.denominator() as u32;
            if lo == Slope::half() {
                let k = left[&lo] / 2;
                if k > 0 {
                    terms.push(with_exponent("ss", k));
                    *left.get_mut(&lo).unwrap() -= 2 * k;
                }
                continue;
            }
            let hi = lo.dual();
            let (Some(&a), Some(&b)) = (left.get(&lo), left.get(&hi)) else {
                continue;
            };
            let k = a.min(b) / t;
            if k == 0 {
                continue;
            }
            let base = if lo == Slope::zero() {
                "ord".to_string()
            } else {
                format!("({lo},{hi})")
            };
            terms.push(with_exponent(&base, k));
            *left.get_mut(&lo).unwrap() -= k * t;
            *left.get_mut(&hi).unwrap() -= k * t;
        }
        for (slope, mult) in left {
            if mult == 0 {
                continue;
            }
            let t = slope.denominator() as u32;
            if mult % t == 0 {
                let a = slope.numerator();
                let b = slope.denominator() - a;
                terms.push(with_exponent(&format!("G_{{{a},{b}}}"), mult / t));
            } else {
                terms.push(format!("[{slope};{mult}]"));
            }
        }
        f.write_str(&terms.join(" ⊕ "))
    }
}

impl FromStr for NewtonPolygon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty polygon".into()));
        }
        let mut acc = NewtonPolygon::zero();
        for term in compact.split(['⊕', '+']) {
            acc = acc.merge(&parse_term(term)?);
        }
        Ok(acc)
    }
}

fn parse_u32(s: &str) -> Result<u32> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad integer `{s}`")))
}

fn parse_ratio(s: &str) -> Result<(i64, i64)> {
    let (n, d) = s
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("bad slope `{s}`")))?;
    Ok((parse_u32(n)? as i64, parse_u32(d)? as i64))
}

/// Splits `base^k` / `base^{k}` into base and exponent.
fn split_exponent(term: &str) -> Result<(&str, u32)> {
    match term.rsplit_once('^') {
        Some((base, exp)) if !exp.contains('}') || exp.starts_with('{') => {
            let exp = exp.trim_start_matches('{').trim_end_matches('}');
            Ok((base, parse_u32(exp)?))
        }
        _ => Ok((term, 1)),
    }
}

fn parse_term(term: &str) -> Result<NewtonPolygon> {
    if term == "0" {
        return Ok(NewtonPolygon::zero());
    }
    if let Some(inner) = term.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| Error::Parse(format!("bad term `{term}`")))?;
        let (slope, mult) = inner
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("bad term `{term}`")))?;
        let (c, t) = parse_ratio(slope)?;
        return NewtonPolygon::from_triples(&[(c, t, parse_u32(mult)?)]);
    }
    let (base, k) = split_exponent(term)?;
    if k == 0 {
        return Err(Error::Parse(format!("zero exponent in `{term}`")));
    }
    match base {
        "ord" => Ok(NewtonPolygon::ord(k)),
        "ss" => Ok(NewtonPolygon::ss(k)),
        _ if base.starts_with("G_{") && base.ends_with('}') => {
            let inner = &base[3..base.len() - 1];
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad term `{term}`")))?;
            NewtonPolygon::pure(parse_u32(a)? as i64, parse_u32(b)? as i64, k)
        }
        _ if base.starts_with('(') && base.ends_with(')') => {
            let inner = &base[1..base.len() - 1];
            let (lo, hi) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad term `{term}`")))?;
            let (a, b) = parse_ratio(lo)?;
            let (c, d) = parse_ratio(hi)?;
            let lo = Slope::new(a, b)?;
            let hi = Slope::new(c, d)?;
            if lo.dual() != hi || lo > hi {
                return Err(Error::Parse(format!("`{term}` is not a dual slope pair")));
            }
            NewtonPolygon::dual_pair(lo.numerator(), lo.denominator(), k)
        }
        _ => Err(Error::Parse(format!("unrecognized polygon term `{term}`"))),
    }
}
