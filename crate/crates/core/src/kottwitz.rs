//! Frobenius orbits on the characters of `μ_m`, the μ-ordinary Newton polygon
//! of each orbit, and the enumeration of all Newton polygons allowed by the
//! duality (D), weak admissibility (WA) and multiplicity (M) conditions.

use std::collections::BTreeMap;

use crate::arith::{mul_mod, unit_residue, units};
use crate::error::{Error, Result};
use crate::monodromy::{MonodromyDatum, Signature};
use crate::newton::{sort_polygons, NewtonPolygon, Slope, Q};

/// A Frobenius orbit `{n, pn, p²n, …}` of nonzero characters mod `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterOrbit {
    m: u32,
    p: u32,
    /// Frobenius order, starting at the smallest element.
    cycle: Vec<u32>,
    order: u32,
    g: u32,
    f_values: Vec<u32>,
    index: usize,
    dual: usize,
}

impl CharacterOrbit {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn p_residue(&self) -> u32 {
        self.p
    }

    /// Position of this orbit in its decomposition.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Position of the dual orbit `{-n}` in the same decomposition.
    pub fn dual_index(&self) -> usize {
        self.dual
    }

    pub fn is_self_dual(&self) -> bool {
        self.index == self.dual
    }

    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    /// Elements in Frobenius order `τ, τ^σ, τ^{σ²}, …`.
    pub fn cycle(&self) -> &[u32] {
        &self.cycle
    }

    pub fn elements(&self) -> Vec<u32> {
        let mut e = self.cycle.clone();
        e.sort_unstable();
        e
    }

    /// Common additive order of the elements.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// `g(τ) = f(τ) + f(τ*)`, constant on the orbit.
    pub fn g(&self) -> u32 {
        self.g
    }

    /// `f` values aligned with [`CharacterOrbit::cycle`].
    pub fn f_values(&self) -> &[u32] {
        &self.f_values
    }

    pub fn f(&self, n: u32) -> Option<u32> {
        self.cycle
            .iter()
            .position(|&x| x == n % self.m)
            .map(|i| self.f_values[i])
    }

    /// Horizontal length of the orbit's polygon: `#o · g(o)`.
    pub fn height(&self) -> u32 {
        self.len() as u32 * self.g
    }

    /// Total rise `Σ_{τ∈o} f(τ)`.
    pub fn rise(&self) -> u32 {
        self.f_values.iter().sum()
    }

    /// The μ-ordinary polygon of the orbit.
    pub fn mu_ordinary(&self) -> MuOrdinaryOrbitData {
        let len = self.len() as u32;
        let g = self.g;
        let mut distinct: Vec<u32> = self
            .f_values
            .iter()
            .copied()
            .filter(|&f| f >= 1 && f < g)
            .collect();
        distinct.sort_unstable_by(|a, b| b.cmp(a));
        distinct.dedup();
        let s = distinct.len();
        let mut e = Vec::with_capacity(s + 2);
        e.push(g);
        e.extend(distinct);
        e.push(0);

        if g == 0 {
            return MuOrdinaryOrbitData {
                s: 0,
                e,
                slopes: Vec::new(),
                multiplicities: Vec::new(),
                polygon: NewtonPolygon::zero(),
            };
        }

        let mut slopes = Vec::with_capacity(s + 1);
        let mut multiplicities = Vec::with_capacity(s + 1);
        let mut count = 0i64;
        for t in 0..=s {
            count += self.f_values.iter().filter(|&&f| f == e[t]).count() as i64;
            slopes.push(Q::new(count, i64::from(len)));
            multiplicities.push(len * (e[t] - e[t + 1]));
        }
        let polygon = NewtonPolygon::from_segments(
            slopes
                .iter()
                .zip(&multiplicities)
                .map(|(&q, &k)| (Slope::from_ratio(q).expect("slope in [0,1]"), k)),
        );
        MuOrdinaryOrbitData {
            s,
            e,
            slopes,
            multiplicities,
            polygon,
        }
    }

    /// All polygons allowed on this orbit: convex lattice paths from `(0,0)`
    /// to `(#o·g, Σf)` with slopes in `[0,1]`, every run length divisible by
    /// `#o`, lying on or above `μ(o)`, and symmetric when the orbit is
    /// self-dual. Sorted with `μ(o)` first.
    pub fn admissible_polygons(&self) -> Vec<NewtonPolygon> {
        let mu = self.mu_ordinary().polygon;
        let mut out = Vec::new();
        let search = PathSearch {
            step: self.len() as u32,
            height: self.height(),
            rise: self.rise(),
            floor: &mu,
        };
        search.run(&mut out);
        if self.is_self_dual() {
            out.retain(NewtonPolygon::is_symmetric);
        }
        sort_polygons(&mut out);
        out
    }
}

/// Depth-first search over lattice breakpoints with strictly increasing slopes.
struct PathSearch<'a> {
    step: u32,
    height: u32,
    rise: u32,
    floor: &'a NewtonPolygon,
}

impl PathSearch<'_> {
    fn run(&self, out: &mut Vec<NewtonPolygon>) {
        if self.height == 0 {
            out.push(NewtonPolygon::zero());
            return;
        }
        let mut segs = Vec::new();
        self.descend(0, 0, None, &mut segs, out);
    }

    fn descend(
        &self,
        x: u32,
        y: u32,
        last: Option<Q>,
        segs: &mut Vec<(u32, u32)>,
        out: &mut Vec<NewtonPolygon>,
    ) {
        if x == self.height {
            if y == self.rise {
                out.push(NewtonPolygon::from_segments(segs.iter().map(|&(dx, dy)| {
                    let q = Q::new(i64::from(dy), i64::from(dx));
                    (Slope::from_ratio(q).expect("slope in [0,1]"), dx)
                })));
            }
            return;
        }
        let mut dx = self.step;
        while x + dx <= self.height {
            let nx = x + dx;
            for dy in 0..=dx {
                let ny = y + dy;
                if ny > self.rise {
                    break;
                }
                let slope = Q::new(i64::from(dy), i64::from(dx));
                if last.is_some_and(|l| slope <= l) {
                    continue;
                }
                let (rem_x, rem_y) = (self.height - nx, self.rise - ny);
                if rem_x == 0 {
                    if rem_y != 0 {
                        continue;
                    }
                } else {
                    // later slopes are strictly larger and at most 1
                    if rem_y > rem_x
                        || Q::from_integer(i64::from(rem_y)) <= slope * Q::from_integer(i64::from(rem_x))
                    {
                        continue;
                    }
                }
                if !self.segment_above_floor(x, y, dx, slope) {
                    continue;
                }
                segs.push((dx, dy));
                self.descend(nx, ny, Some(slope), segs, out);
                segs.pop();
            }
            dx += self.step;
        }
    }

    fn segment_above_floor(&self, x: u32, y: u32, dx: u32, slope: Q) -> bool {
        (1..=dx).all(|i| {
            let xi = Q::from_integer(i64::from(x + i));
            let yi = Q::from_integer(i64::from(y)) + slope * Q::from_integer(i64::from(i));
            yi >= self.floor.value_at(xi)
        })
    }
}

/// Data of the μ-ordinary polygon of one orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuOrdinaryOrbitData {
    /// Number of distinct `f` values in `[1, g-1]`.
    pub s: usize,
    /// `E(0) = g > E(1) > … > E(s) > E(s+1) = 0`.
    pub e: Vec<u32>,
    pub slopes: Vec<Q>,
    pub multiplicities: Vec<u32>,
    pub polygon: NewtonPolygon,
}

/// Partitions `{1, …, m-1}` into orbits under multiplication by `p`.
/// Orbits are ordered by their smallest element.
pub fn orbit_decomposition(m: u32, p: i64, sig: &Signature) -> Result<Vec<CharacterOrbit>> {
    let p = unit_residue(p, m)?;
    let mut seen = vec![false; m as usize];
    let mut orbits = Vec::new();
    for start in 1..m {
        if seen[start as usize] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut n = start;
        while !seen[n as usize] {
            seen[n as usize] = true;
            cycle.push(n);
            n = mul_mod(n, p, m);
        }
        let order = crate::arith::additive_order(start, m);
        let g = sig.g(start);
        let f_values: Vec<u32> = cycle.iter().map(|&n| sig.f(n)).collect();
        debug_assert!(cycle.iter().all(|&n| sig.g(n) == g));
        orbits.push(CharacterOrbit {
            m,
            p,
            cycle,
            order,
            g,
            f_values,
            index: orbits.len(),
            dual: usize::MAX,
        });
    }
    let owner: BTreeMap<u32, usize> = orbits
        .iter()
        .enumerate()
        .flat_map(|(i, o)| o.cycle.iter().map(move |&n| (n, i)))
        .collect();
    for o in &mut orbits {
        o.dual = owner[&((m - o.cycle[0]) % m)];
    }
    Ok(orbits)
}

/// `ν_o = ⊕_o μ(o)`.
pub fn mu_ordinary(d: &MonodromyDatum, p: i64) -> Result<NewtonPolygon> {
    let orbits = orbit_decomposition(d.m(), p, &d.signature())?;
    Ok(orbits
        .iter()
        .fold(NewtonPolygon::zero(), |acc, o| acc.merge(&o.mu_ordinary().polygon)))
}

/// The full set of Newton polygons on the reduction of the Shimura variety:
/// one admissible polygon per self-dual orbit, one per unordered dual pair
/// (its partner is the reflection), merged. Sorted from μ-ordinary to basic.
pub fn newton_polygon_set(d: &MonodromyDatum, p: i64) -> Result<Vec<NewtonPolygon>> {
    let orbits = orbit_decomposition(d.m(), p, &d.signature())?;
    let mut partial = vec![NewtonPolygon::zero()];
    for o in &orbits {
        if o.dual_index() < o.index() {
            continue;
        }
        let choices: Vec<NewtonPolygon> = if o.is_self_dual() {
            o.admissible_polygons()
        } else {
            o.admissible_polygons()
                .iter()
                .map(|nu| nu.merge(&nu.reflect()))
                .collect()
        };
        let mut next = Vec::with_capacity(partial.len() * choices.len());
        for acc in &partial {
            for c in &choices {
                next.push(acc.merge(c));
            }
        }
        sort_polygons(&mut next);
        partial = next;
    }
    Ok(partial)
}

/// The unique element lying on or above every other element of the set.
pub fn basic_polygon(d: &MonodromyDatum, p: i64) -> Result<NewtonPolygon> {
    let set = newton_polygon_set(d, p)?;
    unique_maximum(&set).ok_or(Error::NotUnique("basic polygon"))
}

/// Unique element lying on or above all others, if any.
pub fn unique_maximum(set: &[NewtonPolygon]) -> Option<NewtonPolygon> {
    let tops: Vec<&NewtonPolygon> = set
        .iter()
        .filter(|a| set.iter().all(|b| a.lies_on_or_above(b)))
        .collect();
    match tops.as_slice() {
        [only] => Some((*only).clone()),
        _ => None,
    }
}

/// Unique element lying on or below all others, if any.
pub fn unique_minimum(set: &[NewtonPolygon]) -> Option<NewtonPolygon> {
    let bottoms: Vec<&NewtonPolygon> = set
        .iter()
        .filter(|a| set.iter().all(|b| b.lies_on_or_above(a)))
        .collect();
    match bottoms.as_slice() {
        [only] => Some((*only).clone()),
        _ => None,
    }
}

/// True iff every two elements are comparable.
pub fn is_totally_ordered(set: &[NewtonPolygon]) -> bool {
    set.iter().all(|a| {
        set.iter()
            .all(|b| a.lies_on_or_above(b) || b.lies_on_or_above(a))
    })
}

/// Units mod `m` grouped by the cyclic subgroup they generate. Every quantity
/// computed here depends on `p` only through this group.
pub fn congruence_classes(m: u32) -> Vec<Vec<u32>> {
    let mut groups: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    for u in units(m) {
        let mut sub = vec![1 % m];
        let mut x = u % m;
        while x != 1 % m {
            sub.push(x);
            x = mul_mod(x, u, m);
        }
        sub.sort_unstable();
        groups.entry(sub).or_default().push(u);
    }
    let mut out: Vec<Vec<u32>> = groups.into_values().collect();
    out.sort();
    out
}

/// The congruence class containing `p`.
pub fn congruence_class_of(m: u32, p: i64) -> Result<Vec<u32>> {
    let p = unit_residue(p, m)?;
    Ok(congruence_classes(m)
        .into_iter()
        .find(|c| c.contains(&p))
        .expect("every unit lies in a class"))
}

/// `p ≡ 2,4 mod 7`.
pub fn class_label(m: u32, class: &[u32]) -> String {
    let parts: Vec<String> = class.iter().map(u32::to_string).collect();
    format!("p ≡ {} mod {m}", parts.join(","))
}
