//! Brute-force oracles shared by the integration tests. Nothing here calls the
//! enumeration code under test; only the polygon type is reused to compare
//! results.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use npstrata::kottwitz::CharacterOrbit;
use npstrata::{NewtonPolygon, Slope};

pub type Q = Ratio<i64>;

/// `f(n) = -1 + Σ_i ⟨-n·a(i)/m⟩`, straight from the fractional-part formula.
pub fn signature_value(m: u32, a: &[u32], n: u32) -> u32 {
    let m = i64::from(m);
    let twice: i64 = a
        .iter()
        .map(|&ai| (-(i64::from(n)) * i64::from(ai)).rem_euclid(m))
        .sum();
    u32::try_from(twice / m - 1).expect("signature is non-negative")
}

/// Value at `x` of the average of the Hodge polygons of the orbit, scaled to
/// height `#o·g`: each character contributes slope 0 with multiplicity
/// `g - f(τ)` followed by slope 1 with multiplicity `f(τ)`.
fn mu_value(len: i64, g: i64, f: &[u32], x: i64) -> Q {
    let t = Q::new(x, len);
    f.iter()
        .map(|&fi| {
            let v = t - Q::from_integer(g - i64::from(fi));
            if v > Q::from_integer(0) {
                v
            } else {
                Q::from_integer(0)
            }
        })
        .sum()
}

/// Slope-to-width map of a path given as `(width, rise)` pieces, with equal
/// slopes combined. `None` if the pieces are not in non-decreasing slope order.
fn convex_runs(pieces: &[(i64, i64)]) -> Option<BTreeMap<Q, i64>> {
    let mut runs = BTreeMap::new();
    let mut last = Q::from_integer(-1);
    for &(w, r) in pieces {
        let s = Q::new(r, w);
        if s < last {
            return None;
        }
        last = s;
        *runs.entry(s).or_insert(0) += w;
    }
    Some(runs)
}

fn value_at(runs: &BTreeMap<Q, i64>, x: i64) -> Q {
    let mut left = x;
    let mut y = Q::from_integer(0);
    for (&s, &w) in runs {
        let take = left.min(w);
        y += s * Q::from_integer(take);
        left -= take;
    }
    y
}

/// All ways to cut `(height, rise)` into `(width, rise)` pieces of
/// non-decreasing slope, each in `[0,1]`.
fn all_pieces(height: i64, rise: i64, prefix: &mut Vec<(i64, i64)>, out: &mut Vec<Vec<(i64, i64)>>) {
    if height == 0 {
        if rise == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    // the remaining path must reach (height, rise) with slopes ≤ 1
    if rise > height {
        return;
    }
    let (lw, lr) = prefix.last().copied().unwrap_or((1, 0));
    for w in 1..=height {
        for r in 0..=w.min(rise) {
            if r * lw < lr * w {
                continue;
            }
            prefix.push((w, r));
            all_pieces(height - w, rise - r, prefix, out);
            prefix.pop();
        }
    }
}

/// Every convex lattice path from `(0,0)` to `(#o·g, Σf)` with slopes in
/// `[0,1]`, kept when each slope's total width is divisible by `#o`, the path
/// is on or above the averaged Hodge polygon at every integer abscissa, and
/// (for self-dual orbits) the slope multiset is invariant under `s ↦ 1 - s`.
pub fn brute_force_orbit(len: u32, g: u32, f: &[u32], self_dual: bool) -> BTreeSet<NewtonPolygon> {
    let (len, g) = (i64::from(len), i64::from(g));
    let height = len * g;
    let rise: i64 = f.iter().map(|&x| i64::from(x)).sum();
    let mut paths = Vec::new();
    all_pieces(height, rise, &mut Vec::new(), &mut paths);
    let mut out = BTreeSet::new();
    for pieces in paths {
        let Some(runs) = convex_runs(&pieces) else { continue };
        if runs.values().any(|w| w % len != 0) {
            continue;
        }
        if (0..=height).any(|x| value_at(&runs, x) < mu_value(len, g, f, x)) {
            continue;
        }
        if self_dual {
            let mirrored: BTreeMap<Q, i64> = runs.iter().map(|(&s, &w)| (Q::from_integer(1) - s, w)).collect();
            if mirrored != runs {
                continue;
            }
        }
        out.insert(polygon(&runs));
    }
    out
}

pub fn polygon(runs: &BTreeMap<Q, i64>) -> NewtonPolygon {
    NewtonPolygon::from_segments(runs.iter().map(|(&s, &w)| {
        (
            Slope::new(*s.numer(), *s.denom()).expect("slope in [0,1]"),
            u32::try_from(w).expect("positive width"),
        )
    }))
}

/// The oracle applied to a library orbit, using only its character list and
/// the raw inertia type.
pub fn oracle_for(orbit: &CharacterOrbit, m: u32, a: &[u32]) -> BTreeSet<NewtonPolygon> {
    let cycle = orbit.cycle();
    let f: Vec<u32> = cycle.iter().map(|&n| signature_value(m, a, n)).collect();
    let g = signature_value(m, a, cycle[0]) + signature_value(m, a, m - cycle[0]);
    let self_dual = cycle.contains(&(m - cycle[0]));
    brute_force_orbit(cycle.len() as u32, g, &f, self_dual)
}
