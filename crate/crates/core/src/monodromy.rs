//! Monodromy data `(m, N, a)` of μ_m-covers of the projective line and their
//! elementary invariants: genus, signature, normal form.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{mul_mod, units};
use crate::error::{Error, Result};

/// A validated monodromy datum. Entries of the inertia type are stored reduced
/// into `[1, m-1]`; `N` is the length of the inertia type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawDatum", into = "RawDatum")]
pub struct MonodromyDatum {
    m: u32,
    a: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawDatum {
    m: i64,
    #[serde(rename = "N")]
    n: usize,
    a: Vec<i64>,
}

impl TryFrom<RawDatum> for MonodromyDatum {
    type Error = Error;

    fn try_from(raw: RawDatum) -> Result<Self> {
        MonodromyDatum::new(raw.m, raw.n, &raw.a)
    }
}

impl From<MonodromyDatum> for RawDatum {
    fn from(d: MonodromyDatum) -> Self {
        RawDatum {
            m: i64::from(d.m),
            n: d.a.len(),
            a: d.a.iter().map(|&x| i64::from(x)).collect(),
        }
    }
}

impl MonodromyDatum {
    /// Validates raw input. Entries are reduced mod `m` before the three
    /// conditions (nonzero entries, primitive gcd, vanishing sum) are checked.
    pub fn new(m: i64, n: usize, a: &[i64]) -> Result<Self> {
        if m < 2 || m > i64::from(u32::MAX) {
            return Err(Error::DegreeTooSmall(m));
        }
        if n < 3 {
            return Err(Error::TooFewBranchPoints(n));
        }
        if a.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: a.len(),
            });
        }
        let m = m as u32;
        let reduced: Vec<u32> = a
            .iter()
            .map(|&x| x.rem_euclid(i64::from(m)) as u32)
            .collect();
        if let Some(i) = reduced.iter().position(|&x| x == 0) {
            return Err(Error::ZeroEntry { index: i + 1, m });
        }
        let gcd = reduced.iter().fold(m, |g, &x| g.gcd(&x));
        if gcd != 1 {
            return Err(Error::NotPrimitive { gcd });
        }
        let sum: u64 = reduced.iter().map(|&x| u64::from(x)).sum();
        if !sum.is_multiple_of(u64::from(m)) {
            return Err(Error::SumNotZero { sum, m });
        }
        Ok(MonodromyDatum { m, a: reduced })
    }

    pub fn from_residues(m: u32, a: &[u32]) -> Result<Self> {
        let a: Vec<i64> = a.iter().map(|&x| i64::from(x)).collect();
        Self::new(i64::from(m), a.len(), &a)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of branch points.
    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[u32] {
        &self.a
    }

    /// `g = 1 + ((N-2)m - Σ gcd(a(i), m)) / 2`.
    pub fn genus(&self) -> u32 {
        let m = i64::from(self.m);
        let n = self.a.len() as i64;
        let gcds: i64 = self.a.iter().map(|&x| i64::from(x.gcd(&self.m))).sum();
        let twice = (n - 2) * m - gcds;
        debug_assert!(twice >= -2 && twice % 2 == 0);
        (1 + twice / 2) as u32
    }

    /// Dimension of the family: three of the N branch points can be fixed.
    pub fn family_dimension(&self) -> u32 {
        self.a.len() as u32 - 3
    }

    /// Signature type `f(τ_n) = -1 + Σ_i ⟨-n a(i) / m⟩` for `n = 1..m-1`.
    pub fn signature(&self) -> Signature {
        let m = u64::from(self.m);
        let values = (1..self.m)
            .map(|n| {
                // Σ ⟨-n a(i)/m⟩ = (Σ ((-n a(i)) mod m)) / m, an integer since Σ a ≡ 0.
                let total: u64 = self
                    .a
                    .iter()
                    .map(|&x| (m - u64::from(mul_mod(n, x, self.m))) % m)
                    .sum();
                debug_assert_eq!(total % m, 0);
                (total / m) as u32 - 1
            })
            .collect();
        Signature { m: self.m, values }
    }

    /// Lexicographically minimal sorted representative of the orbit of `a`
    /// under `(Z/m)^* × Sym_N`.
    pub fn normalize(&self) -> MonodromyDatum {
        let best = units(self.m)
            .into_iter()
            .map(|u| {
                let mut v: Vec<u32> = self.a.iter().map(|&x| mul_mod(x, u, self.m)).collect();
                v.sort_unstable();
                v
            })
            .min()
            .expect("at least one unit");
        MonodromyDatum { m: self.m, a: best }
    }

    pub fn is_equivalent(&self, other: &MonodromyDatum) -> bool {
        self.m == other.m && self.n() == other.n() && self.normalize() == other.normalize()
    }

    /// Inertia type as a comma-separated tuple, e.g. `(2,4,4,4)`.
    pub fn tuple_string(&self) -> String {
        tuple_string(&self.a)
    }
}

pub(crate) fn tuple_string(a: &[u32]) -> String {
    let parts: Vec<String> = a.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

impl fmt::Display for MonodromyDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(u32::to_string).collect();
        write!(f, "m={} N={} a={}", self.m, self.a.len(), parts.join(","))
    }
}

impl FromStr for MonodromyDatum {
    type Err = Error;

    /// Parses `m=7 N=4 a=2,4,4,4`. `N` may be omitted.
    fn from_str(s: &str) -> Result<Self> {
        let mut m = None;
        let mut n = None;
        let mut a = None;
        for tok in s.split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))?;
            match key {
                "m" => m = Some(parse_int(value)?),
                "N" => n = Some(parse_int(value)? as usize),
                "a" => a = Some(parse_list(value)?),
                _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
            }
        }
        let m = m.ok_or_else(|| Error::Parse("missing m".into()))?;
        let a = a.ok_or_else(|| Error::Parse("missing a".into()))?;
        let n = n.unwrap_or(a.len());
        MonodromyDatum::new(m, n, &a)
    }
}

fn parse_int(s: &str) -> Result<i64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer `{s}`")))
}

/// Parses `2,4,4,4` or `(2,4,4,4)`.
pub fn parse_list(s: &str) -> Result<Vec<i64>> {
    s.trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(parse_int)
        .collect()
}

/// Signature type of a monodromy datum: `f(τ_n)` for `n = 1..m-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    m: u32,
    values: Vec<u32>,
}

impl Signature {
    pub fn from_values(m: u32, values: Vec<u32>) -> Self {
        assert_eq!(values.len() + 1, m as usize, "signature needs m-1 values");
        Signature { m, values }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `f(τ_n)`, with `f(τ_0) = 0`.
    pub fn f(&self, n: u32) -> u32 {
        let n = n % self.m;
        if n == 0 {
            0
        } else {
            self.values[n as usize - 1]
        }
    }

    /// `g(τ_n) = f(τ_n) + f(τ_{-n})`.
    pub fn g(&self, n: u32) -> u32 {
        let n = n % self.m;
        self.f(n) + self.f((self.m - n) % self.m)
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn total(&self) -> u32 {
        self.values.iter().sum()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&tuple_string(&self.values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(m: i64, a: &[i64]) -> MonodromyDatum {
        MonodromyDatum::new(m, a.len(), a).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(MonodromyDatum::new(7, 4, &[2, 4, 4, 4]).is_ok());
        assert!(MonodromyDatum::new(9, 4, &[3, 5, 5, 5]).is_ok());
        let err = MonodromyDatum::new(7, 4, &[2, 4, 4, 3]).unwrap_err();
        assert_eq!(err, Error::SumNotZero { sum: 13, m: 7 });
        assert!(err.to_string().contains("sum ≢ 0 mod m"));
    }

    #[test]
    fn validation_errors_name_the_condition() {
        assert_eq!(
            MonodromyDatum::new(6, 4, &[2, 4, 0, 6]).unwrap_err(),
            Error::ZeroEntry { index: 3, m: 6 }
        );
        assert_eq!(
            MonodromyDatum::new(6, 3, &[2, 2, 2]).unwrap_err(),
            Error::NotPrimitive { gcd: 2 }
        );
        assert_eq!(
            MonodromyDatum::new(5, 3, &[1, 4]).unwrap_err(),
            Error::LengthMismatch { expected: 3, got: 2 }
        );
        assert_eq!(
            MonodromyDatum::new(5, 2, &[1, 4]).unwrap_err(),
            Error::TooFewBranchPoints(2)
        );
        assert_eq!(
            MonodromyDatum::new(1, 3, &[1, 1, 1]).unwrap_err(),
            Error::DegreeTooSmall(1)
        );
    }

    #[test]
    fn entries_are_reduced() {
        let d = datum(7, &[9, -3, 4, 4]);
        assert_eq!(d.a(), &[2, 4, 4, 4]);
    }

    #[test]
    fn genus_examples() {
        assert_eq!(datum(7, &[2, 4, 4, 4]).genus(), 6);
        assert_eq!(datum(2, &[1, 1, 1, 1]).genus(), 1);
        assert_eq!(datum(11, &[1, 3, 4, 5, 9]).genus(), 15);
        assert_eq!(datum(3, &[1, 1, 1]).genus(), 1);
    }

    #[test]
    fn signature_examples() {
        assert_eq!(datum(7, &[2, 4, 4, 4]).signature().values(), &[1, 2, 0, 2, 0, 1]);
        assert_eq!(
            datum(9, &[3, 5, 5, 5]).signature().values(),
            &[1, 2, 0, 2, 0, 1, 0, 1]
        );
        assert_eq!(
            datum(8, &[2, 4, 5, 5]).signature().values(),
            &[1, 1, 0, 0, 2, 0, 1]
        );
        assert_eq!(datum(2, &[1, 1, 1, 1]).signature().values(), &[1]);
    }

    #[test]
    fn g_is_f_plus_dual() {
        let s = datum(9, &[3, 5, 5, 5]).signature();
        assert_eq!(s.g(3), 1);
        assert_eq!(s.g(1), 2);
        assert_eq!(s.g(0), 0);
    }

    #[test]
    fn normalize_examples() {
        // Unit 2 sends (4,4,2,4) to (1,1,4,1).
        assert_eq!(datum(7, &[4, 4, 2, 4]).normalize().a(), &[1, 1, 1, 4]);
        let m1 = datum(2, &[1, 1, 1, 1]);
        assert_eq!(m1.normalize(), m1);
        assert_eq!(
            datum(5, &[1, 3, 3, 3]).normalize(),
            datum(5, &[2, 1, 1, 1]).normalize()
        );
    }

    #[test]
    fn family_dimension_is_n_minus_3() {
        assert_eq!(datum(7, &[2, 4, 4, 4]).family_dimension(), 1);
        assert_eq!(datum(5, &[2, 2, 2, 2, 2]).family_dimension(), 2);
        assert_eq!(datum(3, &[1, 1, 1, 1, 1, 1]).family_dimension(), 3);
    }

    #[test]
    fn text_and_json_forms() {
        let d: MonodromyDatum = "m=7 N=4 a=2,4,4,4".parse().unwrap();
        assert_eq!(d, datum(7, &[2, 4, 4, 4]));
        assert_eq!(d.to_string(), "m=7 N=4 a=2,4,4,4");
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"m":7,"N":4,"a":[2,4,4,4]}"#);
        let back: MonodromyDatum = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<MonodromyDatum>(r#"{"m":7,"N":4,"a":[2,4,4,3]}"#).is_err());
        assert!("m=7 a=2,4,4,4 q=1".parse::<MonodromyDatum>().is_err());
    }
}
