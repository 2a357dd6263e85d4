//! Local factors `λ_p` of the mass formula for the basic locus, split and
//! inert cases, in exact big-integer arithmetic.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimeCase {
    Split,
    Inert,
}

impl fmt::Display for PrimeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimeCase::Split => "split",
            PrimeCase::Inert => "inert",
        })
    }
}

impl FromStr for PrimeCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "split" => Ok(PrimeCase::Split),
            "inert" => Ok(PrimeCase::Inert),
            other => Err(Error::Parse(format!("prime case {other:?}, expected split or inert"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassInput {
    pub case: PrimeCase,
    /// Dimension of the hermitian space.
    pub n: u32,
    /// Cardinality of the residue field.
    pub q: u64,
}

impl MassInput {
    pub fn new(case: PrimeCase, n: u32, q: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Mass("n must be positive".into()));
        }
        if !is_prime_power(q) {
            return Err(Error::Mass(format!("q = {q} is not a prime power")));
        }
        if case == PrimeCase::Inert && !n.is_multiple_of(2) {
            return Err(Error::Mass(format!("inert case requires n even, got n = {n}")));
        }
        Ok(MassInput { case, n, q })
    }
}

pub fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).expect("q ≥ 2 has a divisor");
    let mut x = q;
    while x.is_multiple_of(p) {
        x /= p;
    }
    x == 1
}

fn pow(q: u64, e: u32) -> BigInt {
    Pow::pow(BigInt::from(q), e)
}

/// Split: `Π_{i=2}^{n} (q^{n-i+1} - 1)`. Inert: `(q^n - 1)/(q + 1)`.
pub fn local_factor(input: &MassInput) -> Result<BigInt> {
    let MassInput { case, n, q } = *input;
    match case {
        PrimeCase::Split => Ok((2..=n).map(|i| pow(q, n - i + 1) - 1).product()),
        PrimeCase::Inert => {
            let top: BigInt = pow(q, n) - 1;
            let (quot, rem) = top.div_rem(&BigInt::from(q + 1));
            if !rem.is_zero() {
                return Err(Error::Mass(format!("q + 1 does not divide q^{n} - 1")));
            }
            Ok(quot)
        }
    }
}

/// `q^{(1-n)n/2} · Π_{i=1}^{n} (q^n - q^{i-1}) / (q^n - 1)` as an exact rational.
pub fn unsimplified_split(n: u32, q: u64) -> BigRational {
    let qn = pow(q, n);
    let numer: BigInt = (1..=n).map(|i| &qn - pow(q, i - 1)).product();
    let shift = BigRational::from_integer(pow(q, n * (n - 1) / 2));
    BigRational::new(numer, &qn - BigInt::one()) / shift
}

/// `(q, λ)` rows for ascending `qs`. Growth is asserted for `n ≥ 2`.
pub fn growth_table(case: PrimeCase, n: u32, qs: &[u64]) -> Result<Vec<(u64, BigInt)>> {
    let rows = qs
        .iter()
        .map(|&q| local_factor(&MassInput::new(case, n, q)?).map(|l| (q, l)))
        .collect::<Result<Vec<_>>>()?;
    if n >= 2 {
        for w in rows.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Mass("q list must be strictly ascending".into()));
            }
            if w[1].1 <= w[0].1 {
                return Err(Error::Inconsistent(format!(
                    "λ not increasing between q = {} and q = {}",
                    w[0].0, w[1].0
                )));
            }
        }
    }
    Ok(rows)
}

pub fn to_tsv(rows: &[(u64, BigInt)]) -> String {
    let mut out = String::from("q\tlambda\n");
    for (q, l) in rows {
        out.push_str(&format!("{q}\t{l}\n"));
    }
    out
}
