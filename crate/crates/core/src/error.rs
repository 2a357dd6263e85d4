use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cover degree m = {0} must be at least 2")]
    DegreeTooSmall(i64),
    #[error("N = {0} branch points given, at least 3 are required")]
    TooFewBranchPoints(usize),
    #[error("inertia type has {got} entries but N = {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("zero entry: a({index}) ≡ 0 mod {m}")]
    ZeroEntry { index: usize, m: u32 },
    #[error("gcd: gcd(m, a(1), …, a(N)) = {gcd} ≠ 1")]
    NotPrimitive { gcd: u32 },
    #[error("sum ≢ 0 mod m: Σ a(i) = {sum}, m = {m}")]
    SumNotZero { sum: u64, m: u32 },
    #[error("p ∤ m required: residue {p} is not a unit mod {m}")]
    NonUnitResidue { p: i64, m: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown family {0}")]
    UnknownFamily(String),
    #[error("datum {0} is not one of the special families")]
    NotSpecial(String),
    #[error("classification undecided for {0}")]
    Unclassified(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("Ekedahl-Oort interpolation failed: {0}")]
    EoInterpolation(String),
    #[error("{0} is not unique")]
    NotUnique(&'static str),
    #[error("{0}")]
    Mass(String),
    #[error("QR family requires a prime m ≡ 3 mod 4, got {0}")]
    NotQrModulus(u32),
    #[error("residue {p} is not a quadratic non-residue mod {m}")]
    NotQnr { p: u32, m: u32 },
    #[error("golden data: {0}")]
    Golden(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}
