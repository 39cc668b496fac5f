use thiserror::Error;

/// Errors raised by the congruence-speed library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("valuation undefined for zero")]
    ZeroValuation,

    #[error("valuation is only supported for the primes 2 and 5, got {0}")]
    UnsupportedPrime(u32),

    #[error("digit length undefined for zero")]
    ZeroDigitLength,

    #[error("modulus {0} is not of the form 2^i * 5^j")]
    NotDecimalModulus(String),

    #[error("undefined congruence speed: base {0} is a multiple of 10")]
    MultipleOfTen(String),

    #[error("base must be at least 1")]
    ZeroBase,

    #[error("exact tower too large (more than {cap} digits)")]
    ExactTowerTooLarge { cap: u64 },

    #[error("precision exhausted at {digits} digits; increase N")]
    PrecisionExhausted { digits: u64 },

    #[error("height must be at least {min}, got {got}")]
    HeightTooSmall { min: u64, got: u64 },

    #[error("root index {0} out of range 1..=13")]
    RootIndex(u32),

    #[error("residue class {0} out of range 1..=9")]
    ResidueClass(u32),

    #[error("use v1_residues for n = 1 (class specs start at n = 2, got n = {0})")]
    SpeedBelowTwo(u64),

    #[error("lambda correction is only defined for classes 2 and 8, got {0}")]
    LambdaClass(u32),

    #[error("candidate budget of {budget} exhausted while searching n = {n}; resume after {last}")]
    BudgetExhausted { n: u64, budget: u64, last: String },

    #[error("invalid decimal integer: {0:?}")]
    Parse(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error("fixture {name} failed: expected {expected}, got {actual}")]
    FixtureMismatch { name: String, expected: String, actual: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
