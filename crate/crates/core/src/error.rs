use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field width {0} is outside 1..=8")]
    WidthOutOfRange(u32),
    #[error("polynomial {poly:#x} does not have degree {w}")]
    PolynomialDegree { w: u32, poly: u16 },
    #[error("polynomial {0:#x} is reducible over GF(2)")]
    ReduciblePolynomial(u16),
    #[error("field order {0} is not a power of two")]
    UnsupportedOrder(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operand lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("operand has length zero")]
    LengthZero,
    #[error("share count {0} is not supported here")]
    ShareCount(usize),
    #[error("bad shape: {0}")]
    Shape(String),
    #[error("value {value} is not an element of GF({q})")]
    NotInField { value: u32, q: u32 },
    #[error("unknown gadget `{0}`")]
    UnknownGadget(String),
    #[error("gadget `{0}` does not support this operation")]
    UnsupportedGadget(String),
    #[error("enumeration of {0} executions exceeds the 2^28 limit")]
    EnumerationTooLarge(u128),
    #[error("unknown parameter set `{0}`")]
    UnknownParamSet(String),
}

pub type Result<T> = std::result::Result<T, Error>;
