use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// `(K, alpha, f)` violates `1 <= alpha <= K <= 20`, `f >= 1`.
    InvalidStructure { k: u32, alpha: u32, f: u32 },
    /// A numeric parameter is outside the range an operation accepts.
    OutOfRange { what: &'static str, value: i64, min: i64, max: i64 },
    UserOutOfRange { user: u32, k: u32 },
    /// Demand vectors do not have length `K`, or a class has the wrong size.
    ShapeMismatch,
    /// Some user requests a class it does not belong to, or a bad file index.
    InvalidDemand,
    /// Enumeration would exceed the configured cap.
    CapExceeded { required: u128, cap: u64 },
    /// Exact arithmetic does not fit in 64 bits.
    Overflow,
    ZeroDenominator,
    /// The operation is defined only for a specific structure / parameter.
    Unsupported(&'static str),
    NotCircular,
    NotAlphaDemand,
    /// A subfile does not exist under the placement it is used with.
    ForeignSubfile,
    NotAPermutation,
    /// An XOR message is empty or names a subfile twice.
    MalformedMessage,
    /// A vertex set claimed to be acyclic contains a directed cycle.
    NotAcyclic,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidStructure { k, alpha, f: files } => write!(
                f,
                "invalid FDS structure (K={k}, alpha={alpha}, f={files}): need 1 <= alpha <= K <= 20 and f >= 1"
            ),
            Error::OutOfRange { what, value, min, max } => {
                write!(f, "{what} = {value} outside [{min}, {max}]")
            }
            Error::UserOutOfRange { user, k } => write!(f, "user {user} outside [1, {k}]"),
            Error::ShapeMismatch => f.write_str("demand shape does not match the structure"),
            Error::InvalidDemand => f.write_str("demand is not valid (some user k has k not in D_k)"),
            Error::CapExceeded { required, cap } => {
                write!(f, "enumeration needs {required} items, cap is {cap}")
            }
            Error::Overflow => f.write_str("exact arithmetic overflow"),
            Error::ZeroDenominator => f.write_str("zero denominator"),
            Error::Unsupported(why) => write!(f, "unsupported: {why}"),
            Error::NotCircular => f.write_str("demand is not circular for the given ordering"),
            Error::NotAlphaDemand => f.write_str("demand is not an alpha-demand"),
            Error::ForeignSubfile => f.write_str("subfile does not belong to this placement"),
            Error::MalformedMessage => f.write_str("XOR message is empty or repeats a subfile"),
            Error::NotAPermutation => f.write_str("vector is not a permutation of the users"),
            Error::NotAcyclic => f.write_str("vertex set contains a directed cycle"),
        }
    }
}

impl core::error::Error for Error {}
