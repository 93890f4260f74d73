use crate::fxnum::QFormat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid fixed-point format: {0}")]
    InvalidFormat(String),

    #[error("cannot parse fixed-point format `{0}` (expected e.g. s3.12, s.15, u0.18)")]
    ParseFormat(String),

    #[error("code {code} does not fit in {fmt}")]
    OutOfRange { code: i128, fmt: QFormat },

    #[error("format mismatch: expected {expected}, found {found}")]
    FormatMismatch { expected: QFormat, found: QFormat },

    #[error("{0} is not a signed format")]
    RequiresSigned(QFormat),

    #[error("{0} is not an unsigned fractional-only format")]
    RequiresUnsignedFraction(QFormat),

    #[error("unsupported LUT group width {0} (expected 1, 2 or 4)")]
    GroupWidth(u32),

    #[error("value outside the operation's domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("LUT set does not match configuration: {0}")]
    LutMismatch(String),

    #[error("input format {0} is too wide for an exhaustive sweep (limit 24 bits)")]
    SweepTooWide(QFormat),

    #[error("Taylor series needs between 1 and {max} terms, got {got}")]
    TaylorTerms { got: usize, max: usize },

    #[error("invalid PWL table: {0}")]
    PwlTable(String),

    #[error("memh line {line}: {msg}")]
    Memh { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
