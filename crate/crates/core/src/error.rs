use thiserror::Error;

/// Errors raised by the laboratory. Variants are grouped so the CLI can map
/// them onto usage (exit 1) versus data (exit 2) failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid symbol: non-finite value at frequency ({k1}, {k2})")]
    InvalidSymbol { k1: i64, k2: i64 },

    #[error("symbol exceeds declared bound {bound} at argument {arg}")]
    SymbolBound { bound: f64, arg: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("resampling required: direction {0} is neither axis-aligned nor diagonal")]
    ResamplingRequired(String),

    #[error("overlapping arcs: {0}")]
    OverlappingArcs(String),

    #[error("size overflow: {0}")]
    SizeOverflow(String),

    #[error("misaligned raster: {0}")]
    MisalignedRaster(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero input: the witness field has zero norm")]
    ZeroInput,

    #[error("not a conical tree")]
    NotConical,

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
