use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("kind mismatch: {left} vs {right}")]
    KindMismatch {
        left: &'static str,
        right: &'static str,
    },

    #[error(
        "coordinate {axis} endpoint {value} of box {index} is not on a grid line (h = {width})"
    )]
    OffGrid {
        index: usize,
        axis: usize,
        value: f64,
        width: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contraction index {p} out of range for orders {left} and {right}")]
    ContractionRange { p: usize, left: usize, right: usize },

    #[error(
        "tensor of order {order} on {cells} cells needs {entries} entries, above the limit of {limit}"
    )]
    TooLarge {
        order: usize,
        cells: usize,
        entries: u128,
        limit: usize,
    },

    #[error("order {order} exceeds the permutation cap {cap}")]
    PermutationCap { order: usize, cap: usize },

    #[error("kernel is not fully symmetric (asymmetry {asymmetry:e}); {hint}")]
    NotSymmetric { asymmetry: f64, hint: &'static str },

    #[error("kernel is not mirror-symmetric (asymmetry {asymmetry:e})")]
    NotMirrorSymmetric { asymmetry: f64 },

    #[error("shift by {offset} cells leaves the grid; a horizon of at least {required_horizon} is needed")]
    ShiftOverflow { offset: i64, required_horizon: f64 },

    #[error("{0} exceeds the enumeration guard")]
    EnumerationGuard(String),

    #[error("empty sequence")]
    EmptySequence,
}
