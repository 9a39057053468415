use thiserror::Error;

/// Crate-wide error type. Numerical aborts carry enough state to report the
/// last trustworthy time of a run.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be between 1 and 4, got {0}")]
    BadDimension(usize),

    #[error("points_per_axis must be a power of two >= 8, got {0}")]
    BadGridSize(usize),

    #[error(
        "box_length must be >= 2π so the frequency spacing 2π/L does not exceed 1 \
         (unit frequency cubes must be resolved), got {0}"
    )]
    BoxTooSmall(f64),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field is in the {found:?} representation, expected {expected:?}")]
    WrongRepresentation {
        expected: crate::field::Representation,
        found: crate::field::Representation,
    },

    #[error("window dilation must be positive and finite, got {0}")]
    BadDilation(f64),

    #[error(
        "grid frequency spacing {spacing} exceeds the window dilation {mu}; \
         each dilated cube must contain a lattice node"
    )]
    CubesUnresolved { spacing: f64, mu: f64 },

    #[error("{0}")]
    BadNormParameter(String),

    #[error("homogeneous Sobolev norm with s < 0 requires a mean-zero field")]
    NonzeroMean,

    #[error("scale factor must be a (possibly negative) power of two, got {0}")]
    NotDyadic(f64),

    #[error("time step and horizon must be positive finite, got dt={dt}, t_end={t_end}")]
    BadTimeGrid { dt: f64, t_end: f64 },

    #[error("solution lost finiteness; last good time {last_good_time}")]
    NumericalBlowup { last_good_time: f64 },

    #[error("{0}")]
    BadStepFunction(String),

    #[error("{0}")]
    BadAtomicRep(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("snapshot i/o: {0}")]
    SnapshotIo(#[from] std::io::Error),

    #[error("snapshot format: {0}")]
    SnapshotFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
