use std::path::PathBuf;

use thiserror::Error;

use crate::mesh::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("mesh is not a closed, consistently oriented 2-manifold:\n{0}")]
    InvalidMesh(Box<ValidationReport>),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("configuration {config}: joint {joint} value {value} outside limits [{lower}, {upper}]")]
    JointLimit {
        config: usize,
        joint: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("configuration {config} has {got} joint values, robot has {expected} actuated joints")]
    DofMismatch {
        config: usize,
        got: usize,
        expected: usize,
    },

    #[error("invalid robot model: {0}")]
    InvalidRobot(String),

    #[error("B-spline normal matrix is rank deficient (m={m}, n={n}, degree={degree})")]
    RankDeficient { m: usize, n: usize, degree: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("triangle refinement hit its cap of {cap} triangles; residual max incircle radius {residual}")]
    RefinementCap { cap: usize, residual: f64 },

    #[error("could not find an interior point for mesh with {triangles} triangles")]
    InteriorPoint { triangles: usize },

    #[error("voxel grids differ in origin, resolution or dimensions")]
    GridMismatch,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.into(),
        }
    }
}
