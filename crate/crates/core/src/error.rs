use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("face {face}: vertex {vertex} is {distance:.3e} off the face plane")]
    NonPlanarFace {
        face: usize,
        vertex: usize,
        distance: f64,
    },

    #[error("vertex {vertex} lies {distance:.3e} outside the plane of face {face}")]
    NotConvex {
        face: usize,
        vertex: usize,
        distance: f64,
    },

    #[error("face {face} is degenerate (area {area:.3e})")]
    DegenerateFace { face: usize, area: f64 },

    #[error("faces do not close the surface (|sum A nu| = {imbalance:.3e})")]
    OpenSurface { imbalance: f64 },

    #[error("half-space normals do not positively span R^3; the intersection is unbounded")]
    Unbounded,

    #[error("offset {offset} of plane {index} is not positive; origin is not interior")]
    EmptyInterior { index: usize, offset: f64 },

    #[error("expected {expected} far-field samples, got {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("far field has (numerically) zero norm")]
    ZeroField,

    #[error("peak direction coincides with the incident direction")]
    DegenerateDirection,

    #[error("recovered normal is grazing (|d.nu| = {0:.3e}); area undefined")]
    GrazingNormal(f64),

    #[error("normals do not span R^3")]
    SpanDeficient,

    #[error("point set is degenerate (coplanar or collinear)")]
    DegeneratePointSet,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

/// Tags an error with the pipeline stage it came from.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| Error::Stage {
            stage,
            source: Box::new(source),
        })
    }
}
