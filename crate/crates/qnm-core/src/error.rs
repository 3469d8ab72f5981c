use core::fmt;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EvaluationAtMaterialPole,
    Overflow,
    NoConvergence { iterations: usize },
    RootAtMaterialPole,
    RegularizationAngleTooSmall { tan_theta: f64, required: f64 },
    TailNotConverged,
    SourceOnNodalPoint,
    InvalidBackground,
    OutsideCompletenessRegion,
    GridTooCoarse,
    GridMismatch,
    DefectiveMatrix,
    SingularAtEigenvalue,
    DimensionTooLarge { dim: usize },
    InvalidInput(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Short stable name, used in manifests.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EvaluationAtMaterialPole => "EvaluationAtMaterialPole",
            Error::Overflow => "Overflow",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::RootAtMaterialPole => "RootAtMaterialPole",
            Error::RegularizationAngleTooSmall { .. } => "RegularizationAngleTooSmall",
            Error::TailNotConverged => "TailNotConverged",
            Error::SourceOnNodalPoint => "SourceOnNodalPoint",
            Error::InvalidBackground => "InvalidBackground",
            Error::OutsideCompletenessRegion => "OutsideCompletenessRegion",
            Error::GridTooCoarse => "GridTooCoarse",
            Error::GridMismatch => "GridMismatch",
            Error::DefectiveMatrix => "DefectiveMatrix",
            Error::SingularAtEigenvalue => "SingularAtEigenvalue",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NoConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
            Error::RegularizationAngleTooSmall { tan_theta, required } => write!(
                f,
                "stretch angle too small: tan(theta) = {tan_theta} but the mode needs > {required}"
            ),
            Error::DimensionTooLarge { dim } => {
                write!(f, "matrix dimension {dim} exceeds the dense limit")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            other => f.write_str(other.name()),
        }
    }
}

impl core::error::Error for Error {}
