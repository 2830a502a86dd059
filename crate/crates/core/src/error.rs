use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid equation parameters: {0}")]
    InvalidParameters(String),
    #[error("inadmissible parameters: {failed}")]
    InadmissibleParameters { failed: String },
    #[error("missing homogeneous exponent for {class} in dimension {n}")]
    MissingHomogeneousExponent { class: String, n: usize },

    #[error("cylinder radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("invalid cylinder time exponent {0} (must be >= 1)")]
    InvalidTheta(f64),
    #[error("cylinder leaves the field domain: {0}")]
    CylinderOutsideDomain(String),
    #[error("region leaves the field domain: {0}")]
    RegionOutsideDomain(String),
    #[error("invalid scale parameter: {0}")]
    InvalidScaleParameter(String),
    #[error("scaled domain escapes the source field: {0}")]
    ScaledDomainEscapes(String),
    #[error("unsupported scaling kind: {0}")]
    UnsupportedKind(String),
    #[error("smallness search failed after {iterations} bisection steps")]
    SmallnessSearchFailed { iterations: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expression not finite at x = {x:?}, t = {t}")]
    EvaluationFailure { x: Vec<f64>, t: f64 },
    #[error("point x = {x:?}, t = {t} outside the grid")]
    OutOfDomain { x: Vec<f64>, t: f64 },
    #[error("region does not intersect any grid cell")]
    EmptyIntersection,
    #[error("field data error: {0}")]
    FieldData(String),

    #[error("solver blew up at step {step} (t = {t})")]
    BlowUp { step: usize, t: f64 },
    #[error("solver exceeded max_steps = {max_steps}")]
    UnstableConfig { max_steps: usize },
    #[error("reference solution evaluated outside its validity window: {0}")]
    OutsideValidity(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("level {level} of the ladder is smaller than one grid cell")]
    DegenerateLevel { level: usize },
    #[error("not enough levels to fit: have {have}, need {need}")]
    InsufficientLevels { have: usize, need: usize },
    #[error("all levels in the fit window are zero; exponent undefined")]
    AllZeroLevels,
    #[error("precondition |u(center)| <= (1/4) r^gamma fails at every level")]
    PreconditionNeverHolds,
    #[error("cutoff is not compactly supported in the region (max boundary value {0:e})")]
    CutoffNotCompact(f64),

    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("io failure: {0}")]
    IoFailure(String),
}

impl Error {
    /// True for errors that stem from user configuration rather than a failed computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigInvalid(_)
                | Error::InvalidParameters(_)
                | Error::InadmissibleParameters { .. }
                | Error::MissingHomogeneousExponent { .. }
                | Error::InvalidGrid(_)
                | Error::InvalidScaleParameter(_)
                | Error::InvalidTheta(_)
                | Error::NonPositiveRadius(_)
                | Error::UnsupportedKind(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
