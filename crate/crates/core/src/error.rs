use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("coefficient index {0} is odd; Q is pi-periodic so only even indices are allowed")]
    OddIndex(i64),
    #[error("non-finite coefficient at index {0}")]
    NonFinite(i64),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("truncation K = {0} is too small (need K >= 4)")]
    TruncationTooSmall(usize),
    #[error("lambda = {0} lies on the free spectrum")]
    OnSpectrumOfFree(String),
    #[error("resolvent is near singular (condition estimate {0:.3e})")]
    NearSingular(f64),
    #[error("complementary block is singular at n = {n}, z = {z}")]
    ComplementSingular { n: i64, z: String },
    #[error("mode {0} is outside the truncation window")]
    ModeOutsideWindow(i64),
    #[error("eigensolver failed: {0}")]
    EigensolveFailure(String),
    #[error("discs overlap at n = {n} (r_n = {radius})")]
    OverlappingDiscs { n: i64, radius: f64 },
    #[error("disc D_{n} holds {found} eigenvalues of {bc}, expected {expected}")]
    CountMismatch { n: i64, bc: String, found: usize, expected: usize },
    #[error("an eigenvalue lies within {distance:.3e} of the contour around n = {n}")]
    EnclosureViolation { n: i64, distance: f64 },
    #[error("contour quadrature did not converge (last change {0:.3e})")]
    NotConverged(f64),
    #[error("degenerate invariant pair at n = {0}")]
    DegeneratePair(i64),
    #[error("Neumann-matched vector vanishes at n = {0}")]
    NullMatch(i64),
    #[error("vectors come from incompatible truncations: {0}")]
    FrameMismatch(String),
    #[error("integration produced a non-finite value at lambda = {0}")]
    StepFailure(String),
    #[error("argument principle counted {counted} roots but {found} were located")]
    RootCountUnstable { counted: usize, found: usize },
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OddIndex(_) => "OddIndex",
            Error::NonFinite(_) => "NonFinite",
            Error::BadParam(_) => "BadParam",
            Error::TruncationTooSmall(_) => "TruncationTooSmall",
            Error::OnSpectrumOfFree(_) => "OnSpectrumOfFree",
            Error::NearSingular(_) => "NearSingular",
            Error::ComplementSingular { .. } => "ComplementSingular",
            Error::ModeOutsideWindow(_) => "ModeOutsideWindow",
            Error::EigensolveFailure(_) => "EigensolveFailure",
            Error::OverlappingDiscs { .. } => "OverlappingDiscs",
            Error::CountMismatch { .. } => "CountMismatch",
            Error::EnclosureViolation { .. } => "EnclosureViolation",
            Error::NotConverged(_) => "NotConverged",
            Error::DegeneratePair(_) => "DegeneratePair",
            Error::NullMatch(_) => "NullMatch",
            Error::FrameMismatch(_) => "FrameMismatch",
            Error::StepFailure(_) => "StepFailure",
            Error::RootCountUnstable { .. } => "RootCountUnstable",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }

    /// Errors caused by the caller's input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::OddIndex(_)
                | Error::NonFinite(_)
                | Error::BadParam(_)
                | Error::TruncationTooSmall(_)
                | Error::ModeOutsideWindow(_)
                | Error::OverlappingDiscs { .. }
                | Error::Config(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
