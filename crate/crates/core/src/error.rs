use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tail certificate cannot bound the weighted tail")]
    TailUnbounded,
    #[error("sampled symbol read at index {index} beyond {len} stored values")]
    OutOfSampledRange { index: usize, len: usize },
    #[error("symbol is not a member of the space (grade {grade} diverges or is unbounded)")]
    NotMember { grade: u32 },
    #[error("dual certificate violated at n = {n}")]
    DualMembershipViolated { n: usize },
    #[error("hypothesis not met: {0}")]
    HypothesisUnmet(String),
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
    #[error("pole on or near the contour |z| = {radius}")]
    PoleOnContour { radius: f64 },
    #[error("certificate fit failed: {0}")]
    CertificateFitFailed(String),
    #[error("verdict carries no replayable justification")]
    NonReplayable,
    #[error("unknown verification suite `{0}` (expected inequalities, identities, classifiers, laurent or all)")]
    UnknownSuite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
