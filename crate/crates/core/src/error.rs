use thiserror::Error;

/// Errors surfaced by state construction, measure evaluation and campaign
/// configuration. Every invariant failure names the violated quantity so the
/// CLI can report it verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wrong dims: {0}")]
    WrongDims(String),

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("not Hermitian: max deviation {deviation:.3e} exceeds tolerance {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("non-PSD: eigenvalue {min_eigenvalue:.3e} below allowed floor")]
    NotPositive { min_eigenvalue: f64 },

    #[error("bad trace: got {trace:.12}, expected 1")]
    BadTrace { trace: f64 },

    #[error("state not normalized: norm {norm:.12}")]
    NotNormalized { norm: f64 },

    #[error("probabilities invalid: {0}")]
    BadProbabilities(String),

    #[error("Kraus set not trace-preserving: deviation {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    #[error("channel output leaves the Bloch ball: |r| = {norm:.12}")]
    NonPhysicalOutput { norm: f64 },

    #[error("vanishing filter normalization: trace {trace:.3e}")]
    VanishingNorm { trace: f64 },

    #[error("marginal is rank-deficient (pure partner state): no normal form")]
    RankDeficientMarginal,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
