use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("problem too large: {0}")]
    SizeLimit(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("mode basis captures only {capture:.4} of the incident power at a step (threshold {threshold})")]
    Convergence { capture: f64, threshold: f64 },

    #[error("non-adjacent mode pair ({0}, {1}); MZIs act on neighbouring modes only")]
    NonAdjacentPair(usize, usize),

    #[error("photon number mismatch: input has {input}, output has {output}")]
    PhotonNumberMismatch { input: usize, output: usize },

    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
