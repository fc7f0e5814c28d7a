use thiserror::Error;

/// Errors raised by constructors and operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("entry {index} is not a probability: {value}")]
    InvalidEntry { index: usize, value: String },

    #[error("not stochastic: {what} sums to {sum}")]
    NotStochastic { what: String, sum: String },

    #[error("alphabet mismatch: {left:?} vs {right:?}")]
    AlphabetMismatch { left: Vec<String>, right: Vec<String> },

    #[error("cannot compose: output alphabet {produced:?} differs from expected input {expected:?}")]
    Composition {
        produced: Vec<String>,
        expected: Vec<String>,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("alphabet {0:?} is not a product alphabet")]
    NotProduct(Vec<String>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{family} is not supported by the {backend} backend")]
    Unsupported { family: String, backend: &'static str },

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("label {0:?} does not belong to the space")]
    DanglingLabel(String),

    #[error("map is not a morphism of divergence spaces: {0}")]
    NotMorphism(String),

    #[error("cannot curry: slice at {0:?} is not a morphism")]
    Curry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
