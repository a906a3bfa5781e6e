use thiserror::Error;

use crate::series::Monomial;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("auxiliary parameter declarations do not match")]
    AuxMismatch,
    #[error("at most {} auxiliary parameters are supported, got {0}", crate::coeff::MAX_AUX)]
    TooManyAux(usize),
    #[error("unknown auxiliary parameter `{0}`")]
    UnknownAux(String),
    #[error("coefficient is not an invertible pure-e unit")]
    NonInvertible,
    #[error("pole at e = 0")]
    PoleAtZero,
    #[error("precision exhausted (validity {validity}); raise the e-order")]
    ValidityExhausted { validity: i32 },
    #[error("dimension or order mismatch: {0}")]
    DimensionMismatch(String),
    #[error("at most {} variables are supported, got {0}", crate::series::MAX_VARS)]
    TooManyVariables(usize),
    #[error("diffeomorphism is not tangent to the identity")]
    NotIdentityTangent,
    #[error("field term has degree {0}; only degrees >= 2 are allowed")]
    LowDegree(usize),
    #[error("resonant terms obstruct the solve: {}", render_terms(.0))]
    Resonance(Vec<(Monomial, usize)>),
    #[error("input has a nonzero kernel component: {}", render_terms(.0))]
    KernelComponent(Vec<(Monomial, usize)>),
    #[error("invalid scheme: {}", .0.join("; "))]
    InvalidScheme(Vec<String>),
    #[error("input must be e-free")]
    NotEpsFree,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
}

fn render_terms(t: &[(Monomial, usize)]) -> String {
    let names = crate::series::default_names(crate::series::MAX_VARS);
    t.iter()
        .map(|(m, j)| crate::vfield::render_basis(m, *j, &names))
        .collect::<Vec<_>>()
        .join(", ")
}
