use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-homogeneous input at line {line}: {message}")]
    NonHomogeneous { line: usize, message: String },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("relation {relation} does not map to zero")]
    RelationNotKilled { relation: usize },

    #[error("denominator cap exhausted at {max_cap} without stabilization")]
    CapExhausted { max_cap: u32 },

    #[error("sections over W disagree in degree {degree}: {u_side} from U, {v_side} from V")]
    GluingMismatch { degree: i64, u_side: usize, v_side: usize },

    #[error("generator degree {degree} lies outside the buffered range [{lo}, {hi}]")]
    BufferTooSmall { degree: i64, lo: i64, hi: i64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
