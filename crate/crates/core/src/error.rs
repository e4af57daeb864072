use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("variable x{0} appears in more than one leaf")]
    NotReadOnce(usize),

    #[error("variable x{var} is out of range for a circuit on {n} inputs")]
    VariableOutOfRange { var: usize, n: usize },

    #[error("and/or gate without inputs")]
    EmptyGate,

    #[error("input has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{what} = {value} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("branching program carries no construction metadata")]
    MissingMetadata,

    #[error("branching programs have widths {0} and {1}")]
    WidthMismatch(usize, usize),

    #[error("variable x{0} is read by both branching programs")]
    VariableOverlap(usize),

    #[error("sandwich violated at input {input}: lower={lower}, f={value}, upper={upper}")]
    SandwichViolation {
        input: String,
        lower: bool,
        value: bool,
        upper: bool,
    },

    #[error("gap routes disagree: signed={signed}, measure={measure}, spectral={spectral:?}")]
    RouteMismatch {
        signed: f64,
        measure: f64,
        spectral: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedChar(char),
    UnknownOperator,
    EmptyGate,
    NotArity,
    BadVariable,
    DuplicateVariable(usize),
    TrailingInput,
}

/// A DSL syntax or read-once error, with the byte offset where it was found.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input")?,
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}")?,
            ParseErrorKind::UnknownOperator => write!(f, "unknown operator")?,
            ParseErrorKind::EmptyGate => write!(f, "gate without inputs")?,
            ParseErrorKind::NotArity => write!(f, "`not` takes exactly one argument")?,
            ParseErrorKind::BadVariable => write!(f, "malformed variable")?,
            ParseErrorKind::DuplicateVariable(v) => {
                write!(f, "variable x{v} used twice (formula is not read-once)")?
            }
            ParseErrorKind::TrailingInput => write!(f, "trailing input after expression")?,
        }
        write!(f, " at byte {}", self.position)
    }
}
