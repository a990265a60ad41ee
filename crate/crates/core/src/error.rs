use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("dangling reference: {kind} `{id}` does not exist")]
    DanglingReference { kind: &'static str, id: String },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("cell site `{0}` cannot reach any core cloud site")]
    Disconnected(String),

    #[error("topology generation: {0}")]
    Generation(String),

    #[error("`{field}` = {value} is out of range ({expected})")]
    Range {
        field: String,
        value: f64,
        expected: &'static str,
    },

    #[error("slice `{0}` has no admissible path")]
    NoAdmissiblePath(String),

    #[error("value {value} outside the piecewise cost domain [0, {max}]")]
    OutsideDomain { value: f64, max: f64 },

    #[error("binary variable `{name}` has fractional value {value}")]
    FractionalBinary { name: String, value: f64 },

    #[error("inconsistent assignment: {0}")]
    Inconsistent(String),

    #[error("malformed placement: {0}")]
    MalformedPlacement(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("name collision after mangling: `{0}`")]
    NameCollision(String),

    #[error("enumeration size {size} exceeds the guard of {cap}")]
    EnumerationTooLarge { size: f64, cap: u64 },

    #[error("{0}")]
    Parse(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
