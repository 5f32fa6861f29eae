use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance table has {rows} rows (row {bad_row} has {bad_len} entries) for {points} points")]
    DimensionMismatch {
        points: usize,
        rows: usize,
        bad_row: usize,
        bad_len: usize,
    },
    #[error("space has no points")]
    EmptySpace,
    #[error("space has a single point; nothing to embed beyond the basepoint")]
    SinglePoint,
    #[error("basepoint index {0} out of range")]
    BadBasepoint(usize),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("duplicate point name `{0}`")]
    DuplicatePoint(String),
    #[error("graph is disconnected: `{0}` is unreachable from the basepoint")]
    Disconnected(String),
    #[error("edge {u}-{v} has nonpositive weight {weight}")]
    NonPositiveWeight { u: String, v: String, weight: String },
    #[error("not a metric: {0}")]
    NotAMetric(String),
    #[error("point `{point}` is not in ball B_{shell}")]
    NotInBall { point: String, shell: usize },
    #[error("point `{point}` has norm {norm} < 1; rescale the space first")]
    BelowUnitGap { point: String, norm: String },
    #[error("no block operator for shell {0}")]
    MissingOperator(usize),
    #[error("operator for shell {shell} acts on dimension {got}, ball has {expected} points")]
    OperatorDimension {
        shell: usize,
        expected: usize,
        got: usize,
    },
    #[error("could not certify a random operator for shell {shell} after {attempts} attempts (condition numbers tried: {conditions:?})")]
    OperatorCertification {
        shell: usize,
        attempts: usize,
        conditions: Vec<f64>,
    },
    #[error("block {0}: operands are indexed over different balls")]
    IndexingMismatch(usize),
    #[error("amalgam needs at least one part")]
    EmptyAmalgam,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
