use thiserror::Error;

#[derive(Debug, Error)]
pub enum EymError {
    #[error("unsupported chart: {0}")]
    UnsupportedChart(String),
    #[error("singular metric at sample {index} (|det| = {det:.3e})")]
    SingularMetric { index: usize, det: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("lie algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("form degree out of range: {0}")]
    DegreeOutOfRange(String),
    #[error("weight {weight} outside non-indicial interval ({lo}, {hi})")]
    WeightOutOfRange { weight: f64, lo: f64, hi: f64 },
    #[error("degenerate indicial gap: {0}")]
    DegenerateGap(String),
    #[error("indicial root on the critical line: {0}")]
    NoGap(String),
    #[error("indicial fit residual {residual:.3e} above tolerance {tol:.3e}")]
    NotUniformlyDegenerate { residual: f64, tol: f64 },
    #[error("linear solver failed: {0}")]
    LinearSolve(String),
    #[error("Newton iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("degenerate test field: {0}")]
    DegenerateField(String),
    #[error("indeterminate decay exponent: {0}")]
    IndeterminateExponent(String),
    #[error("unsupported linearization mode: {0}")]
    UnsupportedMode(String),
    #[error("random field generation failed: {0}")]
    Generation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, EymError>;
