use thiserror::Error;

use crate::expr::ExprError;
use crate::solver::Classification;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("singular Hessian (reciprocal condition number {rcond:.3e})")]
    SingularHessian { rcond: f64 },

    #[error("{what}: expected {expected} entries, got {got}")]
    Arity {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("force bundle has {forces} generators but the constraints need {required}")]
    DimensionMismatch { forces: usize, required: usize },

    #[error("force covector {0} has a non-zero dv component")]
    NonHorizontalForce(usize),

    #[error("operation requires Chetaev forces")]
    WrongForceMode,

    #[error("RK4 stage {stage} failed: {classification}")]
    StageFailure {
        stage: usize,
        classification: Classification,
    },

    #[error("state has non-finite entries")]
    NonFiniteState,

    #[error("velocity projection did not converge (residual {residual:.3e})")]
    ProjectionFailed { residual: f64 },

    #[error("constraints have rank-deficient velocity derivatives; cannot project")]
    NotProjectable,

    #[error("initial state is off the constraint set (max |psi| = {residual:.3e})")]
    OffConstraint { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("at t = {t}, state {state:?}: {source}")]
    AtTime {
        t: f64,
        state: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("scenario `{0}` has no closed-form solution")]
    NoClosedForm(String),

    #[error("line {line}: {message}")]
    Section { line: usize, message: String },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
