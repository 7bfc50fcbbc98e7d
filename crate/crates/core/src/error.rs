use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("fractional order s = {0} must lie in (0, 1)")]
    Order(f64),

    #[error("node index {index} out of range for {n_nodes} nodes")]
    IndexOutOfRange { index: usize, n_nodes: usize },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "interior matrix (-Δ)^s + q is not positive definite; 0 may be a Dirichlet \
         eigenvalue of (-Δ)^s + q (solvability assumption violated)"
    )]
    NotCoercive,

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("adaptive quadrature did not converge: achieved error estimate {achieved:e} > {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("degenerate line search: {0}")]
    Step(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    /// True for failures of the linear solver (including ones wrapped with an
    /// iteration index).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NotCoercive | Error::Residual { .. } | Error::Step(_) => true,
            Error::AtIteration { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
