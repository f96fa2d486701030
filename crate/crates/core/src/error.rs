use thiserror::Error;

use crate::reeb::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("derivative of order {order} is not defined at θ={theta}")]
    UnsupportedDerivative { order: u32, theta: f64 },
    #[error("function is not simple Morse: {0}")]
    NotSimpleMorse(String),
    #[error("cannot combine a trigonometric polynomial with a piecewise-linear function")]
    MixedRepresentation,
    #[error("no simple Morse function found after {attempts} draws")]
    RejectionBudgetExceeded { attempts: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("unknown vertex id={0}")]
    UnknownVertex(VertexId),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EditError {
    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),
    #[error("unknown vertex id={0}")]
    UnknownVertexId(VertexId),
    #[error("death needs at least four vertices")]
    DeathOnTwoVertexGraph,
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<EditError>,
    },
}

impl From<GraphError> for EditError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::UnknownVertex(id) => EditError::UnknownVertexId(id),
            GraphError::InvalidGraph(m) => EditError::InvalidDeformation(m),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("search budget of {max_ops} expansions exceeded")]
    BudgetExceeded { max_ops: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("resolution {resolution} is too low; need at least {required}")]
    ResolutionTooLow { resolution: usize, required: usize },
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomotopyError {
    #[error("path is not generic: {0}")]
    NonGeneric(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("replayed script does not reach the target: {0}")]
    ReplayMismatch(String),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Any error produced by this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
}
