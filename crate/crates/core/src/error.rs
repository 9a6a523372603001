//! Error type shared by every module of the crate.

use thiserror::Error;

/// Where on an element an inadmissible state was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLocation {
    Volume,
    Facet(usize),
}

impl std::fmt::Display for NodeLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeLocation::Volume => write!(f, "volume"),
            NodeLocation::Facet(z) => write!(f, "facet {z}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Jacobi weight exponents a={a}, b={b} (both must exceed -1)")]
    InvalidJacobiWeight { a: f64, b: f64 },

    #[error("root finder did not converge for {family} rule of index {q}")]
    QuadratureConvergence { family: &'static str, q: usize },

    #[error("Gauss-Lobatto rule requires q >= 1")]
    LobattoDegree,

    #[error("node set contains duplicate nodes ({0} and {1})")]
    DuplicateNodes(usize, usize),

    #[error("invalid degree: {0}")]
    InvalidDegree(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {0:?} lies outside the reference simplex")]
    OutsideSimplex(Vec<f64>),

    #[error("non-positive Jacobian {value:e} on element {element}")]
    NonPositiveJacobian { element: usize, value: f64 },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("connectivity failure between element {element} facet {facet}: {reason}")]
    Connectivity {
        element: usize,
        facet: usize,
        reason: String,
    },

    #[error("inadmissible state ({what}) on element {element}, {location} node {node}")]
    Inadmissible {
        element: usize,
        location: NodeLocation,
        node: usize,
        what: &'static str,
    },

    #[error("inadmissible state: {0}")]
    InadmissibleState(&'static str),

    #[error("time step underflow at t = {t} (dt = {dt:e})")]
    StepSizeUnderflow { t: f64, dt: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("problem {0} has no exact solution")]
    NoExactSolution(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the numerical state leaving the admissible set.
    pub fn is_admissibility(&self) -> bool {
        matches!(self, Error::Inadmissible { .. } | Error::InadmissibleState(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
