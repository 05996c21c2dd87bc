use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grade overflow: {0} + {1} > 8")]
    GradeOverflow(usize, usize),

    #[error("grade mismatch: expected {expected}, got {got}")]
    GradeMismatch { expected: usize, got: usize },

    #[error("invalid grade {0} (must be 0..=8)")]
    InvalidGrade(usize),

    #[error("coefficient vector has length {got}, expected C(8, {grade}) = {expected}")]
    CoefficientLength {
        grade: usize,
        expected: usize,
        got: usize,
    },

    #[error("invalid multi-index {0:?}: {1}")]
    InvalidIndex(Vec<usize>, &'static str),

    #[error("linear map is singular (|det| = {0:e})")]
    SingularMap(f64),

    #[error("operator is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("input is not a Spin(7) 4-form: spectrum has {clusters} eigenvalue cluster(s), expected 2")]
    NotSpin7 { clusters: usize },

    #[error("form is not of pure type (0,2): residual {0:e}")]
    NotZeroTwo(f64),

    #[error("matrix for component {0} is not skew-Hermitian")]
    NotSkewHermitian(usize),

    #[error("inconsistent characteristic numbers: {0}")]
    InconsistentCharacteristicNumbers(String),

    #[error("invalid gluing parameters: {0}")]
    InvalidGluingParams(String),

    #[error("radius {rho} outside [{lo}, {hi}]")]
    RadiusOutOfRange { rho: f64, lo: f64, hi: f64 },

    #[error("non-integrable profile on [{lo:e}, {hi:e}]: {detail}")]
    NonIntegrable { lo: f64, hi: f64, detail: String },

    #[error("degenerate fit grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("field dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite energy encountered at step {0}")]
    NonFiniteEnergy(usize),

    #[error("linearization not surjective on this background (kernel dimension {kernel} > {expected})")]
    NotSurjective { kernel: usize, expected: usize },

    #[error("invalid field file: {0}")]
    FieldFormat(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
