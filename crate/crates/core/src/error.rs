use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems found while reading DIMACS CNF text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: missing `p cnf` header before clauses")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed header `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: invalid literal token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("line {line}: clause has {len} literals, expected 3")]
    ClauseLength { line: usize, len: usize },
    #[error("line {line}: variable {var} repeated within a clause")]
    RepeatedVariable { line: usize, var: u32 },
    #[error("line {line}: variable {var} out of range 1..={n}")]
    VariableOutOfRange { line: usize, var: u64, n: u32 },
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCount { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Dimacs(#[from] DimacsError),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("assignment has {got} bits but the instance has {expected} variables")]
    LengthMismatch { expected: u32, got: u32 },
    #[error("no single-solution instance found in {tries} tries")]
    Exhausted { tries: u64 },
    #[error("n = {n} exceeds the enumeration cap of {cap} variables")]
    EnumerationCap { n: u32, cap: u32 },
    #[error("n = {n} exceeds the dense oracle cap of {cap} variables")]
    OracleCap { n: u32, cap: u32 },
    #[error("interpolation time {0} outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("requested {requested} eigenvalues but only {available} are available")]
    TooManyEigenvalues { requested: usize, available: usize },
    #[error("secular root {index} could not be bracketed")]
    BracketFailure { index: usize },
    #[error("iteration did not converge: {0}")]
    NonConvergence(&'static str),
    #[error("gap is not unimodal: {} local minima at t = {:?}", .minima.len(), .minima.iter().map(|m| m.0).collect::<Vec<_>>())]
    NotUnimodal { minima: Vec<(f64, f64)> },
    #[error("d_0 = 0: unsatisfiable, gap formula inapplicable")]
    Unsatisfiable,
    #[error("parabolic model invalid: negative discriminant {0}")]
    ParabolaInvalid(f64),
}
