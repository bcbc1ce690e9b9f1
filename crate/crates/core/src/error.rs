use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("closure exceeds the cap of {cap} elements")]
    ClosureTooLarge { cap: usize },
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("value {value} is not within {tol} of an integer")]
    NotIntegral { value: f64, tol: f64 },
    #[error("chain broken at level {level} on generator {generator}")]
    ChainBroken { level: usize, generator: usize },
    #[error("not a group action: {0}")]
    NotAnAction(String),
    #[error("cannot induce: denominator {0:e} vanishes")]
    CannotInduce(f64),
    #[error("cross-check failed: {0}")]
    CrossCheckFailed(String),
    #[error("H does not normalize the fiber: {0}")]
    HNotNormalizing(String),
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("moment {0} mismatch")]
    MomentMismatch(usize),
    #[error("determinant bound violated: det {det} < bound {bound}")]
    BoundViolated { det: f64, bound: f64 },
    #[error("boundary maps do not compose to zero in degree {0}")]
    NotAComplex(usize),
    #[error("action is not free: {0}")]
    NotFree(String),
    #[error("character mismatch: {0}")]
    CharacterMismatch(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
