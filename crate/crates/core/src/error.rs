use std::path::PathBuf;

/// Errors surfaced by the constructions and their verifiers.
///
/// Failure messages name the premise or tolerance that did not hold so
/// reports can be read without the source at hand.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two")]
    GridNotPowerOfTwo(usize),

    #[error("degree {degree} exceeds the Nyquist bound of a {grid}-point grid (need grid >= {needed})")]
    NyquistBound {
        degree: usize,
        grid: usize,
        needed: usize,
    },

    #[error("weight sequence `{name}` has a non-positive or non-finite value {value} at index {index}")]
    InvalidWeight {
        name: String,
        index: usize,
        value: f64,
    },

    #[error("weight table `{name}` has no entry for index {index}")]
    WeightOutOfRange { name: String, index: usize },

    #[error(
        "divergence premise (sum of 1/lambda_n = infinity) failed: partial sum {partial_sum} \
         over [{from}, {cap}] never reached {target}"
    )]
    DivergencePremise {
        from: usize,
        cap: usize,
        target: f64,
        partial_sum: f64,
    },

    #[error(
        "unboundedness premise (lambda_n increases to infinity) failed: lambda never reached {threshold} \
         on [{from}, {cap}] while selecting gap {index}"
    )]
    UnboundedPremise {
        index: usize,
        from: usize,
        cap: usize,
        threshold: f64,
    },

    #[error("polynomial growth premise failed: no exponent M <= {max_m} makes (1+n)^-M lambda_n non-increasing up to {cap}")]
    SuperPolynomialGrowth { max_m: u32, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("building block rejected (eta={eta}, M={m}, S={s}): {reason}")]
    BlockRejected {
        eta: f64,
        m: u32,
        s: u32,
        reason: String,
    },

    #[error("localizer construction failed for eps={epsilon}: {reason}")]
    LocalizerFailed { epsilon: f64, reason: String },

    #[error("deletion step {step}: epsilon search exhausted after {halvings} halvings (last charge {charge} > allowance {allowance})")]
    EpsilonSearchExhausted {
        step: usize,
        halvings: usize,
        charge: f64,
        allowance: f64,
    },

    #[error("range invariant 0 <= f <= 2 violated: grid value {value} exceeds {limit}")]
    RangeViolation { value: f64, limit: f64 },

    #[error("compact sets must be non-empty")]
    EmptySet,

    #[error("Phi evaluated below 1e-300 at stage {stage} (argument {argument}); refusing to treat it as zero")]
    PhiUnderflow { stage: usize, argument: f64 },

    #[error("representation count for |Gamma| = {size} exceeds the enumeration cap of {cap}")]
    EnumerationCap { size: usize, cap: usize },

    #[error("block Fourier supports overlap at index {0}")]
    BlockOverlap(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
