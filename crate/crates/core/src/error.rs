use thiserror::Error;

/// Errors raised across the fractional-dynamics toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("fractional order {0} outside the open interval (0, 1)")]
    InvalidOrder(f64),

    #[error("gamma function pole at z = {0}")]
    GammaPole(f64),

    #[error("gamma function overflows for z = {0} (threshold {1})")]
    GammaOverflow(f64, f64),

    #[error("argument {0} outside the Mittag-Leffler evaluation domain |z| <= {1}")]
    MittagLefflerDomain(f64, f64),

    #[error("Mittag-Leffler value overflows at z = {0}")]
    MittagLefflerOverflow(f64),

    #[error("integer derivative order {0} is not handled by the fractional grid operators")]
    IntegerOrder(f64),

    #[error("grid has {0} points, at least {1} required")]
    TooFewPoints(usize, usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {0} out of range for a {1}-dimensional grid")]
    AxisOutOfRange(usize, usize),

    #[error("negative exponent {exponent} of {var} cannot be differentiated by the power rule")]
    NegativeExponent { var: String, exponent: f64 },

    #[error("power rule hits a gamma pole for {var}^{exponent}")]
    PowerRulePole { var: String, exponent: f64 },

    #[error("no value assigned to variable {0}")]
    MissingVariable(String),

    #[error("negative base {base} for {var} under non-integer exponent {exponent}")]
    NegativeBase { var: String, base: f64, exponent: f64 },

    #[error("term singular at the origin: {var} = 0 with exponent {exponent}")]
    SingularAtOrigin { var: String, exponent: f64 },

    #[error("exponent {exponent} of {var} is not on the lattice k*alpha with k <= {k_max}")]
    NotOnLattice { var: String, exponent: f64, k_max: usize },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("step {step} (t = {t}): right-hand side is not finite")]
    NonFiniteRhs { step: usize, t: f64 },

    #[error("invalid solver setup: {0}")]
    InvalidSetup(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("Lagrangian depends on t; discounted derivation requires a time-free base")]
    TimeDependentBase,

    #[error("velocity Hessian g is singular at {0}")]
    SingularHessian(String),

    #[error("Legendre inversion failed: {0}")]
    Legendre(String),

    #[error("missing trajectory channel {0}")]
    MissingChannel(String),

    #[error("trajectory left the positive orthant at t = {t} ({detail})")]
    OrthantExit { t: f64, detail: String },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("homogeneity precondition unmet: {0}")]
    Homogeneity(String),

    #[error("regularity failure: {0}")]
    Regularity(String),
}

pub type Result<T> = std::result::Result<T, FracError>;
