use thiserror::Error;

/// Errors produced by the numerical kernels, the soliton lattice and the verifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invariants must be finite (g2 = {g2}, g3 = {g3})")]
    NonFiniteInvariants { g2: f64, g3: f64 },

    #[error("roots do not sum to zero (|e1 + e2 + e3| = {sum})")]
    RootSumNonzero { sum: f64 },

    #[error("roots do not form a real cubic (imaginary residue {imag})")]
    NonRealCubic { imag: f64 },

    #[error("x = {x} lies within the pole-exclusion radius")]
    PoleProximity { x: f64 },

    #[error("|x| = {x} exceeds the supported argument range {max}")]
    ArgumentOutOfRange { x: f64, max: f64 },

    #[error("no convergence: {what}")]
    ConvergenceFailure { what: String },

    #[error("cubic has complex roots (discriminant {discriminant}); the Jacobi bridge needs three real roots")]
    NonPositiveDiscriminant { discriminant: f64 },

    #[error("all three roots coincide; the modulus is undefined")]
    DegenerateRoots,

    #[error("Möbius coefficients are singular (determinant {det})")]
    SingularMobius { det: f64 },

    #[error("spectral parameters {i} and {j} (delta = {delta_i}, {delta_j}) give coinciding lambda^2")]
    DegenerateDeltas {
        i: usize,
        j: usize,
        delta_i: f64,
        delta_j: f64,
    },

    #[error("local expansion at x = {x} lost too many terms to cancellation")]
    PrecisionLoss { x: f64 },

    #[error("every grid point was masked")]
    EmptyGrid,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
