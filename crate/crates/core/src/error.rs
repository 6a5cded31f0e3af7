use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("a ring needs at least one site")]
    EmptyRing,
    #[error("unexpected character {found:?} at position {pos}; expected '0' or '1'")]
    BadCharacter { pos: usize, found: char },
    #[error("binary configuration is shorter than its 8-byte header")]
    Truncated,
    #[error("binary configuration declares {declared} sites but carries {bytes} payload bytes")]
    LengthMismatch { declared: usize, bytes: usize },
    #[error("padding bits in the last byte must be zero")]
    NonZeroPadding,
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("bad value for `{key}`: {value}")]
    BadValue { key: String, value: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("carrier capacity must be at least 1")]
    ZeroCapacity,
    #[error("initial load {load} exceeds carrier capacity {capacity}")]
    LoadOutOfRange { load: u32, capacity: u32 },
    #[error(
        "periodic carrier of capacity {capacity} has no unique fixed point \
         (ball density exactly 1/2 with a degenerate pass map)"
    )]
    CarrierNonConvergent { capacity: u32 },
    #[error("energy spectrum not saturated at K = {k}; raise the cap")]
    NonSaturatedSpectrum { k: usize },
    #[error("pseudoenergy of size {size} undefined (no soliton of that size or 2E >= L)")]
    UndefinedPseudoenergy { size: usize },
    #[error("capacity labels must be at least 1")]
    BadIndex,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("ball density {0} outside [0, 1/2)")]
    InvalidDensity(f64),
    #[error("temperatures (beta1 = {beta1}, beta_inf = {beta_inf}) imply a = {a}, outside (0, 1)")]
    InvalidTemperature { beta1: f64, beta_inf: f64, a: f64 },
    #[error("lattice length must be at least 1")]
    EmptyRing,
    #[error("Markov chain parameters must be positive")]
    BadChainParameters,
}
