use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An exhaustive or structural computation would exceed its size cap.
    CapExceeded {
        what: &'static str,
        requested: u64,
        cap: u64,
    },
    /// A vertex of the source complex has no image under a vertex map.
    MapIncomplete { name: u32 },
    InvalidSimplex(String),
    InvalidConfiguration(String),
    InvalidRealization(String),
    InvalidPorts(String),
    /// The adversarial port formula failed its bijectivity or symmetry check.
    InvalidConstruction { n: usize, g: usize, reason: String },
    InvalidArity { n: usize, m: usize },
    InvalidTask(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CapExceeded {
                what,
                requested,
                cap,
            } => write!(f, "{what}: {requested} exceeds cap {cap}"),
            Error::MapIncomplete { name } => {
                write!(f, "vertex map has no image for a vertex named {name}")
            }
            Error::InvalidSimplex(msg) => write!(f, "invalid simplex: {msg}"),
            Error::InvalidConfiguration(msg) => write!(f, "invalid randomness configuration: {msg}"),
            Error::InvalidRealization(msg) => write!(f, "invalid realization: {msg}"),
            Error::InvalidPorts(msg) => write!(f, "invalid port assignment: {msg}"),
            Error::InvalidConstruction { n, g, reason } => {
                write!(f, "port construction failed for n={n}, g={g}: {reason}")
            }
            Error::InvalidArity { n, m } => write!(f, "cannot elect {m} leaders among {n} parties"),
            Error::InvalidTask(msg) => write!(f, "invalid task: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
