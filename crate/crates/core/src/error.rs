use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("invalid arrivals: {0}")]
    Arrivals(String),

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Malformed or inconsistent configuration; `key` names the offending entry.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("irreducibility check failed: no schedule can ever serve type(s) {}", one_based(.0))]
    Validation(Vec<usize>),

    #[error("matching enumeration over {types} types exceeds the hard cap of 2^{cap_log2} candidates")]
    EnumerationCap { types: usize, cap_log2: u32 },

    #[error("capacity LP for {links} links exceeds the cap of {cap} links")]
    LpTooLarge { links: usize, cap: usize },

    #[error("simplex exceeded {cap} iterations on an LP with {rows} rows and {cols} columns")]
    IterationCap { cap: usize, rows: usize, cols: usize },

    #[error("LP is {0}")]
    LpStatus(&'static str),

    #[error("queue of type {} overflowed at slot {slot}; the configuration is wildly unstable", .type_index + 1)]
    QueueOverflow { type_index: usize, slot: u64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Topology(_) | Error::Arrivals(_) => 2,
            Error::LengthMismatch { .. } => 2,
            Error::EnumerationCap { .. } | Error::LpTooLarge { .. } | Error::IterationCap { .. } => 3,
            _ => 1,
        }
    }
}

fn one_based(types: &[usize]) -> String {
    types
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}
