use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported reuse factor {0} (expected 1, 3, 4 or 7)")]
    UnsupportedReuse(u32),

    #[error("capacity {capacity} units is smaller than the largest class ({largest} units)")]
    CapacityTooSmall { capacity: u32, largest: u32 },

    #[error("every traffic class is in outage")]
    AllOutage,

    #[error("unicast bandwidth exceeds the search ceiling of {ceiling_mhz} MHz")]
    Infeasible { ceiling_mhz: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
