use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("not covered by table: {0}")]
    NotCovered(String),
    #[error("perturbation failed: {0}")]
    PerturbationFailed(String),
    #[error("channel error: {0}")]
    Channel(String),
    #[error("perfect-observation decoder did not halt within {0} steps")]
    PerfectCheckTimeout(u64),
    #[error("time {0} is not at a cycle boundary of the observer")]
    Boundary(u64),
    #[error("threshold of {threshold} bits exceeds the exact-search cap of {cap} bits")]
    Cap { threshold: u32, cap: u32 },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("recurrence not observed within horizon {0}")]
    Horizon(usize),
    #[error("report error: {0}")]
    Report(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Stable machine-readable tag used in CLI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Domain(_) => "DomainError",
            LabError::Encoding(_) => "EncodingError",
            LabError::NotCovered(_) => "NotCovered",
            LabError::PerturbationFailed(_) => "PerturbationFailed",
            LabError::Channel(_) => "ChannelError",
            LabError::PerfectCheckTimeout(_) => "PerfectCheckTimeout",
            LabError::Boundary(_) => "BoundaryError",
            LabError::Cap { .. } => "CapError",
            LabError::Topology(_) => "TopologyError",
            LabError::Horizon(_) => "HorizonError",
            LabError::Report(_) => "ReportError",
            LabError::Config(_) => "ConfigError",
            LabError::Io(_) => "IoError",
        }
    }
}
