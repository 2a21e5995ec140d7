use alloc::string::String;

pub type Result<T> = core::result::Result<T, SnlsError>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SnlsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("energy-supercritical: (n-2)σ must be below 2, got n = {dim}, σ = {sigma} (σ limit {limit})")]
    EnergySupercritical { dim: usize, sigma: f64, limit: f64 },
    #[error("ground-state solver supports n in 1..=3, got n = {0}")]
    UnsupportedDimension(usize),
    #[error("shooting did not converge: {0}")]
    ShootingFailed(String),
    #[error("covariance exceeds spectral band: {0}")]
    BandExceeded(String),
    #[error("noise amplitudes are not symmetric under ξ -> -ξ at mode {0}")]
    AsymmetricAmplitudes(String),
    #[error("above additive threshold: β² + γ = {0} >= 1")]
    AboveAdditiveThreshold(f64),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("config hash mismatch: summary {summary}, report {report}")]
    HashMismatch { summary: String, report: String },
}
