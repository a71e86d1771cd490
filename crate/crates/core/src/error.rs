use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrand returned a non-finite value at x = {abscissa:e}")]
    NonFiniteIntegrand { abscissa: f64 },

    #[error("frequency {omega_ev} eV outside tabulated range [{min_ev}, {max_ev}] eV")]
    OutOfRange { omega_ev: f64, min_ev: f64, max_ev: f64 },

    #[error("dispersion quartic could not be solved at omega = {omega:e} rad/s, kx = {kx:e}, ky = {ky:e}: {reason}")]
    QuarticFailure { omega: f64, kx: f64, ky: f64, reason: String },

    #[error("boundary system is singular (condition number {condition:e}) at omega = {omega:e} rad/s, kx = {kx:e}, ky = {ky:e}")]
    SingularBoundary { omega: f64, kx: f64, ky: f64, condition: f64 },

    #[error("cavity resonance: 1 - r1 r2 exp(2 i kz d) is singular (condition number {condition:e})")]
    Resonance { condition: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}
