use crate::model::MicroState;

/// Errors surfaced by the toolkit.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A physical or numerical parameter violated its documented range.
    #[error("invalid parameter {name}: {value} ({constraint})")]
    InvalidParam {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A Monte-Carlo integrand produced a non-finite sample, usually a sign
    /// that the proposal does not dominate the integrand.
    #[error("non-finite Monte-Carlo sample {value} at v=({:.4}, {:.4}, {:.4}), I={:.4}", at.v.x, at.v.y, at.v.z, at.i_energy)]
    NonFiniteSample { at: MicroState, value: f64 },

    /// A ratio-style probe was asked to divide by a vanishing norm.
    #[error("degenerate probe: {0}")]
    DegenerateProbe(&'static str),

    /// Simulation configuration failed validation.
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    /// An operation that needs particles received none.
    #[error("empty ensemble")]
    EmptyEnsemble,
}
