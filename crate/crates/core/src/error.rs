use alloc::string::String;

/// Failures reported by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("potential breakpoints must be strictly increasing (violated at index {index})")]
    OrderingViolation { index: usize },

    #[error("x = {x} nm lies outside the device domain [0, {length}] nm")]
    OutOfDomain { x: f64, length: f64 },

    #[error("wave vectors {i} and {j} coincide within {separation:e} nm⁻¹; degenerate modes are not supported")]
    DegenerateModes { i: usize, j: usize, separation: f64 },

    #[error("dispersion root u = {re} + {im}i nm⁻² admits no bounded branch")]
    NoBoundedBranch { re: f64, im: f64 },

    #[error("dispersion root residual {residual:e} exceeds tolerance")]
    RootResidual { residual: f64 },

    #[error("incident wave vector {k} nm⁻¹ is not a propagating mode at the injection boundary")]
    EvanescentIncident { k: f64 },

    #[error("fundamental solution magnitude {magnitude:e} exceeded the overflow guard at x = {x} nm")]
    IntegrationOverflow { x: f64, magnitude: f64 },

    #[error("integrator failed to converge near x = {x} nm (step {step:e} nm)")]
    StepFailure { x: f64, step: f64 },

    #[error("transparent-boundary system is singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("derivative table holds orders 0..{available}, current needs 0..{required}")]
    MissingDerivatives { available: usize, required: usize },

    #[error("incident current vanishes; transmission is undefined")]
    ZeroIncidentCurrent,
}

pub type Result<T> = core::result::Result<T, Error>;
