use alloc::string::String;
use thiserror::Error;

/// Numerical and domain errors raised while evaluating or integrating.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("temperature {temperature} K outside [{t_low}, {t_high}] for species {species}")]
    TemperatureOutOfRange {
        species: String,
        temperature: f64,
        t_low: f64,
        t_high: f64,
    },
    #[error("non-physical state: {0}")]
    Domain(String),
    #[error("Newton iteration failed at step {step} (t = {time:e} s) after {iterations} iterations, scaled residual {residual:e}")]
    StepFailure {
        step: usize,
        time: f64,
        iterations: usize,
        residual: f64,
    },
    #[error("singular linear system at step {step}")]
    Singular { step: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no ignition detected (peak dT/dt {peak_rate:e} K/s below floor {floor:e} K/s)")]
    NoIgnition { peak_rate: f64, floor: f64 },
}

/// Violations of the mechanism data-model invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechanismError {
    #[error("duplicate species name {0}")]
    DuplicateSpecies(String),
    #[error("species {species} uses undeclared element {element}")]
    UnknownElement { species: String, element: String },
    #[error("species {species}: {reason}")]
    InvalidSpecies { species: String, reason: String },
    #[error("reaction {reaction}: species index {index} out of range")]
    SpeciesIndexOutOfRange { reaction: usize, index: usize },
    #[error("reaction {reaction} does not balance element {element} ({reactants} reactant vs {products} product atoms)")]
    Unbalanced {
        reaction: usize,
        element: String,
        reactants: u32,
        products: u32,
    },
    #[error("reaction {reaction}: {reason}")]
    InvalidReaction { reaction: usize, reason: String },
}
