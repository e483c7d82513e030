//! Polaritons in an EIT medium with a light-induced nonlocal interaction: linear
//! response, split-step simulation of the mean-field equation, and a decoherence budget.
//!
//! Units are SI throughout; wavenumbers in 1/m, rates in 1/s.

pub mod bogoliubov;
pub mod decoherence;
pub mod error;
pub mod grid;
pub mod medium;
pub mod potential;
pub mod propagator;
pub mod quadrature;
pub mod scenario;

pub use bogoliubov::{
    BogoliubovResult, Branch, CwBackground, Feature, G2Options, NoiseSpectrum, Physics, Statistics,
};
pub use decoherence::{
    budget, complex_kernel, feature, rescue_scan, Budget, DecoherenceParams, FeatureKind,
    RescueKnob, RescueReport, Verdict,
};
pub use error::{Error, ErrorKind, Result};
pub use grid::Grid;
pub use medium::{EitParams, MediumParams, PolaritonParams};
pub use potential::{ConvolutionMode, DiscreteKernel, LaserDrive, LiddiParams, PotentialSpec};
pub use propagator::{FieldState, Propagator, Scheme, SchemeConfig};
pub use scenario::{Scenario, ScenarioConfig};
