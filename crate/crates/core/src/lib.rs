//! Entanglement distribution between superconducting nodes through
//! optomechanical transducers, modelled with two-mode Gaussian states.
//!
//! The crate is layered: [`gaussian`] holds covariance-matrix machinery,
//! [`transducer`] the transducer channels, [`sources`] the
//! microwave–optical states, [`network`] the microwave–microwave
//! topologies and [`thresholds`] the optimisation layer. [`experiments`]
//! drives the command-line sweeps.

pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod network;
pub mod optimize;
pub mod sources;
pub mod thresholds;
pub mod transducer;

pub use error::{Error, Result};
pub use gaussian::{BalancedForm, CovMat2, SqueezeParam};
pub use network::{Cooperativities, LossSite, LossSplit, NetworkConfig, Topology};
pub use sources::MoKind;
pub use thresholds::{Optimum, Scenario, ThresholdResult};
pub use transducer::{DeviceCaps, DptParams, PhysicalRates, Pump};
