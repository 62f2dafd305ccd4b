//! Strong coordination over noisy channels: information measures, rate
//! regions, a polar-code coordination scheme and an exact random-binning
//! reference.

pub mod binning;
pub mod codec;
pub mod error;
pub mod par;
pub mod polar;
pub mod prob;
pub mod regions;
pub mod rng;
pub mod sim;
pub mod target;

pub use error::{Error, Result};
pub use par::Execution;
pub use target::CoordinationTarget;
