//! Passive localization of LEO satellite transmitters from a sparse
//! three-antenna L-shaped array.

pub mod aoa;
pub mod error;
pub mod geodesy;
pub mod orbitsim;
mod par;
pub mod poly;
pub mod ranging;
pub mod dsar;
pub mod pipeline;
pub mod signalproc;

pub use error::{Error, Result};
