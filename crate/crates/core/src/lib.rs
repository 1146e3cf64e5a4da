//! Joint edge optimization for multi-coil MRI reconstruction: SENSE
//! forward model, stationary Haar wavelets, learned proximal modules and
//! the unrolled edge/image alternation with its training loop.

pub mod dataset;
pub mod edge;
pub mod error;
pub mod image;
pub mod metrics;
pub mod mri;
pub mod numerics;
pub mod phantom;
pub mod pipeline;
pub mod prox;
pub mod study;
pub mod wavelet;

#[doc(hidden)]
pub mod testutil;

pub use error::{Error, Result};
pub use numerics::{ComplexImage, RealImage};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
