//! Step-2 rough path machinery with computable certificates.
//!
//! The crate builds geometric rough-path lifts of sampled paths, measures
//! p-variation and superadditive controls, turns a discrete Gronwall-type
//! lemma into a checkable bound, solves rough differential equations (free,
//! reflected) with remainder-scale diagnostics, and discretizes a rough
//! transport-diffusion equation whose energy bound is certified numerically.

pub mod cli;
pub mod error;
pub mod gronwall;
pub mod heat;
pub mod io;
mod num;
pub mod rde;
pub mod reflected;
pub mod rough;
pub mod suite;
pub mod variation;

pub use error::{Error, Result};
pub use num::empirical_order;
