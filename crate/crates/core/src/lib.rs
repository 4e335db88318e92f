//! Sequential sensitivity (go/no-go) testing.
//!
//! Phase-I search procedures locate a zone of mixed results, D-optimal
//! refinement sharpens the probit fit, and a skewed Robbins-Monro-Joseph
//! iteration tracks an extreme quantile. The crate also provides confidence
//! regions, simulation and plot series.

pub mod confidence;
pub mod error;
pub mod numerics;
pub mod phase1;
pub mod plotdata;
pub mod refine;
pub mod session;
pub mod simulate;

pub use error::{Error, Result};
