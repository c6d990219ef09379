//! Three-class diagnostic accuracy: overlap coefficient (OVL) and volume
//! under the ROC surface (VUS) estimators, bootstrap inference and the
//! simulation studies that compare them.

pub mod dataset;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod normality;
pub mod numerics;
mod published;
pub mod report;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
