//! Detection of a sparse vector signal from one-bit quantized linear
//! measurements in a distributed sensor network.
//!
//! The library covers the full detector family (sign-GLRT, uniform
//! GLRT, double-detector, oracle, clairvoyant, energy), the quantizer
//! design analysis (threshold efficiency, Fisher information,
//! Cramér–Rao bound), sparse estimation by BIHT and the concave
//! one-bit MLE, and a seeded Monte Carlo ROC harness. The numeric
//! kernels are generic over the scalar type via [`scalar::Real`];
//! `f64` aliases for the main domain types live at the crate root.

pub mod cli;
pub mod detectors;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod model;
pub mod quantizer;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ScenarioF64 = model::Scenario<f64>;
pub type ScenarioF32 = model::Scenario<f32>;
pub type MeasurementF64 = model::Measurement<f64>;
pub type SparseEstimateF64 = estimation::SparseEstimate<f64>;
pub type FusionWeightsF64 = detectors::FusionWeights<f64>;
pub type DetectorVerdictF64 = detectors::DetectorVerdict<f64>;
pub type InformationReportF64 = quantizer::InformationReport<f64>;
