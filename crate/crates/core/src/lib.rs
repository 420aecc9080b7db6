//! Record extraction from recognized parish registers: page filtering,
//! act assembly and typing, field standardization and validation.

pub mod assembly;
pub mod classify;
pub mod dates;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod names;
pub mod outlier;
pub mod pipeline;
pub mod quality;
pub mod scalar;
pub mod synth;
pub mod text;
pub mod validate;

pub use error::{Error, Result};
pub use scalar::Real;

/// The generic models at the usual `f64` precision.
pub type IsolationForestF64 = outlier::IsolationForest<f64>;
pub type LocalOutlierFactorF64 = outlier::LocalOutlierFactor<f64>;
pub type PageModelF64 = outlier::PageModel<f64>;
pub type FeatureVectorF64 = outlier::FeatureVector<f64>;
pub type QualityReportF64 = quality::QualityReport<f64>;
pub type PointF64 = geometry::Point<f64>;
