//! Multi-step-ahead forecasting strategies built on a feed-forward network,
//! with binary particle swarm and genetic search over horizon partitions.

pub mod datagen;
pub mod error;
pub mod experiment;
pub mod featsel;
pub mod fnn;
pub mod linalg;
pub mod metrics;
pub mod optimizers;
pub mod preprocess;
pub mod scalar;
pub mod seed;
pub mod series;
pub mod strategies;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::{ForecastResult, LagWindowDataset, SplitSpec, TimeSeries};

pub type Series64 = TimeSeries<f64>;
pub type Series32 = TimeSeries<f32>;
pub type Network64 = fnn::FnnParams<f64>;
pub type Network32 = fnn::FnnParams<f32>;
