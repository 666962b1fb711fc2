//! Three-layer feed-forward network, Levenberg–Marquardt training, AIC
//! hidden-size selection and k-fold cross-validation.

mod lm;
mod network;
mod select;

pub use lm::{dataset_mse, train_lm, train_lm_from, StopReason, TrainConfig, TrainReport, LAMBDA_CAP};
pub use network::{forward, jacobian, mse, FnnParams, NetworkShape, HIDDEN_CANDIDATES};
pub use select::{aic, fold_indices, kfold_cv, select_hidden_aic, CandidateFit, CvScore};
