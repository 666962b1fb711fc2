use super::Fitness;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::strategies::{
    decode_partition, fit_partitioned, forecast_model_space, BinaryMask, FitSettings,
    SegmentFitter,
};
use crate::series::TimeSeries;

/// Points held back at the end of the estimation sample to score masks.
pub fn validation_len(horizon: usize) -> usize {
    (2 * horizon).max(36)
}

/// Scores a mask by fitting its partition on the head of the (transformed)
/// estimation sample and forecasting the held-back tail from every origin
/// that leaves a full horizon inside it. Inputs are always true values.
#[derive(Debug)]
pub struct FitnessContext<T> {
    fitter: SegmentFitter<T>,
    sample: Vec<T>,
    train_len: usize,
    horizon: usize,
}

impl<T: Scalar> FitnessContext<T> {
    pub fn new(sample: &TimeSeries<T>, horizon: usize, settings: FitSettings, seed: u64) -> Result<Self> {
        Self::with_validation_len(sample, horizon, validation_len(horizon), settings, seed)
    }

    pub fn with_validation_len(
        sample: &TimeSeries<T>,
        horizon: usize,
        validation: usize,
        settings: FitSettings,
        seed: u64,
    ) -> Result<Self> {
        if horizon == 0 || validation < horizon {
            return Err(Error::invalid(format!(
                "validation block {validation} must hold a horizon of {horizon}"
            )));
        }
        if sample.len() <= validation {
            return Err(Error::SeriesTooShort {
                what: "fitness training block",
                needed: validation + 1,
                len: sample.len(),
            });
        }
        let train_len = sample.len() - validation;
        Ok(Self {
            fitter: SegmentFitter::new(sample.prefix(train_len)?, settings, seed),
            sample: sample.values().to_vec(),
            train_len,
            horizon,
        })
    }

    /// Shares fitted segments between masks (results unchanged).
    pub fn with_segment_cache(mut self) -> Self {
        self.fitter = self.fitter.with_cache();
        self
    }

    pub fn fitter(&self) -> &SegmentFitter<T> {
        &self.fitter
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn train_len(&self) -> usize {
        self.train_len
    }

    /// Mean squared error over all validation origins and steps.
    pub fn try_evaluate(&self, mask: &BinaryMask) -> Result<f64> {
        let partition = decode_partition(mask, self.horizon)?;
        let set = fit_partitioned(&self.fitter, &partition)?;
        let mut sse = 0.0;
        let mut count = 0usize;
        for origin in self.train_len..=self.sample.len() - self.horizon {
            let pred = forecast_model_space(&set, &self.sample[..origin])?;
            for (p, a) in pred.iter().zip(&self.sample[origin..origin + self.horizon]) {
                let e = (*p - *a).to_f64_lossy();
                sse += e * e;
                count += 1;
            }
        }
        let mse = sse / count as f64;
        if mse.is_finite() {
            Ok(mse)
        } else {
            Err(Error::Degenerate("non-finite validation error".into()))
        }
    }
}

impl<T: Scalar> Fitness for FitnessContext<T> {
    fn evaluate(&self, mask: &BinaryMask) -> f64 {
        evaluate_fitness(mask, self)
    }
}

/// Validation MSE of `mask`, or `+∞` when any sub-model cannot be fitted.
pub fn evaluate_fitness<T: Scalar>(mask: &BinaryMask, ctx: &FitnessContext<T>) -> f64 {
    ctx.try_evaluate(mask).unwrap_or(f64::INFINITY)
}
