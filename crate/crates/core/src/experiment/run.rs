use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DatasetSpec, ExperimentConfig, StrategySpec};
use crate::datagen::{load_csv_series, preset, simulated_rows};
use crate::error::{Error, Result};
use crate::fnn::StopReason;
use crate::metrics::{score_horizons, HorizonScores, Measure};
use crate::optimizers::{
    ga_run, pso_run, CachedFitness, CountingFitness, Fitness, FitnessContext, GaConfig,
    OptimizerResult, SwarmConfig,
};
use crate::preprocess::Preprocessor;
use crate::seed_of;
use crate::series::{split_holdout, SplitSpec, TimeSeries};
use crate::strategies::{
    decode_partition, fit_partitioned, fit_strategy, forecast, BinaryMask, SegmentFitter,
    StrategyKind, StrategyModelSet,
};

/// Summary of one fitted sub-model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub start: usize,
    pub len: usize,
    pub lags: Vec<usize>,
    pub delta: f64,
    pub hidden: usize,
    pub epochs: usize,
    pub train_mse: f64,
    pub stop: StopReason,
    pub aic: f64,
    pub cv_mse: Option<f64>,
}

/// Outcome of a mask search, without timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub mask: String,
    pub best_fitness: f64,
    pub evaluations: usize,
    pub best_trace: Vec<f64>,
    pub mean_trace: Vec<f64>,
}

impl SearchSummary {
    fn from_result(r: &OptimizerResult) -> Self {
        Self {
            mask: r.best.to_string(),
            best_fitness: r.best_fitness,
            evaluations: r.evaluations,
            best_trace: r.trace.generations.iter().map(|g| g.best_fitness).collect(),
            mean_trace: r.trace.generations.iter().map(|g| g.mean_fitness).collect(),
        }
    }
}

/// Everything recorded for one (series, strategy, repetition). Contains no
/// wall-clock data, so identical configurations give identical records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub series: String,
    pub strategy: String,
    pub repetition: usize,
    pub seed: u64,
    pub horizon: usize,
    pub forecast: Vec<f64>,
    pub actual: Vec<f64>,
    pub holdout_mse: Option<f64>,
    pub scores: Vec<HorizonScores>,
    pub partition: Option<Vec<usize>>,
    pub segments: Vec<SegmentSummary>,
    pub search: Option<SearchSummary>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn score(&self, measure: Measure) -> Option<&[f64]> {
        self.scores
            .iter()
            .find(|s| s.measure == measure)
            .map(|s| s.values.as_slice())
    }
}

/// Wall-clock data, kept apart from [`RunRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub dataset: String,
    pub series: String,
    pub strategy: String,
    pub repetition: usize,
    pub seconds: f64,
    /// Per-generation seconds of the mask search (empty for fixed
    /// strategies).
    pub generation_seconds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: usize,
    pub progress: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            progress: false,
        }
    }
}

/// Resolves the dataset into a group name and its series.
pub fn load_dataset(spec: &DatasetSpec) -> Result<(String, Vec<TimeSeries<f64>>)> {
    match spec {
        DatasetSpec::Preset(name) => {
            let series = preset(name)?;
            let group = name
                .rsplit_once('-')
                .map_or(name.as_str(), |(g, _)| g)
                .to_string();
            Ok((group, series))
        }
        DatasetSpec::Rows { generator, rows } => {
            Ok((generator.name().to_string(), simulated_rows(*generator, rows)?))
        }
        DatasetSpec::Csv { path, format } => {
            let series = load_csv_series(path, *format)?;
            let group = path
                .file_stem()
                .map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
            Ok((group, series))
        }
    }
}

/// The concrete strategies a config expands to, in reporting order.
pub fn expand_strategies(cfg: &ExperimentConfig) -> Vec<(String, StrategySpec, Option<usize>)> {
    let mut out = Vec::new();
    for &spec in &cfg.strategies {
        if spec == StrategySpec::Mismo {
            for &s in &cfg.mismo_s {
                out.push((format!("mismo-{s}"), spec, Some(s)));
            }
        } else {
            out.push((spec.name().to_string(), spec, None));
        }
    }
    out
}

/// A fitted strategy and, for searched strategies, the search outcome.
#[derive(Debug)]
pub struct FittedStrategy {
    pub label: String,
    pub seed: u64,
    pub model: Result<StrategyModelSet<f64>>,
    pub search: Option<OptimizerResult>,
    pub seconds: f64,
}

/// All fitted artifacts of one (series, repetition). Built from the
/// estimation sample only.
#[derive(Debug)]
pub struct UnitFit {
    pub preprocessor: Preprocessor<f64>,
    pub transformed: Vec<f64>,
    pub strategies: Vec<FittedStrategy>,
}

fn search_fitness(cfg: &ExperimentConfig, ctx: &FitnessContext<f64>, label: &str, seed: u64) -> Result<OptimizerResult> {
    let dim = cfg.horizon - 1;
    let counter = CountingFitness::new(|m: &BinaryMask| ctx.evaluate(m));
    let run = |f: &dyn Fitness| -> Result<OptimizerResult> {
        if label == "pso-mismo" {
            pso_run(f, dim, &SwarmConfig { seed, ..cfg.swarm })
        } else {
            ga_run(f, dim, &GaConfig { seed, ..cfg.ga })
        }
    };
    let mut result = if cfg.fitness_cache {
        let cached = CachedFitness::new(|m: &BinaryMask| counter.evaluate(m));
        run(&cached)?
    } else {
        run(&counter)?
    };
    result.evaluations = counter.calls();
    Ok(result)
}

/// Fits every configured strategy for one series and repetition.
pub fn fit_unit(cfg: &ExperimentConfig, series: &TimeSeries<f64>, repetition: usize) -> Result<UnitFit> {
    let (est, _) = split_holdout(series, SplitSpec { holdout_len: cfg.holdout_len })?;
    let (pre, transformed) = Preprocessor::fit(est.values(), cfg.preprocess)?;
    let sample = TimeSeries::new(series.name(), transformed.clone())?;
    let name = series.name();
    let mut fitter = SegmentFitter::new(sample.clone(), cfg.fit.clone(), seed_of!(cfg.seed, name, "fit", repetition));
    if cfg.segment_cache {
        fitter = fitter.with_cache();
    }
    let needs_search = cfg
        .strategies
        .iter()
        .any(|s| matches!(s, StrategySpec::PsoMismo | StrategySpec::GaMismo));
    let fitness_ctx = if needs_search {
        let ctx = FitnessContext::new(&sample, cfg.horizon, cfg.fit.clone(), seed_of!(cfg.seed, name, "fitness", repetition));
        Some(ctx.map(|c| if cfg.segment_cache { c.with_segment_cache() } else { c }))
    } else {
        None
    };

    let strategies = expand_strategies(cfg)
        .into_iter()
        .map(|(label, spec, s)| {
            let started = Instant::now();
            let seed = seed_of!(cfg.seed, name, label.as_str(), repetition);
            let (model, search) = match spec {
                StrategySpec::Iterated => (fit_strategy(&StrategyKind::Iterated, &fitter, cfg.horizon), None),
                StrategySpec::Direct => (fit_strategy(&StrategyKind::Direct, &fitter, cfg.horizon), None),
                StrategySpec::Mimo => (fit_strategy(&StrategyKind::Mimo, &fitter, cfg.horizon), None),
                StrategySpec::Mismo => (
                    fit_strategy(&StrategyKind::Mismo(s.expect("block size")), &fitter, cfg.horizon),
                    None,
                ),
                StrategySpec::PsoMismo | StrategySpec::GaMismo => {
                    let ctx = fitness_ctx.as_ref().expect("fitness context");
                    match ctx {
                        Err(e) => (Err(Error::Training(format!("fitness context: {e}"))), None),
                        Ok(ctx) => match search_fitness(cfg, ctx, &label, seed_of!(seed, "search")) {
                            Err(e) => (Err(e), None),
                            Ok(r) => {
                                let model = decode_partition(&r.best, cfg.horizon)
                                    .and_then(|p| fit_partitioned(&fitter, &p))
                                    .map(|m| m.with_label(label.clone()));
                                (model, Some(r))
                            }
                        },
                    }
                }
            };
            FittedStrategy {
                label,
                seed,
                model: model.map(|m| m.with_preprocessor(pre.clone())),
                search,
                seconds: started.elapsed().as_secs_f64(),
            }
        })
        .collect();
    Ok(UnitFit {
        preprocessor: pre,
        transformed,
        strategies,
    })
}

fn summarize_segments(set: &StrategyModelSet<f64>) -> Vec<SegmentSummary> {
    set.segments
        .iter()
        .map(|s| SegmentSummary {
            start: s.start,
            len: s.len,
            lags: s.lags.lags.clone(),
            delta: s.lags.criterion_value,
            hidden: s.shape.n_hidden,
            epochs: s.report.epochs_run,
            train_mse: s.report.final_mse,
            stop: s.report.converged_reason,
            aic: s.aic,
            cv_mse: s.cv.as_ref().map(|c| c.mean_mse),
        })
        .collect()
}

fn score_record(
    record: &mut RunRecord,
    set: &StrategyModelSet<f64>,
    transformed: &[f64],
    est: &[f64],
    hold: &[f64],
) -> Result<()> {
    let fc = forecast(set, transformed)?;
    record.forecast = fc.predictions.clone();
    let actuals = vec![hold.to_vec()];
    let forecasts = vec![fc.predictions];
    let insample = vec![est.to_vec()];
    let mse = actuals[0]
        .iter()
        .zip(&forecasts[0])
        .map(|(a, f)| (a - f) * (a - f))
        .sum::<f64>()
        / record.horizon as f64;
    record.holdout_mse = Some(mse);
    for measure in Measure::ALL {
        record.scores.push(HorizonScores {
            measure,
            values: score_horizons(measure, &actuals, &forecasts, &insample)?,
            dataset: record.dataset.clone(),
            strategy: record.strategy.clone(),
            repetition: record.repetition,
        });
    }
    Ok(())
}

/// Fits, forecasts and scores one (series, repetition).
fn run_unit(
    cfg: &ExperimentConfig,
    dataset: &str,
    series: &TimeSeries<f64>,
    repetition: usize,
) -> (Vec<RunRecord>, Vec<TimingRecord>) {
    let base = |label: &str, seed: u64| RunRecord {
        dataset: dataset.to_string(),
        series: series.name().to_string(),
        strategy: label.to_string(),
        repetition,
        seed,
        horizon: cfg.horizon,
        forecast: Vec::new(),
        actual: Vec::new(),
        holdout_mse: None,
        scores: Vec::new(),
        partition: None,
        segments: Vec::new(),
        search: None,
        error: None,
    };
    let split = split_holdout(series, SplitSpec { holdout_len: cfg.holdout_len });
    let fit = split.and_then(|split| fit_unit(cfg, series, repetition).map(|f| (split, f)));
    let ((est, hold), unit) = match fit {
        Ok(v) => v,
        Err(e) => {
            let records = expand_strategies(cfg)
                .into_iter()
                .map(|(label, _, _)| {
                    let mut r = base(&label, seed_of!(cfg.seed, series.name(), label.as_str(), repetition));
                    r.error = Some(e.to_string());
                    r
                })
                .collect();
            return (records, Vec::new());
        }
    };
    let hold = &hold.values()[..cfg.horizon];
    let mut records = Vec::new();
    let mut timings = Vec::new();
    for fs in &unit.strategies {
        let mut record = base(&fs.label, fs.seed);
        record.actual = hold.to_vec();
        record.search = fs.search.as_ref().map(SearchSummary::from_result);
        let outcome = fs.model.as_ref().map_err(|e| e.to_string()).and_then(|set| {
            record.partition = set.partition.as_ref().map(|p| p.segments().to_vec());
            record.segments = summarize_segments(set);
            score_record(&mut record, set, &unit.transformed, est.values(), hold).map_err(|e| e.to_string())
        });
        if let Err(e) = outcome {
            record.error = Some(e);
            record.scores.clear();
            record.holdout_mse = None;
        }
        timings.push(TimingRecord {
            dataset: dataset.to_string(),
            series: series.name().to_string(),
            strategy: fs.label.clone(),
            repetition,
            seconds: fs.seconds,
            generation_seconds: fs
                .search
                .as_ref()
                .map(|r| r.trace.generations.iter().map(|g| g.seconds).collect())
                .unwrap_or_default(),
        });
        records.push(record);
    }
    (records, timings)
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub dataset: String,
    pub records: Vec<RunRecord>,
    pub timings: Vec<TimingRecord>,
}

impl ExperimentOutput {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.ok()).count()
    }
}

/// Runs every (series, repetition) on a pool of `workers` threads. Records
/// come back ordered by series, strategy and repetition whatever the
/// schedule.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let (dataset, series) = load_dataset(&cfg.dataset)?;
    if series.is_empty() {
        return Err(Error::Config("dataset has no series".into()));
    }
    let units: Vec<(usize, usize)> = (0..series.len())
        .flat_map(|s| (0..cfg.repetitions).map(move |r| (s, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let total = units.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<(Vec<RunRecord>, Vec<TimingRecord>)> = pool.install(|| {
        units
            .par_iter()
            .map(|&(s, r)| {
                let started = Instant::now();
                let out = run_unit(cfg, &dataset, &series[s], r);
                if opts.progress {
                    let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                    eprintln!(
                        "[{n}/{total}] {} rep {r}: {:.1}s",
                        series[s].name(),
                        started.elapsed().as_secs_f64()
                    );
                }
                out
            })
            .collect()
    });
    let labels: Vec<String> = expand_strategies(cfg).into_iter().map(|(l, _, _)| l).collect();
    let series_pos = |name: &str| series.iter().position(|s| s.name() == name).unwrap_or(usize::MAX);
    let label_pos = |name: &str| labels.iter().position(|l| l == name).unwrap_or(usize::MAX);
    let (mut records, mut timings): (Vec<RunRecord>, Vec<TimingRecord>) = (Vec::new(), Vec::new());
    for (r, t) in results {
        records.extend(r);
        timings.extend(t);
    }
    records.sort_by_key(|r| (series_pos(&r.series), label_pos(&r.strategy), r.repetition));
    timings.sort_by_key(|r| (series_pos(&r.series), label_pos(&r.strategy), r.repetition));
    Ok(ExperimentOutput {
        dataset,
        records,
        timings,
    })
}

/// Differences found by [`leakage_audit`]; empty means no leakage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub differences: Vec<String>,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.differences.is_empty()
    }
}

/// Refits one (series, repetition) with every hold-out value replaced and
/// lists every fitted artifact that changed: scaling, trend, lag sets,
/// network parameters, searched masks and their fitness.
pub fn leakage_audit(cfg: &ExperimentConfig, series: &TimeSeries<f64>, repetition: usize) -> Result<AuditReport> {
    let n = series.len();
    let cut = n.checked_sub(cfg.holdout_len).ok_or(Error::SeriesTooShort {
        what: "hold-out split",
        needed: cfg.holdout_len,
        len: n,
    })?;
    let mut values = series.values().to_vec();
    for (i, v) in values[cut..].iter_mut().enumerate() {
        *v = *v * 3.0 + 10.0 + i as f64;
    }
    let perturbed = TimeSeries::new(series.name(), values)?;
    let a = fit_unit(cfg, series, repetition)?;
    let b = fit_unit(cfg, &perturbed, repetition)?;
    let mut report = AuditReport::default();
    if a.preprocessor != b.preprocessor {
        report.differences.push("preprocessor".into());
    }
    if a.transformed != b.transformed {
        report.differences.push("transformed sample".into());
    }
    for (x, y) in a.strategies.iter().zip(&b.strategies) {
        let same_model = match (&x.model, &y.model) {
            (Ok(p), Ok(q)) => p == q,
            (Err(e), Err(f)) => e.to_string() == f.to_string(),
            _ => false,
        };
        if !same_model {
            report.differences.push(format!("{}: fitted model", x.label));
        }
        let key = |r: &Option<OptimizerResult>| r.as_ref().map(SearchSummary::from_result);
        if key(&x.search) != key(&y.search) {
            report.differences.push(format!("{}: mask search", x.label));
        }
    }
    Ok(report)
}
