use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datagen::{CsvFormat, Generator};
use crate::error::{Error, Result};
use crate::fnn::TrainConfig;
use crate::optimizers::{GaConfig, Selection, SwarmConfig};
use crate::preprocess::PreprocessConfig;
use crate::strategies::FitSettings;

/// Where the series come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSpec {
    /// A named preset such as `logistic-20`.
    Preset(String),
    /// Selected rows of the simulation table.
    Rows { generator: Generator, rows: Vec<usize> },
    Csv { path: PathBuf, format: CsvFormat },
}

/// A strategy entry of the experiment. `Mismo` expands to one run per block
/// size in [`ExperimentConfig::mismo_s`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategySpec {
    Iterated,
    Direct,
    Mimo,
    Mismo,
    PsoMismo,
    GaMismo,
}

impl StrategySpec {
    pub const ALL: [StrategySpec; 6] = [
        StrategySpec::Iterated,
        StrategySpec::Direct,
        StrategySpec::Mimo,
        StrategySpec::Mismo,
        StrategySpec::PsoMismo,
        StrategySpec::GaMismo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategySpec::Iterated => "iterated",
            StrategySpec::Direct => "direct",
            StrategySpec::Mimo => "mimo",
            StrategySpec::Mismo => "mismo",
            StrategySpec::PsoMismo => "pso-mismo",
            StrategySpec::GaMismo => "ga-mismo",
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategySpec::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Paper,
    Desk,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(Error::Config(format!("unknown profile `{other}` (paper|desk)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub strategies: Vec<StrategySpec>,
    pub horizon: usize,
    pub holdout_len: usize,
    pub repetitions: usize,
    pub mismo_s: Vec<usize>,
    pub swarm: SwarmConfig,
    pub ga: GaConfig,
    pub fit: FitSettings,
    pub preprocess: PreprocessConfig,
    pub seed: u64,
    /// Memoise mask fitness inside one optimizer run. Off keeps evaluation
    /// counts equal to population × (generations + 1).
    pub fitness_cache: bool,
    /// Share fitted sub-models between strategies and masks of one
    /// (series, repetition). Does not change results.
    pub segment_cache: bool,
}

impl ExperimentConfig {
    pub fn profile(profile: Profile) -> Self {
        let paper = Self {
            dataset: DatasetSpec::Preset("logistic-20".into()),
            strategies: StrategySpec::ALL.to_vec(),
            horizon: 18,
            holdout_len: 18,
            repetitions: 10,
            mismo_s: vec![1, 2, 3, 6, 9, 18],
            swarm: SwarmConfig::default(),
            ga: GaConfig::default(),
            fit: FitSettings::default(),
            preprocess: PreprocessConfig::default(),
            seed: 2024,
            fitness_cache: false,
            segment_cache: true,
        };
        match profile {
            Profile::Paper => paper,
            Profile::Desk => Self {
                dataset: DatasetSpec::Rows {
                    generator: Generator::Logistic,
                    rows: vec![1, 2, 3],
                },
                repetitions: 5,
                swarm: SwarmConfig {
                    swarm_size: 10,
                    iterations: 30,
                    ..paper.swarm
                },
                ga: GaConfig {
                    population: 10,
                    iterations: 30,
                    ..paper.ga
                },
                fit: FitSettings {
                    train: TrainConfig {
                        max_epochs: 100,
                        ..paper.fit.train
                    },
                    ..paper.fit
                },
                ..paper
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategies must be nonempty".into()));
        }
        if self.horizon < 1 || self.holdout_len < self.horizon {
            return Err(Error::Config(format!(
                "horizon {} must be positive and fit in the hold-out ({})",
                self.horizon, self.holdout_len
            )));
        }
        if self.strategies.contains(&StrategySpec::Mismo) {
            if self.mismo_s.is_empty() {
                return Err(Error::Config("mismo.s must list at least one block size".into()));
            }
            if let Some(s) = self.mismo_s.iter().find(|&&s| s == 0 || s > self.horizon) {
                return Err(Error::Config(format!(
                    "mismo block size {s} outside 1..={}",
                    self.horizon
                )));
            }
        }
        self.swarm.validate()?;
        self.ga.validate()?;
        self.fit.train.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.fit.candidate_lags.is_empty() || self.fit.hidden_candidates.is_empty() {
            return Err(Error::Config("lag and hidden-size candidates must be nonempty".into()));
        }
        Ok(())
    }

    /// Reads a config file: TOML with dotted keys, e.g. `pso.swarm_size = 20`.
    /// Keys override `base` if given, else the profile named by the file's
    /// `profile` key, else the paper profile.
    pub fn from_file(path: &Path, base: Option<Profile>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text, base)?;
        if let DatasetSpec::Csv { path: csv, .. } = &mut cfg.dataset {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str, base: Option<Profile>) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let named: Option<Profile> = file.profile.as_deref().map(str::parse).transpose()?;
        let profile = base.or(named).unwrap_or(Profile::Paper);
        let mut cfg = Self::profile(profile);
        file.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    profile: Option<String>,
    seed: Option<u64>,
    horizon: Option<usize>,
    holdout_len: Option<usize>,
    repetitions: Option<usize>,
    strategies: Option<Vec<String>>,
    dataset: Option<DatasetSection>,
    mismo: Option<MismoSection>,
    pso: Option<PsoSection>,
    ga: Option<GaSection>,
    fnn: Option<FnnSection>,
    featsel: Option<FeatselSection>,
    preprocess: Option<PreprocessSection>,
    cache: Option<CacheSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetSection {
    preset: Option<String>,
    generator: Option<String>,
    rows: Option<Vec<usize>>,
    csv: Option<PathBuf>,
    format: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MismoSection {
    s: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PsoSection {
    swarm_size: Option<usize>,
    iterations: Option<usize>,
    c1: Option<f64>,
    c2: Option<f64>,
    w_max: Option<f64>,
    w_min: Option<f64>,
    v_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaSection {
    population: Option<usize>,
    iterations: Option<usize>,
    crossover_prob: Option<f64>,
    mutation_prob: Option<f64>,
    selection: Option<String>,
    top_fraction: Option<f64>,
    roulette_keep: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FnnSection {
    max_epochs: Option<usize>,
    hidden: Option<Vec<usize>>,
    lambda_init: Option<f64>,
    gradient_tol: Option<f64>,
    cv_folds: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatselSection {
    max_lag: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PreprocessSection {
    detrend: Option<bool>,
    detrend_degree: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheSection {
    fitness: Option<bool>,
    segments: Option<bool>,
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

fn generator(name: &str) -> Result<Generator> {
    match name {
        "logistic" => Ok(Generator::Logistic),
        "mackey-glass" => Ok(Generator::MackeyGlass),
        other => Err(Error::Config(format!("unknown generator `{other}`"))),
    }
}

impl ConfigFile {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<()> {
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.horizon, self.horizon);
        set(&mut cfg.holdout_len, self.holdout_len);
        set(&mut cfg.repetitions, self.repetitions);
        if let Some(list) = self.strategies {
            cfg.strategies = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(d) = self.dataset {
            let chosen = [d.preset.is_some(), d.generator.is_some() || d.rows.is_some(), d.csv.is_some()];
            if chosen.iter().filter(|&&c| c).count() > 1 {
                return Err(Error::Config(
                    "dataset: give exactly one of preset, generator/rows or csv".into(),
                ));
            }
            if let Some(p) = d.preset {
                cfg.dataset = DatasetSpec::Preset(p);
            } else if let Some(path) = d.csv {
                let format = match d.format.as_deref() {
                    None | Some("auto") => CsvFormat::Auto,
                    Some("long") => CsvFormat::Long,
                    Some("wide") => CsvFormat::Wide,
                    Some(other) => return Err(Error::Config(format!("unknown csv format `{other}`"))),
                };
                cfg.dataset = DatasetSpec::Csv { path, format };
            } else if d.generator.is_some() || d.rows.is_some() {
                let generator = generator(d.generator.as_deref().unwrap_or("logistic"))?;
                let rows = d.rows.unwrap_or_else(|| vec![1]);
                cfg.dataset = DatasetSpec::Rows { generator, rows };
            }
        }
        if let Some(m) = self.mismo {
            set(&mut cfg.mismo_s, m.s);
        }
        if let Some(p) = self.pso {
            let s = &mut cfg.swarm;
            set(&mut s.swarm_size, p.swarm_size);
            set(&mut s.iterations, p.iterations);
            set(&mut s.c1, p.c1);
            set(&mut s.c2, p.c2);
            set(&mut s.w_max, p.w_max);
            set(&mut s.w_min, p.w_min);
            set(&mut s.v_max, p.v_max);
        }
        if let Some(g) = self.ga {
            let c = &mut cfg.ga;
            set(&mut c.population, g.population);
            set(&mut c.iterations, g.iterations);
            set(&mut c.crossover_prob, g.crossover_prob);
            set(&mut c.mutation_prob, g.mutation_prob);
            set(&mut c.roulette_keep, g.roulette_keep);
            match g.selection.as_deref() {
                None => {
                    if let (Selection::TopPercent(f), Some(nf)) = (&mut c.selection, g.top_fraction) {
                        *f = nf;
                    }
                }
                Some("roulette") => c.selection = Selection::Roulette,
                Some("top_percent") => c.selection = Selection::TopPercent(g.top_fraction.unwrap_or(0.5)),
                Some(other) => {
                    return Err(Error::Config(format!(
                        "unknown GA selection `{other}` (roulette|top_percent)"
                    )))
                }
            }
        }
        if let Some(f) = self.fnn {
            set(&mut cfg.fit.train.max_epochs, f.max_epochs);
            set(&mut cfg.fit.train.lambda_init, f.lambda_init);
            set(&mut cfg.fit.train.gradient_tol, f.gradient_tol);
            set(&mut cfg.fit.hidden_candidates, f.hidden);
            set(&mut cfg.fit.cv_folds, f.cv_folds);
        }
        if let Some(f) = self.featsel {
            if let Some(max) = f.max_lag {
                if max == 0 || max > crate::featsel::MAX_EMBEDDING {
                    return Err(Error::Config(format!(
                        "featsel.max_lag must lie in 1..={}",
                        crate::featsel::MAX_EMBEDDING
                    )));
                }
                cfg.fit.candidate_lags = (1..=max).collect();
            }
        }
        if let Some(p) = self.preprocess {
            set(&mut cfg.preprocess.detrend, p.detrend);
            set(&mut cfg.preprocess.detrend_degree, p.detrend_degree);
        }
        if let Some(c) = self.cache {
            set(&mut cfg.fitness_cache, c.fitness);
            set(&mut cfg.segment_cache, c.segments);
        }
        Ok(())
    }
}
