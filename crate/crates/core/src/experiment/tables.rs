use serde::{Deserialize, Serialize};

use super::run::RunRecord;
use crate::metrics::{anova_oneway, average_rank, Measure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub dataset: String,
    pub strategy: String,
    pub measure: Measure,
    pub h: usize,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub dataset: String,
    pub measure: Measure,
    pub strategy: String,
    pub average_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankHorizonRow {
    pub dataset: String,
    pub measure: Measure,
    pub strategy: String,
    pub h: usize,
    pub rank: f64,
}

/// Average rank over the three measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallRankRow {
    pub dataset: String,
    pub strategy: String,
    pub average_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub dataset: String,
    pub measure: Measure,
    pub h: usize,
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub dataset: String,
    pub strategy: String,
    pub mean_mse: f64,
    pub stddev: f64,
    pub repetitions: usize,
}

/// Aggregates recomputable from the run records alone.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub metrics: Vec<MetricRow>,
    pub ranks: Vec<RankRow>,
    pub rank_horizons: Vec<RankHorizonRow>,
    pub overall_ranks: Vec<OverallRankRow>,
    pub anova: Vec<AnovaRow>,
    pub mse: Vec<MseRow>,
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, std)
}

/// Per-repetition values of a scalar extracted from successful records,
/// averaged over the series of each repetition (the multi-series form of
/// every measure).
fn per_repetition<F: Fn(&RunRecord) -> f64>(records: &[&RunRecord], f: F) -> Vec<f64> {
    let mut reps: Vec<usize> = records.iter().map(|r| r.repetition).collect();
    reps.sort_unstable();
    reps.dedup();
    reps.iter()
        .map(|&rep| {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.repetition == rep)
                .map(|r| f(r))
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        })
        .collect()
}

/// Builds every aggregate table: means over repetitions, ranks per measure
/// and overall, one-way ANOVA per step, and hold-out MSE.
pub fn compute_tables(records: &[RunRecord]) -> Tables {
    let mut t = Tables::default();
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.ok()).collect();
    for dataset in first_seen(ok.iter().map(|r| r.dataset.as_str())) {
        let in_ds: Vec<&RunRecord> = ok.iter().copied().filter(|r| r.dataset == dataset).collect();
        let strategies = first_seen(in_ds.iter().map(|r| r.strategy.as_str()));
        let horizon = in_ds.iter().map(|r| r.horizon).max().unwrap_or(0);
        let by_strategy: Vec<(String, Vec<&RunRecord>)> = strategies
            .iter()
            .map(|s| (s.clone(), in_ds.iter().copied().filter(|r| &r.strategy == s).collect()))
            .collect();

        for (strategy, recs) in &by_strategy {
            let mse = per_repetition(recs, |r| r.holdout_mse.unwrap_or(f64::NAN));
            let (mean_mse, stddev) = mean_std(&mse);
            t.mse.push(MseRow {
                dataset: dataset.clone(),
                strategy: strategy.clone(),
                mean_mse,
                stddev,
                repetitions: mse.len(),
            });
        }

        let mut overall = vec![0.0; strategies.len()];
        for measure in Measure::ALL {
            let mut means: Vec<(String, Vec<f64>)> = Vec::new();
            let mut groups: Vec<Vec<Vec<f64>>> = Vec::new();
            for (strategy, recs) in &by_strategy {
                let mut row_means = Vec::with_capacity(horizon);
                let mut per_h = Vec::with_capacity(horizon);
                for h in 1..=horizon {
                    let vals = per_repetition(recs, |r| {
                        r.score(measure).and_then(|v| v.get(h - 1)).copied().unwrap_or(f64::NAN)
                    });
                    let (mean, stddev) = mean_std(&vals);
                    t.metrics.push(MetricRow {
                        dataset: dataset.clone(),
                        strategy: strategy.clone(),
                        measure,
                        h,
                        mean,
                        stddev,
                    });
                    row_means.push(mean);
                    per_h.push(vals);
                }
                means.push((strategy.clone(), row_means));
                groups.push(per_h);
            }
            if let Ok(table) = average_rank(&means) {
                for (k, strategy) in table.strategies.iter().enumerate() {
                    t.ranks.push(RankRow {
                        dataset: dataset.clone(),
                        measure,
                        strategy: strategy.clone(),
                        average_rank: table.average[k],
                    });
                    overall[k] += table.average[k] / Measure::ALL.len() as f64;
                    for (h, ranks) in table.per_horizon.iter().enumerate() {
                        t.rank_horizons.push(RankHorizonRow {
                            dataset: dataset.clone(),
                            measure,
                            strategy: strategy.clone(),
                            h: h + 1,
                            rank: ranks[k],
                        });
                    }
                }
            }
            for h in 0..horizon {
                let samples: Vec<Vec<f64>> = groups.iter().map(|g| g[h].clone()).collect();
                if let Ok(a) = anova_oneway(&samples) {
                    t.anova.push(AnovaRow {
                        dataset: dataset.clone(),
                        measure,
                        h: h + 1,
                        f: a.f,
                        p: a.p,
                        df_between: a.df_between,
                        df_within: a.df_within,
                        significant: a.significant,
                    });
                }
            }
        }
        for (k, strategy) in strategies.iter().enumerate() {
            t.overall_ranks.push(OverallRankRow {
                dataset: dataset.clone(),
                strategy: strategy.clone(),
                average_rank: overall[k],
            });
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::HorizonScores;

    fn record(strategy: &str, rep: usize, value: f64) -> RunRecord {
        RunRecord {
            dataset: "d".into(),
            series: "s".into(),
            strategy: strategy.into(),
            repetition: rep,
            seed: 0,
            horizon: 2,
            forecast: vec![],
            actual: vec![],
            holdout_mse: Some(value),
            scores: Measure::ALL
                .into_iter()
                .map(|measure| HorizonScores {
                    measure,
                    values: vec![value, value + 1.0],
                    dataset: "d".into(),
                    strategy: strategy.into(),
                    repetition: rep,
                })
                .collect(),
            partition: None,
            segments: vec![],
            search: None,
            error: None,
        }
    }

    #[test]
    fn means_ranks_and_anova() {
        let mut recs = Vec::new();
        for rep in 0..10 {
            recs.push(record("a", rep, rep as f64));
            recs.push(record("b", rep, 100.0 + rep as f64));
        }
        let t = compute_tables(&recs);
        let m = t.metrics.iter().find(|r| r.strategy == "a" && r.h == 1).unwrap();
        assert_eq!(m.mean, 4.5);
        let r: Vec<f64> = t.overall_ranks.iter().map(|r| r.average_rank).collect();
        assert_eq!(r, vec![1.0, 2.0]);
        assert_eq!(t.anova.len(), 3 * 2);
        assert!(t.anova.iter().all(|a| a.significant));
        assert_eq!(t.mse[0].mean_mse, 4.5);
        for h in 1..=2 {
            let mut ranks: Vec<f64> = t
                .rank_horizons
                .iter()
                .filter(|r| r.h == h && r.measure == Measure::Mape)
                .map(|r| r.rank)
                .collect();
            ranks.sort_by(f64::total_cmp);
            assert_eq!(ranks, vec![1.0, 2.0]);
        }
    }

    #[test]
    fn failed_records_are_ignored() {
        let mut bad = record("a", 1, 1e9);
        bad.error = Some("boom".into());
        let t = compute_tables(&[record("a", 0, 1.0), bad]);
        assert_eq!(t.mse[0].mean_mse, 1.0);
        assert_eq!(t.mse[0].repetitions, 1);
    }
}
