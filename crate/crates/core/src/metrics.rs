//! Per-horizon accuracy measures over a set of series, horizon averages,
//! average ranks and one-way ANOVA.
//!
//! Forecast and actual blocks are indexed `[series][step]`; `h` is 1-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "MAPE")]
    Mape,
    #[serde(rename = "SMAPE")]
    Smape,
    #[serde(rename = "MASE")]
    Mase,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Mape, Measure::Smape, Measure::Mase];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Mape => "MAPE",
            Measure::Smape => "SMAPE",
            Measure::Mase => "MASE",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown measure `{s}`")))
    }
}

/// Denominator convention for SMAPE.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmapeVariant {
    /// `|a − f| / (a + f)`, for positive data.
    #[default]
    Printed,
    /// `2|a − f| / (|a| + |f|)`.
    Standard,
}

fn step_pairs<'a, T: Scalar>(
    actuals: &'a [Vec<T>],
    forecasts: &'a [Vec<T>],
    h: usize,
) -> Result<impl Iterator<Item = (usize, f64, f64)> + 'a> {
    if actuals.is_empty() || actuals.len() != forecasts.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} forecast series", actuals.len()),
            got: forecasts.len().to_string(),
        });
    }
    for (a, f) in actuals.iter().zip(forecasts) {
        if h == 0 || h > a.len() || h > f.len() {
            return Err(Error::invalid(format!(
                "horizon {h} outside 1..={}",
                a.len().min(f.len())
            )));
        }
    }
    Ok(actuals
        .iter()
        .zip(forecasts)
        .enumerate()
        .map(move |(m, (a, f))| (m, a[h - 1].to_f64_lossy(), f[h - 1].to_f64_lossy())))
}

/// Mean absolute percentage error at step `h`, in percent.
pub fn mape_h<T: Scalar>(actuals: &[Vec<T>], forecasts: &[Vec<T>], h: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut m_count = 0;
    for (m, a, f) in step_pairs(actuals, forecasts, h)? {
        if a == 0.0 {
            return Err(Error::DivisionGuard(format!("series {m}: zero actual at h={h}")));
        }
        total += (a - f).abs() / a.abs();
        m_count += 1;
    }
    Ok(total / m_count as f64 * 100.0)
}

pub fn smape_h<T: Scalar>(actuals: &[Vec<T>], forecasts: &[Vec<T>], h: usize) -> Result<f64> {
    smape_h_with(actuals, forecasts, h, SmapeVariant::Printed)
}

/// Symmetric MAPE at step `h`, in percent.
pub fn smape_h_with<T: Scalar>(
    actuals: &[Vec<T>],
    forecasts: &[Vec<T>],
    h: usize,
    variant: SmapeVariant,
) -> Result<f64> {
    let mut total = 0.0;
    let mut m_count = 0;
    for (m, a, f) in step_pairs(actuals, forecasts, h)? {
        let term = match variant {
            SmapeVariant::Printed => {
                let d = a + f;
                if !(d > 0.0) {
                    return Err(Error::DivisionGuard(format!(
                        "series {m}: nonpositive SMAPE denominator at h={h}"
                    )));
                }
                (a - f).abs() / d
            }
            SmapeVariant::Standard => {
                let d = a.abs() + f.abs();
                if d == 0.0 {
                    0.0
                } else {
                    2.0 * (a - f).abs() / d
                }
            }
        };
        total += term;
        m_count += 1;
    }
    Ok(total / m_count as f64 * 100.0)
}

/// Mean absolute one-step naive error of an in-sample series.
pub fn naive_mae<T: Scalar>(insample: &[T]) -> Result<f64> {
    if insample.len() < 2 {
        return Err(Error::SeriesTooShort {
            what: "naive in-sample error",
            needed: 2,
            len: insample.len(),
        });
    }
    let sum: f64 = insample
        .windows(2)
        .map(|w| (w[1] - w[0]).to_f64_lossy().abs())
        .sum();
    Ok(sum / (insample.len() - 1) as f64)
}

/// Mean absolute scaled error at step `h`.
pub fn mase_h<T: Scalar>(
    actuals: &[Vec<T>],
    forecasts: &[Vec<T>],
    insample: &[Vec<T>],
    h: usize,
) -> Result<f64> {
    if insample.len() != actuals.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} in-sample series", actuals.len()),
            got: insample.len().to_string(),
        });
    }
    let mut total = 0.0;
    let mut m_count = 0;
    for (m, a, f) in step_pairs(actuals, forecasts, h)? {
        let scale = naive_mae(&insample[m])?;
        if scale == 0.0 {
            return Err(Error::DivisionGuard(format!("series {m}: constant in-sample series")));
        }
        total += (a - f).abs() / scale;
        m_count += 1;
    }
    Ok(total / m_count as f64)
}

/// Values of one measure for h = 1..H.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonScores {
    pub measure: Measure,
    pub values: Vec<f64>,
    pub dataset: String,
    pub strategy: String,
    pub repetition: usize,
}

/// Scores every step of the horizon for one measure.
pub fn score_horizons<T: Scalar>(
    measure: Measure,
    actuals: &[Vec<T>],
    forecasts: &[Vec<T>],
    insample: &[Vec<T>],
) -> Result<Vec<f64>> {
    let horizon = actuals.first().map_or(0, Vec::len);
    (1..=horizon)
        .map(|h| match measure {
            Measure::Mape => mape_h(actuals, forecasts, h),
            Measure::Smape => smape_h(actuals, forecasts, h),
            Measure::Mase => mase_h(actuals, forecasts, insample, h),
        })
        .collect()
}

/// Mean of the values at steps `h_lo..=h_hi` (1-based).
pub fn average_over_horizons(values: &[f64], h_lo: usize, h_hi: usize) -> Result<f64> {
    if h_lo == 0 || h_lo > h_hi || h_hi > values.len() {
        return Err(Error::invalid(format!(
            "horizon range {h_lo}..={h_hi} outside 1..={}",
            values.len()
        )));
    }
    let slice = &values[h_lo - 1..h_hi];
    Ok(slice.iter().sum::<f64>() / slice.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub strategies: Vec<String>,
    /// `per_horizon[h][k]`: rank of strategy `k` at step `h + 1`.
    pub per_horizon: Vec<Vec<f64>>,
    pub average: Vec<f64>,
}

/// Ranks (1 = lowest) with tied values sharing the mean of their ranks.
pub fn rank_with_ties(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Ranks strategies at every step and averages the ranks over the horizon.
pub fn average_rank(scores: &[(String, Vec<f64>)]) -> Result<RankTable> {
    let horizon = scores.first().map_or(0, |(_, v)| v.len());
    if scores.iter().any(|(_, v)| v.len() != horizon) {
        return Err(Error::invalid("strategies have different horizon counts"));
    }
    let per_horizon: Vec<Vec<f64>> = (0..horizon)
        .map(|h| rank_with_ties(&scores.iter().map(|(_, v)| v[h]).collect::<Vec<_>>()))
        .collect();
    let average = (0..scores.len())
        .map(|k| {
            if horizon == 0 {
                f64::NAN
            } else {
                per_horizon.iter().map(|r| r[k]).sum::<f64>() / horizon as f64
            }
        })
        .collect();
    Ok(RankTable {
        strategies: scores.iter().map(|(n, _)| n.clone()).collect(),
        per_horizon,
        average,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    pub significant: bool,
}

/// Significance level used by [`anova_oneway`].
pub const ANOVA_ALPHA: f64 = 0.05;

/// One-way analysis of variance across `groups`.
///
/// Zero within-group variance gives `F = +∞` (p = 0) when the group means
/// differ, and `F = 0` (p = 1) when every value is equal.
pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::invalid("ANOVA needs at least two groups"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("every ANOVA group needs at least two samples"));
    }
    if let Some(index) = groups.iter().flatten().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            name: "ANOVA sample".into(),
            index,
        });
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (mean - grand).powi(2);
        ss_within += g.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    let (f, p) = if ss_within == 0.0 {
        if ss_between > 0.0 {
            (f64::INFINITY, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        (f, f_sf(f, df_between as f64, df_within as f64))
    };
    Ok(AnovaResult {
        f,
        p,
        df_between,
        df_within,
        ss_between,
        ss_within,
        significant: p < ANOVA_ALPHA,
    })
}

/// Upper tail `P(F > f)` of the F distribution.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9.
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn mape_cases() {
        assert!((mape_h(&col(&[100.0, 200.0]), &col(&[110.0, 180.0]), 1).unwrap() - 10.0).abs() < 1e-9);
        assert!((mape_h(&col(&[100.0]), &col(&[0.0]), 1).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(mape_h(&col(&[3.0]), &col(&[3.0]), 1).unwrap(), 0.0);
        let err = mape_h(&col(&[1.0, 0.0]), &col(&[1.0, 1.0]), 1).unwrap_err();
        assert!(err.to_string().contains("series 1"));
    }

    #[test]
    fn smape_cases() {
        assert!((smape_h(&col(&[100.0]), &col(&[110.0]), 1).unwrap() - 4.761_904_761_9).abs() < 1e-9);
        assert!((smape_h(&col(&[1.0]), &col(&[0.0]), 1).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(smape_h(&col(&[2.0]), &col(&[2.0]), 1).unwrap(), 0.0);
        assert!(smape_h(&col(&[1.0]), &col(&[-1.0]), 1).is_err());
        let std = smape_h_with(&col(&[100.0]), &col(&[110.0]), 1, SmapeVariant::Standard).unwrap();
        assert!((std - 2.0 * 10.0 / 210.0 * 100.0).abs() < 1e-9);
    }

    #[test]
    fn mase_cases() {
        let ins = vec![vec![1.0, 2.0, 3.0, 4.0]];
        assert!((mase_h(&col(&[5.0]), &col(&[4.5]), &ins, 1).unwrap() - 0.5).abs() < 1e-9);
        assert!((mase_h(&col(&[5.0]), &col(&[6.0]), &ins, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mase_h(&col(&[5.0]), &col(&[5.0]), &ins, 1).unwrap(), 0.0);
        assert!(mase_h(&col(&[5.0]), &col(&[5.0]), &[vec![2.0, 2.0]], 1).is_err());
    }

    #[test]
    fn horizon_averages() {
        assert_eq!(average_over_horizons(&[1.0, 2.0, 3.0], 1, 1).unwrap(), 1.0);
        assert_eq!(average_over_horizons(&[1.0, 2.0, 3.0], 1, 3).unwrap(), 2.0);
        let v: Vec<f64> = (1..=18).map(f64::from).collect();
        assert_eq!(average_over_horizons(&v, 1, 12).unwrap(), 6.5);
        assert!(average_over_horizons(&v, 0, 3).is_err());
        assert!(average_over_horizons(&v, 4, 3).is_err());
        assert!(average_over_horizons(&v, 1, 19).is_err());
    }

    #[test]
    fn rank_cases() {
        let t = average_rank(&[("a".into(), vec![1.0; 18]), ("b".into(), vec![2.0; 18])]).unwrap();
        assert_eq!(t.average, vec![1.0, 2.0]);
        let t = average_rank(&[("a".into(), vec![1.0; 18]), ("b".into(), vec![1.0; 18])]).unwrap();
        assert_eq!(t.average, vec![1.5, 1.5]);
        let t = average_rank(&[
            ("a".into(), vec![1.0; 4]),
            ("b".into(), vec![2.0; 4]),
            ("c".into(), vec![3.0; 4]),
        ])
        .unwrap();
        assert_eq!(t.average, vec![1.0, 2.0, 3.0]);
        assert_eq!(rank_with_ties(&[2.0, 1.0, 2.0, 0.0]), vec![3.5, 2.0, 3.5, 1.0]);
    }

    #[test]
    fn anova_cases() {
        let r = anova_oneway(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]]).unwrap();
        assert!((r.ss_between - 1.5).abs() < 1e-12);
        assert!((r.ss_within - 4.0).abs() < 1e-12);
        assert!((r.f - 1.5).abs() < 1e-10);
        let same = anova_oneway(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(same.f.abs() < 1e-12 && !same.significant);
        let split = anova_oneway(&[vec![0.0; 3], vec![1.0; 3]]).unwrap();
        assert!(split.f.is_infinite() && split.significant);
        assert!(anova_oneway(&[vec![1.0, 2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    fn welch_free_t(a: &[f64], b: &[f64]) -> f64 {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(a), mean(b));
        let ss = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>()
            + b.iter().map(|x| (x - mb).powi(2)).sum::<f64>();
        let sp2 = ss / (a.len() + b.len() - 2) as f64;
        (ma - mb) / (sp2 * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt()
    }

    #[test]
    fn p_values_match_reference_distribution() {
        use statrs::distribution::{ContinuousCDF, FisherSnedecor};
        for &(d1, d2) in &[(1.0, 4.0), (2.0, 12.0), (5.0, 30.0), (3.0, 7.0)] {
            let dist = FisherSnedecor::new(d1, d2).unwrap();
            for &f in &[0.01, 0.5, 1.0, 1.5, 3.0, 10.0, 50.0] {
                let ours = f_sf(f, d1, d2);
                let reference = 1.0 - dist.cdf(f);
                assert!((ours - reference).abs() < 1e-8, "F({d1},{d2}) at {f}: {ours} vs {reference}");
            }
        }
    }

    proptest! {
        #[test]
        fn two_group_f_is_t_squared(
            a in prop::collection::vec(-10.0f64..10.0, 2..8),
            b in prop::collection::vec(-10.0f64..10.0, 2..8),
        ) {
            let r = anova_oneway(&[a.clone(), b.clone()]).unwrap();
            prop_assume!(r.ss_within > 1e-9);
            let t = welch_free_t(&a, &b);
            prop_assert!((r.f - t * t).abs() <= 1e-10 * (1.0 + r.f));
        }

        #[test]
        fn percentage_measures_scale_invariant(
            pairs in prop::collection::vec((1.0f64..100.0, 1.0f64..100.0), 1..6),
            c in 0.1f64..50.0,
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let f: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let ins: Vec<Vec<f64>> = a.iter().map(|&x| vec![x, x + 1.0, x - 0.5]).collect();
            let ca: Vec<f64> = a.iter().map(|x| x * c).collect();
            let cf: Vec<f64> = f.iter().map(|x| x * c).collect();
            let cins: Vec<Vec<f64>> = ins.iter().map(|s| s.iter().map(|x| x * c).collect()).collect();
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs());
            prop_assert!(close(mape_h(&col(&a), &col(&f), 1).unwrap(), mape_h(&col(&ca), &col(&cf), 1).unwrap()));
            prop_assert!(close(smape_h(&col(&a), &col(&f), 1).unwrap(), smape_h(&col(&ca), &col(&cf), 1).unwrap()));
            prop_assert!(close(mase_h(&col(&a), &col(&f), &ins, 1).unwrap(), mase_h(&col(&ca), &col(&cf), &cins, 1).unwrap()));
        }

        #[test]
        fn zero_iff_equal(a in 1.0f64..100.0, f in 1.0f64..100.0) {
            let ins = vec![vec![1.0, 2.0]];
            let m = [
                mape_h(&col(&[a]), &col(&[f]), 1).unwrap(),
                smape_h(&col(&[a]), &col(&[f]), 1).unwrap(),
                mase_h(&col(&[a]), &col(&[f]), &ins, 1).unwrap(),
            ];
            prop_assert_eq!(m.iter().all(|&v| v == 0.0), a == f);
        }

        #[test]
        fn ranks_are_permutations(scores in prop::collection::vec(prop::collection::vec(0u8..4, 5), 2..6)) {
            let named: Vec<(String, Vec<f64>)> = scores
                .iter()
                .enumerate()
                .map(|(i, v)| (i.to_string(), v.iter().map(|&x| f64::from(x)).collect()))
                .collect();
            let k = named.len() as f64;
            let t = average_rank(&named).unwrap();
            for r in &t.per_horizon {
                prop_assert!((r.iter().sum::<f64>() - k * (k + 1.0) / 2.0).abs() < 1e-12);
            }
        }
    }
}
