//! Benchmark series: the Logistic map, the Mackey–Glass delay equation, and
//! CSV ingestion for real datasets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub phi1: f64,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MackeyGlassConfig {
    /// Constant history value, also the value at t = 0.
    pub phi1: f64,
    /// Delay in time units.
    pub tau: usize,
    pub length: usize,
    pub dt: f64,
    /// Unit-spaced samples dropped before collection starts.
    pub burn_in: usize,
}

impl MackeyGlassConfig {
    pub fn new(phi1: f64, tau: usize, length: usize) -> Self {
        Self {
            phi1,
            tau,
            length,
            dt: 0.1,
            burn_in: 100,
        }
    }

    fn steps_per_unit(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() || self.dt > 1.0 {
            return Err(Error::invalid(format!("dt must be in (0, 1], got {}", self.dt)));
        }
        let steps = (1.0 / self.dt).round();
        if (steps * self.dt - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "dt = {} does not divide the unit sampling interval",
                self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// Iterates `φ_t = 4 φ_{t−1} (1 − φ_{t−1})` from `phi1`.
pub fn gen_logistic<T: Scalar>(cfg: &LogisticConfig) -> Result<TimeSeries<T>> {
    if !(cfg.phi1 > 0.0 && cfg.phi1 < 1.0) {
        return Err(Error::invalid(format!(
            "logistic phi1 must lie strictly inside (0, 1), got {}",
            cfg.phi1
        )));
    }
    if cfg.length == 0 {
        return Err(Error::invalid("length must be positive"));
    }
    let four = T::lit(4.0);
    let mut values = Vec::with_capacity(cfg.length);
    let mut x = T::lit(cfg.phi1);
    values.push(x);
    for _ in 1..cfg.length {
        x = four * x * (T::one() - x);
        values.push(x);
    }
    TimeSeries::new(format!("logistic-phi{}-n{}", cfg.phi1, cfg.length), values)
}

#[inline]
fn mackey_glass_rhs<T: Scalar>(x: T, delayed: T) -> T {
    T::lit(0.2) * delayed / (T::one() + delayed.powi(10)) - T::lit(0.1) * x
}

/// Integrates the Mackey–Glass equation with classical RK4 and samples it at
/// unit spacing. Delayed values at half steps fall between stored grid
/// points and are taken from the cubic Hermite interpolant built from the
/// stored values and slopes; for t ≤ 0 the history is the constant `phi1`.
pub fn gen_mackey_glass<T: Scalar>(cfg: &MackeyGlassConfig) -> Result<TimeSeries<T>> {
    let spu = cfg.steps_per_unit()?;
    if cfg.tau == 0 {
        return Err(Error::invalid("tau must be at least 1"));
    }
    if cfg.length == 0 {
        return Err(Error::invalid("length must be positive"));
    }
    if !(cfg.phi1 > 0.0) || !cfg.phi1.is_finite() {
        return Err(Error::invalid(format!("phi1 must be positive, got {}", cfg.phi1)));
    }
    let phi1 = T::lit(cfg.phi1);
    let dt = T::lit(cfg.dt);
    let half_dt = dt * T::lit(0.5);
    let eighth_dt = dt * T::lit(0.125);
    let lag = cfg.tau * spu;
    let samples = cfg.burn_in + cfg.length;
    let total_steps = (samples - 1) * spu;

    // values and slopes on the grid t = k·dt
    let mut grid: Vec<T> = Vec::with_capacity(total_steps + 1);
    let mut slope: Vec<T> = Vec::with_capacity(total_steps + 1);
    grid.push(phi1);
    // (value, slope) of the solution at grid index k − lag; constant history
    // before t = 0 has zero slope
    let delayed = |grid: &[T], slope: &[T], k: usize| -> (T, T) {
        if k < lag {
            (phi1, T::zero())
        } else {
            (grid[k - lag], slope[k - lag])
        }
    };
    for k in 0..total_steps {
        let x = grid[k];
        let (d0, s0) = delayed(&grid, &slope, k);
        let k1 = mackey_glass_rhs(x, d0);
        slope.push(k1);
        let (d1, s1) = delayed(&grid, &slope, k + 1);
        let dmid = (d0 + d1) * T::lit(0.5) + eighth_dt * (s0 - s1);
        let k2 = mackey_glass_rhs(x + half_dt * k1, dmid);
        let k3 = mackey_glass_rhs(x + half_dt * k2, dmid);
        let k4 = mackey_glass_rhs(x + dt * k3, d1);
        let next = x + dt / T::lit(6.0) * (k1 + T::lit(2.0) * (k2 + k3) + k4);
        grid.push(next);
    }
    let values: Vec<T> = (cfg.burn_in..samples).map(|j| grid[j * spu]).collect();
    TimeSeries::new(
        format!("mackey-glass-phi{}-tau{}-n{}", cfg.phi1, cfg.tau, cfg.length),
        values,
    )
}

/// Table II of the benchmark: (logistic φ₁, Mackey–Glass φ₁, τ, sample size).
pub const SIMULATION_TABLE: [(f64, f64, usize, usize); 20] = [
    (0.100, 1.000, 15, 485),
    (0.125, 1.200, 15, 496),
    (0.150, 1.400, 15, 523),
    (0.175, 1.600, 15, 548),
    (0.200, 1.800, 15, 674),
    (0.225, 2.000, 15, 692),
    (0.260, 1.000, 16, 726),
    (0.275, 1.200, 16, 758),
    (0.300, 1.400, 16, 779),
    (0.325, 1.600, 16, 791),
    (0.350, 1.800, 16, 821),
    (0.375, 2.000, 16, 843),
    (0.400, 1.000, 17, 869),
    (0.425, 1.200, 17, 889),
    (0.450, 1.400, 17, 912),
    (0.475, 1.600, 17, 926),
    (0.510, 1.800, 17, 946),
    (0.525, 2.000, 17, 964),
    (0.550, 1.000, 18, 987),
    (0.575, 1.200, 18, 1002),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Logistic,
    MackeyGlass,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Logistic => "logistic",
            Generator::MackeyGlass => "mackey-glass",
        }
    }
}

/// Builds the simulated series of the given 1-based table rows, named
/// `<generator>-<row>`.
pub fn simulated_rows<T: Scalar>(generator: Generator, rows: &[usize]) -> Result<Vec<TimeSeries<T>>> {
    rows.iter()
        .map(|&row| {
            let (lphi, mphi, tau, length) = *SIMULATION_TABLE
                .get(row.wrapping_sub(1))
                .ok_or_else(|| Error::invalid(format!("table row {row} outside 1..=20")))?;
            let s = match generator {
                Generator::Logistic => gen_logistic::<T>(&LogisticConfig { phi1: lphi, length })?,
                Generator::MackeyGlass => {
                    gen_mackey_glass::<T>(&MackeyGlassConfig::new(mphi, tau, length))?
                }
            };
            TimeSeries::new(format!("{}-{row}", generator.name()), s.into_values())
        })
        .collect()
}

/// Resolves a preset name such as `logistic-20` or `mackey-glass-3`: the
/// first `n` rows of the simulation table.
pub fn preset<T: Scalar>(name: &str) -> Result<Vec<TimeSeries<T>>> {
    let (generator, count) = if let Some(n) = name.strip_prefix("logistic-") {
        (Generator::Logistic, n)
    } else if let Some(n) = name.strip_prefix("mackey-glass-") {
        (Generator::MackeyGlass, n)
    } else {
        return Err(Error::Config(format!("unknown preset `{name}`")));
    };
    let count: usize = count
        .parse()
        .map_err(|_| Error::Config(format!("unknown preset `{name}`")))?;
    if count == 0 || count > SIMULATION_TABLE.len() {
        return Err(Error::Config(format!(
            "preset `{name}` must select 1..=20 series"
        )));
    }
    let rows: Vec<usize> = (1..=count).collect();
    simulated_rows(generator, &rows)
}

/// CSV layouts accepted by [`load_csv_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsvFormat {
    /// `series_id,t,value` rows, one group per id, header optional.
    Long,
    /// One column per series; a non-numeric first row names the columns.
    /// Shorter series are padded with trailing blank cells.
    Wide,
    /// Long when the header is `series_id,t,value`, wide otherwise.
    #[default]
    Auto,
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        row,
        column: column.to_string(),
        message: format!("non-numeric value `{}`", cell.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            message: format!("non-finite value `{}`", cell.trim()),
        });
    }
    Ok(v)
}

/// Reads every series of a CSV file. Rows are reported 1-based, counting the
/// header line when present.
pub fn load_csv_series<T: Scalar>(path: impl AsRef<Path>, format: CsvFormat) -> Result<Vec<TimeSeries<T>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv_series(&text, format)
}

pub fn parse_csv_series<T: Scalar>(text: &str, format: CsvFormat) -> Result<Vec<TimeSeries<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: i + 1,
            column: "-".into(),
            message: e.to_string(),
        })?;
        // skip fully blank lines
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        records.push((i + 1, rec));
    }
    if records.is_empty() {
        return Err(Error::Parse {
            row: 0,
            column: "-".into(),
            message: "empty file".into(),
        });
    }
    let first: Vec<String> = records[0].1.iter().map(|c| c.trim().to_string()).collect();
    let is_long_header = first.len() == 3
        && first[0].eq_ignore_ascii_case("series_id")
        && first[1].eq_ignore_ascii_case("t")
        && first[2].eq_ignore_ascii_case("value");
    let long = match format {
        CsvFormat::Long => true,
        CsvFormat::Wide => false,
        CsvFormat::Auto => is_long_header,
    };
    if long {
        parse_long(&records, is_long_header)
    } else {
        parse_wide(&records)
    }
}

fn parse_long<T: Scalar>(records: &[(usize, csv::StringRecord)], has_header: bool) -> Result<Vec<TimeSeries<T>>> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, Vec<T>> = Default::default();
    for (row, rec) in records.iter().skip(usize::from(has_header)) {
        if rec.len() != 3 {
            return Err(Error::Parse {
                row: *row,
                column: "-".into(),
                message: format!("expected 3 fields (series_id,t,value), found {}", rec.len()),
            });
        }
        let id = rec[0].trim().to_string();
        parse_cell(&rec[1], *row, "t")?;
        let v = parse_cell(&rec[2], *row, "value")?;
        let entry = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Vec::new()
        });
        entry.push(T::lit(v));
    }
    if order.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: "-".into(),
            message: "no data rows".into(),
        });
    }
    order
        .into_iter()
        .map(|id| {
            let values = groups.remove(&id).expect("grouped");
            TimeSeries::new(id, values)
        })
        .collect()
}

fn parse_wide<T: Scalar>(records: &[(usize, csv::StringRecord)]) -> Result<Vec<TimeSeries<T>>> {
    let first = &records[0].1;
    let header_is_names = first
        .iter()
        .any(|c| !c.trim().is_empty() && c.trim().parse::<f64>().is_err());
    let width = first.len();
    let names: Vec<String> = if header_is_names {
        first.iter().map(|c| c.trim().to_string()).collect()
    } else {
        (1..=width).map(|i| format!("s{i}")).collect()
    };
    let data = if header_is_names { &records[1..] } else { records };
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); width];
    let mut ended = vec![false; width];
    for (row, rec) in data {
        if rec.len() != width {
            return Err(Error::Parse {
                row: *row,
                column: "-".into(),
                message: format!("ragged row: expected {width} fields, found {}", rec.len()),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if cell.trim().is_empty() {
                ended[c] = true;
                continue;
            }
            if ended[c] {
                return Err(Error::Parse {
                    row: *row,
                    column: names[c].clone(),
                    message: "value after blank padding".into(),
                });
            }
            columns[c].push(T::lit(parse_cell(cell, *row, &names[c])?));
        }
    }
    names
        .into_iter()
        .zip(columns)
        .map(|(name, values)| {
            if values.is_empty() {
                Err(Error::Parse {
                    row: 1,
                    column: name,
                    message: "column has no values".into(),
                })
            } else {
                TimeSeries::new(name, values)
            }
        })
        .collect()
}

/// Writes series in long format (`series_id,t,value`, t starting at 1).
pub fn write_long_csv<T: Scalar>(path: impl AsRef<Path>, series: &[TimeSeries<T>]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    w.write_record(["series_id", "t", "value"])
        .map_err(|e| Error::io(path, e))?;
    for s in series {
        for (t, v) in s.values().iter().enumerate() {
            w.write_record([s.name().to_string(), (t + 1).to_string(), v.to_f64_lossy().to_string()])
                .map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_absorbing_path() {
        let s = gen_logistic::<f64>(&LogisticConfig { phi1: 0.5, length: 4 }).unwrap();
        assert_eq!(s.values(), &[0.5, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn logistic_hand_iterates() {
        let s = gen_logistic::<f64>(&LogisticConfig { phi1: 0.1, length: 3 }).unwrap();
        assert!((s.values()[1] - 0.36).abs() < 1e-15);
        assert!((s.values()[2] - 0.9216).abs() < 1e-15);
    }

    #[test]
    fn logistic_rejects_out_of_range_start() {
        for phi1 in [0.0, 1.0, -0.2, 1.5] {
            assert!(gen_logistic::<f64>(&LogisticConfig { phi1, length: 5 }).is_err());
        }
    }

    #[test]
    fn table_row_one_shape() {
        let s = &simulated_rows::<f64>(Generator::Logistic, &[1]).unwrap()[0];
        assert_eq!(s.len(), 485);
        assert_eq!(s.values()[0], 0.1);
        assert_eq!(s.name(), "logistic-1");
    }

    #[test]
    fn table_row_eighteen_shape() {
        let s = &simulated_rows::<f64>(Generator::MackeyGlass, &[18]).unwrap()[0];
        assert_eq!(s.len(), 964);
        assert!(s.values().iter().all(|v| *v > 0.0 && *v < 2.0));
    }

    #[test]
    fn mackey_glass_equilibrium() {
        for (tau, dt) in [(15, 0.1), (17, 0.05), (1, 0.5)] {
            let cfg = MackeyGlassConfig {
                dt,
                ..MackeyGlassConfig::new(1.0, tau, 50)
            };
            let s = gen_mackey_glass::<f64>(&cfg).unwrap();
            assert!(s.values().iter().all(|&v| (v - 1.0).abs() <= 1e-12));
        }
    }

    #[test]
    fn mackey_glass_first_step_matches_closed_form() {
        // While t < tau the delayed term is the constant history, so the
        // equation is linear with solution c/0.1 + (x0 - c/0.1) e^{-0.1 t}.
        let phi1: f64 = 1.2;
        let c = 0.2 * phi1 / (1.0 + phi1.powi(10));
        assert!(c - 0.1 * phi1 < 0.0);
        let cfg = MackeyGlassConfig {
            burn_in: 0,
            ..MackeyGlassConfig::new(phi1, 15, 10)
        };
        let s = gen_mackey_glass::<f64>(&cfg).unwrap();
        assert_eq!(s.values()[0], phi1);
        for (t, &v) in s.values().iter().enumerate() {
            let exact = c / 0.1 + (phi1 - c / 0.1) * (-0.1 * t as f64).exp();
            assert!((v - exact).abs() < 1e-10, "t={t}: {v} vs {exact}");
        }
        assert!(s.values()[1] < phi1);
    }

    #[test]
    fn mackey_glass_rejects_bad_dt() {
        for dt in [0.3, 0.0, -0.1, 2.0] {
            let cfg = MackeyGlassConfig {
                dt,
                ..MackeyGlassConfig::new(1.2, 17, 10)
            };
            assert!(gen_mackey_glass::<f64>(&cfg).is_err(), "dt={dt}");
        }
    }

    #[test]
    fn generators_are_reproducible() {
        let cfg = MackeyGlassConfig::new(1.2, 17, 200);
        let a = gen_mackey_glass::<f64>(&cfg).unwrap();
        let b = gen_mackey_glass::<f64>(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn long_csv_minimal() {
        let text = "series_id,t,value\na,1,1.0\na,2,2.0\nb,1,5\na,3,3\nb,2,6\nb,3,7\n";
        let s = parse_csv_series::<f64>(text, CsvFormat::Auto).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].name(), "a");
        assert_eq!(s[0].values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s[1].values(), &[5.0, 6.0, 7.0]);
    }

    #[test]
    fn wide_csv_with_trailing_blank() {
        let text = "s1,s2\n1,10\n2,20\n3,\n";
        let s = parse_csv_series::<f64>(text, CsvFormat::Auto).unwrap();
        assert_eq!(s.iter().map(TimeSeries::len).collect::<Vec<_>>(), vec![3, 2]);
        assert_eq!(s[1].name(), "s2");
    }

    #[test]
    fn malformed_cell_is_located() {
        let text = "s1,s2\n1,2\nabc,3\n";
        let err = parse_csv_series::<f64>(text, CsvFormat::Auto).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                row: 3,
                column: "s1".into(),
                message: "non-numeric value `abc`".into()
            }
        );
    }

    #[test]
    fn ragged_and_empty_files_fail() {
        assert!(parse_csv_series::<f64>("s1,s2\n1,2\n3\n", CsvFormat::Wide).is_err());
        assert!(parse_csv_series::<f64>("", CsvFormat::Auto).is_err());
        assert!(parse_csv_series::<f64>("s1,s2\n,1\n2,2\n", CsvFormat::Wide).is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(preset::<f64>("lorenz-3").is_err());
        assert!(preset::<f64>("logistic-21").is_err());
        assert_eq!(preset::<f64>("logistic-20").unwrap().len(), 20);
    }
}
