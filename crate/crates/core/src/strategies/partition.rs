use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Segmentation-point bits `p_1..p_{H−1}`: bit `i` set means the horizon is
/// cut between steps `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryMask(Vec<bool>);

impl BinaryMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![true; len])
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(format!("mask `{s}` must contain only 0 and 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// 1-based positions of the set bits.
    pub fn segmentation_points(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i + 1))
            .collect()
    }
}

impl fmt::Display for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Ordered segment lengths `(s_1, …, s_J)` covering a horizon of `H` steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HorizonPartition {
    segments: Vec<usize>,
    horizon: usize,
}

impl HorizonPartition {
    pub fn new(segments: Vec<usize>) -> Result<Self> {
        if segments.is_empty() || segments.contains(&0) {
            return Err(Error::invalid(format!(
                "partition segments must be nonempty and positive: {segments:?}"
            )));
        }
        let horizon = segments.iter().sum();
        Ok(Self { segments, horizon })
    }

    /// One segment of length `H`.
    pub fn mimo(horizon: usize) -> Result<Self> {
        Self::new(vec![horizon])
    }

    /// `H` segments of length one.
    pub fn direct(horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("horizon must be positive"));
        }
        Self::new(vec![1; horizon])
    }

    /// Blocks of `s`; when `s` does not divide `H` the last block holds the
    /// remaining `H mod s` steps.
    pub fn mismo(s: usize, horizon: usize) -> Result<Self> {
        if s == 0 || s > horizon {
            return Err(Error::invalid(format!(
                "MISMO block size {s} must lie in 1..={horizon}"
            )));
        }
        let mut segments = vec![s; horizon / s];
        if horizon % s != 0 {
            segments.push(horizon % s);
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[usize] {
        &self.segments
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Zero-based step offset at which each segment starts.
    pub fn starts(&self) -> Vec<usize> {
        self.segments
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect()
    }

    /// 1-based target offsets `prefix + 1 ..= prefix + s_j` of segment `j`.
    pub fn target_offsets(&self, j: usize) -> Vec<usize> {
        let start = self.starts()[j];
        (start + 1..=start + self.segments[j]).collect()
    }

    /// Inverse of [`decode_partition`].
    pub fn to_mask(&self) -> BinaryMask {
        let mut bits = vec![false; self.horizon - 1];
        for start in self.starts().into_iter().skip(1) {
            bits[start - 1] = true;
        }
        BinaryMask(bits)
    }
}

/// Turns segmentation bits into segment lengths: the gaps between
/// consecutive cut points, with boundaries at 0 and `H`.
pub fn decode_partition(mask: &BinaryMask, horizon: usize) -> Result<HorizonPartition> {
    if horizon == 0 || mask.len() + 1 != horizon {
        return Err(Error::ShapeMismatch {
            expected: format!("mask of length {}", horizon.saturating_sub(1)),
            got: mask.len().to_string(),
        });
    }
    let points = mask.segmentation_points();
    if points.is_empty() {
        return HorizonPartition::mimo(horizon);
    }
    let mut segments = Vec::with_capacity(points.len() + 1);
    let mut prev = 0;
    for &p in &points {
        segments.push(p - prev);
        prev = p;
    }
    segments.push(horizon - prev);
    HorizonPartition::new(segments)
}
