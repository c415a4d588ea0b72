use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// True iff every height is nonnegative and every periodic neighbour pair
/// differs by at most one.
pub fn is_restricted(heights: &[i64]) -> bool {
    let n = heights.len();
    if n == 0 {
        return false;
    }
    heights.iter().all(|&h| h >= 0)
        && (0..n).all(|i| (heights[(i + 1) % n] - heights[i]).abs() <= 1)
}

pub(crate) fn is_restricted_u32(heights: &[u32]) -> bool {
    let n = heights.len();
    n > 0 && (0..n).all(|i| heights[(i + 1) % n].abs_diff(heights[i]) <= 1)
}

/// Particle count per site on a periodic ring; always restricted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct HeightConfig {
    heights: Vec<u32>,
}

impl HeightConfig {
    pub fn new(heights: Vec<u32>) -> Result<Self> {
        if heights.is_empty() {
            return Err(Error::InvalidConfig("a lattice needs at least one site".into()));
        }
        if !is_restricted_u32(&heights) {
            return Err(Error::InvalidConfig(format!(
                "{} violates |h(i+1) - h(i)| <= 1",
                Self { heights }
            )));
        }
        Ok(Self { heights })
    }

    pub(crate) fn from_vec_unchecked(heights: Vec<u32>) -> Self {
        debug_assert!(is_restricted_u32(&heights));
        Self { heights }
    }

    /// `n` sites each holding `per_site` particles.
    pub fn flat(n: usize, per_site: u32) -> Self {
        assert!(n > 0, "flat configuration needs n >= 1");
        Self { heights: vec![per_site; n] }
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    pub fn into_heights(self) -> Vec<u32> {
        self.heights
    }

    pub fn n(&self) -> usize {
        self.heights.len()
    }

    pub fn total(&self) -> u64 {
        self.heights.iter().map(|&h| u64::from(h)).sum()
    }

    pub fn height(&self, site: usize) -> u32 {
        self.heights[site % self.heights.len()]
    }

    /// Site `i` maps to site `-i mod n`.
    pub fn mirrored(&self) -> Self {
        let n = self.n();
        Self { heights: (0..n).map(|i| self.heights[(n - i) % n]).collect() }
    }

    /// Site `i` maps to site `i + by mod n`.
    pub fn shifted(&self, by: usize) -> Self {
        let n = self.n();
        let mut heights = vec![0; n];
        for (i, &h) in self.heights.iter().enumerate() {
            heights[(i + by) % n] = h;
        }
        Self { heights }
    }

    pub fn mean_height(&self) -> f64 {
        self.total() as f64 / self.n() as f64
    }

    /// Spatial variance of the heights.
    pub fn width_sq(&self) -> f64 {
        let mean = self.mean_height();
        self.heights.iter().map(|&h| (f64::from(h) - mean).powi(2)).sum::<f64>() / self.n() as f64
    }
}

impl TryFrom<Vec<u32>> for HeightConfig {
    type Error = Error;

    fn try_from(heights: Vec<u32>) -> Result<Self> {
        Self::new(heights)
    }
}

impl From<HeightConfig> for Vec<u32> {
    fn from(c: HeightConfig) -> Self {
        c.heights
    }
}

impl fmt::Display for HeightConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, h) in self.heights.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{h}")?;
        }
        f.write_str(")")
    }
}

/// Accepts `(1,0,1,2)`, `1,0,1,2` or whitespace separated heights.
impl FromStr for HeightConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let inner = match (trimmed.strip_prefix('('), trimmed.strip_suffix(')')) {
            (Some(_), Some(_)) => &trimmed[1..trimmed.len() - 1],
            (None, None) => trimmed,
            _ => return Err(Error::InvalidConfig(format!("unbalanced parentheses in {s:?}"))),
        };
        let heights = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|e| Error::InvalidConfig(format!("height {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(heights)
    }
}
