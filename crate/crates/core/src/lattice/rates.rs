//! Rate table keyed by hop direction, span and matched profile classes.
//!
//! Span-2 entries are indexed by `(departure class, arrival class)`, both
//! 1-based as in the profile lists of [`ProfileClass`](super::ProfileClass).
//! Windows are always read along the direction of the hop, so one 16-entry
//! table describes leftward and rightward hops alike; the table keeps a copy
//! per direction only so that biased dynamics can be expressed.
//!
//! Named aliases follow the one-site factorized monomial of the 5-site window
//! `(behind, source, middle, target, far)`:
//!
//! | alias | pair | window relative to `k` |
//! |-------|------|------------------------|
//! | c1 | (1,1) | `(k, k, k, k, k)` |
//! | c2 | (1,2) | `(k, k, k, k, k+1)` |
//! | c3 | (2,1) | `(k-1, k, k, k, k)` |
//! | c4 | (2,2) | `(k-1, k, k, k, k+1)` |
//! | d1 | (4,4) | `(k, k+1, k, k-1, k)` |
//! | d2 | (3,4) | `(k+1, k+1, k, k-1, k)` |
//! | d3 | (4,3) | `(k, k+1, k, k-1, k-1)` |
//! | d4 | (3,3) | `(k+1, k+1, k, k-1, k-1)` |
//!
//! The remaining eight pairs land one level below the source (`skip`) and
//! nearest-neighbour hops are `slide`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::moves::Direction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Alias {
    C1,
    C2,
    C3,
    C4,
    D1,
    D2,
    D3,
    D4,
}

pub const ALIASES: [Alias; 8] = [
    Alias::C1,
    Alias::C2,
    Alias::C3,
    Alias::C4,
    Alias::D1,
    Alias::D2,
    Alias::D3,
    Alias::D4,
];

/// `(departure, arrival)` pairs whose target sits one level below the source.
pub const SKIP_PAIRS: [(u8, u8); 8] = [
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 4),
    (3, 1),
    (3, 2),
    (4, 1),
    (4, 2),
];

impl Alias {
    /// 1-based `(departure, arrival)` class pair.
    pub fn pair(self) -> (u8, u8) {
        match self {
            Alias::C1 => (1, 1),
            Alias::C2 => (1, 2),
            Alias::C3 => (2, 1),
            Alias::C4 => (2, 2),
            Alias::D1 => (4, 4),
            Alias::D2 => (3, 4),
            Alias::D3 => (4, 3),
            Alias::D4 => (3, 3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Alias::C1 => "c1",
            Alias::C2 => "c2",
            Alias::C3 => "c3",
            Alias::C4 => "c4",
            Alias::D1 => "d1",
            Alias::D2 => "d2",
            Alias::D3 => "d3",
            Alias::D4 => "d4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ALIASES.into_iter().find(|a| a.name() == name)
    }

    pub fn is_climb(self) -> bool {
        matches!(self, Alias::C1 | Alias::C2 | Alias::C3 | Alias::C4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalRates {
    /// `span2[departure - 1][arrival - 1]`.
    pub span2: [[f64; 4]; 4],
    pub span1: f64,
}

impl DirectionalRates {
    pub fn uniform(rate: f64) -> Self {
        Self { span2: [[rate; 4]; 4], span1: rate }
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.span2.iter().flatten().copied().chain(std::iter::once(self.span1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Map<String, Value>", into = "Map<String, Value>")]
pub struct RateTable {
    pub right: DirectionalRates,
    pub left: DirectionalRates,
}

impl Default for RateTable {
    fn default() -> Self {
        Self::unit()
    }
}

impl RateTable {
    pub fn uniform(rate: f64) -> Self {
        let d = DirectionalRates::uniform(rate);
        Self { right: d, left: d }
    }

    /// Every entry 1.
    pub fn unit() -> Self {
        Self::uniform(1.0)
    }

    pub fn zero() -> Self {
        Self::uniform(0.0)
    }

    /// Mirror-symmetric table from the climb/descend aliases plus a common
    /// skip rate and the slide rate.
    pub fn from_coefficients(c: [f64; 4], d: [f64; 4], skip: f64, slide: f64) -> Self {
        let mut t = Self::uniform(skip);
        t.set_span1(slide);
        for (alias, rate) in ALIASES.into_iter().zip(c.into_iter().chain(d)) {
            t.set_alias(alias, rate);
        }
        t
    }

    pub fn direction(&self, dir: Direction) -> &DirectionalRates {
        match dir {
            Direction::Right => &self.right,
            Direction::Left => &self.left,
        }
    }

    pub fn direction_mut(&mut self, dir: Direction) -> &mut DirectionalRates {
        match dir {
            Direction::Right => &mut self.right,
            Direction::Left => &mut self.left,
        }
    }

    /// Rate for a span-2 hop with 1-based classes.
    pub fn span2(&self, dir: Direction, departure: u8, arrival: u8) -> f64 {
        self.direction(dir).span2[usize::from(departure) - 1][usize::from(arrival) - 1]
    }

    pub fn span1(&self, dir: Direction) -> f64 {
        self.direction(dir).span1
    }

    pub fn set_span2(&mut self, departure: u8, arrival: u8, rate: f64) {
        for dir in [Direction::Right, Direction::Left] {
            self.direction_mut(dir).span2[usize::from(departure) - 1][usize::from(arrival) - 1] =
                rate;
        }
    }

    pub fn set_span1(&mut self, rate: f64) {
        self.right.span1 = rate;
        self.left.span1 = rate;
    }

    pub fn set_alias(&mut self, alias: Alias, rate: f64) {
        let (dep, arr) = alias.pair();
        self.set_span2(dep, arr, rate);
    }

    /// Alias value, averaged over the two hop directions.
    pub fn alias(&self, alias: Alias) -> f64 {
        let (dep, arr) = alias.pair();
        0.5 * (self.span2(Direction::Right, dep, arr) + self.span2(Direction::Left, dep, arr))
    }

    pub fn climb(&self) -> [f64; 4] {
        [Alias::C1, Alias::C2, Alias::C3, Alias::C4].map(|a| self.alias(a))
    }

    pub fn descend(&self) -> [f64; 4] {
        [Alias::D1, Alias::D2, Alias::D3, Alias::D4].map(|a| self.alias(a))
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        self.left == self.right
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |d: &DirectionalRates| DirectionalRates {
            span2: d.span2.map(|row| row.map(|r| r * factor)),
            span1: d.span1 * factor,
        };
        Self { right: scale(&self.right), left: scale(&self.left) }
    }

    pub fn validate(&self) -> Result<()> {
        match self.right.values().chain(self.left.values()).find(|r| !r.is_finite() || *r < 0.0) {
            Some(bad) => Err(Error::RateTable(format!("rate {bad} is not finite and nonnegative"))),
            None => Ok(()),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let map: Map<String, Value> = serde_json::from_str(s)?;
        Self::try_from(map)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&Map::from(*self)).expect("rate table serializes")
    }

    fn document(&self) -> BTreeMap<String, f64> {
        let mut doc = BTreeMap::new();
        let mut emit = |prefix: &str, d: &DirectionalRates| {
            for dep in 1..=4u8 {
                for arr in 1..=4u8 {
                    doc.insert(
                        format!("{prefix}span2.d{dep}.a{arr}"),
                        d.span2[usize::from(dep) - 1][usize::from(arr) - 1],
                    );
                }
            }
            doc.insert(format!("{prefix}span1"), d.span1);
        };
        if self.is_mirror_symmetric() {
            emit("", &self.right);
        } else {
            emit("right.", &self.right);
            emit("left.", &self.left);
        }
        doc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Entry {
    Span2(u8, u8),
    Span1,
}

fn parse_entry(key: &str) -> Option<Entry> {
    if key == "span1" {
        return Some(Entry::Span1);
    }
    let rest = key.strip_prefix("span2.d")?;
    let (dep, arr) = rest.split_once(".a")?;
    let dep: u8 = dep.parse().ok()?;
    let arr: u8 = arr.parse().ok()?;
    ((1..=4).contains(&dep) && (1..=4).contains(&arr) && rest.len() == 4)
        .then_some(Entry::Span2(dep, arr))
}

fn rate_value(key: &str, v: &Value) -> Result<f64> {
    let r = v
        .as_f64()
        .ok_or_else(|| Error::RateTable(format!("{key:?} must be a number, got {v}")))?;
    if !r.is_finite() || r < 0.0 {
        return Err(Error::RateTable(format!("{key:?} = {r} is not a nonnegative rate")));
    }
    Ok(r)
}

impl TryFrom<Map<String, Value>> for RateTable {
    type Error = Error;

    /// Keys are applied in four passes: `preset`, unprefixed `span2.d<i>.a<j>`
    /// and `span1`, the aliases, then `left.`/`right.` prefixed entries.
    fn try_from(map: Map<String, Value>) -> Result<Self> {
        let mut table = match map.get("preset") {
            None => RateTable::unit(),
            Some(Value::String(s)) if s == "unit" => RateTable::unit(),
            Some(Value::String(s)) if s == "zero" => RateTable::zero(),
            Some(other) => {
                return Err(Error::RateTable(format!(
                    "preset must be \"unit\" or \"zero\", got {other}"
                )))
            }
        };

        let mut both = Vec::new();
        let mut aliases = Vec::new();
        let mut directed = Vec::new();
        for (key, value) in &map {
            if key == "preset" {
                continue;
            }
            if let Some(entry) = parse_entry(key) {
                both.push((entry, rate_value(key, value)?));
            } else if let Some(alias) = Alias::from_name(key) {
                let (dep, arr) = alias.pair();
                aliases.push((vec![Entry::Span2(dep, arr)], key, rate_value(key, value)?));
            } else if key == "skip" {
                let entries = SKIP_PAIRS.iter().map(|&(d, a)| Entry::Span2(d, a)).collect();
                aliases.push((entries, key, rate_value(key, value)?));
            } else if key == "slide" {
                aliases.push((vec![Entry::Span1], key, rate_value(key, value)?));
            } else if let Some((dir, entry)) = key
                .strip_prefix("right.")
                .map(|k| (Direction::Right, k))
                .or_else(|| key.strip_prefix("left.").map(|k| (Direction::Left, k)))
                .and_then(|(dir, k)| parse_entry(k).map(|e| (dir, e)))
            {
                directed.push((dir, entry, rate_value(key, value)?));
            } else {
                return Err(Error::RateTable(format!("unknown key {key:?}")));
            }
        }

        let set = |t: &mut RateTable, dir: Option<Direction>, entry: Entry, rate: f64| {
            let dirs = match dir {
                Some(d) => vec![d],
                None => vec![Direction::Right, Direction::Left],
            };
            for d in dirs {
                let rates = t.direction_mut(d);
                match entry {
                    Entry::Span2(dep, arr) => {
                        rates.span2[usize::from(dep) - 1][usize::from(arr) - 1] = rate
                    }
                    Entry::Span1 => rates.span1 = rate,
                }
            }
        };

        for &(entry, rate) in &both {
            set(&mut table, None, entry, rate);
        }
        for (entries, key, rate) in aliases {
            if let Some((clash, _)) = both.iter().find(|(e, _)| entries.contains(e)) {
                return Err(Error::RateTable(format!(
                    "alias {key:?} and explicit entry {clash:?} set the same rate"
                )));
            }
            for entry in entries {
                set(&mut table, None, entry, rate);
            }
        }
        for (dir, entry, rate) in directed {
            set(&mut table, Some(dir), entry, rate);
        }
        Ok(table)
    }
}

impl From<RateTable> for Map<String, Value> {
    fn from(t: RateTable) -> Self {
        t.document().into_iter().map(|(k, v)| (k, Value::from(v))).collect()
    }
}
