use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::config::{is_restricted_u32, HeightConfig};
use super::rates::RateTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn sign(self) -> isize {
        match self {
            Direction::Left => -1,
            Direction::Right => 1,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

/// Local pattern that licenses a hop. Three-site windows are read along the
/// hop direction: `(behind, source, ahead)` for departures and
/// `(near, target, far)` for arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileClass {
    /// 1: `(h,h,h)`, 2: `(h-1,h,h)`, 3: `(h,h,h-1)`, 4: `(h-1,h,h-1)`.
    Departure(u8),
    /// 1: `(a,a,a)`, 2: `(a,a,a+1)`, 3: `(a+1,a,a)`, 4: `(a+1,a,a+1)`.
    Arrival(u8),
    /// `(h, h-1)` at source and target of a nearest-neighbour hop.
    NearestNeighborStep,
}

impl ProfileClass {
    pub fn departure(behind: u32, h: u32, ahead: u32) -> Option<Self> {
        let lower = h.checked_sub(1);
        let class = match (behind == h, ahead == h) {
            (true, true) => 1,
            (false, true) if Some(behind) == lower => 2,
            (true, false) if Some(ahead) == lower => 3,
            (false, false) if Some(behind) == lower && Some(ahead) == lower => 4,
            _ => return None,
        };
        Some(ProfileClass::Departure(class))
    }

    pub fn arrival(near: u32, a: u32, far: u32) -> Option<Self> {
        let class = match (near == a, far == a) {
            (true, true) => 1,
            (true, false) if far == a + 1 => 2,
            (false, true) if near == a + 1 => 3,
            (false, false) if near == a + 1 && far == a + 1 => 4,
            _ => return None,
        };
        Some(ProfileClass::Arrival(class))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MovePattern {
    Span2 { departure: u8, arrival: u8 },
    Span1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveEvent {
    pub source: usize,
    pub target: usize,
    /// Signed hop length in {-2, -1, 1, 2}.
    pub offset: i8,
    pub rate: f64,
    pub pattern: MovePattern,
}

impl MoveEvent {
    pub fn direction(&self) -> Direction {
        if self.offset < 0 {
            Direction::Left
        } else {
            Direction::Right
        }
    }

    pub fn classes(&self) -> (ProfileClass, Option<ProfileClass>) {
        match self.pattern {
            MovePattern::Span2 { departure, arrival } => (
                ProfileClass::Departure(departure),
                Some(ProfileClass::Arrival(arrival)),
            ),
            MovePattern::Span1 => (ProfileClass::NearestNeighborStep, None),
        }
    }
}

#[inline]
fn wrap(i: usize, d: isize, n: usize) -> usize {
    (i as isize + d).rem_euclid(n as isize) as usize
}

/// Restriction around `source` and `target` after the hop, assuming it held before.
#[inline]
fn locally_restricted_after(heights: &[u32], source: usize, target: usize) -> bool {
    let n = heights.len();
    let post = |i: usize| -> i64 {
        i64::from(heights[i]) - i64::from(i == source) + i64::from(i == target)
    };
    [source, target].into_iter().all(|c| {
        let left = wrap(c, -1, n);
        (post(c) - post(left)).abs() <= 1 && (post(wrap(c, 1, n)) - post(c)).abs() <= 1
    })
}

/// Appends every positive-rate move leaving `site`, ordered by offset
/// -2, -1, +1, +2.
pub fn site_moves<E: Extend<MoveEvent>>(
    heights: &[u32],
    site: usize,
    rates: &RateTable,
    out: &mut E,
) {
    let n = heights.len();
    let h = heights[site];
    if h == 0 {
        return;
    }
    let mut found: SmallVec<[MoveEvent; 4]> = SmallVec::new();
    for (dir, span) in [
        (Direction::Left, 2),
        (Direction::Left, 1),
        (Direction::Right, 1),
        (Direction::Right, 2),
    ] {
        let s = dir.sign();
        let target = wrap(site, s * span, n);
        if target == site {
            continue;
        }
        let (rate, pattern) = if span == 2 {
            let behind = heights[wrap(site, -s, n)];
            let ahead = heights[wrap(site, s, n)];
            let Some(ProfileClass::Departure(dep)) = ProfileClass::departure(behind, h, ahead)
            else {
                continue;
            };
            let far = heights[wrap(target, s, n)];
            let Some(ProfileClass::Arrival(arr)) =
                ProfileClass::arrival(ahead, heights[target], far)
            else {
                continue;
            };
            (
                rates.span2(dir, dep, arr),
                MovePattern::Span2 { departure: dep, arrival: arr },
            )
        } else {
            if heights[target] + 1 != h {
                continue;
            }
            (rates.span1(dir), MovePattern::Span1)
        };
        if rate > 0.0 && locally_restricted_after(heights, site, target) {
            found.push(MoveEvent {
                source: site,
                target,
                offset: (s * span) as i8,
                rate,
                pattern,
            });
        }
    }
    out.extend(found);
}

/// Every legal move of `config` with positive rate, by source then offset.
pub fn list_moves(config: &HeightConfig, rates: &RateTable) -> Vec<MoveEvent> {
    let heights = config.heights();
    let mut moves = Vec::new();
    for site in 0..heights.len() {
        site_moves(heights, site, rates, &mut moves);
    }
    moves
}

pub fn apply_move(config: &HeightConfig, mv: &MoveEvent) -> Result<HeightConfig> {
    let n = config.n();
    let invalid = |reason: &str| Error::InvalidMove {
        source_site: mv.source,
        target_site: mv.target,
        reason: reason.to_string(),
    };
    if mv.source >= n || mv.target >= n {
        return Err(invalid("site index out of range"));
    }
    let mut heights = config.heights().to_vec();
    heights[mv.source] = heights[mv.source]
        .checked_sub(1)
        .ok_or_else(|| invalid("source column is empty"))?;
    heights[mv.target] += 1;
    if !is_restricted_u32(&heights) {
        return Err(invalid("result violates the restriction"));
    }
    Ok(HeightConfig::from_vec_unchecked(heights))
}
