use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{apply_move, list_moves, RateTable, StateSpace};

/// Sparse rate matrix `a(k, h)`, row-major adjacency lists of off-diagonal
/// entries plus the diagonal that closes every row to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    diagonal: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    /// Off-diagonal entries of row `k`, sorted by column.
    pub fn row(&self, k: usize) -> &[(usize, f64)] {
        &self.rows[k]
    }

    pub fn diagonal(&self, k: usize) -> f64 {
        self.diagonal[k]
    }

    pub fn entry(&self, k: usize, h: usize) -> f64 {
        if k == h {
            return self.diagonal[k];
        }
        self.rows[k]
            .binary_search_by_key(&h, |&(c, _)| c)
            .map_or(0.0, |i| self.rows[k][i].1)
    }

    pub fn row_sum(&self, k: usize) -> f64 {
        self.rows[k].iter().map(|&(_, r)| r).sum::<f64>() + self.diagonal[k]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() + self.dimension()
    }

    /// Largest total exit rate `-a(k,k)`.
    pub fn max_exit_rate(&self) -> f64 {
        self.diagonal.iter().map(|d| -d).fold(0.0, f64::max)
    }

    /// `out_h = sum_k p_k a(k, h)`.
    pub fn apply_forward(&self, p: &[f64], out: &mut [f64]) {
        for (o, (pi, d)) in out.iter_mut().zip(p.iter().zip(&self.diagonal)) {
            *o = pi * d;
        }
        for (k, row) in self.rows.iter().enumerate() {
            let pk = p[k];
            if pk == 0.0 {
                continue;
            }
            for &(h, rate) in row {
                out[h] += pk * rate;
            }
        }
    }

    /// All entries including the diagonal as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(k, row)| {
            let mut entries: Vec<(usize, usize, f64)> =
                row.iter().map(|&(h, r)| (k, h, r)).collect();
            let pos = entries.partition_point(|&(_, h, _)| h < k);
            entries.insert(pos, (k, k, self.diagonal[k]));
            entries
        })
    }
}

pub fn build_generator(space: &StateSpace, rates: &RateTable) -> Result<GeneratorMatrix> {
    rates.validate()?;
    if space.is_empty() {
        return Err(Error::InvalidConfig("empty state space".into()));
    }
    let rows: Vec<Vec<(usize, f64)>> = space
        .configs()
        .par_iter()
        .enumerate()
        .map(|(k, config)| -> Result<Vec<(usize, f64)>> {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for mv in list_moves(config, rates) {
                let next = apply_move(config, &mv)?;
                let h = space.index_of(&next).ok_or_else(|| {
                    Error::InvalidConfig(format!("{next} reached from {config} is not in the space"))
                })?;
                debug_assert_ne!(h, k);
                row.push((h, mv.rate));
            }
            row.sort_by_key(|&(h, _)| h);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (h, r) in row {
                match merged.last_mut() {
                    Some((last, acc)) if *last == h => *acc += r,
                    _ => merged.push((h, r)),
                }
            }
            Ok(merged)
        })
        .collect::<Result<_>>()?;
    let diagonal = rows.iter().map(|row| -row.iter().map(|&(_, r)| r).sum::<f64>()).collect();
    Ok(GeneratorMatrix { rows, diagonal })
}
