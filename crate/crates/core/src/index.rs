//! Uniform-cell spatial hash over a `PointSet` for radius and nearest queries.

use std::collections::HashMap;

use crate::geometry::{dist, PointSet};

#[derive(Debug, Clone)]
pub(crate) struct CellIndex {
    dim: usize,
    cell: f64,
    cells: HashMap<Box<[i64]>, Vec<usize>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl CellIndex {
    pub(crate) fn new(points: &PointSet, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let dim = points.dim();
        let mut cells: HashMap<Box<[i64]>, Vec<usize>> = HashMap::new();
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        for (i, p) in points.iter().enumerate() {
            let key: Box<[i64]> = p.iter().map(|c| (c / cell).floor() as i64).collect();
            for a in 0..dim {
                lo[a] = lo[a].min(key[a]);
                hi[a] = hi[a].max(key[a]);
            }
            cells.entry(key).or_default().push(i);
        }
        CellIndex { dim, cell, cells, lo, hi }
    }

    /// Calls `visit` with every point index whose cell meets the axis box of
    /// half-width `radius` around `center`. Callers filter by exact distance.
    pub(crate) fn for_each_candidate(&self, center: &[f64], radius: f64, mut visit: impl FnMut(usize)) {
        let from: Vec<i64> = (0..self.dim)
            .map(|a| (((center[a] - radius) / self.cell).floor() as i64).max(self.lo[a]))
            .collect();
        let to: Vec<i64> = (0..self.dim)
            .map(|a| (((center[a] + radius) / self.cell).floor() as i64).min(self.hi[a]))
            .collect();
        if from.iter().zip(&to).any(|(f, t)| f > t) {
            return;
        }
        let mut key = from.clone();
        loop {
            if let Some(ids) = self.cells.get(&key[..]) {
                ids.iter().copied().for_each(&mut visit);
            }
            if !advance(&mut key, &from, &to) {
                break;
            }
        }
    }

    /// Indices of points within `radius` (inclusive) of `center`, ascending.
    #[cfg(test)]
    pub(crate) fn within(&self, points: &PointSet, center: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_candidate(center, radius, |i| {
            if dist(points.point(i), center) <= radius {
                out.push(i);
            }
        });
        out.sort_unstable();
        out
    }

    /// Nearest point to `center`; ties go to the lowest index.
    pub(crate) fn nearest(&self, points: &PointSet, center: &[f64]) -> Option<(usize, f64)> {
        if self.cells.is_empty() {
            return None;
        }
        let home: Vec<i64> = center.iter().map(|c| (c / self.cell).floor() as i64).collect();
        let max_ring = (0..self.dim)
            .map(|a| (home[a] - self.lo[a]).abs().max((self.hi[a] - home[a]).abs()))
            .max()
            .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=max_ring {
            let from: Vec<i64> = home.iter().map(|h| h - ring).collect();
            let to: Vec<i64> = home.iter().map(|h| h + ring).collect();
            let mut key = from.clone();
            loop {
                let on_shell = key.iter().zip(&home).any(|(k, h)| (k - h).abs() == ring);
                if on_shell {
                    if let Some(ids) = self.cells.get(&key[..]) {
                        for &i in ids {
                            let d = dist(points.point(i), center);
                            let better = match best {
                                None => true,
                                Some((bi, bd)) => d < bd || (d == bd && i < bi),
                            };
                            if better {
                                best = Some((i, d));
                            }
                        }
                    }
                }
                if !advance(&mut key, &from, &to) {
                    break;
                }
            }
            // Cells beyond this ring are at least `ring * cell` away.
            if let Some((_, d)) = best {
                if d < ring as f64 * self.cell {
                    break;
                }
            }
        }
        best
    }
}

fn advance(key: &mut [i64], from: &[i64], to: &[i64]) -> bool {
    for a in 0..key.len() {
        if key[a] < to[a] {
            key[a] += 1;
            return true;
        }
        key[a] = from[a];
    }
    false
}
