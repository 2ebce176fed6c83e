//! Closed subsets of the circle made of arcs with grid endpoints.
//!
//! A set is stored as two coverage masks on a `G`-grid: grid points and the
//! open edges `(k, k+1)` between them. Unions of closed arcs with grid
//! endpoints are exactly the masks in which every covered edge has both
//! endpoints covered, so the representation is unique.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactSet {
    points: Vec<bool>,
    edges: Vec<bool>,
}

/// Closed arc from grid index `start` through `start + len` (mod `G`);
/// `len = G` is the full circle and `len = 0` a single point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridArc {
    pub start: usize,
    pub len: usize,
}

impl CompactSet {
    pub fn empty(grid: usize) -> Self {
        Self {
            points: vec![false; grid],
            edges: vec![false; grid],
        }
    }

    pub fn full(grid: usize) -> Self {
        Self {
            points: vec![true; grid],
            edges: vec![true; grid],
        }
    }

    pub fn from_arcs(grid: usize, arcs: &[GridArc]) -> Self {
        let mut s = Self::empty(grid);
        for a in arcs {
            s.insert_arc(*a);
        }
        s
    }

    fn insert_arc(&mut self, a: GridArc) {
        let g = self.grid();
        for i in 0..=a.len.min(g) {
            self.points[(a.start + i) % g] = true;
        }
        for i in 0..a.len.min(g) {
            self.edges[(a.start + i) % g] = true;
        }
    }

    pub fn grid(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.points.iter().any(|&p| p)
    }

    pub fn is_full(&self) -> bool {
        self.points.iter().all(|&p| p) && self.edges.iter().all(|&e| e)
    }

    pub fn contains_point(&self, k: usize) -> bool {
        self.points[k % self.grid()]
    }

    /// Set difference with the open arc strictly between grid points `a` and
    /// `a + len` (mod `G`), going forward from `a`.
    pub fn remove_open_arc(&self, a: usize, len: usize) -> Self {
        let g = self.grid();
        let mut out = self.clone();
        for i in 0..len.min(g) {
            out.edges[(a + i) % g] = false;
        }
        for i in 1..len.min(g) {
            out.points[(a + i) % g] = false;
        }
        out
    }

    /// `self` is a subset of `other`.
    pub fn is_subset(&self, other: &Self) -> bool {
        self.points.iter().zip(&other.points).all(|(a, b)| !a || *b)
            && self.edges.iter().zip(&other.edges).all(|(a, b)| !a || *b)
    }

    /// Coverage in half-step positions: `2k` is point `k`, `2k+1` edge `k`.
    fn position(&self, p: usize) -> bool {
        if p.is_multiple_of(2) {
            self.points[p / 2]
        } else {
            self.edges[p / 2]
        }
    }

    /// Maximal arcs in increasing order of start index.
    pub fn arcs(&self) -> Vec<GridArc> {
        let g = self.grid();
        if self.is_full() {
            return vec![GridArc { start: 0, len: g }];
        }
        let n = 2 * g;
        let Some(hole) = (0..n).find(|&p| !self.position(p)) else {
            return vec![GridArc { start: 0, len: g }];
        };
        let mut arcs = Vec::new();
        let mut run_start: Option<usize> = None;
        for i in 1..=n {
            let p = (hole + i) % n;
            let covered = i < n && self.position(p);
            match (covered, run_start) {
                (true, None) => run_start = Some(p),
                (false, Some(s)) => {
                    let e = (p + n - 1) % n;
                    let len_half = (e + n - s) % n;
                    arcs.push(GridArc {
                        start: s / 2,
                        len: len_half / 2,
                    });
                    run_start = None;
                }
                _ => {}
            }
        }
        arcs.sort_by_key(|a| a.start);
        arcs
    }

    /// Arcs as `[start_index, end_index]` with `end_index = start + len`
    /// (unwrapped, so it may exceed `G - 1`).
    pub fn index_pairs(&self) -> Vec<[usize; 2]> {
        self.arcs().iter().map(|a| [a.start, a.start + a.len]).collect()
    }

    /// Total length, circumference 1.
    pub fn measure(&self) -> f64 {
        self.edges.iter().filter(|&&e| e).count() as f64 / self.grid() as f64
    }

    /// Distance (in half steps) from every half-step position to the set.
    fn distance_field(&self) -> Vec<usize> {
        let n = 2 * self.grid();
        let mut d = vec![usize::MAX; n];
        let Some(anchor) = (0..n).find(|&p| self.position(p)) else {
            return d;
        };
        let mut last = 0usize;
        for i in 0..n {
            let p = (anchor + i) % n;
            if self.position(p) {
                last = 0;
            } else {
                last += 1;
            }
            d[p] = last;
        }
        for i in 0..n {
            let p = (anchor + n - i) % n;
            if self.position(p) {
                last = 0;
            } else {
                last += 1;
            }
            d[p] = d[p].min(last);
        }
        d
    }

    /// `sup_{x in self} dist(x, other)`, circumference 1.
    pub fn excess_over(&self, other: &Self) -> Result<f64> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptySet);
        }
        if self.grid() != other.grid() {
            return Err(Error::InvalidParameter(format!(
                "compact sets live on different grids ({} vs {})",
                self.grid(),
                other.grid()
            )));
        }
        let d = other.distance_field();
        let sup = (0..2 * self.grid())
            .filter(|&p| self.position(p))
            .map(|p| d[p])
            .max()
            .unwrap_or(0);
        Ok(sup as f64 / (2 * self.grid()) as f64)
    }
}

/// `sup_{x in E} dist(x, K) + sup_{y in K} dist(y, E)` with arc-length
/// distance on a circle of circumference 1. Exact for unions of grid arcs:
/// the suprema sit at arc endpoints or at midpoints of gaps.
pub fn hausdorff_distance(e: &CompactSet, k: &CompactSet) -> Result<f64> {
    Ok(e.excess_over(k)? + k.excess_over(e)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(start: usize, len: usize) -> GridArc {
        GridArc { start, len }
    }

    #[test]
    fn arcs_roundtrip_and_merge() {
        let s = CompactSet::from_arcs(16, &[arc(2, 3), arc(5, 2), arc(13, 3)]);
        assert_eq!(s.arcs(), vec![arc(2, 5), arc(13, 3)]);
        let touching = CompactSet::from_arcs(16, &[arc(2, 1), arc(14, 4)]);
        assert_eq!(touching.arcs(), vec![arc(14, 5)]);
        assert_eq!(s.index_pairs(), vec![[2, 7], [13, 16]]);
        assert_eq!(CompactSet::full(8).arcs(), vec![arc(0, 8)]);
        assert!(CompactSet::empty(8).arcs().is_empty());
    }

    #[test]
    fn isolated_points_survive_removal() {
        let s = CompactSet::full(8).remove_open_arc(2, 3);
        assert!(s.contains_point(2) && s.contains_point(5));
        assert!(!s.contains_point(3) && !s.contains_point(4));
        assert_eq!(s.arcs(), vec![arc(5, 5)]);
        let p = CompactSet::from_arcs(8, &[arc(1, 2)]).remove_open_arc(0, 2);
        assert_eq!(p.arcs(), vec![arc(2, 1)]);
    }

    #[test]
    fn antipodal_points() {
        let e = CompactSet::from_arcs(16, &[arc(0, 0)]);
        let k = CompactSet::from_arcs(16, &[arc(8, 0)]);
        assert_eq!(hausdorff_distance(&e, &k).unwrap(), 1.0);
    }

    #[test]
    fn gap_midpoint_counts() {
        // K misses the open arc (0, 4); E is the whole circle.
        let k = CompactSet::full(16).remove_open_arc(0, 4);
        let e = CompactSet::full(16);
        assert_eq!(e.excess_over(&k).unwrap(), 2.0 / 16.0);
        assert_eq!(k.excess_over(&e).unwrap(), 0.0);
    }

    #[test]
    fn empty_is_rejected() {
        let e = CompactSet::empty(8);
        assert!(matches!(hausdorff_distance(&e, &CompactSet::full(8)), Err(Error::EmptySet)));
    }
}
