//! Log-spaced scale grid `t_j = 2^{-j/q}` discretizing `∫₀^∞ … dt/t`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::grid::Grid;

/// Smallest band-pass profile radius; the finest scale must resolve it at
/// the largest grid frequency.
const BAND_INNER: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    q: u32,
    j_min: i32,
    j_max: i32,
}

impl TimeGrid {
    /// Nodes `2^{-j/q}` for `j_min ≤ j ≤ j_max`.
    pub fn new(q: u32, j_min: i32, j_max: i32) -> Self {
        assert!(q >= 4, "time grid needs at least 4 nodes per octave, got {q}");
        assert!(j_min <= j_max, "empty time grid");
        Self { q, j_min, j_max }
    }

    /// Smallest node set of density `q` containing `[t_lo, t_hi]`.
    pub fn covering(t_lo: f64, t_hi: f64, q: u32) -> Self {
        let qf = q as f64;
        // small epsilon keeps exact powers of two on the grid
        let j_min = (-qf * t_hi.log2() + 1e-9).floor() as i32;
        let j_max = (-qf * t_lo.log2() - 1e-9).ceil() as i32;
        Self::new(q, j_min, j_max)
    }

    /// Scales from half the finest band `0.4/ξ_max` up to the box side, so
    /// every band-pass window around a grid frequency is fully sampled.
    pub fn for_grid(grid: &Grid, q: u32) -> Self {
        let t_lo = 0.5 * BAND_INNER / grid.max_frequency();
        Self::covering(t_lo, grid.side(), q)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Quadrature weight `ln 2 / q` attached to every node.
    pub fn delta(&self) -> f64 {
        LN_2 / self.q as f64
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn t(&self, j: i32) -> f64 {
        2f64.powf(-(j as f64) / self.q as f64)
    }

    /// Nodes in decreasing order of `t`.
    pub fn nodes(&self) -> Vec<f64> {
        self.index_range().map(|j| self.t(j)).collect()
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.j_min)
    }

    pub fn t_min(&self) -> f64 {
        self.t(self.j_max)
    }

    /// Nodes with `t < bound` (or `t ≤ bound` when `inclusive`).
    pub fn below(&self, bound: f64, inclusive: bool) -> Option<Self> {
        let first = self.index_range().find(|&j| {
            let t = self.t(j);
            if inclusive {
                t <= bound * (1.0 + 1e-12)
            } else {
                t < bound * (1.0 - 1e-12)
            }
        })?;
        Some(Self::new(self.q, first, self.j_max))
    }
}
