use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[r_inner, r_outer]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialMesh {
    r_inner: f64,
    r_outer: f64,
    n_nodes: usize,
    h: f64,
}

impl RadialMesh {
    /// Builds the mesh with spacing `h`. The span must be an integer
    /// multiple (at least 2) of `h`, up to rounding of the division.
    pub fn new(r_inner: f64, r_outer: f64, h: f64) -> Result<Self> {
        if !(r_inner.is_finite() && r_outer.is_finite() && h.is_finite()) {
            return Err(Error::InvalidMesh("non-finite mesh parameter".into()));
        }
        if h <= 0.0 {
            return Err(Error::InvalidMesh(format!("spacing must be positive, got h = {h}")));
        }
        if r_inner >= r_outer {
            return Err(Error::InvalidMesh(format!(
                "r_inner = {r_inner} must be below r_outer = {r_outer}"
            )));
        }
        let span = r_outer - r_inner;
        let cells = span / h;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::InvalidMesh(format!(
                "span {span} is not an integer multiple of h = {h} ({cells} cells)"
            )));
        }
        if rounded < 2.0 {
            return Err(Error::InvalidMesh(format!(
                "span {span} with h = {h} gives fewer than 3 nodes"
            )));
        }
        let n_cells = rounded as usize;
        Ok(Self {
            r_inner,
            r_outer,
            n_nodes: n_cells + 1,
            h: span / n_cells as f64,
        })
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coordinate of node `i`; the last node is pinned to `r_outer`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_nodes);
        if i + 1 == self.n_nodes {
            self.r_outer
        } else {
            self.r_inner + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_nodes).map(move |i| self.node(i))
    }

    /// Index of the node nearest to `r`, clamped to the mesh.
    pub fn nearest_index(&self, r: f64) -> usize {
        let x = ((r - self.r_inner) / self.h).round();
        x.clamp(0.0, (self.n_nodes - 1) as f64) as usize
    }

    /// Index range of nodes with coordinate in `[lo, hi]`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let tol = 1e-9 * self.h;
        let start = ((lo - self.r_inner) / self.h - 1e-9).ceil().max(0.0) as usize;
        let mut end = ((hi - self.r_inner) / self.h + 1e-9).floor() as isize + 1;
        end = end.clamp(0, self.n_nodes as isize);
        let mut start = start.min(self.n_nodes);
        while start < end as usize && self.node(start) < lo - tol {
            start += 1;
        }
        start..(end as usize).max(start)
    }

    /// Linear interpolation of nodal `values` at radius `r` (clamped).
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        debug_assert_eq!(values.len(), self.n_nodes);
        let x = ((r - self.r_inner) / self.h).clamp(0.0, (self.n_nodes - 1) as f64);
        let i = (x.floor() as usize).min(self.n_nodes - 2);
        let w = x - i as f64;
        if w == 0.0 {
            values[i]
        } else {
            (1.0 - w) * values[i] + w * values[i + 1]
        }
    }
}
