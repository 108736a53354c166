//! Sparse list of unordered node pairs with a geometric coefficient, the
//! common structure behind every double-integral objective the solvers touch.

use rayon::prelude::*;

use crate::grid::{self, Grid};
use crate::numerics::KahanSum;

const CHUNK: usize = 1 << 15;

pub(crate) struct PairTable {
    a: Vec<u32>,
    b: Vec<u32>,
    w: Vec<f64>,
}

impl PairTable {
    /// Edge list with every weight multiplied by `scale`.
    pub fn into_edges(self, scale: f64) -> super::graph_tv::Edges {
        super::graph_tv::Edges {
            a: self.a,
            b: self.b,
            w: self.w.into_iter().map(|w| w * scale).collect(),
        }
    }

    /// All pairs `i < j` with `|x_i − x_j| ≤ cutoff` and non-zero `weight(x, y, d)`.
    pub fn build<F>(grid: &Grid, cutoff: Option<f64>, weight: F) -> Self
    where
        F: Fn(&[f64; 2], &[f64; 2], f64) -> f64,
    {
        let nodes = grid.nodes();
        let n = nodes.len();
        let (mut a, mut b, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..n {
            for j in i + 1..n {
                let d = grid::distance(&nodes[i], &nodes[j]);
                if let Some(c) = cutoff {
                    if d > c {
                        // 1D nodes are sorted, so nothing further is in range.
                        if grid.dim() == 1 {
                            break;
                        }
                        continue;
                    }
                }
                let c = weight(&nodes[i], &nodes[j], d);
                if c != 0.0 {
                    a.push(i as u32);
                    b.push(j as u32);
                    w.push(c);
                }
            }
        }
        PairTable { a, b, w }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    /// Deterministic chunked sum of `term(w, u_a − u_b)` over all pairs.
    pub fn sum<F>(&self, v: &[f64], term: F) -> f64
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let partial: Vec<f64> = (0..self.len())
            .into_par_iter()
            .step_by(CHUNK)
            .map(|start| {
                let end = (start + CHUNK).min(self.len());
                let mut acc = KahanSum::new();
                for e in start..end {
                    let d = v[self.a[e] as usize] - v[self.b[e] as usize];
                    acc.add(term(self.w[e], d));
                }
                acc.value()
            })
            .collect();
        partial.into_iter().collect::<KahanSum>().value()
    }

    /// Largest `term(w, u_a − u_b)` and the pair attaining it (first on ties).
    pub fn argmax<F>(&self, v: &[f64], term: F) -> Option<(f64, usize, usize, f64)>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut best: Option<(f64, usize, usize, f64)> = None;
        for e in 0..self.len() {
            let (i, j) = (self.a[e] as usize, self.b[e] as usize);
            let t = term(self.w[e], v[i] - v[j]);
            if best.map_or(true, |(m, ..)| t > m) {
                best = Some((t, i, j, self.w[e]));
            }
        }
        best
    }

    /// Adds `scale·dterm(w, u_a − u_b)` to `g_a` and subtracts it from `g_b`.
    pub fn accumulate_grad<F>(&self, v: &[f64], scale: f64, g: &mut [f64], dterm: F)
    where
        F: Fn(f64, f64) -> f64,
    {
        for e in 0..self.len() {
            let (i, j) = (self.a[e] as usize, self.b[e] as usize);
            let s = scale * dterm(self.w[e], v[i] - v[j]);
            g[i] += s;
            g[j] -= s;
        }
    }
}

pub(crate) fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
