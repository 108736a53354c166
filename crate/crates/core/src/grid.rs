//! Cell-centred grids over intervals and rectangles, grid signals and the
//! elementary integrals every other module is built on.
//!
//! Nodes sit at cell centres, so two distinct nodes are at least one spacing
//! apart and singular kernels such as `|x − y|^{-(n+1)}` stay finite. Double
//! integrals drop the diagonal cells; the omitted measure is `O(h^n)`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, KahanSum};

/// A bounded interval or axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Rect { a1: f64, b1: f64, a2: f64, b2: f64 },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = Domain::Interval { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn rect(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        let d = Domain::Rect { a1, b1, a2, b2 };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo < hi;
        let valid = match *self {
            Domain::Interval { a, b } => ok(a, b),
            Domain::Rect { a1, b1, a2, b2 } => ok(a1, b1) && ok(a2, b2),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("{self:?}: need finite a < b per axis")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rect { .. } => 2,
        }
    }

    /// Lebesgue measure `|Ω|`.
    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rect { a1, b1, a2, b2 } => (b1 - a1) * (b2 - a2),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rect { a1, b1, a2, b2 } => (b1 - a1).hypot(b2 - a2),
        }
    }

    fn lower_corner(&self) -> [f64; 2] {
        match *self {
            Domain::Interval { a, .. } => [a, 0.0],
            Domain::Rect { a1, a2, .. } => [a1, a2],
        }
    }

    fn side_lengths(&self) -> [f64; 2] {
        match *self {
            Domain::Interval { a, b } => [b - a, 1.0],
            Domain::Rect { a1, b1, a2, b2 } => [b1 - a1, b2 - a2],
        }
    }
}

/// Uniform cell-centred grid with the same number of points on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    points: usize,
    spacing: [f64; 2],
}

impl Grid {
    pub fn new(domain: Domain, points_per_axis: usize) -> Result<Arc<Self>> {
        domain.validate()?;
        if points_per_axis == 0 {
            return Err(Error::InvalidDomain("points_per_axis must be positive".into()));
        }
        let sides = domain.side_lengths();
        let mut spacing = [sides[0] / points_per_axis as f64, 1.0];
        if domain.dim() == 2 {
            spacing[1] = sides[1] / points_per_axis as f64;
        }
        Ok(Arc::new(Self {
            domain,
            points: points_per_axis,
            spacing,
        }))
    }

    /// Shorthand for a 1D grid on `(a, b)`.
    pub fn interval(a: f64, b: f64, points: usize) -> Result<Arc<Self>> {
        Grid::new(Domain::interval(a, b)?, points)
    }

    /// Shorthand for a square 2D grid on `(a, b)²`.
    pub fn square(a: f64, b: f64, points_per_axis: usize) -> Result<Arc<Self>> {
        Grid::new(Domain::rect(a, b, a, b)?, points_per_axis)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spacing along axis 0 (and axis 1 in 2D; 1.0 in 1D).
    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    /// Spacing along the first axis.
    pub fn h(&self) -> f64 {
        self.spacing[0]
    }

    /// Quadrature weight of one cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        match self.dim() {
            1 => self.spacing[0],
            _ => self.spacing[0] * self.spacing[1],
        }
    }

    pub fn measure(&self) -> f64 {
        self.domain.measure()
    }

    /// Axis indices of a flat node index. 2D layout is row-major: `idx = i·n + j`.
    pub fn axis_index(&self, idx: usize) -> (usize, usize) {
        match self.dim() {
            1 => (idx, 0),
            _ => (idx / self.points, idx % self.points),
        }
    }

    /// Coordinates of node `idx` (second entry is 0 in 1D).
    pub fn node(&self, idx: usize) -> [f64; 2] {
        let lo = self.domain.lower_corner();
        let (i, j) = self.axis_index(idx);
        let x0 = lo[0] + (i as f64 + 0.5) * self.spacing[0];
        match self.dim() {
            1 => [x0, 0.0],
            _ => [x0, lo[1] + (j as f64 + 0.5) * self.spacing[1]],
        }
    }

    pub fn nodes(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    /// Cell-centre coordinates along one axis.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        let lo = self.domain.lower_corner();
        (0..self.points)
            .map(|i| lo[axis] + (i as f64 + 0.5) * self.spacing[axis])
            .collect()
    }
}

/// Euclidean distance between two points.
#[inline]
pub fn distance(x: &[f64; 2], y: &[f64; 2]) -> f64 {
    (x[0] - y[0]).hypot(x[1] - y[1])
}

/// A function sampled at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridSignal {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for GridSignal {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.values == other.values
    }
}

impl GridSignal {
    pub fn new(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidSignal(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("non-finite value at node {k}")));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn from_fn<F: Fn([f64; 2]) -> f64>(grid: &Arc<Grid>, f: F) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.node(k))).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridSignal) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_same_grid(&self, other: &GridSignal) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Same grid, new values (no finiteness check; internal use).
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &GridSignal, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &GridSignal) -> Result<Self> {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max u − min u`.
    pub fn oscillation(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    /// Constancy test with tolerance `rel_tol·(1 + ‖u‖_∞)` on the max deviation from the mean.
    pub fn is_constant(&self, rel_tol: f64) -> bool {
        let mean = compensated_sum(self.values.iter().copied()) / self.values.len() as f64;
        let dev = self.values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        dev <= rel_tol * (1.0 + self.max_abs())
    }
}

/// Clean/noisy training pairs sharing one grid.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    grid: Arc<Grid>,
    pairs: Vec<(GridSignal, GridSignal)>,
}

impl TrainingSet {
    pub fn new(pairs: Vec<(GridSignal, GridSignal)>) -> Result<Self> {
        let first = pairs
            .first()
            .ok_or_else(|| Error::param("training set needs at least one pair"))?;
        let grid = Arc::clone(first.0.grid());
        for (c, n) in &pairs {
            if **c.grid() != *grid || **n.grid() != *grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Self { grid, pairs })
    }

    pub fn single(clean: GridSignal, noisy: GridSignal) -> Result<Self> {
        Self::new(vec![(clean, noisy)])
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn pairs(&self) -> &[(GridSignal, GridSignal)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clean(&self) -> impl Iterator<Item = &GridSignal> {
        self.pairs.iter().map(|p| &p.0)
    }

    pub fn noisy(&self) -> impl Iterator<Item = &GridSignal> {
        self.pairs.iter().map(|p| &p.1)
    }
}

/// Midpoint rule for `∫_Ω u² dx`.
pub fn l2_norm_sq(u: &GridSignal) -> f64 {
    u.grid.cell_volume() * compensated_sum(u.values.iter().map(|v| v * v))
}

/// Midpoint rule for `∫_Ω u v dx`.
pub fn l2_inner(u: &GridSignal, v: &GridSignal) -> Result<f64> {
    u.check_same_grid(v)?;
    Ok(u.grid.cell_volume() * compensated_sum(u.values.iter().zip(&v.values).map(|(a, b)| a * b)))
}

/// `‖u − v‖²_{L²}`.
pub fn l2_dist_sq(u: &GridSignal, v: &GridSignal) -> Result<f64> {
    u.check_same_grid(v)?;
    Ok(u.grid.cell_volume()
        * compensated_sum(u.values.iter().zip(&v.values).map(|(a, b)| (a - b) * (a - b))))
}

/// `∫_Ω u dx / |Ω|`.
pub fn mean_value(u: &GridSignal) -> f64 {
    compensated_sum(u.values.iter().copied()) / u.values.len() as f64
}

/// Midpoint quadrature of `∫_Ω∫_Ω g(x, y, u(x), u(y)) dx dy` over off-diagonal
/// node pairs. Rows are summed in parallel and combined in index order, so the
/// result does not depend on the thread count.
pub fn double_integral<G>(g: G, u: &GridSignal) -> Result<f64>
where
    G: Fn(&[f64; 2], &[f64; 2], f64, f64) -> f64 + Sync,
{
    let grid = u.grid();
    let nodes = grid.nodes();
    let vals = u.values();
    let rows: Vec<std::result::Result<f64, Error>> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = KahanSum::new();
            for j in 0..nodes.len() {
                if i == j {
                    continue;
                }
                let v = g(&nodes[i], &nodes[j], vals[i], vals[j]);
                if !v.is_finite() {
                    return Err(Error::Quadrature { i, j, value: v });
                }
                acc.add(v);
            }
            Ok(acc.value())
        })
        .collect();
    let mut total = KahanSum::new();
    for r in rows {
        total.add(r?);
    }
    let w = grid.cell_volume();
    Ok(total.value() * w * w)
}

/// Maximum of `g` over off-diagonal node pairs (grid proxy of the essential supremum).
pub fn pair_max<G>(g: G, u: &GridSignal) -> Result<f64>
where
    G: Fn(&[f64; 2], &[f64; 2], f64, f64) -> f64 + Sync,
{
    let nodes = u.grid().nodes();
    let vals = u.values();
    let rows: Vec<std::result::Result<f64, Error>> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut m = 0.0f64;
            for j in 0..nodes.len() {
                if i == j {
                    continue;
                }
                let v = g(&nodes[i], &nodes[j], vals[i], vals[j]);
                if v.is_nan() {
                    return Err(Error::Quadrature { i, j, value: v });
                }
                m = m.max(v);
            }
            Ok(m)
        })
        .collect();
    let mut best = 0.0f64;
    for r in rows {
        best = best.max(r?);
    }
    Ok(best)
}

/// Discrete total variation. 1D: `Σ|u_{i+1} − u_i|`. 2D: anisotropic sum of
/// axis differences weighted by the transverse spacing.
pub fn tv_discrete(u: &GridSignal) -> f64 {
    let grid = u.grid();
    let v = u.values();
    match grid.dim() {
        1 => compensated_sum(v.windows(2).map(|w| (w[1] - w[0]).abs())),
        _ => {
            let n = grid.points_per_axis();
            let [h1, h2] = grid.spacing();
            let mut acc = KahanSum::new();
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    if i + 1 < n {
                        acc.add((v[k + n] - v[k]).abs() * h2);
                    }
                    if j + 1 < n {
                        acc.add((v[k + 1] - v[k]).abs() * h1);
                    }
                }
            }
            acc.value()
        }
    }
}

/// Lipschitz constant of the grid function: adjacent pairs in 1D (exact for
/// piecewise-linear interpolants), all pairs in 2D.
pub fn lipschitz_constant(u: &GridSignal) -> f64 {
    let grid = u.grid();
    let v = u.values();
    match grid.dim() {
        1 => {
            let h = grid.h();
            v.windows(2).fold(0.0f64, |m, w| m.max((w[1] - w[0]).abs() / h))
        }
        _ => pair_max(|x, y, a, b| (a - b).abs() / distance(x, y), u).unwrap_or(f64::NAN),
    }
}

/// Gagliardo-type seminorm `(∫∫ |u(x) − u(y)|^p / |x − y|^{βp})^{1/p}`.
pub fn gagliardo_seminorm(u: &GridSignal, p: f64, beta: f64) -> Result<f64> {
    if !(p >= 1.0) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::param(format!("gagliardo seminorm needs p ≥ 1, β ∈ [0,1]; got p={p}, β={beta}")));
    }
    let s = double_integral(
        |x, y, a, b| {
            let d = (a - b).abs();
            if d == 0.0 {
                0.0
            } else {
                d.powf(p) / distance(x, y).powf(beta * p)
            }
        },
        u,
    )?;
    Ok(s.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ramp(a: f64, b: f64, n: usize) -> GridSignal {
        let g = Grid::interval(a, b, n).unwrap();
        GridSignal::from_fn(&g, |x| x[0])
    }

    #[test]
    fn domain_validation() {
        assert!(Domain::interval(1.0, 0.0).is_err());
        assert!(Domain::rect(0.0, 1.0, 2.0, 2.0).is_err());
        assert!(Grid::interval(0.0, 1.0, 0).is_err());
        let g = Grid::square(0.0, PI, 4).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.dim(), 2);
    }

    #[test]
    fn cell_centres_are_h_apart() {
        let g = Grid::interval(0.0, 1.0, 8).unwrap();
        assert!((g.node(0)[0] - 1.0 / 16.0).abs() < 1e-15);
        assert!((distance(&g.node(3), &g.node(4)) - g.h()).abs() < 1e-15);
    }

    #[test]
    fn l2_norm_examples() {
        let g = Grid::interval(0.0, PI, 1024).unwrap();
        let one = GridSignal::constant(&g, 1.0);
        assert!((l2_norm_sq(&one) - PI).abs() < 1e-12);
        let s = GridSignal::from_fn(&g, |x| x[0].sin());
        assert!((l2_norm_sq(&s) - PI / 2.0).abs() / (PI / 2.0) < 1e-4);
        assert_eq!(l2_norm_sq(&GridSignal::zeros(&g)), 0.0);
    }

    #[test]
    fn l2_inner_examples() {
        let g = Grid::interval(0.0, PI, 1024).unwrap();
        let s1 = GridSignal::from_fn(&g, |x| x[0].sin());
        let s2 = GridSignal::from_fn(&g, |x| (2.0 * x[0]).sin());
        assert!((l2_inner(&s1, &s1).unwrap() - l2_norm_sq(&s1)).abs() < 1e-14);
        assert!(l2_inner(&s1, &s2).unwrap().abs() < 1e-6);
        assert_eq!(l2_inner(&s1, &GridSignal::zeros(&g)).unwrap(), 0.0);
        let other = Grid::interval(0.0, PI, 512).unwrap();
        assert!(matches!(
            l2_inner(&s1, &GridSignal::zeros(&other)),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn l2_norm_converges_at_second_order() {
        // Non-periodic integrand so the midpoint error is visible: ∫₀¹ x⁴ = 1/5.
        let err = |n| {
            let g = Grid::interval(0.0, 1.0, n).unwrap();
            (l2_norm_sq(&GridSignal::from_fn(&g, |x| x[0] * x[0])) - 0.2).abs()
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn mean_value_examples() {
        let g = Grid::interval(-1.0, 1.0, 100).unwrap();
        assert!((mean_value(&GridSignal::constant(&g, 3.5)) - 3.5).abs() < 1e-15);
        assert!(mean_value(&ramp(-1.0, 1.0, 100)).abs() < 1e-12);
        assert!((mean_value(&ramp(0.0, 1.0, 1000)) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn double_integral_examples() {
        let u = ramp(0.0, 1.0, 512);
        let ones = double_integral(|_, _, _, _| 1.0, &u).unwrap();
        assert!((ones - 1.0).abs() <= 1.0 / 512.0 + 1e-12);
        let abs = double_integral(|_, _, a, b| (a - b).abs(), &u).unwrap();
        assert!((abs - 1.0 / 3.0).abs() < 1e-2);
        let sq = double_integral(|_, _, a, b| (a - b).powi(2), &u).unwrap();
        assert!((sq - 1.0 / 6.0).abs() < 1e-2);
    }

    #[test]
    fn double_integral_reports_non_finite_pair() {
        let u = ramp(0.0, 1.0, 8);
        let err = double_integral(|x, _, _, _| if x[0] > 0.9 { f64::INFINITY } else { 0.0 }, &u)
            .unwrap_err();
        assert!(matches!(err, Error::Quadrature { i: 7, j: 0, .. }));
    }

    #[test]
    fn tv_examples() {
        let g = Grid::interval(-1.0, 1.0, 200).unwrap();
        assert_eq!(tv_discrete(&GridSignal::constant(&g, 2.0)), 0.0);
        // ∫|u'| = 2 in the continuum; the grid ramp spans (N−1)h.
        let u = ramp(-1.0, 1.0, 200);
        assert!((tv_discrete(&u) - (2.0 - g.h())).abs() < 1e-10);
        let step = GridSignal::from_fn(&g, |x| if x[0] < 0.0 { 0.0 } else { 1.0 });
        assert_eq!(tv_discrete(&step), 1.0);
    }

    #[test]
    fn tv_2d_anisotropic() {
        let g = Grid::square(0.0, 1.0, 10).unwrap();
        let u = GridSignal::from_fn(&g, |x| x[0] + x[1]);
        // Each axis contributes (n−1)·h·|side| = 0.9.
        assert!((tv_discrete(&u) - 1.8).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_examples() {
        let g = Grid::interval(0.0, 1.0, 100).unwrap();
        assert_eq!(lipschitz_constant(&GridSignal::constant(&g, 1.0)), 0.0);
        let u = GridSignal::from_fn(&g, |x| 3.0 * x[0]);
        assert!((lipschitz_constant(&u) - 3.0).abs() < 1e-12);
        let g2 = Grid::square(0.0, 1.0, 8).unwrap();
        let v = GridSignal::from_fn(&g2, |x| 2.0 * x[0] - x[1]);
        assert!((lipschitz_constant(&v) - 5f64.sqrt()).abs() < 0.05);
    }

    #[test]
    fn gagliardo_examples() {
        let g = Grid::interval(0.0, 1.0, 512).unwrap();
        assert_eq!(gagliardo_seminorm(&GridSignal::constant(&g, 1.0), 2.0, 0.5).unwrap(), 0.0);
        let u = ramp(0.0, 1.0, 512);
        let v = gagliardo_seminorm(&u, 2.0, 0.0).unwrap();
        assert!((v - (1.0f64 / 6.0).sqrt()).abs() < 1e-2);
        let w = gagliardo_seminorm(&u, 1.0, 1.0).unwrap();
        assert!((w - 1.0).abs() < 1e-2);
        let direct = double_integral(|_, _, a, b| (a - b).abs(), &u).unwrap();
        assert!((gagliardo_seminorm(&u, 1.0, 0.0).unwrap() - direct).abs() < 1e-12);
        assert!(gagliardo_seminorm(&u, 0.5, 0.0).is_err());
    }

    #[test]
    fn double_integral_is_deterministic_across_pools() {
        let u = GridSignal::from_fn(&Grid::interval(0.0, 1.0, 300).unwrap(), |x| (7.0 * x[0]).sin());
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| double_integral(|_, _, a, b| (a - b).abs().powf(1.3), &u).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert!((a - b).abs() <= 1e-13 * a.abs());
    }

    fn signal_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, n)
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(a in signal_strategy(40), b in signal_strategy(40)) {
            let g = Grid::interval(0.0, 2.0, 40).unwrap();
            let u = GridSignal::new(&g, a).unwrap();
            let v = GridSignal::new(&g, b).unwrap();
            let ip = l2_inner(&u, &v).unwrap();
            prop_assert!(ip * ip <= l2_norm_sq(&u) * l2_norm_sq(&v) * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn tv_homogeneous_and_subadditive(a in signal_strategy(30), b in signal_strategy(30), c in -3.0f64..3.0) {
            let g = Grid::interval(0.0, 1.0, 30).unwrap();
            let u = GridSignal::new(&g, a).unwrap();
            let v = GridSignal::new(&g, b).unwrap();
            prop_assert!((tv_discrete(&u.scale(c)) - c.abs() * tv_discrete(&u)).abs() < 1e-9);
            let s = u.lincomb(1.0, &v, 1.0).unwrap();
            prop_assert!(tv_discrete(&s) <= tv_discrete(&u) + tv_discrete(&v) + 1e-9);
        }

        #[test]
        fn lipschitz_shift_invariant(a in signal_strategy(25), c in -10.0f64..10.0) {
            let g = Grid::interval(0.0, 1.0, 25).unwrap();
            let u = GridSignal::new(&g, a).unwrap();
            let shifted = u.map(|v| v + c);
            prop_assert!((lipschitz_constant(&shifted) - lipschitz_constant(&u)).abs() < 1e-9);
        }
    }
}
