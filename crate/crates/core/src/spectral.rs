//! Spectral fractional regularization `μ Σ_m λ_m^s û_m²` on `(0, π)` and
//! `(0, π)²` in the Dirichlet sine basis, where minimizers, the upper-level
//! functional and its derivative in `s` are all explicit.
//!
//! Eigenfunctions are L²-normalized (`√(2/π)` per axis). On a grid with `N`
//! cells per axis the sampled sines are exactly orthonormal for `m < N`, so
//! `m_max` is capped at `N − 1`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Domain, Grid, GridSignal, TrainingSet};
use crate::numerics;
use crate::regularizers::ExtendedParam;
use crate::solvers::{Draft, Method, SolveResult};

const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EigenBasis {
    grid: Arc<Grid>,
    /// `[m₁, m₂]`; in 1D `m₂ = 0`.
    indices: Vec<[usize; 2]>,
    eigenvalues: Vec<f64>,
    m_max: usize,
    /// `sine[m − 1][i] = √(2/π)·sin(m x_i)` along one axis.
    sine: Vec<Vec<f64>>,
}

fn is_zero_pi(a: f64, b: f64) -> bool {
    a.abs() <= DOMAIN_TOL && (b - PI).abs() <= DOMAIN_TOL
}

/// Sine basis with every index whose largest component is at most `m_max`.
pub fn build_basis(grid: &Arc<Grid>, m_max: usize) -> Result<EigenBasis> {
    let ok = match *grid.domain() {
        Domain::Interval { a, b } => is_zero_pi(a, b),
        Domain::Rect { a1, b1, a2, b2 } => is_zero_pi(a1, b1) && is_zero_pi(a2, b2),
    };
    if !ok {
        return Err(Error::Unsupported(
            "the spectral family needs the domain (0, π) or (0, π)²".into(),
        ));
    }
    let n = grid.points_per_axis();
    if m_max == 0 || m_max >= n {
        return Err(Error::param(format!(
            "m_max must lie in [1, {}] on a grid with {n} points per axis, got {m_max}",
            n - 1
        )));
    }
    let norm = (2.0 / PI).sqrt();
    let coords = grid.axis_coords(0);
    let sine: Vec<Vec<f64>> = (1..=m_max)
        .map(|m| coords.iter().map(|x| norm * (m as f64 * x).sin()).collect())
        .collect();
    let mut indices: Vec<[usize; 2]> = if grid.dim() == 1 {
        (1..=m_max).map(|m| [m, 0]).collect()
    } else {
        (1..=m_max)
            .flat_map(|a| (1..=m_max).map(move |b| [a, b]))
            .collect()
    };
    let lambda = |m: &[usize; 2]| (m[0] * m[0] + m[1] * m[1]) as f64;
    indices.sort_by(|a, b| lambda(a).total_cmp(&lambda(b)).then(a.cmp(b)));
    let eigenvalues = indices.iter().map(lambda).collect();
    Ok(EigenBasis {
        grid: Arc::clone(grid),
        indices,
        eigenvalues,
        m_max,
        sine,
    })
}

impl EigenBasis {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn indices(&self) -> &[[usize; 2]] {
        &self.indices
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Position of mode `m` (use `[m, 0]` in 1D).
    pub fn position(&self, m: [usize; 2]) -> Option<usize> {
        self.indices.iter().position(|k| *k == m)
    }

    /// `ψ_m` sampled on the grid.
    pub fn mode(&self, m: [usize; 2]) -> Result<GridSignal> {
        let pos = self
            .position(m)
            .ok_or_else(|| Error::param(format!("mode {m:?} is not in the basis")))?;
        let mut c = vec![0.0; self.len()];
        c[pos] = 1.0;
        Ok(synthesize(&SpectralCoeffs {
            basis: Arc::new(self.clone()),
            coeffs: c,
        }))
    }
}

#[derive(Debug, Clone)]
pub struct SpectralCoeffs {
    pub basis: Arc<EigenBasis>,
    pub coeffs: Vec<f64>,
}

impl SpectralCoeffs {
    pub fn get(&self, m: [usize; 2]) -> Option<f64> {
        self.basis.position(m).map(|k| self.coeffs[k])
    }

    pub fn norm_sq(&self) -> f64 {
        numerics::compensated_sum(self.coeffs.iter().map(|c| c * c))
    }

    fn with(&self, coeffs: Vec<f64>) -> SpectralCoeffs {
        SpectralCoeffs {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }
}

/// `û_m = ⟨u, ψ_m⟩` by midpoint quadrature, separably in 2D.
pub fn analyze(u: &GridSignal, basis: &Arc<EigenBasis>) -> Result<SpectralCoeffs> {
    if **u.grid() != *basis.grid {
        return Err(Error::GridMismatch);
    }
    let n = basis.grid.points_per_axis();
    let vol = basis.grid.cell_volume();
    let mm = basis.m_max;
    let v = u.values();
    let coeffs = if basis.grid.dim() == 1 {
        basis
            .indices
            .iter()
            .map(|m| {
                let row = &basis.sine[m[0] - 1];
                vol * numerics::compensated_sum(v.iter().zip(row).map(|(a, b)| a * b))
            })
            .collect()
    } else {
        // partial[i][b] = Σ_j u(i, j)·s_b(y_j)
        let partial: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let row = &v[i * n..(i + 1) * n];
                (0..mm)
                    .map(|b| {
                        numerics::compensated_sum(row.iter().zip(&basis.sine[b]).map(|(a, s)| a * s))
                    })
                    .collect()
            })
            .collect();
        basis
            .indices
            .iter()
            .map(|m| {
                let sa = &basis.sine[m[0] - 1];
                vol * numerics::compensated_sum((0..n).map(|i| sa[i] * partial[i][m[1] - 1]))
            })
            .collect()
    };
    Ok(SpectralCoeffs {
        basis: Arc::clone(basis),
        coeffs,
    })
}

/// `Σ_m û_m ψ_m` on the basis grid.
pub fn synthesize(c: &SpectralCoeffs) -> GridSignal {
    let basis = &c.basis;
    let n = basis.grid.points_per_axis();
    let values = if basis.grid.dim() == 1 {
        (0..n)
            .map(|i| {
                numerics::compensated_sum(
                    basis.indices.iter().zip(&c.coeffs).map(|(m, a)| a * basis.sine[m[0] - 1][i]),
                )
            })
            .collect()
    } else {
        let mm = basis.m_max;
        // dense[a][b] = coefficient of (a+1, b+1)
        let mut dense = vec![vec![0.0; mm]; mm];
        for (m, a) in basis.indices.iter().zip(&c.coeffs) {
            dense[m[0] - 1][m[1] - 1] = *a;
        }
        // row_part[a][j] = Σ_b dense[a][b]·s_b(y_j)
        let row_part: Vec<Vec<f64>> = dense
            .iter()
            .map(|row| {
                (0..n)
                    .map(|j| numerics::compensated_sum((0..mm).map(|b| row[b] * basis.sine[b][j])))
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] =
                    numerics::compensated_sum((0..mm).map(|a| basis.sine[a][i] * row_part[a][j]));
            }
        }
        out
    };
    GridSignal::new(&basis.grid, values).expect("finite synthesis")
}

/// `μ Σ λ_m^s û_m²`.
pub fn frac_seminorm_sq(c: &SpectralCoeffs, s: f64, mu: f64) -> f64 {
    mu * numerics::compensated_sum(
        c.basis
            .eigenvalues
            .iter()
            .zip(&c.coeffs)
            .map(|(l, a)| l.powf(s) * a * a),
    )
}

/// Per-mode minimizer `û^η_m / (1 + μ λ_m^s)`.
pub fn frac_minimizer(c_eta: &SpectralCoeffs, s: f64, mu: f64) -> SpectralCoeffs {
    c_eta.with(
        c_eta
            .basis
            .eigenvalues
            .iter()
            .zip(&c_eta.coeffs)
            .map(|(l, a)| a / (1.0 + mu * l.powf(s)))
            .collect(),
    )
}

/// `∂_s` of the minimizer: `−μ ln λ_m λ_m^s / (1 + μ λ_m^s)² · û^η_m`.
pub fn frac_minimizer_derivative(c_eta: &SpectralCoeffs, s: f64, mu: f64) -> SpectralCoeffs {
    c_eta.with(
        c_eta
            .basis
            .eigenvalues
            .iter()
            .zip(&c_eta.coeffs)
            .map(|(l, a)| {
                let ls = l.powf(s);
                -mu * l.ln() * ls / (1.0 + mu * ls).powi(2) * a
            })
            .collect(),
    )
}

/// Coefficients of every training pair, plus the off-span energy of each clean signal.
pub struct SpectralData {
    pub basis: Arc<EigenBasis>,
    pub clean: Vec<SpectralCoeffs>,
    pub noisy: Vec<SpectralCoeffs>,
    pub clean_residual: Vec<f64>,
}

impl SpectralData {
    pub fn new(training: &TrainingSet, basis: &Arc<EigenBasis>) -> Result<Self> {
        let mut clean = Vec::new();
        let mut noisy = Vec::new();
        let mut clean_residual = Vec::new();
        for (c, n) in training.pairs() {
            let cc = analyze(c, basis)?;
            clean_residual.push((grid::l2_norm_sq(c) - cc.norm_sq()).max(0.0));
            clean.push(cc);
            noisy.push(analyze(n, basis)?);
        }
        Ok(SpectralData {
            basis: Arc::clone(basis),
            clean,
            noisy,
            clean_residual,
        })
    }

    /// Synthetic data given directly by coefficients (no off-span part).
    pub fn from_coeffs(basis: &Arc<EigenBasis>, pairs: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let mut clean = Vec::new();
        let mut noisy = Vec::new();
        for (c, n) in pairs {
            if c.len() != basis.len() || n.len() != basis.len() {
                return Err(Error::param("coefficient vectors must match the basis size"));
            }
            clean.push(SpectralCoeffs {
                basis: Arc::clone(basis),
                coeffs: c,
            });
            noisy.push(SpectralCoeffs {
                basis: Arc::clone(basis),
                coeffs: n,
            });
        }
        let k = clean.len();
        Ok(SpectralData {
            basis: Arc::clone(basis),
            clean,
            noisy,
            clean_residual: vec![0.0; k],
        })
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let lambda = &self.basis.eigenvalues;
        self.clean.iter().zip(&self.noisy).flat_map(move |(c, n)| {
            lambda
                .iter()
                .zip(c.coeffs.iter().zip(&n.coeffs))
                .map(|(l, (uc, ue))| (*l, *uc, *ue))
        })
    }

    /// `Ī(s)`.
    pub fn upper_value(&self, s: f64, mu: f64) -> f64 {
        let spectral = numerics::compensated_sum(self.modes().map(|(l, uc, ue)| {
            let w = ue / (1.0 + mu * l.powf(s));
            (w - uc) * (w - uc)
        }));
        spectral + self.clean_residual.iter().sum::<f64>()
    }

    /// `Ī′(s) = 2 Σ ⟨∂_s w^(s), w^(s) − u^c⟩`.
    pub fn upper_derivative(&self, s: f64, mu: f64) -> f64 {
        numerics::compensated_sum(self.modes().map(|(l, uc, ue)| {
            let ls = l.powf(s);
            let w = ue / (1.0 + mu * ls);
            let dw = -mu * l.ln() * ls / (1.0 + mu * ls).powi(2) * ue;
            2.0 * dw * (w - uc)
        }))
    }

    /// `Σ ln λ û^η (û^η − (1+μ) û^c)`; positive iff `Ī′(0) < 0`.
    pub fn h1(&self, mu: f64) -> f64 {
        numerics::compensated_sum(
            self.modes()
                .map(|(l, uc, ue)| l.ln() * ue * (ue - (1.0 + mu) * uc)),
        )
    }

    /// `Σ ln λ · λ/(1+μλ)³ · û^η (û^η − (1+μλ) û^c)`; negative iff `Ī′(1) > 0`.
    pub fn h2(&self, mu: f64) -> f64 {
        numerics::compensated_sum(self.modes().map(|(l, uc, ue)| {
            l.ln() * l / (1.0 + mu * l).powi(3) * ue * (ue - (1.0 + mu * l) * uc)
        }))
    }
}

pub fn upper_value(s: f64, mu: f64, training: &TrainingSet, basis: &Arc<EigenBasis>) -> Result<f64> {
    Ok(SpectralData::new(training, basis)?.upper_value(s, mu))
}

pub fn upper_derivative(s: f64, mu: f64, training: &TrainingSet, basis: &Arc<EigenBasis>) -> Result<f64> {
    Ok(SpectralData::new(training, basis)?.upper_derivative(s, mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FracConditionReport {
    pub h1_value: f64,
    pub h1_holds: bool,
    pub h2_value: f64,
    pub h2_holds: bool,
    pub mu: f64,
}

pub fn check_conditions_data(data: &SpectralData, mu: f64) -> FracConditionReport {
    let h1_value = data.h1(mu);
    let h2_value = data.h2(mu);
    FracConditionReport {
        h1_value,
        h1_holds: h1_value > 0.0,
        h2_value,
        h2_holds: h2_value < 0.0,
        mu,
    }
}

pub fn check_conditions(
    training: &TrainingSet,
    mu: f64,
    basis: &Arc<EigenBasis>,
) -> Result<FracConditionReport> {
    Ok(check_conditions_data(&SpectralData::new(training, basis)?, mu))
}

/// `(μ₋, μ₊)`: `μ₊` is where the first condition's sum changes sign, `μ₋`
/// where the second's does; both conditions hold for `μ₋ < μ < μ₊`.
pub fn mu_window_data(data: &SpectralData, bracket: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = bracket;
    if !(0.0 < lo && lo < hi) {
        return Err(Error::param(format!("invalid μ bracket ({lo}, {hi})")));
    }
    let xtol = 1e-13;
    let mu_plus = numerics::bisect(|m| data.h1(m), lo, hi, xtol).ok_or(Error::NoSignChange {
        what: "first interior-optimum condition",
        lo,
        hi,
    })?;
    let mu_minus = numerics::bisect(|m| data.h2(m), lo, hi, xtol).ok_or(Error::NoSignChange {
        what: "second interior-optimum condition",
        lo,
        hi,
    })?;
    if !(mu_minus < mu_plus) {
        return Err(Error::Estimation(format!(
            "empty μ window: μ₋ = {mu_minus} ≥ μ₊ = {mu_plus}"
        )));
    }
    Ok((mu_minus, mu_plus))
}

pub fn mu_window(
    training: &TrainingSet,
    basis: &Arc<EigenBasis>,
    bracket: (f64, f64),
) -> Result<(f64, f64)> {
    mu_window_data(&SpectralData::new(training, basis)?, bracket)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LearnedS {
    pub s_hat: f64,
    pub value: f64,
    pub boundary: bool,
}

pub const S_SCAN_POINTS: usize = 64;

/// Global minimizer of `Ī` on `[0, 1]`: sign scan of `Ī′`, bisection in each
/// cell where it crosses from negative to positive, then comparison with the
/// endpoints. Exact ties go to the smallest `s`.
pub fn learn_s_data(data: &SpectralData, mu: f64) -> LearnedS {
    let grid: Vec<f64> = (0..S_SCAN_POINTS)
        .map(|k| k as f64 / (S_SCAN_POINTS - 1) as f64)
        .collect();
    let der: Vec<f64> = grid.iter().map(|&s| data.upper_derivative(s, mu)).collect();
    let mut candidates = vec![0.0];
    for k in 0..grid.len() - 1 {
        if der[k] < 0.0 && der[k + 1] > 0.0 {
            if let Some(r) = numerics::bisect(|s| data.upper_derivative(s, mu), grid[k], grid[k + 1], 1e-13) {
                candidates.push(r);
            }
        }
    }
    candidates.push(1.0);
    let mut best = LearnedS {
        s_hat: 0.0,
        value: data.upper_value(0.0, mu),
        boundary: true,
    };
    for &s in &candidates[1..] {
        let v = data.upper_value(s, mu);
        if v < best.value {
            best = LearnedS {
                s_hat: s,
                value: v,
                boundary: s == 0.0 || s == 1.0,
            };
        }
    }
    best
}

pub fn learn_s(training: &TrainingSet, mu: f64, basis: &Arc<EigenBasis>) -> Result<LearnedS> {
    Ok(learn_s_data(&SpectralData::new(training, basis)?, mu))
}

fn s_of(param: ExtendedParam) -> Result<f64> {
    match param {
        ExtendedParam::LowerEdge => Ok(0.0),
        ExtendedParam::UpperEdge => Ok(1.0),
        ExtendedParam::Interior(s) if s > 0.0 && s < 1.0 => Ok(s),
        ExtendedParam::Interior(s) => Err(Error::param(format!("s must lie in (0, 1), got {s}"))),
    }
}

fn basis_for(u: &GridSignal, m_max: usize) -> Result<Arc<EigenBasis>> {
    let cap = u.grid().points_per_axis().saturating_sub(1);
    Ok(Arc::new(build_basis(u.grid(), m_max.min(cap))?))
}

/// `μ Σ λ^s û²` on the truncated basis; `s = 0` and `s = 1` are the edge models.
pub fn eval_fractional(param: ExtendedParam, mu: f64, m_max: usize, u: &GridSignal) -> Result<f64> {
    let s = s_of(param)?;
    let basis = basis_for(u, m_max)?;
    Ok(frac_seminorm_sq(&analyze(u, &basis)?, s, mu))
}

/// Lower-level solve for the spectral family at any `s ∈ [0, 1]`.
pub fn solve_fractional(
    param: ExtendedParam,
    mu: f64,
    m_max: usize,
    u_eta: &GridSignal,
) -> Result<SolveResult> {
    let s = s_of(param)?;
    let basis = basis_for(u_eta, m_max)?;
    let ce = analyze(u_eta, &basis)?;
    let w = frac_minimizer(&ce, s, mu);
    let off_span = (grid::l2_norm_sq(u_eta) - ce.norm_sq()).max(0.0);
    let fit = numerics::compensated_sum(w.coeffs.iter().zip(&ce.coeffs).map(|(a, b)| (a - b).powi(2)));
    let internal = fit + off_span + frac_seminorm_sq(&w, s, mu);
    let values = synthesize(&w).into_values();
    Draft::exact(values, internal, Method::Spectral).certify(u_eta, |u| {
        Ok(frac_seminorm_sq(&analyze(u, &basis)?, s, mu))
    })
}

/// Two-mode test data on `(0, π)²`: `u^c = ψ_{(1,1)}`, `u^η = u^c + ψ_{(10,10)}/10`.
pub fn two_mode_example(points: usize, m_max: usize) -> Result<(TrainingSet, Arc<EigenBasis>)> {
    let grid = Grid::square(0.0, PI, points)?;
    let basis = Arc::new(build_basis(&grid, m_max)?);
    let clean = basis.mode([1, 1])?;
    let bump = basis.mode([10, 10])?;
    let noisy = clean.lincomb(1.0, &bump, 0.1)?;
    Ok((TrainingSet::single(clean, noisy)?, basis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, m: usize) -> Arc<EigenBasis> {
        let g = Grid::interval(0.0, PI, n).unwrap();
        Arc::new(build_basis(&g, m).unwrap())
    }

    #[test]
    fn basis_layout() {
        let b = line(64, 3);
        assert_eq!(b.eigenvalues(), &[1.0, 4.0, 9.0]);
        let g = Grid::square(0.0, PI, 32).unwrap();
        let b2 = build_basis(&g, 10).unwrap();
        assert_eq!(b2.eigenvalues()[b2.position([1, 1]).unwrap()], 2.0);
        assert_eq!(b2.eigenvalues()[b2.position([10, 10]).unwrap()], 200.0);
        assert!(b2.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        assert!(build_basis(&Grid::interval(0.0, 1.0, 16).unwrap(), 4).is_err());
        assert!(build_basis(&Grid::interval(0.0, PI, 16).unwrap(), 16).is_err());
    }

    #[test]
    fn orthonormal_on_fine_square() {
        let g = Grid::square(0.0, PI, 256).unwrap();
        let b = Arc::new(build_basis(&g, 2).unwrap());
        let psi = b.mode([1, 1]).unwrap();
        assert!((grid::l2_norm_sq(&psi) - 1.0).abs() < 1e-8);
        let c = analyze(&psi, &b).unwrap();
        for (m, v) in b.indices().iter().zip(&c.coeffs) {
            let expect = if *m == [1, 1] { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn analysis_examples() {
        let b = line(128, 8);
        let u = b.mode([1, 0]).unwrap().lincomb(1.0, &b.mode([3, 0]).unwrap(), 0.1).unwrap();
        let c = analyze(&u, &b).unwrap();
        let expect = [1.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0];
        for (a, e) in c.coeffs.iter().zip(expect) {
            assert!((a - e).abs() < 1e-8);
        }
        let back = synthesize(&c);
        for (a, e) in back.values().iter().zip(u.values()) {
            assert!((a - e).abs() < 1e-8);
        }
        assert!((grid::l2_norm_sq(&back) - c.norm_sq()).abs() < 1e-8);
        let zero = analyze(&GridSignal::zeros(b.grid()), &b).unwrap();
        assert!(zero.coeffs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seminorm_examples() {
        let b = line(64, 4);
        let c = analyze(&b.mode([1, 0]).unwrap(), &b).unwrap();
        let mu = 0.3;
        assert!((frac_seminorm_sq(&c, 0.0, mu) - mu).abs() < 1e-12);
        assert!((frac_seminorm_sq(&c, 1.0, mu) - mu).abs() < 1e-12);
        let c2 = analyze(&b.mode([2, 0]).unwrap(), &b).unwrap();
        assert!((frac_seminorm_sq(&c2, 0.5, mu) - 2.0 * mu).abs() < 1e-12);
        // s = 1 is the Dirichlet energy: ‖ψ₂'‖² = 4.
        assert!((frac_seminorm_sq(&c2, 1.0, 1.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn minimizer_examples() {
        let g = Grid::square(0.0, PI, 32).unwrap();
        let b = Arc::new(build_basis(&g, 10).unwrap());
        let mut coeffs = vec![0.0; b.len()];
        coeffs[b.position([1, 1]).unwrap()] = 1.0;
        coeffs[b.position([10, 10]).unwrap()] = 0.1;
        let ce = SpectralCoeffs { basis: Arc::clone(&b), coeffs };
        let w = frac_minimizer(&ce, 1.0, 0.05);
        assert!((w.get([1, 1]).unwrap() - 1.0 / 1.1).abs() < 1e-12);
        assert!((w.get([10, 10]).unwrap() - 0.1 / 11.0).abs() < 1e-12);
        let w0 = frac_minimizer(&ce, 0.0, 0.05);
        for (a, e) in w0.coeffs.iter().zip(&ce.coeffs) {
            assert!((a - e / 1.05).abs() < 1e-15);
        }
        let d = frac_minimizer_derivative(&ce, 0.4, 0.05);
        let eps = 1e-5;
        let plus = frac_minimizer(&ce, 0.4 + eps, 0.05);
        let minus = frac_minimizer(&ce, 0.4 - eps, 0.05);
        for k in 0..b.len() {
            let fd = (plus.coeffs[k] - minus.coeffs[k]) / (2.0 * eps);
            assert!((fd - d.coeffs[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn two_mode_window_and_learning() {
        let (training, basis) = two_mode_example(32, 10).unwrap();
        let data = SpectralData::new(&training, &basis).unwrap();
        let (lo, hi) = mu_window_data(&data, (1e-4, 1.0)).unwrap();
        assert!((hi - 200f64.ln() / (100.0 * 2f64.ln())).abs() < 1e-6, "{hi}");
        assert!((lo - 0.0236).abs() < 5e-4, "{lo}");
        let inside = learn_s_data(&data, 0.05);
        assert!(!inside.boundary && inside.s_hat > 0.0 && inside.s_hat < 1.0);
        assert!(data.upper_derivative(0.0, 0.05) < 0.0 && data.upper_derivative(1.0, 0.05) > 0.0);
        assert_eq!(learn_s_data(&data, 0.023).s_hat, 1.0);
        assert_eq!(learn_s_data(&data, 0.11).s_hat, 0.0);
    }

    #[test]
    fn single_unit_mode_ties_to_zero() {
        let b = line(64, 4);
        let psi = b.mode([1, 0]).unwrap();
        let t = TrainingSet::single(psi.clone(), psi).unwrap();
        let r = learn_s(&t, 0.2, &b).unwrap();
        assert_eq!(r.s_hat, 0.0);
    }

    #[test]
    fn solve_matches_closed_form() {
        let b = line(64, 16);
        let eta = GridSignal::from_fn(b.grid(), |x| x[0] * (PI - x[0]));
        let r = solve_fractional(ExtendedParam::Interior(0.5), 0.1, 16, &eta).unwrap();
        assert!(r.certificate_gap < 1e-10, "{}", r.certificate_gap);
        let lower = solve_fractional(ExtendedParam::LowerEdge, 0.1, 16, &eta).unwrap();
        let c = analyze(&lower.minimizer, &Arc::new(b.as_ref().clone())).unwrap();
        let ce = analyze(&eta, &b).unwrap();
        for (a, e) in c.coeffs.iter().zip(&ce.coeffs) {
            assert!((a - e / 1.1).abs() < 1e-10);
        }
    }
}
