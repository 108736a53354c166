//! Lower-level solvers for `argmin_u ‖u − u^η‖² + R_λ(u)`.
//!
//! Closed forms where they exist (quadratic weight, edge models), an exact
//! taut-string solver for 1D TV, a nested projection scheme for Lipschitz
//! regularization, Polyak subgradient descent for the remaining convex
//! objectives and multi-start gradient descent for the non-convex
//! Brezis–Nguyen family. Every result carries an objective re-evaluated
//! through the regularizers module, independent of the solver's own bookkeeping.

mod bn;
mod convex;
mod graph_tv;
mod lipschitz;
mod pairs;
mod polyak;
mod tv;

use serde::{Deserialize, Serialize};

pub use bn::solve_bn_local;
pub use convex::{solve_ak, solve_exponent, solve_weight};

use crate::error::{Error, Result};
use crate::grid::{self, GridSignal};
use crate::regularizers::{
    estimate_k_phi, kappa_n, BaseRegularizer, ExtendedParam, FamilySpec,
    KPhiEstimate,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepRule {
    /// Polyak steps towards `f_best − δ` with adaptive `δ`.
    Polyak,
    /// Normalized steps `a/√k`.
    Diminishing { initial: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub step_rule: StepRule,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-6,
            step_rule: StepRule::Polyak,
            restarts: 1,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("solver tol must be positive, got {}", self.tol)));
        }
        if self.restarts == 0 {
            return Err(Error::Config("solver restarts must be at least 1".into()));
        }
        if let StepRule::Diminishing { initial } = self.step_rule {
            if !(initial > 0.0) {
                return Err(Error::Config("diminishing step needs a positive initial step".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Identity,
    MeanValue,
    TautString,
    LipschitzProjection,
    PolyakSubgradient,
    DiminishingSubgradient,
    MultiStartGradient,
    PrimalDual,
    Spectral,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub minimizer: GridSignal,
    /// `‖minimizer − u^η‖² + R_λ(minimizer)`, re-evaluated independently.
    pub objective: f64,
    pub method: Method,
    pub iterations: usize,
    /// Method-specific optimality measure (duality gap, target gap, gradient norm, ...).
    pub residual: f64,
    pub converged: bool,
    /// Set when the objective is not convex, so the returned point is only the
    /// best one found.
    pub possibly_nonunique: bool,
    /// Relative gap between the solver's own objective value and `objective`.
    pub certificate_gap: f64,
}

pub(crate) struct Draft {
    pub values: Vec<f64>,
    pub internal_objective: f64,
    pub method: Method,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub possibly_nonunique: bool,
}

impl Draft {
    pub fn exact(values: Vec<f64>, internal_objective: f64, method: Method) -> Self {
        Draft {
            values,
            internal_objective,
            method,
            iterations: 0,
            residual: 0.0,
            converged: true,
            possibly_nonunique: false,
        }
    }

    /// Attaches the independently evaluated objective `fidelity + reg(u)`.
    pub fn certify(
        self,
        u_eta: &GridSignal,
        reg: impl FnOnce(&GridSignal) -> Result<f64>,
    ) -> Result<SolveResult> {
        let minimizer = GridSignal::new(u_eta.grid(), self.values)?;
        let objective = grid::l2_dist_sq(&minimizer, u_eta)? + reg(&minimizer)?;
        let certificate_gap = if objective.is_finite() && self.internal_objective.is_finite() {
            (objective - self.internal_objective).abs() / objective.abs().max(1.0)
        } else if objective == self.internal_objective {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(SolveResult {
            minimizer,
            objective,
            method: self.method,
            iterations: self.iterations,
            residual: self.residual,
            converged: self.converged,
            possibly_nonunique: self.possibly_nonunique,
            certificate_gap,
        })
    }
}

pub(crate) fn fidelity(v: &[f64], eta: &[f64], vol: f64) -> f64 {
    vol * v.iter().zip(eta).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
}

/// Closed form `u^η/(1 + α)` for the quadratic weight family.
pub fn solve_quadratic_weight(alpha: f64, u_eta: &GridSignal) -> Result<SolveResult> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("weight must be non-negative, got {alpha}")));
    }
    let factor = 1.0 / (1.0 + alpha);
    let values: Vec<f64> = u_eta.values().iter().map(|v| v * factor).collect();
    // ‖u − u^η‖² + α‖u‖² at the minimizer equals α/(1+α)·‖u^η‖².
    let internal = alpha * factor * grid::l2_norm_sq(u_eta);
    Draft::exact(values, internal, Method::ClosedForm)
        .certify(u_eta, |u| Ok(alpha * grid::l2_norm_sq(u)))
}

/// Exact minimizer of `‖u − u^η‖² + weight·TV(u)` on a 1D grid.
pub fn solve_tv(weight: f64, u_eta: &GridSignal) -> Result<SolveResult> {
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(Error::param(format!("TV weight must be non-negative, got {weight}")));
    }
    let grid = u_eta.grid();
    if grid.dim() != 1 {
        return Err(Error::Unsupported("exact TV solve on 2D grids".into()));
    }
    let vol = grid.cell_volume();
    // Dividing by 2h turns the objective into ½‖x − y‖² + λ‖Dx‖₁.
    let lambda = weight / (2.0 * vol);
    let y = u_eta.values();
    let x = tv::tv1d_denoise(y, lambda);
    let gap = 2.0 * vol * tv::tv1d_gap(y, &x, lambda);
    let internal = fidelity(&x, y, vol) + weight * x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
    let scale = internal.abs().max(f64::MIN_POSITIVE);
    let draft = Draft {
        values: x,
        internal_objective: internal,
        method: Method::TautString,
        iterations: 1,
        residual: gap,
        converged: gap <= 1e-9 * scale.max(1.0),
        possibly_nonunique: false,
    };
    let res = draft.certify(u_eta, |u| Ok(weight * grid::tv_discrete(u)))?;
    if !res.converged {
        return Err(Error::Solver(format!("taut-string duality gap {gap:e} too large")));
    }
    Ok(res)
}

/// TV solve on any grid: exact in 1D, subgradient descent in 2D.
/// TV model `‖u − u^η‖² + weight·TV(u)` in 1D (exact) or 2D (anisotropic, iterative).
pub fn solve_tv_weight(weight: f64, u_eta: &GridSignal, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_tv_any(weight, u_eta, cfg)
}

pub(crate) fn solve_tv_any(weight: f64, u_eta: &GridSignal, cfg: &SolverConfig) -> Result<SolveResult> {
    if u_eta.grid().dim() == 1 {
        solve_tv(weight, u_eta)
    } else if weight == 0.0 {
        Draft::exact(u_eta.values().to_vec(), 0.0, Method::Identity).certify(u_eta, |_| Ok(0.0))
    } else {
        solve_weight(weight, &BaseRegularizer::Tv, u_eta, cfg)
    }
}

/// Minimizer of `‖u − u^η‖² + α·Lip(u)` on a 1D grid by golden-section search
/// over the Lipschitz bound `L`, projecting onto `{Lip ≤ L}` for each trial.
pub fn solve_lipschitz(alpha: f64, u_eta: &GridSignal) -> Result<SolveResult> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("Lipschitz weight must be non-negative, got {alpha}")));
    }
    let grid = u_eta.grid();
    if grid.dim() != 1 {
        return Err(Error::Unsupported("Lipschitz solve on 2D grids".into()));
    }
    let h = grid.h();
    let vol = grid.cell_volume();
    let eta = u_eta.values();
    let lip = grid::lipschitz_constant(u_eta);
    if alpha == 0.0 || lip == 0.0 {
        return Draft::exact(eta.to_vec(), alpha * lip, Method::LipschitzProjection)
            .certify(u_eta, |u| Ok(alpha * grid::lipschitz_constant(u)));
    }
    let tol = 1e-13;
    let mut failure = None;
    let mut projections = 0usize;
    let mut phi = |l: f64| {
        let p = lipschitz::project_slope(eta, l * h, tol);
        projections += p.iterations;
        if !p.converged && failure.is_none() {
            failure = Some(p.max_violation);
        }
        fidelity(&p.u, eta, vol) + alpha * l
    };
    let best = crate::numerics::golden_section(&mut phi, 0.0, lip, 1e-12 * lip, 300);
    if let Some(v) = failure {
        return Err(Error::Solver(format!(
            "slope projection did not converge (violation {v:e})"
        )));
    }
    let p = lipschitz::project_slope(eta, best.x * h, tol);
    let internal = fidelity(&p.u, eta, vol) + alpha * best.x;
    let draft = Draft {
        values: p.u,
        internal_objective: internal,
        method: Method::LipschitzProjection,
        iterations: best.evaluations + projections,
        residual: p.max_violation,
        converged: p.converged,
        possibly_nonunique: false,
    };
    draft.certify(u_eta, |u| Ok(alpha * grid::lipschitz_constant(u)))
}

/// Solves the Mosco-limit model at an edge of the parameter range.
pub fn boundary_solve(
    family: &FamilySpec,
    edge: ExtendedParam,
    u_eta: &GridSignal,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if edge.is_interior() {
        return Err(Error::param("boundary_solve needs an edge parameter"));
    }
    family.check_param(edge)?;
    let identity = || {
        Draft::exact(u_eta.values().to_vec(), 0.0, Method::Identity)
            .certify(u_eta, |u| family.evaluate(edge, u))
    };
    match (family, edge) {
        (FamilySpec::Weight { .. }, ExtendedParam::LowerEdge) => identity(),
        (FamilySpec::Weight { base: BaseRegularizer::QuadraticL2 }, _) => {
            let values = vec![0.0; u_eta.len()];
            let internal = fidelity(&values, u_eta.values(), u_eta.grid().cell_volume());
            Draft::exact(values, internal, Method::ClosedForm)
                .certify(u_eta, |u| family.evaluate(edge, u))
        }
        (FamilySpec::Weight { base }, _) if !base.vanishes_exactly_on_constants() => Err(
            Error::Unsupported(format!("upper-edge model of the weighted {} regularizer", base.label())),
        ),
        (FamilySpec::Weight { .. }, _) => {
            let mean = grid::mean_value(u_eta);
            let values = vec![mean; u_eta.len()];
            let internal = fidelity(&values, u_eta.values(), u_eta.grid().cell_volume());
            Draft::exact(values, internal, Method::MeanValue)
                .certify(u_eta, |u| family.evaluate(edge, u))
        }
        (FamilySpec::BrezisNguyen { .. }, ExtendedParam::UpperEdge)
        | (FamilySpec::AubertKornprobst { .. }, ExtendedParam::UpperEdge) => identity(),
        (FamilySpec::BrezisNguyen { phi, k_phi }, _) => {
            let k = match k_phi {
                Some(k) => *k,
                None => {
                    estimate_k_phi(phi, KPhiEstimate::DEFAULT_POINTS, &KPhiEstimate::DEFAULT_DELTAS)?
                        .value
                }
            };
            let tv = solve_tv_any(k, u_eta, cfg)?;
            Ok(tv)
        }
        (FamilySpec::AubertKornprobst { .. }, _) => {
            let k = kappa_n(u_eta.grid().dim())?;
            solve_tv_any(k, u_eta, cfg)
        }
        (FamilySpec::Exponent { integrand }, _) => solve_exponent(edge, integrand, u_eta, cfg),
        (FamilySpec::SpectralFractional { mu, m_max }, _) => {
            crate::spectral::solve_fractional(edge, *mu, *m_max, u_eta)
        }
    }
}

/// Lower-level solve for any `λ ∈ Λ̄`.
pub fn solve(
    family: &FamilySpec,
    param: ExtendedParam,
    u_eta: &GridSignal,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    family.check_param(param)?;
    let t = match param {
        ExtendedParam::Interior(t) => t,
        _ => return boundary_solve(family, param, u_eta, cfg),
    };
    match family {
        FamilySpec::Weight { base } => solve_weight(t, base, u_eta, cfg),
        FamilySpec::Exponent { integrand } => solve_exponent(param, integrand, u_eta, cfg),
        FamilySpec::BrezisNguyen { phi, .. } => solve_bn_local(t, phi, u_eta, cfg),
        FamilySpec::AubertKornprobst { rho } => solve_ak(t, rho, u_eta, cfg),
        FamilySpec::SpectralFractional { mu, m_max } => {
            crate::spectral::solve_fractional(param, *mu, *m_max, u_eta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn quadratic_weight_examples() {
        let g = Grid::interval(0.0, std::f64::consts::PI, 128).unwrap();
        let two = GridSignal::constant(&g, 2.0);
        let r = solve_quadratic_weight(1.0, &two).unwrap();
        assert!(r.minimizer.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
        let sine = GridSignal::from_fn(&g, |x| x[0].sin());
        let r0 = solve_quadratic_weight(0.0, &sine).unwrap();
        assert_eq!(r0.minimizer, sine);
        let r3 = solve_quadratic_weight(3.0, &sine).unwrap();
        let dist = grid::l2_dist_sq(&r3.minimizer, &sine).unwrap();
        let expect = (0.75f64).powi(2) * grid::l2_norm_sq(&sine);
        assert!((dist - expect).abs() < 1e-12);
        assert!(r3.certificate_gap < 1e-12);
    }

    #[test]
    fn tv_examples() {
        let g = Grid::interval(-1.0, 1.0, 1024).unwrap();
        let ramp = GridSignal::from_fn(&g, |x| x[0]);
        let r = solve_tv(1.0, &ramp).unwrap();
        assert!(r.minimizer.max_abs() <= 5e-3, "{}", r.minimizer.max_abs());
        assert!(r.certificate_gap < 1e-8);
        let r0 = solve_tv(0.0, &ramp).unwrap();
        assert_eq!(r0.minimizer, ramp);
        let big = solve_tv(100.0, &ramp).unwrap();
        let mean = grid::mean_value(&ramp);
        assert!(big.minimizer.values().iter().all(|v| (v - mean).abs() < 1e-6));
    }

    #[test]
    fn tv_output_is_clipped_affine_input() {
        let g = Grid::interval(0.0, 1.0, 400).unwrap();
        let ramp = GridSignal::from_fn(&g, |x| 2.0 * x[0] - 0.3);
        let r = solve_tv(0.2, &ramp).unwrap();
        let v = r.minimizer.values();
        let (lo, hi) = (v[0], v[v.len() - 1]);
        for (a, b) in v.iter().zip(ramp.values()) {
            assert!((a - b.clamp(lo, hi)).abs() < 5e-3);
        }
    }

    #[test]
    fn lipschitz_examples() {
        let g = Grid::interval(0.0, 1.0, 512).unwrap();
        let alpha = 0.01;
        let clean = GridSignal::from_fn(&g, |x| x[0] - 0.5);
        let noisy = clean.scale(1.0 + 6.0 * alpha);
        let r = solve_lipschitz(alpha, &noisy).unwrap();
        let err = grid::l2_dist_sq(&r.minimizer, &clean).unwrap();
        assert!(err.sqrt() < 1e-3 && err <= 1e-6, "{err}");
        assert!(r.certificate_gap < 1e-8);
        let r0 = solve_lipschitz(0.0, &noisy).unwrap();
        assert_eq!(r0.minimizer, noisy);
        let flat = GridSignal::constant(&g, 0.3);
        let rf = solve_lipschitz(1.0, &flat).unwrap();
        assert_eq!(rf.minimizer, flat);
        assert_eq!(rf.objective, 0.0);
    }

    #[test]
    fn boundary_examples() {
        let g = Grid::interval(0.0, 1.0, 100).unwrap();
        let ramp = GridSignal::from_fn(&g, |x| x[0]);
        let cfg = SolverConfig::default();
        let w = FamilySpec::Weight { base: BaseRegularizer::Tv };
        let up = boundary_solve(&w, ExtendedParam::UpperEdge, &ramp, &cfg).unwrap();
        assert!(up.minimizer.values().iter().all(|v| (v - 0.5).abs() < 1e-12));
        let low = boundary_solve(&w, ExtendedParam::LowerEdge, &ramp, &cfg).unwrap();
        assert_eq!(low.minimizer, ramp);
        let ak = FamilySpec::AubertKornprobst {
            rho: crate::regularizers::RhoSpec::unit_ball(1).unwrap(),
        };
        let r = boundary_solve(&ak, ExtendedParam::UpperEdge, &ramp, &cfg).unwrap();
        assert_eq!(r.minimizer, ramp);
        assert!(boundary_solve(&w, ExtendedParam::Interior(1.0), &ramp, &cfg).is_err());
    }
}
