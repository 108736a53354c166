//! The extended upper-level functional `Ī` on the closed parameter range,
//! scalar parameter learning, and the data conditions that certify an
//! interior (structure-preserving) optimum.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, GridSignal, TrainingSet};
use crate::numerics;
use crate::regularizers::{
    eval_exponent, kappa_n, BaseRegularizer, DoubleIntegrand, ExtendedParam, FamilySpec, PhiSpec,
    RhoSpec,
};
use crate::solvers::{self, SolveResult, SolverConfig};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridTransform {
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "log")]
    Log,
    /// Linear in `s`; same spacing as `Linear`, kept as its own tag for reports.
    #[serde(rename = "s-linear")]
    SLinear,
    /// Linear in `1/p`, so `p = ∞` is the natural end.
    #[serde(rename = "reciprocal")]
    Reciprocal,
}

impl FromStr for GridTransform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(GridTransform::Linear),
            "log" => Ok(GridTransform::Log),
            "s-linear" | "s_linear" | "slinear" => Ok(GridTransform::SLinear),
            "reciprocal" | "1/p" | "inv" => Ok(GridTransform::Reciprocal),
            _ => Err(Error::Config(format!("unknown grid scale `{s}`"))),
        }
    }
}

impl GridTransform {
    fn forward(self, x: f64) -> f64 {
        match self {
            GridTransform::Linear | GridTransform::SLinear => x,
            GridTransform::Log => x.ln(),
            GridTransform::Reciprocal => 1.0 / x,
        }
    }

    fn inverse(self, t: f64) -> f64 {
        match self {
            GridTransform::Linear | GridTransform::SLinear => t,
            GridTransform::Log => t.exp(),
            GridTransform::Reciprocal => 1.0 / t,
        }
    }
}

/// Interior sampling grid; edges are added separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub transform: GridTransform,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(default = "yes")]
    pub include_edges: bool,
}

fn yes() -> bool {
    true
}

impl FromStr for ParamGrid {
    type Err = Error;
    /// `lo:hi:count:scale`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::Config(format!(
                "parameter grid must look like lo:hi:count:scale, got `{s}`"
            )));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{t}` in parameter grid")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad count `{}` in parameter grid", parts[2])))?;
        Ok(ParamGrid {
            lo: num(parts[0])?,
            hi: num(parts[1])?,
            count,
            transform: parts[3].trim().parse()?,
            include_edges: true,
        })
    }
}

impl ParamGrid {
    pub fn new(transform: GridTransform, lo: f64, hi: f64, count: usize) -> Self {
        ParamGrid {
            transform,
            lo,
            hi,
            count,
            include_edges: true,
        }
    }

    /// A reasonable grid for each family.
    pub fn default_for(family: &FamilySpec) -> Self {
        match family {
            FamilySpec::Exponent { .. } => ParamGrid::new(GridTransform::Reciprocal, 1.0, 64.0, 16),
            FamilySpec::SpectralFractional { .. } => {
                ParamGrid::new(GridTransform::SLinear, 0.02, 0.98, 25)
            }
            _ => ParamGrid::new(GridTransform::Log, 1e-3, 1e2, 21),
        }
    }

    pub fn validate(&self, family: &FamilySpec) -> Result<()> {
        if self.count < 3 {
            return Err(Error::param(format!("parameter grid needs at least 3 points, got {}", self.count)));
        }
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::param(format!(
                "parameter grid needs finite lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if matches!(self.transform, GridTransform::Log | GridTransform::Reciprocal) && !(self.lo > 0.0) {
            return Err(Error::param("log and reciprocal grids need lo > 0"));
        }
        family.check_param(ExtendedParam::Interior(self.lo))?;
        family.check_param(ExtendedParam::Interior(self.hi))
    }

    /// The interior sample values, ascending.
    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.transform.forward(self.lo), self.transform.forward(self.hi));
        let mut pts: Vec<f64> = (0..self.count)
            .map(|k| {
                let t = a + (b - a) * k as f64 / (self.count - 1) as f64;
                self.transform.inverse(t)
            })
            .collect();
        // Pin the ends so round-off never leaves the range.
        pts[0] = self.lo;
        pts[self.count - 1] = self.hi;
        pts.sort_by(f64::total_cmp);
        pts
    }
}

/// `Ī(λ)` together with the reconstructions it was computed from.
#[derive(Debug, Clone)]
pub struct UpperEval {
    pub i_bar: f64,
    pub distances: Vec<f64>,
    pub reconstructions: Vec<SolveResult>,
}

/// `Ī(λ) = Σ_j ‖w_j^(λ) − u^c_j‖²` with the Mosco-limit model at the edges.
pub fn extended_upper(
    family: &FamilySpec,
    param: ExtendedParam,
    training: &TrainingSet,
    cfg: &SolverConfig,
) -> Result<UpperEval> {
    family.validate()?;
    family.check_param(param)?;
    let solved: Vec<Result<(SolveResult, f64)>> = training
        .pairs()
        .par_iter()
        .enumerate()
        .map(|(j, (clean, noisy))| {
            let r = solvers::solve(family, param, noisy, cfg).map_err(|e| match e {
                Error::Solver(m) => Error::Solver(format!("pair {j}: {m}")),
                other => other,
            })?;
            let d = grid::l2_dist_sq(&r.minimizer, clean)?;
            Ok((r, d))
        })
        .collect();
    let mut reconstructions = Vec::with_capacity(solved.len());
    let mut distances = Vec::with_capacity(solved.len());
    for s in solved {
        let (r, d) = s?;
        reconstructions.push(r);
        distances.push(d);
    }
    Ok(UpperEval {
        i_bar: numerics::compensated_sum(distances.iter().copied()),
        distances,
        reconstructions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub param: ExtendedParam,
    /// `None` when a lower-level solve failed; see `error`.
    pub i_bar: Option<f64>,
    pub distances: Vec<f64>,
    pub refined: bool,
    pub converged: bool,
    pub possibly_nonunique: bool,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Sample {
    fn evaluate(family: &FamilySpec, param: ExtendedParam, training: &TrainingSet, cfg: &SolverConfig, refined: bool) -> Self {
        match extended_upper(family, param, training, cfg) {
            Ok(e) => Sample {
                param,
                i_bar: Some(e.i_bar),
                converged: e.reconstructions.iter().all(|r| r.converged),
                possibly_nonunique: e.reconstructions.iter().any(|r| r.possibly_nonunique),
                iterations: e.reconstructions.iter().map(|r| r.iterations).sum(),
                distances: e.distances,
                refined,
                error: None,
            },
            Err(err) => Sample {
                param,
                i_bar: None,
                distances: Vec::new(),
                refined,
                converged: false,
                possibly_nonunique: false,
                iterations: 0,
                error: Some(err.to_string()),
            },
        }
    }

    fn score(&self) -> f64 {
        self.i_bar.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub value: f64,
    pub holds: bool,
}

impl Condition {
    /// `lhs < rhs`, reported as the margin `rhs − lhs`.
    fn less(lhs: f64, rhs: f64) -> Self {
        Condition {
            value: rhs - lhs,
            holds: lhs < rhs,
        }
    }

    fn flag(holds: bool) -> Self {
        Condition {
            value: if holds { 1.0 } else { 0.0 },
            holds,
        }
    }
}

pub type ConditionMap = BTreeMap<String, Condition>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub lower_solves: usize,
    pub total_iterations: usize,
    pub unconverged_samples: usize,
    pub failed_samples: usize,
    pub possibly_nonunique_samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LearnReport {
    pub family: FamilySpec,
    pub grid: ParamGrid,
    pub refine_iters: usize,
    pub samples: Vec<Sample>,
    pub argmin: ExtendedParam,
    pub argmin_label: String,
    pub min_value: f64,
    pub interior: bool,
    pub conditions: ConditionMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions_error: Option<String>,
    pub stats: SolverStats,
}

/// Grid evaluation of `Ī` (edges included), golden-section refinement around
/// the best interior sample, and classification of the minimizer.
pub fn learn(
    family: &FamilySpec,
    training: &TrainingSet,
    grid_spec: &ParamGrid,
    refine_iters: usize,
    cfg: &SolverConfig,
) -> Result<LearnReport> {
    family.validate()?;
    grid_spec.validate(family)?;
    cfg.validate()?;
    let mut params: Vec<ExtendedParam> = Vec::new();
    if grid_spec.include_edges && family.has_lower_edge() {
        params.push(ExtendedParam::LowerEdge);
    }
    params.extend(grid_spec.points().into_iter().map(ExtendedParam::Interior));
    if grid_spec.include_edges {
        params.push(ExtendedParam::UpperEdge);
    }
    let mut samples: Vec<Sample> = params
        .par_iter()
        .map(|&p| Sample::evaluate(family, p, training, cfg, false))
        .collect();

    // Refine between the neighbours of the best interior sample.
    let interior: Vec<&Sample> = samples.iter().filter(|s| s.param.is_interior()).collect();
    let best_k = interior
        .iter()
        .enumerate()
        .filter(|(_, s)| s.i_bar.is_some())
        .min_by(|a, b| a.1.score().total_cmp(&b.1.score()))
        .map(|(k, _)| k);
    if let (Some(k), true) = (best_k, refine_iters > 0) {
        let value = |s: &Sample| s.param.interior_value().expect("interior");
        let lo = value(interior[k.saturating_sub(1)]);
        let hi = value(interior[(k + 1).min(interior.len() - 1)]);
        let tr = grid_spec.transform;
        let (a, b) = (tr.forward(lo), tr.forward(hi));
        let (a, b) = (a.min(b), a.max(b));
        let mut extra: Vec<Sample> = Vec::new();
        let known: Vec<(f64, f64)> = interior.iter().map(|s| (value(s), s.score())).collect();
        numerics::golden_section(
            |t| {
                let x = tr.inverse(t);
                if let Some(&(_, v)) = known.iter().find(|(p, _)| *p == x) {
                    return v;
                }
                if let Some(s) = extra.iter().find(|s| s.param == ExtendedParam::Interior(x)) {
                    return s.score();
                }
                if family.check_param(ExtendedParam::Interior(x)).is_err() {
                    return f64::INFINITY;
                }
                let s = Sample::evaluate(family, ExtendedParam::Interior(x), training, cfg, true);
                let v = s.score();
                extra.push(s);
                v
            },
            a,
            b,
            0.0,
            refine_iters,
        );
        samples.extend(extra);
    }
    samples.sort_by(|a, b| a.param.cmp_order(&b.param).then(a.refined.cmp(&b.refined)));
    samples.dedup_by(|a, b| a.param == b.param);

    let best = samples
        .iter()
        .filter(|s| s.i_bar.is_some())
        .fold(None::<&Sample>, |acc, s| match acc {
            Some(b) if b.score() <= s.score() => Some(b),
            _ => Some(s),
        })
        .ok_or_else(|| Error::Solver("every sample of the upper-level functional failed".into()))?;
    let argmin = best.param;
    let min_value = best.score();

    let (conditions, conditions_error) = match default_conditions(family, training, cfg) {
        Ok(c) => (c, None),
        Err(e) => (ConditionMap::new(), Some(e.to_string())),
    };
    let stats = SolverStats {
        lower_solves: samples.iter().filter(|s| s.i_bar.is_some()).count() * training.len(),
        total_iterations: samples.iter().map(|s| s.iterations).sum(),
        unconverged_samples: samples.iter().filter(|s| s.i_bar.is_some() && !s.converged).count(),
        failed_samples: samples.iter().filter(|s| s.i_bar.is_none()).count(),
        possibly_nonunique_samples: samples.iter().filter(|s| s.possibly_nonunique).count(),
    };
    Ok(LearnReport {
        family: family.clone(),
        grid: *grid_spec,
        refine_iters,
        argmin_label: family.describe(argmin),
        interior: argmin.is_interior(),
        argmin,
        min_value,
        samples,
        conditions,
        conditions_error,
        stats,
    })
}

/// `H1_α`–`H4_α`: structural properties of `R` and the two data conditions.
pub fn check_weight_conditions(training: &TrainingSet, base: &BaseRegularizer) -> Result<ConditionMap> {
    let mut m = ConditionMap::new();
    m.insert("H1_alpha".into(), Condition::flag(base.vanishes_exactly_on_constants()));
    // Every built-in base is a continuous convex function on the grid.
    m.insert("H2_alpha".into(), Condition::flag(true));
    let mut rc = 0.0;
    let mut re = 0.0;
    let mut noise = 0.0;
    let mut to_mean = 0.0;
    for (c, n) in training.pairs() {
        rc += base.value(c)?;
        re += base.value(n)?;
        noise += grid::l2_dist_sq(n, c)?;
        let mean = GridSignal::constant(c.grid(), grid::mean_value(n));
        to_mean += grid::l2_dist_sq(&mean, c)?;
    }
    m.insert("H3_alpha".into(), Condition::less(rc, re));
    m.insert("H4_alpha".into(), Condition::less(noise, to_mean));
    Ok(m)
}

/// `H4_p` at exponent `q` and `H5_p`, for the regularizer `α·R_p[f]`.
pub fn check_exponent_conditions(
    training: &TrainingSet,
    f: &DoubleIntegrand,
    q: f64,
    alpha: f64,
) -> Result<ConditionMap> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::param(format!("q must lie in [1, ∞), got {q}")));
    }
    let mut rc = 0.0;
    let mut re = 0.0;
    let mut reflected = 0.0;
    let mut sup_noisy = 0.0;
    for (c, n) in training.pairs() {
        rc += alpha * eval_exponent(ExtendedParam::Interior(q), f, c)?;
        re += alpha * eval_exponent(ExtendedParam::Interior(q), f, n)?;
        let twice = n.lincomb(2.0, c, -1.0)?;
        reflected += alpha * eval_exponent(ExtendedParam::UpperEdge, f, &twice)?;
        sup_noisy += alpha * eval_exponent(ExtendedParam::UpperEdge, f, n)?;
    }
    let mut m = ConditionMap::new();
    m.insert("H4_p".into(), Condition::less(rc, re));
    m.insert("H5_p".into(), Condition::less(reflected, sup_noisy));
    Ok(m)
}

/// Which nonlocal family the `δ` conditions are checked for.
#[derive(Debug, Clone)]
pub enum DeltaFamily<'a> {
    Ak(&'a RhoSpec),
    Bn { phi: &'a PhiSpec, k_phi: Option<f64> },
}

/// `R̃(u) = ∫∫ |u(x) − u(y)|/|x − y|` (AK) or `c ∫∫ |u(x) − u(y)|^r/|x − y|^{n+1}` (BN).
pub fn r_tilde(family: &DeltaFamily<'_>, u: &GridSignal) -> Result<f64> {
    let n = u.grid().dim() as i32;
    match family {
        DeltaFamily::Ak(_) => grid::double_integral(|x, y, a, b| (a - b).abs() / grid::distance(x, y), u),
        DeltaFamily::Bn { phi, .. } => {
            let (c, r) = phi.small_t_power().ok_or_else(|| {
                Error::Hypothesis("φ is not a pure power near 0, so R̃ is undefined".into())
            })?;
            grid::double_integral(
                |x, y, a, b| c * (a - b).abs().powf(r) / grid::distance(x, y).powi(n + 1),
                u,
            )
        }
    }
}

/// `H7_δ` (the data beat the TV model) and `H8_δ` (`R̃` prefers the clean data).
/// `tv_solver(weight, u^η)` returns the TV-model minimizer `w^(0)`.
pub fn check_delta_conditions<F>(
    training: &TrainingSet,
    family: &DeltaFamily<'_>,
    tv_solver: F,
) -> Result<ConditionMap>
where
    F: Fn(f64, &GridSignal) -> Result<GridSignal>,
{
    let dim = training.grid().dim();
    if let DeltaFamily::Ak(rho) = family {
        if !rho.equals_one_near_zero() {
            return Err(Error::Hypothesis("ρ must equal 1 near zero for these conditions".into()));
        }
    }
    let weight = match family {
        DeltaFamily::Ak(_) => kappa_n(dim)?,
        DeltaFamily::Bn { phi, k_phi } => match k_phi {
            Some(k) => *k,
            None => crate::regularizers::estimate_k_phi(
                phi,
                crate::regularizers::KPhiEstimate::DEFAULT_POINTS,
                &crate::regularizers::KPhiEstimate::DEFAULT_DELTAS,
            )?
            .value,
        },
    };
    let mut noise = 0.0;
    let mut tv_err = 0.0;
    let mut rc = 0.0;
    let mut re = 0.0;
    for (c, n) in training.pairs() {
        noise += grid::l2_dist_sq(n, c)?;
        let w0 = tv_solver(weight, n)?;
        tv_err += grid::l2_dist_sq(&w0, c)?;
        rc += r_tilde(family, c)?;
        re += r_tilde(family, n)?;
    }
    let mut m = ConditionMap::new();
    m.insert("H7_delta".into(), Condition::less(noise, tv_err));
    m.insert("H8_delta".into(), Condition::less(rc, re));
    Ok(m)
}

/// `H1_s` and `H2_s` for the spectral family.
pub fn check_spectral_conditions(training: &TrainingSet, mu: f64, m_max: usize) -> Result<ConditionMap> {
    let g = training.grid();
    let basis = std::sync::Arc::new(spectral::build_basis(g, m_max.min(g.points_per_axis() - 1))?);
    let r = spectral::check_conditions(training, mu, &basis)?;
    let mut m = ConditionMap::new();
    m.insert("H1_s".into(), Condition { value: r.h1_value, holds: r.h1_holds });
    m.insert("H2_s".into(), Condition { value: r.h2_value, holds: r.h2_holds });
    Ok(m)
}

/// The condition checks that apply to a family, with defaults (`q = 2`, unit weight).
pub fn default_conditions(family: &FamilySpec, training: &TrainingSet, cfg: &SolverConfig) -> Result<ConditionMap> {
    let tv = |w: f64, u: &GridSignal| -> Result<GridSignal> {
        Ok(solvers::solve_tv_weight(w, u, cfg)?.minimizer)
    };
    match family {
        FamilySpec::Weight { base } => check_weight_conditions(training, base),
        FamilySpec::Exponent { integrand } => check_exponent_conditions(training, integrand, 2.0, 1.0),
        FamilySpec::AubertKornprobst { rho } => check_delta_conditions(training, &DeltaFamily::Ak(rho), tv),
        FamilySpec::BrezisNguyen { phi, k_phi } => {
            if phi.small_t_power().is_none() {
                return Ok(ConditionMap::new());
            }
            check_delta_conditions(training, &DeltaFamily::Bn { phi, k_phi: *k_phi }, tv)
        }
        FamilySpec::SpectralFractional { mu, m_max } => check_spectral_conditions(training, *mu, *m_max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureVerdict {
    pub verdict: String,
    pub held: Vec<String>,
    pub violated: Vec<String>,
}

impl fmt::Display for StructureVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.verdict)
    }
}

/// Classification of a learning run: interior argmin (structure preserved)
/// or boundary argmin with the conditions that failed.
pub fn structure_report(report: &LearnReport) -> StructureVerdict {
    let held: Vec<String> = report.conditions.iter().filter(|(_, c)| c.holds).map(|(k, _)| k.clone()).collect();
    let violated: Vec<String> =
        report.conditions.iter().filter(|(_, c)| !c.holds).map(|(k, _)| k.clone()).collect();
    let verdict = if report.conditions.is_empty() {
        "unclassified".to_string()
    } else if report.interior {
        if violated.is_empty() {
            "structure preserved".to_string()
        } else {
            format!("structure preserved; violated: {}", violated.join(", "))
        }
    } else if violated.is_empty() {
        format!("boundary {}; no listed condition violated", report.argmin_label)
    } else {
        format!("boundary {}; violated: {}", report.argmin_label, violated.join(", "))
    };
    StructureVerdict { verdict, held, violated }
}
