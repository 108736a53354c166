//! Regularizer families `R_λ` and their Mosco-limit models at the edges of
//! the parameter range.
//!
//! | family              | Λ        | lower edge            | upper edge              |
//! |---------------------|----------|-----------------------|-------------------------|
//! | weight `αR`         | (0, ∞)   | `0`                   | indicator of constants  |
//! | exponent `R_p`      | [1, ∞)   | (p = 1 is interior)   | `ess sup f`             |
//! | Brezis–Nguyen `R_δ` | (0, ∞)   | `K(φ)·TV`             | `0`                     |
//! | Aubert–Kornprobst   | (0, ∞)   | `κ_n·TV`              | `0`                     |
//! | spectral fractional | (0, 1)   | `μ‖u‖²`               | `μ‖∇u‖²`                |

mod custom;
mod integrand;
mod nonlocal;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use custom::{Functional, Named};
pub use integrand::{eval_exponent, DoubleIntegrand, EvenKernel, IntegrandFn, KernelFn};
pub use nonlocal::{
    estimate_k_phi, eval_ak, eval_bn, gamma_n, kappa_n, sphere_measure, PhiShape, PhiSpec,
    RhoShape, RhoSpec, KPhiEstimate, ScalarFn,
};

use crate::error::{Error, Result};
use crate::grid::{self, GridSignal};

/// Relative tolerance of the constancy test behind the indicator of constants.
pub const CONSTANCY_TOL: f64 = 1e-10;

/// A point of the closed parameter range `Λ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtendedParam {
    LowerEdge,
    Interior(f64),
    UpperEdge,
}

impl ExtendedParam {
    pub fn is_interior(&self) -> bool {
        matches!(self, ExtendedParam::Interior(_))
    }

    pub fn interior_value(&self) -> Option<f64> {
        match *self {
            ExtendedParam::Interior(t) => Some(t),
            _ => None,
        }
    }

    /// Total order: lower edge, interior values ascending, upper edge.
    pub fn sort_key(&self) -> (u8, f64) {
        match *self {
            ExtendedParam::LowerEdge => (0, 0.0),
            ExtendedParam::Interior(t) => (1, t),
            ExtendedParam::UpperEdge => (2, 0.0),
        }
    }

    pub fn cmp_order(&self, other: &Self) -> std::cmp::Ordering {
        let (a, x) = self.sort_key();
        let (b, y) = other.sort_key();
        a.cmp(&b).then(x.total_cmp(&y))
    }
}

/// A fixed convex regularizer `R` to be weighted by `α`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseRegularizer {
    /// `‖u‖²_{L²}`; vanishes only at 0, so it does not satisfy the
    /// "vanishes exactly on constants" hypothesis.
    QuadraticL2,
    /// Discrete total variation.
    Tv,
    /// `(∫∫ |u(x) − u(y)|^p / |x − y|^{βp})^{1/p}`.
    Gagliardo { p: f64, beta: f64 },
    #[serde(skip_deserializing)]
    Custom { callback: Named<dyn Functional> },
}

impl BaseRegularizer {
    pub fn value(&self, u: &GridSignal) -> Result<f64> {
        match self {
            BaseRegularizer::QuadraticL2 => Ok(grid::l2_norm_sq(u)),
            BaseRegularizer::Tv => Ok(grid::tv_discrete(u)),
            BaseRegularizer::Gagliardo { p, beta } => grid::gagliardo_seminorm(u, *p, *beta),
            BaseRegularizer::Custom { callback: c } => c.f.value(u),
        }
    }

    /// A subgradient with respect to the node values (Euclidean coordinates).
    pub fn subgradient(&self, u: &GridSignal) -> Result<Vec<f64>> {
        match self {
            BaseRegularizer::QuadraticL2 => {
                let w = 2.0 * u.grid().cell_volume();
                Ok(u.values().iter().map(|v| w * v).collect())
            }
            BaseRegularizer::Tv => Ok(tv_subgradient(u)),
            BaseRegularizer::Gagliardo { p, beta } => gagliardo_subgradient(u, *p, *beta),
            BaseRegularizer::Custom { callback: c } => c.f.subgradient(u),
        }
    }

    /// Whether the regularizer is convex and vanishes exactly on constants.
    pub fn vanishes_exactly_on_constants(&self) -> bool {
        match self {
            BaseRegularizer::QuadraticL2 => false,
            BaseRegularizer::Tv => true,
            BaseRegularizer::Gagliardo { .. } => true,
            BaseRegularizer::Custom { callback: c } => c.f.vanishes_exactly_on_constants(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            BaseRegularizer::QuadraticL2 => "quadratic_l2".into(),
            BaseRegularizer::Tv => "tv".into(),
            BaseRegularizer::Gagliardo { p, beta } => format!("gagliardo(p={p},beta={beta})"),
            BaseRegularizer::Custom { callback: c } => c.name.clone(),
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn tv_subgradient(u: &GridSignal) -> Vec<f64> {
    let grid = u.grid();
    let v = u.values();
    let mut g = vec![0.0; v.len()];
    match grid.dim() {
        1 => {
            for k in 0..v.len().saturating_sub(1) {
                let s = sgn(v[k + 1] - v[k]);
                g[k + 1] += s;
                g[k] -= s;
            }
        }
        _ => {
            let n = grid.points_per_axis();
            let [h1, h2] = grid.spacing();
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    if i + 1 < n {
                        let s = sgn(v[k + n] - v[k]) * h2;
                        g[k + n] += s;
                        g[k] -= s;
                    }
                    if j + 1 < n {
                        let s = sgn(v[k + 1] - v[k]) * h1;
                        g[k + 1] += s;
                        g[k] -= s;
                    }
                }
            }
        }
    }
    g
}

fn gagliardo_subgradient(u: &GridSignal, p: f64, beta: f64) -> Result<Vec<f64>> {
    let total = grid::gagliardo_seminorm(u, p, beta)?.powf(p);
    let n = u.len();
    if total <= 0.0 {
        return Ok(vec![0.0; n]);
    }
    let grid = u.grid();
    let nodes = grid.nodes();
    let vals = u.values();
    let w = grid.cell_volume().powi(2);
    let outer = total.powf(1.0 / p - 1.0) / p;
    let mut g = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = vals[i] - vals[j];
            if d == 0.0 {
                continue;
            }
            let dist = grid::distance(&nodes[i], &nodes[j]);
            // Ordered pairs (i, j) and (j, i) both contribute.
            acc += 2.0 * p * d.abs().powf(p - 1.0) * sgn(d) / dist.powf(beta * p);
        }
        g[i] = outer * w * acc;
    }
    Ok(g)
}

/// Weighted family `α·R`: interior `αR(u)`, `α = 0` gives 0, `α = ∞` gives
/// the indicator of the zero set of `R` (the constants, or `{0}` for the quadratic base).
pub fn eval_weight(alpha: ExtendedParam, base: &BaseRegularizer, u: &GridSignal) -> Result<f64> {
    match alpha {
        ExtendedParam::Interior(a) => {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::param(format!("weight must lie in (0, ∞), got {a}")));
            }
            Ok(a * base.value(u)?)
        }
        ExtendedParam::LowerEdge => Ok(0.0),
        // A quadratic base vanishes only at 0, so its limit is the indicator of {0}.
        ExtendedParam::UpperEdge if matches!(base, BaseRegularizer::QuadraticL2) => {
            Ok(if u.max_abs() == 0.0 { 0.0 } else { f64::INFINITY })
        }
        ExtendedParam::UpperEdge if !base.vanishes_exactly_on_constants() => Err(Error::Unsupported(
            format!("upper-edge model of the weighted {} regularizer", base.label()),
        )),
        ExtendedParam::UpperEdge => Ok(if u.is_constant(CONSTANCY_TOL) {
            0.0
        } else {
            f64::INFINITY
        }),
    }
}

/// One parametrized regularizer family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Weight {
        base: BaseRegularizer,
    },
    Exponent {
        integrand: DoubleIntegrand,
    },
    BrezisNguyen {
        phi: PhiSpec,
        #[serde(default)]
        k_phi: Option<f64>,
    },
    AubertKornprobst {
        rho: RhoSpec,
    },
    SpectralFractional {
        mu: f64,
        #[serde(default = "default_m_max")]
        m_max: usize,
    },
}

fn default_m_max() -> usize {
    64
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Weight { .. } => "weight",
            FamilySpec::Exponent { .. } => "exponent",
            FamilySpec::BrezisNguyen { .. } => "brezis_nguyen",
            FamilySpec::AubertKornprobst { .. } => "aubert_kornprobst",
            FamilySpec::SpectralFractional { .. } => "spectral_fractional",
        }
    }

    /// Symbol of the learned parameter, for reports.
    pub fn symbol(&self) -> &'static str {
        match self {
            FamilySpec::Weight { .. } => "α",
            FamilySpec::Exponent { .. } => "p",
            FamilySpec::BrezisNguyen { .. } | FamilySpec::AubertKornprobst { .. } => "δ",
            FamilySpec::SpectralFractional { .. } => "s",
        }
    }

    /// Closure `[lo, hi]` of the parameter range; `hi` may be infinite.
    pub fn range(&self) -> (f64, f64) {
        match self {
            FamilySpec::Exponent { .. } => (1.0, f64::INFINITY),
            FamilySpec::SpectralFractional { .. } => (0.0, 1.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Whether the lower end of the range is an edge (not part of Λ).
    pub fn has_lower_edge(&self) -> bool {
        !matches!(self, FamilySpec::Exponent { .. })
    }

    /// Human-readable value of a parameter (`0`, `∞`, `1`, or the number).
    pub fn describe(&self, param: ExtendedParam) -> String {
        let (lo, hi) = self.range();
        let show = |x: f64| {
            if x.is_infinite() {
                "∞".to_string()
            } else {
                format!("{x}")
            }
        };
        match param {
            ExtendedParam::LowerEdge => format!("{}={}", self.symbol(), show(lo)),
            ExtendedParam::UpperEdge => format!("{}={}", self.symbol(), show(hi)),
            ExtendedParam::Interior(t) => format!("{}={}", self.symbol(), t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::Weight { base } => {
                if let BaseRegularizer::Gagliardo { p, beta } = base {
                    if !(*p >= 1.0) || !(0.0..=1.0).contains(beta) {
                        return Err(Error::param("gagliardo base needs p ≥ 1 and β ∈ [0, 1]"));
                    }
                }
                Ok(())
            }
            FamilySpec::Exponent { integrand } => integrand.validate(),
            FamilySpec::BrezisNguyen { k_phi, .. } => match k_phi {
                Some(k) if !(*k > 0.0 && *k <= 1.0) => {
                    Err(Error::param(format!("K(φ) must lie in (0, 1], got {k}")))
                }
                _ => Ok(()),
            },
            FamilySpec::AubertKornprobst { .. } => Ok(()),
            FamilySpec::SpectralFractional { mu, m_max } => {
                if !(*mu > 0.0) || *m_max == 0 {
                    Err(Error::param("spectral family needs μ > 0 and m_max ≥ 1"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Checks that `param` is a point of `Λ̄` for this family.
    pub fn check_param(&self, param: ExtendedParam) -> Result<()> {
        match param {
            ExtendedParam::Interior(t) => {
                let ok = match self {
                    FamilySpec::Exponent { .. } => t >= 1.0 && t.is_finite(),
                    FamilySpec::SpectralFractional { .. } => t > 0.0 && t < 1.0,
                    _ => t > 0.0 && t.is_finite(),
                };
                if ok {
                    Ok(())
                } else {
                    Err(Error::param(format!(
                        "{} is not inside the parameter range of the {} family",
                        t,
                        self.name()
                    )))
                }
            }
            ExtendedParam::LowerEdge if !self.has_lower_edge() => Err(Error::param(
                "the exponent family has no lower edge: p = 1 belongs to the range",
            )),
            _ => Ok(()),
        }
    }

    /// `R̄_λ(u)` for any `λ ∈ Λ̄`. Spectral values require the sine basis and
    /// live in [`crate::spectral`].
    pub fn evaluate(&self, param: ExtendedParam, u: &GridSignal) -> Result<f64> {
        self.check_param(param)?;
        match self {
            FamilySpec::Weight { base } => eval_weight(param, base, u),
            FamilySpec::Exponent { integrand } => eval_exponent(param, integrand, u),
            FamilySpec::BrezisNguyen { phi, k_phi } => eval_bn(param, phi, u, *k_phi),
            FamilySpec::AubertKornprobst { rho } => eval_ak(param, rho, u),
            FamilySpec::SpectralFractional { mu, m_max } => {
                crate::spectral::eval_fractional(param, *mu, *m_max, u)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn weight_examples() {
        let g = Grid::interval(-1.0, 1.0, 256).unwrap();
        let u = GridSignal::from_fn(&g, |x| x[0]);
        let tv = grid::tv_discrete(&u);
        let v = eval_weight(ExtendedParam::Interior(2.0), &BaseRegularizer::Tv, &u).unwrap();
        assert!((v - 2.0 * tv).abs() < 1e-12);
        assert!((v - 4.0).abs() <= 2.0 * g.h() + 1e-12);
        assert_eq!(eval_weight(ExtendedParam::LowerEdge, &BaseRegularizer::Tv, &u).unwrap(), 0.0);
        let five = GridSignal::constant(&g, 5.0);
        assert_eq!(eval_weight(ExtendedParam::UpperEdge, &BaseRegularizer::Tv, &five).unwrap(), 0.0);
        assert!(eval_weight(ExtendedParam::UpperEdge, &BaseRegularizer::Tv, &u)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn weight_is_linear_in_alpha() {
        let g = Grid::interval(0.0, 1.0, 64).unwrap();
        let u = GridSignal::from_fn(&g, |x| (9.0 * x[0]).sin());
        for base in [BaseRegularizer::Tv, BaseRegularizer::QuadraticL2] {
            let one = eval_weight(ExtendedParam::Interior(0.375), &base, &u).unwrap();
            let two = eval_weight(ExtendedParam::Interior(0.75), &base, &u).unwrap();
            assert_eq!(two, 2.0 * one);
        }
    }

    #[test]
    fn tv_subgradient_matches_directional_derivative() {
        let g = Grid::interval(0.0, 1.0, 20).unwrap();
        let u = GridSignal::from_fn(&g, |x| (5.0 * x[0]).sin());
        let s = tv_subgradient(&u);
        let dir: Vec<f64> = (0..20).map(|k| ((k * 7 % 5) as f64 - 2.0) * 0.1).collect();
        let eps = 1e-7;
        let up = u.with_values(u.values().iter().zip(&dir).map(|(a, d)| a + eps * d).collect());
        let fd = (grid::tv_discrete(&up) - grid::tv_discrete(&u)) / eps;
        let lin: f64 = s.iter().zip(&dir).map(|(a, b)| a * b).sum();
        assert!((fd - lin).abs() < 1e-6);
    }

    #[test]
    fn gagliardo_subgradient_matches_finite_differences() {
        let g = Grid::interval(0.0, 1.0, 12).unwrap();
        let u = GridSignal::from_fn(&g, |x| (4.0 * x[0]).cos() + x[0]);
        let base = BaseRegularizer::Gagliardo { p: 2.0, beta: 0.5 };
        let s = base.subgradient(&u).unwrap();
        let eps = 1e-6;
        for k in [0, 5, 11] {
            let mut v = u.values().to_vec();
            v[k] += eps;
            let up = base.value(&u.with_values(v.clone())).unwrap();
            v[k] -= 2.0 * eps;
            let down = base.value(&u.with_values(v)).unwrap();
            assert!(((up - down) / (2.0 * eps) - s[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn param_checks() {
        let ex = FamilySpec::Exponent {
            integrand: DoubleIntegrand::diff_quotient(1.0).unwrap(),
        };
        assert!(ex.check_param(ExtendedParam::Interior(1.0)).is_ok());
        assert!(ex.check_param(ExtendedParam::Interior(0.5)).is_err());
        assert!(ex.check_param(ExtendedParam::LowerEdge).is_err());
        let fr = FamilySpec::SpectralFractional { mu: 0.1, m_max: 8 };
        assert!(fr.check_param(ExtendedParam::Interior(1.0)).is_err());
        assert_eq!(fr.describe(ExtendedParam::UpperEdge), "s=1");
        let w = FamilySpec::Weight { base: BaseRegularizer::Tv };
        assert_eq!(w.describe(ExtendedParam::UpperEdge), "α=∞");
    }

    #[test]
    fn extended_param_ordering() {
        let mut v = vec![
            ExtendedParam::UpperEdge,
            ExtendedParam::Interior(2.0),
            ExtendedParam::LowerEdge,
            ExtendedParam::Interior(0.5),
        ];
        v.sort_by(|a, b| a.cmp_order(b));
        assert_eq!(
            v,
            vec![
                ExtendedParam::LowerEdge,
                ExtendedParam::Interior(0.5),
                ExtendedParam::Interior(2.0),
                ExtendedParam::UpperEdge
            ]
        );
    }
}
