use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::custom::Named;
use super::ExtendedParam;
use crate::error::{Error, Result};
use crate::grid::{self, GridSignal};

pub type KernelFn = dyn Fn(&[f64; 2]) -> f64 + Send + Sync;
pub type IntegrandFn = dyn Fn(&[f64; 2], &[f64; 2], f64, f64) -> f64 + Send + Sync;

/// Above this exponent `f^p` is evaluated relative to `max f`.
const LOG_SPACE_EXPONENT: f64 = 64.0;

/// Even kernel `a(z)`, evaluated at `z = x − y`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvenKernel {
    Constant(f64),
    #[serde(skip_deserializing)]
    Custom(Named<KernelFn>),
}

impl EvenKernel {
    pub fn eval(&self, z: &[f64; 2]) -> f64 {
        match self {
            EvenKernel::Constant(c) => *c,
            EvenKernel::Custom(k) => (k.f)(z),
        }
    }
}

/// Pair integrand `f(x, y, ξ, ζ)` of the exponent family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DoubleIntegrand {
    /// `a(x − y)|ξ − ζ|`.
    WeightedAbsDiff { kernel: EvenKernel },
    /// `b|ξ − ζ| / |x − y|`; its supremal limit is `b·Lip`.
    DiffQuotient { b: f64 },
    /// Arbitrary integrand with the growth constants it was checked against.
    #[serde(skip_deserializing)]
    Custom {
        callback: Named<IntegrandFn>,
        m: f64,
        delta_growth: f64,
        beta: f64,
    },
}

impl DoubleIntegrand {
    pub fn abs_diff(c: f64) -> Result<Self> {
        let f = DoubleIntegrand::WeightedAbsDiff {
            kernel: EvenKernel::Constant(c),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn diff_quotient(b: f64) -> Result<Self> {
        let f = DoubleIntegrand::DiffQuotient { b };
        f.validate()?;
        Ok(f)
    }

    /// Wraps a user integrand after spot-checking symmetry and the two-sided
    /// growth bounds on random samples.
    pub fn custom(
        name: impl Into<String>,
        f: Arc<IntegrandFn>,
        m: f64,
        delta_growth: f64,
        beta: f64,
    ) -> Result<Self> {
        let spec = DoubleIntegrand::Custom {
            callback: Named::new(name, f),
            m,
            delta_growth,
            beta,
        };
        spec.validate()?;
        spec.spot_check(4096, 0x5eed)?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DoubleIntegrand::WeightedAbsDiff {
                kernel: EvenKernel::Constant(c),
            } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::param(format!("kernel constant must be positive, got {c}")));
                }
            }
            DoubleIntegrand::WeightedAbsDiff { .. } => {}
            DoubleIntegrand::DiffQuotient { b } => {
                if !(*b > 0.0 && b.is_finite()) {
                    return Err(Error::param(format!("difference-quotient weight must be positive, got {b}")));
                }
            }
            DoubleIntegrand::Custom {
                m,
                delta_growth,
                beta,
                ..
            } => {
                if !(*m > 0.0) || !(*delta_growth > 0.0) || !(0.0..=1.0).contains(beta) {
                    return Err(Error::param("custom integrand needs M > 0, δ > 0 and β ∈ [0, 1]"));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: &[f64; 2], y: &[f64; 2], xi: f64, zeta: f64) -> f64 {
        match self {
            DoubleIntegrand::WeightedAbsDiff { kernel } => {
                kernel.eval(&[x[0] - y[0], x[1] - y[1]]) * (xi - zeta).abs()
            }
            DoubleIntegrand::DiffQuotient { b } => b * (xi - zeta).abs() / grid::distance(x, y),
            DoubleIntegrand::Custom { callback, .. } => (callback.f)(x, y, xi, zeta),
        }
    }

    /// `c(x, y)` when `f = c(x, y)|ξ − ζ|`, which makes `R_p` convex and lets
    /// solvers use exact subgradients.
    pub fn abs_diff_coefficient(&self, x: &[f64; 2], y: &[f64; 2]) -> Option<f64> {
        match self {
            DoubleIntegrand::WeightedAbsDiff { kernel } => {
                Some(kernel.eval(&[x[0] - y[0], x[1] - y[1]]))
            }
            DoubleIntegrand::DiffQuotient { b } => Some(b / grid::distance(x, y)),
            DoubleIntegrand::Custom { .. } => None,
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, DoubleIntegrand::Custom { .. })
    }

    fn spot_check(&self, samples: usize, seed: u64) -> Result<()> {
        let (m, delta, beta) = match self {
            DoubleIntegrand::Custom {
                m,
                delta_growth,
                beta,
                ..
            } => (*m, *delta_growth, *beta),
            _ => return Ok(()),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..samples {
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            // Half of the samples sit close to the diagonal, where the lower bound bites.
            let y = if k % 2 == 0 {
                [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]
            } else {
                let r = delta * rng.gen_range(0.01..1.0);
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                [x[0] + r * t.cos(), x[1] + r * t.sin()]
            };
            let xi = rng.gen_range(-10.0..10.0);
            let zeta = rng.gen_range(-10.0..10.0);
            let d = grid::distance(&x, &y);
            if d == 0.0 {
                continue;
            }
            let v = self.eval(&x, &y, xi, zeta);
            let quotient = (xi - zeta).abs() / d.powf(beta);
            let fail = |what: &str| {
                Err(Error::Hypothesis(format!(
                    "custom integrand {what} at x={x:?}, y={y:?}, ξ={xi}, ζ={zeta} (f={v})"
                )))
            };
            if !v.is_finite() || v < 0.0 {
                return fail("is not a finite non-negative value");
            }
            let swapped = self.eval(&y, &x, zeta, xi);
            if (swapped - v).abs() > 1e-12 * (1.0 + v.abs()) {
                return fail("is not symmetric under (x, ξ) ↔ (y, ζ)");
            }
            if v > m * (quotient + xi.abs() + zeta.abs() + 1.0) * (1.0 + 1e-12) {
                return fail("exceeds the upper growth bound");
            }
            if d < delta && v < quotient / m - m - 1e-12 {
                return fail("violates the lower growth bound");
            }
        }
        Ok(())
    }
}

/// Exponent family `R_p(u) = (⨍⨍ f^p)^{1/p}`; the upper edge is the pair maximum.
pub fn eval_exponent(p: ExtendedParam, f: &DoubleIntegrand, u: &GridSignal) -> Result<f64> {
    match p {
        ExtendedParam::Interior(p) => {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::param(format!("exponent must lie in [1, ∞), got {p}")));
            }
            let norm = u.grid().measure().powi(2);
            if p <= LOG_SPACE_EXPONENT {
                let s = grid::double_integral(|x, y, a, b| f.eval(x, y, a, b).powf(p), u)?;
                Ok((s / norm).powf(1.0 / p))
            } else {
                // max·(⨍⨍ (f/max)^p)^{1/p}: every power stays in [0, 1].
                let top = grid::pair_max(|x, y, a, b| f.eval(x, y, a, b), u)?;
                if top == 0.0 {
                    return Ok(0.0);
                }
                let s = grid::double_integral(|x, y, a, b| (f.eval(x, y, a, b) / top).powf(p), u)?;
                Ok(top * ((s.ln() - norm.ln()) / p).exp())
            }
        }
        ExtendedParam::UpperEdge => grid::pair_max(|x, y, a, b| f.eval(x, y, a, b), u),
        ExtendedParam::LowerEdge => Err(Error::param(
            "the exponent family has no lower edge: p = 1 belongs to the range",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn ramp(n: usize) -> GridSignal {
        let g = Grid::interval(0.0, 1.0, n).unwrap();
        GridSignal::from_fn(&g, |x| x[0])
    }

    #[test]
    fn abs_diff_examples() {
        let u = ramp(512);
        let f = DoubleIntegrand::abs_diff(1.0).unwrap();
        let r1 = eval_exponent(ExtendedParam::Interior(1.0), &f, &u).unwrap();
        assert!((r1 - 1.0 / 3.0).abs() < 1e-2);
        let r2 = eval_exponent(ExtendedParam::Interior(2.0), &f, &u).unwrap();
        assert!((r2 - (1.0f64 / 6.0).sqrt()).abs() < 1e-2);
        let top = eval_exponent(ExtendedParam::UpperEdge, &f, &u).unwrap();
        assert!((top - (1.0 - 1.0 / 512.0)).abs() < 1e-12);
    }

    #[test]
    fn log_space_branch_is_continuous() {
        let u = ramp(32);
        let f = DoubleIntegrand::abs_diff(1.0).unwrap();
        let below = eval_exponent(ExtendedParam::Interior(64.0), &f, &u).unwrap();
        let above = eval_exponent(ExtendedParam::Interior(64.0 + 1e-9), &f, &u).unwrap();
        assert!((below - above).abs() < 1e-9);
        let huge = eval_exponent(ExtendedParam::Interior(1e6), &f, &u).unwrap();
        assert!(huge.is_finite());
    }

    #[test]
    fn diff_quotient_upper_edge_is_scaled_lipschitz() {
        let g = Grid::interval(0.0, 1.0, 40).unwrap();
        let u = GridSignal::from_fn(&g, |x| (7.0 * x[0]).sin());
        let f = DoubleIntegrand::diff_quotient(2.5).unwrap();
        let top = eval_exponent(ExtendedParam::UpperEdge, &f, &u).unwrap();
        assert!((top - 2.5 * grid::lipschitz_constant(&u)).abs() < 1e-9);
    }

    #[test]
    fn custom_integrand_checks() {
        let good: Arc<IntegrandFn> = Arc::new(|x, y, a, b| (a - b).abs() / grid::distance(x, y).sqrt());
        assert!(DoubleIntegrand::custom("sqrt-quotient", good, 1.0, 0.5, 0.5).is_ok());
        let asym: Arc<IntegrandFn> = Arc::new(|_x, _y, a, b| (a - b).max(0.0));
        assert!(DoubleIntegrand::custom("one-sided", asym, 1.0, 0.5, 0.0).is_err());
        let weak: Arc<IntegrandFn> = Arc::new(|_x, _y, a, b| 1e-3 * (a - b).abs());
        assert!(DoubleIntegrand::custom("too-weak", weak, 2.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_constants() {
        assert!(DoubleIntegrand::abs_diff(0.0).is_err());
        assert!(DoubleIntegrand::diff_quotient(-1.0).is_err());
        let f = DoubleIntegrand::abs_diff(1.0).unwrap();
        assert!(eval_exponent(ExtendedParam::Interior(0.5), &f, &ramp(8)).is_err());
    }
}
