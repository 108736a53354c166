//! Built-in datasets generated from closed-form formulas, and demo drivers
//! that compare computed quantities with their known values.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::json;

use crate::bilevel::{self, GridTransform, ParamGrid};
use crate::error::{Error, Result};
use crate::grid::{self, Grid, GridSignal, TrainingSet};
use crate::mosco::sawtooth;
use crate::regularizers::{BaseRegularizer, DoubleIntegrand, ExtendedParam, FamilySpec, RhoSpec};
use crate::solvers::{self, SolverConfig};
use crate::spectral;

pub const DEMOS: [&str; 4] = ["remark-2.3", "example-4.2", "example-5.3", "remark-7.4"];

pub const DATASETS: [&str; 6] = [
    "remark-2.3",
    "example-4.2b",
    "example-4.2c",
    "example-5.3a",
    "example-5.3b",
    "remark-7.4",
];

/// Noise level of the sawtooth pair.
pub const SAWTOOTH_EPS: f64 = 0.1;
/// Weight of the Lipschitz regularizer in the affine pair.
pub const AFFINE_ALPHA: f64 = 0.01;
/// Points per axis of the two-mode spectral pair, and its basis size.
pub const TWO_MODE_POINTS: usize = 32;
pub const TWO_MODE_M_MAX: usize = 10;

/// `u^c`, `u^η` of the sawtooth pair on `N` cells of `(0, 1)`.
pub fn sawtooth_pair(n: usize, eps: f64) -> Result<(GridSignal, GridSignal)> {
    let g = Grid::interval(0.0, 1.0, n)?;
    let clean = GridSignal::from_fn(&g, |x| {
        let x = x[0];
        if x > 1.0 / 3.0 && x <= 2.0 / 3.0 {
            10.0 * sawtooth(3.0 * x - 1.0)
        } else {
            0.0
        }
    });
    let noisy = GridSignal::from_fn(&g, |x| {
        let x = x[0];
        if x <= 1.0 / 3.0 {
            sawtooth(3.0 * x)
        } else if x <= 2.0 / 3.0 {
            (10.0 - eps) * sawtooth(3.0 * x - 1.0)
        } else {
            sawtooth(3.0 * x - 2.0)
        }
    });
    Ok((clean, noisy))
}

pub fn builtin_dataset(name: &str) -> Result<TrainingSet> {
    match name {
        "remark-2.3" => {
            let g = Grid::interval(0.0, PI, 128)?;
            let u = GridSignal::from_fn(&g, |x| x[0].sin());
            TrainingSet::single(u.clone(), u)
        }
        "example-4.2b" => {
            let (c, n) = sawtooth_pair(512, SAWTOOTH_EPS)?;
            TrainingSet::single(c, n)
        }
        "example-4.2c" => {
            let g = Grid::interval(0.0, 1.0, 512)?;
            let c = GridSignal::from_fn(&g, |x| x[0] - 0.5);
            let n = c.scale(1.0 + 6.0 * AFFINE_ALPHA);
            TrainingSet::single(c, n)
        }
        "example-5.3a" => {
            let g = Grid::interval(-1.0, 1.0, 256)?;
            let u = GridSignal::from_fn(&g, |x| (0.5 * PI * x[0]).sin());
            TrainingSet::single(u.clone(), u)
        }
        "example-5.3b" => {
            let g = Grid::interval(-1.0, 1.0, 1024)?;
            TrainingSet::single(GridSignal::zeros(&g), GridSignal::from_fn(&g, |x| x[0]))
        }
        "remark-7.4" => Ok(spectral::two_mode_example(TWO_MODE_POINTS, TWO_MODE_M_MAX)?.0),
        _ => Err(Error::Config(format!(
            "unknown built-in dataset `{name}`; expected one of {}",
            DATASETS.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoCheck {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl DemoCheck {
    fn close(name: &str, expected: f64, computed: f64, tol: f64) -> Self {
        DemoCheck {
            name: name.into(),
            expected: format!("{expected:.9} ± {tol:e}"),
            computed: format!("{computed:.9}"),
            pass: (computed - expected).abs() <= tol,
        }
    }

    fn at_most(name: &str, bound: f64, computed: f64) -> Self {
        DemoCheck {
            name: name.into(),
            expected: format!("≤ {bound:e}"),
            computed: format!("{computed:e}"),
            pass: computed <= bound,
        }
    }

    fn equal(name: &str, expected: &str, computed: &str) -> Self {
        DemoCheck {
            name: name.into(),
            expected: expected.into(),
            computed: computed.into(),
            pass: expected == computed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub name: String,
    pub checks: Vec<DemoCheck>,
    pub pass: bool,
    pub details: serde_json::Value,
}

impl DemoReport {
    fn new(name: &str, checks: Vec<DemoCheck>, details: serde_json::Value) -> Self {
        DemoReport {
            name: name.into(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            details,
        }
    }

    /// Expected-vs-computed table for the terminal.
    pub fn table(&self) -> String {
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
        let mut s = format!("demo {}\n", self.name);
        for c in &self.checks {
            s += &format!(
                "  {:<w$}  expected {:<28} computed {:<20} {}\n",
                c.name,
                c.expected,
                c.computed,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        s += if self.pass { "all checks passed\n" } else { "some checks FAILED\n" };
        s
    }
}

fn label(p: ExtendedParam) -> String {
    match p {
        ExtendedParam::LowerEdge => "lower_edge".into(),
        ExtendedParam::UpperEdge => "upper_edge".into(),
        ExtendedParam::Interior(t) => format!("interior({t})"),
    }
}

pub fn run_demo(name: &str, cfg: &SolverConfig) -> Result<DemoReport> {
    match name {
        "remark-2.3" => quadratic_identical_pair(cfg),
        "example-4.2" => sawtooth_lipschitz(cfg),
        "example-5.3" => ak_edges(cfg),
        "remark-7.4" => two_mode_spectral(),
        _ => Err(Error::Config(format!("unknown demo `{name}`; expected one of {}", DEMOS.join(", ")))),
    }
}

/// Quadratic weight with `u^c = u^η`: `Ī(α) = (α/(1+α))²‖u^c‖²`, minimal at `α = 0`.
fn quadratic_identical_pair(cfg: &SolverConfig) -> Result<DemoReport> {
    let t = builtin_dataset("remark-2.3")?;
    let fam = FamilySpec::Weight { base: BaseRegularizer::QuadraticL2 };
    let grid = ParamGrid::new(GridTransform::Log, 1e-3, 1e2, 20);
    let rep = bilevel::learn(&fam, &t, &grid, 0, cfg)?;
    let norm = grid::l2_norm_sq(&t.pairs()[0].0);
    let mut worst: f64 = 0.0;
    for s in &rep.samples {
        let expect = match s.param {
            ExtendedParam::Interior(a) => (a / (1.0 + a)).powi(2) * norm,
            ExtendedParam::LowerEdge => 0.0,
            ExtendedParam::UpperEdge => norm,
        };
        worst = worst.max((s.i_bar.unwrap_or(f64::INFINITY) - expect).abs());
    }
    let checks = vec![
        DemoCheck::at_most("max |Ī(α) − (α/(1+α))²‖u^c‖²| over the grid", 1e-10, worst),
        DemoCheck::equal("argmin", "lower_edge", &label(rep.argmin)),
    ];
    Ok(DemoReport::new("remark-2.3", checks, json!({ "learn": rep })))
}

/// Sawtooth Lipschitz constants, and the Lipschitz reconstruction of an affine pair.
fn sawtooth_lipschitz(cfg: &SolverConfig) -> Result<DemoReport> {
    let eps = SAWTOOTH_EPS;
    let b = builtin_dataset("example-4.2b")?;
    let (c, n) = &b.pairs()[0];
    let lip_n = grid::lipschitz_constant(n);
    let lip_2n_c = grid::lipschitz_constant(&n.lincomb(2.0, c, -1.0)?);
    let cond = bilevel::check_exponent_conditions(&b, &DoubleIntegrand::diff_quotient(1.0)?, 2.0, AFFINE_ALPHA)?;

    let t = builtin_dataset("example-4.2c")?;
    let (uc, ueta) = &t.pairs()[0];
    let w = solvers::solve_lipschitz(AFFINE_ALPHA, ueta)?;
    let l2 = grid::l2_dist_sq(&w.minimizer, uc)?.sqrt();
    let fam = FamilySpec::Exponent { integrand: DoubleIntegrand::diff_quotient(AFFINE_ALPHA)? };
    let i_inf = bilevel::extended_upper(&fam, ExtendedParam::UpperEdge, &t, cfg)?.i_bar;
    let checks = vec![
        DemoCheck::close("Lip(u^η) = 30 − 3ε", 30.0 - 3.0 * eps, lip_n, 1e-9),
        DemoCheck::close("Lip(2u^η − u^c) = 30 − 6ε", 30.0 - 6.0 * eps, lip_2n_c, 1e-9),
        DemoCheck::equal("H5_p", "true", &cond["H5_p"].holds.to_string()),
        DemoCheck::at_most("‖w^(∞) − u^c‖ on the affine pair", 1e-3, l2),
        DemoCheck::at_most("Ī(∞) on the affine pair", 1e-6, i_inf),
    ];
    Ok(DemoReport::new(
        "example-4.2",
        checks,
        json!({ "conditions": cond, "lipschitz_solve": { "iterations": w.iterations, "certificate_gap": w.certificate_gap } }),
    ))
}

/// AK family: identical pair → `δ = ∞`; ramp against zero → `δ = 0`.
fn ak_edges(cfg: &SolverConfig) -> Result<DemoReport> {
    let fam = FamilySpec::AubertKornprobst { rho: RhoSpec::unit_ball(1)? };
    let a = builtin_dataset("example-5.3a")?;
    let rep_a = bilevel::learn(&fam, &a, &ParamGrid::new(GridTransform::Log, 0.3, 10.0, 4), 0, cfg)?;
    let b = builtin_dataset("example-5.3b")?;
    let lower = bilevel::extended_upper(&fam, ExtendedParam::LowerEdge, &b, cfg)?.i_bar;
    let rep_b = bilevel::learn(&fam, &b, &ParamGrid::new(GridTransform::Log, 0.05, 0.4, 3), 0, cfg)?;
    let checks = vec![
        DemoCheck::equal("a) argmin", "upper_edge", &label(rep_a.argmin)),
        DemoCheck::at_most("a) Ī(∞)", 0.0, rep_a.min_value),
        DemoCheck::at_most("b) Ī(0) on N=1024", 1e-4, lower),
        DemoCheck::equal("b) argmin", "lower_edge", &label(rep_b.argmin)),
    ];
    let verdict_a = bilevel::structure_report(&rep_a);
    Ok(DemoReport::new(
        "example-5.3",
        checks,
        json!({ "a": rep_a, "a_structure": verdict_a, "b": rep_b }),
    ))
}

/// Two-mode spectral data: the `μ` window and the learned `s`.
fn two_mode_spectral() -> Result<DemoReport> {
    let (t, basis) = spectral::two_mode_example(TWO_MODE_POINTS, TWO_MODE_M_MAX)?;
    let data = spectral::SpectralData::new(&t, &basis)?;
    let (mu_minus, mu_plus) = spectral::mu_window_data(&data, (1e-4, 1.0))?;
    let inside = spectral::learn_s_data(&data, 0.05);
    let low = spectral::learn_s_data(&data, 0.023);
    let high = spectral::learn_s_data(&data, 0.11);
    let checks = vec![
        DemoCheck::close("μ₊ = log 200/(100 log 2)", 200f64.ln() / (100.0 * 2f64.ln()), mu_plus, 1e-6),
        DemoCheck::close("μ₋", 0.0236, mu_minus, 5e-4),
        DemoCheck::equal("ŝ(0.05) interior", "true", &(!inside.boundary && inside.s_hat > 0.0 && inside.s_hat < 1.0).to_string()),
        DemoCheck::close("ŝ(0.023)", 1.0, low.s_hat, 0.0),
        DemoCheck::close("ŝ(0.11)", 0.0, high.s_hat, 0.0),
    ];
    Ok(DemoReport::new(
        "remark-7.4",
        checks,
        json!({ "mu_minus": mu_minus, "mu_plus": mu_plus, "s_hat": { "0.05": inside.s_hat, "0.023": low.s_hat, "0.11": high.s_hat } }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datasets_build() {
        for d in DATASETS {
            let t = builtin_dataset(d).unwrap();
            assert_eq!(t.len(), 1);
        }
        assert!(builtin_dataset("x").is_err());
    }

    #[test]
    fn fast_demos_pass() {
        for d in ["remark-2.3", "remark-7.4"] {
            let r = run_demo(d, &SolverConfig::default()).unwrap();
            assert!(r.pass, "{}", r.table());
        }
    }
}
