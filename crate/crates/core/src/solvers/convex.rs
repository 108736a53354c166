//! Convex nonlocal objectives. Objectives that are linear in the pair
//! differences `|u_a − u_b|` go to the primal-dual graph solver; the others use
//! subgradient descent warm-started at `u^η`.

use super::graph_tv::{graph_tv, Edges, GraphTvOutcome};
use super::pairs::{sgn, PairTable};
use super::polyak::{polyak, Objective, PolyakOutcome};
use super::{fidelity, solve_lipschitz, solve_quadratic_weight, solve_tv, Draft, Method, SolveResult, SolverConfig, StepRule};
use crate::error::{Error, Result};
use crate::grid::GridSignal;
use crate::regularizers::{eval_ak, eval_exponent, BaseRegularizer, DoubleIntegrand, ExtendedParam, RhoSpec};

fn diminishing(obj: &dyn Objective, x0: Vec<f64>, cfg: &SolverConfig, a: f64) -> PolyakOutcome {
    let mut x = x0;
    let mut best_x = x.clone();
    let mut best_f = obj.value(&x);
    let mut last_improvement = 0.0;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        let g = obj.subgradient(&x);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        iterations = k;
        if norm == 0.0 {
            break;
        }
        let step = a / ((k as f64).sqrt() * norm);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        let f = obj.value(&x);
        if f < best_f {
            last_improvement = (best_f - f) / best_f.abs().max(f64::MIN_POSITIVE);
            best_f = f;
            best_x.clone_from(&x);
        }
    }
    PolyakOutcome {
        x: best_x,
        f: best_f,
        iterations,
        residual: last_improvement,
        converged: last_improvement <= cfg.tol,
    }
}

fn run(obj: &dyn Objective, x0: Vec<f64>, cfg: &SolverConfig) -> (PolyakOutcome, Method) {
    match cfg.step_rule {
        StepRule::Polyak => (polyak(obj, x0, cfg), Method::PolyakSubgradient),
        StepRule::Diminishing { initial } => {
            (diminishing(obj, x0, cfg, initial), Method::DiminishingSubgradient)
        }
    }
}

fn primal_dual(edges: &Edges, u_eta: &GridSignal, cfg: &SolverConfig) -> (PolyakOutcome, Method) {
    let GraphTvOutcome {
        x,
        f,
        iterations,
        residual,
        converged,
    } = graph_tv(edges, u_eta.values(), u_eta.grid().cell_volume(), cfg);
    (
        PolyakOutcome {
            x,
            f,
            iterations,
            residual,
            converged,
        },
        Method::PrimalDual,
    )
}

/// Anisotropic 2D TV edges: `h₂` across rows, `h₁` across columns.
fn tv2d_edges(u: &GridSignal, alpha: f64) -> Edges {
    let grid = u.grid();
    let n = grid.points_per_axis();
    let [h1, h2] = grid.spacing();
    let mut e = Edges {
        a: Vec::new(),
        b: Vec::new(),
        w: Vec::new(),
    };
    for i in 0..n {
        for j in 0..n {
            let k = (i * n + j) as u32;
            if i + 1 < n {
                e.a.push(k);
                e.b.push(k + n as u32);
                e.w.push(alpha * h2);
            }
            if j + 1 < n {
                e.a.push(k);
                e.b.push(k + 1);
                e.w.push(alpha * h1);
            }
        }
    }
    e
}

fn draft_from(out: PolyakOutcome, method: Method, possibly_nonunique: bool) -> Draft {
    Draft {
        values: out.x,
        internal_objective: out.f,
        method,
        iterations: out.iterations,
        residual: out.residual,
        converged: out.converged,
        possibly_nonunique,
    }
}

struct WeightObjective<'a> {
    base: &'a BaseRegularizer,
    alpha: f64,
    eta: &'a GridSignal,
    vol: f64,
}

impl Objective for WeightObjective<'_> {
    fn value(&self, v: &[f64]) -> f64 {
        let u = self.eta.with_values(v.to_vec());
        fidelity(v, self.eta.values(), self.vol)
            + self.alpha * self.base.value(&u).unwrap_or(f64::INFINITY)
    }
    fn subgradient(&self, v: &[f64]) -> Vec<f64> {
        let u = self.eta.with_values(v.to_vec());
        let mut g = self.base.subgradient(&u).unwrap_or_else(|_| vec![0.0; v.len()]);
        for ((gi, a), b) in g.iter_mut().zip(v).zip(self.eta.values()) {
            *gi = self.alpha * *gi + 2.0 * self.vol * (a - b);
        }
        g
    }
}

/// Interior weight family `α·R`.
pub fn solve_weight(
    alpha: f64,
    base: &BaseRegularizer,
    u_eta: &GridSignal,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    match base {
        BaseRegularizer::QuadraticL2 => return solve_quadratic_weight(alpha, u_eta),
        BaseRegularizer::Tv if u_eta.grid().dim() == 1 => return solve_tv(alpha, u_eta),
        _ => {}
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("weight must be non-negative, got {alpha}")));
    }
    if matches!(base, BaseRegularizer::Tv) {
        let (out, method) = primal_dual(&tv2d_edges(u_eta, alpha), u_eta, cfg);
        return draft_from(out, method, false).certify(u_eta, |u| Ok(alpha * base.value(u)?));
    }
    let obj = WeightObjective {
        base,
        alpha,
        eta: u_eta,
        vol: u_eta.grid().cell_volume(),
    };
    let (out, method) = run(&obj, u_eta.values().to_vec(), cfg);
    draft_from(out, method, false).certify(u_eta, |u| Ok(alpha * base.value(u)?))
}

/// `fidelity + (Σ_pairs w·t^p)^{1/p}` with `t = c|u_a − u_b|`; `p = ∞` is the pair maximum.
struct PairPowerObjective<'a> {
    table: PairTable,
    /// Multiplies the pair sum before the root (ordered pairs and quadrature weight).
    scale: f64,
    p: f64,
    eta: &'a [f64],
    vol: f64,
}

impl PairPowerObjective<'_> {
    fn reg(&self, v: &[f64]) -> f64 {
        if self.p.is_infinite() {
            return self.table.argmax(v, |c, d| c * d.abs()).map_or(0.0, |m| m.0);
        }
        if self.p == 1.0 {
            return self.scale * self.table.sum(v, |c, d| c * d.abs());
        }
        let top = self.table.argmax(v, |c, d| c * d.abs()).map_or(0.0, |m| m.0);
        if top == 0.0 {
            return 0.0;
        }
        let p = self.p;
        let s = self.table.sum(v, |c, d| (c * d.abs() / top).powf(p));
        top * (self.scale * s).powf(1.0 / p)
    }
}

impl Objective for PairPowerObjective<'_> {
    fn value(&self, v: &[f64]) -> f64 {
        fidelity(v, self.eta, self.vol) + self.reg(v)
    }

    fn subgradient(&self, v: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = v
            .iter()
            .zip(self.eta)
            .map(|(a, b)| 2.0 * self.vol * (a - b))
            .collect();
        if self.p.is_infinite() {
            if let Some((t, i, j, c)) = self.table.argmax(v, |c, d| c * d.abs()) {
                if t > 0.0 {
                    let s = c * sgn(v[i] - v[j]);
                    g[i] += s;
                    g[j] -= s;
                }
            }
        } else if self.p == 1.0 {
            self.table.accumulate_grad(v, self.scale, &mut g, |c, d| c * sgn(d));
        } else {
            let r = self.reg(v);
            if r > 0.0 {
                let p = self.p;
                // ∂R/∂t_e = scale·(t_e/R)^{p−1}.
                self.table.accumulate_grad(v, self.scale, &mut g, |c, d| {
                    (c * d.abs() / r).powf(p - 1.0) * c * sgn(d)
                });
            }
        }
        g
    }
}

/// Aubert–Kornprobst family at an interior `δ`.
pub fn solve_ak(delta: f64, rho: &RhoSpec, u_eta: &GridSignal, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param(format!("δ must lie in (0, ∞), got {delta}")));
    }
    let grid = u_eta.grid();
    let vol = grid.cell_volume();
    let n = grid.dim() as i32;
    let coef = 2.0 * vol * vol / delta.powi(n);
    // The cutoff is padded; the kernel itself decides membership of boundary pairs.
    let cutoff = rho.support().map(|r| r * delta * (1.0 + 1e-9));
    let table = PairTable::build(grid, cutoff, |_, _, d| {
        coef * rho.eval(d / delta) / d
    });
    let (out, method) = primal_dual(&table.into_edges(1.0), u_eta, cfg);
    draft_from(out, method, false).certify(u_eta, |u| eval_ak(ExtendedParam::Interior(delta), rho, u))
}

struct CustomExponentObjective<'a> {
    f: &'a DoubleIntegrand,
    p: f64,
    eta: &'a GridSignal,
    nodes: Vec<[f64; 2]>,
    vol: f64,
}

impl CustomExponentObjective<'_> {
    fn pair_values(&self, v: &[f64]) -> (f64, Vec<(usize, usize, f64)>) {
        let mut vals = Vec::new();
        let mut top = 0.0f64;
        for i in 0..v.len() {
            for j in 0..v.len() {
                if i != j {
                    let t = self.f.eval(&self.nodes[i], &self.nodes[j], v[i], v[j]);
                    top = top.max(t);
                    vals.push((i, j, t));
                }
            }
        }
        (top, vals)
    }

    fn reg(&self, v: &[f64]) -> f64 {
        let u = self.eta.with_values(v.to_vec());
        let p = if self.p.is_infinite() {
            ExtendedParam::UpperEdge
        } else {
            ExtendedParam::Interior(self.p)
        };
        eval_exponent(p, self.f, &u).unwrap_or(f64::INFINITY)
    }

    fn dxi(&self, i: usize, j: usize, a: f64, b: f64) -> f64 {
        let e = 1e-6 * (1.0 + a.abs());
        (self.f.eval(&self.nodes[i], &self.nodes[j], a + e, b)
            - self.f.eval(&self.nodes[i], &self.nodes[j], a - e, b))
            / (2.0 * e)
    }
}

impl Objective for CustomExponentObjective<'_> {
    fn value(&self, v: &[f64]) -> f64 {
        fidelity(v, self.eta.values(), self.vol) + self.reg(v)
    }

    fn subgradient(&self, v: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = v
            .iter()
            .zip(self.eta.values())
            .map(|(a, b)| 2.0 * self.vol * (a - b))
            .collect();
        let (top, vals) = self.pair_values(v);
        if top == 0.0 {
            return g;
        }
        if self.p.is_infinite() {
            let &(i, j, _) = vals.iter().find(|e| e.2 == top).expect("maximum exists");
            // Symmetry gives ∂_ζ f(x_i, x_j, ·, ·) = ∂_ξ f(x_j, x_i, ·, ·).
            g[i] += self.dxi(i, j, v[i], v[j]);
            g[j] += self.dxi(j, i, v[j], v[i]);
            return g;
        }
        let r = self.reg(v);
        if !(r > 0.0) {
            return g;
        }
        let measure = self.eta.grid().measure().powi(2);
        let w = self.vol * self.vol / measure;
        for &(i, j, t) in &vals {
            if t > 0.0 {
                // d/du_i of (⨍⨍ f^p)^{1/p} through the ordered pair (i, j) and its mirror.
                let coeff = w * (t / r).powf(self.p - 1.0);
                g[i] += 2.0 * coeff * self.dxi(i, j, v[i], v[j]);
            }
        }
        g
    }
}

/// Exponent family at any `p ∈ [1, ∞]`.
pub fn solve_exponent(
    p: ExtendedParam,
    f: &DoubleIntegrand,
    u_eta: &GridSignal,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let grid = u_eta.grid();
    let exponent = match p {
        ExtendedParam::Interior(t) if t >= 1.0 && t.is_finite() => t,
        ExtendedParam::UpperEdge => f64::INFINITY,
        _ => return Err(Error::param("exponent must lie in [1, ∞]")),
    };
    if let (true, DoubleIntegrand::DiffQuotient { b }) = (exponent.is_infinite(), f) {
        if grid.dim() == 1 {
            // R_∞ = b·Lip(u).
            return solve_lipschitz(*b, u_eta);
        }
    }
    let vol = grid.cell_volume();
    let (out, method, nonunique) = if f.is_builtin() {
        let table = PairTable::build(grid, None, |x, y, _| f.abs_diff_coefficient(x, y).unwrap_or(0.0));
        let scale = 2.0 * vol * vol / grid.measure().powi(2);
        if exponent == 1.0 {
            let (out, method) = primal_dual(&table.into_edges(scale), u_eta, cfg);
            return draft_from(out, method, false).certify(u_eta, |u| eval_exponent(p, f, u));
        }
        let obj = PairPowerObjective {
            table,
            scale,
            p: exponent,
            eta: u_eta.values(),
            vol,
        };
        let (out, method) = run(&obj, u_eta.values().to_vec(), cfg);
        (out, method, false)
    } else {
        let obj = CustomExponentObjective {
            f,
            p: exponent,
            eta: u_eta,
            nodes: grid.nodes(),
            vol,
        };
        let (out, method) = run(&obj, u_eta.values().to_vec(), cfg);
        (out, method, true)
    };
    draft_from(out, method, nonunique).certify(u_eta, |u| eval_exponent(p, f, u))
}
