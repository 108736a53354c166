//! Brezis–Nguyen lower level: the objective is never convex, so this is a
//! multi-start local method. `converged` only certifies a stationary point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pairs::{sgn, PairTable};
use super::{fidelity, Draft, Method, SolveResult, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{self, GridSignal};
use crate::regularizers::{eval_bn, ExtendedParam, PhiSpec};

struct BnObjective<'a> {
    table: PairTable,
    phi: &'a PhiSpec,
    delta: f64,
    eta: &'a [f64],
    vol: f64,
}

impl BnObjective<'_> {
    fn value(&self, v: &[f64]) -> f64 {
        let (phi, delta) = (self.phi, self.delta);
        fidelity(v, self.eta, self.vol) + self.table.sum(v, |w, d| w * phi.eval(d.abs() / delta))
    }

    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = v
            .iter()
            .zip(self.eta)
            .map(|(a, b)| 2.0 * self.vol * (a - b))
            .collect();
        let (phi, delta) = (self.phi, self.delta);
        self.table.accumulate_grad(v, 1.0 / delta, &mut g, |w, d| {
            w * phi.deriv(d.abs() / delta) * sgn(d)
        });
        g
    }

    /// L² norm of the L²-gradient (the Euclidean gradient divided by the cell volume).
    fn residual(&self, g: &[f64]) -> f64 {
        (g.iter().map(|v| v * v).sum::<f64>() / self.vol).sqrt()
    }
}

struct Descent {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    residual: f64,
}

fn descend(obj: &BnObjective<'_>, x0: Vec<f64>, cfg: &SolverConfig, target: f64) -> Descent {
    let mut x = x0;
    let mut f = obj.value(&x);
    // 1/(2h^n) is the exact step for the fidelity term alone.
    let mut t = 0.5 / obj.vol;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut trial = vec![0.0; x.len()];
    while iterations < cfg.max_iters {
        let g = obj.gradient(&x);
        residual = obj.residual(&g);
        if residual <= target {
            break;
        }
        iterations += 1;
        let gg: f64 = g.iter().map(|v| v * v).sum();
        let mut accepted = false;
        for _ in 0..60 {
            for ((y, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
                *y = xi - t * gi;
            }
            let ft = obj.value(&trial);
            if ft <= f - 1e-4 * t * gg {
                std::mem::swap(&mut x, &mut trial);
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        t *= 2.0;
    }
    Descent {
        x,
        f,
        iterations,
        residual,
    }
}

/// Multi-start gradient descent for the Brezis–Nguyen family at an interior `δ`.
///
/// Start 0 is `u^η`; further starts perturb it with seeded uniform noise of
/// a tenth of its oscillation. The best local minimizer is returned.
pub fn solve_bn_local(
    delta: f64,
    phi: &PhiSpec,
    u_eta: &GridSignal,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param(format!("δ must lie in (0, ∞), got {delta}")));
    }
    let grid = u_eta.grid();
    let vol = grid.cell_volume();
    let power = (grid.dim() + 1) as i32;
    let coef = 2.0 * delta * vol * vol;
    let obj = BnObjective {
        table: PairTable::build(grid, None, |_, _, d| coef / d.powi(power)),
        phi,
        delta,
        eta: u_eta.values(),
        vol,
    };
    let target = cfg.tol * (1.0 + grid::l2_norm_sq(u_eta).sqrt());
    let amplitude = 0.1 * if u_eta.oscillation() > 0.0 { u_eta.oscillation() } else { 1.0 };
    let mut best: Option<Descent> = None;
    let mut total_iters = 0;
    for r in 0..cfg.restarts {
        let start = if r == 0 {
            u_eta.values().to_vec()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            u_eta
                .values()
                .iter()
                .map(|v| v + amplitude * rng.gen_range(-1.0..1.0))
                .collect()
        };
        let d = descend(&obj, start, cfg, target);
        total_iters += d.iterations;
        if best.as_ref().map_or(true, |b| d.f < b.f) {
            best = Some(d);
        }
    }
    let best = best.expect("at least one restart");
    let draft = Draft {
        values: best.x,
        internal_objective: best.f,
        method: Method::MultiStartGradient,
        iterations: total_iters,
        residual: best.residual,
        converged: best.residual <= target,
        possibly_nonunique: true,
    };
    draft.certify(u_eta, |u| eval_bn(ExtendedParam::Interior(delta), phi, u, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn constant_data_is_stationary() {
        let g = Grid::interval(0.0, 1.0, 32).unwrap();
        let c = GridSignal::constant(&g, -0.4);
        let phi = PhiSpec::quad_cap(1).unwrap();
        let r = solve_bn_local(0.5, &phi, &c, &SolverConfig::default()).unwrap();
        assert_eq!(r.minimizer, c);
        assert_eq!(r.objective, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn large_delta_keeps_the_data() {
        let g = Grid::interval(0.0, 1.0, 64).unwrap();
        let eta = GridSignal::from_fn(&g, |x| (5.0 * x[0]).sin());
        let phi = PhiSpec::one_minus_exp(1).unwrap();
        let cfg = SolverConfig::default();
        let r = solve_bn_local(1e4, &phi, &eta, &cfg).unwrap();
        let dist = grid::l2_dist_sq(&r.minimizer, &eta).unwrap().sqrt();
        assert!(dist < 1e-3, "{dist}");
        assert!(r.objective < 1e-3);
        assert!(r.certificate_gap < 1e-8);
    }

    #[test]
    fn more_restarts_never_hurt() {
        let g = Grid::interval(0.0, 1.0, 48).unwrap();
        let eta = GridSignal::from_fn(&g, |x| if x[0] < 0.5 { 0.0 } else { 1.0 } + 0.05 * (40.0 * x[0]).sin());
        let phi = PhiSpec::quad_cap(1).unwrap();
        let one = SolverConfig {
            restarts: 1,
            max_iters: 300,
            ..SolverConfig::default()
        };
        let eight = SolverConfig {
            restarts: 8,
            ..one.clone()
        };
        let a = solve_bn_local(0.2, &phi, &eta, &one).unwrap();
        let b = solve_bn_local(0.2, &phi, &eta, &eight).unwrap();
        assert!(b.objective <= a.objective);
        assert!(b.possibly_nonunique);
    }
}
