//! Projection onto slope-bounded 1D signals `{|u_{k+1} − u_k| ≤ c}`.
//!
//! The dual of the projection is a tridiagonal ℓ¹-penalized quadratic; a
//! primal-dual active-set iteration solves it exactly in a handful of Thomas
//! solves. Dykstra's cyclic pairwise clipping serves as fallback and as the
//! independent oracle in tests.

use crate::numerics::solve_tridiagonal;

pub(crate) struct Projection {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub max_violation: f64,
    pub converged: bool,
}

fn apply_dt(eta: &[f64], z: &[f64]) -> Vec<f64> {
    let n = eta.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { z[i - 1] } else { 0.0 };
            let right = if i + 1 < n { z[i] } else { 0.0 };
            eta[i] - (left - right)
        })
        .collect()
}

fn violation(u: &[f64], c: f64) -> f64 {
    u.windows(2)
        .map(|w| ((w[1] - w[0]).abs() - c).max(0.0))
        .fold(0.0, f64::max)
}

fn feasibility_tol(c: f64, u: &[f64]) -> f64 {
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // Thomas-solve roundoff grows with the signal scale; below that floor the
    // slope bound cannot be resolved anyway.
    1e-10 * c + 1e-13 * (1.0 + scale)
}

pub(crate) fn project_slope(eta: &[f64], c: f64, tol: f64) -> Projection {
    let n = eta.len();
    if n < 2 || violation(eta, c) == 0.0 {
        return Projection {
            u: eta.to_vec(),
            iterations: 0,
            max_violation: 0.0,
            converged: true,
        };
    }
    if c <= 0.0 {
        let mean = eta.iter().sum::<f64>() / n as f64;
        return Projection {
            u: vec![mean; n],
            iterations: 0,
            max_violation: 0.0,
            converged: true,
        };
    }
    if let Some(p) = active_set(eta, c) {
        return p;
    }
    dykstra(eta, c, tol, 200_000)
}

fn active_set(eta: &[f64], c: f64) -> Option<Projection> {
    let n = eta.len();
    let m = n - 1;
    let b: Vec<f64> = eta.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sign: Vec<i8> = b
        .iter()
        .map(|&d| if d > c { 1 } else if d < -c { -1 } else { 0 })
        .collect();
    for it in 1..=200 {
        let active: Vec<usize> = (0..m).filter(|&k| sign[k] != 0).collect();
        let mut z = vec![0.0; m];
        if !active.is_empty() {
            let diag = vec![2.0; active.len()];
            let off: Vec<f64> = active
                .windows(2)
                .map(|w| if w[1] == w[0] + 1 { -1.0 } else { 0.0 })
                .collect();
            let rhs: Vec<f64> = active.iter().map(|&k| b[k] - c * sign[k] as f64).collect();
            let za = solve_tridiagonal(&diag, &off, &rhs);
            for (&k, v) in active.iter().zip(za) {
                z[k] = v;
            }
        }
        let u = apply_dt(eta, &z);
        let mut next = vec![0i8; m];
        for k in 0..m {
            let du = u[k + 1] - u[k];
            if z[k] + (du - c) > 0.0 {
                next[k] = 1;
            } else if z[k] + (du + c) < 0.0 {
                next[k] = -1;
            }
        }
        if next == sign {
            let max_violation = violation(&u, c);
            let signs_ok = (0..m).all(|k| z[k] * sign[k] as f64 >= 0.0);
            if max_violation <= feasibility_tol(c, &u) && signs_ok {
                return Some(Projection {
                    u,
                    iterations: it,
                    max_violation,
                    converged: true,
                });
            }
            return None;
        }
        sign = next;
    }
    None
}

/// Dykstra's alternating projections over the slabs `|u_{k+1} − u_k| ≤ c`.
pub(crate) fn dykstra(eta: &[f64], c: f64, tol: f64, max_sweeps: usize) -> Projection {
    let n = eta.len();
    let mut u = eta.to_vec();
    let mut p = vec![[0.0f64; 2]; n.saturating_sub(1)];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut moved = 0.0f64;
        for k in 0..n - 1 {
            let w0 = u[k] + p[k][0];
            let w1 = u[k + 1] + p[k][1];
            let d = w1 - w0;
            let shift = if d > c {
                0.5 * (d - c)
            } else if d < -c {
                0.5 * (d + c)
            } else {
                0.0
            };
            let (n0, n1) = (w0 + shift, w1 - shift);
            p[k] = [w0 - n0, w1 - n1];
            moved = moved.max((n0 - u[k]).abs()).max((n1 - u[k + 1]).abs());
            u[k] = n0;
            u[k + 1] = n1;
        }
        if violation(&u, c) <= feasibility_tol(c, &u) && moved <= tol {
            converged = true;
            break;
        }
    }
    let max_violation = violation(&u, c);
    Projection {
        u,
        iterations: sweeps,
        max_violation,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn affine_signal_is_rescaled_about_its_mean() {
        let n = 50;
        let eta: Vec<f64> = (0..n).map(|i| 3.0 * i as f64).collect();
        let p = project_slope(&eta, 1.0, 1e-12);
        assert!(p.converged);
        let mean = eta.iter().sum::<f64>() / n as f64;
        for (i, v) in p.u.iter().enumerate() {
            let expect = mean + (i as f64 - (n as f64 - 1.0) / 2.0);
            assert!((v - expect).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn active_set_agrees_with_dykstra(eta in prop::collection::vec(-1.0f64..1.0, 2..25), c in 0.01f64..0.5) {
            let p = project_slope(&eta, c, 1e-13);
            prop_assert!(p.converged);
            prop_assert!(violation(&p.u, c) <= 1e-10 * c + 1e-15);
            let d = dykstra(&eta, c, 1e-14, 2_000_000);
            for (a, b) in p.u.iter().zip(&d.u) {
                prop_assert!((a - b).abs() < 1e-7, "{:?} vs {:?}", p.u, d.u);
            }
        }
    }
}
