//! Exact 1D total-variation denoising (Condat's direct algorithm, the
//! taut-string solution computed without building the string).

/// Minimizer of `½‖x − y‖² + λ Σ |x_{k+1} − x_k|`.
pub(crate) fn tv1d_denoise(y: &[f64], lambda: f64) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    if n == 0 {
        return x;
    }
    if lambda <= 0.0 {
        x.copy_from_slice(y);
        return x;
    }
    let two_lambda = 2.0 * lambda;
    let min_lambda = -lambda;
    let (mut k, mut k0, mut kminus, mut kplus) = (0usize, 0usize, 0usize, 0usize);
    let (mut umin, mut umax) = (lambda, min_lambda);
    let (mut vmin, mut vmax) = (y[0] - lambda, y[0] + lambda);
    loop {
        while k == n - 1 {
            if umin < 0.0 {
                loop {
                    x[k0] = vmin;
                    k0 += 1;
                    if k0 > kminus {
                        break;
                    }
                }
                k = k0;
                kminus = k0;
                vmin = y[k0];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                loop {
                    x[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kplus = k0;
                vmax = y[k0];
                umax = min_lambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                while k0 <= k {
                    x[k0] = vmin;
                    k0 += 1;
                }
                return x;
            }
        }
        umin += y[k + 1] - vmin;
        if umin < min_lambda {
            loop {
                x[k0] = vmin;
                k0 += 1;
                if k0 > kminus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = y[k0];
            vmax = vmin + two_lambda;
            umin = lambda;
            umax = min_lambda;
            continue;
        }
        umax += y[k + 1] - vmax;
        if umax > lambda {
            loop {
                x[k0] = vmax;
                k0 += 1;
                if k0 > kplus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = y[k0];
            vmin = vmax - two_lambda;
            umin = lambda;
            umax = min_lambda;
            continue;
        }
        k += 1;
        if umin >= lambda {
            kminus = k;
            vmin += (umin - lambda) / (kminus - k0 + 1) as f64;
            umin = lambda;
        }
        if umax <= min_lambda {
            kplus = k;
            vmax += (umax + lambda) / (kplus - k0 + 1) as f64;
            umax = min_lambda;
        }
    }
}

/// Duality gap of `x` for `½‖x − y‖² + λ‖Dx‖₁`, using the dual point built
/// from the cumulative residual and clipped to the feasible box.
pub(crate) fn tv1d_gap(y: &[f64], x: &[f64], lambda: f64) -> f64 {
    let n = y.len();
    let primal = 0.5 * x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        + lambda * x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
    // z_k = Σ_{i≤k} (x_i − y_i), so that y − Dᵀz = x before clipping.
    let mut z = Vec::with_capacity(n.saturating_sub(1));
    let mut acc = 0.0;
    for i in 0..n.saturating_sub(1) {
        acc += x[i] - y[i];
        z.push(acc.clamp(-lambda, lambda));
    }
    // Dual objective ½‖y‖² − ½‖y − Dᵀz‖² with (Dᵀz)_i = z_{i−1} − z_i.
    let mut dual = 0.0;
    for i in 0..n {
        let left = if i > 0 { z[i - 1] } else { 0.0 };
        let right = if i + 1 < n { z[i] } else { 0.0 };
        let r = y[i] - (left - right);
        dual += y[i] * y[i] - r * r;
    }
    (primal - 0.5 * dual).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Projected gradient on the dual `min ½‖y − Dᵀz‖²` over `|z| ≤ λ`.
    fn dual_oracle(y: &[f64], lambda: f64, iters: usize) -> Vec<f64> {
        let n = y.len();
        let mut z = vec![0.0; n - 1];
        let step = 0.25;
        for _ in 0..iters {
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    let left = if i > 0 { z[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { z[i] } else { 0.0 };
                    y[i] - (left - right)
                })
                .collect();
            for k in 0..n - 1 {
                // ∂/∂z_k of ½‖y − Dᵀz‖² is −(x_{k+1} − x_k).
                z[k] = (z[k] + step * (x[k + 1] - x[k])).clamp(-lambda, lambda);
            }
        }
        (0..n)
            .map(|i| {
                let left = if i > 0 { z[i - 1] } else { 0.0 };
                let right = if i + 1 < n { z[i] } else { 0.0 };
                y[i] - (left - right)
            })
            .collect()
    }

    #[test]
    fn simple_cases() {
        assert_eq!(tv1d_denoise(&[3.0], 1.0), vec![3.0]);
        let x = tv1d_denoise(&[0.0, 1.0], 0.25);
        assert!((x[0] - 0.25).abs() < 1e-15 && (x[1] - 0.75).abs() < 1e-15);
        let x = tv1d_denoise(&[0.0, 1.0], 10.0);
        assert!(x.iter().all(|v| (v - 0.5).abs() < 1e-15));
        let y = [1.0, -2.0, 0.5];
        assert_eq!(tv1d_denoise(&y, 0.0), y.to_vec());
    }

    proptest! {
        #[test]
        fn matches_dual_oracle(y in prop::collection::vec(-2.0f64..2.0, 2..40), lambda in 0.01f64..1.5) {
            let x = tv1d_denoise(&y, lambda);
            prop_assert!(tv1d_gap(&y, &x, lambda) < 1e-9);
            let oracle = dual_oracle(&y, lambda, 20_000);
            for (a, b) in x.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-4, "{:?} vs {:?}", x, oracle);
            }
        }
    }
}
