//! Small scalar numerics shared across modules: compensated summation,
//! adaptive Simpson quadrature, golden-section search and bisection.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integral of `f` over `[0, ∞)`, split at 1 and mapped with `t = 1/s` on the tail.
/// Requires `f` bounded near 0 and `f(t) = O(t^{-2})` at infinity.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: &F, tol: f64) -> f64 {
    let head = adaptive_simpson(f, 0.0, 1.0, 0.5 * tol);
    let tail_fn = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            f(1.0 / s) / (s * s)
        }
    };
    let tail = adaptive_simpson(&tail_fn, 0.0, 1.0, 0.5 * tol);
    head + tail
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a golden-section search.
#[derive(Debug, Clone, Copy)]
pub struct GoldenMin {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
/// Stops after `max_iter` shrink steps or once the bracket is below `xtol`.
/// The endpoints are also evaluated so a monotone `f` returns its boundary minimum.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    max_iter: usize,
) -> GoldenMin {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..max_iter {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            evals += 1;
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            evals += 1;
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    for x in [lo, hi] {
        let fx = f(x);
        evals += 1;
        if fx < best.1 {
            best = (x, fx);
        }
    }
    GoldenMin {
        x: best.0,
        fx: best.1,
        evaluations: evals,
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`. Returns `None` when the
/// endpoint values do not have opposite signs.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= xtol {
            return Some(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Solves a symmetric tridiagonal system with the Thomas algorithm.
/// `diag` has length m, `off` has length m − 1 (entry k couples k and k+1).
pub fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    if m == 0 {
        return Vec::new();
    }
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = if m > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for k in 1..m {
        let denom = diag[k] - off[k - 1] * c[k - 1];
        c[k] = if k + 1 < m { off[k] / denom } else { 0.0 };
        d[k] = (rhs[k] - off[k - 1] * d[k - 1]) / denom;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for k in (0..m - 1).rev() {
        x[k] = d[k] - c[k] * x[k + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1e16];
        v.extend(std::iter::repeat(1.0).take(1000));
        v.push(-1e16);
        assert_eq!(compensated_sum(v), 1000.0);
    }

    #[test]
    fn simpson_polynomial_and_half_line() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
        // ∫₀^∞ (1 − e^{−t²})/t² dt = √π
        let g = |t: f64| if t == 0.0 { 1.0 } else { (1.0 - (-t * t).exp()) / (t * t) };
        let v = integrate_half_line(&g, 1e-11);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-9, "{v}");
    }

    #[test]
    fn golden_finds_quadratic_minimum_and_edges() {
        let r = golden_section(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-10, 200);
        assert!((r.x - 0.3).abs() < 1e-8);
        let r = golden_section(|x| x, 0.0, 1.0, 1e-10, 200);
        assert_eq!(r.x, 0.0);
    }

    #[test]
    fn bisect_root_and_no_sign_change() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9).is_none());
    }

    #[test]
    fn thomas_matches_dense_solution() {
        let diag = [2.0, 2.0, 2.0];
        let off = [-1.0, -1.0];
        let x = solve_tridiagonal(&diag, &off, &[1.0, 0.0, 1.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}
