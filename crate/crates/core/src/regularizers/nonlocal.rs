//! The two δ-families: Brezis–Nguyen (non-convex, profile `φ`) and
//! Aubert–Kornprobst (convex, radial kernel `ρ`).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use super::custom::Named;
use super::ExtendedParam;
use crate::error::{Error, Result};
use crate::grid::{self, Grid, GridSignal};
use crate::numerics;

pub type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

const NORMALIZATION_TOL: f64 = 1e-8;

fn check_dim(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("dimension {n}; only n ∈ {{1, 2}}")))
    }
}

/// `κ_n = ⨍_{S^{n−1}} |e·σ| dσ`.
pub fn kappa_n(n: usize) -> Result<f64> {
    check_dim(n)?;
    Ok(if n == 1 { 1.0 } else { 2.0 / PI })
}

/// `γ_n = ∫_{S^{n−1}} |e·σ| dσ`.
pub fn gamma_n(n: usize) -> Result<f64> {
    check_dim(n)?;
    Ok(if n == 1 { 2.0 } else { 4.0 })
}

/// `|S^{n−1}|`.
pub fn sphere_measure(n: usize) -> Result<f64> {
    check_dim(n)?;
    Ok(if n == 1 { 2.0 } else { 2.0 * PI })
}

// ---------------------------------------------------------------------------
// Brezis–Nguyen profiles

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiShapeName {
    Step,
    QuadCap,
    OneMinusExp,
}

/// Unnormalized profile `φ₀`; the spec scales it by `c`.
#[derive(Debug, Clone)]
pub enum PhiShape {
    /// `1_{t > 1}`
    Step,
    /// `min(t², 1)`
    QuadCap,
    /// `1 − e^{−t²}`
    OneMinusExp,
    /// User profile with its own growth constant `a` (`φ₀ ≤ min(at², a)`).
    Custom { callback: Named<ScalarFn>, a: f64 },
}

impl PhiShape {
    fn raw(&self, t: f64) -> f64 {
        match self {
            PhiShape::Step => {
                if t > 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PhiShape::QuadCap => (t * t).min(1.0),
            PhiShape::OneMinusExp => -(-t * t).exp_m1(),
            PhiShape::Custom { callback, .. } => (callback.f)(t),
        }
    }

    fn label(&self) -> String {
        match self {
            PhiShape::Step => "step".into(),
            PhiShape::QuadCap => "quad_cap".into(),
            PhiShape::OneMinusExp => "one_minus_exp".into(),
            PhiShape::Custom { callback, .. } => format!("custom:{}", callback.name),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhiConfig {
    shape: PhiShapeName,
    #[serde(default = "one")]
    dim: usize,
}

fn one() -> usize {
    1
}

/// Normalized profile `φ = c·φ₀` with `γ_n ∫ φ(t)/t² dt = 1`.
#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "PhiConfig")]
pub struct PhiSpec {
    shape: PhiShape,
    dim: usize,
    c: f64,
    a: f64,
    positive: bool,
}

impl TryFrom<PhiConfig> for PhiSpec {
    type Error = Error;
    fn try_from(cfg: PhiConfig) -> Result<Self> {
        let shape = match cfg.shape {
            PhiShapeName::Step => PhiShape::Step,
            PhiShapeName::QuadCap => PhiShape::QuadCap,
            PhiShapeName::OneMinusExp => PhiShape::OneMinusExp,
        };
        PhiSpec::new(shape, cfg.dim)
    }
}

impl Serialize for PhiSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("shape", &self.shape.label())?;
        m.serialize_entry("dim", &self.dim)?;
        m.serialize_entry("c", &self.c)?;
        m.serialize_entry("a", &self.a)?;
        m.serialize_entry("positive", &self.positive)?;
        m.end()
    }
}

impl PhiSpec {
    pub fn new(shape: PhiShape, dim: usize) -> Result<Self> {
        let gamma = gamma_n(dim)?;
        let a0 = match &shape {
            PhiShape::Custom { a, .. } => {
                if !(*a > 0.0) {
                    return Err(Error::param("custom φ needs a growth constant a > 0"));
                }
                *a
            }
            _ => 1.0,
        };
        // Sampled checks of φ₀(0) = 0, monotonicity and φ₀ ≤ min(a t², a).
        let mut prev = shape.raw(0.0);
        if prev != 0.0 {
            return Err(Error::Hypothesis(format!("φ(0) = {prev}, expected 0")));
        }
        let mut positive = true;
        for k in 1..=4000 {
            let t = 10f64.powf(-4.0 + 8.0 * k as f64 / 4000.0);
            let v = shape.raw(t);
            if !v.is_finite() || v < prev - 1e-14 {
                return Err(Error::Hypothesis(format!("φ is not non-decreasing near t = {t}")));
            }
            if v > a0 * (t * t).min(1.0) * (1.0 + 1e-12) {
                return Err(Error::Hypothesis(format!("φ exceeds min(a t², a) at t = {t}")));
            }
            positive &= v > 0.0;
            prev = v;
        }
        let integral = numerics::integrate_half_line(
            &|t: f64| {
                if t == 0.0 {
                    0.0
                } else {
                    shape.raw(t) / (t * t)
                }
            },
            1e-11,
        );
        if !(integral > 0.0 && integral.is_finite()) {
            return Err(Error::Hypothesis(format!("∫ φ(t)/t² dt = {integral}")));
        }
        let c = 1.0 / (gamma * integral);
        let spec = PhiSpec {
            shape,
            dim,
            c,
            a: c * a0,
            positive,
        };
        let check = gamma * c * integral;
        if (check - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Hypothesis(format!("normalization check gave {check}")));
        }
        Ok(spec)
    }

    pub fn step(dim: usize) -> Result<Self> {
        Self::new(PhiShape::Step, dim)
    }

    pub fn quad_cap(dim: usize) -> Result<Self> {
        Self::new(PhiShape::QuadCap, dim)
    }

    pub fn one_minus_exp(dim: usize) -> Result<Self> {
        Self::new(PhiShape::OneMinusExp, dim)
    }

    pub fn custom(name: impl Into<String>, f: Arc<ScalarFn>, a: f64, dim: usize) -> Result<Self> {
        Self::new(
            PhiShape::Custom {
                callback: Named::new(name, f),
                a,
            },
            dim,
        )
    }

    pub fn shape(&self) -> &PhiShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Normalization factor `c`.
    pub fn scale(&self) -> f64 {
        self.c
    }

    /// Growth constant `a` of the normalized profile.
    pub fn growth(&self) -> f64 {
        self.a
    }

    /// Whether `φ(t) > 0` for every sampled `t > 0`.
    pub fn is_positive(&self) -> bool {
        self.positive
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.c * self.shape.raw(t)
    }

    /// `φ'(t)`; a central difference for profiles without a closed form.
    pub fn deriv(&self, t: f64) -> f64 {
        match self.shape {
            PhiShape::QuadCap => {
                if t < 1.0 {
                    2.0 * self.c * t
                } else {
                    0.0
                }
            }
            PhiShape::OneMinusExp => 2.0 * self.c * t * (-t * t).exp(),
            _ => {
                let eps = 1e-4;
                let lo = (t - eps).max(0.0);
                (self.eval(t + eps) - self.eval(lo)) / (t + eps - lo)
            }
        }
    }

    /// `(c, r)` when `φ(t) = c t^r` on a neighbourhood of 0.
    pub fn small_t_power(&self) -> Option<(f64, f64)> {
        match self.shape {
            PhiShape::QuadCap => Some((self.c, 2.0)),
            _ => None,
        }
    }
}

/// Brezis–Nguyen family `δ ∫∫ φ(|u(x) − u(y)|/δ) / |x − y|^{n+1}`.
///
/// The lower edge is `K(φ)·TV`; every grid function has bounded variation so
/// the `+∞` branch of the continuum model never fires.
pub fn eval_bn(
    delta: ExtendedParam,
    phi: &PhiSpec,
    u: &GridSignal,
    k_phi: Option<f64>,
) -> Result<f64> {
    match delta {
        ExtendedParam::Interior(d) => {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::param(format!("δ must lie in (0, ∞), got {d}")));
            }
            let power = (u.grid().dim() + 1) as i32;
            let s = grid::double_integral(
                |x, y, a, b| phi.eval((a - b).abs() / d) / grid::distance(x, y).powi(power),
                u,
            )?;
            Ok(d * s)
        }
        ExtendedParam::LowerEdge => {
            let k = k_phi.ok_or_else(|| {
                Error::param("the δ = 0 model needs K(φ); supply it or estimate it first")
            })?;
            Ok(k * grid::tv_discrete(u))
        }
        ExtendedParam::UpperEdge => Ok(0.0),
    }
}

/// Outcome of [`estimate_k_phi`].
#[derive(Debug, Clone, Serialize)]
pub struct KPhiEstimate {
    pub value: f64,
    pub points: usize,
    pub deltas: Vec<f64>,
    /// `R_δ(ramp) / TV(ramp)` per δ.
    pub ratios: Vec<f64>,
    /// Limits of the exact three-point fits `L + Aδ + Bδ ln δ`; the estimate
    /// is the mean of the last three.
    pub extrapolants: Vec<f64>,
}

impl KPhiEstimate {
    pub const DEFAULT_POINTS: usize = 4096;
    pub const DEFAULT_DELTAS: [f64; 5] = [0.16, 0.08, 0.04, 0.02, 0.01];
}

fn three_point_limit(d: [f64; 3], v: [f64; 3]) -> f64 {
    // Solve [1 δ δlnδ]·(L, A, B) = v by Cramer's rule.
    let row = |k: usize| [1.0, d[k], d[k] * d[k].ln()];
    let m = [row(0), row(1), row(2)];
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut ml = m;
    for k in 0..3 {
        ml[k][0] = v[k];
    }
    det3(ml) / det3(m)
}

/// Numerical estimate of the constant `K(φ)` in the `δ → 0` limit, from the
/// ramp `u(x) = x` on (0, 1). The ramp is a constant recovery sequence, so the
/// values approach the pointwise limit, which bounds `K(φ)` from above.
pub fn estimate_k_phi(phi: &PhiSpec, points: usize, deltas: &[f64]) -> Result<KPhiEstimate> {
    if phi.dim() != 1 {
        return Err(Error::Unsupported("K(φ) estimation on 2D grids".into()));
    }
    if deltas.len() < 5 {
        return Err(Error::param("K(φ) estimation needs at least five δ values"));
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::param("δ sequence must be strictly decreasing"));
    }
    let grid = Grid::interval(0.0, 1.0, points)?;
    let h = grid.h();
    if let Some(d) = deltas.iter().find(|&&d| d < 8.0 * h) {
        return Err(Error::param(format!("δ = {d} is below 8h = {}", 8.0 * h)));
    }
    let ramp = GridSignal::from_fn(&grid, |x| x[0]);
    let tv = grid::tv_discrete(&ramp);
    let ratios = deltas
        .iter()
        .map(|&d| Ok(eval_bn(ExtendedParam::Interior(d), phi, &ramp, None)? / tv))
        .collect::<Result<Vec<_>>>()?;
    let extrapolants: Vec<f64> = (0..deltas.len() - 2)
        .map(|k| {
            three_point_limit(
                [deltas[k], deltas[k + 1], deltas[k + 2]],
                [ratios[k], ratios[k + 1], ratios[k + 2]],
            )
        })
        .collect();
    let last = &extrapolants[extrapolants.len() - 3..];
    let hi = last.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = last.iter().cloned().fold(f64::INFINITY, f64::min);
    let centre = last.iter().sum::<f64>() / 3.0;
    if !(centre > 0.0) || (hi - lo) > 0.1 * centre.abs() {
        return Err(Error::Estimation(format!(
            "K(φ) extrapolants do not settle: {last:?}"
        )));
    }
    Ok(KPhiEstimate {
        value: centre.clamp(f64::MIN_POSITIVE, 1.0),
        points,
        deltas: deltas.to_vec(),
        ratios,
        extrapolants,
    })
}

// ---------------------------------------------------------------------------
// Aubert–Kornprobst kernels

#[derive(Debug, Clone)]
pub enum RhoShape {
    /// `1/|B_r|` on the closed ball of radius `r`.
    BallIndicator { radius: f64 },
    /// User kernel; `support` bounds the radius outside which it vanishes.
    Custom {
        callback: Named<ScalarFn>,
        support: Option<f64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RhoConfig {
    #[serde(default = "half")]
    radius: f64,
    #[serde(default = "one")]
    dim: usize,
}

fn half() -> f64 {
    0.5
}

/// Radial kernel `ρ(|z|)` with `∫_{ℝⁿ} ρ(|z|) dz = 1`.
#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RhoConfig")]
pub struct RhoSpec {
    shape: RhoShape,
    dim: usize,
}

impl TryFrom<RhoConfig> for RhoSpec {
    type Error = Error;
    fn try_from(cfg: RhoConfig) -> Result<Self> {
        RhoSpec::ball(cfg.radius, cfg.dim)
    }
}

impl Serialize for RhoSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        match &self.shape {
            RhoShape::BallIndicator { radius } => {
                m.serialize_entry("shape", "ball_indicator")?;
                m.serialize_entry("radius", radius)?;
            }
            RhoShape::Custom { callback, .. } => {
                m.serialize_entry("shape", &format!("custom:{}", callback.name))?;
            }
        }
        m.serialize_entry("dim", &self.dim)?;
        m.end()
    }
}

fn ball_measure(r: f64, n: usize) -> f64 {
    if n == 1 {
        2.0 * r
    } else {
        PI * r * r
    }
}

impl RhoSpec {
    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("ball radius must be positive, got {radius}")));
        }
        Ok(RhoSpec {
            shape: RhoShape::BallIndicator { radius },
            dim,
        })
    }

    /// The ball kernel that equals 1 near the origin (`|B_r| = 1`).
    pub fn unit_ball(dim: usize) -> Result<Self> {
        let r = if dim == 1 { 0.5 } else { 1.0 / PI.sqrt() };
        Self::ball(r, dim)
    }

    pub fn custom(
        name: impl Into<String>,
        f: Arc<ScalarFn>,
        support: Option<f64>,
        dim: usize,
    ) -> Result<Self> {
        check_dim(dim)?;
        let spec = RhoSpec {
            shape: RhoShape::Custom {
                callback: Named::new(name, f),
                support,
            },
            dim,
        };
        let mut prev = spec.eval(0.0);
        for k in 1..=4000 {
            let t = 10.0 * k as f64 / 4000.0;
            let v = spec.eval(t);
            if !v.is_finite() || v < 0.0 || v > prev + 1e-14 {
                return Err(Error::Hypothesis(format!("ρ is not non-increasing near t = {t}")));
            }
            prev = v;
        }
        let sphere = sphere_measure(dim)?;
        let mass = numerics::integrate_half_line(
            &|t: f64| sphere * spec.eval(t) * t.powi(dim as i32 - 1),
            1e-11,
        );
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Hypothesis(format!("∫ ρ(|z|) dz = {mass}, expected 1")));
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &RhoShape {
        &self.shape
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            RhoShape::BallIndicator { radius } => {
                if t <= *radius {
                    1.0 / ball_measure(*radius, self.dim)
                } else {
                    0.0
                }
            }
            RhoShape::Custom { callback, support } => match support {
                Some(s) if t > *s => 0.0,
                _ => (callback.f)(t),
            },
        }
    }

    /// Radius outside which `ρ` vanishes, when known.
    pub fn support(&self) -> Option<f64> {
        match &self.shape {
            RhoShape::BallIndicator { radius } => Some(*radius),
            RhoShape::Custom { support, .. } => *support,
        }
    }

    /// Whether `ρ ≡ 1` on a neighbourhood of 0.
    pub fn equals_one_near_zero(&self) -> bool {
        match &self.shape {
            RhoShape::BallIndicator { radius } => {
                (ball_measure(*radius, self.dim) - 1.0).abs() < 1e-12
            }
            RhoShape::Custom { .. } => [0.0, 1e-6, 1e-3]
                .iter()
                .all(|&t| (self.eval(t) - 1.0).abs() < 1e-12),
        }
    }
}

/// Aubert–Kornprobst family `δ^{−n} ∫∫ |u(x) − u(y)|/|x − y| ρ(|x − y|/δ)`.
pub fn eval_ak(delta: ExtendedParam, rho: &RhoSpec, u: &GridSignal) -> Result<f64> {
    match delta {
        ExtendedParam::Interior(d) => {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::param(format!("δ must lie in (0, ∞), got {d}")));
            }
            let n = u.grid().dim();
            let s = grid::double_integral(
                |x, y, a, b| {
                    let r = grid::distance(x, y);
                    let k = rho.eval(r / d);
                    if k == 0.0 {
                        0.0
                    } else {
                        (a - b).abs() / r * k
                    }
                },
                u,
            )?;
            Ok(s / d.powi(n as i32))
        }
        ExtendedParam::LowerEdge => Ok(kappa_n(u.grid().dim())? * grid::tv_discrete(u)),
        ExtendedParam::UpperEdge => Ok(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_constants() {
        assert_eq!(kappa_n(1).unwrap(), 1.0);
        assert!((kappa_n(2).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert_eq!(kappa_n(1).unwrap().to_bits(), kappa_n(1).unwrap().to_bits());
        assert_eq!(gamma_n(1).unwrap(), 2.0);
        assert_eq!(gamma_n(2).unwrap(), 4.0);
        for n in [1, 2] {
            let lhs = gamma_n(n).unwrap();
            let rhs = sphere_measure(n).unwrap() * kappa_n(n).unwrap();
            assert!((lhs - rhs).abs() < 1e-14);
        }
        assert!(kappa_n(3).is_err());
    }

    #[test]
    fn phi_normalizations_match_closed_forms() {
        for n in [1, 2] {
            let g = gamma_n(n).unwrap();
            let step = PhiSpec::step(n).unwrap();
            assert!((step.scale() - 1.0 / g).abs() < 1e-9);
            let quad = PhiSpec::quad_cap(n).unwrap();
            assert!((quad.scale() - 1.0 / (2.0 * g)).abs() < 1e-9);
            let gauss = PhiSpec::one_minus_exp(n).unwrap();
            assert!((gauss.scale() - 1.0 / (g * PI.sqrt())).abs() < 1e-9);
            assert!(!step.is_positive());
            assert!(quad.is_positive() && gauss.is_positive());
        }
    }

    #[test]
    fn custom_phi_hypotheses() {
        let ok: Arc<ScalarFn> = Arc::new(|t| t * t / (1.0 + t * t));
        assert!(PhiSpec::custom("rational", ok, 1.0, 1).is_ok());
        let decreasing: Arc<ScalarFn> = Arc::new(|t| (t * t).min(1.0) * (-t).exp());
        assert!(PhiSpec::custom("bump", decreasing, 1.0, 1).is_err());
        let linear: Arc<ScalarFn> = Arc::new(|t| t.min(1.0));
        assert!(PhiSpec::custom("linear", linear, 1.0, 1).is_err());
    }

    #[test]
    fn bn_examples() {
        let g = Grid::interval(-1.0, 1.0, 128).unwrap();
        let u = GridSignal::from_fn(&g, |x| x[0]);
        let phi = PhiSpec::quad_cap(1).unwrap();
        assert_eq!(eval_bn(ExtendedParam::UpperEdge, &phi, &u, None).unwrap(), 0.0);
        let tv = grid::tv_discrete(&u);
        assert_eq!(eval_bn(ExtendedParam::LowerEdge, &phi, &u, Some(1.0)).unwrap(), tv);
        assert!(eval_bn(ExtendedParam::LowerEdge, &phi, &u, None).is_err());
        let c = GridSignal::constant(&g, 3.0);
        assert_eq!(eval_bn(ExtendedParam::Interior(1.0), &phi, &c, None).unwrap(), 0.0);
    }

    #[test]
    fn bn_large_delta_matches_power_integral() {
        // For δ above the oscillation, QuadCap is exactly c t² on every pair.
        let g = Grid::interval(0.0, 1.0, 64).unwrap();
        let u = GridSignal::from_fn(&g, |x| (3.0 * x[0]).sin());
        let phi = PhiSpec::quad_cap(1).unwrap();
        let delta = 10.0;
        let v = eval_bn(ExtendedParam::Interior(delta), &phi, &u, None).unwrap();
        let direct = grid::double_integral(
            |x, y, a, b| phi.scale() * (a - b).powi(2) / grid::distance(x, y).powi(2),
            &u,
        )
        .unwrap();
        assert!((v * delta - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn ak_examples() {
        let g = Grid::interval(-1.0, 1.0, 2048).unwrap();
        let u = GridSignal::from_fn(&g, |x| x[0]);
        let rho = RhoSpec::unit_ball(1).unwrap();
        assert!(rho.equals_one_near_zero());
        let lower = eval_ak(ExtendedParam::LowerEdge, &rho, &u).unwrap();
        assert!((lower - grid::tv_discrete(&u)).abs() < 1e-15);
        assert_eq!(eval_ak(ExtendedParam::UpperEdge, &rho, &u).unwrap(), 0.0);
        let v = eval_ak(ExtendedParam::Interior(0.05), &rho, &u).unwrap();
        assert!((v - 2.0).abs() < 0.05 * 2.0, "{v}");
    }

    #[test]
    fn custom_rho_normalization() {
        // Triangle kernel on (−1, 1): ∫ (1 − |z|) dz = 1.
        let tri: Arc<ScalarFn> = Arc::new(|t| (1.0 - t).max(0.0));
        let rho = RhoSpec::custom("triangle", tri, Some(1.0), 1).unwrap();
        assert!(rho.equals_one_near_zero() == false);
        let heavy: Arc<ScalarFn> = Arc::new(|t| (1.0 - t).max(0.0) * 2.0);
        assert!(RhoSpec::custom("heavy", heavy, Some(1.0), 1).is_err());
        let growing: Arc<ScalarFn> = Arc::new(|t| if t < 1.0 { t } else { 0.0 });
        assert!(RhoSpec::custom("growing", growing, Some(1.0), 1).is_err());
    }

    #[test]
    fn k_phi_estimates() {
        let deltas = KPhiEstimate::DEFAULT_DELTAS;
        for phi in [PhiSpec::step(1).unwrap(), PhiSpec::quad_cap(1).unwrap()] {
            let e = estimate_k_phi(&phi, KPhiEstimate::DEFAULT_POINTS, &deltas).unwrap();
            assert!(e.value > 0.0 && e.value <= 1.0, "{e:?}");
            let again = estimate_k_phi(&phi, KPhiEstimate::DEFAULT_POINTS, &deltas).unwrap();
            assert_eq!(format!("{:.3e}", e.value), format!("{:.3e}", again.value));
            let coarse = estimate_k_phi(&phi, KPhiEstimate::DEFAULT_POINTS / 2, &deltas).unwrap();
            assert!((coarse.value - e.value).abs() < 0.05 * e.value, "{coarse:?} vs {e:?}");
        }
        let phi = PhiSpec::quad_cap(1).unwrap();
        assert!(estimate_k_phi(&phi, 64, &deltas).is_err());
        assert!(estimate_k_phi(&PhiSpec::quad_cap(2).unwrap(), 1024, &deltas).is_err());
    }
}
