//! Primitives of the native (polar) model of the hyperbolic plane.
//!
//! Distances use the hyperbolic law of cosines in the cancellation-free form
//! `cosh d = cosh(r1 - r2) + 2 sinh r1 sinh r2 sin^2(dtheta / 2)`. All
//! evaluation is in `f64`; `cosh` of the disk radius stays finite for
//! `R <= 600`, which covers every size this crate is meant for.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A point of the hyperbolic plane in polar coordinates around the origin.
///
/// The angle is normalized to `[0, 2pi)` on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    r: f64,
    theta: f64,
}

impl PolarPoint {
    pub const ORIGIN: PolarPoint = PolarPoint { r: 0.0, theta: 0.0 };

    /// Panics if `r` is negative or not finite.
    pub fn new(r: f64, theta: f64) -> Self {
        assert!(r.is_finite() && r >= 0.0, "radius must be finite and >= 0, got {r}");
        assert!(theta.is_finite(), "angle must be finite");
        PolarPoint { r, theta: normalize_angle(theta) }
    }

    pub fn try_new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) || !theta.is_finite() {
            return invalid(format!("bad polar point ({r}, {theta})"));
        }
        Ok(Self::new(r, theta))
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Same radius, angle advanced by `delta`.
    pub fn rotated(&self, delta: f64) -> Self {
        PolarPoint::new(self.r, self.theta + delta)
    }
}

/// Maps any finite angle into `[0, 2pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Angle at the origin between two directions, in `[0, pi]`.
#[inline]
pub fn angular_difference(a: f64, b: f64) -> f64 {
    PI - (PI - (a - b).abs()).abs()
}

/// Model constants. The disk radius is always recomputed as `2 ln(n / nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    nu: f64,
    n: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, nu: f64, n: f64) -> Result<Self> {
        if !(alpha > 0.5 && alpha < 1.0) {
            return invalid(format!("alpha must lie in (1/2, 1), got {alpha}"));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return invalid(format!("nu must be positive, got {nu}"));
        }
        if !(n >= 1.0 && n.is_finite()) {
            return invalid(format!("n must be >= 1, got {n}"));
        }
        if n <= nu {
            return invalid(format!("n must exceed nu so that the radius is positive (n={n}, nu={nu})"));
        }
        Ok(ModelParams { alpha, nu, n })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn nu(&self) -> f64 {
        self.nu
    }

    #[inline]
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Disk radius `R = 2 ln(n / nu)`.
    #[inline]
    pub fn radius(&self) -> f64 {
        2.0 * (self.n / self.nu).ln()
    }

    /// Leading-order mean degree `2 alpha^2 nu / (pi (alpha - 1/2)^2)`.
    pub fn mean_degree_limit(&self) -> f64 {
        let a = self.alpha;
        2.0 * a * a * self.nu / (PI * (a - 0.5).powi(2))
    }

    /// Radial density `alpha sinh(alpha r) / (cosh(alpha R) - 1)` on `[0, R]`.
    pub fn radial_density(&self, r: f64) -> f64 {
        let big_r = self.radius();
        if !(0.0..=big_r).contains(&r) {
            return 0.0;
        }
        self.alpha * (self.alpha * r).sinh() / cosh_m1(self.alpha * big_r)
    }
}

/// `cosh(x) - 1` without cancellation near zero.
#[inline]
pub(crate) fn cosh_m1(x: f64) -> f64 {
    let s = (0.5 * x).sinh();
    2.0 * s * s
}

/// Hyperbolic distance between two points.
pub fn hyperbolic_distance(p: PolarPoint, q: PolarPoint) -> f64 {
    let (a, b) = canonical_pair(p, q);
    let dtheta = angular_difference(a.theta, b.theta);
    let half = (0.5 * dtheta).sin();
    let x = (a.r - b.r).cosh() + 2.0 * a.r.sinh() * b.r.sinh() * half * half;
    x.max(1.0).acosh()
}

fn canonical_pair(p: PolarPoint, q: PolarPoint) -> (PolarPoint, PolarPoint) {
    let key = |x: &PolarPoint| (x.r, x.theta);
    let (kp, kq) = (key(&p), key(&q));
    let swap = match kp.0.total_cmp(&kq.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => kp.1.total_cmp(&kq.1).is_gt(),
    };
    if swap {
        (q, p)
    } else {
        (p, q)
    }
}

/// Largest angle at the origin between points at radii `r` and `r2` that are
/// still within distance `big_r` of each other.
///
/// Returns `pi` when `r + r2 < big_r`. Otherwise evaluates
/// `arccos((cosh r cosh r2 - cosh R) / (sinh r sinh r2))` through the
/// equivalent half-angle form `2 asin(sqrt((cosh R - cosh(r - r2)) / (2 sinh r sinh r2)))`,
/// clamped to `[0, pi]`, which keeps full relative precision for tiny angles.
pub fn theta_r_exact(r: f64, r2: f64, big_r: f64) -> f64 {
    if r + r2 < big_r {
        return PI;
    }
    let denom = 2.0 * r.sinh() * r2.sinh();
    if denom <= 0.0 {
        // one point at the origin and the other at distance >= R from it
        return 0.0;
    }
    let x = ((big_r.cosh() - (r - r2).cosh()) / denom).clamp(0.0, 1.0);
    2.0 * x.sqrt().asin()
}

/// Leading-order estimate `2 e^{(R - r - r2)/2}` of [`theta_r_exact`], valid
/// for `0 <= r <= R` and `r + r2 >= R`.
pub fn theta_r_approx(r: f64, r2: f64, big_r: f64) -> Result<f64> {
    if !(0.0..=big_r).contains(&r) || r2 < 0.0 || r + r2 < big_r {
        return invalid(format!("theta_r_approx needs 0 <= r <= R and r + r2 >= R (r={r}, r2={r2}, R={big_r})"));
    }
    Ok(2.0 * (0.5 * (big_r - r - r2)).exp())
}

/// Exact probability mass of the ball `B_O(r)` under the radial law.
pub fn mu_ball_origin(r: f64, params: &ModelParams) -> f64 {
    let big_r = params.radius();
    let a = params.alpha();
    let r = r.clamp(0.0, big_r);
    cosh_m1(a * r) / cosh_m1(a * big_r)
}

/// Asymptotic form `e^{-alpha (R - r)}` of [`mu_ball_origin`] for `r <= R`.
pub fn mu_ball_origin_approx(r: f64, params: &ModelParams) -> f64 {
    (-params.alpha() * (params.radius() - r.min(params.radius()))).exp()
}

/// Asymptotic mass of `B_p(R) ∩ B_O(R)`: `2 alpha e^{-r_p/2} / (pi (alpha - 1/2))`.
///
/// Only meaningful when `r_p` is large; see [`mu_ball_intersection_valid`].
pub fn mu_ball_intersection_approx(p: PolarPoint, params: &ModelParams) -> Result<f64> {
    if p.r() > params.radius() {
        return invalid(format!("point radius {} exceeds R = {}", p.r(), params.radius()));
    }
    let a = params.alpha();
    Ok(2.0 * a * (-0.5 * p.r()).exp() / (PI * (a - 0.5)))
}

/// Whether the intersection estimate is in its regime of validity: the
/// correction terms are `O(e^{-(alpha - 1/2) r_p})`, so we ask for that to be
/// below 5%.
pub fn mu_ball_intersection_valid(p: PolarPoint, params: &ModelParams) -> bool {
    (-(params.alpha() - 0.5) * p.r()).exp() < 0.05 && p.r() <= params.radius()
}

/// Mass of `B_p(R) ∩ B_O(R)` by numerical integration.
///
/// A point at radius `r` lies in `B_p(R)` exactly when its angle is within
/// `theta_R(r_p, r)` of `theta_p`, so the lens mass reduces to
/// `∫ f(r) theta_R(r_p, r) / pi dr`. The part with `r < R - r_p` is the whole
/// annulus and is taken in closed form; the remainder is integrated by
/// adaptive Simpson quadrature.
pub fn mu_ball_intersection_exact(p: PolarPoint, params: &ModelParams) -> Result<f64> {
    let big_r = params.radius();
    if p.r() > big_r {
        return invalid(format!("point radius {} exceeds R = {big_r}", p.r()));
    }
    let split = (big_r - p.r()).max(0.0);
    let inner = mu_ball_origin(split, params);
    let rp = p.r();
    let integrand = |r: f64| params.radial_density(r) * theta_r_exact(rp, r, big_r) / PI;
    let outer = adaptive_simpson(&integrand, split, big_r, 1e-14, 60);
    Ok(inner + outer)
}

pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
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

/// Inverse of the radial CDF: the radius `r` with `mu_ball_origin(r) = u`.
pub fn radial_quantile(u: f64, params: &ModelParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return invalid(format!("uniform variate must lie in [0, 1], got {u}"));
    }
    let a = params.alpha();
    let y = u * cosh_m1(a * params.radius());
    // acosh(1 + y) = ln(1 + y + sqrt(y (y + 2)))
    let r = (y + (y * (y + 2.0)).sqrt()).ln_1p() / a;
    Ok(r.min(params.radius()))
}

/// Precomputed trigonometric data used by the adjacency test.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointCache {
    cosh_r: f64,
    sinh_r: f64,
    cos_t: f64,
    sin_t: f64,
}

impl PointCache {
    pub(crate) fn new(p: PolarPoint) -> Self {
        PointCache {
            cosh_r: p.r().cosh(),
            sinh_r: p.r().sinh(),
            cos_t: p.theta().cos(),
            sin_t: p.theta().sin(),
        }
    }

    /// `cosh d(p, q) < cosh R`, using
    /// `cosh d = cosh r_p cosh r_q - sinh r_p sinh r_q cos(theta_p - theta_q)`.
    /// Symmetric bit for bit in its two arguments.
    #[inline]
    pub(crate) fn adjacent(&self, other: &PointCache, cosh_big_r: f64) -> bool {
        let cos_dt = self.cos_t * other.cos_t + self.sin_t * other.sin_t;
        self.cosh_r * other.cosh_r - self.sinh_r * other.sinh_r * cos_dt < cosh_big_r
    }
}

/// Adjacency rule of the model: `d(p, q) < R`, strict, so a pair at distance
/// exactly `R` is not an edge.
pub fn is_edge(p: PolarPoint, q: PolarPoint, big_r: f64) -> bool {
    PointCache::new(p).adjacent(&PointCache::new(q), big_r.cosh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn params(alpha: f64, big_r: f64) -> ModelParams {
        // pick n so that 2 ln(n / nu) = big_r with nu = 1
        ModelParams::new(alpha, 1.0, (0.5 * big_r).exp()).unwrap()
    }

    #[test]
    fn distance_from_origin_is_radius() {
        for &r in &[0.0, 0.3, 2.0, 17.5] {
            let q = PolarPoint::new(r, 1.234);
            assert_relative_eq!(hyperbolic_distance(PolarPoint::ORIGIN, q), r, max_relative = 1e-12);
        }
    }

    #[test]
    fn distance_to_self_is_zero() {
        let p = PolarPoint::new(5.5, 4.0);
        assert_eq!(hyperbolic_distance(p, p), 0.0);
    }

    #[test]
    fn opposite_points_at_radius_one() {
        // acosh(cosh^2 1 + sinh^2 1) = acosh(cosh 2) = 2: the geodesic runs through the origin.
        let p = PolarPoint::new(1.0, 0.0);
        let q = PolarPoint::new(1.0, PI);
        let direct = (1f64.cosh().powi(2) + 1f64.sinh().powi(2)).acosh();
        assert_relative_eq!(hyperbolic_distance(p, q), direct, max_relative = 1e-14);
        assert_relative_eq!(hyperbolic_distance(p, q), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn distance_matches_geodesic_length_by_integration() {
        // Independent check: length of the geodesic computed in the Poincare disk
        // through the Mobius-invariant formula 2 artanh(|z - w| / |1 - conj(w) z|).
        let mut rng = crate::rng::rng_from_seed(3);
        for _ in 0..200 {
            let p = PolarPoint::new(rng.gen_range(0.0..6.0), rng.gen_range(0.0..TAU));
            let q = PolarPoint::new(rng.gen_range(0.0..6.0), rng.gen_range(0.0..TAU));
            let to_disk = |x: PolarPoint| {
                let rho = (0.5 * x.r()).tanh();
                (rho * x.theta().cos(), rho * x.theta().sin())
            };
            let (zr, zi) = to_disk(p);
            let (wr, wi) = to_disk(q);
            let num = ((zr - wr).powi(2) + (zi - wi).powi(2)).sqrt();
            // 1 - conj(w) z
            let (cr, ci) = (1.0 - (wr * zr + wi * zi), -(wr * zi - wi * zr));
            let den = (cr * cr + ci * ci).sqrt();
            let expected = 2.0 * (num / den).atanh();
            assert_relative_eq!(hyperbolic_distance(p, q), expected, max_relative = 1e-8, epsilon = 1e-9);
        }
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(PolarPoint::new(1.0, -1e-300).theta(), 0.0);
        assert_relative_eq!(PolarPoint::new(1.0, 7.0).theta(), 7.0 - TAU);
        assert_relative_eq!(PolarPoint::new(1.0, -1.0).theta(), TAU - 1.0);
        assert!(PolarPoint::try_new(-1.0, 0.0).is_err());
    }

    #[test]
    fn theta_r_is_pi_inside_half_disk() {
        assert_eq!(theta_r_exact(1.0, 2.0, 4.0), PI);
    }

    #[test]
    fn theta_r_at_full_radius_reaches_distance_r() {
        for &big_r in &[1.0, 5.0, 12.0, 30.0] {
            let t = theta_r_exact(big_r, big_r, big_r);
            if big_r <= 12.0 {
                // the arccos form cancels badly for large R
                let direct = ((big_r.cosh().powi(2) - big_r.cosh()) / big_r.sinh().powi(2)).acos();
                assert_relative_eq!(t, direct, max_relative = 1e-7);
            }
            let d = hyperbolic_distance(PolarPoint::new(big_r, 0.0), PolarPoint::new(big_r, t));
            assert_relative_eq!(d, big_r, max_relative = 1e-9);
        }
    }

    #[test]
    fn theta_r_monotone_spot_value() {
        assert!(theta_r_exact(3.0, 3.0, 5.0) > theta_r_exact(3.5, 3.0, 5.0));
    }

    #[test]
    fn theta_r_approx_values() {
        for &big_r in &[3.0, 10.0] {
            assert_relative_eq!(theta_r_approx(big_r, big_r, big_r).unwrap(), 2.0 * (-0.5 * big_r).exp());
            assert_relative_eq!(theta_r_approx(0.4 * big_r, 0.6 * big_r, big_r).unwrap(), 2.0);
        }
        assert!(theta_r_approx(1.0, 1.0, 4.0).is_err());
        assert!(theta_r_approx(5.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn theta_r_approx_relative_error_grid() {
        let big_r: f64 = 30.0;
        let r = 0.6 * big_r;
        let band: f64 = 5.0 * (-0.2 * big_r).exp();
        let ratio = theta_r_approx(r, r, big_r).unwrap() / theta_r_exact(r, r, big_r);
        assert!((ratio - 1.0).abs() <= band, "ratio {ratio}");
        // and across a grid of admissible pairs well inside the asymptotic regime
        for i in 0..20 {
            for j in 0..20 {
                let a = big_r * (0.55 + 0.02 * i as f64);
                let b = big_r * (0.55 + 0.02 * j as f64);
                let ratio = theta_r_approx(a.min(big_r), b, big_r).unwrap() / theta_r_exact(a.min(big_r), b, big_r);
                let bound = 5.0 * (big_r - a - b).exp().max((-0.2 * big_r).exp());
                assert!((ratio - 1.0).abs() <= bound, "a={a} b={b} ratio={ratio}");
            }
        }
    }

    #[test]
    fn mu_ball_origin_endpoints() {
        let p = params(0.7, 20.0);
        assert_eq!(mu_ball_origin(0.0, &p), 0.0);
        assert_relative_eq!(mu_ball_origin(p.radius(), &p), 1.0, max_relative = 1e-15);
        assert_relative_eq!(mu_ball_origin(2.0 * p.radius(), &p), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn mu_ball_origin_matches_asymptotic_form() {
        let p = params(0.7, 20.0);
        let (a, big_r, r) = (0.7, 20.0, 15.0);
        let exact = mu_ball_origin(r, &p);
        let approx = mu_ball_origin_approx(r, &p);
        let tol = 3.0 * (-a * r).exp() + 3.0 * (-a * big_r).exp();
        assert!(((approx - exact) / exact).abs() <= tol, "exact {exact} approx {approx}");
    }

    #[test]
    fn mu_ball_origin_matches_density_integral() {
        let p = params(0.65, 12.0);
        for &r in &[0.5, 3.0, 6.0, 11.0] {
            let integral = adaptive_simpson(&|x| p.radial_density(x), 0.0, r, 1e-14, 50);
            assert_relative_eq!(integral, mu_ball_origin(r, &p), max_relative = 1e-10);
        }
    }

    #[test]
    fn quantile_endpoints_and_roundtrip() {
        let p = params(0.7, 10.0);
        assert_eq!(radial_quantile(0.0, &p).unwrap(), 0.0);
        assert_relative_eq!(radial_quantile(1.0, &p).unwrap(), 10.0, max_relative = 1e-14);
        let r = radial_quantile(0.5, &p).unwrap();
        assert!((mu_ball_origin(r, &p) - 0.5).abs() <= 1e-12);
        assert!(radial_quantile(1.5, &p).is_err());
        assert!(radial_quantile(-0.1, &p).is_err());
    }

    #[test]
    fn quantile_cdf_roundtrip_grid() {
        for &(alpha, big_r) in &[(0.55, 8.0), (0.7, 20.0), (0.95, 40.0)] {
            let p = params(alpha, big_r);
            for i in 0..=1000 {
                let u = i as f64 / 1000.0;
                let back = mu_ball_origin(radial_quantile(u, &p).unwrap(), &p);
                assert!((back - u).abs() <= 1e-10, "u={u} back={back}");
            }
        }
    }

    #[test]
    fn intersection_at_origin_is_full_disk() {
        let p = params(0.75, 20.0);
        let exact = mu_ball_intersection_exact(PolarPoint::ORIGIN, &p).unwrap();
        assert_relative_eq!(exact, 1.0, max_relative = 1e-12);
        assert!(!mu_ball_intersection_valid(PolarPoint::ORIGIN, &p));
        let approx = mu_ball_intersection_approx(PolarPoint::ORIGIN, &p).unwrap();
        assert_relative_eq!(approx, 2.0 * 0.75 / (PI * 0.25), max_relative = 1e-15);
    }

    #[test]
    fn intersection_estimate_against_quadrature() {
        let p = params(0.75, 20.0);
        let q = PolarPoint::new(12.0, 0.3);
        let exact = mu_ball_intersection_exact(q, &p).unwrap();
        let approx = mu_ball_intersection_approx(q, &p).unwrap();
        assert!(((approx - exact) / exact).abs() <= 0.15, "exact {exact} approx {approx}");
        assert!(mu_ball_intersection_approx(PolarPoint::new(21.0, 0.0), &p).is_err());
    }

    #[test]
    fn intersection_quadrature_matches_monte_carlo() {
        // Oracle independent of theta_R: sample points from the model and test distance.
        let p = params(0.7, 10.0);
        let q = PolarPoint::new(6.0, 1.0);
        let exact = mu_ball_intersection_exact(q, &p).unwrap();
        let mut rng = crate::rng::rng_from_seed(11);
        let trials = 200_000;
        let mut hits = 0usize;
        for _ in 0..trials {
            let r = radial_quantile(rng.gen::<f64>(), &p).unwrap();
            let x = PolarPoint::new(r, rng.gen_range(0.0..TAU));
            if hyperbolic_distance(x, q) < p.radius() {
                hits += 1;
            }
        }
        let frac = hits as f64 / trials as f64;
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((frac - exact).abs() <= 4.0 * se, "mc {frac} quad {exact}");
    }

    #[test]
    fn edge_rule_cases() {
        let big_r = 10.0;
        assert!(is_edge(PolarPoint::new(4.9, 0.0), PolarPoint::new(4.9, PI), big_r));
        let p = PolarPoint::new(9.0, 2.0);
        assert!(is_edge(p, p, big_r));
        assert!(!is_edge(PolarPoint::new(big_r, 0.0), PolarPoint::new(big_r, PI), big_r));
    }

    #[test]
    fn edge_rule_agrees_with_distance_off_boundary() {
        let mut rng = crate::rng::rng_from_seed(5);
        let big_r = 12.0;
        for _ in 0..50_000 {
            let p = PolarPoint::new(rng.gen_range(0.0..big_r), rng.gen_range(0.0..TAU));
            let q = PolarPoint::new(rng.gen_range(0.0..big_r), rng.gen_range(0.0..TAU));
            let d = hyperbolic_distance(p, q);
            if (d - big_r).abs() > 1e-9 {
                assert_eq!(is_edge(p, q, big_r), d < big_r);
            }
        }
    }
}
