//! Roots of the characteristic quasi-polynomial `h(λ) = λ − a·e^{−λr}`.
//!
//! The leading pair `μ(a) ± iω(a)` is followed along the implicit branch
//! `G(a, y) = 0` in the scaled variable `y = μr`, then polished by Newton on
//! `h` itself. The count of roots right of a vertical line is certified by
//! the argument principle on a rectangle whose height comes from the a-priori
//! bound `|λ| ≤ |a|·e^{−Re λ·r}` valid for every root.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Residual required of every reported root.
pub const ROOT_RESIDUAL: f64 = 1e-10;
/// Minimum modulus of `h` tolerated on a counting contour.
pub const CONTOUR_MIN_MODULUS: f64 = 1e-8;
/// Width of the counting rectangle to the right of `sigma`.
pub const COUNT_BOX_WIDTH: f64 = 4.0;
/// Residual target for the branch Newton iteration on `G(a, y)`.
pub const BRANCH_RESIDUAL: f64 = 1e-13;
pub const MAX_NEWTON_STEPS: usize = 50;
/// Operating window for the leading branch.
pub const BRANCH_WINDOW: (f64, f64) = (-1.5, -0.5);

/// Parameters of `x' = a·x(t−r) + x² + c·x·x(t−r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub a: T,
    pub c: T,
    pub r: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(a: T, c: T, r: T) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("delay r must be positive, got {r}")));
        }
        if !a.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParameter("a and c must be finite".into()));
        }
        Ok(Self { a, c, r })
    }

    /// `(a, c)` with the default delay `r = π/2`.
    pub fn with_default_delay(a: T, c: T) -> Self {
        Self {
            a,
            c,
            r: T::FRAC_PI_2(),
        }
    }

    /// The bifurcation point `a = −1`, `r = π/2`.
    pub fn at_hopf(c: T) -> Self {
        Self::with_default_delay(-T::one(), c)
    }
}

/// `h(λ) = λ − a·e^{−λr}`.
pub fn char_fn<T: Real>(lambda: Complex<T>, params: &ModelParams<T>) -> Complex<T> {
    lambda - (-lambda.scale(params.r)).exp().scale(params.a)
}

/// `h'(λ) = 1 + a·r·e^{−λr}`.
pub fn char_fn_derivative<T: Real>(lambda: Complex<T>, params: &ModelParams<T>) -> Complex<T> {
    Complex::new(T::one(), T::zero()) + (-lambda.scale(params.r)).exp().scale(params.a * params.r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingPair<T> {
    pub mu: T,
    /// Positive representative of the conjugate pair.
    pub omega: T,
}

impl<T: Real> LeadingPair<T> {
    pub fn lambda(&self) -> Complex<T> {
        Complex::new(self.mu, self.omega)
    }
}

/// Pieces of `G(a, y) = cos u − (y/(ar))·e^y` with `u = √(a²r²e^{−2y} − y²)`.
struct Branch<T> {
    g: T,
    dg_dy: T,
    dg_da: T,
}

fn branch_eval<T: Real>(a: T, y: T, r: T) -> Result<Branch<T>> {
    let scale2 = a * a * r * r * (-(y + y)).exp();
    let disc = scale2 - y * y;
    if !(disc > T::zero()) {
        return Err(Error::NegativeDiscriminant {
            value: disc.to_f64_lossy(),
        });
    }
    let u = disc.sqrt();
    let (s, c) = u.sin_cos();
    let ar = a * r;
    let ey = y.exp();
    Ok(Branch {
        g: c - y / ar * ey,
        dg_dy: (scale2 + y) / u * s - (y + T::one()) / ar * ey,
        dg_da: -s * a * r * r * (-(y + y)).exp() / u + y / (a * ar) * ey,
    })
}

fn check_window<T: Real>(a: T) -> Result<()> {
    let (lo, hi) = BRANCH_WINDOW;
    if a < T::lit(lo) || a > T::lit(hi) {
        return Err(Error::OutsideBranch { a: a.to_f64_lossy() });
    }
    Ok(())
}

/// Solves `G(a, y) = 0` by Newton from `y = 0`; returns `y = μr`.
fn branch_y<T: Real>(a: T, r: T) -> Result<T> {
    check_window(a)?;
    let tol = T::tol(BRANCH_RESIDUAL);
    let mut y = T::zero();
    let mut last = T::infinity();
    for _ in 0..MAX_NEWTON_STEPS {
        let b = branch_eval(a, y, r)?;
        last = b.g.abs();
        if last <= tol {
            return Ok(y);
        }
        if b.dg_dy.abs() <= T::min_positive_value() {
            return Err(Error::Singular {
                what: "branch derivative dG/dy",
                magnitude: b.dg_dy.abs().to_f64_lossy(),
            });
        }
        y = y - b.g / b.dg_dy;
    }
    let b = branch_eval(a, y, r)?;
    if b.g.abs() <= tol {
        return Ok(y);
    }
    Err(Error::NoConvergence {
        iterations: MAX_NEWTON_STEPS,
        residual: last.min(b.g.abs()).to_f64_lossy(),
    })
}

/// Leading eigenvalue pair `μ ± iω` for `a` in the branch window.
pub fn leading_pair<T: Real>(params: &ModelParams<T>) -> Result<LeadingPair<T>> {
    let y = branch_y(params.a, params.r)?;
    let mu = y / params.r;
    let disc = params.a * params.a * (-(mu + mu) * params.r).exp() - mu * mu;
    if !(disc > T::zero()) {
        return Err(Error::NegativeDiscriminant {
            value: disc.to_f64_lossy(),
        });
    }
    let mut lambda = Complex::new(mu, disc.sqrt());
    // Newton polish directly on h; two steps are plenty from a 1e-13 start.
    for _ in 0..2 {
        let d = char_fn_derivative(lambda, params);
        if d.norm() > T::zero() {
            lambda = lambda - char_fn(lambda, params) / d;
        }
    }
    let residual = char_fn(lambda, params).norm();
    if residual > T::tol(ROOT_RESIDUAL) {
        return Err(Error::NoConvergence {
            iterations: MAX_NEWTON_STEPS,
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(LeadingPair {
        mu: lambda.re,
        omega: lambda.im.abs(),
    })
}

/// `dμ/da` on the leading branch from the implicit-function relation.
pub fn mu_derivative<T: Real>(a: T, r: T) -> Result<T> {
    let y = branch_y(a, r)?;
    let b = branch_eval(a, y, r)?;
    if b.dg_dy.abs() <= T::tol(1e-12) {
        return Err(Error::Singular {
            what: "branch derivative dG/dy",
            magnitude: b.dg_dy.abs().to_f64_lossy(),
        });
    }
    Ok(-b.dg_da / b.dg_dy / r)
}

/// `∂G/∂y` on the branch (positive near `a = −1`).
pub fn branch_dg_dy<T: Real>(a: T, r: T) -> Result<T> {
    let y = branch_y(a, r)?;
    Ok(branch_eval(a, y, r)?.dg_dy)
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexBox<T> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

/// Default half-height `|a|·e^{−σr} + 1` for counting right of `sigma`.
pub fn default_im_bound<T: Real>(sigma: T, params: &ModelParams<T>) -> T {
    params.a.abs() * (-sigma * params.r).exp() + T::one()
}

/// Counting rectangle used for a given `sigma` and half-height.
pub fn counting_box<T: Real>(sigma: T, params: &ModelParams<T>, im_bound: T) -> ComplexBox<T> {
    // Roots right of sigma satisfy Re λ ≤ |λ| ≤ |a|e^{−σr}; keep the box past that.
    let reach = params.a.abs() * (-sigma * params.r).exp() + T::one();
    let width = T::lit(COUNT_BOX_WIDTH).max(reach - sigma);
    ComplexBox {
        re_min: sigma,
        re_max: sigma + width,
        im_min: -im_bound,
        im_max: im_bound,
    }
}

struct Winding<T> {
    lipschitz: T,
    min_modulus: T,
    too_close: bool,
    failed: bool,
}

impl<T: Real> Winding<T> {
    // Principal arg of h(z1)/h(z0) is the true phase increment once
    // L·|z1 − z0| < min(|h(z0)|, |h(z1)|): h cannot wind around 0 in between.
    fn segment(
        &mut self,
        params: &ModelParams<T>,
        z0: Complex<T>,
        h0: Complex<T>,
        z1: Complex<T>,
        h1: Complex<T>,
        depth: u32,
    ) -> T {
        let m0 = h0.norm();
        let m1 = h1.norm();
        self.min_modulus = self.min_modulus.min(m1);
        if m0 < T::lit(CONTOUR_MIN_MODULUS) || m1 < T::lit(CONTOUR_MIN_MODULUS) {
            self.too_close = true;
            return T::zero();
        }
        let len = (z1 - z0).norm();
        let dphi = (h1 / h0).arg();
        let certified = self.lipschitz * len < m0.min(m1) && dphi.abs() < T::FRAC_PI_2();
        if certified {
            return dphi;
        }
        if depth > 60 {
            self.failed = true;
            return dphi;
        }
        let zm = (z0 + z1).unscale(T::lit(2.0));
        let hm = char_fn(zm, params);
        self.segment(params, z0, h0, zm, hm, depth + 1) + self.segment(params, zm, hm, z1, h1, depth + 1)
    }
}

enum CountOutcome {
    Count(usize),
    TooClose,
}

fn count_in_box<T: Real>(params: &ModelParams<T>, bx: &ComplexBox<T>) -> Result<CountOutcome> {
    // |h'(λ)| ≤ 1 + |a|·r·e^{−Re λ·r} ≤ 1 + |a|·r·e^{−re_min·r} on the box.
    let lipschitz = T::one() + params.a.abs() * params.r * (-bx.re_min * params.r).exp();
    let corners = [
        Complex::new(bx.re_min, bx.im_min),
        Complex::new(bx.re_max, bx.im_min),
        Complex::new(bx.re_max, bx.im_max),
        Complex::new(bx.re_min, bx.im_max),
    ];
    let mut w = Winding {
        lipschitz,
        min_modulus: T::infinity(),
        too_close: false,
        failed: false,
    };
    let mut total = T::zero();
    for k in 0..4 {
        let z0 = corners[k];
        let z1 = corners[(k + 1) % 4];
        let h0 = char_fn(z0, params);
        let h1 = char_fn(z1, params);
        total = total + w.segment(params, z0, h0, z1, h1, 0);
        if w.too_close {
            return Ok(CountOutcome::TooClose);
        }
    }
    let winding = total / T::TAU();
    let rounded = winding.round();
    if w.failed || (winding - rounded).abs() > T::lit(1e-6) || rounded < T::zero() {
        return Err(Error::PhaseResolution {
            winding: winding.to_f64_lossy(),
        });
    }
    Ok(CountOutcome::Count(rounded.to_usize().unwrap_or(0)))
}

pub const CONTOUR_RETRIES: usize = 5;
pub const CONTOUR_NUDGE: f64 = 1e-6;

/// Number of roots (with multiplicity) with `Re λ > sigma` and `|Im λ| < im_bound`.
///
/// If `h` comes within [`CONTOUR_MIN_MODULUS`] of zero on the contour, `sigma`
/// is nudged by `1e−6` and the count retried, up to five times.
pub fn count_roots_right_of<T: Real>(sigma: T, params: &ModelParams<T>, im_bound: T) -> Result<usize> {
    count_roots_detailed(sigma, params, im_bound).map(|(n, _, _)| n)
}

/// Like [`count_roots_right_of`], also returning the abscissa and box used.
pub fn count_roots_detailed<T: Real>(
    sigma: T,
    params: &ModelParams<T>,
    im_bound: T,
) -> Result<(usize, T, ComplexBox<T>)> {
    let mut s = sigma;
    for _ in 0..=CONTOUR_RETRIES {
        let bx = counting_box(s, params, im_bound);
        match count_in_box(params, &bx)? {
            CountOutcome::Count(n) => return Ok((n, s, bx)),
            CountOutcome::TooClose => s = s + T::lit(CONTOUR_NUDGE),
        }
    }
    Err(Error::ContourProximity {
        retries: CONTOUR_RETRIES,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary<T> {
    pub mu: T,
    pub omega: T,
    pub mu_prime: T,
    pub right_count: usize,
    pub sigma: T,
    #[serde(rename = "box")]
    pub bx: ComplexBox<T>,
}

/// Leading pair, its parameter derivative and the certified count right of `sigma`.
pub fn spectrum_summary<T: Real>(params: &ModelParams<T>, sigma: T) -> Result<SpectrumSummary<T>> {
    let pair = leading_pair(params)?;
    let mu_prime = mu_derivative(params.a, params.r)?;
    let (right_count, sigma_used, bx) =
        count_roots_detailed(sigma, params, default_im_bound(sigma, params))?;
    Ok(SpectrumSummary {
        mu: pair.mu,
        omega: pair.omega,
        mu_prime,
        right_count,
        sigma: sigma_used,
        bx,
    })
}

/// Finds `a` on the branch with `μ(a) = mu_target` by Newton in `a`.
pub fn a_for_mu<T: Real>(mu_target: T, r: T) -> Result<T> {
    let mut a = -T::one() + mu_target / mu_derivative(-T::one(), r)?;
    for _ in 0..MAX_NEWTON_STEPS {
        let mu = leading_pair(&ModelParams::new(a, T::zero(), r)?)?.mu;
        let err = mu - mu_target;
        if err.abs() <= T::tol(1e-14) {
            return Ok(a);
        }
        a = a - err / mu_derivative(a, r)?;
    }
    Err(Error::NoConvergence {
        iterations: MAX_NEWTON_STEPS,
        residual: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p(a: f64) -> ModelParams<f64> {
        ModelParams::with_default_delay(a, 0.0)
    }

    /// Newton on h from λ = i: independent of the branch parametrisation.
    fn newton_on_h(a: f64) -> Complex<f64> {
        let params = p(a);
        let mut z = Complex::new(0.0, 1.0);
        for _ in 0..60 {
            z = z - char_fn(z, &params) / char_fn_derivative(z, &params);
        }
        z
    }

    #[test]
    fn char_fn_examples() {
        let params = p(-1.0);
        assert!(char_fn(Complex::new(0.0, 1.0), &params).norm() < 1e-15);
        assert!(char_fn(Complex::new(0.0, -1.0), &params).norm() < 1e-15);
        assert!((char_fn(Complex::new(0.0, 0.0), &params) - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn leading_pair_at_hopf() {
        let lp = leading_pair(&p(-1.0)).unwrap();
        assert!(lp.mu.abs() < 1e-14);
        assert!((lp.omega - 1.0).abs() < 1e-14);
    }

    #[test]
    fn leading_pair_off_hopf_matches_newton_on_h() {
        for a in [-0.9, -1.1, -0.6, -1.4] {
            let lp = leading_pair(&p(a)).unwrap();
            let z = newton_on_h(a);
            assert!((lp.mu - z.re).abs() < 1e-12, "a={a}");
            assert!((lp.omega - z.im).abs() < 1e-12, "a={a}");
            assert!(char_fn(lp.lambda(), &p(a)).norm() <= ROOT_RESIDUAL);
        }
        assert!(leading_pair(&p(-0.9)).unwrap().mu < 0.0);
        assert!(leading_pair(&p(-1.1)).unwrap().mu > 0.0);
    }

    #[test]
    fn branch_window_enforced() {
        assert!(matches!(leading_pair(&p(-0.3)), Err(Error::OutsideBranch { .. })));
        assert!(matches!(leading_pair(&p(-1.6)), Err(Error::OutsideBranch { .. })));
    }

    #[test]
    fn branch_derivative_at_hopf() {
        let d = branch_dg_dy(-1.0, FRAC_PI_2).unwrap();
        assert!((d - (FRAC_PI_2 + 2.0 / PI)).abs() < 1e-13);
        assert!((d - 2.2074).abs() < 1e-4);
    }

    #[test]
    fn mu_derivative_matches_finite_difference() {
        for a in [-1.0, -0.95, -1.08] {
            let h = 1e-5;
            let fd = (leading_pair(&p(a + h)).unwrap().mu - leading_pair(&p(a - h)).unwrap().mu) / (2.0 * h);
            let an = mu_derivative(a, FRAC_PI_2).unwrap();
            assert!(((an - fd) / an).abs() < 1e-5, "a={a}: {an} vs {fd}");
        }
        let d = mu_derivative(-1.0, FRAC_PI_2).unwrap();
        assert!((d + 0.453).abs() < 1e-3);
        assert!(leading_pair(&p(-1.05)).unwrap().mu > 0.0);
        assert!(leading_pair(&p(-0.95)).unwrap().mu < 0.0);
    }

    #[test]
    fn counts_right_of_gap() {
        for a in [-1.1, -1.0, -0.9] {
            let params = p(a);
            let s = -0.125;
            assert_eq!(count_roots_right_of(s, &params, default_im_bound(s, &params)).unwrap(), 2, "a={a}");
        }
        let params = p(-1.0);
        assert_eq!(count_roots_right_of(0.5, &params, default_im_bound(0.5, &params)).unwrap(), 0);
    }

    #[test]
    fn contour_through_root_is_nudged() {
        // sigma = 0 at a = −1 runs straight through ±i.
        let params = p(-1.0);
        let (n, s, _) = count_roots_detailed(0.0, &params, default_im_bound(0.0, &params)).unwrap();
        assert!(s > 0.0);
        assert_eq!(n, 0);
        let (n, _, _) = count_roots_detailed(-1e-3, &params, default_im_bound(-1e-3, &params)).unwrap();
        assert_eq!(n, 2);
    }

    #[test]
    fn a_for_mu_inverts_branch() {
        let a = a_for_mu(0.002, FRAC_PI_2).unwrap();
        assert!((leading_pair(&p(a)).unwrap().mu - 0.002).abs() < 1e-13);
        assert!((a + 1.0044).abs() < 2e-4);
    }

    #[test]
    fn single_precision_branch() {
        let lp = leading_pair(&ModelParams::<f32>::with_default_delay(-1.1, 0.0)).unwrap();
        let z = newton_on_h(-1.1);
        assert!((f64::from(lp.mu) - z.re).abs() < 1e-5);
        assert!((f64::from(lp.omega) - z.im).abs() < 1e-5);
    }

    #[test]
    fn invalid_delay_rejected() {
        assert!(ModelParams::new(-1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(-1.0, f64::NAN, 1.0).is_err());
    }
}
