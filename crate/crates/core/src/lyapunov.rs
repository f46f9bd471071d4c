//! First and second Lyapunov coefficients along `a = −1` and the Bautin-point report.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{coeff_table, hopf_delay, hopf_gain, CascadeOrder, CenterManifold, CoeffTable};
use crate::scalar::Real;
use crate::spectrum::mu_derivative;

/// Below this `|l2|` a candidate is reported as degenerate.
pub const L2_DEGENERACY: f64 = 1e-6;
/// Below this `|det|` the parameter map is treated as singular.
pub const JACOBIAN_DEGENERACY: f64 = 1e-10;

fn l1_numerator_coeffs<T: Real>() -> (T, T, T) {
    let pi = T::PI();
    (
        T::lit(8.0) - T::lit(12.0) * pi,
        T::lit(72.0) - T::lit(28.0) * pi,
        T::lit(144.0) - T::lit(16.0) * pi,
    )
}

fn l1_denominator<T: Real>() -> T {
    let pi = T::PI();
    T::lit(5.0) * (T::lit(4.0) + pi * pi)
}

/// `l1(c) = [(8 − 12π)c² + (72 − 28π)c + 144 − 16π] / (5(4 + π²))`.
pub fn l1_closed_form<T: Real>(c: T) -> T {
    let (p2, p1, p0) = l1_numerator_coeffs::<T>();
    ((p2 * c + p1) * c + p0) / l1_denominator::<T>()
}

/// `∂l1/∂c`.
pub fn dl1_dc<T: Real>(c: T) -> T {
    let (p2, p1, _) = l1_numerator_coeffs::<T>();
    (T::lit(2.0) * p2 * c + p1) / l1_denominator::<T>()
}

/// `½·Re(i·g20·g11 + g21)` with `ω0 = 1`.
pub fn l1_from_table<T: Real>(t: &CoeffTable<T>) -> Result<T> {
    let i = Complex::new(T::zero(), T::one());
    Ok((i * t.g(2, 0)? * t.g(1, 1)? + t.g(2, 1)?).re / T::lit(2.0))
}

/// Builds the cascade through cubic order at `c` and evaluates `l1`.
pub fn l1_from_cascade<T: Real>(c: T) -> Result<T> {
    let t = CenterManifold::new()?.build(c, CascadeOrder::Cubic)?;
    l1_from_table(&t)
}

/// Roots of the `l1` numerator, larger first.
pub fn bautin_candidates<T: Real>() -> (T, T) {
    let (p2, p1, p0) = l1_numerator_coeffs::<T>();
    let disc = (p1 * p1 - T::lit(4.0) * p2 * p0).sqrt();
    let two_a = p2 + p2;
    let (x, y) = ((-p1 + disc) / two_a, (-p1 - disc) / two_a);
    (x.max(y), x.min(y))
}

/// `12·l2` groups evaluated with `ω0 = 1`, then divided by 12.
pub fn l2_from_table<T: Real>(t: &CoeffTable<T>) -> Result<T> {
    let n = |x: f64| T::lit(x);
    let g = |j, k| t.g(j, k);
    let gb = |j, k| t.gb(j, k);
    let (g20, g11, g02) = (g(2, 0)?, g(1, 1)?, g(0, 2)?);
    let (g30, g21, g12, g03) = (g(3, 0)?, g(2, 1)?, g(1, 2)?, g(0, 3)?);
    let (g40, g31, g13) = (g(4, 0)?, g(3, 1)?, g(1, 3)?);
    let g32 = g(3, 2)?;
    let third = |z: Complex<T>| z.unscale(n(3.0));

    let t1 = g32.re;
    let t2 = (g20 * g(3, 1)?.conj()
        - g11 * (g31.scale(n(4.0)) + gb(2, 2)?.scale(n(3.0)))
        - third(g02 * (g40 + g13.conj()))
        - g30 * g12)
        .im;
    let g20g11 = g20 * g11;
    let t3 = (g20
        * (gb(1, 1)? * (g12.scale(n(3.0)) - g30.conj()) + g02 * (g12.conj() - third(g30)) + third(g02.conj() * g03))
        + g11
            * (g02.conj() * (g30.conj().scale(n(5.0) / n(3.0)) + g12.scale(n(3.0))) + third(g02 * g03.conj())
                - (g11 * g30).scale(n(4.0))))
    .re
        + n(3.0) * g20g11.im * g21.im;
    let gb20 = g20.conj();
    let t4 = (g11 * g02.conj() * (gb20 * gb20 - (gb20 * g11).scale(n(3.0)) - (g11 * g11).scale(n(4.0)))).im
        + g20g11.im * (n(3.0) * g20g11.re - n(2.0) * g02.norm_sqr());
    Ok((t1 + t2 + t3 + t4) / n(12.0))
}

/// Full cascade at `c`, then `l2`.
pub fn l2_at<T: Real>(c: T) -> Result<T> {
    l2_from_table(&coeff_table(c)?)
}

/// Determinant of `∂(ν1, ν2)/∂(a, c)` at `(−1, c_star)`: `μ′(−1)·∂l1/∂c`.
pub fn regularity_jacobian<T: Real>(c_star: T) -> Result<T> {
    Ok(mu_derivative(hopf_gain::<T>(), hopf_delay::<T>())? * dl1_dc(c_star))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    BautinL2Positive,
    BautinL2Negative,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationReport<T> {
    pub c_star: T,
    pub l1_at: T,
    pub dl1_dc: T,
    pub l2: T,
    pub mu_prime: T,
    pub jacobian_det: T,
    pub classification: Classification,
    pub notes: Vec<String>,
}

/// Assembles every quantity checked at a Bautin candidate.
pub fn bautin_report<T: Real>(c_star: T) -> Result<BifurcationReport<T>> {
    let table = coeff_table(c_star)?;
    let l1_at = l1_from_table(&table)?;
    let l2 = l2_from_table(&table)?;
    let mu_prime = mu_derivative(hopf_gain::<T>(), hopf_delay::<T>())?;
    let slope = dl1_dc(c_star);
    let jacobian_det = mu_prime * slope;

    let mut notes = Vec::new();
    if l1_at.abs() > T::tol(1e-10) {
        notes.push(format!("c_star is not a root of l1 (l1 = {:e})", l1_at.to_f64_lossy()));
    }
    let classification = if l2.abs() < T::lit(L2_DEGENERACY) || jacobian_det.abs() < T::lit(JACOBIAN_DEGENERACY) {
        Classification::Degenerate
    } else if l2 > T::zero() {
        Classification::BautinL2Positive
    } else {
        Classification::BautinL2Negative
    };
    if classification == Classification::BautinL2Positive {
        notes.push(
            "l2 > 0: an attracting inner cycle and a repelling outer cycle coexist for small mu > 0 with l1 < 0"
                .to_string(),
        );
    }
    let (c1, c2) = bautin_candidates::<T>();
    if (c_star - c2).abs() < T::tol(1e-6) && classification == Classification::BautinL2Positive {
        notes.push("l2(c2) > 0 supersedes the earlier claim l2(c2) < 0".to_string());
    }
    if (c_star - c1).abs() < T::tol(1e-6) {
        notes.push("l2 computed with the solvability-fixed w21(0); the w21(0) = 0 value 13.08553919 is superseded".to_string());
    }
    Ok(BifurcationReport {
        c_star,
        l1_at,
        dl1_dc: slope,
        l2,
        mu_prime,
        jacobian_det,
        classification,
        notes,
    })
}

/// Positive roots `ρ_in < ρ_out` of `μ + l1ρ² + l2ρ⁴ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRadii<T> {
    pub inner: T,
    pub outer: T,
}

pub fn cycle_radii<T: Real>(mu: T, l1: T, l2: T) -> Result<CycleRadii<T>> {
    if !(mu > T::zero() && l1 < T::zero() && l2 > T::zero()) {
        return Err(Error::Precondition(format!(
            "two cycles need mu > 0, l1 < 0, l2 > 0 (got {mu}, {l1}, {l2})"
        )));
    }
    let disc = l1 * l1 - T::lit(4.0) * l2 * mu;
    if disc < T::zero() {
        return Err(Error::NegativeDiscriminant {
            value: disc.to_f64_lossy(),
        });
    }
    let s = disc.sqrt();
    let two_l2 = l2 + l2;
    // small root via the stable form 2μ/(−l1 + s)
    let u_in = (mu + mu) / (-l1 + s);
    let u_out = (-l1 + s) / two_l2;
    Ok(CycleRadii {
        inner: u_in.sqrt(),
        outer: u_out.sqrt(),
    })
}

/// `μ` at the fold of cycles: `l1²/(4·l2)`.
pub fn fold_mu<T: Real>(l1: T, l2: T) -> T {
    l1 * l1 / (T::lit(4.0) * l2)
}
