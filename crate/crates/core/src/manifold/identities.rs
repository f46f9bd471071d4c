//! Consistency relations between the order-2 solutions and the two
//! boundary relations for `w21`.

use num_complex::Complex;

use super::cascade::CoeffTable;
use super::imag_unit;
use crate::error::Result;
use crate::scalar::Real;

/// An integral computed from the solved function next to its closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralCheck<T: Real> {
    pub integral: Complex<T>,
    pub closed_form: Complex<T>,
}

impl<T: Real> IntegralCheck<T> {
    pub fn gap(&self) -> T {
        (self.integral - self.closed_form).norm()
    }
}

fn twisted_integral<T: Real>(t: &CoeffTable<T>, j: u32, k: u32, r: T) -> Result<Complex<T>> {
    // ∫_0^{−r} w(τ)·e^{−iτ} dτ
    t.w(j, k)?.func.shift_frequency(-1).integrate(T::zero(), -r)
}

/// `I1`, `I2`, `I3`: `∫_0^{−r} w·e^{−iτ}` for `w20`, `w11`, `w02`.
pub fn i_integrals<T: Real>(t: &CoeffTable<T>, r: T) -> Result<[IntegralCheck<T>; 3]> {
    let i = imag_unit::<T>();
    let ir = i.scale(r);
    let i1 = t.wr(2, 0)? + i * t.w0(2, 0)? - ir * t.g(2, 0)? + t.gb(0, 2)?;
    let i2 = -t.wr(1, 1)? - i * t.w0(1, 1)? + ir * t.g(1, 1)? - t.gb(1, 1)?;
    let i3 = (-t.wr(0, 2)? - i * t.w0(0, 2)? + ir * t.g(0, 2)? - t.gb(2, 0)?).unscale(T::lit(3.0));
    Ok([
        IntegralCheck { integral: twisted_integral(t, 2, 0, r)?, closed_form: i1 },
        IntegralCheck { integral: twisted_integral(t, 1, 1, r)?, closed_form: i2 },
        IntegralCheck { integral: twisted_integral(t, 0, 2, r)?, closed_form: i3 },
    ])
}

/// `(1/3)[−w02(−r) + i·w02(0) + i·r·g02 − ḡ20]`: the `w02` closed form with the
/// sign of the `i·w02(0)` term flipped. It equals exactly one third of the
/// integral, because that integral is itself `−i·w02(0)`.
pub fn i3_printed<T: Real>(t: &CoeffTable<T>, r: T) -> Result<Complex<T>> {
    let i = imag_unit::<T>();
    Ok((-t.wr(0, 2)? + i * t.w0(0, 2)? + i.scale(r) * t.g(0, 2)? - t.gb(2, 0)?).unscale(T::lit(3.0)))
}

/// Right side of `w21(−r) + i·w21(0) = …` read off at `s = 0` of the ODE.
pub fn cond1_rhs<T: Real>(t: &CoeffTable<T>) -> Result<Complex<T>> {
    let two = T::lit(2.0);
    Ok(-(t.w0(2, 0)? * t.g(1, 1)?).scale(two)
        - (t.w0(1, 1)? * t.gb(1, 1)?).scale(two)
        - t.w0(1, 1)? * t.g(2, 0)?
        - t.w0(0, 2)? * t.gb(0, 2)?
        - t.g(2, 1)?
        - t.gb(1, 2)?
        + t.f(2, 1)?)
}

/// Right side of the same relation obtained after integrating the ODE over `[−r, 0]`.
pub fn cond2_rhs<T: Real>(t: &CoeffTable<T>, r: T) -> Result<Complex<T>> {
    let two = T::lit(2.0);
    let pi = T::PI();
    let f21 = t.f(2, 1)?;
    let e = Complex::new(r.cos(), -r.sin());
    let i1 = twisted_integral(t, 2, 0, r)?;
    let i2 = twisted_integral(t, 1, 1, r)?;
    let i3 = twisted_integral(t, 0, 2, r)?;
    Ok(f21 - f21.scale(T::lit(8.0) / (T::lit(4.0) + pi * pi))
        + (t.g(1, 1)? * i1).scale(two) * e
        + e * ((t.g(2, 0)? + t.gb(1, 1)?.scale(two)) * i2 + t.gb(0, 2)? * i3))
}

/// The three products claimed to cancel:
/// `−2i·g11·I1 + 2w20(0)g11`, `−i(g20 + 2ḡ11)I2 + (2ḡ11 + g20)w11(0)`, `−iḡ02·I3 + w02(0)ḡ02`.
pub fn cancellations<T: Real>(t: &CoeffTable<T>, r: T) -> Result<[Complex<T>; 3]> {
    let i = imag_unit::<T>();
    let two = T::lit(2.0);
    let [i1, i2, i3] = i_integrals(t, r)?.map(|c| c.integral);
    let k2 = t.g(2, 0)? + t.gb(1, 1)?.scale(two);
    Ok([
        -(i * t.g(1, 1)? * i1).scale(two) + (t.w0(2, 0)? * t.g(1, 1)?).scale(two),
        -i * k2 * i2 + k2 * t.w0(1, 1)?,
        -i * t.gb(0, 2)? * i3 + t.w0(0, 2)? * t.gb(0, 2)?,
    ])
}

/// `g21 + ḡ12` next to `8F21/(4 + π²)`.
pub fn g21_sum_check<T: Real>(t: &CoeffTable<T>) -> Result<IntegralCheck<T>> {
    let pi = T::PI();
    Ok(IntegralCheck {
        integral: t.g(2, 1)? + t.gb(1, 2)?,
        closed_form: t.f(2, 1)?.scale(T::lit(8.0) / (T::lit(4.0) + pi * pi)),
    })
}
