use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{bilinear, cx, eigen_data, hopf_delay, hopf_gain, imag_unit, EigenData};
use crate::error::{Error, Result};
use crate::exp_poly::ExpPoly;
use crate::json::ComplexJson;
use crate::scalar::Real;

/// `(j, k)`: power of `z` and of `z̄`.
pub type Index = (u32, u32);

/// Tolerance on the two independent routes to `w21(−r)`.
pub const W21_COMPATIBILITY_TOL: f64 = 1e-9;

/// A solved coefficient function `w_jk` together with the problem it solves:
/// `w′ = i·rate·w + forcing` on `[−r, 0]` and `w′(0) = a·w(−r) + bc_const`.
#[derive(Debug, Clone, PartialEq)]
pub struct WCoeff<T: Real> {
    pub func: ExpPoly<T>,
    pub at0: Complex<T>,
    pub at_mr: Complex<T>,
    pub rate: i32,
    pub forcing: ExpPoly<T>,
    pub bc_const: Complex<T>,
}

impl<T: Real> WCoeff<T> {
    fn from_func(func: ExpPoly<T>, rate: i32, forcing: ExpPoly<T>, bc_const: Complex<T>) -> Result<Self> {
        let (lo, hi) = func.interval();
        Ok(Self {
            at0: func.eval(hi)?,
            at_mr: func.eval(lo)?,
            func,
            rate,
            forcing,
            bc_const,
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            func: self.func.conj(),
            at0: self.at0.conj(),
            at_mr: self.at_mr.conj(),
            rate: -self.rate,
            forcing: self.forcing.conj(),
            bc_const: self.bc_const.conj(),
        }
    }

    /// Largest ODE residual over `n` equispaced points of `[−r, 0]`.
    pub fn ode_residual(&self, n: usize) -> T {
        let (lo, hi) = self.func.interval();
        let lhs = self.func.derivative();
        let rhs = &self.func.scale(Complex::new(T::zero(), T::lit(self.rate as f64))) + &self.forcing;
        let n = n.max(2);
        (0..n)
            .map(|k| {
                let s = lo + (hi - lo) * T::lit(k as f64 / (n - 1) as f64);
                (lhs.eval_unchecked(s) - rhs.eval_unchecked(s)).norm()
            })
            .fold(T::zero(), T::max)
    }

    /// `|w′(0) − a·w(−r) − bc_const|`.
    pub fn bc_residual(&self, a: T) -> T {
        let (lo, hi) = self.func.interval();
        let d0 = self.func.derivative().eval_unchecked(hi);
        (d0 - self.func.eval_unchecked(lo).scale(a) - self.bc_const).norm()
    }
}

/// `e^{ims}·[A(s) − A(0)]` with `A′ = e^{−ims}·forcing`: the solution of
/// `w′ = imw + forcing` that vanishes at `s = 0`.
fn particular<T: Real>(rate: i32, forcing: &ExpPoly<T>) -> Result<ExpPoly<T>> {
    let (lo, hi) = forcing.interval();
    let anti = forcing.shift_frequency(-rate).antiderivative();
    let at0 = anti.eval(T::zero())?;
    Ok((&anti - &ExpPoly::constant(at0, lo, hi)).shift_frequency(rate))
}

fn with_initial<T: Real>(rate: i32, forcing: &ExpPoly<T>, w0: Complex<T>) -> Result<ExpPoly<T>> {
    let (lo, hi) = forcing.interval();
    Ok(&ExpPoly::exp(rate, w0, lo, hi) + &particular(rate, forcing)?)
}

/// Solves `w′ = imw + forcing`, `w′(0) = a·w(−r) + bc` for the scalar
/// unknown `w(0)`; singular exactly when `im` is a characteristic root.
fn solve_bvp<T: Real>(rate: i32, forcing: &ExpPoly<T>, bc: Complex<T>, a: T) -> Result<ExpPoly<T>> {
    let (lo, _) = forcing.interval();
    let r = -lo;
    let p = particular(rate, forcing)?;
    let lam = Complex::new(T::zero(), T::lit(rate as f64));
    let h = lam - (-lam * r).exp().scale(a);
    if h.norm() < T::tol(1e-10) {
        return Err(Error::Singular {
            what: "boundary relation (resonant rate)",
            magnitude: h.norm().to_f64_lossy(),
        });
    }
    let w0 = (p.eval(lo)?.scale(a) + bc - forcing.eval(T::zero())?) / h;
    with_initial(rate, forcing, w0)
}

/// How the boundary condition of `w31` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum W31Boundary {
    /// The same uniform relation `w′(0) = a·w(−r) + F31` every other order satisfies.
    #[default]
    Matching,
    /// The relation as printed, with `3ḡ13` in place of `ḡ13` on the right.
    Printed,
}

/// Highest order built by [`CenterManifold::build`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CascadeOrder {
    /// `F`, `g`, `w` of order 2.
    Quadratic,
    /// Adds `F30`, `F21` and their `g`; enough for `l1`.
    Cubic,
    /// Adds `w30`, `w21`, quartic `F`/`g`, `w22`, `w31`, `F32`, `g32`.
    Full,
}

impl CascadeOrder {
    /// Maps a total order `2..=5` onto the cascade stage that provides it.
    pub fn from_total(n: u32) -> Result<Self> {
        match n {
            2 => Ok(Self::Quadratic),
            3 => Ok(Self::Cubic),
            4 | 5 => Ok(Self::Full),
            _ => Err(Error::InvalidParameter(format!("order must be in 2..=5, got {n}"))),
        }
    }
}

/// How the order-(2,1) unknown was fixed and cross-checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W21Diagnostics<T: Real> {
    pub at0: Complex<T>,
    /// `w21(−r)` from the boundary relation and `w21(0)`.
    pub at_mr_from_cond1: Complex<T>,
    /// `w21(−r)` from integrating the ODE from `w21(0)`.
    pub at_mr_reconstructed: Complex<T>,
    pub cond1_rhs: Complex<T>,
    pub cond2_rhs: Complex<T>,
    /// `⟨Ψ1, w21⟩`, zero when `w21` carries no center-direction component.
    pub projection: Complex<T>,
}

/// Numbers produced by the cascade at one value of `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable<T: Real> {
    pub c: T,
    f: BTreeMap<Index, Complex<T>>,
    g: BTreeMap<Index, Complex<T>>,
    w: BTreeMap<Index, WCoeff<T>>,
    pub w21_check: Option<W21Diagnostics<T>>,
}

impl<T: Real> CoeffTable<T> {
    pub fn new(c: T) -> Self {
        Self {
            c,
            f: BTreeMap::new(),
            g: BTreeMap::new(),
            w: BTreeMap::new(),
            w21_check: None,
        }
    }

    pub fn f(&self, j: u32, k: u32) -> Result<Complex<T>> {
        self.f.get(&(j, k)).copied().ok_or(Error::MissingCoefficient(j, k))
    }

    pub fn g(&self, j: u32, k: u32) -> Result<Complex<T>> {
        self.g.get(&(j, k)).copied().ok_or(Error::MissingCoefficient(j, k))
    }

    /// `conj(g_jk)`.
    pub fn gb(&self, j: u32, k: u32) -> Result<Complex<T>> {
        self.g(j, k).map(|z| z.conj())
    }

    pub fn w(&self, j: u32, k: u32) -> Result<&WCoeff<T>> {
        self.w.get(&(j, k)).ok_or(Error::MissingCoefficient(j, k))
    }

    pub fn w0(&self, j: u32, k: u32) -> Result<Complex<T>> {
        self.w(j, k).map(|w| w.at0)
    }

    pub fn wr(&self, j: u32, k: u32) -> Result<Complex<T>> {
        self.w(j, k).map(|w| w.at_mr)
    }

    pub fn f_entries(&self) -> impl Iterator<Item = (Index, Complex<T>)> + '_ {
        self.f.iter().map(|(k, v)| (*k, *v))
    }

    pub fn g_entries(&self) -> impl Iterator<Item = (Index, Complex<T>)> + '_ {
        self.g.iter().map(|(k, v)| (*k, *v))
    }

    pub fn w_entries(&self) -> impl Iterator<Item = (Index, &WCoeff<T>)> + '_ {
        self.w.iter().map(|(k, v)| (*k, v))
    }

    /// Stores `F_jk`, its conjugate partner and both `g = ψ1(0)·F`.
    fn put_f(&mut self, (j, k): Index, value: Complex<T>, psi0: Complex<T>) {
        self.f.insert((j, k), value);
        self.g.insert((j, k), psi0 * value);
        if j != k {
            self.f.insert((k, j), value.conj());
            self.g.insert((k, j), psi0 * value.conj());
        }
    }

    fn put_w(&mut self, (j, k): Index, w: WCoeff<T>) {
        if j != k {
            self.w.insert((k, j), w.conj());
        }
        self.w.insert((j, k), w);
    }

    /// Worst ODE and boundary residuals over every stored `w_jk`.
    pub fn max_residuals(&self, a: T, samples: usize) -> (T, T) {
        self.w.values().fold((T::zero(), T::zero()), |(o, b), w| {
            (o.max(w.ode_residual(samples)), b.max(w.bc_residual(a)))
        })
    }
}

/// The order-by-order solver. Holds the eigen data and the `w31` boundary choice.
#[derive(Debug, Clone)]
pub struct CenterManifold<T: Real> {
    pub eigen: EigenData<T>,
    pub a: T,
    pub r: T,
    pub w31_boundary: W31Boundary,
}

impl<T: Real> CenterManifold<T> {
    pub fn new() -> Result<Self> {
        Ok(Self {
            eigen: eigen_data()?,
            a: hopf_gain(),
            r: hopf_delay(),
            w31_boundary: W31Boundary::Matching,
        })
    }

    pub fn with_w31_boundary(mut self, b: W31Boundary) -> Self {
        self.w31_boundary = b;
        self
    }

    fn psi0(&self) -> Complex<T> {
        self.eigen.psi1_at_0
    }

    fn e(&self, q: i32, coef: Complex<T>) -> ExpPoly<T> {
        ExpPoly::exp(q, coef, -self.r, T::zero())
    }

    /// `F20 = 2(1 − ic)`, `F11 = 2`, `F02 = conj F20`.
    pub fn quadratic_coeffs(&self, c: T) -> CoeffTable<T> {
        let mut t = CoeffTable::new(c);
        let two = T::lit(2.0);
        t.put_f((2, 0), Complex::new(two, -two * c), self.psi0());
        t.put_f((1, 1), Complex::new(two, T::zero()), self.psi0());
        t
    }

    pub fn solve_w2(&self, t: &mut CoeffTable<T>) -> Result<()> {
        let (g20, g11) = (t.g(2, 0)?, t.g(1, 1)?);
        let (gb02, gb11) = (t.gb(0, 2)?, t.gb(1, 1)?);

        let forcing = &self.e(1, g20) + &self.e(-1, gb02);
        let f20 = t.f(2, 0)?;
        let w20 = solve_bvp(2, &forcing, f20, self.a)?;
        t.put_w((2, 0), WCoeff::from_func(w20, 2, forcing, f20)?);

        let forcing = &self.e(1, g11) + &self.e(-1, gb11);
        let f11 = t.f(1, 1)?;
        let w11 = solve_bvp(0, &forcing, f11, self.a)?;
        t.put_w((1, 1), WCoeff::from_func(w11, 0, forcing, f11)?);
        Ok(())
    }

    pub fn cubic_coeffs(&self, t: &mut CoeffTable<T>) -> Result<()> {
        let c = t.c;
        let i = imag_unit::<T>();
        let (w20_0, w20_r) = (t.w0(2, 0)?, t.wr(2, 0)?);
        let (w11_0, w11_r) = (t.w0(1, 1)?, t.wr(1, 1)?);
        let n = |x: f64| T::lit(x);

        let f30 = (w20_r - i * w20_0).scale(n(3.0) * c) + w20_0.scale(n(6.0));
        let f21 = (w11_r - i * w11_0).scale(n(2.0) * c)
            + w11_0.scale(n(4.0))
            + (w20_r + i * w20_0).scale(c)
            + w20_0.scale(n(2.0));
        t.put_f((3, 0), f30, self.psi0());
        t.put_f((2, 1), f21, self.psi0());
        Ok(())
    }

    pub fn solve_w30(&self, t: &mut CoeffTable<T>) -> Result<()> {
        let three = T::lit(3.0);
        let forcing = &(&self.e(1, t.g(3, 0)?) + &self.e(-1, t.gb(0, 3)?))
            + &(&t.w(2, 0)?.func.scale(t.g(2, 0)?.scale(three))
                + &t.w(1, 1)?.func.scale(t.gb(0, 2)?.scale(three)));
        let f30 = t.f(3, 0)?;
        let w30 = solve_bvp(3, &forcing, f30, self.a)?;
        t.put_w((3, 0), WCoeff::from_func(w30, 3, forcing, f30)?);
        Ok(())
    }

    /// Forcing of the resonant order-(2,1) equation.
    pub fn w21_forcing(&self, t: &CoeffTable<T>) -> Result<ExpPoly<T>> {
        let two = T::lit(2.0);
        let (g20, g11) = (t.g(2, 0)?, t.g(1, 1)?);
        let (gb11, gb02) = (t.gb(1, 1)?, t.gb(0, 2)?);
        Ok(&(&self.e(1, t.g(2, 1)?) + &self.e(-1, t.gb(1, 2)?))
            + &(&(&t.w(2, 0)?.func.scale(g11.scale(two))
                + &t.w(1, 1)?.func.scale(g20 + gb11.scale(two)))
                + &t.w(0, 2)?.func.scale(gb02)))
    }

    /// `w21(0)` from the solvability formula
    /// `[f21⟨Ψ1+Ψ2, ρ⟩ − 2g11⟨ρ̃, w20⟩ − (g20 + 2ḡ11)⟨ρ̃, w11⟩ − ḡ02⟨ρ̃, w02⟩] / (2ri + 2)`
    /// with `ρ(s) = −2s·e^{is}` and `ρ̃(ζ) = −2ζ·e^{−iζ}`.
    pub fn w21_at0(&self, t: &CoeffTable<T>) -> Result<Complex<T>> {
        let (a, r) = (self.a, self.r);
        let two = T::lit(2.0);
        let rho = ExpPoly::monomial(1, 1, cx(-2.0, 0.0), -r, T::zero());
        let rho_t = ExpPoly::monomial(1, -1, cx(-2.0, 0.0), T::zero(), r);
        let psi_sum = &self.eigen.psi1 + &self.eigen.psi2;
        let f21 = t.g(2, 1)? / self.psi0();
        let num = f21 * bilinear(&psi_sum, &rho, a)?
            - t.g(1, 1)?.scale(two) * bilinear(&rho_t, &t.w(2, 0)?.func, a)?
            - (t.g(2, 0)? + t.gb(1, 1)?.scale(two)) * bilinear(&rho_t, &t.w(1, 1)?.func, a)?
            - t.gb(0, 2)? * bilinear(&rho_t, &t.w(0, 2)?.func, a)?;
        Ok(num / Complex::new(two, two * r))
    }

    pub fn solve_w21(&self, t: &mut CoeffTable<T>) -> Result<W21Diagnostics<T>> {
        let forcing = self.w21_forcing(t)?;
        let at0 = self.w21_at0(t)?;
        let cond1 = super::identities::cond1_rhs(t)?;
        let cond2 = super::identities::cond2_rhs(t, self.r)?;
        let at_mr_from_cond1 = cond1 - imag_unit::<T>() * at0;
        let func = with_initial(1, &forcing, at0)?;
        let at_mr_reconstructed = func.eval(-self.r)?;
        let mismatch = (at_mr_reconstructed - at_mr_from_cond1).norm();
        if !(mismatch <= T::tol(W21_COMPATIBILITY_TOL)) {
            return Err(Error::Compatibility {
                mismatch: mismatch.to_f64_lossy(),
            });
        }
        let projection = bilinear(&self.eigen.psi1, &func, self.a)?;
        let f21 = t.f(2, 1)?;
        t.put_w((2, 1), WCoeff::from_func(func, 1, forcing, f21)?);
        let diag = W21Diagnostics {
            at0,
            at_mr_from_cond1,
            at_mr_reconstructed,
            cond1_rhs: cond1,
            cond2_rhs: cond2,
            projection,
        };
        t.w21_check = Some(diag);
        Ok(diag)
    }

    pub fn quartic_coeffs(&self, t: &mut CoeffTable<T>) -> Result<()> {
        let c = t.c;
        let i = imag_unit::<T>();
        let n = |x: f64| T::lit(x);
        let (w20_0, w20_r) = (t.w0(2, 0)?, t.wr(2, 0)?);
        let (w02_0, w02_r) = (t.w0(0, 2)?, t.wr(0, 2)?);
        let (w11_0, w11_r) = (t.w0(1, 1)?, t.wr(1, 1)?);
        let (w30_0, w30_r) = (t.w0(3, 0)?, t.wr(3, 0)?);
        let (w21_0, w21_r) = (t.w0(2, 1)?, t.wr(2, 1)?);
        let (w12_0, w12_r) = (t.w0(1, 2)?, t.wr(1, 2)?);

        let f40 = (w30_0.unscale(n(3.0))
            + (w20_0 * w20_0).unscale(n(4.0))
            + (w30_r.unscale(n(6.0)) - i * w30_0.unscale(n(6.0)) + (w20_0 * w20_r).unscale(n(4.0)))
                .scale(c))
        .scale(n(24.0));

        let f31 = (w21_r.scale(n(3.0)) + w30_r + i * w30_0 - i * w21_0.scale(n(3.0))
            + (w20_0 * w11_r).scale(n(3.0))
            + (w11_0 * w20_r).scale(n(3.0)))
        .scale(c)
            + (w11_0 * w20_0).scale(n(6.0))
            + w21_0.scale(n(6.0))
            + w30_0.scale(n(2.0));

        let f22 = ((w12_r + w21_r).scale(n(2.0))
            + w20_0 * w02_r
            + (w11_0 * w11_r).scale(n(4.0))
            + w02_0 * w20_r
            + i * (w21_0 - w12_0).scale(n(2.0)))
        .scale(c)
            + (w20_0 * w02_0).scale(n(2.0))
            + (w11_0 * w11_0).scale(n(4.0))
            + (w12_0 + w21_0).scale(n(4.0));

        t.put_f((4, 0), f40, self.psi0());
        t.put_f((3, 1), f31, self.psi0());
        t.put_f((2, 2), f22, self.psi0());
        Ok(())
    }

    pub fn solve_w22_w31_and_g32(&self, t: &mut CoeffTable<T>) -> Result<()> {
        let n = |x: f64| T::lit(x);
        let g = |j, k| t.g(j, k);
        let gb = |j, k| t.gb(j, k);
        let wf = |j, k| t.w(j, k).map(|w| w.func.clone());

        let terms22 = [
            (wf(2, 0)?, g(1, 2)?.scale(n(2.0))),
            (wf(0, 2)?, gb(1, 2)?.scale(n(2.0))),
            (wf(1, 1)?, (g(2, 1)? + gb(2, 1)?).scale(n(2.0))),
            (wf(3, 0)?, g(0, 2)?),
            (wf(0, 3)?, gb(0, 2)?),
            (wf(2, 1)?, g(1, 1)?.scale(n(4.0)) + gb(2, 0)?),
            (wf(1, 2)?, g(2, 0)? + gb(1, 1)?.scale(n(4.0))),
        ];
        let mut forcing = &self.e(1, g(2, 2)?) + &self.e(-1, gb(2, 2)?);
        for (f, k) in &terms22 {
            forcing = &forcing + &f.scale(*k);
        }
        let f22 = t.f(2, 2)?;
        let w22 = solve_bvp(0, &forcing, f22, self.a)?;
        let w22 = WCoeff::from_func(w22, 0, forcing, f22)?;

        let terms31 = [
            (wf(2, 0)?, g(2, 1)?.scale(n(3.0))),
            (wf(1, 1)?, g(3, 0)? + gb(1, 2)?.scale(n(3.0))),
            (wf(0, 2)?, gb(0, 3)?),
            (wf(3, 0)?, g(1, 1)?.scale(n(3.0))),
            (wf(2, 1)?, (g(2, 0)? + gb(1, 1)?).scale(n(3.0))),
            (wf(1, 2)?, gb(0, 2)?.scale(n(3.0))),
        ];
        let mut forcing = &self.e(1, g(3, 1)?) + &self.e(-1, gb(1, 3)?);
        for (f, k) in &terms31 {
            forcing = &forcing + &f.scale(*k);
        }
        let bc31 = match self.w31_boundary {
            W31Boundary::Matching => t.f(3, 1)?,
            // Printed: 2i·w31(0) + w31(−r) = −(Σ + g31 + 3ḡ13) + F31, i.e. the
            // uniform relation with F31 − 2ḡ13 as its constant.
            W31Boundary::Printed => t.f(3, 1)? - gb(1, 3)?.scale(n(2.0)),
        };
        let w31 = solve_bvp(2, &forcing, bc31, self.a)?;
        let w31 = WCoeff::from_func(w31, 2, forcing, bc31)?;
        t.put_w((2, 2), w22);
        t.put_w((3, 1), w31);

        let f32 = self.f32_value(t)?;
        t.put_f((3, 2), f32, self.psi0());
        Ok(())
    }

    fn f32_value(&self, t: &CoeffTable<T>) -> Result<Complex<T>> {
        let c = t.c;
        let i = imag_unit::<T>();
        let n = |x: f64| T::lit(x);
        let z = |j, k| t.w0(j, k);
        let m = |j, k| t.wr(j, k);
        let plain = z(2, 2)?.scale(n(6.0))
            + z(3, 1)?.scale(n(4.0))
            + (z(2, 0)? * z(1, 2)?).scale(n(6.0))
            + (z(1, 1)? * z(2, 1)?).scale(n(12.0))
            + (z(0, 2)? * z(3, 0)?).scale(n(2.0));
        let delayed = m(2, 2)?.scale(n(3.0))
            + m(3, 1)?.scale(n(2.0))
            + (z(2, 0)? * m(1, 2)?).scale(n(3.0))
            + (z(1, 1)? * m(2, 1)?).scale(n(6.0))
            + z(0, 2)? * m(3, 0)?
            + z(3, 0)? * m(0, 2)?
            + (z(2, 1)? * m(1, 1)?).scale(n(6.0))
            + (z(1, 2)? * m(2, 0)?).scale(n(3.0))
            + i * (z(3, 1)?.scale(n(2.0)) - z(2, 2)?.scale(n(3.0)));
        Ok(plain + delayed.scale(c))
    }

    /// Runs the cascade up to `order`.
    pub fn build(&self, c: T, order: CascadeOrder) -> Result<CoeffTable<T>> {
        let mut t = self.quadratic_coeffs(c);
        self.solve_w2(&mut t)?;
        if order >= CascadeOrder::Cubic {
            self.cubic_coeffs(&mut t)?;
        }
        if order >= CascadeOrder::Full {
            self.solve_w30(&mut t)?;
            self.solve_w21(&mut t)?;
            self.quartic_coeffs(&mut t)?;
            self.solve_w22_w31_and_g32(&mut t)?;
        }
        Ok(t)
    }
}

/// Full cascade at `c` with the default solver.
pub fn coeff_table<T: Real>(c: T) -> Result<CoeffTable<T>> {
    CenterManifold::new()?.build(c, CascadeOrder::Full)
}

// ---- JSON layout -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CoeffJson<T> {
    j: u32,
    k: u32,
    re: T,
    im: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
struct WJson<T: Real> {
    j: u32,
    k: u32,
    #[serde(rename = "fn")]
    func: ExpPoly<T>,
    at0: ComplexJson<T>,
    at_mr: ComplexJson<T>,
    rate: i32,
    forcing: ExpPoly<T>,
    bc_const: ComplexJson<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
struct TableJson<T: Real> {
    c: T,
    #[serde(rename = "F")]
    f: Vec<CoeffJson<T>>,
    g: Vec<CoeffJson<T>>,
    w: Vec<WJson<T>>,
}

fn coeff_list<T: Real>(m: &BTreeMap<Index, Complex<T>>) -> Vec<CoeffJson<T>> {
    m.iter()
        .map(|(&(j, k), v)| CoeffJson { j, k, re: v.re, im: v.im })
        .collect()
}

impl<T: Real + Serialize> Serialize for CoeffTable<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TableJson {
            c: self.c,
            f: coeff_list(&self.f),
            g: coeff_list(&self.g),
            w: self
                .w
                .iter()
                .map(|(&(j, k), w)| WJson {
                    j,
                    k,
                    func: w.func.clone(),
                    at0: w.at0.into(),
                    at_mr: w.at_mr.into(),
                    rate: w.rate,
                    forcing: w.forcing.clone(),
                    bc_const: w.bc_const.into(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + serde::de::DeserializeOwned> Deserialize<'de> for CoeffTable<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TableJson::<T>::deserialize(d)?;
        let to_map = |v: Vec<CoeffJson<T>>| {
            v.into_iter()
                .map(|e| ((e.j, e.k), Complex::new(e.re, e.im)))
                .collect::<BTreeMap<_, _>>()
        };
        Ok(Self {
            c: raw.c,
            f: to_map(raw.f),
            g: to_map(raw.g),
            w: raw
                .w
                .into_iter()
                .map(|e| {
                    (
                        (e.j, e.k),
                        WCoeff {
                            func: e.func,
                            at0: e.at0.into(),
                            at_mr: e.at_mr.into(),
                            rate: e.rate,
                            forcing: e.forcing,
                            bc_const: e.bc_const.into(),
                        },
                    )
                })
                .collect(),
            w21_check: None,
        })
    }
}
