//! Exponential polynomials `s ↦ Σ c_{p,q} s^p e^{iqs}` on a closed real interval.
//!
//! Every center-manifold coefficient function of the model lives in this
//! class: eigenfunctions are single exponentials, the forced boundary-value
//! problems only ever integrate products of them, and resonant forcing just
//! raises the power `p`. Frequencies are integers in units of the base
//! frequency (which is 1 at the bifurcation point).
//!
//! Coefficients with magnitude below [`PRUNE_THRESHOLD`] are dropped after
//! every operation; the zero function is the empty term map.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coefficients below this magnitude are removed after each operation.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Slack allowed on interval endpoints when evaluating or comparing.
pub const ENDPOINT_SLACK: f64 = 1e-12;

/// `(power, frequency)` key of a term `s^p e^{iqs}`.
pub type TermKey = (u32, i32);

#[derive(Clone, PartialEq)]
pub struct ExpPoly<T: Real> {
    terms: BTreeMap<TermKey, Complex<T>>,
    lo: T,
    hi: T,
}

impl<T: Real> ExpPoly<T> {
    /// The zero function on `[lo, hi]`.
    pub fn zero(lo: T, hi: T) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self {
            terms: BTreeMap::new(),
            lo,
            hi,
        }
    }

    /// `coef · s^p · e^{iqs}`.
    pub fn monomial(p: u32, q: i32, coef: Complex<T>, lo: T, hi: T) -> Self {
        let mut f = Self::zero(lo, hi);
        f.accumulate((p, q), coef);
        f.prune();
        f
    }

    /// `coef · e^{iqs}`.
    pub fn exp(q: i32, coef: Complex<T>, lo: T, hi: T) -> Self {
        Self::monomial(0, q, coef, lo, hi)
    }

    pub fn constant(coef: Complex<T>, lo: T, hi: T) -> Self {
        Self::monomial(0, 0, coef, lo, hi)
    }

    /// Builds from `(p, q, coefficient)` triples; repeated keys are summed.
    pub fn from_terms<I>(terms: I, lo: T, hi: T) -> Self
    where
        I: IntoIterator<Item = (u32, i32, Complex<T>)>,
    {
        let mut f = Self::zero(lo, hi);
        for (p, q, c) in terms {
            f.accumulate((p, q), c);
        }
        f.prune();
        f
    }

    pub fn interval(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (TermKey, Complex<T>)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    /// Coefficient of `s^p e^{iqs}` (zero when absent).
    pub fn coeff(&self, p: u32, q: i32) -> Complex<T> {
        self.terms.get(&(p, q)).copied().unwrap_or_else(Complex::default)
    }

    /// Highest power of `s` present.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    fn accumulate(&mut self, key: TermKey, c: Complex<T>) {
        let slot = self.terms.entry(key).or_default();
        *slot = *slot + c;
    }

    fn prune(&mut self) {
        let thr = T::lit(PRUNE_THRESHOLD);
        self.terms.retain(|_, c| c.norm() >= thr);
    }

    fn same_interval(&self, other: &Self) -> bool {
        let slack = T::lit(ENDPOINT_SLACK);
        (self.lo - other.lo).abs() <= slack && (self.hi - other.hi).abs() <= slack
    }

    fn check_interval(&self, other: &Self) -> Result<()> {
        if self.same_interval(other) {
            Ok(())
        } else {
            Err(Error::IntervalMismatch {
                lo_a: self.lo.to_f64_lossy(),
                hi_a: self.hi.to_f64_lossy(),
                lo_b: other.lo.to_f64_lossy(),
                hi_b: other.hi.to_f64_lossy(),
            })
        }
    }

    /// Pointwise sum; fails when the intervals differ.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_interval(other)?;
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.accumulate(k, c);
        }
        out.prune();
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(-Complex::new(T::one(), T::zero())))
    }

    /// Pointwise product by term convolution `(p1,q1)·(p2,q2) → (p1+p2, q1+q2)`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_interval(other)?;
        let mut out = Self::zero(self.lo, self.hi);
        for (&(p1, q1), &c1) in &self.terms {
            for (&(p2, q2), &c2) in &other.terms {
                out.accumulate((p1 + p2, q1 + q2), c1 * c2);
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = *c * k;
        }
        out.prune();
        out
    }

    pub fn scale_real(&self, k: T) -> Self {
        self.scale(Complex::new(k, T::zero()))
    }

    /// Multiplies every term by `e^{iqs}`.
    pub fn shift_frequency(&self, q: i32) -> Self {
        let mut out = Self::zero(self.lo, self.hi);
        for (&(p, q0), &c) in &self.terms {
            out.accumulate((p, q0 + q), c);
        }
        out
    }

    /// The function whose value at every real `s` is the conjugate of `self(s)`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.lo, self.hi);
        for (&(p, q), &c) in &self.terms {
            out.terms.insert((p, -q), c.conj());
        }
        out
    }

    /// Exact derivative.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.lo, self.hi);
        for (&(p, q), &c) in &self.terms {
            if q != 0 {
                out.accumulate((p, q), c * Complex::new(T::zero(), T::lit(q as f64)));
            }
            if p > 0 {
                out.accumulate((p - 1, q), c.scale(T::lit(p as f64)));
            }
        }
        out.prune();
        out
    }

    /// Antiderivative with zero `s^0 e^{i0s}` coefficient.
    ///
    /// For `q ≠ 0` the integration-by-parts recursion
    /// `∫ s^p e^{iqs} = s^p e^{iqs}/(iq) − (p/(iq)) ∫ s^{p−1} e^{iqs}` is
    /// unrolled; for `q = 0` the power rule applies.
    pub fn antiderivative(&self) -> Self {
        let mut out = Self::zero(self.lo, self.hi);
        for (&(p, q), &c) in &self.terms {
            if q == 0 {
                out.accumulate((p + 1, 0), c.unscale(T::lit((p + 1) as f64)));
                continue;
            }
            let iq = Complex::new(T::zero(), T::lit(q as f64));
            let mut coef = c;
            let mut power = p;
            loop {
                out.accumulate((power, q), coef / iq);
                if power == 0 {
                    break;
                }
                coef = -coef.scale(T::lit(power as f64)) / iq;
                power -= 1;
            }
        }
        out.terms.remove(&(0, 0));
        out.prune();
        out
    }

    /// `∫_from^to f(s) ds`; both limits must lie in the interval.
    pub fn integrate(&self, from: T, to: T) -> Result<Complex<T>> {
        let anti = self.antiderivative();
        Ok(anti.eval(to)? - anti.eval(from)?)
    }

    /// Evaluates at `s`, which must lie in the interval up to [`ENDPOINT_SLACK`].
    pub fn eval(&self, s: T) -> Result<Complex<T>> {
        let slack = T::lit(ENDPOINT_SLACK);
        if !(s >= self.lo - slack && s <= self.hi + slack) {
            return Err(Error::OutsideInterval {
                s: s.to_f64_lossy(),
                lo: self.lo.to_f64_lossy(),
                hi: self.hi.to_f64_lossy(),
            });
        }
        Ok(self.eval_unchecked(s))
    }

    /// Evaluates at `s` without the interval check.
    pub fn eval_unchecked(&self, s: T) -> Complex<T> {
        let mut acc = Complex::default();
        for (&(p, q), &c) in &self.terms {
            let phase = T::lit(q as f64) * s;
            let e = Complex::new(phase.cos(), phase.sin());
            acc = acc + c * e.scale(s.powi(p as i32));
        }
        acc
    }

    /// The function `s ↦ self(s + h)` on `[lo − h, hi − h]`.
    pub fn translate(&self, h: T) -> Self {
        let mut out = Self::zero(self.lo - h, self.hi - h);
        for (&(p, q), &c) in &self.terms {
            let phase = T::lit(q as f64) * h;
            let rot = c * Complex::new(phase.cos(), phase.sin());
            for k in 0..=p {
                let binom = T::lit(binomial(p, k));
                let w = binom * h.powi((p - k) as i32);
                out.accumulate((k, q), rot.scale(w));
            }
        }
        out.prune();
        out
    }

    /// Same terms on a different interval.
    pub fn with_interval(&self, lo: T, hi: T) -> Self {
        let mut out = self.clone();
        out.lo = lo;
        out.hi = hi;
        out
    }

    /// Largest coefficient-wise difference with `other` (keys merged).
    pub fn max_coeff_diff(&self, other: &Self) -> T {
        let mut keys: Vec<TermKey> = self.terms.keys().copied().collect();
        keys.extend(other.terms.keys().copied());
        keys.into_iter()
            .map(|(p, q)| (self.coeff(p, q) - other.coeff(p, q)).norm())
            .fold(T::zero(), T::max)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

impl<T: Real> fmt::Debug for ExpPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExpPoly[{:?}, {:?}](", self.lo, self.hi)?;
        let mut first = true;
        for (&(p, q), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?}{:+?}i)·s^{}·e^{{{}is}}", c.re, c.im, p, q)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl<T: Real> Add for &ExpPoly<T> {
    type Output = ExpPoly<T>;
    /// Panics on interval mismatch; use [`ExpPoly::checked_add`] otherwise.
    fn add(self, rhs: Self) -> ExpPoly<T> {
        self.checked_add(rhs).expect("ExpPoly interval mismatch")
    }
}

impl<T: Real> Add for ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn add(self, rhs: Self) -> ExpPoly<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for &ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn sub(self, rhs: Self) -> ExpPoly<T> {
        self.checked_sub(rhs).expect("ExpPoly interval mismatch")
    }
}

impl<T: Real> Sub for ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn sub(self, rhs: Self) -> ExpPoly<T> {
        &self - &rhs
    }
}

impl<T: Real> Mul for &ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn mul(self, rhs: Self) -> ExpPoly<T> {
        self.checked_mul(rhs).expect("ExpPoly interval mismatch")
    }
}

impl<T: Real> Mul for ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn mul(self, rhs: Self) -> ExpPoly<T> {
        &self * &rhs
    }
}

impl<T: Real> Mul<Complex<T>> for &ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn mul(self, rhs: Complex<T>) -> ExpPoly<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Mul<Complex<T>> for ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn mul(self, rhs: Complex<T>) -> ExpPoly<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Neg for ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn neg(self) -> ExpPoly<T> {
        self.scale_real(-T::one())
    }
}

// JSON layout: {"interval": [lo, hi], "terms": [{"p", "q", "re", "im"}, ...]}

#[derive(Serialize, Deserialize)]
struct TermRepr<T> {
    p: u32,
    q: i32,
    re: T,
    im: T,
}

#[derive(Serialize, Deserialize)]
struct ExpPolyRepr<T> {
    interval: [T; 2],
    terms: Vec<TermRepr<T>>,
}

impl<T: Real + Serialize> Serialize for ExpPoly<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = ExpPolyRepr {
            interval: [self.lo, self.hi],
            terms: self
                .terms
                .iter()
                .map(|(&(p, q), c)| TermRepr {
                    p,
                    q,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de, T: Real + DeserializeOwned> Deserialize<'de> for ExpPoly<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ExpPolyRepr::<T>::deserialize(deserializer)?;
        let [lo, hi] = repr.interval;
        if !(lo <= hi) {
            return Err(serde::de::Error::custom("interval endpoints out of order"));
        }
        Ok(Self::from_terms(
            repr.terms
                .into_iter()
                .map(|t| (t.p, t.q, Complex::new(t.re, t.im))),
            lo,
            hi,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type C = Complex<f64>;
    const R: f64 = PI / 2.0;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn on_delay(terms: &[(u32, i32, C)]) -> ExpPoly<f64> {
        ExpPoly::from_terms(terms.iter().copied(), -R, 0.0)
    }

    #[test]
    fn add_merges_conjugate_exponentials() {
        let f = ExpPoly::exp(1, c(1.0, 0.0), -R, 0.0);
        let g = ExpPoly::exp(-1, c(1.0, 0.0), -R, 0.0);
        let h = &f + &g;
        assert_eq!(h.len(), 2);
        assert_eq!(h.coeff(0, 1), c(1.0, 0.0));
        assert_eq!(h.coeff(0, -1), c(1.0, 0.0));
    }

    #[test]
    fn additive_inverse_is_empty() {
        let f = on_delay(&[(0, 1, c(0.3, -2.0)), (2, -3, c(1.5, 0.25))]);
        let z = &f + &(-f.clone());
        assert!(z.is_zero());
    }

    #[test]
    fn sum_matches_pointwise() {
        let w = on_delay(&[(0, 2, c(0.2, -0.03)), (0, 1, c(-1.1, 0.4)), (0, -1, c(0.05, 0.3))]);
        let wc = w.conj();
        let s = -R / 2.0;
        let lhs = (&w + &wc).eval(s).unwrap();
        let rhs = w.eval(s).unwrap() + wc.eval(s).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn interval_mismatch_is_an_error() {
        let f = ExpPoly::exp(1, c(1.0, 0.0), -R, 0.0);
        let g = ExpPoly::exp(1, c(1.0, 0.0), 0.0, R);
        assert!(matches!(f.checked_add(&g), Err(Error::IntervalMismatch { .. })));
        assert!(matches!(f.checked_mul(&g), Err(Error::IntervalMismatch { .. })));
    }

    #[test]
    fn frequencies_add_under_product() {
        let e = ExpPoly::exp(1, c(1.0, 0.0), -R, 0.0);
        let sq = &e * &e;
        assert_eq!(sq.len(), 1);
        assert_eq!(sq.coeff(0, 2), c(1.0, 0.0));

        let rho = ExpPoly::monomial(1, 1, c(-2.0, 0.0), -R, 0.0);
        let em = ExpPoly::exp(-1, c(1.0, 0.0), -R, 0.0);
        let prod = &rho * &em;
        assert_eq!(prod.len(), 1);
        assert_eq!(prod.coeff(1, 0), c(-2.0, 0.0));
    }

    #[test]
    fn antiderivative_basic_cases() {
        let e = ExpPoly::exp(1, c(1.0, 0.0), -R, 0.0);
        let a = e.antiderivative();
        assert!((a.coeff(0, 1) - c(1.0, 0.0) / c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(a.len(), 1);

        let s = ExpPoly::monomial(1, 0, c(1.0, 0.0), -R, 0.0);
        let a = s.antiderivative();
        assert_eq!(a.coeff(2, 0), c(0.5, 0.0));
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn eval_examples() {
        let rho = ExpPoly::monomial(1, 1, c(-2.0, 0.0), -R, 0.0);
        let v = rho.eval(-PI / 2.0).unwrap();
        assert!((v - c(0.0, -PI)).norm() < 1e-14);
        let e = ExpPoly::exp(1, c(1.0, 0.0), -R, 0.0);
        assert!((e.eval(0.0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_outside_interval_errors() {
        let e = ExpPoly::exp(1, c(1.0, 0.0), -R, 0.0);
        assert!(e.eval(0.0 + 1e-13).is_ok());
        assert!(matches!(e.eval(0.1), Err(Error::OutsideInterval { .. })));
        assert!(matches!(e.eval(-R - 1e-6), Err(Error::OutsideInterval { .. })));
    }

    #[test]
    fn translate_matches_shifted_evaluation() {
        let f = ExpPoly::from_terms([(2, -1, c(0.7, 0.1)), (1, 3, c(-0.2, 0.9))], 0.0, R);
        let g = f.translate(R);
        assert!((g.interval().0 + R).abs() < 1e-15 && g.interval().1.abs() < 1e-15);
        for k in 0..=10 {
            let xi = -R + R * k as f64 / 10.0;
            let d = g.eval(xi).unwrap() - f.eval(xi + R).unwrap();
            assert!(d.norm() < 1e-13);
        }
    }

    #[test]
    fn json_layout_is_stable() {
        let f = ExpPoly::from_terms([(1, 1, c(-2.0, 0.5))], -1.0, 0.0);
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"interval": [-1.0, 0.0], "terms": [{"p": 1, "q": 1, "re": -2.0, "im": 0.5}]})
        );
        let back: ExpPoly<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn works_in_single_precision() {
        let e = ExpPoly::<f32>::exp(1, Complex::new(1.0, 0.0), -1.5, 0.0);
        let a = e.antiderivative().derivative();
        assert!(a.max_coeff_diff(&e) < 1e-6);
    }

    fn arb_poly(max_terms: usize) -> impl Strategy<Value = ExpPoly<f64>> {
        prop::collection::vec((0u32..4, -3i32..=3, -2.0f64..2.0, -2.0f64..2.0), 1..=max_terms)
            .prop_map(|ts| {
                ExpPoly::from_terms(ts.into_iter().map(|(p, q, re, im)| (p, q, C::new(re, im))), -R, 0.0)
            })
    }

    proptest! {
        #[test]
        fn derivative_inverts_antiderivative(f in arb_poly(8)) {
            let back = f.antiderivative().derivative();
            prop_assert!(back.max_coeff_diff(&f) < 1e-12);
        }

        #[test]
        fn product_evaluates_pointwise(f in arb_poly(5), g in arb_poly(5), u in prop::collection::vec(0.0f64..1.0, 20)) {
            let fg = &f * &g;
            for t in u {
                let s = -R * t;
                let lhs = fg.eval(s).unwrap();
                let rhs = f.eval(s).unwrap() * g.eval(s).unwrap();
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            }
        }

        #[test]
        fn conjugation_closure(f in arb_poly(6), t in 0.0f64..1.0) {
            let s = -R * t;
            let lhs = f.conj().eval(s).unwrap();
            let rhs = f.eval(s).unwrap().conj();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
