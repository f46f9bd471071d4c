//! Independent reference for the center-manifold cascade.
//!
//! Substitutes `x(θ) = Σ W_jk(θ) z^j z̄^k` (with `W10 = e^{iθ}`, `W01 = e^{−iθ}`)
//! into the equation and matches powers of `z`, `z̄` generically, so no
//! order-specific forcing or boundary formula is typed in by hand. Uses its
//! own tiny exponential-polynomial arithmetic. The resonant order (2,1) is
//! fixed by requiring `⟨Ψ1, W21⟩ = 0` instead of a closed formula.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2 as R;

use num_complex::Complex64 as C;

pub const A: f64 = -1.0;

/// `Σ c·s^p·e^{iqs}`.
#[derive(Clone, Debug, Default)]
pub struct Ep(pub HashMap<(u32, i32), C>);

impl Ep {
    pub fn exp(q: i32, c: C) -> Self {
        Ep(HashMap::from([((0, q), c)]))
    }
    pub fn add(&self, o: &Ep) -> Ep {
        let mut m = self.0.clone();
        for (k, v) in &o.0 {
            *m.entry(*k).or_default() += v;
        }
        Ep(m)
    }
    pub fn scale(&self, c: C) -> Ep {
        Ep(self.0.iter().map(|(k, v)| (*k, v * c)).collect())
    }
    pub fn mul(&self, o: &Ep) -> Ep {
        let mut m: HashMap<(u32, i32), C> = HashMap::new();
        for ((p1, q1), c1) in &self.0 {
            for ((p2, q2), c2) in &o.0 {
                *m.entry((p1 + p2, q1 + q2)).or_default() += c1 * c2;
            }
        }
        Ep(m)
    }
    pub fn eval(&self, s: f64) -> C {
        self.0
            .iter()
            .map(|((p, q), c)| c * s.powi(*p as i32) * C::new(0.0, *q as f64 * s).exp())
            .sum()
    }
    pub fn anti(&self) -> Ep {
        let mut m: HashMap<(u32, i32), C> = HashMap::new();
        for ((p, q), c) in &self.0 {
            if *q == 0 {
                *m.entry((p + 1, 0)).or_default() += c / (*p as f64 + 1.0);
                continue;
            }
            let iq = C::new(0.0, *q as f64);
            let (mut coef, mut pp) = (*c, *p);
            loop {
                *m.entry((pp, *q)).or_default() += coef / iq;
                if pp == 0 {
                    break;
                }
                coef = -coef * pp as f64 / iq;
                pp -= 1;
            }
        }
        Ep(m)
    }
    pub fn integrate(&self, lo: f64, hi: f64) -> C {
        let a = self.anti();
        a.eval(hi) - a.eval(lo)
    }
    pub fn deriv(&self) -> Ep {
        let mut m: HashMap<(u32, i32), C> = HashMap::new();
        for ((p, q), c) in &self.0 {
            *m.entry((*p, *q)).or_default() += c * C::new(0.0, *q as f64);
            if *p > 0 {
                *m.entry((p - 1, *q)).or_default() += c * *p as f64;
            }
        }
        Ep(m)
    }
    /// `s ↦ self(s + h)`.
    pub fn shift(&self, h: f64) -> Ep {
        let mut m: HashMap<(u32, i32), C> = HashMap::new();
        for ((p, q), c) in &self.0 {
            let rot = c * C::new(0.0, *q as f64 * h).exp();
            for k in 0..=*p {
                let binom = (1..=k).fold(1.0, |b, i| b * (*p - k + i) as f64 / i as f64);
                *m.entry((k, *q)).or_default() += rot * binom * h.powi((*p - k) as i32);
            }
        }
        Ep(m)
    }
}

/// `χ(0)φ(0) + a∫_{−r}^0 χ(ξ+r)φ(ξ)dξ` for `χ` on `[0, r]`, `φ` on `[−r, 0]`.
pub fn pairing(chi: &Ep, phi: &Ep) -> C {
    chi.eval(0.0) * phi.eval(0.0) + A * chi.shift(R).mul(phi).integrate(-R, 0.0)
}

fn fact(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub struct Series {
    pub c: f64,
    pub psi0: C,
    /// `W_jk` with `x = Σ W_jk z^j z̄^k` (no factorials).
    pub w: HashMap<(u32, u32), Ep>,
    /// `F_jk` and `g_jk` in the factorial-weighted convention.
    pub f: HashMap<(u32, u32), C>,
    pub g: HashMap<(u32, u32), C>,
}

impl Series {
    /// The factorial-weighted `w_jk = j!k!·W_jk` evaluated at `s`.
    pub fn w_at(&self, j: u32, k: u32, s: f64) -> C {
        self.w[&(j, k)].eval(s) * fact(j) * fact(k)
    }
    pub fn g(&self, j: u32, k: u32) -> C {
        self.g[&(j, k)]
    }
}

pub fn series(c: f64) -> Series {
    // normalised adjoint from the pairing matrix, not from a closed form
    let adj = Ep::exp(-1, C::new(1.0, 0.0));
    let e11 = pairing(&adj, &Ep::exp(1, C::new(1.0, 0.0)));
    let psi0 = 1.0 / e11;
    let psi1 = adj.scale(psi0);

    let mut w: HashMap<(u32, u32), Ep> = HashMap::new();
    w.insert((1, 0), Ep::exp(1, C::new(1.0, 0.0)));
    w.insert((0, 1), Ep::exp(-1, C::new(1.0, 0.0)));
    let mut f = HashMap::new();
    let mut g = HashMap::new();

    for n in 2..=5u32 {
        for jj in 0..=n {
            let kk = n - jj;
            let mut s = C::new(0.0, 0.0);
            for j1 in 0..=jj {
                for k1 in 0..=kk {
                    let (j2, k2) = (jj - j1, kk - k1);
                    if let (Some(u), Some(v)) = (w.get(&(j1, k1)), w.get(&(j2, k2))) {
                        let u0 = u.eval(0.0);
                        s += u0 * v.eval(0.0) + c * u0 * v.eval(-R);
                    }
                }
            }
            let fjk = s * fact(jj) * fact(kk);
            f.insert((jj, kk), fjk);
            g.insert((jj, kk), psi0 * fjk);
        }
        if n == 5 {
            break;
        }
        let mut resonant_partner = None;
        for jj in (0..=n).rev() {
            let kk = n - jj;
            let m = jj as i32 - kk as i32;
            let norm = fact(jj) * fact(kk);
            let mut forcing = Ep::exp(1, g[&(jj, kk)] / norm).add(&Ep::exp(-1, g[&(kk, jj)].conj() / norm));
            // W' = imW + forcing; lower orders enter through the nonlinear part of ż, z̄̇
            let lower: Vec<_> = w.iter().filter(|((j, k), _)| j + k >= 2 && j + k < n).map(|(k, v)| (*k, v.clone())).collect();
            for ((j, k), wf) in lower {
                if j >= 1 && jj + 1 >= j && kk >= k {
                    let (aa, bb) = (jj + 1 - j, kk - k);
                    if aa + bb >= 2 {
                        forcing = forcing.add(&wf.scale((j as f64) * g[&(aa, bb)] / (fact(aa) * fact(bb))));
                    }
                }
                if k >= 1 && jj >= j && kk + 1 >= k {
                    let (aa, bb) = (jj - j, kk + 1 - k);
                    if aa + bb >= 2 {
                        forcing = forcing.add(&wf.scale((k as f64) * g[&(bb, aa)].conj() / (fact(aa) * fact(bb))));
                    }
                }
            }
            let anti = Ep::exp(-m, C::new(1.0, 0.0)).mul(&forcing).anti();
            let a0 = anti.eval(0.0);
            let part = Ep::exp(m, C::new(1.0, 0.0)).mul(&anti.add(&Ep::exp(0, -a0)));
            let lam = C::new(0.0, m as f64);
            let h = lam - A * (-lam * R).exp();
            let fjk = f[&(jj, kk)] / norm;
            let w0 = if h.norm() > 1e-9 {
                (A * part.eval(-R) + fjk - forcing.eval(0.0)) / h
            } else if let Some(conj_w0) = resonant_partner {
                conj_w0
            } else {
                // no component along φ1: ⟨Ψ1, w0·e^{is} + P⟩ = 0
                -pairing(&psi1, &part)
            };
            if m == 1 {
                let w0c: C = w0;
                resonant_partner = Some(w0c.conj());
            }
            w.insert((jj, kk), Ep::exp(m, w0).add(&part));
        }
    }
    Series { c, psi0, w, f, g }
}

/// `½·Re(i·g20·g11 + g21)`.
pub fn l1(s: &Series) -> f64 {
    0.5 * (C::i() * s.g(2, 0) * s.g(1, 1) + s.g(2, 1)).re
}

/// The `12·l2` expression, written independently of the crate.
pub fn l2(s: &Series) -> f64 {
    let g = |j, k| s.g(j, k);
    let cj = |z: C| z.conj();
    let (g20, g11, g02, g30, g21, g12, g03) = (g(2, 0), g(1, 1), g(0, 2), g(3, 0), g(2, 1), g(1, 2), g(0, 3));
    let (g40, g31, g22, g13, g32) = (g(4, 0), g(3, 1), g(2, 2), g(1, 3), g(3, 2));
    let t1 = g32.re;
    let t2 = (g20 * cj(g31) - g11 * (4.0 * g31 + 3.0 * cj(g22)) - g02 * (g40 + cj(g13)) / 3.0 - g30 * g12).im;
    let t3 = (g20 * (cj(g11) * (3.0 * g12 - cj(g30)) + g02 * (cj(g12) - g30 / 3.0) + cj(g02) * g03 / 3.0)
        + g11 * (cj(g02) * (5.0 / 3.0 * cj(g30) + 3.0 * g12) + g02 * cj(g03) / 3.0 - 4.0 * g11 * g30))
        .re
        + 3.0 * (g20 * g11).im * g21.im;
    let t4 = (g11 * cj(g02) * (cj(g20) * cj(g20) - 3.0 * cj(g20) * g11 - 4.0 * g11 * g11)).im
        + (g20 * g11).im * (3.0 * (g20 * g11).re - 2.0 * g02.norm_sqr());
    (t1 + t2 + t3 + t4) / 12.0
}
