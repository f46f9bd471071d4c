//! Center-manifold reduction at the Hopf point `a = −1`, `r = π/2`.
//!
//! Forward eigenfunctions live on `[−r, 0]`, adjoint ones on `[0, r]`. The
//! pairing between them is the bilinear form of the linear delay equation,
//! which for the single point mass of weight `a` at `θ = −r` collapses to
//!
//! ```text
//! ⟨ψ, φ⟩ = ψ(0)·φ(0) + a·∫_{−r}^{0} ψ(ξ + r)·φ(ξ) dξ
//! ```
//!
//! with no conjugation of `ψ`.

mod cascade;
pub mod identities;
pub mod superseded;

pub use cascade::{
    coeff_table, CascadeOrder, CenterManifold, CoeffTable, Index, W21Diagnostics, W31Boundary,
    WCoeff,
};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::exp_poly::{ExpPoly, ENDPOINT_SLACK};
use crate::scalar::Real;

/// Delayed-feedback gain at the bifurcation point.
pub fn hopf_gain<T: Real>() -> T {
    -T::one()
}

/// Delay used throughout the reduction.
pub fn hopf_delay<T: Real>() -> T {
    T::FRAC_PI_2()
}

pub(crate) fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub(crate) fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `⟨ψ, φ⟩` for `ψ` on `[0, r]` and `φ` on `[−r, 0]`.
pub fn bilinear<T: Real>(psi: &ExpPoly<T>, phi: &ExpPoly<T>, a: T) -> Result<Complex<T>> {
    let (plo, phi_hi) = phi.interval();
    let r = -plo;
    let (slo, shi) = psi.interval();
    let slack = T::lit(ENDPOINT_SLACK);
    if phi_hi.abs() > slack || slo.abs() > slack || (shi - r).abs() > slack {
        return Err(Error::IntervalMismatch {
            lo_a: slo.to_f64_lossy(),
            hi_a: shi.to_f64_lossy(),
            lo_b: plo.to_f64_lossy(),
            hi_b: phi_hi.to_f64_lossy(),
        });
    }
    let shifted = psi.translate(r).with_interval(-r, T::zero());
    let integral = shifted.checked_mul(phi)?.integrate(-r, T::zero())?;
    Ok(psi.eval(T::zero())? * phi.eval(T::zero())? + integral.scale(a))
}

/// Eigenfunctions of the linearisation at the Hopf point and their normalised adjoints.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenData<T: Real> {
    /// `e^{is}` on `[−r, 0]`.
    pub phi1: ExpPoly<T>,
    /// `e^{−is}` on `[−r, 0]`.
    pub phi2: ExpPoly<T>,
    /// Adjoint eigenfunction with `⟨ψ1, φj⟩ = δ1j`: `ψ1(0)·e^{−iζ}` on `[0, r]`.
    pub psi1: ExpPoly<T>,
    pub psi2: ExpPoly<T>,
    pub psi1_at_0: Complex<T>,
    /// Pairing matrix `E_ij = ⟨adjoint_i, φj⟩` of the un-normalised adjoint basis.
    pub e_matrix: [[Complex<T>; 2]; 2],
}

impl<T: Real> EigenData<T> {
    /// The normalised adjoint eigenfunction `Ψ1`; identical to `psi1`.
    pub fn big_psi1(&self) -> &ExpPoly<T> {
        &self.psi1
    }

    pub fn big_psi2(&self) -> &ExpPoly<T> {
        &self.psi2
    }
}

/// Un-normalised adjoint eigenfunctions `e^{−iζ}`, `e^{iζ}` on `[0, r]`.
pub fn adjoint_basis<T: Real>() -> (ExpPoly<T>, ExpPoly<T>) {
    let r = hopf_delay::<T>();
    (
        ExpPoly::exp(-1, cx(1.0, 0.0), T::zero(), r),
        ExpPoly::exp(1, cx(1.0, 0.0), T::zero(), r),
    )
}

/// Builds the eigen data by inverting the pairing matrix.
pub fn eigen_data<T: Real>() -> Result<EigenData<T>> {
    let r = hopf_delay::<T>();
    let a = hopf_gain::<T>();
    let phi1 = ExpPoly::exp(1, cx(1.0, 0.0), -r, T::zero());
    let phi2 = phi1.conj();
    let (adj1, adj2) = adjoint_basis::<T>();
    let e = [
        [bilinear(&adj1, &phi1, a)?, bilinear(&adj1, &phi2, a)?],
        [bilinear(&adj2, &phi1, a)?, bilinear(&adj2, &phi2, a)?],
    ];
    let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
    if det.norm() <= T::tol(1e-14) {
        return Err(Error::Singular {
            what: "pairing matrix E",
            magnitude: det.norm().to_f64_lossy(),
        });
    }
    // (ψ1, ψ2)ᵀ = E⁻ᵀ-weighted combination making ⟨ψi, φj⟩ = δij.
    // With ⟨Σ_k m_ik adj_k, φj⟩ = (M E)_ij we need M = E⁻¹.
    let inv = [[e[1][1] / det, -e[0][1] / det], [-e[1][0] / det, e[0][0] / det]];
    let psi1 = &adj1.scale(inv[0][0]) + &adj2.scale(inv[0][1]);
    let psi2 = &adj1.scale(inv[1][0]) + &adj2.scale(inv[1][1]);
    let psi1_at_0 = psi1.eval(T::zero())?;
    Ok(EigenData {
        phi1,
        phi2,
        psi1,
        psi2,
        psi1_at_0,
        e_matrix: e,
    })
}

/// `ψ1(0) = 2(2 − πi)/(4 + π²)` in closed form.
pub fn psi1_at_0_closed<T: Real>() -> Complex<T> {
    let pi = T::PI();
    let den = T::lit(4.0) + pi * pi;
    Complex::new(T::lit(4.0) / den, -(pi + pi) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    #[test]
    fn e_matrix_reproduced() {
        let (adj1, adj2) = adjoint_basis::<f64>();
        let ed = eigen_data::<f64>().unwrap();
        let a = -1.0;
        let e11 = bilinear(&adj1, &ed.phi1, a).unwrap();
        assert!((e11 - C::new(1.0, PI / 2.0)).norm() < 1e-14);
        assert!(bilinear(&adj1, &ed.phi2, a).unwrap().norm() < 1e-14);
        assert!(bilinear(&adj2, &ed.phi1, a).unwrap().norm() < 1e-14);
        assert!((bilinear(&adj2, &ed.phi2, a).unwrap() - C::new(1.0, -PI / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn adjoint_normalisation() {
        let ed = eigen_data::<f64>().unwrap();
        let a = -1.0;
        let pairs = [(&ed.psi1, &ed.phi1, 1.0), (&ed.psi1, &ed.phi2, 0.0), (&ed.psi2, &ed.phi1, 0.0), (&ed.psi2, &ed.phi2, 1.0)];
        for (psi, phi, want) in pairs {
            assert!((bilinear(psi, phi, a).unwrap() - C::new(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn psi1_closed_forms() {
        let ed = eigen_data::<f64>().unwrap();
        let closed = psi1_at_0_closed::<f64>();
        assert!((ed.psi1_at_0 - closed).norm() < 1e-14);
        assert!((closed - C::new(2.0, 0.0) / C::new(2.0, PI)).norm() < 1e-15);
        assert!((closed - C::new(0.288400, -0.453018)).norm() < 1e-6);
        // Ψ1(ζ) = ψ1(0)·e^{−iζ}
        assert_eq!(ed.psi1.len(), 1);
        assert!((ed.psi1.coeff(0, -1) - closed).norm() < 1e-14);
        assert!((ed.phi1.eval(-PI / 2.0).unwrap() - C::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn bilinear_rejects_swapped_domains() {
        let ed = eigen_data::<f64>().unwrap();
        assert!(bilinear(&ed.phi1, &ed.psi1, -1.0).is_err());
    }
}
