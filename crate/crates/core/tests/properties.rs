use std::f64::consts::FRAC_PI_2 as R;

use bautin_core::lyapunov::{bautin_candidates, l1_from_cascade, l2_at};
use bautin_core::manifold::identities::{cancellations, i_integrals};
use bautin_core::manifold::{coeff_table, eigen_data, psi1_at_0_closed};
use bautin_core::spectrum::{
    char_fn, count_roots_right_of, default_im_bound, leading_pair, mu_derivative, ModelParams,
};
use num_complex::Complex64 as C;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn order_two_identities_hold(c in -3.0f64..3.0) {
        let t = coeff_table(c).unwrap();
        for chk in i_integrals(&t, R).unwrap() {
            prop_assert!(chk.gap() <= 1e-10, "c={} gap={}", c, chk.gap());
        }
        for z in cancellations(&t, R).unwrap() {
            prop_assert!(z.norm() <= 1e-10);
        }
    }

    #[test]
    fn table_is_conjugation_symmetric(c in -3.0f64..3.0) {
        let t = coeff_table(c).unwrap();
        let psi0 = psi1_at_0_closed::<f64>();
        for ((j, k), f) in t.f_entries() {
            prop_assert!((t.f(k, j).unwrap() - f.conj()).norm() <= 1e-10);
            prop_assert!((t.g(j, k).unwrap() - psi0 * f).norm() <= 1e-12 * (1.0 + f.norm()));
        }
        for ((j, k), w) in t.w_entries() {
            let wc = t.w(k, j).unwrap();
            for s in [0.0, -0.4, -1.1, -R] {
                prop_assert!((wc.func.eval(s).unwrap() - w.func.eval(s).unwrap().conj()).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn cascade_residuals_small(c in -3.0f64..3.0) {
        let (ode, bc) = coeff_table(c).unwrap().max_residuals(-1.0, 20);
        prop_assert!(ode <= 1e-10 && bc <= 1e-9, "ode={} bc={}", ode, bc);
    }

    #[test]
    fn leading_pair_is_a_root_with_its_conjugate(a in -1.5f64..-0.5) {
        let p = ModelParams::with_default_delay(a, 0.0);
        let lp = leading_pair(&p).unwrap();
        let lam = C::new(lp.mu, lp.omega);
        prop_assert!(lp.omega > 0.0);
        prop_assert!(char_fn(lam, &p).norm() <= 1e-10);
        prop_assert!(char_fn(lam.conj(), &p).norm() <= 1e-10);
    }

    #[test]
    fn mu_derivative_matches_finite_difference(a in -1.4f64..-0.6) {
        let mu = |x: f64| leading_pair(&ModelParams::with_default_delay(x, 0.0)).unwrap().mu;
        let h = 1e-5;
        let fd = (mu(a + h) - mu(a - h)) / (2.0 * h);
        let d = mu_derivative(a, R).unwrap();
        prop_assert!((d - fd).abs() <= 1e-5 * d.abs());
    }
}

#[test]
fn eigen_normalisation_is_identity() {
    let e = eigen_data::<f64>().unwrap();
    let bil = |psi, phi| bautin_core::manifold::bilinear(psi, phi, -1.0).unwrap();
    let one = C::new(1.0, 0.0);
    assert!((bil(&e.psi1, &e.phi1) - one).norm() < 1e-12);
    assert!((bil(&e.psi2, &e.phi2) - one).norm() < 1e-12);
    assert!(bil(&e.psi1, &e.phi2).norm() < 1e-12);
    assert!(bil(&e.psi2, &e.phi1).norm() < 1e-12);
}

#[test]
fn two_roots_right_of_gap_on_grid() {
    for k in 0..=20 {
        let a = -1.1 + 0.01 * k as f64;
        let p = ModelParams::with_default_delay(a, 0.0);
        let n = count_roots_right_of(-0.125, &p, default_im_bound(-0.125, &p)).unwrap();
        assert_eq!(n, 2, "a={a}");
    }
}

#[test]
fn l1_changes_sign_only_at_candidates() {
    let (c1, c2) = bautin_candidates::<f64>();
    let l1 = |c| l1_from_cascade(c).unwrap();
    let grid: Vec<f64> = (0..=1000).map(|k| -5.0 + 0.01 * k as f64).collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        if l1(lo).signum() == l1(hi).signum() {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if l1(mid).signum() == l1(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    assert_eq!(roots.len(), 2, "{roots:?}");
    assert!((roots[0] - c2).abs() < 1e-9 && (roots[1] - c1).abs() < 1e-9);
}

#[test]
fn l2_is_deterministic() {
    let (c1, c2) = bautin_candidates::<f64>();
    for c in [c1, c2] {
        let (x, y) = (l2_at(c).unwrap(), l2_at(c).unwrap());
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
