mod common;

use common::{any_wpoly, random_point, random_real, real_wpoly};
use num::complex::Complex64;
use proptest::prelude::*;
use pshdef_core::{CPoint, Var, WPoly};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `½(∂_x − i∂_y)` or `½(∂_u − i∂_v)` by central differences.
fn fd_holomorphic_deriv(p: &WPoly, pt: &CPoint, v: Var, h: f64) -> Complex64 {
    let shift = |d: Complex64| {
        let mut q = pt.clone();
        match v {
            Var::Z(j) => q.z[j] += d,
            _ => q.w += d,
        }
        p.eval(&q)
    };
    let dx = (shift(Complex64::new(h, 0.0)) - shift(Complex64::new(-h, 0.0))) / (2.0 * h);
    let dy = (shift(Complex64::new(0.0, h)) - shift(Complex64::new(0.0, -h))) / (2.0 * h);
    (dx - Complex64::i() * dy) * 0.5
}

#[test]
fn wirtinger_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..20 {
        let nz = 1 + (seed % 2) as usize;
        let p = random_real(seed, nz, 0, 4, 6);
        for _ in 0..10 {
            let pt = random_point(&mut rng, nz, 0.5);
            let mut vars: Vec<Var> = (0..nz).map(Var::Z).collect();
            vars.push(Var::W);
            for v in vars {
                let exact = p.deriv(v).eval(&pt);
                let fd = fd_holomorphic_deriv(&p, &pt, v, 1e-5);
                assert!((exact - fd).norm() <= 1e-6 * (1.0 + exact.norm()), "{p} at {pt:?}: {exact} vs {fd}");
                // The conjugate derivative of a real polynomial is the conjugate of the holomorphic one.
                let bar = p.deriv(v.conj()).eval(&pt);
                assert!((bar - exact.conj()).norm() <= 1e-9 * (1.0 + exact.norm()));
            }
        }
    }
}

proptest! {
    #[test]
    fn antiderivative_inverts_z_derivative(p in any_wpoly(2)) {
        for j in 0..2 {
            prop_assert_eq!(p.antiderivative_z(j).deriv(Var::Z(j)), p.clone());
        }
    }

    #[test]
    fn realify_is_real(p in any_wpoly(1)) {
        prop_assert!(p.realify().is_real());
        prop_assert!(p.real_part().is_real());
    }

    #[test]
    fn products_of_real_polynomials_are_real(p in real_wpoly(1), q in real_wpoly(1)) {
        prop_assert!(p.is_real() && q.is_real());
        prop_assert!((&p * &q).is_real());
    }

    #[test]
    fn conjugation_is_an_involutive_homomorphism(p in any_wpoly(1), q in any_wpoly(1)) {
        prop_assert_eq!(p.conjugate().conjugate(), p.clone());
        prop_assert_eq!((&p + &q).conjugate(), &p.conjugate() + &q.conjugate());
        prop_assert_eq!((&p * &q).conjugate(), &p.conjugate() * &q.conjugate());
    }

    #[test]
    fn canonical_text_is_deterministic(p in any_wpoly(1)) {
        let mut terms: Vec<_> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        terms.reverse();
        let q = WPoly::from_terms(1, terms);
        prop_assert_eq!(p.to_string(), q.to_string());
    }
}
