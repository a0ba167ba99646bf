#![allow(dead_code)]

use num::complex::Complex64;
use proptest::prelude::*;
use pshdef_core::{CPoint, DefiningFunction, GaussianRational, Var, WPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn df(p: WPoly) -> DefiningFunction {
    DefiningFunction::new(p).unwrap()
}

/// Monomial with the given exponents of `z_j, z̄_j` (interleaved), `w`, `w̄`.
pub fn mono(nz: usize, exps: &[u32], c: GaussianRational) -> WPoly {
    let mut p = WPoly::constant(nz, c);
    for j in 0..nz {
        p = &p * &WPoly::var(nz, Var::Z(j)).pow(exps[2 * j]);
        p = &p * &WPoly::var(nz, Var::Zbar(j)).pow(exps[2 * j + 1]);
    }
    p = &p * &WPoly::var(nz, Var::W).pow(exps[2 * nz]);
    &p * &WPoly::var(nz, Var::Wbar).pow(exps[2 * nz + 1])
}

fn rand_poly(rng: &mut ChaCha8Rng, nz: usize, min_deg: u32, max_deg: u32, terms: usize) -> WPoly {
    let mut out = WPoly::zero(nz);
    let nv = 2 * nz + 2;
    let mut added = 0;
    while added < terms {
        let exps: Vec<u32> = (0..nv).map(|_| rng.random_range(0..=max_deg)).collect();
        let d: u32 = exps.iter().sum();
        if d < min_deg || d > max_deg {
            continue;
        }
        let c = GaussianRational::from_parts(rng.random_range(-6..=6), rng.random_range(1..=4), rng.random_range(-6..=6), rng.random_range(1..=4));
        out = &out + &mono(nz, &exps, c);
        added += 1;
    }
    out
}

/// Random real polynomial with terms of degree in `[min_deg, max_deg]`.
pub fn random_real(seed: u64, nz: usize, min_deg: u32, max_deg: u32, terms: usize) -> WPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand_poly(&mut rng, nz, min_deg, max_deg, terms).real_part()
}

/// `Im w + F` with `F` real of degree in `[2, max_deg]`.
pub fn random_defining(seed: u64, nz: usize, max_deg: u32) -> DefiningFunction {
    df(&WPoly::im_w(nz) + &random_real(seed, nz, 2, max_deg, 5))
}

pub fn random_point(rng: &mut ChaCha8Rng, nz: usize, radius: f64) -> CPoint {
    let mut c = || Complex64::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius));
    CPoint { z: (0..nz).map(|_| c()).collect(), w: c() }
}

/// Strategy for arbitrary (not necessarily real) polynomials in one `z`.
pub fn any_wpoly(nz: usize) -> impl Strategy<Value = WPoly> {
    let nv = 2 * nz + 2;
    prop::collection::vec((prop::collection::vec(0u32..=3, nv), -5i64..=5, 1i64..=3, -5i64..=5, 1i64..=3), 0..6).prop_map(move |terms| {
        terms.into_iter().fold(WPoly::zero(nz), |acc, (e, a, b, c, d)| &acc + &mono(nz, &e, GaussianRational::from_parts(a, b, c, d)))
    })
}

pub fn real_wpoly(nz: usize) -> impl Strategy<Value = WPoly> {
    any_wpoly(nz).prop_map(|p| p.real_part())
}
