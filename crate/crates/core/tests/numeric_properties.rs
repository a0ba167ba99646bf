mod common;

use common::{df, random_defining, random_real};
use num::BigRational;
use proptest::prelude::*;
use pshdef_core::boundary::{sample_boundary, sample_level_set, Projector};
use pshdef_core::dominance::{escapes, split_s_e, BoundKind, ProbeFamily, Prober, Status};
use pshdef_core::geometry::hessian_entry;
use pshdef_core::method::{run_construction, solve_stage, ConstructionConfig, ConstructionStatus};
use pshdef_core::verify::{multiplier_identity_check, multiplier, necessary_conditions_check, psd_check};
use pshdef_core::{fixtures, DefiningFunction, GaussianRational, Var, WPoly};

fn all_fixtures() -> Vec<(&'static str, DefiningFunction)> {
    vec![
        ("r8", df(fixtures::r_a(8))),
        ("r10", df(fixtures::r_a(10))),
        ("sphere", df(fixtures::sphere_model(1))),
        ("sphere3", df(fixtures::sphere_model(2))),
        ("mixed_c3", df(fixtures::mixed_c3(10))),
    ]
}

#[test]
fn dominance_is_monotone_under_bound_widening() {
    for (name, r) in all_fixtures() {
        let fam = ProbeFamily::standard(r.nz(), 5);
        let levi = Prober::new(&r, BoundKind::LeviOnly, None, &fam).unwrap();
        let wide = Prober::new(&r, BoundKind::LeviPlusGradSq, None, &fam).unwrap();
        let mut quantities: Vec<WPoly> = (0..r.nz()).map(|j| r.r_z(j)).collect();
        quantities.extend((0..r.nz()).map(|j| hessian_entry(r.poly(), j, r.nz())));
        quantities.push(WPoly::var(r.nz(), Var::W));
        for q in quantities {
            if levi.check(&q).status == Status::Dominated {
                assert_eq!(wide.check(&q).status, Status::Dominated, "{name}: {q}");
            }
        }
    }
}

#[test]
fn escape_witness_replays() {
    let r = df(fixtures::r_a(8));
    let fam = ProbeFamily::standard(1, 3);
    let p = Prober::new(&r, BoundKind::LeviOnly, None, &fam).unwrap();
    let comps = [r.r_z(0)];
    let v = p.check_components(&comps);
    assert_eq!(v.status, Status::NotDominated);
    let w = v.witness.unwrap();
    let a = p.replay_witness(&comps, &w);
    let b = p.replay_witness(&comps, &w);
    assert_eq!(a, b);
    assert!(escapes(&a));
    let fresh = Prober::new(&r, BoundKind::LeviOnly, None, &ProbeFamily::standard(1, 77)).unwrap();
    assert!(escapes(&fresh.replay_witness(&comps, &w)));
    let proj = Projector::new(&r);
    let pt = w.point(&proj, 1e-3).unwrap();
    assert!(r.poly().eval(&pt).norm() <= 1e-12);
}

#[test]
fn split_is_exact_on_random_inputs() {
    let r = df(fixtures::r_a(10));
    let p = Prober::new(&r, BoundKind::LeviPlusGradSq, None, &ProbeFamily::standard(1, 1)).unwrap();
    for seed in 0..5 {
        let g = random_real(seed, 1, 0, 3, 4);
        let split = split_s_e(&g, &p);
        assert_eq!(&split.s + &split.e, g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn stage_solution_is_exact(s in common::any_wpoly(2), j in 0usize..2) {
        let (t, residual) = solve_stage(&s, j);
        let two_i = GaussianRational::imag(BigRational::from_integer(2.into()));
        let lhs = &(&t.deriv(Var::Z(j)) - &s.scale(&two_i)) - &residual;
        prop_assert!(lhs.is_zero());
        prop_assert!(t.is_real());
    }
}

/// After each zero-residual stage the significant part is cancelled in `(ρ)_{z w̄}` up to higher order.
#[test]
fn stage_cancels_significant_part() {
    for a in [8, 10] {
        let r = df(fixtures::r_a(a));
        let rep = run_construction(&r, &ConstructionConfig::default()).unwrap();
        assert_eq!(rep.status, ConstructionStatus::Certified);
        let inner = sample_boundary(&r, rep.config.radius / 16.0, 256, 3).unwrap();
        let mut t_before = WPoly::zero(1);
        for stage in &rep.stages {
            let s = &stage.splits[0].split.s;
            if !s.is_zero() && stage.residual.is_zero() {
                let rho = &(&(&WPoly::one(1) + &t_before) + &stage.t_increment) * r.poly();
                let g = hessian_entry(&rho, 0, 1).compile();
                let sc = s.compile();
                let g_sup = inner.points.iter().map(|p| g.eval(p).norm()).fold(0.0, f64::max);
                let s_sup = inner.points.iter().map(|p| sc.eval(p).norm()).fold(0.0, f64::max);
                assert!(g_sup <= 0.5 * s_sup, "A = {a}, stage {}: {g_sup} vs {s_sup}", stage.index);
            }
            t_before = stage.t_after.clone();
        }
    }
}

#[test]
fn psd_implies_necessary_conditions() {
    for r in [df(fixtures::r_a(10)), df(fixtures::r_a(8)), df(fixtures::sphere_model(1)), df(fixtures::sphere_model(2))] {
        let rep = run_construction(&r, &ConstructionConfig::default()).unwrap();
        assert_eq!(rep.status, ConstructionStatus::Certified);
        let v = rep.verification.as_ref().unwrap();
        let h = rep.final_candidate.h(&r).unwrap();
        let shell = sample_boundary(&r, v.shell.radius, 500, 21).unwrap();
        assert!(psd_check(&(&h * r.poly()), &shell, rep.config.tol).passed);
        let nec = necessary_conditions_check(&r, &h, &shell, &ProbeFamily::standard(r.nz(), 2), 4.0 * rep.config.tol).unwrap();
        assert!(nec.all_hold, "{:#?}", nec.inequalities);
    }
}

#[test]
fn identity_holds_on_random_defining_functions() {
    for seed in 0..10u64 {
        let r = random_defining(100 + seed, 1, 6);
        let t = random_real(200 + seed, 1, 1, 3, 3);
        let k = BigRational::from_integer((1 + seed % 8).into());
        let shell = sample_boundary(&r, 1e-2, 200, seed).unwrap();
        let id = multiplier_identity_check(&r, &k, &t, &shell);
        assert!(id.passed, "seed {seed}: {id:?}");
    }
}

/// Off the boundary the identity fails by a term proportional to `r`.
#[test]
fn identity_deviation_scales_with_level() {
    let r = df(fixtures::r_a(10));
    let proj = Projector::new(&r);
    let k = BigRational::from_integer(4.into());
    let t = WPoly::im_z(1, 0).scale_int(-4);
    let dev = |level: f64| {
        let shell = sample_level_set(&proj, 1e-2, 200, 8, level).unwrap();
        multiplier_identity_check(&r, &k, &t, &shell).max_deviation
    };
    let (d1, d2) = (dev(-1e-6), dev(-5e-7));
    let ratio = d1 / d2;
    assert!(d2 > 1e-10, "deviation {d2} is at rounding level");
    assert!((1.0..=4.0).contains(&ratio), "{d1} / {d2} = {ratio}");
}

#[test]
fn multiplier_reports_are_deterministic() {
    let r = df(fixtures::r_a(8));
    let h = multiplier(&r, &BigRational::from_integer(16.into()), &WPoly::im_z(1, 0).scale_int(-4));
    let a = psd_check(&(&h * r.poly()), &sample_boundary(&r, 1e-2, 300, 4).unwrap(), 1e-9);
    let b = psd_check(&(&h * r.poly()), &sample_boundary(&r, 1e-2, 300, 4).unwrap(), 1e-9);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
