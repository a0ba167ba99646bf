//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! `cargo test -p pshdef-cli --test acceptance`

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num::complex::Complex64;
use num::BigRational;
use pshdef_core::boundary::sample_boundary;
use pshdef_core::dominance::{levi_dominance_gate, ProbeFamily, Status};
use pshdef_core::geometry::levi_form;
use pshdef_core::method::{run_construction, solve_stage, ConstructionConfig, ConstructionReport};
use pshdef_core::real_convex::{convex_multiplier, sample_real_boundary, RealDefiningFunction};
use pshdef_core::verify::{levi_scan, multiplier_identity_check};
use pshdef_core::{fixtures, CPoint, ConstructionStatus, DefiningFunction, GaussianRational, RealPoly, Var, WPoly};
use pshdef_cli::lower::{parse_real_polys, parse_wpoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn df(p: WPoly) -> DefiningFunction {
    DefiningFunction::new(p).unwrap()
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took > limit {
        return Err(format!("took {took:.2?}, limit {limit:?}"));
    }
    Ok(took)
}

fn construct(r: &DefiningFunction) -> ConstructionReport {
    run_construction(r, &ConstructionConfig::default()).expect("construction runs")
}

/// Real part of a random polynomial in `z, z̄, w, w̄` with terms of degree in `[lo, hi]`.
fn random_real(rng: &mut ChaCha8Rng, lo: u32, hi: u32, terms: usize) -> WPoly {
    let vars = [Var::Z(0), Var::Zbar(0), Var::W, Var::Wbar];
    let mut out = WPoly::zero(1);
    let mut added = 0;
    while added < terms {
        let exps: Vec<u32> = (0..4).map(|_| rng.random_range(0..=hi)).collect();
        let d: u32 = exps.iter().sum();
        if d < lo || d > hi {
            continue;
        }
        let c = GaussianRational::from_parts(rng.random_range(-6..=6), rng.random_range(1..=4), rng.random_range(-6..=6), rng.random_range(1..=4));
        let mut m = WPoly::constant(1, c);
        for (v, e) in vars.iter().zip(&exps) {
            m = &m * &WPoly::var(1, *v).pow(*e);
        }
        out = &out + &m;
        added += 1;
    }
    out.real_part()
}

fn identity_on_random_inputs() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let r = df(&WPoly::im_w(1) + &random_real(&mut rng, 2, 6, 5));
        let t = random_real(&mut rng, 1, 3, 3);
        let k = BigRational::from_integer(rng.random_range(1..=8).into());
        let shell = sample_boundary(&r, 1e-2, 200, case).map_err(|e| e.to_string())?;
        ensure!(shell.points.len() == 200, "case {case}: {} boundary points", shell.points.len());
        let id = multiplier_identity_check(&r, &k, &t, &shell);
        ensure!(id.passed, "case {case}: deviation {:e} vs max |LHS| {:e}", id.max_deviation, id.max_lhs);
        worst = worst.max(id.max_deviation / (1.0 + id.max_lhs));
    }
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!("10 random inputs, worst relative deviation {worst:.2e}, {took:.2?}"))
}

fn r10_single_stage() -> Outcome {
    let start = Instant::now();
    let r = df(fixtures::r_a(10));
    let rep = construct(&r);
    ensure!(rep.status == ConstructionStatus::Certified, "status {:?}", rep.status);
    ensure!(rep.stages.len() == 1, "{} stages", rep.stages.len());
    let want = parse_wpoly("-4*Im(z)").unwrap();
    ensure!(rep.final_candidate.t == want, "T = {}", rep.final_candidate.t);
    let k = rep.final_candidate.k.ok_or("no K")?;
    ensure!(k <= 1 << 20, "K = {k}");
    let v = rep.verification.as_ref().ok_or("no verification")?;
    ensure!(v.psd.passed, "psd check failed: {} = {:e}", v.psd.worst_quantity, v.psd.worst_value());
    ensure!(v.shell.requested_radius == 1e-2 && v.shell.count == 2000 && v.psd.points >= 2000 && rep.config.tol == 1e-9, "shell radius {}, {} samples", v.shell.requested_radius, v.shell.count);
    let took = within(Duration::from_secs(60), start)?;
    Ok(format!("T = {}, K = {k}, {took:.2?}", rep.final_candidate.t_real))
}

fn r8_two_stages() -> Outcome {
    let start = Instant::now();
    let r = df(fixtures::r_a(8));
    let rep = construct(&r);
    ensure!(rep.stages.len() >= 2, "{} stages", rep.stages.len());
    let first = &rep.stages[0];
    ensure!(first.t_after == parse_wpoly("-4*Im(z)").unwrap(), "stage 0 T = {}", first.t_after);
    let second = &rep.stages[1];
    ensure!(second.k_search.k.is_none(), "stage-1 candidate accepted K = {:?}", second.k_search.k);
    ensure!(!second.k_search.psd.worst_point.is_empty(), "no witness point recorded");
    let quad = parse_wpoly("8*Im(z)^2 - 8*Re(z)^2").unwrap();
    let absorbed = parse_wpoly("64*Re(z)*Re(w)").unwrap();
    ensure!(second.t_increment == &quad + &absorbed, "T_inc = {}", second.t_increment);
    ensure!(second.absorbed.len() == 1, "{} absorbed terms", second.absorbed.len());
    ensure!(second.t_after == &quad + &first.t_after, "T = {}", second.t_after);
    ensure!(rep.status == ConstructionStatus::Certified, "status {:?}", rep.status);
    let v = rep.verification.as_ref().ok_or("no verification")?;
    ensure!(v.passed && v.shell.requested_radius == 1e-2, "verification failed");
    let took = within(Duration::from_secs(120), start)?;
    Ok(format!(
        "stage 1 witness {} = {:.3e}; T = {}, K = {}, {took:.2?}",
        second.k_search.psd.worst_quantity,
        second.k_search.psd.worst_value(),
        rep.final_candidate.t_real,
        rep.final_candidate.k.unwrap()
    ))
}

fn dominance_fixtures() -> Outcome {
    let probes = ProbeFamily::standard(1, 11);
    let v10 = levi_dominance_gate(&df(fixtures::r_a(10)), &probes).map_err(|e| e.to_string())?;
    ensure!(v10.status == Status::Dominated, "A = 10: {:?}", v10.status);
    let v8 = levi_dominance_gate(&df(fixtures::r_a(8)), &probes).map_err(|e| e.to_string())?;
    ensure!(v8.status == Status::NotDominated, "A = 8: {:?}", v8.status);
    let w = v8.witness.ok_or("A = 8: no witness")?;
    let d = &w.direction;
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (x, y, u) = (d[0] / scale, d[1] / scale, d[2] / scale);
    ensure!(y.abs() <= 1e-3 && (x - 4.0 * u).abs() <= 1e-3, "direction {d:?}");
    let ratios: Vec<f64> = w.samples.iter().filter_map(|s| s.ratio).collect();
    ensure!(ratios.len() >= 4, "{} shells", ratios.len());
    ensure!(ratios.windows(2).all(|p| p[1] > p[0]), "ratios not increasing: {ratios:?}");
    Ok(format!("A = 10 dominated (C = {:.3e}); A = 8 escapes along {} over {} shells", v10.constant.unwrap_or(f64::NAN), w.curve, ratios.len()))
}

fn pseudoconvexity_threshold() -> Outcome {
    let mut parts = Vec::new();
    for a in [8, 10] {
        let s = levi_scan(&df(fixtures::r_a(a)), 1e-2, 2000, 0).map_err(|e| e.to_string())?;
        ensure!(!s.negative, "A = {a}: negative value {:e} at {:?}", s.min_value, s.witness);
        parts.push(format!("A = {a} nonnegative ({} samples)", s.samples));
    }
    let s = levi_scan(&df(fixtures::r_a(7)), 1e-2, 10_000, 0).map_err(|e| e.to_string())?;
    ensure!(s.negative && s.witness.is_some(), "A = 7: no negative value in {} samples", s.samples);
    ensure!(s.samples <= 10_000, "A = 7 witness after {} samples", s.samples);
    parts.push(format!("A = 7 negative after {} samples", s.samples));
    Ok(parts.join("; "))
}

fn strongly_pseudoconvex_shortcut() -> Outcome {
    let r = df(fixtures::sphere_model(1));
    let origin = levi_form(&r, 0).unwrap().eval_exact(&[GaussianRational::from_int(0)], &GaussianRational::from_int(0));
    ensure!(origin == GaussianRational::ratio(1, 4), "Levi form at origin = {origin}");
    let rep = construct(&r);
    ensure!(rep.status == ConstructionStatus::Certified, "status {:?}", rep.status);
    ensure!(rep.strong_pseudoconvex_shortcut && rep.final_candidate.t.is_zero(), "T = {}", rep.final_candidate.t);
    Ok(format!("Levi form at origin = {origin}, T = 0, K = {}", rep.final_candidate.k.ok_or("no K")?))
}

fn wirtinger(f: &WPoly, p: &CPoint) -> (Complex64, Complex64) {
    let h = 1e-5;
    let shift = |dz: Complex64| {
        let mut q = p.clone();
        q.z[0] += dz;
        f.eval(&q)
    };
    let fx = (shift(Complex64::new(h, 0.0)) - shift(Complex64::new(-h, 0.0))) / (2.0 * h);
    let fy = (shift(Complex64::new(0.0, h)) - shift(Complex64::new(0.0, -h))) / (2.0 * h);
    let i = Complex64::i();
    ((fx - i * fy) / 2.0, (fx + i * fy) / 2.0)
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..20 {
        let f = random_real(&mut rng, 1, 5, 4);
        ensure!(f.is_real(), "case {case}: realified polynomial is not real");
        let (fz, fzb) = (f.deriv(Var::Z(0)), f.deriv(Var::Zbar(0)));
        for _ in 0..5 {
            let mut c = || Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let p = CPoint { z: vec![c()], w: c() };
            let (nz, nzb) = wirtinger(&f, &p);
            let scale = 1.0 + fz.eval(&p).norm();
            ensure!((nz - fz.eval(&p)).norm() <= 1e-6 * scale, "case {case}: d/dz differs by {:e}", (nz - fz.eval(&p)).norm());
            ensure!((nzb - fzb.eval(&p)).norm() <= 1e-6 * scale, "case {case}: d/dzbar differs");
        }
        let (t_inc, residual) = solve_stage(&f, 0);
        let two_i_s = f.scale(&GaussianRational::from_parts(0, 1, 2, 1));
        ensure!(&t_inc.deriv(Var::Z(0)) - &(&two_i_s + &residual) == WPoly::zero(1), "case {case}: stage equation is inexact");
        ensure!(t_inc.is_real(), "case {case}: stage increment is not real");
    }

    for a in [10, 8] {
        let rep = construct(&df(fixtures::r_a(a)));
        for s in &rep.stages {
            if let Some(c) = s.contraction {
                ensure!(c < 1.0, "A = {a}, stage {}: contraction {c}", s.index);
            }
        }
    }
    let sphere = construct(&df(fixtures::sphere_model(2)));
    ensure!(sphere.status == ConstructionStatus::Certified, "sphere in two variables: {:?}", sphere.status);

    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (name, src) in [("r10_construct.json", common::R10), ("r8_construct.json", common::R8)] {
        let want = std::fs::read_to_string(golden.join(name)).map_err(|e| format!("{name}: {e}"))?;
        for _ in 0..2 {
            let run = common::pshdef(&["construct", "--r", src, "--seed", "0", "--json"]);
            ensure!(run.stdout == want, "{name}: report differs from the committed file");
        }
    }
    Ok("derivatives, reality, stage exactness, contraction and golden reports".into())
}

fn real_convex_analog() -> Outcome {
    let mut parts = Vec::new();
    for src in ["y + x^2", "y + x^4"] {
        let start = Instant::now();
        let p: RealPoly = parse_real_polys(&[src]).map_err(|e| e.to_string())?.remove(0);
        let r = RealDefiningFunction::new(p).map_err(|e| e.to_string())?;
        let shell = sample_real_boundary(&r, 1e-2, 2000, 0).map_err(|e| e.to_string())?;
        let rep = convex_multiplier(&r, &shell, 20, 1e-9).map_err(|e| e.to_string())?;
        ensure!(rep.certified, "{src}: not certified ({} = {:e})", rep.psd.worst_quantity, rep.psd.worst_value());
        let k = rep.k.unwrap();
        let want = (&(&RealPoly::constant(2, BigRational::from_integer(1.into())) + &r.poly().scale(&BigRational::from_integer(k.into()))) + &r.r_y())
            .to_string_with(&RealPoly::convex_names(2));
        ensure!(rep.h == want, "{src}: h = {}", rep.h);
        let took = within(Duration::from_secs(10), start)?;
        parts.push(format!("r = {src}: h = {} ({took:.2?})", rep.h));
    }
    Ok(parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("multiplier identity", identity_on_random_inputs),
        ("A = 10 construction", r10_single_stage),
        ("A = 8 construction", r8_two_stages),
        ("dominance fixtures", dominance_fixtures),
        ("pseudoconvexity threshold", pseudoconvexity_threshold),
        ("strongly pseudoconvex shortcut", strongly_pseudoconvex_shortcut),
        ("property suites", property_suites),
        ("real convex analog", real_convex_analog),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
