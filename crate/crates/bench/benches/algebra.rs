use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pshdef_bench::{r_a, rho_r8};
use pshdef_core::geometry::{hessian_minor_det, levi_form};
use pshdef_core::boundary::sample_boundary;
use pshdef_core::Var;

fn poly(c: &mut Criterion) {
    let r = r_a(8);
    let p = r.poly().clone();
    let rho = rho_r8();
    c.bench_function("multiply r8 by itself", |b| b.iter(|| black_box(&p) * black_box(&p)));
    c.bench_function("derive rho in z and wbar", |b| b.iter(|| black_box(&rho).deriv(Var::Z(0)).deriv(Var::Wbar)));
    c.bench_function("levi form of r8", |b| b.iter(|| levi_form(black_box(&r), 0).unwrap()));
    c.bench_function("hessian minor of rho", |b| b.iter(|| hessian_minor_det(black_box(&rho), 0).unwrap()));
    let compiled = rho.compile();
    let pt = sample_boundary(&r, 1e-2, 8, 0).unwrap().points[7].clone();
    c.bench_function("evaluate compiled rho", |b| b.iter(|| compiled.eval(black_box(&pt))));
}

criterion_group!(benches, poly);
criterion_main!(benches);
