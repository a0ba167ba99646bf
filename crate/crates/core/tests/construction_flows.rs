use pshdef_core::method::{replay_verification, run_construction, ConstructionConfig, ConstructionReport, ConstructionStatus};
use pshdef_core::{fixtures, DefiningFunction, WPoly};

fn df(p: WPoly) -> DefiningFunction {
    DefiningFunction::new(p).unwrap()
}

fn construct(r: &DefiningFunction) -> ConstructionReport {
    run_construction(r, &ConstructionConfig::default()).unwrap()
}

fn assert_contracting(rep: &ConstructionReport) {
    for s in &rep.stages {
        if let Some(c) = s.contraction {
            assert!(c < 1.0, "stage {} contraction {c}", s.index);
        }
    }
}

fn assert_replays(r: &DefiningFunction, rep: &ConstructionReport) {
    let again = replay_verification(r, rep).expect("certified report carries a verification");
    assert!(again.passed);
    assert_eq!(Some(&again), rep.verification.as_ref());
}

#[test]
fn sphere_certifies_without_correction() {
    for nz in [1, 2] {
        let r = df(fixtures::sphere_model(nz));
        let rep = construct(&r);
        assert_eq!(rep.status, ConstructionStatus::Certified);
        assert!(rep.strong_pseudoconvex_shortcut);
        assert!(rep.final_candidate.t.is_zero());
        assert!(rep.final_candidate.k.is_some());
        assert_replays(&r, &rep);
    }
}

#[test]
fn r10_single_stage() {
    let r = df(fixtures::r_a(10));
    let rep = construct(&r);
    assert_eq!(rep.status, ConstructionStatus::Certified, "{}", rep.trace());
    assert_eq!(rep.stages.len(), 1);
    assert_eq!(rep.final_candidate.t, WPoly::im_z(1, 0).scale_int(-4));
    assert_eq!(rep.final_candidate.t_real, "-4*Im(z)");
    let k = rep.final_candidate.k.unwrap();
    assert!(k <= 1 << 20);
    let v = rep.verification.as_ref().unwrap();
    assert!(v.psd.passed && v.identity.passed && v.min_abs_h >= 0.5);
    assert_eq!(v.shell.requested_radius, 1e-2);
    assert_contracting(&rep);
    assert_replays(&r, &rep);
}

#[test]
fn r8_needs_second_stage() {
    let r = df(fixtures::r_a(8));
    let rep = construct(&r);
    assert_eq!(rep.status, ConstructionStatus::Certified, "{}", rep.trace());
    assert_eq!(rep.stages.len(), 2);

    let first = &rep.stages[0];
    assert_eq!(first.t_after, WPoly::im_z(1, 0).scale_int(-4));
    let second = &rep.stages[1];
    assert_eq!(second.k_search.k, None);
    assert!(!second.k_search.psd.passed);
    assert!(!second.k_search.psd.worst_point.is_empty());

    let x = WPoly::re_z(1, 0);
    let y = WPoly::im_z(1, 0);
    let quad = &y.pow(2).scale_int(8) - &x.pow(2).scale_int(8);
    assert_eq!(second.t_increment, &quad + &(&x * &WPoly::re_w(1)).scale_int(64));
    assert_eq!(second.absorbed.len(), 1);
    assert_eq!(second.absorbed[0].factor, "16");
    assert_eq!(rep.final_candidate.t, &quad - &y.scale_int(4));

    assert!(rep.verification.as_ref().unwrap().passed);
    assert_contracting(&rep);
    assert_replays(&r, &rep);
}

#[test]
fn mixed_c3_first_stage_merges_per_direction_increments() {
    let r = df(fixtures::mixed_c3(10));
    let strict = run_construction(&r, &ConstructionConfig { max_stages: 1, ..Default::default() });
    assert!(strict.is_err(), "the off-diagonal Levi entry makes this input non-pseudoconvex");

    let cfg = ConstructionConfig { max_stages: 1, require_pseudoconvex: false, ..Default::default() };
    let rep = run_construction(&r, &cfg).unwrap();
    assert!(!rep.warnings.is_empty());
    let first = &rep.stages[0];
    assert_eq!(first.t_increment, WPoly::im_z(2, 0).scale_int(-4));
    assert!(first.splits.iter().any(|s| s.j == 1 && s.split.s.is_zero()));
    assert!(first.conflicts.is_empty());
    assert_ne!(rep.status, ConstructionStatus::Certified);
}

#[test]
fn construction_is_deterministic() {
    let r = df(fixtures::r_a(10));
    let a = serde_json::to_string(&construct(&r)).unwrap();
    let b = serde_json::to_string(&construct(&r)).unwrap();
    assert_eq!(a, b);
}
