//! Stage-wise construction of a multiplier `h = 1 + Kr + T` making `ρ = r·h`
//! plurisubharmonic on the boundary near the origin.
//!
//! Each stage computes `g_j = ((1+T)r)_{z_j w̄}`, splits it into a significant
//! part `S_j` and an error part, solves `∂_{z_j} T_inc = 2i S_j` by
//! antidifferentiation, drops terms that are multiples of terms of `r`, and
//! adds the increment to `T`. Before each stage the ladder `K = 2^0 … 2^max`
//! is tried; a passing PSD check plus the determinant identity certify.

use std::collections::{BTreeMap, HashMap};

use num::complex::Complex64;
use num::{BigRational, Signed, Zero};
use serde::Serialize;

use crate::boundary::{sample_boundary, BoundaryShell, Projector, SampleError};
use crate::dominance::{levi_dominance_gate, split_s_e, BoundKind, DominanceError, DominanceVerdict, ProbeFamily, Prober, Split, Status};
use crate::gaussian::{fmt_rational, GaussianRational};
use crate::geometry::{hessian_entry, levi_matrix, DefiningFunction};
use crate::linalg::rational_det;
use crate::poly::{Var, WPoly};
use crate::real_poly::{real_expr, to_real_coords, RealPoly};
use crate::ser_display;
use crate::verify::{curve_points, multiplier_identity_check, levi_scan, multiplier, CompiledHessian, IdentityCheck, LeviScan, PsdAccumulator, PsdCheckResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionConfig {
    pub max_stages: usize,
    /// Defaults to `2 + max(deg r, deg T after the first stage)`.
    pub degree_cap: Option<u32>,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub max_k_exp: u32,
    pub tol: f64,
    pub bound: BoundKind,
    pub absorb: bool,
    /// Re-split under the Levi-only bound when the configured bound leaves `S = 0` but no `K` works.
    pub escalate: bool,
    /// Refuse inputs whose Levi form is negative somewhere on the shell; when off, only warn.
    pub require_pseudoconvex: bool,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            max_stages: 4,
            degree_cap: None,
            radius: 1e-2,
            samples: 2000,
            seed: 0,
            max_k_exp: 20,
            tol: 1e-9,
            bound: BoundKind::LeviPlusGradSq,
            absorb: true,
            escalate: true,
            require_pseudoconvex: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorbedTerm {
    /// The removed term of `T`, in real coordinates.
    pub term: String,
    /// The term of `r` it is a multiple of.
    pub multiple_of: String,
    pub factor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierCandidate {
    #[serde(serialize_with = "ser_display")]
    pub t: WPoly,
    pub t_real: String,
    pub k: Option<u64>,
    pub stage: usize,
    #[serde(serialize_with = "ser_display")]
    pub residual: WPoly,
    pub absorbed_terms: Vec<AbsorbedTerm>,
}

impl MultiplierCandidate {
    pub fn new(t: WPoly, stage: usize) -> Self {
        let nz = t.nz();
        MultiplierCandidate { t_real: real_expr(&t), t, k: None, stage, residual: WPoly::zero(nz), absorbed_terms: vec![] }
    }

    /// `1 + K r + T` when `K` is known.
    pub fn h(&self, r: &DefiningFunction) -> Option<WPoly> {
        self.k.map(|k| multiplier(r, &BigRational::from_integer(k.into()), &self.t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstructionStatus {
    Certified,
    Obstructed,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSearchOutcome {
    pub k: Option<u64>,
    pub shell_radius: f64,
    pub shrunk: bool,
    /// PSD summary at the accepted `K`, or at `2^max` on failure (the witness).
    pub psd: PsdCheckResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JSplit {
    pub j: usize,
    #[serde(serialize_with = "ser_display")]
    pub g: WPoly,
    pub split: Split,
    pub escalated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Compatibility {
    pub j: usize,
    pub k: usize,
    #[serde(serialize_with = "ser_display")]
    pub difference: WPoly,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub index: usize,
    pub k_search: KSearchOutcome,
    pub splits: Vec<JSplit>,
    #[serde(serialize_with = "ser_display")]
    pub t_increment: WPoly,
    pub t_increment_real: String,
    #[serde(serialize_with = "ser_display")]
    pub residual: WPoly,
    pub residual_verdict: Option<DominanceVerdict>,
    pub absorbed: Vec<AbsorbedTerm>,
    #[serde(serialize_with = "ser_display")]
    pub t_after: WPoly,
    pub t_after_real: String,
    /// `max |S_{n+1}| / |S_n|` over the inner shell.
    pub contraction: Option<f64>,
    pub compatibility: Vec<Compatibility>,
    pub conflicts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub k: u64,
    pub shell: BoundaryShell,
    pub psd: PsdCheckResult,
    pub identity: IdentityCheck,
    pub min_abs_h: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obstruction {
    pub stage: usize,
    pub reason: String,
    /// The stage equation itself failed with a non-dominated witness, so no
    /// multiplier of the form `1 + Kr + T` exists, not merely none was found.
    pub necessary_condition_violated: bool,
    pub psd_witness: Option<PsdCheckResult>,
    pub dominance_witness: Option<DominanceVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionReport {
    #[serde(serialize_with = "ser_display")]
    pub input: WPoly,
    pub nz: usize,
    pub config: ConstructionConfig,
    pub status: ConstructionStatus,
    pub strong_pseudoconvex_shortcut: bool,
    pub levi_scan: LeviScan,
    pub levi_gate: DominanceVerdict,
    pub stages: Vec<StageReport>,
    #[serde(rename = "final")]
    pub final_candidate: MultiplierCandidate,
    pub verification: Option<Verification>,
    pub obstruction: Option<Obstruction>,
    pub warnings: Vec<String>,
}

impl ConstructionReport {
    /// Human-readable trace of every stage.
    pub fn trace(&self) -> String {
        let mut out = format!("r = {}\nstatus: {:?}\n", self.input, self.status);
        for s in &self.stages {
            out.push_str(&format!("stage {}:\n", s.index));
            match s.k_search.k {
                Some(k) => out.push_str(&format!("  K = {k} accepted\n")),
                None => out.push_str(&format!(
                    "  no K ≤ 2^{} (worst {} = {:.3e})\n",
                    self.config.max_k_exp,
                    s.k_search.psd.worst_quantity,
                    s.k_search.psd.worst_value()
                )),
            }
            for js in &s.splits {
                out.push_str(&format!("  [j={}, bound {}] S = {}\n", js.j + 1, js.split.bound, js.split.s));
                out.push_str(&format!("  [j={}, bound {}] E = {}\n", js.j + 1, js.split.bound, js.split.e));
            }
            out.push_str(&format!("  T_inc = {}\n", s.t_increment_real));
            if !s.residual.is_zero() {
                out.push_str(&format!("  residual = {}\n", s.residual));
            }
            for a in &s.absorbed {
                out.push_str(&format!("  absorbed {} = {} × ({})\n", a.term, a.factor, a.multiple_of));
            }
            out.push_str(&format!("  T = {}\n", s.t_after_real));
        }
        out.push_str(&format!("final T = {}", self.final_candidate.t_real));
        if let Some(k) = self.final_candidate.k {
            out.push_str(&format!(", K = {k}"));
        }
        out.push('\n');
        if let Some(o) = &self.obstruction {
            out.push_str(&format!("obstruction at stage {}: {}\n", o.stage, o.reason));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("Levi form is negative at {witness:?} (value {value:e}); the domain is not pseudoconvex there")]
    NotPseudoconvex { witness: Vec<f64>, value: f64 },
    #[error(transparent)]
    Sampling(#[from] SampleError),
    #[error(transparent)]
    Dominance(#[from] DominanceError),
}

/// `T_inc = Q + conj(Q)` with `Q = ∫ 2iS dz_j`, and `residual = ∂_{z_j} conj(Q)`.
pub fn solve_stage(s: &WPoly, j: usize) -> (WPoly, WPoly) {
    let q = s.scale(&GaussianRational::imag(BigRational::from_integer(2.into()))).antiderivative_z(j);
    let residual = q.conjugate().deriv(Var::Z(j));
    (q.realify(), residual)
}

/// Removes the terms of a real `T` (in real coordinates) that are rational
/// multiples of a term of `r` of degree at least two.
pub fn absorb_r_multiples(t: &WPoly, r: &DefiningFunction) -> (WPoly, Vec<AbsorbedTerm>) {
    if t.is_zero() {
        return (t.clone(), vec![]);
    }
    let names = crate::real_poly::expr_coord_names(r.nz());
    let (tr, _) = to_real_coords(t);
    let (rr, _) = to_real_coords(r.poly());
    let mut kept = RealPoly::zero(tr.nvars());
    let mut absorbed = Vec::new();
    for (e, c) in tr.terms() {
        let rc = rr.coeff(e);
        if e.iter().sum::<u32>() >= 2 && !rc.is_zero() {
            let mono = |coef: &BigRational| RealPoly::from_terms(tr.nvars(), [(e.clone(), coef.clone())]).to_expr_with(&names);
            absorbed.push(AbsorbedTerm { term: mono(c), multiple_of: mono(&rc), factor: fmt_rational(&(c / &rc)) });
        } else {
            kept.add_term(e.clone(), c.clone());
        }
    }
    (kept.to_wpoly(), absorbed)
}

/// A `T = 0` candidate when the Levi matrix is positive definite at the origin.
pub fn strong_psc_shortcut(r: &DefiningFunction) -> Option<MultiplierCandidate> {
    let origin = vec![GaussianRational::zero(); r.nz()];
    let w0 = GaussianRational::zero();
    let m: Vec<Vec<BigRational>> =
        levi_matrix(r).iter().map(|row| row.iter().map(|p| p.eval_exact(&origin, &w0).re).collect()).collect();
    let leading_positive = (1..=m.len()).all(|k| {
        let sub: Vec<Vec<BigRational>> = m[..k].iter().map(|row| row[..k].to_vec()).collect();
        rational_det(&sub).is_positive()
    });
    leading_positive.then(|| MultiplierCandidate::new(WPoly::zero(r.nz()), 0))
}

struct PointHessians {
    coords: Vec<f64>,
    a: Vec<Vec<Complex64>>,
    b: Vec<Vec<Complex64>>,
}

/// Hessians of `(1+T)r` and `r²`, so that `H_ρ = A + K·B` for every `K`.
fn point_hessians(r: &DefiningFunction, t: &WPoly, shell: &BoundaryShell) -> Vec<PointHessians> {
    let p = &(&WPoly::one(r.nz()) + t) * r.poly();
    let ha = CompiledHessian::new(&p);
    let hb = CompiledHessian::new(&r.poly().pow(2));
    shell.points.iter().map(|pt| PointHessians { coords: pt.real_coords(), a: ha.eval(pt), b: hb.eval(pt) }).collect()
}

fn ladder_check(ph: &[PointHessians], n: usize, k: f64, tol: f64, full: bool) -> PsdAccumulator {
    let mut acc = PsdAccumulator::new(n, tol);
    for p in ph {
        let m: Vec<Vec<Complex64>> =
            p.a.iter().zip(&p.b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y * k).collect()).collect();
        acc.push(&m, &p.coords);
        if !full && !acc.ok() {
            break;
        }
    }
    acc
}

/// Smallest `K = 2^e ≤ 2^max_exp` for which `(1+Kr+T)r` passes the PSD check,
/// trying each shell of the schedule in turn.
pub fn k_search(r: &DefiningFunction, t: &WPoly, shells: &[BoundaryShell], max_exp: u32, tol: f64) -> KSearchOutcome {
    let n = r.nz() + 1;
    let mut last = None;
    for (i, shell) in shells.iter().enumerate() {
        let ph = point_hessians(r, t, shell);
        for e in 0..=max_exp {
            let k = 1u64 << e;
            if ladder_check(&ph, n, k as f64, tol, false).ok() {
                let psd = ladder_check(&ph, n, k as f64, tol, true).finish();
                return KSearchOutcome { k: Some(k), shell_radius: shell.radius, shrunk: i > 0, psd };
            }
        }
        let kmax = (1u64 << max_exp) as f64;
        last = Some(KSearchOutcome {
            k: None,
            shell_radius: shell.radius,
            shrunk: i > 0,
            psd: ladder_check(&ph, n, kmax, tol, true).finish(),
        });
    }
    last.expect("at least one shell")
}

/// Dyadic parameters `2^{-k/2}` from `2⁻³` down to `2⁻²⁰`.
fn curve_parameters() -> Vec<f64> {
    (6..=40).map(|k| 0.5f64.powf(k as f64 / 2.0)).collect()
}

/// A low-discrepancy shell plus points along the coordinate axes and any witness curves.
fn build_shell(
    r: &DefiningFunction,
    radius: f64,
    count: usize,
    seed: u64,
    curves: &[(Vec<u32>, Vec<f64>)],
) -> Result<BoundaryShell, SampleError> {
    let shell = sample_boundary(r, radius, count, seed)?;
    let proj = Projector::new(r);
    let d = 2 * r.nz() + 1;
    let ts = curve_parameters();
    let mut extra = Vec::new();
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut dir = vec![0.0; d];
            dir[k] = sign;
            extra.extend(curve_points(&proj, &vec![1; r.nz() + 1], &dir, &ts));
        }
    }
    for (e, dir) in curves {
        for sign in [1.0, -1.0] {
            let dir: Vec<f64> = dir.iter().map(|x| x * sign).collect();
            extra.extend(curve_points(&proj, e, &dir, &ts));
        }
    }
    Ok(shell.with_extra_points(extra))
}

fn min_abs_on(p: &WPoly, shell: &BoundaryShell) -> f64 {
    let c = p.compile();
    shell.points.iter().map(|pt| c.eval(pt).norm()).fold(f64::INFINITY, f64::min)
}

/// PSD check and determinant identity for a fixed `(K, T)` on a shell.
pub fn verify_candidate(r: &DefiningFunction, t: &WPoly, k: u64, shell: &BoundaryShell, tol: f64) -> Verification {
    let kq = BigRational::from_integer(k.into());
    let h = multiplier(r, &kq, t);
    let n = r.nz() + 1;
    let psd = ladder_check(&point_hessians(r, t, shell), n, k as f64, tol, true).finish();
    let identity = multiplier_identity_check(r, &kq, t, shell);
    let min_abs_h = min_abs_on(&h, shell);
    let passed = psd.passed && identity.passed && min_abs_h >= 0.5;
    Verification { k, shell: shell.clone(), psd, identity, min_abs_h, passed }
}

struct Engine<'a> {
    r: &'a DefiningFunction,
    cfg: &'a ConstructionConfig,
    family: ProbeFamily,
    probers: HashMap<(BoundKind, usize), Prober>,
}

impl<'a> Engine<'a> {
    fn prober(&mut self, kind: BoundKind, j: usize) -> Result<&Prober, DominanceError> {
        if !self.probers.contains_key(&(kind, j)) {
            let p = Prober::new(self.r, kind, Some(j), &self.family)?;
            self.probers.insert((kind, j), p);
        }
        Ok(&self.probers[&(kind, j)])
    }

    fn g(&self, t: &WPoly, j: usize) -> WPoly {
        let p = &(&WPoly::one(self.r.nz()) + t) * self.r.poly();
        hessian_entry(&p, j, self.r.nz())
    }

    fn split(&mut self, t: &WPoly, kind: BoundKind) -> Result<Vec<JSplit>, DominanceError> {
        let mut out = Vec::new();
        for j in 0..self.r.nz() {
            let g = self.g(t, j);
            let split = split_s_e(&g, self.prober(kind, j)?);
            out.push(JSplit { j, g, split, escalated: kind != self.cfg.bound });
        }
        Ok(out)
    }

    /// `max_p max_j |S'_j(p)| / |S_j(p)|` over inner-shell points where `S_j` is not negligible.
    fn contraction(&mut self, t_next: &WPoly, splits: &[JSplit], inner: &BoundaryShell) -> Result<Option<f64>, DominanceError> {
        let kind = splits[0].split.bound;
        let next = self.split(t_next, kind)?;
        let mut worst: Option<f64> = None;
        for (now, nx) in splits.iter().zip(&next) {
            if now.split.s.is_zero() {
                continue;
            }
            let s0 = now.split.s.compile();
            let s1 = nx.split.s.compile();
            for p in &inner.points {
                let (v0, sc0) = s0.eval_with_scale(p);
                if v0.norm() <= 1e-10 * sc0 || v0.norm() == 0.0 {
                    continue;
                }
                let q = s1.eval(p).norm() / v0.norm();
                worst = Some(worst.map_or(q, |w: f64| w.max(q)));
            }
        }
        Ok(worst)
    }
}

/// Runs the construction; `n ≥ 3` inputs are handled by [`cn_simultaneous`].
pub fn run_construction(r: &DefiningFunction, cfg: &ConstructionConfig) -> Result<ConstructionReport, ConstructionError> {
    construct(r, cfg)
}

/// The simultaneous system for all `j = 1 … n−1`; for `n = 2` this is [`run_construction`].
pub fn cn_simultaneous(r: &DefiningFunction, cfg: &ConstructionConfig) -> Result<ConstructionReport, ConstructionError> {
    construct(r, cfg)
}

fn construct(r: &DefiningFunction, cfg: &ConstructionConfig) -> Result<ConstructionReport, ConstructionError> {
    let nz = r.nz();
    let scan = levi_scan(r, cfg.radius, cfg.samples, cfg.seed)?;
    let mut warnings = Vec::new();
    if scan.negative {
        let witness = scan.witness.clone().unwrap_or_default();
        if cfg.require_pseudoconvex {
            return Err(ConstructionError::NotPseudoconvex { witness, value: scan.min_value });
        }
        warnings.push(format!("Levi form is negative ({:.3e}) at {:?}; continuing without a pseudoconvexity guarantee", scan.min_value, witness));
    }
    let family = ProbeFamily::standard(nz, cfg.seed);
    let gate = levi_dominance_gate(r, &family)?;
    let mut curves: Vec<(Vec<u32>, Vec<f64>)> = Vec::new();
    if let Some(w) = &gate.witness {
        curves.push((w.exponents.clone(), w.direction.clone()));
    }
    let shells = vec![
        build_shell(r, cfg.radius, cfg.samples, cfg.seed, &curves)?,
        build_shell(r, cfg.radius / 2.0, cfg.samples, cfg.seed, &curves)?,
    ];
    let inner = build_shell(r, cfg.radius / 16.0, 256, cfg.seed ^ 0x5bd1_e995, &curves)?;
    let mut engine = Engine { r, cfg, family, probers: HashMap::new() };

    let shortcut = strong_psc_shortcut(r);
    let mut t = WPoly::zero(nz);
    let mut stages: Vec<StageReport> = Vec::new();
    let mut degree_cap = cfg.degree_cap;
    let mut residual_last = WPoly::zero(nz);
    let mut absorbed_all: Vec<AbsorbedTerm> = Vec::new();

    let finish = |status, t: &WPoly, k: Option<u64>, stages, verification, obstruction, warnings, residual: &WPoly, absorbed| {
        let mut cand = MultiplierCandidate::new(t.clone(), 0);
        cand.k = k;
        cand.residual = residual.clone();
        cand.absorbed_terms = absorbed;
        let stage_count = Vec::len(&stages);
        cand.stage = stage_count;
        ConstructionReport {
            input: r.poly().clone(),
            nz,
            config: cfg.clone(),
            status,
            strong_pseudoconvex_shortcut: shortcut.is_some(),
            levi_scan: scan.clone(),
            levi_gate: gate.clone(),
            stages,
            final_candidate: cand,
            verification,
            obstruction,
            warnings,
        }
    };

    for n in 0..=cfg.max_stages {
        let ks = k_search(r, &t, &shells, cfg.max_k_exp, cfg.tol);
        if let Some(k) = ks.k {
            let shell = if ks.shrunk { &shells[1] } else { &shells[0] };
            let v = verify_candidate(r, &t, k, shell, cfg.tol);
            if v.passed {
                return Ok(finish(ConstructionStatus::Certified, &t, Some(k), stages, Some(v), None, warnings, &residual_last, absorbed_all));
            }
            warnings.push(format!(
                "stage {n}: K = {k} passed the PSD ladder but verification failed (identity {}, min |h| {:.3e})",
                v.identity.passed, v.min_abs_h
            ));
        }
        if n == cfg.max_stages {
            break;
        }

        let mut splits = engine.split(&t, cfg.bound)?;
        if cfg.escalate && cfg.bound != BoundKind::LeviOnly && splits.iter().all(|s| s.split.s.is_zero()) {
            splits = engine.split(&t, BoundKind::LeviOnly)?;
        }
        let kind = splits[0].split.bound;
        if splits.iter().all(|s| s.split.s.is_zero()) {
            let obstruction = Obstruction {
                stage: n,
                reason: format!("no K ≤ 2^{} works and (1+T)r has no significant part left under the {kind} bound", cfg.max_k_exp),
                necessary_condition_violated: false,
                psd_witness: Some(ks.psd.clone()),
                dominance_witness: None,
            };
            stages.push(stage_record(n, ks, splits, &WPoly::zero(nz), &WPoly::zero(nz), None, vec![], &t, None, vec![], vec![]));
            return Ok(finish(ConstructionStatus::Obstructed, &t, None, stages, None, Some(obstruction), warnings, &residual_last, absorbed_all));
        }

        // Solve each j-equation.
        let mut incs: Vec<(usize, WPoly)> = Vec::new();
        let mut residual = WPoly::zero(nz);
        let mut residual_verdict = None;
        for js in &splits {
            if js.split.s.is_zero() {
                continue;
            }
            let (inc, res) = solve_stage(&js.split.s, js.j);
            if !res.is_zero() {
                let v = engine.prober(kind, js.j)?.check(&res);
                if v.status == Status::NotDominated {
                    let obstruction = Obstruction {
                        stage: n,
                        reason: format!(
                            "the stage equation for j = {} leaves a residual {} that is not dominated by the {kind} bound; \
                             the log-derivative necessary condition cannot hold",
                            js.j + 1,
                            res
                        ),
                        necessary_condition_violated: true,
                        psd_witness: None,
                        dominance_witness: Some(v.clone()),
                    };
                    stages.push(stage_record(n, ks, splits.clone(), &inc, &res, Some(v), vec![], &t, None, vec![], vec![]));
                    return Ok(finish(ConstructionStatus::Obstructed, &t, None, stages, None, Some(obstruction), warnings, &res, absorbed_all));
                }
                residual_verdict = Some(v);
            }
            residual = &residual + &res;
            incs.push((js.j, inc));
        }

        // Mixed-partial compatibility between the j-increments.
        let mut compatibility = Vec::new();
        for a in 0..incs.len() {
            for b in (a + 1)..incs.len() {
                let (j, ref tj) = incs[a];
                let (k, ref tk) = incs[b];
                let diff = &tj.deriv(Var::Z(k)) - &tk.deriv(Var::Z(j));
                let mut status = Status::Dominated;
                if !diff.is_zero() {
                    for idx in [j, k] {
                        let s = engine.prober(kind, idx)?.check(&diff).status;
                        status = match (status, s) {
                            (Status::NotDominated, _) | (_, Status::NotDominated) => Status::NotDominated,
                            (Status::Unknown, _) | (_, Status::Unknown) => Status::Unknown,
                            _ => Status::Dominated,
                        };
                    }
                }
                if status == Status::NotDominated {
                    let obstruction = Obstruction {
                        stage: n,
                        reason: format!("increments for j = {} and j = {} are incompatible: {}", j + 1, k + 1, diff),
                        necessary_condition_violated: false,
                        psd_witness: None,
                        dominance_witness: None,
                    };
                    compatibility.push(Compatibility { j, k, difference: diff, status });
                    stages.push(stage_record(n, ks, splits, &WPoly::zero(nz), &residual, residual_verdict, vec![], &t, None, compatibility, vec![]));
                    return Ok(finish(ConstructionStatus::Obstructed, &t, None, stages, None, Some(obstruction), warnings, &residual, absorbed_all));
                }
                compatibility.push(Compatibility { j, k, difference: diff, status });
            }
        }

        // Merge increments monomial by monomial.
        let mut merged: BTreeMap<_, (GaussianRational, usize)> = BTreeMap::new();
        let mut conflicts = Vec::new();
        for (j, inc) in &incs {
            for (m, c) in inc.terms() {
                match merged.get(m) {
                    None => {
                        merged.insert(m.clone(), (c.clone(), *j));
                    }
                    Some((c0, j0)) if c0 != c => {
                        conflicts.push(format!("{} (j = {}) vs {} (j = {})", WPoly::monomial(m.clone(), c0.clone()), j0 + 1, WPoly::monomial(m.clone(), c.clone()), j + 1));
                    }
                    Some(_) => {}
                }
            }
        }
        let t_inc = WPoly::from_terms(nz, merged.into_iter().map(|(m, (c, _))| (m, c)));

        let contraction = engine.contraction(&(&t + &t_inc), &splits, &inner)?;
        let (t_red, absorbed) = if cfg.absorb { absorb_r_multiples(&t_inc, r) } else { (t_inc.clone(), vec![]) };
        let sum = &t + &t_red;
        let cap = *degree_cap.get_or_insert_with(|| 2 + r.poly().degree().max(sum.degree()));
        t = sum.truncate_degree(cap);
        absorbed_all.extend(absorbed.iter().cloned());
        residual_last = residual.clone();
        stages.push(stage_record(n, ks, splits, &t_inc, &residual, residual_verdict, absorbed, &t, contraction, compatibility, conflicts));
    }
    warnings.push(format!("no certificate within {} stages", cfg.max_stages));
    Ok(finish(ConstructionStatus::Exhausted, &t, None, stages, None, None, warnings, &residual_last, absorbed_all))
}

#[allow(clippy::too_many_arguments)]
fn stage_record(
    index: usize,
    k_search: KSearchOutcome,
    splits: Vec<JSplit>,
    t_inc: &WPoly,
    residual: &WPoly,
    residual_verdict: Option<DominanceVerdict>,
    absorbed: Vec<AbsorbedTerm>,
    t_after: &WPoly,
    contraction: Option<f64>,
    compatibility: Vec<Compatibility>,
    conflicts: Vec<String>,
) -> StageReport {
    StageReport {
        index,
        k_search,
        splits,
        t_increment: t_inc.clone(),
        t_increment_real: real_expr(t_inc),
        residual: residual.clone(),
        residual_verdict,
        absorbed,
        t_after: t_after.clone(),
        t_after_real: real_expr(t_after),
        contraction,
        compatibility,
        conflicts,
    }
}

/// Re-runs verification of a certified report from its stored `K`, `T`, radius and seed.
pub fn replay_verification(r: &DefiningFunction, report: &ConstructionReport) -> Option<Verification> {
    let v = report.verification.as_ref()?;
    let shell = BoundaryShell { points: v.shell.points.clone(), ..v.shell.clone() };
    let shell = if shell.points.is_empty() {
        sample_boundary(r, v.shell.radius, v.shell.count, v.shell.seed).ok()?
    } else {
        shell
    };
    Some(verify_candidate(r, &report.final_candidate.t, v.k, &shell, report.config.tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn df(p: WPoly) -> DefiningFunction {
        DefiningFunction::new(p).unwrap()
    }

    #[test]
    fn solve_stage_examples() {
        let (t, res) = solve_stage(&WPoly::one(1), 0);
        assert_eq!(t, WPoly::im_z(1, 0).scale_int(-4));
        assert!(res.is_zero());
        let i = GaussianRational::i();
        let s = &(&WPoly::var(1, Var::Z(0)).scale(&i).scale_int(4) - &WPoly::var(1, Var::W).scale(&i).scale_int(8))
            - &WPoly::var(1, Var::Wbar).scale(&i).scale_int(8);
        let (t, res) = solve_stage(&s, 0);
        let x = WPoly::re_z(1, 0);
        let y = WPoly::im_z(1, 0);
        let want = &(&y.pow(2).scale_int(8) - &x.pow(2).scale_int(8)) + &(&x * &WPoly::re_w(1)).scale_int(64);
        assert_eq!(t, want);
        assert!(res.is_zero());
        assert_eq!(solve_stage(&WPoly::zero(1), 0), (WPoly::zero(1), WPoly::zero(1)));
    }

    #[test]
    fn stage_exactness_with_nonzero_residual() {
        let s = &WPoly::var(1, Var::Zbar(0)) + &WPoly::var(1, Var::W).scale_int(3);
        let (t, res) = solve_stage(&s, 0);
        let two_i = GaussianRational::imag(BigRational::from_integer(2.into()));
        assert!(!res.is_zero());
        assert!((&(&t.deriv(Var::Z(0)) - &s.scale(&two_i)) - &res).is_zero());
    }

    #[test]
    fn absorption_examples() {
        let r8 = df(fixtures::r_a(8));
        let x = WPoly::re_z(1, 0);
        let y = WPoly::im_z(1, 0);
        let t = &(&y.pow(2).scale_int(8) - &x.pow(2).scale_int(8)) + &(&x * &WPoly::re_w(1)).scale_int(64);
        let (kept, absorbed) = absorb_r_multiples(&t, &r8);
        assert_eq!(kept, &y.pow(2).scale_int(8) - &x.pow(2).scale_int(8));
        assert_eq!(absorbed.len(), 1);
        assert_eq!(absorbed[0].factor, "16");
        let t = y.scale_int(-4);
        assert_eq!(absorb_r_multiples(&t, &r8).0, t);
        assert_eq!(absorb_r_multiples(&WPoly::zero(1), &r8), (WPoly::zero(1), vec![]));
    }

    #[test]
    fn shortcut_applicability() {
        assert!(strong_psc_shortcut(&df(fixtures::sphere_model(1))).is_some());
        assert!(strong_psc_shortcut(&df(fixtures::r_a(10))).is_none());
        assert!(strong_psc_shortcut(&df(WPoly::im_w(1))).is_none());
    }

    #[test]
    fn levi_flat_accepts_k_one() {
        let r = df(WPoly::im_w(1));
        let shell = sample_boundary(&r, 0.25, 200, 1).unwrap();
        let ks = k_search(&r, &WPoly::zero(1), &[shell], 20, 1e-9);
        assert_eq!(ks.k, Some(1));
    }

    #[test]
    fn sphere_model_ladder() {
        let r = df(fixtures::sphere_model(1));
        let shell = sample_boundary(&r, 0.25, 1000, 1).unwrap();
        let ks = k_search(&r, &WPoly::zero(1), &[shell], 20, 1e-9);
        assert!(ks.k.unwrap() <= 16);
    }
}
