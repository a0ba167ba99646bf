//! Numeric checks on boundary shells: PSD of complex Hessians, the
//! determinant identity `H^j_ρ = 2Kh·L(v_j) + H^j_{(1+T)r}`, the pointwise
//! necessary inequalities for a plurisubharmonic `ρ = r·h`, and a Levi scan.

use num::complex::Complex64;
use num::BigRational;
use serde::Serialize;

use crate::boundary::Projector;
pub use crate::boundary::{sample_boundary, BoundaryShell, SampleError};
use crate::dominance::{BoundKind, DominanceError, DominanceVerdict, ProbeFamily};
use crate::gaussian::GaussianRational;
use crate::geometry::{hessian_entry, hessian_minor_det, levi_form, levi_matrix, DefiningFunction};
use crate::linalg::hermitian_min_eigenvalue;
use crate::poly::{CPoint, CompiledPoly, Var, WPoly};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdCheckResult {
    pub passed: bool,
    pub tolerance: f64,
    pub points: usize,
    /// Real coordinates of the point where the smallest checked quantity occurred.
    pub worst_point: Vec<f64>,
    pub worst_quantity: String,
    /// Minima of the diagonal entries `f_{z_j z̄_j}` followed by `f_{w w̄}`.
    pub diagonal_min: Vec<f64>,
    /// Minima of the `2×2` minors `H^j`.
    pub minor_min: Vec<f64>,
    pub eigen_min: f64,
}

impl PsdCheckResult {
    pub fn ww_min(&self) -> f64 {
        *self.diagonal_min.last().expect("at least one slot")
    }

    pub fn worst_value(&self) -> f64 {
        self.diagonal_min.iter().chain(&self.minor_min).copied().fold(self.eigen_min, f64::min)
    }
}

/// Running minima of Hessian quantities over a set of points.
#[derive(Debug, Clone)]
pub(crate) struct PsdAccumulator {
    n: usize,
    tol: f64,
    points: usize,
    diag: Vec<f64>,
    minor: Vec<f64>,
    eig: f64,
    worst: f64,
    worst_point: Vec<f64>,
    worst_quantity: String,
    /// Coordinate names per slot, the last one being the normal direction.
    slots: Vec<String>,
}

impl PsdAccumulator {
    /// Slots named `z1 … w` (or `z, w`).
    pub(crate) fn new(n: usize, tol: f64) -> Self {
        let mut slots: Vec<String> = if n == 2 { vec!["z".into()] } else { (1..n).map(|j| format!("z{j}")).collect() };
        slots.push("w".into());
        Self::with_slots(slots, tol, true)
    }

    /// Slots named `x1 … y` (or `x, y`).
    pub(crate) fn new_real(n: usize, tol: f64) -> Self {
        Self::with_slots(crate::real_poly::RealPoly::convex_names(n), tol, false)
    }

    fn with_slots(names: Vec<String>, tol: f64, complex: bool) -> Self {
        let n = names.len();
        let slots = names.into_iter().map(|s| if complex { format!("{s} {s}bar") } else { format!("{s}{s}") }).collect();
        PsdAccumulator {
            slots,
            n,
            tol,
            points: 0,
            diag: vec![f64::INFINITY; n],
            minor: vec![f64::INFINITY; n - 1],
            eig: f64::INFINITY,
            worst: f64::INFINITY,
            worst_point: vec![],
            worst_quantity: String::new(),
        }
    }

    fn note(&mut self, v: f64, what: impl FnOnce(&[String]) -> String, coords: &[f64]) {
        if v < self.worst {
            self.worst = v;
            self.worst_quantity = what(&self.slots);
            self.worst_point = coords.to_vec();
        }
    }

    /// Adds one Hermitian matrix (last slot is the normal direction).
    pub(crate) fn push(&mut self, m: &[Vec<Complex64>], coords: &[f64]) {
        let n = self.n;
        self.points += 1;
        for a in 0..n {
            let d = m[a][a].re;
            self.diag[a] = self.diag[a].min(d);
            self.note(d, |s| format!("f_{{{}}}", s[a]), coords);
        }
        for j in 0..n - 1 {
            let det = m[j][j].re * m[n - 1][n - 1].re - m[j][n - 1].norm_sqr();
            self.minor[j] = self.minor[j].min(det);
            self.note(det, |s| format!("det of the ({}, {}) minor", s[j], s[n - 1]), coords);
        }
        let e = hermitian_min_eigenvalue(m);
        self.eig = self.eig.min(e);
        self.note(e, |_| "least eigenvalue".into(), coords);
    }

    /// Whether every quantity pushed so far is `≥ −tol`.
    pub(crate) fn ok(&self) -> bool {
        self.worst >= -self.tol
    }

    pub(crate) fn finish(self) -> PsdCheckResult {
        PsdCheckResult {
            passed: self.ok(),
            tolerance: self.tol,
            points: self.points,
            worst_point: self.worst_point,
            worst_quantity: self.worst_quantity,
            diagonal_min: self.diag,
            minor_min: self.minor,
            eigen_min: self.eig,
        }
    }
}

/// Compiled upper triangle of a complex Hessian.
#[derive(Debug, Clone)]
pub struct CompiledHessian {
    n: usize,
    entries: Vec<Vec<CompiledPoly>>,
}

impl CompiledHessian {
    pub fn new(f: &WPoly) -> Self {
        let n = f.nz() + 1;
        CompiledHessian {
            n,
            entries: (0..n).map(|a| (a..n).map(|b| hessian_entry(f, a, b).compile()).collect()).collect(),
        }
    }

    pub fn eval(&self, p: &CPoint) -> Vec<Vec<Complex64>> {
        let n = self.n;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for a in 0..n {
            for b in a..n {
                let v = self.entries[a][b - a].eval(p);
                if a == b {
                    m[a][a] = Complex64::new(v.re, 0.0);
                } else {
                    m[a][b] = v;
                    m[b][a] = v.conj();
                }
            }
        }
        m
    }
}

/// Diagonal entries, all minors `H^j` and the least eigenvalue of `f`'s complex Hessian on the shell.
pub fn psd_check(f: &WPoly, shell: &BoundaryShell, tol: f64) -> PsdCheckResult {
    let h = CompiledHessian::new(f);
    let mut acc = PsdAccumulator::new(f.nz() + 1, tol);
    for p in &shell.points {
        acc.push(&h.eval(p), &p.real_coords());
    }
    acc.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub max_deviation: f64,
    pub max_lhs: f64,
    pub points: usize,
    /// `max_deviation ≤ 1e−8·(1 + max_lhs)`.
    pub passed: bool,
}

/// `1 + K r + T`.
pub fn multiplier(r: &DefiningFunction, k: &BigRational, t: &WPoly) -> WPoly {
    let kr = r.poly().scale(&GaussianRational::real(k.clone()));
    &(&WPoly::one(r.nz()) + &kr) + t
}

/// Evaluates both sides of `H^j_{(1+Kr+T)r} = 2Kh·L(v_j) + H^j_{(1+T)r}` for every `j`.
pub fn multiplier_identity_check(r: &DefiningFunction, k: &BigRational, t: &WPoly, shell: &BoundaryShell) -> IdentityCheck {
    let nz = r.nz();
    let h = multiplier(r, k, t);
    let rho = &h * r.poly();
    let p = &(&WPoly::one(nz) + t) * r.poly();
    let two_k = GaussianRational::real(k * BigRational::from_integer(2.into()));
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..nz {
        lhs.push(hessian_minor_det(&rho, j).expect("index in range").compile());
        let levi = levi_form(r, j).expect("index in range");
        let rj = &(&h * &levi).scale(&two_k) + &hessian_minor_det(&p, j).expect("index in range");
        rhs.push(rj.compile());
    }
    let mut max_dev: f64 = 0.0;
    let mut max_lhs: f64 = 0.0;
    for pt in &shell.points {
        for j in 0..nz {
            let l = lhs[j].eval(pt).re;
            let rv = rhs[j].eval(pt).re;
            max_dev = max_dev.max((l - rv).abs());
            max_lhs = max_lhs.max(l.abs());
        }
    }
    IdentityCheck { max_deviation: max_dev, max_lhs, points: shell.points.len(), passed: max_dev <= 1e-8 * (1.0 + max_lhs) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityResult {
    pub index: usize,
    pub j: usize,
    pub min_slack: f64,
    pub worst_point: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryReport {
    pub inequalities: Vec<InequalityResult>,
    /// Verdict for the deviation term of the log-derivative equation.
    pub log_derivative: DominanceVerdict,
    pub min_abs_h: f64,
    pub all_hold: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("multiplier h vanishes on the shell (min |h| = {min_abs_h:e})")]
    VanishingMultiplier { min_abs_h: f64 },
    #[error(transparent)]
    Dominance(#[from] DominanceError),
}

/// The four pointwise inequalities every plurisubharmonic `ρ = r·h` satisfies on the boundary,
/// plus a dominance verdict for `h_z r_w̄ + h r_{z w̄}` against `L + |r_z|²`.
pub fn necessary_conditions_check(
    r: &DefiningFunction,
    h: &WPoly,
    shell: &BoundaryShell,
    probes: &ProbeFamily,
    tol: f64,
) -> Result<NecessaryReport, VerifyError> {
    let nz = r.nz();
    let rho = h * r.poly();
    let hc = h.compile();
    let min_abs_h = shell.points.iter().map(|p| hc.eval(p).norm()).fold(f64::INFINITY, f64::min);
    if min_abs_h < 1e-12 {
        return Err(VerifyError::VanishingMultiplier { min_abs_h });
    }
    let r_w = r.r_w().compile();
    let rho_ww = hessian_entry(&rho, nz, nz).compile();
    let mut inequalities = Vec::new();
    for j in 0..nz {
        let rho_zz = hessian_entry(&rho, j, j).compile();
        let rho_zw = hessian_entry(&rho, j, nz).compile();
        let r_z = r.r_z(j).compile();
        let levi = levi_form(r, j).expect("index in range").compile();
        let mut acc: Vec<(f64, Vec<f64>)> = vec![(f64::INFINITY, vec![]); 4];
        for p in &shell.points {
            let rw2 = r_w.eval(p).norm_sqr();
            let rz2 = r_z.eval(p).norm_sqr();
            let hl = hc.eval(p).re * levi.eval(p).re;
            let zz = rho_zz.eval(p).re;
            let ww = rho_ww.eval(p).re;
            let zw2 = rho_zw.eval(p).norm_sqr();
            let slack = [
                2.0 * hl / rw2 + 2.0 * ww * rz2 / rw2 - zz,
                zz - ww * rz2 / (2.0 * rw2) + hl / rw2,
                zz - hl / (2.0 * rw2) + ww * rz2 / rw2,
                2.0 * ww * hl / rw2 + 2.0 * ww * ww * rz2 / rw2 - zw2,
            ];
            for (a, s) in acc.iter_mut().zip(slack) {
                if s < a.0 {
                    *a = (s, p.real_coords());
                }
            }
        }
        for (i, (s, pt)) in acc.into_iter().enumerate() {
            inequalities.push(InequalityResult { index: i + 1, j, min_slack: s, worst_point: pt, holds: s >= -tol });
        }
    }
    let comps: Vec<WPoly> = (0..nz)
        .map(|j| &(&h.deriv(Var::Z(j)) * &r.poly().deriv(Var::Wbar)) + &(h * &hessian_entry(r.poly(), j, nz)))
        .collect();
    let log_derivative = crate::dominance::Prober::new(r, BoundKind::LeviPlusGradSq, None, probes)?.check_components(&comps);
    let all_hold = inequalities.iter().all(|i| i.holds);
    Ok(NecessaryReport { inequalities, log_derivative, min_abs_h, all_hold })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeviScan {
    pub radius: f64,
    pub samples: usize,
    pub min_value: f64,
    pub negative: bool,
    pub witness: Option<Vec<f64>>,
}

/// Least eigenvalue of the Levi matrix over boundary points, stopping at the first clearly negative value.
pub fn levi_scan(r: &DefiningFunction, radius: f64, max_samples: usize, seed: u64) -> Result<LeviScan, SampleError> {
    let shell = sample_boundary(r, radius, max_samples, seed)?;
    let mat: Vec<Vec<CompiledPoly>> = levi_matrix(r).iter().map(|row| row.iter().map(WPoly::compile).collect()).collect();
    let nz = r.nz();
    let mut min_value = f64::INFINITY;
    for (i, p) in shell.points.iter().enumerate() {
        let mut scale: f64 = 0.0;
        let m: Vec<Vec<Complex64>> = (0..nz)
            .map(|a| {
                (0..nz)
                    .map(|b| {
                        let (v, s) = mat[a][b].eval_with_scale(p);
                        scale = scale.max(s);
                        v
                    })
                    .collect()
            })
            .collect();
        let e = hermitian_min_eigenvalue(&m);
        min_value = min_value.min(e);
        if e < -1e-10 * scale {
            return Ok(LeviScan { radius: shell.radius, samples: i + 1, min_value: e, negative: true, witness: Some(p.real_coords()) });
        }
    }
    Ok(LeviScan { radius: shell.radius, samples: shell.points.len(), min_value, negative: false, witness: None })
}

/// Real coordinates and `|r|` for each shell point, suitable for tabular export.
pub fn shell_table(r: &DefiningFunction, shell: &BoundaryShell) -> Vec<Vec<f64>> {
    let rc = r.poly().compile();
    shell
        .points
        .iter()
        .map(|p| {
            let mut row = p.real_coords();
            row.push(rc.eval(p).norm());
            row
        })
        .collect()
}

/// Boundary points along the curve `z_j = ζ_j t^{p_j}`, `Re w = η t^q` for the given `t` values.
pub fn curve_points(proj: &Projector, exponents: &[u32], direction: &[f64], ts: &[f64]) -> Vec<(CPoint, f64)> {
    let nz = proj.nz();
    ts.iter()
        .filter_map(|&t| {
            let z: Vec<Complex64> = (0..nz)
                .map(|j| Complex64::new(direction[2 * j], direction[2 * j + 1]) * t.powi(exponents[j] as i32))
                .collect();
            proj.project(&z, direction[2 * nz] * t.powi(exponents[nz] as i32)).ok()
        })
        .collect()
}
