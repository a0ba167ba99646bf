//! Three-valued dominance of `|P|²` by the Levi form (optionally plus `|r_z|²`)
//! near the origin on the boundary, and the per-monomial S/E split.
//!
//! A verdict is reached in two phases. The exact phase restricts the bound to
//! the boundary to second order and looks for `Q ⪰ εI` with a dyadic `ε`; when
//! that holds every `P` vanishing at the origin is dominated. The numeric phase
//! evaluates the ratio `|P|²/B` along monomial curves `z_j = ζ_j t^{p_j}`,
//! `Re w = η t^q` at dyadic `t`, refines the most promising direction by compass
//! search, snaps it to small rationals and replays it to confirm an escape.

use std::fmt;

use num::complex::Complex64;
use num::{BigRational, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::boundary::{halton_points, random_unit_vectors, Projector};
use crate::gaussian::fmt_rational;
use crate::geometry::{gradient_z_j_sq, levi_form, DefiningFunction};
use crate::linalg::rational_is_psd;
use crate::poly::{CPoint, CompiledPoly, WPoly};
use crate::real_poly::to_real_coords;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    /// `L_r + |r_z|²`
    #[serde(rename = "levi+grad")]
    LeviPlusGradSq,
    /// `L_r`
    #[serde(rename = "levi")]
    LeviOnly,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::LeviPlusGradSq => "levi+grad",
            BoundKind::LeviOnly => "levi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Dominated,
    NotDominated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DominanceError {
    #[error("no probe point could be projected onto the boundary")]
    DegenerateProbes,
    #[error("z-index {index} out of range for {nz} z-variables")]
    IndexOutOfRange { index: usize, nz: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `P ≡ 0`.
    ZeroPolynomial,
    /// The bound is positive at the origin.
    PositiveAtOrigin { value: String },
    /// `P(0) = 0` and the bound restricted to the boundary is `≥ ε|X|²` to second order.
    QuadraticLowerBound { epsilon: String },
}

impl Certificate {
    pub fn describe(&self) -> String {
        match self {
            Certificate::ZeroPolynomial => "P is identically zero".into(),
            Certificate::PositiveAtOrigin { value } => format!("bound equals {value} > 0 at the origin"),
            Certificate::QuadraticLowerBound { epsilon } => {
                format!("P(0) = 0 and the bound's boundary quadratic form minus {epsilon}·I is positive semidefinite")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSample {
    pub t: f64,
    pub ratio: Option<f64>,
}

/// A monomial curve along which `|P|²/B` escapes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// `p_1, …, p_{n−1}, q`.
    pub exponents: Vec<u32>,
    /// `(Re ζ_1, Im ζ_1, …, η)`, scaled so the largest component has modulus 1.
    pub direction: Vec<f64>,
    /// The same direction as exact rationals when it was snapped.
    pub direction_exact: Option<Vec<String>>,
    pub curve: String,
    pub samples: Vec<WitnessSample>,
}

impl Witness {
    /// Boundary point on the curve at parameter `t`.
    pub fn point(&self, proj: &Projector, t: f64) -> Option<CPoint> {
        curve_point(proj, &self.exponents, &self.direction, t).map(|(p, _)| p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceVerdict {
    pub status: Status,
    pub bound: BoundKind,
    /// Estimated `C` with a 2× safety margin; present when dominated.
    pub constant: Option<f64>,
    pub certificate: Option<Certificate>,
    pub witness: Option<Witness>,
    /// Largest ratio seen at each probe parameter `t`.
    pub shell_sup: Vec<WitnessSample>,
}

impl DominanceVerdict {
    pub fn is_dominated(&self) -> bool {
        self.status == Status::Dominated
    }
}

/// Directions, exponents and the dyadic parameter schedule used for probing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeFamily {
    pub max_exponent: u32,
    pub rays: Vec<Vec<f64>>,
    pub shells: Vec<f64>,
    pub seed: u64,
}

impl ProbeFamily {
    /// 16 grid directions plus 32 seeded Gaussian ones in `(x_j, y_j, u)`-space, exponents ≤ 4, `t = 2⁻³ … 2⁻¹⁶`.
    pub fn standard(nz: usize, seed: u64) -> Self {
        let dim = 2 * nz + 1;
        let mut rays = grid_directions(dim);
        rays.extend(random_unit_vectors(dim, 32, seed ^ 0x9e37_79b9_7f4a_7c15));
        ProbeFamily { max_exponent: 4, rays, shells: (3..=16).map(|k| 0.5f64.powi(k)).collect(), seed }
    }

    pub fn samples_per_shell(&self, nz: usize) -> usize {
        self.rays.len() * (self.max_exponent as usize).pow(nz as u32 + 1)
    }

    fn exponent_sets(&self, nz: usize) -> Vec<Vec<u32>> {
        let m = self.max_exponent.max(1);
        let mut out = vec![vec![]];
        for _ in 0..=nz {
            out = out.into_iter().flat_map(|e: Vec<u32>| (1..=m).map(move |k| [e.clone(), vec![k]].concat())).collect();
        }
        out
    }
}

fn grid_directions(dim: usize) -> Vec<Vec<f64>> {
    if dim == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        return (0..16)
            .map(|i| {
                let y = 1.0 - (i as f64 + 0.5) * 2.0 / 16.0;
                let rad = (1.0 - y * y).sqrt();
                let phi = golden * i as f64;
                vec![rad * phi.cos(), y, rad * phi.sin()]
            })
            .collect();
    }
    let mut out = Vec::new();
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        out.push(e);
    }
    let extra = 16usize.saturating_sub(dim);
    for h in halton_points(dim, extra, 0) {
        let v: Vec<f64> = h.iter().map(|x| 2.0 * x - 1.0).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(v.into_iter().map(|x| x / n).collect());
    }
    out
}

/// The bound polynomial: `L(v_j) (+ |r_{z_j}|²)`, summed over all `j` when `j` is `None`.
pub fn bound_poly(r: &DefiningFunction, kind: BoundKind, j: Option<usize>) -> WPoly {
    let idx: Vec<usize> = match j {
        Some(j) => vec![j],
        None => (0..r.nz()).collect(),
    };
    idx.into_iter().fold(WPoly::zero(r.nz()), |acc, j| {
        let mut b = &acc + &levi_form(r, j).expect("index in range");
        if kind == BoundKind::LeviPlusGradSq {
            b = &b + &gradient_z_j_sq(r, j);
        }
        b
    })
}

/// Second-order form of a real polynomial restricted to `{r = 0}` in the coordinates `X = (x_j, y_j, u)`.
///
/// Returns `(B(0), linear part in X, Q)` where `Q` is symmetric with `B|_{r=0} = B(0) + ℓ·X + XᵀQX + O(|X|³)`
/// when the linear part vanishes.
fn restricted_quadratic(b: &WPoly, r: &DefiningFunction) -> (BigRational, Vec<BigRational>, Vec<Vec<BigRational>>) {
    let nz = r.nz();
    let d = 2 * nz + 1;
    let nvars = d + 1;
    let (bre, _) = to_real_coords(b);
    let (fre, _) = to_real_coords(&r.higher_order_part());
    let unit = |k: usize| -> Vec<u32> {
        let mut e = vec![0; nvars];
        e[k] = 1;
        e
    };
    let b0 = bre.coeff(&vec![0; nvars]);
    let lin: Vec<BigRational> = (0..d).map(|k| bre.coeff(&unit(k))).collect();
    let beta_v = bre.coeff(&unit(d));
    let two = BigRational::from_integer(2.into());
    let mut q = vec![vec![BigRational::zero(); d]; d];
    for k in 0..d {
        for l in k..d {
            let mut e = vec![0; nvars];
            e[k] += 1;
            e[l] += 1;
            let c = bre.coeff(&e) - &beta_v * fre.coeff(&e);
            if k == l {
                q[k][k] = c;
            } else {
                q[k][l] = &c / &two;
                q[l][k] = &c / &two;
            }
        }
    }
    (b0, lin, q)
}

/// Largest dyadic `ε ∈ {2⁻¹, …, 2⁻⁸}` with `Q − εI ⪰ 0`.
fn dyadic_margin(q: &[Vec<BigRational>]) -> Option<BigRational> {
    (1..=8).map(|k| BigRational::new(1.into(), num::BigInt::from(1u64 << k))).find(|eps| {
        let shifted: Vec<Vec<BigRational>> = q
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, x)| if i == j { x - eps } else { x.clone() }).collect())
            .collect();
        rational_is_psd(&shifted)
    })
}

fn curve_point(proj: &Projector, exps: &[u32], dir: &[f64], t: f64) -> Option<(CPoint, f64)> {
    let nz = proj.nz();
    let z: Vec<Complex64> =
        (0..nz).map(|j| Complex64::new(dir[2 * j], dir[2 * j + 1]) * t.powi(exps[j] as i32)).collect();
    let u = dir[2 * nz] * t.powi(exps[nz] as i32);
    proj.project(&z, u).ok()
}

fn curve_text(nz: usize, exps: &[u32], exact: Option<&[String]>, dir: &[f64]) -> String {
    let comp = |k: usize| exact.map(|e| e[k].clone()).unwrap_or_else(|| format!("{:.6}", dir[k]));
    let is_zero = |s: &str| s.parse::<f64>().map(|v| v == 0.0).unwrap_or(false) || s == "0";
    let term = |c: String, p: u32| {
        let t = if p == 1 { "t".to_string() } else { format!("t^{p}") };
        if c == "1" { t } else { format!("{c}·{t}") }
    };
    let mut parts = Vec::new();
    for j in 0..nz {
        let name = if nz == 1 { "z".to_string() } else { format!("z{}", j + 1) };
        let (re, im) = (comp(2 * j), comp(2 * j + 1));
        let c = match (is_zero(&re), is_zero(&im)) {
            (_, true) => re,
            (true, false) => format!("({im})i"),
            _ => format!("({re} + ({im})i)"),
        };
        let c = if c.contains('/') && !c.starts_with('(') { format!("({c})") } else { c };
        parts.push(format!("{name} = {}", term(c, exps[j])));
    }
    let u = comp(2 * nz);
    let u = if u.contains('/') { format!("({u})") } else { u };
    parts.push(format!("Re w = {}", term(u, exps[nz])));
    parts.join(", ")
}

/// Best rational approximation with denominator ≤ 16.
fn snap(x: f64) -> BigRational {
    let mut best = (f64::INFINITY, 0i64, 1i64);
    for q in 1..=16i64 {
        let p = (x * q as f64).round() as i64;
        let err = (x - p as f64 / q as f64).abs();
        if err < best.0 - 1e-15 {
            best = (err, p, q);
        }
    }
    BigRational::new(best.1.into(), best.2.into())
}

/// Whether a ratio sequence (ordered by decreasing `t`) escapes: at least four
/// strictly increasing trailing values with at least a twofold gain over the last three steps.
pub fn escapes(ratios: &[Option<f64>]) -> bool {
    let vals: Vec<f64> = ratios.iter().rev().map_while(|r| *r).collect();
    if vals.len() < 4 {
        return false;
    }
    // vals[0] is the smallest t.
    let run = 1 + vals.windows(2).take_while(|w| w[0] > w[1]).count();
    if run < 4 {
        return false;
    }
    let (last, earlier) = (vals[0], vals[3]);
    if earlier == 0.0 {
        return last > 0.0;
    }
    last.is_infinite() || last / earlier >= 2.0
}

struct ProbePoint {
    p: CPoint,
    b: f64,
    b_scale: f64,
}

/// Bound values along a probe family, evaluated once and reused for many `P`.
pub struct Prober {
    nz: usize,
    kind: BoundKind,
    bound: WPoly,
    b: CompiledPoly,
    proj: Projector,
    family: ProbeFamily,
    b0: BigRational,
    lin_zero: bool,
    margin: Option<BigRational>,
    curves: Vec<(Vec<u32>, Vec<f64>)>,
    /// `points[c][k]` is curve `c` at `family.shells[k]`.
    points: Vec<Vec<Option<ProbePoint>>>,
}

const P_NOISE: f64 = 1e-13;
const B_NOISE: f64 = 1e-13;

impl Prober {
    /// Prober for `L(v_j)(+|r_{z_j}|²)`, or the sum over all `j` when `j` is `None`.
    pub fn new(r: &DefiningFunction, kind: BoundKind, j: Option<usize>, family: &ProbeFamily) -> Result<Self, DominanceError> {
        if let Some(j) = j {
            if j >= r.nz() {
                return Err(DominanceError::IndexOutOfRange { index: j, nz: r.nz() });
            }
        }
        let nz = r.nz();
        let bound = bound_poly(r, kind, j);
        let b = bound.compile();
        let proj = Projector::new(r);
        let (b0, lin, q) = restricted_quadratic(&bound, r);
        let lin_zero = lin.iter().all(Zero::is_zero);
        let margin = if b0.is_zero() && lin_zero { dyadic_margin(&q) } else { None };
        let mut curves = Vec::new();
        for e in family.exponent_sets(nz) {
            for d in &family.rays {
                curves.push((e.clone(), d.clone()));
            }
        }
        let mut any = false;
        let points: Vec<Vec<Option<ProbePoint>>> = curves
            .iter()
            .map(|(e, d)| {
                family
                    .shells
                    .iter()
                    .map(|&t| {
                        curve_point(&proj, e, d, t).map(|(p, _)| {
                            any = true;
                            let (bv, bs) = b.eval_with_scale(&p);
                            ProbePoint { p, b: bv.re, b_scale: bs }
                        })
                    })
                    .collect()
            })
            .collect();
        if !any {
            return Err(DominanceError::DegenerateProbes);
        }
        Ok(Prober { nz, kind, bound, b, proj, family: family.clone(), b0, lin_zero, margin, curves, points })
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn bound(&self) -> &WPoly {
        &self.bound
    }

    pub fn projector(&self) -> &Projector {
        &self.proj
    }

    fn ratio(pc: &[CompiledPoly], p: &CPoint, b: f64, b_scale: f64) -> f64 {
        let mut psq = 0.0;
        let mut pscale = 0.0;
        for c in pc {
            let (v, s) = c.eval_with_scale(p);
            psq += v.norm_sqr();
            pscale += s * s;
        }
        if psq.sqrt() <= P_NOISE * pscale.sqrt() || psq == 0.0 {
            return 0.0;
        }
        if b <= B_NOISE * b_scale {
            return f64::INFINITY;
        }
        psq / b
    }

    fn ratio_at(&self, pc: &[CompiledPoly], exps: &[u32], dir: &[f64], t: f64) -> Option<f64> {
        let (p, _) = curve_point(&self.proj, exps, dir, t)?;
        let (bv, bs) = self.b.eval_with_scale(&p);
        Some(Self::ratio(pc, &p, bv.re, bs))
    }

    fn replay(&self, pc: &[CompiledPoly], exps: &[u32], dir: &[f64]) -> Vec<Option<f64>> {
        self.family.shells.iter().map(|&t| self.ratio_at(pc, exps, dir, t)).collect()
    }

    fn witness(&self, exps: &[u32], dir: &[f64], exact: Option<Vec<String>>, ratios: &[Option<f64>]) -> Witness {
        Witness {
            exponents: exps.to_vec(),
            direction: dir.to_vec(),
            curve: curve_text(self.nz, exps, exact.as_deref(), dir),
            direction_exact: exact,
            samples: self.family.shells.iter().zip(ratios).map(|(&t, &ratio)| WitnessSample { t, ratio }).collect(),
        }
    }

    /// Compass search maximizing the ratio at successively smaller `t`.
    fn refine(&self, pc: &[CompiledPoly], exps: &[u32], start: &[f64]) -> Vec<f64> {
        let normalize = |v: &mut Vec<f64>| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
        };
        let mut dir = start.to_vec();
        normalize(&mut dir);
        let levels = [6, 9, 12, 16];
        for (li, &k) in levels.iter().enumerate() {
            let t = 0.5f64.powi(k);
            let score = |d: &[f64]| self.ratio_at(pc, exps, d, t).unwrap_or(-1.0);
            let mut best = score(&dir);
            let mut step = if li == 0 { 0.1 } else { 0.01 };
            let mut evals = 0;
            while step > 1e-7 && evals < 2000 {
                let mut improved = false;
                for axis in 0..dir.len() {
                    for sign in [1.0, -1.0] {
                        let mut cand = dir.clone();
                        cand[axis] += sign * step;
                        normalize(&mut cand);
                        let s = score(&cand);
                        evals += 1;
                        if s > best && s.is_finite() {
                            best = s;
                            dir = cand;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
        }
        dir
    }

    fn certificate(&self, comps: &[WPoly]) -> Option<Certificate> {
        if comps.iter().all(WPoly::is_zero) {
            return Some(Certificate::ZeroPolynomial);
        }
        if self.b0.is_positive() {
            return Some(Certificate::PositiveAtOrigin { value: fmt_rational(&self.b0) });
        }
        let vanish = comps.iter().all(|p| p.constant_term().is_zero());
        match (&self.margin, vanish && self.b0.is_zero() && self.lin_zero) {
            (Some(eps), true) => Some(Certificate::QuadraticLowerBound { epsilon: fmt_rational(eps) }),
            _ => None,
        }
    }

    /// Verdict for `Σ_k |P_k|²` against the bound.
    pub fn check_components(&self, comps: &[WPoly]) -> DominanceVerdict {
        let certificate = self.certificate(comps);
        if certificate == Some(Certificate::ZeroPolynomial) {
            return DominanceVerdict {
                status: Status::Dominated,
                bound: self.kind,
                constant: Some(0.0),
                certificate,
                witness: None,
                shell_sup: vec![],
            };
        }
        let pc: Vec<CompiledPoly> = comps.iter().map(WPoly::compile).collect();
        let ratios: Vec<Vec<Option<f64>>> = self
            .points
            .iter()
            .map(|row| row.iter().map(|pp| pp.as_ref().map(|pp| Self::ratio(&pc, &pp.p, pp.b, pp.b_scale))).collect())
            .collect();
        let nshell = self.family.shells.len();
        let shell_sup: Vec<WitnessSample> = (0..nshell)
            .map(|k| WitnessSample {
                t: self.family.shells[k],
                ratio: ratios.iter().filter_map(|row| row[k]).reduce(f64::max),
            })
            .collect();
        let global_sup = shell_sup.iter().filter_map(|s| s.ratio).fold(0.0f64, f64::max);

        if let Some(cert) = certificate {
            let constant = if global_sup.is_finite() { Some(2.0 * global_sup) } else { None };
            return DominanceVerdict {
                status: Status::Dominated,
                bound: self.kind,
                constant,
                certificate: Some(cert),
                witness: None,
                shell_sup,
            };
        }

        let not_dominated = |w: Witness| DominanceVerdict {
            status: Status::NotDominated,
            bound: self.kind,
            constant: None,
            certificate: None,
            witness: Some(w),
            shell_sup: shell_sup.clone(),
        };

        for (c, row) in ratios.iter().enumerate() {
            if escapes(row) {
                let (e, d) = &self.curves[c];
                return not_dominated(self.witness(e, d, None, row));
            }
        }

        // Refine the curves with the largest ratio at the smallest t.
        let mut order: Vec<usize> = (0..self.curves.len()).filter(|&c| ratios[c][nshell - 1].is_some()).collect();
        let key = |c: usize| ratios[c][nshell - 1].unwrap_or(0.0);
        order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
        let mut tried_exps: Vec<Vec<u32>> = Vec::new();
        let mut tried = 0;
        for c in order {
            if tried >= 4 {
                break;
            }
            let (e, d) = &self.curves[c];
            if key(c) == 0.0 || tried_exps.iter().filter(|x| *x == e).count() >= 2 {
                continue;
            }
            tried_exps.push(e.clone());
            tried += 1;
            let refined = self.refine(&pc, e, d);
            let maxc = refined.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let exact: Vec<BigRational> = refined.iter().map(|x| snap(x / maxc)).collect();
            let snapped: Vec<f64> = exact.iter().map(|q| q.to_f64().unwrap_or(0.0)).collect();
            let replay = self.replay(&pc, e, &snapped);
            if escapes(&replay) {
                let names = exact.iter().map(fmt_rational).collect();
                return not_dominated(self.witness(e, &snapped, Some(names), &replay));
            }
        }

        let sups: Vec<f64> = shell_sup.iter().filter_map(|s| s.ratio).collect();
        let stable = sups.len() >= 2 && {
            let (last, prev) = (sups[sups.len() - 1], sups[sups.len() - 2]);
            last.is_finite() && prev.is_finite() && last <= 1.1 * prev
        };
        if stable && global_sup.is_finite() {
            DominanceVerdict {
                status: Status::Dominated,
                bound: self.kind,
                constant: Some(2.0 * global_sup),
                certificate: None,
                witness: None,
                shell_sup,
            }
        } else {
            DominanceVerdict { status: Status::Unknown, bound: self.kind, constant: None, certificate: None, witness: None, shell_sup }
        }
    }

    pub fn check(&self, p: &WPoly) -> DominanceVerdict {
        self.check_components(std::slice::from_ref(p))
    }

    /// Ratio samples along a stored witness, recomputed from scratch.
    pub fn replay_witness(&self, comps: &[WPoly], w: &Witness) -> Vec<Option<f64>> {
        let pc: Vec<CompiledPoly> = comps.iter().map(WPoly::compile).collect();
        self.replay(&pc, &w.exponents, &w.direction)
    }

    /// Largest `|P|²/B` over all probe points, for re-testing a stored constant.
    pub fn max_ratio(&self, comps: &[WPoly]) -> f64 {
        let pc: Vec<CompiledPoly> = comps.iter().map(WPoly::compile).collect();
        self.points
            .iter()
            .flatten()
            .flatten()
            .map(|pp| Self::ratio(&pc, &pp.p, pp.b, pp.b_scale))
            .fold(0.0, f64::max)
    }
}

/// `|P|² ≤ C·bound` near the origin on `{r = 0}`, decided three-valuedly.
pub fn dominance_check(p: &WPoly, bound: BoundKind, r: &DefiningFunction, probes: &ProbeFamily) -> Result<DominanceVerdict, DominanceError> {
    Ok(Prober::new(r, bound, None, probes)?.check(p))
}

/// Whether `Σ|r_{z_j}|² ≤ C·L_r`; when it holds, a multiplier exists.
pub fn levi_dominance_gate(r: &DefiningFunction, probes: &ProbeFamily) -> Result<DominanceVerdict, DominanceError> {
    let comps: Vec<WPoly> = (0..r.nz()).map(|j| r.r_z(j)).collect();
    Ok(Prober::new(r, BoundKind::LeviOnly, None, probes)?.check_components(&comps))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermVerdict {
    pub term: String,
    pub status: Status,
    /// Kept in S only because its verdict was Unknown.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Split {
    #[serde(serialize_with = "crate::ser_display")]
    pub s: WPoly,
    #[serde(serialize_with = "crate::ser_display")]
    pub e: WPoly,
    pub bound: BoundKind,
    pub terms: Vec<TermVerdict>,
}

/// Splits `g` monomial by monomial into a significant part `S` and an error part `E`.
pub fn split_s_e(g: &WPoly, prober: &Prober) -> Split {
    let nz = g.nz();
    let mut s = WPoly::zero(nz);
    let mut e = WPoly::zero(nz);
    let mut terms = Vec::new();
    for t in g.monomial_terms() {
        let v = prober.check(&t);
        match v.status {
            Status::Dominated => e = &e + &t,
            _ => s = &s + &t,
        }
        terms.push(TermVerdict { term: t.to_string(), status: v.status, flagged: v.status == Status::Unknown });
    }
    Split { s, e, bound: prober.kind(), terms }
}

/// Convenience wrapper building a `LeviPlusGradSq` prober for a single split.
pub fn split_s_e_default(g: &WPoly, r: &DefiningFunction, probes: &ProbeFamily) -> Result<Split, DominanceError> {
    Ok(split_s_e(g, &Prober::new(r, BoundKind::LeviPlusGradSq, None, probes)?))
}
