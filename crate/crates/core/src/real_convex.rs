//! Convex domains `{r(x_1, …, x_{n−1}, y) < 0} ⊂ ℝⁿ` with `r = y + G`.
//!
//! The multiplier is fixed to `h = 1 + Kr + r_y`; only `K` is searched.

use num::{BigRational, One, Zero};
use serde::Serialize;

use crate::boundary::{cube_to_ball, halton_points};
use crate::real_poly::{CompiledRealPoly, RealPoly};
use crate::verify::{PsdAccumulator, PsdCheckResult};
use num::complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RealNormalFormError {
    #[error("expected at least one x-variable and y")]
    TooFewVariables,
    #[error("constant term must vanish, found {0}")]
    NonzeroConstant(String),
    #[error("linear part must be exactly y")]
    WrongLinearPart,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RealConvexError {
    #[error("Newton projection onto r = 0 failed at radius {radius:e}")]
    Projection { radius: f64 },
    #[error("tangential Hessian is negative ({value:e}) at {witness:?}")]
    NotConvex { witness: Vec<f64>, value: f64 },
}

/// A real defining function in normal form `y + G`, `G` of order ≥ 2; the last variable is `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealDefiningFunction {
    r: RealPoly,
}

impl RealDefiningFunction {
    pub fn new(r: RealPoly) -> Result<Self, RealNormalFormError> {
        let n = r.nvars();
        if n < 2 {
            return Err(RealNormalFormError::TooFewVariables);
        }
        let c0 = r.coeff(&vec![0; n]);
        if !c0.is_zero() {
            return Err(RealNormalFormError::NonzeroConstant(crate::gaussian::fmt_rational(&c0)));
        }
        for k in 0..n {
            let mut e = vec![0; n];
            e[k] = 1;
            let want = if k == n - 1 { BigRational::one() } else { BigRational::zero() };
            if r.coeff(&e) != want {
                return Err(RealNormalFormError::WrongLinearPart);
            }
        }
        Ok(RealDefiningFunction { r })
    }

    pub fn poly(&self) -> &RealPoly {
        &self.r
    }

    pub fn nvars(&self) -> usize {
        self.r.nvars()
    }

    pub fn r_y(&self) -> RealPoly {
        self.r.deriv(self.nvars() - 1)
    }

    /// `Hess_r(v_j, v_j)` with `v_j = r_y e_j − r_{x_j} e_y`.
    pub fn tangential_form(&self, j: usize) -> RealPoly {
        let n = self.nvars();
        let y = n - 1;
        let ry = self.r_y();
        let rx = self.r.deriv(j);
        let rxx = rx.deriv(j);
        let rxy = rx.deriv(y);
        let ryy = ry.deriv(y);
        let two = RealPoly::constant(n, BigRational::from_integer(2.into()));
        &(&(&rxx * &(&ry * &ry)) - &(&two * &(&rxy * &(&rx * &ry)))) + &(&ryy * &(&rx * &rx))
    }
}

impl std::fmt::Display for RealDefiningFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.r.to_string_with(&RealPoly::convex_names(self.nvars())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealShell {
    pub radius: f64,
    pub seed: u64,
    pub count: usize,
    #[serde(skip)]
    pub points: Vec<Vec<f64>>,
}

fn project(r: &CompiledRealPoly, ry: &CompiledRealPoly, x: &[f64]) -> Option<Vec<f64>> {
    let mut p = x.to_vec();
    p.push(0.0);
    let y = p.len() - 1;
    for _ in 0..80 {
        let g = r.eval(&p);
        if g == 0.0 {
            return Some(p);
        }
        let d = ry.eval(&p);
        if d.abs() < 1e-300 {
            return None;
        }
        let step = g / d;
        p[y] -= step;
        if step.abs() <= 4.0 * f64::EPSILON * p[y].abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (r.eval(&p).abs() <= 1e-12).then_some(p)
}

/// Low-discrepancy points of `{r = 0}` within `radius`, plus points along the x-axes.
pub fn sample_real_boundary(r: &RealDefiningFunction, radius: f64, count: usize, seed: u64) -> Result<RealShell, RealConvexError> {
    let n = r.nvars();
    let rc = r.poly().compile();
    let ryc = r.r_y().compile();
    let mut points = Vec::with_capacity(count);
    let inside = |p: &Vec<f64>| p.iter().map(|x| x * x).sum::<f64>().sqrt() <= radius;
    for h in halton_points(n - 1, count, seed) {
        let mut x: Vec<f64> = cube_to_ball(&h).iter().map(|v| v * radius).collect();
        let mut placed = false;
        for _ in 0..40 {
            let p = project(&rc, &ryc, &x).ok_or(RealConvexError::Projection { radius })?;
            if inside(&p) {
                points.push(p);
                placed = true;
                break;
            }
            x.iter_mut().for_each(|v| *v *= 0.9);
        }
        if !placed {
            return Err(RealConvexError::Projection { radius });
        }
    }
    for k in 0..n - 1 {
        for s in 3..=20 {
            for sign in [1.0, -1.0] {
                let mut x = vec![0.0; n - 1];
                x[k] = sign * 0.5f64.powi(s);
                if let Some(p) = project(&rc, &ryc, &x).filter(|p| inside(p)) {
                    points.push(p);
                }
            }
        }
    }
    Ok(RealShell { radius, seed, count: points.len(), points })
}

/// Compiled real Hessian.
struct RealHessian {
    n: usize,
    entries: Vec<Vec<CompiledRealPoly>>,
}

impl RealHessian {
    fn new(f: &RealPoly) -> Self {
        let n = f.nvars();
        RealHessian { n, entries: (0..n).map(|a| (0..n).map(|b| f.deriv(a).deriv(b).compile()).collect()).collect() }
    }

    fn eval(&self, p: &[f64]) -> Vec<Vec<f64>> {
        (0..self.n).map(|a| (0..self.n).map(|b| self.entries[a][b].eval(p)).collect()).collect()
    }
}

fn as_complex(m: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    m.iter().map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect()
}

/// Diagonal entries, the minors `[[f_{x_j x_j}, f_{x_j y}], [f_{y x_j}, f_{yy}]]` and the least eigenvalue on the shell.
pub fn real_hessian_check(f: &RealPoly, shell: &RealShell, tol: f64) -> PsdCheckResult {
    let h = RealHessian::new(f);
    let mut acc = PsdAccumulator::new_real(f.nvars(), tol);
    for p in &shell.points {
        acc.push(&as_complex(&h.eval(p)), p);
    }
    acc.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexReport {
    pub r: String,
    pub h: String,
    pub k: Option<u64>,
    pub tangential_min: f64,
    pub shell: RealShell,
    pub psd: PsdCheckResult,
    pub certified: bool,
}

/// `h = 1 + Kr + r_y` with the smallest ladder `K` making `r·h` convex on the shell.
pub fn convex_multiplier(r: &RealDefiningFunction, shell: &RealShell, max_exp: u32, tol: f64) -> Result<ConvexReport, RealConvexError> {
    let n = r.nvars();
    let mut tangential_min = f64::INFINITY;
    let forms: Vec<CompiledRealPoly> = (0..n - 1).map(|j| r.tangential_form(j).compile()).collect();
    for p in &shell.points {
        for f in &forms {
            let v = f.eval(p);
            tangential_min = tangential_min.min(v);
            if v < -tol {
                return Err(RealConvexError::NotConvex { witness: p.clone(), value: v });
            }
        }
    }
    let one = RealPoly::constant(n, BigRational::one());
    let base = r.poly() * &(&one + &r.r_y());
    let ha = RealHessian::new(&base);
    let hb = RealHessian::new(&r.poly().pow(2));
    let mats: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = shell.points.iter().map(|p| (ha.eval(p), hb.eval(p))).collect();
    let run = |k: f64, full: bool| {
        let mut acc = PsdAccumulator::new_real(n, tol);
        for ((a, b), p) in mats.iter().zip(&shell.points) {
            let m: Vec<Vec<f64>> = a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + k * y).collect()).collect();
            acc.push(&as_complex(&m), p);
            if !full && !acc.ok() {
                break;
            }
        }
        acc
    };
    let names = RealPoly::convex_names(n);
    let h_text = |k: Option<u64>| {
        let kr = match k {
            Some(k) => r.poly().scale(&BigRational::from_integer(k.into())),
            None => RealPoly::zero(n),
        };
        (&(&one + &kr) + &r.r_y()).to_string_with(&names)
    };
    for e in 0..=max_exp {
        let k = 1u64 << e;
        if run(k as f64, false).ok() {
            return Ok(ConvexReport {
                r: r.to_string(),
                h: h_text(Some(k)),
                k: Some(k),
                tangential_min,
                shell: shell.clone(),
                psd: run(k as f64, true).finish(),
                certified: true,
            });
        }
    }
    Ok(ConvexReport {
        r: r.to_string(),
        h: h_text(None),
        k: None,
        tangential_min,
        shell: shell.clone(),
        psd: run((1u64 << max_exp) as f64, true).finish(),
        certified: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealInequality {
    pub index: usize,
    pub j: usize,
    pub min_slack: f64,
    pub holds: bool,
}

/// The four pointwise inequalities of the complex setting with `r_z, r_w` replaced by
/// `r_{x_j}, r_y` and the same constants, which are carried over rather than re-derived.
pub fn real_necessary_conditions(r: &RealDefiningFunction, h: &RealPoly, shell: &RealShell, tol: f64) -> Vec<RealInequality> {
    let n = r.nvars();
    let y = n - 1;
    let rho = r.poly() * h;
    let hc = h.compile();
    let ry = r.r_y().compile();
    let ryy = rho.deriv(y).deriv(y).compile();
    let mut out = Vec::new();
    for j in 0..n - 1 {
        let rxx = rho.deriv(j).deriv(j).compile();
        let rxy = rho.deriv(j).deriv(y).compile();
        let rx = r.poly().deriv(j).compile();
        let lt = r.tangential_form(j).compile();
        let mut mins = [f64::INFINITY; 4];
        for p in &shell.points {
            let (ry2, rx2) = (ry.eval(p).powi(2), rx.eval(p).powi(2));
            let hl = hc.eval(p) * lt.eval(p);
            let (xx, yy, xy2) = (rxx.eval(p), ryy.eval(p), rxy.eval(p).powi(2));
            let s = [
                2.0 * hl / ry2 + 2.0 * yy * rx2 / ry2 - xx,
                xx - yy * rx2 / (2.0 * ry2) + hl / ry2,
                xx - hl / (2.0 * ry2) + yy * rx2 / ry2,
                2.0 * yy * hl / ry2 + 2.0 * yy * yy * rx2 / ry2 - xy2,
            ];
            for (m, v) in mins.iter_mut().zip(s) {
                *m = m.min(v);
            }
        }
        for (i, m) in mins.into_iter().enumerate() {
            out.push(RealInequality { index: i + 1, j, min_slack: m, holds: m >= -tol });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::rat;

    fn poly(terms: &[(&[u32], i64)]) -> RealPoly {
        RealPoly::from_terms(terms[0].0.len(), terms.iter().map(|(e, c)| (e.to_vec(), rat(*c, 1))))
    }

    #[test]
    fn normal_form() {
        assert!(RealDefiningFunction::new(poly(&[(&[0, 1], 1), (&[2, 0], 1)])).is_ok());
        assert_eq!(
            RealDefiningFunction::new(poly(&[(&[0, 1], 2)])).unwrap_err(),
            RealNormalFormError::WrongLinearPart
        );
    }

    #[test]
    fn hessian_examples() {
        let f = poly(&[(&[2, 0], 1), (&[0, 2], 1)]);
        let r = RealDefiningFunction::new(poly(&[(&[0, 1], 1), (&[2, 0], 1)])).unwrap();
        let shell = sample_real_boundary(&r, 0.1, 100, 1).unwrap();
        assert!(real_hessian_check(&f, &shell, 1e-9).passed);
        let concave = poly(&[(&[0, 1], 1), (&[2, 0], -1)]);
        assert!(!real_hessian_check(&concave, &shell, 1e-9).passed);
        let quartic = poly(&[(&[0, 1], 1), (&[4, 0], 1)]);
        let origin = RealShell { radius: 0.0, seed: 0, count: 1, points: vec![vec![0.0, 0.0]] };
        assert!(real_hessian_check(&quartic, &origin, 1e-9).passed);
    }

    #[test]
    fn half_space_certifies() {
        let r = RealDefiningFunction::new(poly(&[(&[0, 1], 1)])).unwrap();
        let shell = sample_real_boundary(&r, 0.1, 50, 1).unwrap();
        let rep = convex_multiplier(&r, &shell, 20, 1e-9).unwrap();
        assert_eq!(rep.k, Some(1));
        assert_eq!(rep.h, "2 + y");
    }

    #[test]
    fn concave_input_is_rejected() {
        let r = RealDefiningFunction::new(poly(&[(&[0, 1], 1), (&[2, 0], -1)])).unwrap();
        let shell = sample_real_boundary(&r, 0.1, 50, 1).unwrap();
        assert!(matches!(convex_multiplier(&r, &shell, 20, 1e-9), Err(RealConvexError::NotConvex { .. })));
    }
}
