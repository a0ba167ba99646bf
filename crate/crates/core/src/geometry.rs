//! Normal form `r = Im w + F`, Levi forms, complex Hessian minors.
//!
//! Variable slots are indexed `0..nz` for `z_1 … z_{n−1}` and `nz` for `w`.
//! The tangent basis is `v_j = r_w e_j − r_{z_j} e_w`, used as-is (no
//! orthonormalization). The two-dimensional case is the general path with
//! `j = 0`.

use std::fmt;

use num::complex::Complex64;
use num::Zero;
use serde::Serialize;

use crate::gaussian::GaussianRational;
use crate::poly::{CPoint, Monomial, Var, WPoly};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalFormViolation {
    NotReal,
    NonzeroConstant { constant: String },
    WrongLinearPart { w: String, wbar: String },
    LinearZTerms { terms: String },
}

impl fmt::Display for NormalFormViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalFormViolation::NotReal => write!(f, "polynomial is not real-valued"),
            NormalFormViolation::NonzeroConstant { constant } => write!(f, "nonzero constant term {}", constant),
            NormalFormViolation::WrongLinearPart { w, wbar } => {
                write!(f, "linear part in w is {} * w + {} * wbar, expected Im(w)", w, wbar)
            }
            NormalFormViolation::LinearZTerms { terms } => write!(f, "degree-1 terms in z: {}", terms),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct NormalFormError {
    pub violations: Vec<NormalFormViolation>,
}

impl fmt::Display for NormalFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "not in normal form Im(w) + F: {}", parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("index {index} out of range for {nz} z-variables")]
    IndexOutOfRange { index: usize, nz: usize },
    #[error("vector has {got} components, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

/// A real polynomial `r = Im w + F` with every term of `F` of degree at least two.
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningFunction {
    r: WPoly,
}

impl DefiningFunction {
    /// Checks every normal-form clause and reports all that fail.
    pub fn new(r: WPoly) -> Result<Self, NormalFormError> {
        let nz = r.nz();
        let mut violations = Vec::new();
        if !r.is_real() {
            violations.push(NormalFormViolation::NotReal);
        }
        let c0 = r.constant_term();
        if !c0.is_zero() {
            violations.push(NormalFormViolation::NonzeroConstant { constant: c0.to_string() });
        }
        let cw = r.coeff(&Monomial::var(nz, Var::W));
        let cwb = r.coeff(&Monomial::var(nz, Var::Wbar));
        if cw != GaussianRational::from_parts(0, 1, -1, 2) || cwb != GaussianRational::from_parts(0, 1, 1, 2) {
            violations.push(NormalFormViolation::WrongLinearPart { w: cw.to_string(), wbar: cwb.to_string() });
        }
        let mut linear_z = WPoly::zero(nz);
        for j in 0..nz {
            for v in [Var::Z(j), Var::Zbar(j)] {
                let m = Monomial::var(nz, v);
                let c = r.coeff(&m);
                linear_z.add_term(m, c);
            }
        }
        if !linear_z.is_zero() {
            violations.push(NormalFormViolation::LinearZTerms { terms: linear_z.to_string() });
        }
        if violations.is_empty() {
            Ok(DefiningFunction { r })
        } else {
            Err(NormalFormError { violations })
        }
    }

    pub fn poly(&self) -> &WPoly {
        &self.r
    }

    pub fn nz(&self) -> usize {
        self.r.nz()
    }

    /// Complex dimension `n` of the ambient space.
    pub fn dim(&self) -> usize {
        self.r.nz() + 1
    }

    /// `F = r − Im w`.
    pub fn higher_order_part(&self) -> WPoly {
        &self.r - &WPoly::im_w(self.nz())
    }

    fn check_j(&self, j: usize) -> Result<(), GeometryError> {
        if j >= self.nz() {
            return Err(GeometryError::IndexOutOfRange { index: j, nz: self.nz() });
        }
        Ok(())
    }

    /// `r_{z_j}`.
    pub fn r_z(&self, j: usize) -> WPoly {
        self.r.deriv(Var::Z(j))
    }

    pub fn r_w(&self) -> WPoly {
        self.r.deriv(Var::W)
    }

    pub fn tangent_vector(&self, j: usize) -> Result<TangentVector, GeometryError> {
        self.check_j(j)?;
        let nz = self.nz();
        let mut comps = vec![WPoly::zero(nz); nz + 1];
        comps[j] = self.r_w();
        comps[nz] = -self.r_z(j);
        Ok(TangentVector::Symbolic(comps))
    }
}

/// A vector in `ℂ^n`, with polynomial or numeric components.
#[derive(Debug, Clone, PartialEq)]
pub enum TangentVector {
    Symbolic(Vec<WPoly>),
    Numeric(Vec<Complex64>),
}

fn slot_var(nz: usize, a: usize) -> Var {
    if a == nz {
        Var::W
    } else {
        Var::Z(a)
    }
}

/// `f_{x_a x̄_b}` where slot `nz` is `w`.
pub fn hessian_entry(f: &WPoly, a: usize, b: usize) -> WPoly {
    let nz = f.nz();
    f.deriv(slot_var(nz, a)).deriv(slot_var(nz, b).conj())
}

/// Full `n × n` matrix of `f_{x_a x̄_b}`.
pub fn hessian_matrix(f: &WPoly) -> Vec<Vec<WPoly>> {
    let n = f.nz() + 1;
    (0..n).map(|a| (0..n).map(|b| hessian_entry(f, a, b)).collect()).collect()
}

/// `Σ f_{a b̄} ξ_a conj(η_b)`.
pub fn hessian_bilinear(f: &WPoly, xi: &[WPoly], eta: &[WPoly]) -> Result<WPoly, GeometryError> {
    let n = f.nz() + 1;
    for v in [xi, eta] {
        if v.len() != n {
            return Err(GeometryError::DimensionMismatch { got: v.len(), expected: n });
        }
    }
    let eta_bar: Vec<WPoly> = eta.iter().map(WPoly::conjugate).collect();
    let mut acc = WPoly::zero(f.nz());
    for a in 0..n {
        if xi[a].is_zero() {
            continue;
        }
        for b in 0..n {
            if eta_bar[b].is_zero() {
                continue;
            }
            let h = hessian_entry(f, a, b);
            if h.is_zero() {
                continue;
            }
            acc = &acc + &(&(&h * &xi[a]) * &eta_bar[b]);
        }
    }
    Ok(acc)
}

/// Symbolic `Σ f_{a b̄} ξ_a ξ̄_b`; real-valued when `f` is real.
pub fn hessian_apply(f: &WPoly, xi: &[WPoly]) -> Result<WPoly, GeometryError> {
    hessian_bilinear(f, xi, xi)
}

/// Numeric `Σ f_{a b̄}(p) ξ_a ξ̄_b` at a point (real part).
pub fn hessian_apply_at(f: &WPoly, xi: &[Complex64], p: &CPoint) -> Result<f64, GeometryError> {
    let n = f.nz() + 1;
    if xi.len() != n {
        return Err(GeometryError::DimensionMismatch { got: xi.len(), expected: n });
    }
    let mut acc = Complex64::zero();
    for a in 0..n {
        for b in 0..n {
            acc += hessian_entry(f, a, b).eval(p) * xi[a] * xi[b].conj();
        }
    }
    Ok(acc.re)
}

/// Applies `f`'s Hessian to a tangent vector of either kind.
pub fn hessian_apply_vector(f: &WPoly, xi: &TangentVector, p: Option<&CPoint>) -> Result<HessianValue, GeometryError> {
    match xi {
        TangentVector::Symbolic(v) => hessian_apply(f, v).map(HessianValue::Symbolic),
        TangentVector::Numeric(v) => {
            let origin = CPoint::origin(f.nz());
            hessian_apply_at(f, v, p.unwrap_or(&origin)).map(HessianValue::Numeric)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HessianValue {
    Symbolic(WPoly),
    Numeric(f64),
}

/// `L_r(v_j)`, the Hessian of `r` applied to `v_j`.
pub fn levi_form(r: &DefiningFunction, j: usize) -> Result<WPoly, GeometryError> {
    let v = match r.tangent_vector(j)? {
        TangentVector::Symbolic(v) => v,
        TangentVector::Numeric(_) => unreachable!(),
    };
    hessian_apply(r.poly(), &v)
}

/// Levi matrix `H_r(v_j, v_k)` on the tangent basis.
pub fn levi_matrix(r: &DefiningFunction) -> Vec<Vec<WPoly>> {
    let nz = r.nz();
    let basis: Vec<Vec<WPoly>> = (0..nz)
        .map(|j| match r.tangent_vector(j).expect("index in range") {
            TangentVector::Symbolic(v) => v,
            TangentVector::Numeric(_) => unreachable!(),
        })
        .collect();
    (0..nz)
        .map(|j| (0..nz).map(|k| hessian_bilinear(r.poly(), &basis[j], &basis[k]).expect("dimensions match")).collect())
        .collect()
}

/// `det [[f_{z_j z̄_j}, f_{z_j w̄}], [f_{z̄_j w}, f_{w w̄}]]`, expanded symbolically.
pub fn hessian_minor_det(f: &WPoly, j: usize) -> Result<WPoly, GeometryError> {
    let nz = f.nz();
    if j >= nz {
        return Err(GeometryError::IndexOutOfRange { index: j, nz });
    }
    let fzz = hessian_entry(f, j, j);
    let fww = hessian_entry(f, nz, nz);
    let fzw = hessian_entry(f, j, nz);
    let fwz = hessian_entry(f, nz, j);
    Ok(&(&fzz * &fww) - &(&fzw * &fwz))
}

/// `|r_{z_j}|²` for a single `j`.
pub fn gradient_z_j_sq(r: &DefiningFunction, j: usize) -> WPoly {
    let rz = r.r_z(j);
    &rz * &rz.conjugate()
}

/// `Σ_j |r_{z_j}|²`.
pub fn gradient_z_sq(r: &DefiningFunction) -> WPoly {
    (0..r.nz()).fold(WPoly::zero(r.nz()), |acc, j| &acc + &gradient_z_j_sq(r, j))
}

/// Levi forms on each `v_j`, the gradient term and the complex Hessian of `r`.
#[derive(Debug, Clone)]
pub struct LeviData {
    pub levi: Vec<WPoly>,
    pub gradient_z_sq: WPoly,
    pub hessian_entries: Vec<Vec<WPoly>>,
}

impl LeviData {
    pub fn compute(r: &DefiningFunction) -> Self {
        LeviData {
            levi: (0..r.nz()).map(|j| levi_form(r, j).expect("index in range")).collect(),
            gradient_z_sq: gradient_z_sq(r),
            hessian_entries: hessian_matrix(r.poly()),
        }
    }
}

/// Convenience for `ℂ²`: the Levi form on `⟨r_w, −r_z⟩`.
pub fn levi_form_c2(r: &DefiningFunction) -> WPoly {
    levi_form(r, 0).expect("at least one z-variable")
}
