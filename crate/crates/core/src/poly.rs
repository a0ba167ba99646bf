//! Polynomials in the conjugate-pair variables `z_j, z̄_j, w, w̄` with exact
//! Gaussian-rational coefficients.
//!
//! The four variable families are treated as independent, so `∂/∂z_j` and
//! `∂/∂z̄_j` are the Wirtinger derivatives. A polynomial is real-valued iff its
//! coefficient table is symmetric under conjugation of both the coefficient
//! and the monomial.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::complex::Complex64;
use num::{BigRational, One, Zero};

use crate::gaussian::GaussianRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right} z-variables")]
    DimensionMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {nz} z-variables")]
    IndexOutOfRange { index: usize, nz: usize },
}

/// One of the `2(n−1) + 2` formal variables. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Z(usize),
    Zbar(usize),
    W,
    Wbar,
}

impl Var {
    pub fn conj(self) -> Var {
        match self {
            Var::Z(j) => Var::Zbar(j),
            Var::Zbar(j) => Var::Z(j),
            Var::W => Var::Wbar,
            Var::Wbar => Var::W,
        }
    }
}

/// Exponents of `z^a z̄^b w^c w̄^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub c: u32,
    pub d: u32,
}

impl Monomial {
    pub fn one(nz: usize) -> Self {
        Monomial { a: vec![0; nz], b: vec![0; nz], c: 0, d: 0 }
    }

    pub fn var(nz: usize, v: Var) -> Self {
        let mut m = Self::one(nz);
        match v {
            Var::Z(j) => m.a[j] = 1,
            Var::Zbar(j) => m.b[j] = 1,
            Var::W => m.c = 1,
            Var::Wbar => m.d = 1,
        }
        m
    }

    pub fn nz(&self) -> usize {
        self.a.len()
    }

    pub fn degree(&self) -> u32 {
        self.a.iter().sum::<u32>() + self.b.iter().sum::<u32>() + self.c + self.d
    }

    pub fn exponent(&self, v: Var) -> u32 {
        match v {
            Var::Z(j) => self.a[j],
            Var::Zbar(j) => self.b[j],
            Var::W => self.c,
            Var::Wbar => self.d,
        }
    }

    fn exponent_mut(&mut self, v: Var) -> &mut u32 {
        match v {
            Var::Z(j) => &mut self.a[j],
            Var::Zbar(j) => &mut self.b[j],
            Var::W => &mut self.c,
            Var::Wbar => &mut self.d,
        }
    }

    pub fn conjugate(&self) -> Self {
        Monomial { a: self.b.clone(), b: self.a.clone(), c: self.d, d: self.c }
    }

    pub fn mul(&self, o: &Monomial) -> Self {
        Monomial {
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&o.b).map(|(x, y)| x + y).collect(),
            c: self.c + o.c,
            d: self.d + o.d,
        }
    }

    /// Flat exponent vector in the order `z_0.., z̄_0.., w, w̄`.
    pub fn flat(&self) -> Vec<u32> {
        let mut v = Vec::with_capacity(2 * self.nz() + 2);
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v.push(self.c);
        v.push(self.d);
        v
    }
}

impl Ord for Monomial {
    /// Graded order; within a degree, higher powers of earlier variables come first.
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| o.a.cmp(&self.a))
            .then_with(|| o.b.cmp(&self.b))
            .then_with(|| o.c.cmp(&self.c))
            .then_with(|| o.d.cmp(&self.d))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Numeric point `(z_1, …, z_{n−1}, w)`; conjugate variables evaluate to conjugates.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoint {
    pub z: Vec<Complex64>,
    pub w: Complex64,
}

impl CPoint {
    pub fn origin(nz: usize) -> Self {
        CPoint { z: vec![Complex64::new(0.0, 0.0); nz], w: Complex64::new(0.0, 0.0) }
    }

    /// Euclidean norm in `ℂ^n`.
    pub fn norm(&self) -> f64 {
        (self.z.iter().map(|c| c.norm_sqr()).sum::<f64>() + self.w.norm_sqr()).sqrt()
    }

    /// Real coordinates `(x_1, y_1, …, u, v)`.
    pub fn real_coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.z.len() + 2);
        for z in &self.z {
            out.push(z.re);
            out.push(z.im);
        }
        out.push(self.w.re);
        out.push(self.w.im);
        out
    }
}

/// Exact polynomial in `z_j, z̄_j, w, w̄` with Gaussian-rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WPoly {
    nz: usize,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl WPoly {
    pub fn zero(nz: usize) -> Self {
        WPoly { nz, terms: BTreeMap::new() }
    }

    pub fn constant(nz: usize, c: GaussianRational) -> Self {
        let mut p = Self::zero(nz);
        p.add_term(Monomial::one(nz), c);
        p
    }

    pub fn one(nz: usize) -> Self {
        Self::constant(nz, GaussianRational::one())
    }

    pub fn from_int(nz: usize, k: i64) -> Self {
        Self::constant(nz, GaussianRational::from_int(k))
    }

    pub fn var(nz: usize, v: Var) -> Self {
        Self::monomial(Monomial::var(nz, v), GaussianRational::one())
    }

    pub fn monomial(m: Monomial, c: GaussianRational) -> Self {
        let mut p = Self::zero(m.nz());
        p.add_term(m, c);
        p
    }

    pub fn from_terms(nz: usize, terms: impl IntoIterator<Item = (Monomial, GaussianRational)>) -> Self {
        let mut p = Self::zero(nz);
        for (m, c) in terms {
            assert_eq!(m.nz(), nz, "monomial dimension mismatch");
            p.add_term(m, c);
        }
        p
    }

    /// `Re z_j = (z_j + z̄_j)/2`.
    pub fn re_z(nz: usize, j: usize) -> Self {
        (&Self::var(nz, Var::Z(j)) + &Self::var(nz, Var::Zbar(j))).scale(&GaussianRational::ratio(1, 2))
    }

    /// `Im z_j = (z_j − z̄_j)/(2i)`.
    pub fn im_z(nz: usize, j: usize) -> Self {
        (&Self::var(nz, Var::Z(j)) - &Self::var(nz, Var::Zbar(j))).scale(&GaussianRational::from_parts(0, 1, -1, 2))
    }

    pub fn re_w(nz: usize) -> Self {
        (&Self::var(nz, Var::W) + &Self::var(nz, Var::Wbar)).scale(&GaussianRational::ratio(1, 2))
    }

    pub fn im_w(nz: usize) -> Self {
        (&Self::var(nz, Var::W) - &Self::var(nz, Var::Wbar)).scale(&GaussianRational::from_parts(0, 1, -1, 2))
    }

    /// `|z_j|² = z_j z̄_j`.
    pub fn abs2_z(nz: usize, j: usize) -> Self {
        &Self::var(nz, Var::Z(j)) * &Self::var(nz, Var::Zbar(j))
    }

    /// Number of `z` variables, i.e. `n − 1` for a polynomial on `ℂ^n`.
    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.coeff(&Monomial::one(self.nz))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Smallest total degree among stored terms (0 for the zero polynomial).
    pub fn min_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).min().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += &c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_dim(&self, o: &WPoly) -> Result<(), PolyError> {
        if self.nz != o.nz {
            return Err(PolyError::DimensionMismatch { left: self.nz, right: o.nz });
        }
        Ok(())
    }

    fn check_index(&self, j: usize) -> Result<(), PolyError> {
        if j >= self.nz {
            return Err(PolyError::IndexOutOfRange { index: j, nz: self.nz });
        }
        Ok(())
    }

    pub fn checked_add(&self, o: &WPoly) -> Result<WPoly, PolyError> {
        self.check_dim(o)?;
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, o: &WPoly) -> Result<WPoly, PolyError> {
        self.check_dim(o)?;
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, o: &WPoly) -> Result<WPoly, PolyError> {
        self.check_dim(o)?;
        let mut out = WPoly::zero(self.nz);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &GaussianRational) -> WPoly {
        let mut out = WPoly::zero(self.nz);
        if k.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c * k);
        }
        out
    }

    pub fn scale_int(&self, k: i64) -> WPoly {
        self.scale(&GaussianRational::from_int(k))
    }

    pub fn pow(&self, k: u32) -> WPoly {
        let mut acc = WPoly::one(self.nz);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Conjugates coefficients and swaps `z ↔ z̄`, `w ↔ w̄`.
    pub fn conjugate(&self) -> WPoly {
        WPoly {
            nz: self.nz,
            terms: self.terms.iter().map(|(m, c)| (m.conjugate(), c.conj())).collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(m, c)| self.coeff(&m.conjugate()) == c.conj())
    }

    /// Formal partial derivative with respect to one of the independent variables.
    pub fn deriv(&self, v: Var) -> WPoly {
        let mut out = WPoly::zero(self.nz);
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            *m2.exponent_mut(v) -= 1;
            out.add_term(m2, c * &GaussianRational::from_int(e as i64));
        }
        out
    }

    pub fn checked_deriv(&self, v: Var) -> Result<WPoly, PolyError> {
        match v {
            Var::Z(j) | Var::Zbar(j) => self.check_index(j)?,
            _ => {}
        }
        Ok(self.deriv(v))
    }

    /// Term-wise antiderivative in `z_j` with zero constant of integration.
    pub fn antiderivative_z(&self, j: usize) -> WPoly {
        let mut out = WPoly::zero(self.nz);
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2.a[j] += 1;
            let k = m2.a[j] as i64;
            out.add_term(m2, c * &GaussianRational::ratio(1, k));
        }
        out
    }

    /// `q + conj(q)`; always real.
    pub fn realify(&self) -> WPoly {
        self + &self.conjugate()
    }

    /// Real part `(p + conj p)/2` as a polynomial.
    pub fn real_part(&self) -> WPoly {
        self.realify().scale(&GaussianRational::ratio(1, 2))
    }

    /// Drops all monomials of total degree above `cap`.
    pub fn truncate_degree(&self, cap: u32) -> WPoly {
        WPoly {
            nz: self.nz,
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= cap).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Homogeneous part of degree `k`.
    pub fn homogeneous(&self, k: u32) -> WPoly {
        WPoly {
            nz: self.nz,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == k).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Splits into single-term polynomials, in canonical order.
    pub fn monomial_terms(&self) -> Vec<WPoly> {
        self.terms.iter().map(|(m, c)| WPoly::monomial(m.clone(), c.clone())).collect()
    }

    /// Floating evaluation in double precision.
    pub fn eval(&self, p: &CPoint) -> Complex64 {
        self.compile().eval(p)
    }

    /// Exact evaluation at a Gaussian-rational point; `z̄_j`, `w̄` take conjugate values.
    pub fn eval_exact(&self, z: &[GaussianRational], w: &GaussianRational) -> GaussianRational {
        assert_eq!(z.len(), self.nz, "point dimension mismatch");
        let zb: Vec<GaussianRational> = z.iter().map(GaussianRational::conj).collect();
        let wb = w.conj();
        let mut acc = GaussianRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for j in 0..self.nz {
                t = &t * &z[j].pow(m.a[j]);
                t = &t * &zb[j].pow(m.b[j]);
            }
            t = &t * &w.pow(m.c);
            t = &t * &wb.pow(m.d);
            acc += &t;
        }
        acc
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }

    /// `z` when there is one z-variable, otherwise `z1, z2, …`.
    fn fmt_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        let zname = |j: usize| if self.nz == 1 { "z".to_string() } else { format!("z{}", j + 1) };
        let push = |parts: &mut Vec<String>, name: String, e: u32| match e {
            0 => {}
            1 => parts.push(name),
            _ => parts.push(format!("{}^{}", name, e)),
        };
        for j in 0..self.nz {
            push(&mut parts, zname(j), m.a[j]);
            push(&mut parts, format!("{}bar", zname(j)), m.b[j]);
        }
        push(&mut parts, "w".to_string(), m.c);
        push(&mut parts, "wbar".to_string(), m.d);
        parts.join(" ")
    }
}

impl fmt::Display for WPoly {
    /// `coeff * z^a zbar^b w^c wbar^d ± …`, terms in graded order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            // Pull a leading sign out of purely real or purely imaginary coefficients.
            let negative = (c.im.is_zero() && c.re < BigRational::zero())
                || (c.re.is_zero() && c.im < BigRational::zero());
            let body = if negative { -c } else { c.clone() };
            let mono = self.fmt_monomial(m);
            let text = if mono.is_empty() {
                body.to_string()
            } else if body.is_one() {
                mono
            } else {
                format!("{} * {}", body, mono)
            };
            match (first, negative) {
                (true, true) => write!(f, "-{}", text)?,
                (true, false) => write!(f, "{}", text)?,
                (false, true) => write!(f, " - {}", text)?,
                (false, false) => write!(f, " + {}", text)?,
            }
            first = false;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<'a> $trait<&'a WPoly> for &'a WPoly {
            type Output = WPoly;
            /// Panics on a variable-count mismatch; use the `checked_*` form to get an error.
            fn $method(self, o: &WPoly) -> WPoly {
                self.$checked(o).expect("WPoly dimension mismatch")
            }
        }
        impl $trait for WPoly {
            type Output = WPoly;
            fn $method(self, o: WPoly) -> WPoly {
                (&self).$method(&o)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &WPoly {
    type Output = WPoly;
    fn neg(self) -> WPoly {
        self.scale(&GaussianRational::from_int(-1))
    }
}

impl Neg for WPoly {
    type Output = WPoly;
    fn neg(self) -> WPoly {
        -&self
    }
}

/// Arithmetic selector for [`arith`].
#[derive(Debug, Clone)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Scale(GaussianRational),
}

/// Exact arithmetic with dimension checking. `Scale` ignores `q` apart from the check.
pub fn arith(p: &WPoly, q: &WPoly, op: ArithOp) -> Result<WPoly, PolyError> {
    match op {
        ArithOp::Add => p.checked_add(q),
        ArithOp::Sub => p.checked_sub(q),
        ArithOp::Mul => p.checked_mul(q),
        ArithOp::Scale(k) => {
            p.check_dim(q)?;
            Ok(p.scale(&k))
        }
    }
}

/// Double-precision evaluator with coefficients converted once.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    nz: usize,
    coeffs: Vec<Complex64>,
    exps: Vec<Vec<u32>>,
    max_exp: Vec<u32>,
}

impl CompiledPoly {
    fn new(p: &WPoly) -> Self {
        let nvars = 2 * p.nz + 2;
        let mut max_exp = vec![0; nvars];
        let mut coeffs = Vec::with_capacity(p.len());
        let mut exps = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            let f = m.flat();
            for (mx, e) in max_exp.iter_mut().zip(&f) {
                *mx = (*mx).max(*e);
            }
            coeffs.push(c.to_complex64());
            exps.push(f);
        }
        CompiledPoly { nz: p.nz, coeffs, exps, max_exp }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn powers(&self, p: &CPoint) -> Vec<Vec<Complex64>> {
        assert_eq!(p.z.len(), self.nz, "point dimension mismatch");
        let mut vals = Vec::with_capacity(2 * self.nz + 2);
        vals.extend(p.z.iter().copied());
        vals.extend(p.z.iter().map(|z| z.conj()));
        vals.push(p.w);
        vals.push(p.w.conj());
        vals.iter()
            .zip(&self.max_exp)
            .map(|(x, &mx)| {
                let mut row = Vec::with_capacity(mx as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                row.push(acc);
                for _ in 0..mx {
                    acc *= x;
                    row.push(acc);
                }
                row
            })
            .collect()
    }

    pub fn eval(&self, p: &CPoint) -> Complex64 {
        self.eval_with_scale(p).0
    }

    /// Value together with `Σ |c_m · m(p)|`, the magnitude used to judge round-off.
    pub fn eval_with_scale(&self, p: &CPoint) -> (Complex64, f64) {
        if self.coeffs.is_empty() {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let pw = self.powers(p);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (c, e) in self.coeffs.iter().zip(&self.exps) {
            let mut t = *c;
            for (k, &ek) in e.iter().enumerate() {
                if ek > 0 {
                    t *= pw[k][ek as usize];
                }
            }
            scale += t.norm();
            acc += t;
        }
        (acc, scale)
    }
}
