//! Polynomials in real coordinates with exact rational coefficients.
//!
//! Used for the real-convex pipeline (variables `x_1, …, x_{n−1}, y`) and for
//! reading a [`WPoly`] in the real coordinates `(x_1, y_1, …, u, v)` of
//! `z_j = x_j + i y_j`, `w = u + i v`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::gaussian::{fmt_rational, GaussianRational};
use crate::poly::{Monomial, Var, WPoly};

/// Sparse real polynomial; exponent vectors all have length `nvars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

fn graded_key(e: &[u32]) -> (u32, Vec<std::cmp::Reverse<u32>>) {
    (e.iter().sum(), e.iter().map(|&x| std::cmp::Reverse(x)).collect())
}

impl RealPoly {
    pub fn zero(nvars: usize) -> Self {
        RealPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigRational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, BigRational::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn deriv(&self, k: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            out.add_term(e2, c * BigRational::from_integer(BigInt::from(e[k])));
        }
        out
    }

    pub fn homogeneous(&self, k: u32) -> Self {
        RealPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() == k).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Substitutes `0` for variable `k`.
    pub fn at_zero(&self, k: usize) -> Self {
        RealPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| e[k] == 0).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (xi, &ei) in x.iter().zip(e) {
                    if ei > 0 {
                        t *= xi.powi(ei as i32);
                    }
                }
                t
            })
            .sum()
    }

    pub fn compile(&self) -> CompiledRealPoly {
        CompiledRealPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (c.to_f64().unwrap_or(f64::NAN), e.clone())).collect(),
        }
    }

    /// Renders with the supplied variable names, terms in graded order.
    pub fn to_string_with(&self, names: &[String]) -> String {
        self.render(names, " ", " * ")
    }

    /// Renders in the expression syntax, e.g. `8*Im(z)^2 - 8*Re(z)^2`.
    pub fn to_expr_with(&self, names: &[String]) -> String {
        self.render(names, "*", "*")
    }

    fn render(&self, names: &[String], var_sep: &str, coeff_sep: &str) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by_key(|e| graded_key(e));
        let mut out = String::new();
        for (i, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.is_negative();
            let a = c.abs();
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { names[v].clone() } else { format!("{}^{}", names[v], k) })
                .collect();
            let mono = mono.join(var_sep);
            let body = if mono.is_empty() {
                fmt_rational(&a)
            } else if a.is_one() {
                mono
            } else {
                format!("{}{}{}", fmt_rational(&a), coeff_sep, mono)
            };
            match (i == 0, neg) {
                (true, true) => out.push_str(&format!("-{}", body)),
                (true, false) => out.push_str(&body),
                (false, true) => out.push_str(&format!(" - {}", body)),
                (false, false) => out.push_str(&format!(" + {}", body)),
            }
        }
        out
    }

    /// Names `x1 … x{n-1}, y` (or `x, y` in the plane).
    pub fn convex_names(nvars: usize) -> Vec<String> {
        let mut names: Vec<String> = if nvars == 2 {
            vec!["x".into()]
        } else {
            (1..nvars).map(|k| format!("x{}", k)).collect()
        };
        names.push("y".into());
        names
    }

    /// Rewrites a polynomial in the real coordinates `(x_1, y_1, …, u, v)` as a [`WPoly`].
    pub fn to_wpoly(&self) -> WPoly {
        assert!(self.nvars >= 4 && self.nvars % 2 == 0, "expected (x_j, y_j)* u v layout");
        let nz = self.nvars / 2 - 1;
        let mut basis = Vec::with_capacity(self.nvars);
        for j in 0..nz {
            basis.push(WPoly::re_z(nz, j));
            basis.push(WPoly::im_z(nz, j));
        }
        basis.push(WPoly::re_w(nz));
        basis.push(WPoly::im_w(nz));
        let mut out = WPoly::zero(nz);
        for (e, c) in &self.terms {
            let mut t = WPoly::constant(nz, GaussianRational::real(c.clone()));
            for (k, &ek) in e.iter().enumerate() {
                if ek > 0 {
                    t = &t * &basis[k].pow(ek);
                }
            }
            out = &out + &t;
        }
        out
    }
}

impl fmt::Display for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(&Self::convex_names(self.nvars)))
    }
}

impl<'a> Add<&'a RealPoly> for &'a RealPoly {
    type Output = RealPoly;
    fn add(self, o: &RealPoly) -> RealPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a RealPoly> for &'a RealPoly {
    type Output = RealPoly;
    fn sub(self, o: &RealPoly) -> RealPoly {
        self + &(-o)
    }
}

impl Neg for &RealPoly {
    type Output = RealPoly;
    fn neg(self) -> RealPoly {
        self.scale(&-BigRational::one())
    }
}

impl<'a> Mul<&'a RealPoly> for &'a RealPoly {
    type Output = RealPoly;
    fn mul(self, o: &RealPoly) -> RealPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut out = RealPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

/// Double-precision evaluator for [`RealPoly`].
#[derive(Debug, Clone)]
pub struct CompiledRealPoly {
    nvars: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledRealPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(c, e)| {
                let mut t = *c;
                for (xi, &ei) in x.iter().zip(e) {
                    if ei > 0 {
                        t *= xi.powi(ei as i32);
                    }
                }
                t
            })
            .sum()
    }
}

/// Complex-coefficient real-coordinate polynomial used during conversion.
type ComplexRealTerms = BTreeMap<Vec<u32>, GaussianRational>;

fn mul_terms(p: &ComplexRealTerms, q: &ComplexRealTerms) -> ComplexRealTerms {
    let mut out = ComplexRealTerms::new();
    for (e1, c1) in p {
        for (e2, c2) in q {
            let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
            let entry = out.entry(e).or_insert_with(GaussianRational::zero);
            *entry += &(c1 * c2);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `(re + s·i·im)^k` expanded in the variables at positions `re_idx`, `im_idx`.
fn linear_power(nvars: usize, re_idx: usize, im_idx: usize, conj: bool, k: u32) -> ComplexRealTerms {
    let mut base = ComplexRealTerms::new();
    let mut e = vec![0; nvars];
    e[re_idx] = 1;
    base.insert(e.clone(), GaussianRational::one());
    e[re_idx] = 0;
    e[im_idx] = 1;
    let i = if conj { GaussianRational::from_parts(0, 1, -1, 1) } else { GaussianRational::i() };
    base.insert(e, i);
    let mut acc = ComplexRealTerms::new();
    acc.insert(vec![0; nvars], GaussianRational::one());
    for _ in 0..k {
        acc = mul_terms(&acc, &base);
    }
    acc
}

fn monomial_to_real(m: &Monomial) -> ComplexRealTerms {
    let nz = m.nz();
    let nvars = 2 * nz + 2;
    let mut acc = ComplexRealTerms::new();
    acc.insert(vec![0; nvars], GaussianRational::one());
    for j in 0..nz {
        for (v, conj) in [(Var::Z(j), false), (Var::Zbar(j), true)] {
            let k = m.exponent(v);
            if k > 0 {
                acc = mul_terms(&acc, &linear_power(nvars, 2 * j, 2 * j + 1, conj, k));
            }
        }
    }
    for (v, conj) in [(Var::W, false), (Var::Wbar, true)] {
        let k = m.exponent(v);
        if k > 0 {
            acc = mul_terms(&acc, &linear_power(nvars, 2 * nz, 2 * nz + 1, conj, k));
        }
    }
    acc
}

/// Expands `p` in real coordinates `(x_1, y_1, …, u, v)`, returning real and imaginary parts.
pub fn to_real_coords(p: &WPoly) -> (RealPoly, RealPoly) {
    let nvars = 2 * p.nz() + 2;
    let mut acc = ComplexRealTerms::new();
    for (m, c) in p.terms() {
        for (e, t) in monomial_to_real(m) {
            let entry = acc.entry(e).or_insert_with(GaussianRational::zero);
            *entry += &(c * &t);
        }
    }
    let mut re = RealPoly::zero(nvars);
    let mut im = RealPoly::zero(nvars);
    for (e, c) in acc {
        re.add_term(e.clone(), c.re);
        im.add_term(e, c.im);
    }
    (re, im)
}

/// `Re(z), Im(z), Re(w), Im(w)` (or `Re(z1), Im(z1), …`) for expression-syntax output.
pub fn expr_coord_names(nz: usize) -> Vec<String> {
    let mut names = Vec::new();
    for j in 0..nz {
        let z = if nz == 1 { "z".to_string() } else { format!("z{}", j + 1) };
        names.push(format!("Re({z})"));
        names.push(format!("Im({z})"));
    }
    names.push("Re(w)".into());
    names.push("Im(w)".into());
    names
}

/// A real [`WPoly`] in expression syntax over real coordinates.
pub fn real_expr(p: &WPoly) -> String {
    to_real_coords(p).0.to_expr_with(&expr_coord_names(p.nz()))
}

/// Names `x, y, u, v` (or `x1, y1, …, u, v`) for complex-coordinate real polynomials.
pub fn complex_coord_names(nz: usize) -> Vec<String> {
    let mut names = Vec::new();
    for j in 0..nz {
        if nz == 1 {
            names.push("x".into());
            names.push("y".into());
        } else {
            names.push(format!("x{}", j + 1));
            names.push(format!("y{}", j + 1));
        }
    }
    names.push("u".into());
    names.push("v".into());
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::rat;

    #[test]
    fn round_trip_through_real_coordinates() {
        let nz = 1;
        let p = &(&WPoly::abs2_z(nz, 0).pow(2) + &WPoly::im_w(nz)) + &(&WPoly::re_z(nz, 0) * &WPoly::re_w(nz)).scale_int(4);
        let (re, im) = to_real_coords(&p);
        assert!(im.is_zero());
        assert_eq!(re.to_wpoly(), p);
        // 4 x u term present with coefficient 4
        assert_eq!(re.coeff(&[1, 0, 1, 0]), rat(4, 1));
        assert_eq!(re.coeff(&[0, 0, 0, 1]), rat(1, 1));
        assert_eq!(re.coeff(&[2, 2, 0, 0]), rat(2, 1));
    }

    #[test]
    fn display_uses_convex_names() {
        let p = &RealPoly::var(2, 1) + &RealPoly::var(2, 0).pow(2);
        assert_eq!(p.to_string(), "y + x^2");
        assert_eq!(p.deriv(0), RealPoly::var(2, 0).scale(&rat(2, 1)));
    }
}
