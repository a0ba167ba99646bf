//! Lowering of parsed expressions to exact polynomials.

use num::{BigRational, One, Zero};
use pshdef_core::{GaussianRational, RealPoly, Var, WPoly};

use crate::expr::{parse, BinOp, Expr, ExprKind, Func, ParseError, Pos};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LowerError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{pos}: division by a non-constant expression")]
    NonConstantDivisor { pos: Pos },
    #[error("{pos}: division by zero")]
    DivisionByZero { pos: Pos },
    #[error("{pos}: variable '{name}' is not available here ({hint})")]
    WrongVariable { name: String, pos: Pos, hint: &'static str },
    #[error("{pos}: 'z' stands for z1 and cannot be mixed with z{index}")]
    AmbiguousAlias { index: usize, pos: Pos },
    #[error("{pos}: {what} has no meaning for real variables")]
    ComplexInRealMode { what: &'static str, pos: Pos },
}

fn walk<'a>(e: &'a Expr, out: &mut Vec<(&'a str, Pos)>) {
    match &e.kind {
        ExprKind::Var(v) => out.push((v, e.pos)),
        ExprKind::Neg(a) | ExprKind::Pow(a, _) | ExprKind::Call(_, a) => walk(a, out),
        ExprKind::Bin(_, a, b) => {
            walk(a, out);
            walk(b, out);
        }
        ExprKind::Num(_) | ExprKind::I => {}
    }
}

/// `(name, index, conjugated)`; `z` and `x` have index 0 meaning the alias.
fn split_var(name: &str) -> (char, usize, bool) {
    let (base, bar) = match name.strip_suffix("bar") {
        Some(b) => (b, true),
        None => (name, false),
    };
    let head = base.chars().next().expect("nonempty");
    let idx = base[1..].parse().unwrap_or(0);
    (head, idx, bar)
}

/// Number of `z` variables used by the complex expressions, at least one.
pub fn complex_dim(exprs: &[&Expr]) -> Result<usize, LowerError> {
    let mut vars = Vec::new();
    for e in exprs {
        walk(e, &mut vars);
    }
    let mut nz = 1;
    let mut alias = None;
    for &(v, pos) in &vars {
        match split_var(v) {
            ('z', 0, _) => alias = Some(pos),
            ('z', k, _) => nz = nz.max(k),
            ('w', _, _) => {}
            _ => return Err(LowerError::WrongVariable { name: v.into(), pos, hint: "use z1…, w or pass --real" }),
        }
    }
    if let Some(pos) = alias {
        if nz > 1 {
            return Err(LowerError::AmbiguousAlias { index: nz, pos });
        }
    }
    Ok(nz)
}

fn nonzero_constant(p: &WPoly, pos: Pos) -> Result<GaussianRational, LowerError> {
    if p.degree() > 0 {
        return Err(LowerError::NonConstantDivisor { pos });
    }
    let c = p.constant_term();
    if c.is_zero() {
        return Err(LowerError::DivisionByZero { pos });
    }
    Ok(c)
}

pub fn to_wpoly(e: &Expr, nz: usize) -> Result<WPoly, LowerError> {
    Ok(match &e.kind {
        ExprKind::Num(q) => WPoly::constant(nz, GaussianRational::real(q.clone())),
        ExprKind::I => WPoly::constant(nz, GaussianRational::i()),
        ExprKind::Var(v) => {
            let (head, idx, bar) = split_var(v);
            let var = match (head, bar) {
                ('w', false) => Var::W,
                ('w', true) => Var::Wbar,
                ('z', false) => Var::Z(idx.max(1) - 1),
                ('z', true) => Var::Zbar(idx.max(1) - 1),
                _ => return Err(LowerError::WrongVariable { name: v.clone(), pos: e.pos, hint: "use z1…, w or pass --real" }),
            };
            WPoly::var(nz, var)
        }
        ExprKind::Neg(a) => -to_wpoly(a, nz)?,
        ExprKind::Pow(a, k) => to_wpoly(a, nz)?.pow(*k),
        ExprKind::Bin(op, a, b) => {
            let (a, b) = (to_wpoly(a, nz)?, to_wpoly(b, nz)?);
            match op {
                BinOp::Add => &a + &b,
                BinOp::Sub => &a - &b,
                BinOp::Mul => &a * &b,
                BinOp::Div => {
                    let c = nonzero_constant(&b, e.pos)?;
                    a.scale(&c.inv().expect("nonzero"))
                }
            }
        }
        ExprKind::Call(f, a) => {
            let a = to_wpoly(a, nz)?;
            match f {
                Func::Re => a.real_part(),
                Func::Im => (&a - &a.conjugate()).scale(&minus_half_i()),
                Func::Conj => a.conjugate(),
                Func::Abs2 => &a * &a.conjugate(),
            }
        }
    })
}

/// `1/(2i)`.
fn minus_half_i() -> GaussianRational {
    GaussianRational::from_parts(0, 1, -1, 2)
}

/// Real coordinates named `x1 … x{n−1}, y`; `x` aliases `x1`.
pub fn real_dim(exprs: &[&Expr]) -> Result<usize, LowerError> {
    let mut vars = Vec::new();
    for e in exprs {
        walk(e, &mut vars);
    }
    let mut nx = 1;
    let mut alias = None;
    for &(v, pos) in &vars {
        match split_var(v) {
            ('x', 0, false) => alias = Some(pos),
            ('x', k, false) => nx = nx.max(k),
            ('y', _, false) => {}
            _ => return Err(LowerError::WrongVariable { name: v.into(), pos, hint: "real mode uses x1…, y" }),
        }
    }
    if let Some(pos) = alias {
        if nx > 1 {
            return Err(LowerError::AmbiguousAlias { index: nx, pos });
        }
    }
    Ok(nx + 1)
}

pub fn to_real_poly(e: &Expr, n: usize) -> Result<RealPoly, LowerError> {
    Ok(match &e.kind {
        ExprKind::Num(q) => RealPoly::constant(n, q.clone()),
        ExprKind::I => return Err(LowerError::ComplexInRealMode { what: "the imaginary unit", pos: e.pos }),
        ExprKind::Var(v) => match split_var(v) {
            ('y', _, _) => RealPoly::var(n, n - 1),
            ('x', k, false) => RealPoly::var(n, k.max(1) - 1),
            _ => return Err(LowerError::WrongVariable { name: v.clone(), pos: e.pos, hint: "real mode uses x1…, y" }),
        },
        ExprKind::Neg(a) => -&to_real_poly(a, n)?,
        ExprKind::Pow(a, k) => to_real_poly(a, n)?.pow(*k),
        ExprKind::Bin(op, a, b) => {
            let (a, b) = (to_real_poly(a, n)?, to_real_poly(b, n)?);
            match op {
                BinOp::Add => &a + &b,
                BinOp::Sub => &a - &b,
                BinOp::Mul => &a * &b,
                BinOp::Div => {
                    if b.degree() > 0 {
                        return Err(LowerError::NonConstantDivisor { pos: e.pos });
                    }
                    let c = b.coeff(&vec![0; n]);
                    if c.is_zero() {
                        return Err(LowerError::DivisionByZero { pos: e.pos });
                    }
                    a.scale(&(BigRational::one() / c))
                }
            }
        }
        ExprKind::Call(f, a) => {
            let a = to_real_poly(a, n)?;
            match f {
                Func::Re | Func::Conj => a,
                Func::Im => RealPoly::zero(n),
                Func::Abs2 => &a * &a,
            }
        }
    })
}

/// Parses and lowers one complex expression.
pub fn parse_wpoly(src: &str) -> Result<WPoly, LowerError> {
    let e = parse(src)?;
    let nz = complex_dim(&[&e])?;
    to_wpoly(&e, nz)
}

/// Parses and lowers several complex expressions into a common dimension.
pub fn parse_wpolys(srcs: &[&str]) -> Result<Vec<WPoly>, LowerError> {
    let exprs = srcs.iter().map(|s| parse(s)).collect::<Result<Vec<_>, _>>()?;
    let nz = complex_dim(&exprs.iter().collect::<Vec<_>>())?;
    exprs.iter().map(|e| to_wpoly(e, nz)).collect()
}

pub fn parse_real_polys(srcs: &[&str]) -> Result<Vec<RealPoly>, LowerError> {
    let exprs = srcs.iter().map(|s| parse(s)).collect::<Result<Vec<_>, _>>()?;
    let n = real_dim(&exprs.iter().collect::<Vec<_>>())?;
    exprs.iter().map(|e| to_real_poly(e, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use pshdef_core::fixtures;

    #[test]
    fn example_source_lowers_to_fixture() {
        let src = "Im(w) + abs2(z)^2 + 100*abs2(z)^3 + 4*Re(z)*Re(w) - 8*Re(w)^2";
        assert_eq!(parse_wpoly(src).unwrap(), fixtures::r_a(8));
        assert_eq!(parse_wpoly(&fixtures::r_a_source(10)).unwrap(), fixtures::r_a(10));
        assert_eq!(parse_wpoly("Im(w)").unwrap(), WPoly::im_w(1));
    }

    #[test]
    fn canonical_text_reads_back() {
        for p in [fixtures::r_a(8), fixtures::mixed_c3(10), WPoly::im_w(1).scale(&GaussianRational::from_parts(1, 3, -2, 5))] {
            assert_eq!(parse_wpoly(&p.to_string()).unwrap(), p);
        }
    }

    #[test]
    fn dimension_and_alias() {
        assert_eq!(parse_wpoly("Im(w) + abs2(z2)").unwrap().nz(), 2);
        assert!(matches!(parse_wpoly("abs2(z) + abs2(z2)"), Err(LowerError::AmbiguousAlias { .. })));
        assert!(matches!(parse_wpoly("Im(w) + x"), Err(LowerError::WrongVariable { .. })));
        assert!(matches!(parse_wpoly("z / zbar"), Err(LowerError::NonConstantDivisor { .. })));
        assert!(matches!(parse_wpoly("z / (1 - 1)"), Err(LowerError::DivisionByZero { .. })));
        assert_eq!(parse_wpoly("z / (2i)").unwrap(), WPoly::var(1, Var::Z(0)).scale(&minus_half_i()));
    }

    #[test]
    fn real_mode() {
        let ps = parse_real_polys(&["y + x^4"]).unwrap();
        assert_eq!(ps[0].nvars(), 2);
        assert_eq!(ps[0].to_string_with(&RealPoly::convex_names(2)), "y + x^4");
        assert_eq!(parse_real_polys(&["y + x1^2 + abs2(x2)"]).unwrap()[0].nvars(), 3);
        assert!(matches!(parse_real_polys(&["y + w"]), Err(LowerError::WrongVariable { .. })));
        assert!(matches!(parse_real_polys(&["y + i"]), Err(LowerError::ComplexInRealMode { .. })));
    }

    #[test]
    fn syntactic_reality_implies_real_lowering() {
        for src in ["Im(w) + abs2(z)^2", "Re(z)*Im(z) - 3/4*Re(w)^3", "abs2(z + i*w)", "conj(Re(z))"] {
            let e = parse(src).unwrap();
            assert!(e.is_syntactically_real());
            assert!(to_wpoly(&e, 1).unwrap().is_real());
        }
    }
}
