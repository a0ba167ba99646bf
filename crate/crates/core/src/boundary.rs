//! Boundary projection and low-discrepancy boundary samples.
//!
//! Points are parametrized by `(z, Re w)`; `Im w` is recovered by a 1-D Newton
//! solve of `r = level`, which is well posed near the origin because
//! `∂r/∂(Im w) = −2 Im r_w = 1` there.

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::DefiningFunction;
use crate::poly::{CPoint, CompiledPoly, Var};

/// Maximum `|r|` accepted after projection.
pub const RESIDUAL_BOUND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("Newton projection did not converge at radius {radius:e} (last residual {residual:e})")]
    NewtonDivergence { radius: f64, residual: f64 },
    #[error("no boundary points could be placed inside radius {radius:e}")]
    Empty { radius: f64 },
}

/// `r` and `r_w` compiled for repeated projection.
#[derive(Debug, Clone)]
pub struct Projector {
    nz: usize,
    r: CompiledPoly,
    r_w: CompiledPoly,
}

impl Projector {
    pub fn new(r: &DefiningFunction) -> Self {
        Projector { nz: r.nz(), r: r.poly().compile(), r_w: r.poly().deriv(Var::W).compile() }
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    /// Solves `r(z, u + iv) = level` for `v`, returning the point and `|r − level|`.
    pub fn project_to_level(&self, z: &[Complex64], re_w: f64, level: f64) -> Result<(CPoint, f64), f64> {
        let mut p = CPoint { z: z.to_vec(), w: Complex64::new(re_w, 0.0) };
        let mut last = f64::INFINITY;
        for _ in 0..80 {
            let g = self.r.eval(&p).re - level;
            last = g.abs();
            if g == 0.0 {
                return Ok((p, 0.0));
            }
            let dg = -2.0 * self.r_w.eval(&p).im;
            if !dg.is_finite() || dg.abs() < 1e-300 {
                return Err(last);
            }
            let step = g / dg;
            p.w.im -= step;
            if !p.w.im.is_finite() || p.w.im.abs() > 1e6 {
                return Err(last);
            }
            if step.abs() <= 4.0 * f64::EPSILON * p.w.im.abs().max(f64::MIN_POSITIVE) {
                let res = (self.r.eval(&p).re - level).abs();
                return if res <= RESIDUAL_BOUND { Ok((p, res)) } else { Err(res) };
            }
        }
        let res = (self.r.eval(&p).re - level).abs();
        if res <= RESIDUAL_BOUND {
            Ok((p, res))
        } else {
            Err(res.min(last))
        }
    }

    pub fn project(&self, z: &[Complex64], re_w: f64) -> Result<(CPoint, f64), f64> {
        self.project_to_level(z, re_w, 0.0)
    }

    /// Projects the real parameter vector `(x_1, y_1, …, u)`.
    pub fn project_params(&self, params: &[f64], level: f64) -> Result<(CPoint, f64), f64> {
        let z: Vec<Complex64> = (0..self.nz).map(|j| Complex64::new(params[2 * j], params[2 * j + 1])).collect();
        self.project_to_level(&z, params[2 * self.nz], level)
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    acc
}

/// Randomly shifted Halton points in `[0,1)^dim`, deterministic in the seed.
pub fn halton_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|i| (0..dim).map(|k| (radical_inverse(i, PRIMES[k]) + shift[k]).fract()).collect())
        .collect()
}

/// Maps the cube `[0,1)^d` onto the closed unit ball by radial rescaling.
pub fn cube_to_ball(h: &[f64]) -> Vec<f64> {
    let c: Vec<f64> = h.iter().map(|x| 2.0 * x - 1.0).collect();
    let inf = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let two = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if two == 0.0 {
        return c;
    }
    c.iter().map(|x| x * inf / two).collect()
}

/// Boundary points within a closed ball around the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryShell {
    pub radius: f64,
    pub requested_radius: f64,
    pub seed: u64,
    pub count: usize,
    pub max_residual: f64,
    #[serde(skip)]
    pub points: Vec<CPoint>,
    /// Points added along probe curves after the low-discrepancy sample.
    pub curve_points: usize,
}

impl BoundaryShell {
    /// Adds curve points lying inside the shell's ball.
    pub fn with_extra_points(mut self, extra: impl IntoIterator<Item = (CPoint, f64)>) -> Self {
        for (p, res) in extra {
            if p.norm() <= self.radius && res <= RESIDUAL_BOUND {
                self.max_residual = self.max_residual.max(res);
                self.points.push(p);
                self.curve_points += 1;
            }
        }
        self
    }

    /// Real coordinates of every point, one row each.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(CPoint::real_coords).collect()
    }
}

fn try_sample(proj: &Projector, radius: f64, count: usize, seed: u64, level: f64) -> Result<(Vec<CPoint>, f64), SampleError> {
    let nz = proj.nz();
    let dim = 2 * nz + 1;
    let mut pts = Vec::with_capacity(count);
    let mut max_res: f64 = 0.0;
    for h in halton_points(dim, count, seed) {
        let mut params: Vec<f64> = cube_to_ball(&h).iter().map(|x| x * radius).collect();
        let mut placed = false;
        for _ in 0..40 {
            match proj.project_params(&params, level) {
                Ok((p, res)) => {
                    if p.norm() <= radius {
                        max_res = max_res.max(res);
                        pts.push(p);
                        placed = true;
                        break;
                    }
                    params.iter_mut().for_each(|x| *x *= 0.9);
                }
                Err(res) => return Err(SampleError::NewtonDivergence { radius, residual: res }),
            }
        }
        if !placed {
            // Im w alone exceeds the radius; the ball is too large for this r.
            return Err(SampleError::NewtonDivergence { radius, residual: f64::NAN });
        }
    }
    if pts.is_empty() {
        return Err(SampleError::Empty { radius });
    }
    Ok((pts, max_res))
}

/// `count` boundary points within `radius`, halving the radius on Newton failure.
pub fn sample_boundary(r: &DefiningFunction, radius: f64, count: usize, seed: u64) -> Result<BoundaryShell, SampleError> {
    sample_level_set(&Projector::new(r), radius, count, seed, 0.0)
}

/// Same as [`sample_boundary`] but on `{r = level}`; negative levels give an inward collar.
pub fn sample_level_set(proj: &Projector, radius: f64, count: usize, seed: u64, level: f64) -> Result<BoundaryShell, SampleError> {
    let mut rad = radius;
    let mut last_err = None;
    for _ in 0..8 {
        match try_sample(proj, rad, count, seed, level) {
            Ok((points, max_residual)) => {
                return Ok(BoundaryShell {
                    radius: rad,
                    requested_radius: radius,
                    seed,
                    count: points.len(),
                    max_residual,
                    points,
                    curve_points: 0,
                })
            }
            Err(e) => {
                last_err = Some(e);
                rad *= 0.5;
            }
        }
    }
    Err(last_err.unwrap_or(SampleError::Empty { radius }))
}

/// Gaussian-direction helper shared by the probe generator.
pub(crate) fn random_unit_vectors(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::poly::WPoly;

    fn df(p: WPoly) -> DefiningFunction {
        DefiningFunction::new(p).unwrap()
    }

    #[test]
    fn explicit_projection_for_sphere_model() {
        let proj = Projector::new(&df(fixtures::sphere_model(1)));
        let (p, res) = proj.project(&[Complex64::new(0.1, 0.0)], 0.0).unwrap();
        assert!((p.w.im + 0.01).abs() < 1e-15);
        assert!(res <= RESIDUAL_BOUND);
    }

    #[test]
    fn flat_boundary_projects_to_zero() {
        let proj = Projector::new(&df(WPoly::im_w(1)));
        let (p, _) = proj.project(&[Complex64::new(0.3, -0.2)], 0.17).unwrap();
        assert_eq!(p.w.im, 0.0);
    }

    #[test]
    fn r8_projection_back_substitutes() {
        let r = df(fixtures::r_a(8));
        let proj = Projector::new(&r);
        let (p, res) = proj.project(&[Complex64::new(0.04, 0.0)], 0.01).unwrap();
        assert!(res <= RESIDUAL_BOUND);
        assert!(r.poly().eval(&p).norm() <= RESIDUAL_BOUND);
    }

    #[test]
    fn shell_points_stay_inside_ball_and_on_boundary() {
        let r = df(fixtures::r_a(10));
        let shell = sample_boundary(&r, 1e-2, 300, 7).unwrap();
        assert_eq!(shell.count, 300);
        for p in &shell.points {
            assert!(p.norm() <= 1e-2);
            assert!(r.poly().eval(p).norm() <= RESIDUAL_BOUND);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let r = df(fixtures::r_a(8));
        let a = sample_boundary(&r, 5e-2, 50, 3).unwrap();
        let b = sample_boundary(&r, 5e-2, 50, 3).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_boundary(&r, 5e-2, 50, 4).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn halton_fills_unit_cube() {
        let pts = halton_points(3, 64, 1);
        assert!(pts.iter().all(|p| p.iter().all(|x| (0.0..1.0).contains(x))));
        let b = cube_to_ball(&[1.0, 1.0, 0.5]);
        assert!((b.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
    }
}
