//! Reference defining functions used by tests, benches and the CLI examples.

use crate::poly::WPoly;

/// `Im w + |z|⁴ + 100|z|⁶ + 4 Re z Re w − A (Re w)²` on `ℂ²`.
pub fn r_a(a: i64) -> WPoly {
    let nz = 1;
    let abs2 = WPoly::abs2_z(nz, 0);
    let im_w = WPoly::im_w(nz);
    let re_w = WPoly::re_w(nz);
    let cross = (&WPoly::re_z(nz, 0) * &re_w).scale_int(4);
    &(&(&(&im_w + &abs2.pow(2)) + &abs2.pow(3).scale_int(100)) + &cross) - &re_w.pow(2).scale_int(a)
}

/// Source text of [`r_a`] in the CLI expression syntax.
pub fn r_a_source(a: i64) -> String {
    format!("Im(w) + abs2(z)^2 + 100*abs2(z)^3 + 4*Re(z)*Re(w) - {}*Re(w)^2", a)
}

/// `Im w + |z|²`, strongly pseudoconvex at the origin.
pub fn sphere_model(nz: usize) -> WPoly {
    (0..nz).fold(WPoly::im_w(nz), |acc, j| &acc + &WPoly::abs2_z(nz, j))
}

/// `Im w + |z₁|⁴ + |z₂|² + 4 Re z₁ Re w − A (Re w)²` on `ℂ³`.
pub fn mixed_c3(a: i64) -> WPoly {
    let nz = 2;
    let re_w = WPoly::re_w(nz);
    let base = &(&WPoly::im_w(nz) + &WPoly::abs2_z(nz, 0).pow(2)) + &WPoly::abs2_z(nz, 1);
    &(&base + &(&WPoly::re_z(nz, 0) * &re_w).scale_int(4)) - &re_w.pow(2).scale_int(a)
}
