//! Benchmark inputs shared by the bench targets.

use pshdef_core::{fixtures, DefiningFunction, WPoly};

/// `r_A` from the fixture family, already in normal form.
pub fn r_a(a: i64) -> DefiningFunction {
    DefiningFunction::new(fixtures::r_a(a)).expect("fixture is in normal form")
}

/// `ρ = r·(1 + 16r − 4 Im z)` for `r_8`, a typical verification target.
pub fn rho_r8() -> WPoly {
    let r = r_a(8);
    let h = &(&WPoly::one(1) + &r.poly().scale_int(16)) + &WPoly::im_z(1, 0).scale_int(-4);
    &h * r.poly()
}
