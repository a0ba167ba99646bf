//! Byte-for-byte comparison of construction reports under a fixed seed.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p pshdef-cli --test golden`.

mod common;

use std::path::PathBuf;

use common::{pshdef, R10, R8};

fn check(name: &str, r: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let run = pshdef(&["construct", "--r", r, "--seed", "0", "--json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &run.stdout).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}; run with UPDATE_GOLDEN=1", path.display()));
    assert!(run.stdout == want, "{} differs from the committed report", path.display());
    let again = pshdef(&["construct", "--r", r, "--seed", "0", "--json"]);
    assert_eq!(again.stdout, run.stdout);
}

#[test]
fn r10_report_is_stable() {
    check("r10_construct.json", R10);
}

#[test]
fn r8_report_is_stable() {
    check("r8_construct.json", R8);
}
