mod common;

use common::{json, R10, R8};
use pshdef_cli::report::SCHEMA;

fn validate(args: &[&str]) {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let (_, report) = json(args);
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{args:?}:\n{}", errors.join("\n"));
}

#[test]
fn complex_reports_validate() {
    validate(&["construct", "--r", R10]);
    validate(&["construct", "--r", R8, "--max-stages", "1"]);
    validate(&["construct", "--r", "Im(w) + abs2(z1) + abs2(z2)"]);
    validate(&["construct", "--r", "Im(w) + abs2(z)^2 + 100*abs2(z)^3 + 4*Re(z)*Re(w) - 7*Re(w)^2", "--samples", "10000"]);
    validate(&["verify", "--r", R10, "--h", "1"]);
    validate(&["verify", "--r", "Im(w) + abs2(z)", "--h", "1 + Im(w) + abs2(z)", "--K", "1"]);
    validate(&["analyze", "--r", R8]);
    validate(&["levi", "--r", "Im(w) + abs2(z1) + abs2(z2)^2"]);
}

#[test]
fn real_reports_validate() {
    validate(&["construct", "--real", "--r", "y + x^2"]);
    validate(&["construct", "--real", "--r", "y + x1^2 + x2^4"]);
    validate(&["construct", "--real", "--r", "y - x^2"]);
    validate(&["verify", "--real", "--r", "y + x^4", "--h", "1 - 10*y"]);
    validate(&["analyze", "--real", "--r", "y + x^4"]);
    validate(&["levi", "--real", "--r", "y + x^4"]);
}

#[test]
fn schema_rejects_inconsistent_reports() {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let (_, mut report) = json(&["construct", "--real", "--r", "y + x^2"]);
    assert!(validator.is_valid(&report));
    report["exit_code"] = 1.into();
    assert!(!validator.is_valid(&report));
    report["exit_code"] = 0.into();
    report["result"]["final"].as_object_mut().unwrap().remove("t");
    assert!(!validator.is_valid(&report));
    report["schema"] = "pshdef-report/v2".into();
    assert!(!validator.is_valid(&report));
}
