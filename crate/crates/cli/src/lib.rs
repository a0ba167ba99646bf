//! Command-line front end: expression syntax, lowering to exact polynomials,
//! command dispatch and the JSON/CSV report formats.

pub mod commands;
pub mod expr;
pub mod lower;
pub mod report;

pub use commands::{run, Outcome};
