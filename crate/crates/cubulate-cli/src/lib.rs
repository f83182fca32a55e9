//! Command line driver for the cubulate toolkit: each subcommand writes a
//! deterministic JSON manifest, optionally DOT, and reports assertion
//! outcomes through its exit code.

pub mod app;
pub mod checks;
pub mod manifest;

pub use app::{run, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
pub use checks::{Outcome, Suite, SuiteConfig, CHECKS};
pub use manifest::{Assertion, RunManifest, SCHEMA_VERSION};
