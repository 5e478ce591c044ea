//! Acceptance gate for the winowise workspace.
//!
//! The criteria live in `tests/acceptance.rs`; each test prints one
//! `[criterion N] PASS`/diagnostic line. Run with
//! `cargo test -p acceptance -- --nocapture` to see the lines.
