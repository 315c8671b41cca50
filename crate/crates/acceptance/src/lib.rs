//! Acceptance criteria for `myoarm`, kept in their own package so that cargo
//! runs them after the library's suites. The checks live in
//! `tests/acceptance.rs`; run them with `cargo test -p myoarm-acceptance`.
