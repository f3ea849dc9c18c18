//! Acceptance checks live in `tests/acceptance.rs`; run with
//! `cargo test -p sawlab-suite --test acceptance`.
